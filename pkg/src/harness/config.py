"""
Configuration
Typed settings bundle loaded from flat section.field=value files with command-line overrides
"""

import os
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

from dotenv import dotenv_values
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.alert.models import AlertConfig, ReadoutSchedule, ScheduleMode
from src.embedder.models import EmbedderConfig, MlpConfig, TimeEncodingConfig
from src.events.models import InputMode
from src.events.synthetic import GeneratorConfig
from src.grid.patch_grid import GridConfig
from src.head.models import HeadConfig
from src.utils.errors import ConfigError, UsageError


CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"
DEFAULT_PRESET = "default"


class PositionalConfig(BaseModel):
    """Positional embedding switch"""
    enabled: bool = Field(True, description="Add the learnt per-cell table to every token")

    model_config = {"frozen": True}


class GenerationConfig(BaseModel):
    """Synthetic stream knobs; sensor size comes from grid, class count from head"""
    rate_hz: int = Field(62_000, ge=1, description="Events per second")
    duration_us: int = Field(1_000_000, ge=1, description="Stream length in microseconds")
    num_blobs: int = Field(3, ge=1)
    blob_sigma: float = Field(3.0, gt=0)
    speed_px_s: float = Field(40.0, ge=0)
    noise_fraction: float = Field(0.05, ge=0, le=1)
    seed: int = Field(0, ge=0, description="Base seed; file i of class c uses seed + 1000 * c + i")

    model_config = {"frozen": True}


class SamplingConfig(BaseModel):
    """Synchronous sampling of a stream into samples"""
    mode: InputMode = Field(InputMode.CCIM)
    ne: int = Field(8192, ge=1, description="Events per CCIM sample")
    delta_t: int = Field(132_000, ge=1, description="CTIM window in microseconds")
    windows: int = Field(100, ge=1, description="Random windows drawn by verify")
    seed: int = Field(0, ge=0)

    model_config = {"frozen": True}


class ReadoutConfig(BaseModel):
    """When the asynchronous engine is read out"""
    mode: ScheduleMode = Field(ScheduleMode.TIME)
    every: Optional[int] = Field(132_000, ge=1, description="Microseconds (time) or events (count)")

    model_config = {"frozen": True}

    def schedule(self) -> ReadoutSchedule:
        return ReadoutSchedule(mode=self.mode, every=None if self.mode == ScheduleMode.END else self.every)


class EvalConfig(BaseModel):
    """Synthetic end-to-end evaluation"""
    nva_n: int = Field(5, ge=1, description="Sliding vote window length")
    files_per_class: int = Field(2, ge=1)

    model_config = {"frozen": True}


class Settings(BaseModel):
    """Every section of a config file"""
    grid: GridConfig = Field(default_factory=GridConfig)
    te: TimeEncodingConfig = Field(default_factory=TimeEncodingConfig)
    mlp: MlpConfig = Field(default_factory=MlpConfig)
    pos: PositionalConfig = Field(default_factory=PositionalConfig)
    alert: AlertConfig = Field(default_factory=AlertConfig)
    head: HeadConfig = Field(default_factory=HeadConfig)
    gen: GenerationConfig = Field(default_factory=GenerationConfig)
    sample: SamplingConfig = Field(default_factory=SamplingConfig)
    readout: ReadoutConfig = Field(default_factory=ReadoutConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def check_widths(self) -> 'Settings':
        if self.head.token_width != self.mlp.out_channels:
            raise ValueError(
                f"head.token_width {self.head.token_width} != mlp.out_channels {self.mlp.out_channels}"
            )
        return self

    @property
    def embedder(self) -> EmbedderConfig:
        return EmbedderConfig(grid=self.grid, te=self.te, mlp=self.mlp, pos_enabled=self.pos.enabled)

    def generator(self, class_id: int = 0, **updates) -> GeneratorConfig:
        """GeneratorConfig for one class on this sensor"""
        fields = self.gen.model_dump(exclude={'seed'})
        fields.update(updates)
        try:
            return GeneratorConfig(
                sensor_width=self.grid.sensor_width,
                sensor_height=self.grid.sensor_height,
                class_id=class_id,
                num_classes=self.head.num_classes,
                **fields
            )
        except ValidationError as e:
            raise ConfigError(
                f"Invalid generator settings: {e.errors()[0]['msg']}",
                {"class_id": class_id, "num_classes": self.head.num_classes}
            ) from e

    def flat(self) -> Dict[str, object]:
        """section.field -> value, as written in config files"""
        flat = {}
        for section in type(self).model_fields:
            dumped = getattr(self, section).model_dump(mode="json", by_alias=True)
            for key, value in dumped.items():
                flat[f"{section}.{key}"] = value
        return flat


def resolve_config_path(config: Optional[Union[str, Path]] = None) -> Path:
    """
    Locate a config file

    Args:
        config: Preset name (e.g. "lmm"), file path, or None for ALERT_CONFIG / default

    Returns:
        Existing file path

    Raises:
        ConfigError: If neither a file nor a preset of that name exists
    """
    config = config or os.getenv("ALERT_CONFIG") or DEFAULT_PRESET
    path = Path(config)
    if path.is_file():
        return path

    preset = CONFIG_DIR / f"{config}.env"
    if preset.is_file():
        return preset
    raise ConfigError(f"Config '{config}' not found", {"path": str(path)})


def parse_override(item: str) -> Tuple[str, str]:
    """Split one --set key=value argument"""
    key, sep, value = item.partition("=")
    if not sep or not key.strip():
        raise UsageError(f"Override '{item}' is not key=value")
    return key.strip(), value.strip()


def load_settings(
    config: Optional[Union[str, Path]] = None,
    overrides: Iterable[str] = ()
) -> Settings:
    """
    Build Settings from a preset or file plus overrides

    Args:
        config: Preset name, file path, or None
        overrides: "section.field=value" strings applied last

    Returns:
        Validated Settings

    Raises:
        UsageError: On an unknown key or malformed override
        ConfigError: On a missing file or an invalid value
    """
    path = resolve_config_path(config)
    values = dict(dotenv_values(path))
    for item in overrides:
        key, value = parse_override(item)
        values[key] = value

    sections: Dict[str, Dict[str, str]] = {}
    for key, value in values.items():
        section, field = _split_key(key)
        if value is None:
            raise ConfigError(f"Key '{key}' has no value", {"key": key})
        sections.setdefault(section, {})[field] = value

    try:
        settings = Settings(**sections)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first['loc'])
        raise ConfigError(f"Invalid config value: {first['msg']}", {"key": location or "settings"}) from e

    logger.debug(f"Loaded settings from {path} with {len(values)} keys")
    return settings


def weights_path(path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """Explicit path, else ALERT_WEIGHTS, else None"""
    chosen = path or os.getenv("ALERT_WEIGHTS")
    return Path(chosen) if chosen else None


def _split_key(key: str) -> Tuple[str, str]:
    section, sep, field = key.partition(".")
    model = Settings.model_fields.get(section) if sep else None
    if model is None:
        raise UsageError(f"Unknown config key '{key}'", {"key": key})

    section_type = model.annotation
    known = set(section_type.model_fields)
    known.update(f.alias for f in section_type.model_fields.values() if f.alias)
    if field not in known:
        raise UsageError(f"Unknown config key '{key}'", {"key": key})
    return section, field
