"""
Head Models
Transformer encoder shape and prediction output
"""

from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class HeadConfig(BaseModel):
    """Encoder stack plus linear classifier"""
    layers: int = Field(2, ge=1, description="Encoder depth")
    heads: int = Field(4, ge=1, description="Attention heads")
    token_width: int = Field(128, ge=1, description="Token width c")
    mlp_ratio: float = Field(2.0, gt=0, description="Feed-forward hidden width / c")
    num_classes: int = Field(2, ge=2, description="Number of classes")
    use_class_token: bool = Field(True, description="Pool via a learnt class token instead of the token mean")
    final_norm: bool = Field(True, description="Layer-normalize the pooled vector before the classifier")

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def check_heads(self) -> 'HeadConfig':
        if self.token_width % self.heads:
            raise ValueError(f"token_width {self.token_width} is not divisible by heads {self.heads}")
        return self

    @property
    def head_dim(self) -> int:
        return self.token_width // self.heads

    @property
    def hidden_width(self) -> int:
        return int(round(self.token_width * self.mlp_ratio))


class Prediction(BaseModel):
    """Class probabilities for one readout"""
    probs: List[float] = Field(..., description="Probability per class, sums to 1")
    label: int = Field(..., ge=0, description="Argmax class")
    step: Optional[int] = Field(None, description="Global step of the classified snapshot")
    degenerate: bool = Field(False, description="True when the snapshot held no tokens")

    @field_validator('probs')
    @classmethod
    def validate_simplex(cls, v: List[float]) -> List[float]:
        if any(p < 0 for p in v) or abs(sum(v) - 1.0) > 1e-6:
            raise ValueError("Probabilities must be non-negative and sum to 1")
        return v

    model_config = {
        "json_schema_extra": {
            "examples": [{"probs": [0.7, 0.3], "label": 0, "step": 8192, "degenerate": False}]
        }
    }
