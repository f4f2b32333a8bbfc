"""
Pydantic schemas for saved model files
"""

import base64
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

ARTIFACT_FORMAT = "funcnet-model"


class ArrayPayload(BaseModel):
    """A float64 array as base64 of its little-endian bytes plus its shape"""

    model_config = ConfigDict(extra="forbid")

    dtype: Literal["<f8"] = "<f8"
    shape: List[int]
    data: str

    @classmethod
    def from_array(cls, array: np.ndarray) -> "ArrayPayload":
        array = np.ascontiguousarray(array, dtype="<f8")
        return cls(shape=list(array.shape), data=base64.b64encode(array.tobytes()).decode("ascii"))

    def to_array(self) -> np.ndarray:
        flat = np.frombuffer(base64.b64decode(self.data), dtype="<f8")
        expected = int(np.prod(self.shape)) if self.shape else 1
        if flat.size != expected:
            raise ValueError(f"array payload holds {flat.size} values for shape {self.shape}")
        return flat.reshape(self.shape).astype(float)


class InputScaling(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shift: ArrayPayload
    scale: ArrayPayload


class ModelArtifact(BaseModel):
    """Versioned container for a trained model"""

    model_config = ConfigDict(extra="forbid")

    format: Literal["funcnet-model"] = ARTIFACT_FORMAT
    version: int = Field(..., ge=1)
    kind: str
    label: Optional[str] = None
    response_kind: str
    grid: ArrayPayload
    grid_weights: Optional[ArrayPayload] = None
    domain: Tuple[float, float] = (0.0, 1.0)
    architecture: Dict[str, Any]
    parameters: Dict[str, ArrayPayload]
    input_scaling: Optional[InputScaling] = None
