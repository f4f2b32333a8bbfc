"""
Pydantic schemas describing network architectures
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from funcnet.models.activation import ActivationKind

DEFAULT_HIDDEN_GRID = 50
DEFAULT_N_BASIS = 7
DEFAULT_SPLINE_ORDER = 4


class HiddenLayerSpec(BaseModel):
    """One continuous hidden layer (or one dense layer for the FNN/MLP baselines)"""

    model_config = ConfigDict(extra="forbid")

    neurons: int = Field(..., ge=1)
    inputs: Optional[int] = Field(None, ge=1, description="Incoming neurons; must match the previous layer")
    grid_size: int = Field(DEFAULT_HIDDEN_GRID, ge=2)
    activation: ActivationKind = ActivationKind.TANH

    # Basis systems (FBNN only): v* for the bias, v(s) and v(t) for the weight surface
    n_basis_bias: int = Field(DEFAULT_N_BASIS, ge=1)
    n_basis_out: int = Field(DEFAULT_N_BASIS, ge=1)
    n_basis_in: int = Field(DEFAULT_N_BASIS, ge=1)
    spline_order: int = Field(DEFAULT_SPLINE_ORDER, ge=1)
    interior_knots_in: Optional[List[float]] = None


class NetworkArchitecture(BaseModel):
    """Layer sizes, grids, bases and activations of a functional network"""

    model_config = ConfigDict(extra="forbid")

    input_count: int = Field(1, ge=1)
    hidden: List[HiddenLayerSpec] = Field(default_factory=lambda: [HiddenLayerSpec(neurons=4)])
    output_activation: ActivationKind = ActivationKind.LINEAR

    # FBNN output layer basis and FNN functional layer width
    output_n_basis: int = Field(DEFAULT_N_BASIS, ge=1)
    output_spline_order: int = Field(DEFAULT_SPLINE_ORDER, ge=1)
    functional_neurons: int = Field(4, ge=1)
    functional_activation: ActivationKind = ActivationKind.TANH
