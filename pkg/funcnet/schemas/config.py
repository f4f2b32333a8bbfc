"""
Pydantic schemas for run configuration

Every section rejects unknown keys and has a default for every key. A run configuration is
built from defaults, overlaid by a JSON config file, overlaid by command-line flags.
"""

import enum
import re
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from funcnet.core.simulate import MaternParams, ResponseKind, Scenario, ScenarioKind
from funcnet.models.activation import ActivationKind
from funcnet.schemas.architecture import (
    DEFAULT_HIDDEN_GRID,
    DEFAULT_N_BASIS,
    DEFAULT_SPLINE_ORDER,
    HiddenLayerSpec,
    NetworkArchitecture,
)


class LossKind(str, enum.Enum):
    SQUARED_ERROR = "squared_error"
    BINARY_CROSS_ENTROPY = "binary_cross_entropy"


class ModelKind(str, enum.Enum):
    FLM = "flm"
    FDNN = "fdnn"
    FBNN = "fbnn"
    FNN = "fnn"
    MLP = "mlp"


# Display names used in reports; "NN" is the plain network on raw samples
DISPLAY_NAMES = {
    ModelKind.FLM: "FLM",
    ModelKind.FDNN: "FDNN",
    ModelKind.FBNN: "FBNN",
    ModelKind.FNN: "FNN",
    ModelKind.MLP: "NN",
}
LABEL_PATTERN = re.compile(r"^\s*([A-Za-z]+)\s*(?:\(\s*(\d+(?:\s*,\s*\d+)*)\s*\))?\s*$")


class TrainConfig(BaseModel):
    """Gradient-descent settings shared by every network model"""

    model_config = ConfigDict(extra="forbid")

    lr: float = Field(0.01, gt=0)
    max_epochs: int = Field(2000, ge=0)
    batch_size: Optional[int] = Field(None, ge=1, description="None means full batch")
    patience: int = Field(50, ge=1)
    min_delta: float = Field(1e-5, ge=0)
    seed: int = Field(0, ge=0)
    early_stopping: bool = True
    lr_halving: bool = True
    standardize: bool = False
    loss: Optional[LossKind] = Field(None, description="Defaults from the response kind")


class ModelConfig(BaseModel):
    """Which model to build and its architecture"""

    model_config = ConfigDict(extra="forbid")

    kind: ModelKind = ModelKind.FDNN
    label: Optional[str] = None
    hidden: List[int] = Field(default_factory=lambda: [4])
    grid_size: int = Field(DEFAULT_HIDDEN_GRID, ge=2)
    activation: ActivationKind = ActivationKind.TANH
    n_basis: int = Field(DEFAULT_N_BASIS, ge=1)
    n_basis_bias: Optional[int] = Field(None, ge=1)
    n_basis_out: Optional[int] = Field(None, ge=1)
    n_basis_in: Optional[int] = Field(None, ge=1)
    spline_order: int = Field(DEFAULT_SPLINE_ORDER, ge=1)
    ridge: float = Field(1e-6, ge=0)
    functional_neurons: int = Field(4, ge=1)

    # Per-model overrides of the run's TrainConfig
    early_stopping: Optional[bool] = None
    lr: Optional[float] = Field(None, gt=0)
    max_epochs: Optional[int] = Field(None, ge=0)

    @field_validator("hidden")
    @classmethod
    def positive_layers(cls, value: List[int]) -> List[int]:
        if any(n < 1 for n in value):
            raise ValueError("every hidden layer needs at least one neuron")
        return value

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        base = DISPLAY_NAMES[self.kind]
        if self.kind in (ModelKind.FDNN, ModelKind.FBNN) and self.hidden != [4]:
            return f"{base}({','.join(str(n) for n in self.hidden)})"
        return base

    @classmethod
    def from_label(cls, label: str, **overrides) -> "ModelConfig":
        """Parse names such as "FLM", "NN", "FBNN(4,4)" (case-insensitive)"""
        match = LABEL_PATTERN.match(label)
        if not match:
            raise ValueError(f"cannot parse model name {label!r}")
        head = match.group(1).lower()
        kinds = {"nn": ModelKind.MLP, **{kind.value: kind for kind in ModelKind}}
        if head not in kinds:
            raise ValueError(f"unknown model {label!r}; valid names: FLM, FDNN, FBNN, FNN, NN (or MLP)")
        fields = {"kind": kinds[head], **overrides}
        if match.group(2):
            fields["hidden"] = [int(n) for n in match.group(2).split(",")]
            fields.setdefault("label", label.strip().upper().replace(" ", ""))
        return cls(**fields)

    def architecture(self, input_count: int, response_kind: ResponseKind) -> NetworkArchitecture:
        """Network architecture; the output activation follows the response kind"""
        output = ActivationKind.SIGMOID if response_kind is ResponseKind.BINARY else ActivationKind.LINEAR
        layers = [
            HiddenLayerSpec(
                neurons=n,
                grid_size=self.grid_size,
                activation=self.activation,
                n_basis_bias=self.n_basis_bias or self.n_basis,
                n_basis_out=self.n_basis_out or self.n_basis,
                n_basis_in=self.n_basis_in or self.n_basis,
                spline_order=self.spline_order,
            )
            for n in self.hidden
        ]
        return NetworkArchitecture(
            input_count=input_count,
            hidden=layers,
            output_activation=output,
            output_n_basis=self.n_basis_in or self.n_basis,
            output_spline_order=self.spline_order,
            functional_neurons=self.functional_neurons,
            functional_activation=self.activation,
        )


class ScenarioConfig(BaseModel):
    """Simulated data: generating model, sample size, grid and GP covariance"""

    model_config = ConfigDict(extra="forbid")

    name: ScenarioKind = ScenarioKind.LINEAR
    response: ResponseKind = ResponseKind.CONTINUOUS
    noise_sd: float = Field(1.0, ge=0)
    n: int = Field(1500, ge=1)
    grid_size: int = Field(200, ge=2)
    matern: MaternParams = Field(default_factory=MaternParams)

    @model_validator(mode="before")
    @classmethod
    def logistic_alias(cls, data):
        # "logistic" names the linear model with a binary response
        if isinstance(data, dict) and data.get("name") == "logistic":
            data = {**data, "name": ScenarioKind.LINEAR.value, "response": ResponseKind.BINARY.value}
        return data

    def scenario(self) -> Scenario:
        return Scenario(kind=self.name, response_kind=self.response, noise_sd=self.noise_sd)


class SplitConfig(BaseModel):
    """Random train/validation/test partition; validation is carved out of training"""

    model_config = ConfigDict(extra="forbid")

    test_fraction: float = Field(1.0 / 3.0, ge=0, lt=1)
    validation_fraction: float = Field(0.5, ge=0, lt=1)


def default_benchmark_models() -> List[ModelConfig]:
    return [ModelConfig(kind=ModelKind.FLM), ModelConfig(kind=ModelKind.FDNN), ModelConfig(kind=ModelKind.FBNN)]


class BenchmarkConfig(BaseModel):
    """Replicated simulation study over scenarios x models"""

    model_config = ConfigDict(extra="forbid")

    scenarios: List[ScenarioKind] = Field(default_factory=lambda: [ScenarioKind.LINEAR])
    response: ResponseKind = ResponseKind.CONTINUOUS
    models: List[ModelConfig] = Field(default_factory=default_benchmark_models)
    reps: int = Field(10, ge=1)
    base_seed: int = Field(0, ge=0)
    n_train: int = Field(1000, ge=2)
    n_validation: int = Field(500, ge=1)
    n_test: int = Field(500, ge=1)
    grid_size: int = Field(200, ge=2)
    noise_sd: float = Field(1.0, ge=0)
    matern: MaternParams = Field(default_factory=MaternParams)

    @model_validator(mode="before")
    @classmethod
    def parse_model_names(cls, data):
        # models may be given by name ("FBNN(4,4)") as well as by full section
        if isinstance(data, dict) and isinstance(data.get("models"), list):
            data = {
                **data,
                "models": [ModelConfig.from_label(m) if isinstance(m, str) else m for m in data["models"]],
            }
        return data

    @model_validator(mode="after")
    def validation_fits(self):
        if self.n_validation >= self.n_train:
            raise ValueError("n_validation must be smaller than n_train")
        return self


class RunConfig(BaseModel):
    """Complete configuration for one command invocation"""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0)
    data: Optional[str] = None
    out: Optional[str] = None
    weights: Optional[str] = None
    response: Optional[ResponseKind] = Field(None, description="Response kind of a CSV dataset; inferred when unset")

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    benchmark: BenchmarkConfig = Field(default_factory=BenchmarkConfig)
