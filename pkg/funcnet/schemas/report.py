"""
Pydantic schemas for fit and benchmark reports
"""

from typing import List, Optional

from pydantic import BaseModel, Field


class Metrics(BaseModel):
    """Prediction quality on one index set

    classification_error and mean_log_likelihood (the mean negative log-likelihood) are
    only defined for binary responses.
    """

    n: int
    rmse: float
    classification_error: Optional[float] = None
    mean_log_likelihood: Optional[float] = None


class FitReport(BaseModel):
    """Outcome of one training run"""

    model: str
    kind: str
    parameter_count: int
    epochs_run: int = 0
    best_epoch: int = 0
    stopped_early: bool = False
    final_lr: Optional[float] = None
    train_loss: List[float] = Field(default_factory=list)
    val_loss: List[float] = Field(default_factory=list)
    train_metrics: Metrics
    validation_metrics: Optional[Metrics] = None
    test_metrics: Optional[Metrics] = None
    train_idx: List[int] = Field(default_factory=list)
    val_idx: List[int] = Field(default_factory=list)
    test_idx: List[int] = Field(default_factory=list)
    wall_time: float = 0.0


class BenchmarkCell(BaseModel):
    """One (scenario, model, replication) run"""

    scenario: str
    model: str
    rep: int
    seed: int
    status: str = "ok"
    error: Optional[str] = None
    rmse: Optional[float] = None
    classification_error: Optional[float] = None
    mean_log_likelihood: Optional[float] = None
    best_epoch: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class BenchmarkSummary(BaseModel):
    """Mean and standard error of every metric over the successful replications of a cell"""

    scenario: str
    model: str
    n_ok: int
    n_failed: int
    rmse_mean: Optional[float] = None
    rmse_se: Optional[float] = None
    classification_error_mean: Optional[float] = None
    classification_error_se: Optional[float] = None
    mean_log_likelihood_mean: Optional[float] = None
    mean_log_likelihood_se: Optional[float] = None


class BenchmarkReport(BaseModel):
    cells: List[BenchmarkCell]
    summary: List[BenchmarkSummary]

    @property
    def failed(self) -> List[BenchmarkCell]:
        return [cell for cell in self.cells if not cell.ok]
