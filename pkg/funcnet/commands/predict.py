"""
`predict`: apply a saved model to the curves of a CSV dataset
"""

import logging
import sys
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from funcnet.commands.common import compact, load_run_config, require
from funcnet.core.dataset_io import format_number, read_csv, write_predictions
from funcnet.core.errors import GridMismatchError
from funcnet.core.serialization import load_model
from funcnet.core.simulate import ResponseKind
from funcnet.core.training import CLASSIFICATION_THRESHOLD
from funcnet.models.fbnn import FbnnModel
from funcnet.schemas.config import RunConfig

logger = logging.getLogger(__name__)


def cmd_predict(cfg: RunConfig) -> np.ndarray:
    loaded = load_model(require(cfg.weights, "--weights"))
    # responses in a prediction file are placeholders, so no binary check
    data = read_csv(require(cfg.data, "--data"), ResponseKind.CONTINUOUS)
    model = loaded.model
    x = data.predictors
    if not model.input_grid.same_as(data.grid):
        if not isinstance(model, FbnnModel):
            raise GridMismatchError(model.input_grid, data.grid, "model and dataset grid")
        logger.info(f"Projecting {len(data)} samples onto the model grid by B-spline smoothing")
        x = model.ingest([data.grid.points] * len(data), [list(sample) for sample in data.predictors])
    yhat = model.predict(x)
    binary = loaded.response_kind is ResponseKind.BINARY
    if cfg.out:
        write_predictions(cfg.out, yhat, binary, CLASSIFICATION_THRESHOLD)
    else:
        print("probability,label" if binary else "prediction")
        for value in yhat:
            print(f"{format_number(value)},{int(value >= CLASSIFICATION_THRESHOLD)}" if binary else format_number(value))
        sys.stdout.flush()
    return yhat


class PredictCommand(BaseModel):
    """Predict responses for the curves of a CSV dataset"""

    config: Optional[str] = Field(None, description="JSON run configuration")
    weights: Optional[str] = Field(None, description="Saved model file")
    data: Optional[str] = Field(None, description="CSV dataset")
    out: Optional[str] = Field(None, description="Predictions CSV (standard output when omitted)")

    def cli_cmd(self) -> None:
        overrides = compact({"weights": self.weights, "data": self.data, "out": self.out})
        cmd_predict(load_run_config(self.config, overrides))
