"""
`fit`: train the configured model on a CSV dataset, save it and report on stdout
"""

import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field

from funcnet.commands.common import compact, load_run_config, model_override, require
from funcnet.core.benchmark import cell_train_config
from funcnet.core.dataset_io import read_csv
from funcnet.core.random import derived_seed
from funcnet.core.serialization import save_model
from funcnet.core.training import fit, split_from_config
from funcnet.models.registry import build_model
from funcnet.schemas.config import RunConfig
from funcnet.schemas.report import FitReport

logger = logging.getLogger(__name__)

DEFAULT_MODEL_PATH = "model.json"


def cmd_fit(cfg: RunConfig) -> FitReport:
    data = read_csv(require(cfg.data, "--data"), cfg.response)
    train = cell_train_config(cfg.model, cfg.train, cfg.seed)
    split = split_from_config(len(data), cfg.split, train.early_stopping, derived_seed(cfg.seed, "split"))
    model = build_model(
        cfg.model, data.grid, data.predictor_count, data.response_kind, derived_seed(cfg.seed, "init", cfg.model.name)
    )
    report = fit(model, data, split, train, label=cfg.model.name)
    save_model(Path(cfg.out or DEFAULT_MODEL_PATH), model, data.response_kind, data.domain, cfg.model.name)
    print(report.model_dump_json())
    return report


class FitCommand(BaseModel):
    """Fit a model to a CSV dataset"""

    config: Optional[str] = Field(None, description="JSON run configuration")
    seed: Optional[int] = Field(None, description="Random seed for the split and initialization")
    data: Optional[str] = Field(None, description="CSV dataset")
    out: Optional[str] = Field(None, description="Where to save the fitted model")
    model: Optional[str] = Field(None, description="Model name, e.g. FLM, FDNN, FBNN(4,4), FNN, NN")

    def cli_cmd(self) -> None:
        overrides = compact(
            {
                "seed": self.seed,
                "data": self.data,
                "out": self.out,
                "model": model_override(self.model) if self.model else None,
            }
        )
        cmd_fit(load_run_config(self.config, overrides))
