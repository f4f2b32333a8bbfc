"""
`simulate`: draw a dataset from one of the scenarios and write it as CSV
"""

import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field

from funcnet.commands.common import compact, load_run_config, require, scenario_override
from funcnet.core.dataset_io import write_csv
from funcnet.core.grid import make_uniform_grid
from funcnet.core.simulate import CurveSet, simulate_curve_set
from funcnet.schemas.config import RunConfig

logger = logging.getLogger(__name__)


def cmd_simulate(cfg: RunConfig) -> CurveSet:
    out = Path(require(cfg.out, "--out"))
    scenario = cfg.scenario.scenario()
    grid = make_uniform_grid(cfg.scenario.grid_size)
    data = simulate_curve_set(scenario, cfg.scenario.n, grid, cfg.scenario.matern, cfg.seed)
    write_csv(out, data)
    print(
        f"n={len(data)} m={len(grid)} scenario={scenario.label} "
        f"response={scenario.response_kind.value} seed={cfg.seed} out={out}"
    )
    return data


class SimulateCommand(BaseModel):
    """Simulate curves and responses and write them as a CSV dataset"""

    config: Optional[str] = Field(None, description="JSON run configuration")
    seed: Optional[int] = Field(None, description="Random seed")
    out: Optional[str] = Field(None, description="Output CSV path")
    scenario: Optional[str] = Field(None, description="Scenario name (linear, logistic, cam, ...)")

    def cli_cmd(self) -> None:
        overrides = compact(
            {
                "seed": self.seed,
                "out": self.out,
                "scenario": scenario_override(self.scenario) if self.scenario else None,
            }
        )
        cmd_simulate(load_run_config(self.config, overrides))
