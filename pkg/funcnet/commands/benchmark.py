"""
`benchmark`: replicated simulation study with per-cell and aggregated tables
"""

import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field

from funcnet.commands.common import compact, load_run_config, split_model_names
from funcnet.core.benchmark import benchmark, summary_table, write_report
from funcnet.core.config import get_settings
from funcnet.core.errors import BenchmarkFailure
from funcnet.schemas.config import RunConfig
from funcnet.schemas.report import BenchmarkReport

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = "benchmark"


def cmd_benchmark(cfg: RunConfig) -> BenchmarkReport:
    report = benchmark(cfg.benchmark, cfg.train, threads=get_settings().threads)
    write_report(report, Path(cfg.out or DEFAULT_OUT_DIR), cfg.benchmark.response)
    print(summary_table(report, cfg.benchmark.response), end="")
    if report.failed:
        raise BenchmarkFailure(f"{len(report.failed)} of {len(report.cells)} benchmark cells failed")
    return report


class BenchmarkCommand(BaseModel):
    """Run the simulation study and write cells.csv, summary.csv and summary.txt"""

    config: Optional[str] = Field(None, description="JSON run configuration")
    seed: Optional[int] = Field(None, description="Base seed; replication r uses seed + r")
    reps: Optional[int] = Field(None, description="Replications per scenario and model")
    out: Optional[str] = Field(None, description="Output directory")
    scenario: Optional[str] = Field(None, description="Run only this scenario")
    model: Optional[str] = Field(None, description="Comma-separated model names, e.g. FLM,FBNN(4,4)")

    def cli_cmd(self) -> None:
        section = {"reps": self.reps, "base_seed": self.seed}
        if self.scenario == "logistic":
            section.update(scenarios=["linear"], response="binary")
        elif self.scenario:
            section["scenarios"] = [self.scenario]
        if self.model:
            section["models"] = split_model_names(self.model)
        overrides = compact({"out": self.out, "benchmark": compact(section)})
        cmd_benchmark(load_run_config(self.config, overrides))
