"""
Replicated simulation study

For every (scenario, model, replication) cell a fresh dataset is simulated with seed
base_seed + rep, split into train / test (with validation carved from training for models
that stop early), fitted and evaluated. Cells own their data, model and random streams,
so they can run in any order or in parallel and still give identical numbers.
"""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from funcnet.core.errors import DatasetIOError, FuncNetError
from funcnet.core.grid import make_uniform_grid
from funcnet.core.random import derived_seed
from funcnet.core.simulate import ResponseKind, Scenario, ScenarioKind, simulate_curve_set
from funcnet.core.training import fit, make_split
from funcnet.models.registry import build_model
from funcnet.schemas.config import BenchmarkConfig, ModelConfig, ModelKind, TrainConfig
from funcnet.schemas.report import BenchmarkCell, BenchmarkReport, BenchmarkSummary

logger = logging.getLogger(__name__)

CELL_FIELDS = ["scenario", "model", "rep", "seed", "status", "rmse", "classification_error", "mean_log_likelihood", "best_epoch", "error"]
SUMMARY_FIELDS = list(BenchmarkSummary.model_fields)


def cell_train_config(model_cfg: ModelConfig, train: TrainConfig, seed: int) -> TrainConfig:
    """Run-level training settings with the model's overrides applied"""
    update = {"seed": seed}
    for name in ("early_stopping", "lr", "max_epochs"):
        value = getattr(model_cfg, name)
        if value is not None:
            update[name] = value
    if model_cfg.kind is ModelKind.FLM:
        update["early_stopping"] = False
    return train.model_copy(update=update)


def run_cell(
    scenario_kind: ScenarioKind,
    model_cfg: ModelConfig,
    rep: int,
    cfg: BenchmarkConfig,
    train: TrainConfig,
) -> BenchmarkCell:
    seed = cfg.base_seed + rep
    scenario = Scenario(kind=scenario_kind, response_kind=cfg.response, noise_sd=cfg.noise_sd)
    cell = BenchmarkCell(scenario=scenario.label, model=model_cfg.name, rep=rep, seed=seed)
    try:
        grid = make_uniform_grid(cfg.grid_size)
        data = simulate_curve_set(scenario, cfg.n_train + cfg.n_test, grid, cfg.matern, seed)
        train_cfg = cell_train_config(model_cfg, train, seed)
        n_validation = cfg.n_validation if train_cfg.early_stopping else 0
        split = make_split(len(data), cfg.n_test, n_validation, derived_seed(seed, "split"))
        model = build_model(model_cfg, grid, 1, cfg.response, derived_seed(seed, "init", model_cfg.name))
        report = fit(model, data, split, train_cfg, label=model_cfg.name)
    except (FuncNetError, ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.warning(f"Cell {cell.scenario}/{cell.model}/rep {rep} failed: {exc}")
        return cell.model_copy(update={"status": "failed", "error": str(exc)})
    metrics = report.test_metrics
    logger.info(f"Cell {cell.scenario}/{cell.model}/rep {rep}: test RMSE {metrics.rmse:.4f}")
    return cell.model_copy(
        update={
            "rmse": metrics.rmse,
            "classification_error": metrics.classification_error,
            "mean_log_likelihood": metrics.mean_log_likelihood,
            "best_epoch": report.best_epoch,
        }
    )


def _run_task(task) -> BenchmarkCell:
    return run_cell(*task)


def benchmark(cfg: BenchmarkConfig, train: TrainConfig, threads: int = 1) -> BenchmarkReport:
    """Every scenario x model x replication cell, then the per-(scenario, model) summary"""
    tasks = [
        (scenario, model_cfg, rep, cfg, train)
        for scenario in cfg.scenarios
        for model_cfg in cfg.models
        for rep in range(cfg.reps)
    ]
    logger.info(f"Running {len(tasks)} benchmark cells on {threads} worker(s)")
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(_run_task, tasks))
    else:
        cells = [_run_task(task) for task in tasks]
    return BenchmarkReport(cells=cells, summary=summarize(cells))


def _mean_se(values: List[float]) -> Tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else None
    return float(arr.mean()), se


def summarize(cells: List[BenchmarkCell]) -> List[BenchmarkSummary]:
    groups: Dict[Tuple[str, str], List[BenchmarkCell]] = {}
    for cell in cells:
        groups.setdefault((cell.scenario, cell.model), []).append(cell)
    summary = []
    for (scenario, model), members in groups.items():
        ok = [c for c in members if c.ok]
        fields = {"scenario": scenario, "model": model, "n_ok": len(ok), "n_failed": len(members) - len(ok)}
        for metric in ("rmse", "classification_error", "mean_log_likelihood"):
            values = [getattr(c, metric) for c in ok if getattr(c, metric) is not None]
            fields[f"{metric}_mean"], fields[f"{metric}_se"] = _mean_se(values)
        summary.append(BenchmarkSummary(**fields))
    return summary


def _format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_rows(path: Path, fields: List[str], rows: List[dict]) -> None:
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(fields)
            for row in rows:
                writer.writerow([_format_number(row.get(name)) for name in fields])
    except OSError as exc:
        raise DatasetIOError(path, exc.strerror or str(exc))


def summary_table(report: BenchmarkReport, response: ResponseKind) -> str:
    """Aligned text table, scenarios as rows and models as columns, "mean (se)" entries"""
    metric = "classification_error" if response is ResponseKind.BINARY else "rmse"
    scenarios = list(dict.fromkeys(s.scenario for s in report.summary))
    models = list(dict.fromkeys(s.model for s in report.summary))
    lookup = {(s.scenario, s.model): s for s in report.summary}

    def entry(summary: Optional[BenchmarkSummary]) -> str:
        if summary is None or getattr(summary, f"{metric}_mean") is None:
            return "failed"
        mean, se = getattr(summary, f"{metric}_mean"), getattr(summary, f"{metric}_se")
        return f"{mean:.3f} ({se:.3f})" if se is not None else f"{mean:.3f}"

    rows = [["scenario", *models]]
    rows += [[scenario, *(entry(lookup.get((scenario, model))) for model in models)] for scenario in scenarios]
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    title = "Test classification error" if metric == "classification_error" else "Test RMSE"
    lines = [f"{title}, mean (standard error)"]
    lines += ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def write_report(report: BenchmarkReport, out_dir, response: ResponseKind) -> List[Path]:
    """cells.csv, summary.csv and summary.txt in out_dir"""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetIOError(out_dir, exc.strerror or str(exc))
    paths = [out_dir / "cells.csv", out_dir / "summary.csv", out_dir / "summary.txt"]
    _write_rows(paths[0], CELL_FIELDS, [cell.model_dump() for cell in report.cells])
    _write_rows(paths[1], SUMMARY_FIELDS, [row.model_dump() for row in report.summary])
    try:
        paths[2].write_text(summary_table(report, response))
    except OSError as exc:
        raise DatasetIOError(paths[2], exc.strerror or str(exc))
    logger.info(f"Wrote benchmark outputs to {out_dir}")
    return paths
