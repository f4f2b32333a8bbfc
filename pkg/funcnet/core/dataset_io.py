"""
CSV dataset format

    grid,t_1,...,t_m
    y,x(t_1),...,x(t_m)
    ...

Files with several functional predictors repeat the block once per predictor, each block
introduced by a `predictor:<r>` marker row; every block must use the same grid and list the
same responses. Numbers are written with 17 significant digits so a write/read round trip
is exact. Grids outside [0, 1] are mapped affinely onto [0, 1] on reading and the original
span is kept in `CurveSet.domain`.
"""

import csv
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from funcnet.core.config import get_settings
from funcnet.core.errors import DataFormatError, DatasetIOError
from funcnet.core.grid import make_grid
from funcnet.core.simulate import CurveSet, ResponseKind

logger = logging.getLogger(__name__)

GRID_LABEL = "grid"
MARKER_PREFIX = "predictor:"


def format_number(value: float) -> str:
    return format(float(value), f".{get_settings().csv_digits}g")


def _parse_number(text: str, row: int, column: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(f"{text!r} is not a number", row=row, column=column)
    if not math.isfinite(value):
        raise DataFormatError(f"{text!r} is not finite", row=row, column=column)
    return value


def _parse_block(rows: List[Tuple[int, List[str]]]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One grid header plus data rows -> (grid points, responses, curves)"""
    header_row, header = rows[0]
    if not header or header[0].strip() != GRID_LABEL:
        raise DataFormatError(f"expected a '{GRID_LABEL}' header row", row=header_row, column=1)
    points = np.array([_parse_number(v, header_row, c) for c, v in enumerate(header[1:], start=2)])
    if points.size < 2:
        raise DataFormatError("the grid needs at least 2 time points", row=header_row)
    for c in range(1, points.size):
        if points[c] <= points[c - 1]:
            raise DataFormatError("grid must be strictly increasing", row=header_row, column=c + 2)
    m = points.size
    if len(rows) < 2:
        raise DataFormatError("no data rows after the grid header", row=header_row)
    responses, curves = [], []
    for row_number, fields in rows[1:]:
        if len(fields) != m + 1:
            raise DataFormatError(
                f"expected {m + 1} fields, found {len(fields)}",
                row=row_number,
                column=min(len(fields), m + 1) + 1,
            )
        values = [_parse_number(v, row_number, c) for c, v in enumerate(fields, start=1)]
        responses.append(values[0])
        curves.append(values[1:])
    return points, np.array(responses), np.array(curves)


def read_csv(path, response_kind: Optional[ResponseKind] = None) -> CurveSet:
    """Parse a dataset file

    When `response_kind` is not given, responses that are all 0 or 1 are taken as binary.
    """
    path = Path(path)
    try:
        with open(path, newline="") as handle:
            raw = [(number, row) for number, row in enumerate(csv.reader(handle), start=1) if row]
    except OSError as exc:
        raise DatasetIOError(path, exc.strerror or str(exc))
    except csv.Error as exc:
        raise DataFormatError(str(exc))
    if not raw:
        raise DataFormatError("the file is empty", row=1)

    blocks: List[List[Tuple[int, List[str]]]] = []
    if raw[0][1][0].strip().startswith(MARKER_PREFIX):
        for number, row in raw:
            if row[0].strip().startswith(MARKER_PREFIX):
                expected = len(blocks)
                label = row[0].strip()[len(MARKER_PREFIX):]
                if len(row) != 1 or label != str(expected):
                    raise DataFormatError(f"expected marker '{MARKER_PREFIX}{expected}'", row=number, column=1)
                blocks.append([])
            else:
                blocks[-1].append((number, row))
        if any(not block for block in blocks):
            raise DataFormatError("empty predictor block")
    else:
        blocks = [raw]

    parsed = [_parse_block(block) for block in blocks]
    points, responses, _ = parsed[0]
    for r, (block, (other_points, other_responses, _)) in enumerate(zip(blocks, parsed)):
        if other_points.shape != points.shape or np.any(other_points != points):
            raise DataFormatError(f"predictor {r} uses a different grid", row=block[0][0])
        if other_responses.shape != responses.shape or np.any(other_responses != responses):
            raise DataFormatError(f"predictor {r} lists different responses", row=block[0][0])
    predictors = np.stack([curves for _, _, curves in parsed], axis=1)

    domain = (0.0, 1.0)
    if points[0] < 0.0 or points[-1] > 1.0:
        domain = (float(points[0]), float(points[-1]))
        points = (points - domain[0]) / (domain[1] - domain[0])
        logger.info(f"Mapped grid span [{domain[0]:g}, {domain[1]:g}] onto [0, 1]")
    if response_kind is None:
        binary = bool(np.all(np.isin(responses, (0.0, 1.0))))
        response_kind = ResponseKind.BINARY if binary else ResponseKind.CONTINUOUS
    data = CurveSet(make_grid(points), predictors, responses, ResponseKind(response_kind), domain)
    logger.info(f"Read {len(data)} samples x {data.predictor_count} predictor(s) on {len(data.grid)} points from {path}")
    return data


def _original_points(data: CurveSet) -> np.ndarray:
    a, b = data.domain
    if (a, b) == (0.0, 1.0):
        return data.grid.points
    return a + data.grid.points * (b - a)


def write_csv(path, data: CurveSet) -> Path:
    path = Path(path)
    header = [GRID_LABEL, *(format_number(t) for t in _original_points(data))]
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            for r in range(data.predictor_count):
                if data.predictor_count > 1:
                    writer.writerow([f"{MARKER_PREFIX}{r}"])
                writer.writerow(header)
                for y, curve in zip(data.responses, data.predictors[:, r, :]):
                    writer.writerow([format_number(y), *(format_number(v) for v in curve)])
    except OSError as exc:
        raise DatasetIOError(path, exc.strerror or str(exc))
    logger.info(f"Wrote {len(data)} samples to {path}")
    return path


def write_predictions(path, yhat: np.ndarray, binary: bool, threshold: float = 0.5) -> Path:
    """One row per sample: prediction, or probability and label for binary models"""
    path = Path(path)
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            if binary:
                writer.writerow(["probability", "label"])
                for p in yhat:
                    writer.writerow([format_number(p), int(p >= threshold)])
            else:
                writer.writerow(["prediction"])
                for value in yhat:
                    writer.writerow([format_number(value)])
    except OSError as exc:
        raise DatasetIOError(path, exc.strerror or str(exc))
    return path
