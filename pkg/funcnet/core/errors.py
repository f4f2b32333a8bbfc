"""
Exception hierarchy shared by the library and the command-line interface
"""

from typing import Optional


class FuncNetError(Exception):
    """Base error: a readable detail plus the process exit code it maps to"""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidArgumentError(FuncNetError, ValueError):
    """A precondition on an argument does not hold"""


class GridMismatchError(InvalidArgumentError):
    """Two grids that must coincide do not"""

    def __init__(self, expected, received, what: str = "grid"):
        super().__init__(
            f"{what} mismatch: expected {describe_grid(expected)}, got {describe_grid(received)}"
        )
        self.expected = expected
        self.received = received


class NumericFailureError(FuncNetError, ArithmeticError):
    """A numerical routine failed (factorization, divergence, non-finite values)"""

    def __init__(self, detail: str, layer: Optional[str] = None, epoch: Optional[int] = None):
        if layer is not None:
            detail = f"{detail} (layer {layer})"
        if epoch is not None:
            detail = f"{detail} (epoch {epoch})"
        super().__init__(detail)
        self.layer = layer
        self.epoch = epoch


class ConfigError(FuncNetError):
    """Invalid run configuration or command-line usage"""

    exit_code = 2


class DataFormatError(FuncNetError):
    """Malformed dataset file; row and column are 1-based"""

    def __init__(self, detail: str, row: Optional[int] = None, column: Optional[int] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            detail = f"{', '.join(location)}: {detail}"
        super().__init__(detail)
        self.row = row
        self.column = column


class DatasetIOError(FuncNetError, OSError):
    """A file could not be read or written"""

    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path


class BenchmarkFailure(FuncNetError):
    """At least one benchmark cell failed; outputs were still written"""


def describe_grid(grid) -> str:
    try:
        return f"{len(grid)} points on [{grid.points[0]:.6g}, {grid.points[-1]:.6g}]"
    except (AttributeError, TypeError, IndexError):
        return repr(grid)
