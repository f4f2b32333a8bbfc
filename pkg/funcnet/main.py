"""
Command-line entry point

    funcnet simulate  --config run.json --seed 7 --out data.csv
    funcnet fit       --data data.csv --model FBNN --out model.json
    funcnet benchmark --reps 10 --scenario linear --model FLM,FDNN,FBNN --out results/
    funcnet predict   --weights model.json --data data.csv --out predictions.csv

Exit codes: 0 ok, 1 domain error, 2 usage or configuration error.
"""

import logging
import sys
from typing import List, Optional

from pydantic import ValidationError
from pydantic_settings import BaseSettings, CliApp, CliSubCommand, SettingsConfigDict, SettingsError

from funcnet.commands.benchmark import BenchmarkCommand
from funcnet.commands.common import describe_validation_error
from funcnet.commands.fit import FitCommand
from funcnet.commands.predict import PredictCommand
from funcnet.commands.simulate import SimulateCommand
from funcnet.core.config import get_settings
from funcnet.core.errors import ConfigError, FuncNetError

logger = logging.getLogger(__name__)


class FuncNetCLI(BaseSettings):
    """Functional neural networks for scalar-on-function regression"""

    model_config = SettingsConfigDict(cli_prog_name="funcnet")

    simulate: CliSubCommand[SimulateCommand]
    fit: CliSubCommand[FitCommand]
    benchmark: CliSubCommand[BenchmarkCommand]
    predict: CliSubCommand[PredictCommand]

    def cli_cmd(self) -> None:
        CliApp.run_subcommand(self)


def configure_logging() -> None:
    logging.basicConfig(
        level=get_settings().log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        CliApp.run(FuncNetCLI, cli_args=args)
    except FuncNetError as exc:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        print(f"error: {describe_validation_error(exc)}", file=sys.stderr)
        return ConfigError.exit_code
    except SettingsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except SystemExit as exc:
        # argparse usage errors exit with 2, --help with 0
        return exc.code if isinstance(exc.code, int) else ConfigError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
