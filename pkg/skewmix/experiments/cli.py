#  (c) Copyright 2026 skewmix authors. All rights reserved.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from skewmix.core.errors import ConfigError
from skewmix.experiments.errors import ExperimentError
from skewmix.experiments.runner import load_config, run
from skewmix.experiments.types import Verdict
from skewmix.mixing.presets import list_presets

LOGGER = logging.getLogger(__name__)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewmix", description="Mixing experiments for skew products with global observables"
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run the experiment of a TOML config")
    run_parser.add_argument("--config", required=True, type=Path)
    run_parser.add_argument("--out", default=None, help="output directory")
    run_parser.add_argument("--seed", type=int, default=None, help="base seed")
    run_parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config value, e.g. experiment.n=[1,2,4]",
    )
    run_parser.add_argument("--plots", choices=("on", "off"), default=None)

    validate = commands.add_parser("validate", help="check a TOML config without running it")
    validate.add_argument("--config", required=True, type=Path)
    validate.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    commands.add_parser("list-presets", help="print the systems and observables by name")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the `skewmix` script.

    Returns: 0 when the command succeeded and every verdict of a run passed, 1 otherwise.
    """
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.command == "list-presets":
        print(list_presets())
        return 0

    try:
        if args.command == "validate":
            load_config(args.config, args.overrides)
            LOGGER.info("%s is valid", args.config)
            return 0
        overrides = list(args.overrides)
        if args.plots is not None:
            overrides.append(f"output.plots={'true' if args.plots == 'on' else 'false'}")
        manifest = run(args.config, overrides, seed=args.seed, out=args.out)
    except (ConfigError, ExperimentError, OSError) as exc:
        LOGGER.error("%s", exc)
        return 1
    if not manifest.passed:
        failed = sorted(k for k, v in manifest.verdicts.items() if v is Verdict.FAIL)
        LOGGER.error("failed verdicts: %s", ", ".join(failed))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
