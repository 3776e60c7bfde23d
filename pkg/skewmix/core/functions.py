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

from pathlib import Path
from typing import Optional

from .config import (
    ConfigFileOutputDirectoryProvider,
    ConfigFileSeedProvider,
    ConfigLoader,
    EnvironmentOutputDirectoryProvider,
    EnvironmentSeedProvider,
    OutputDirectoryProviderChain,
    SeedProviderChain,
    StaticOutputDirectoryProvider,
    StaticSeedProvider,
)
from .types import RunContext

DEFAULT_SEED = 0
DEFAULT_OUTPUT_DIRECTORY = Path("results")


def context(
    seed: Optional[int] = None,
    out: Optional[str] = None,
    config_loader: Optional[ConfigLoader] = None,
) -> RunContext:
    """
    Creates a new :class:`RunContext` resolving the seed and output directory of a run.

    If `seed` is not specified then a provider chain will use, in order:
        1) The value of the `SKEWMIX_SEED` environment variable
        2) The value of `experiment.seed` in the configuration file
        3) 0

    If `out` is not specified then a provider chain will use, in order:
        1) The value of the `SKEWMIX_OUT` environment variable
        2) The value of `output.directory` in the configuration file
        3) `./results`

    Args:
        seed: Base seed of every random stream of the run.
        out: Directory receiving CSV tables, plots and the manifest.
        config_loader: Loader of the experiment configuration, consulted last.

    Returns: A :class:`RunContext` that the experiment runner reads seeds and paths from.
    """
    seed_chain = [EnvironmentSeedProvider()]
    out_chain = [EnvironmentOutputDirectoryProvider()]
    if config_loader is not None:
        seed_chain.append(ConfigFileSeedProvider(config_loader))
        out_chain.append(ConfigFileOutputDirectoryProvider(config_loader))
    seed_chain.append(StaticSeedProvider(DEFAULT_SEED))
    out_chain.append(StaticOutputDirectoryProvider(DEFAULT_OUTPUT_DIRECTORY))
    return RunContext(
        seed=(
            StaticSeedProvider(seed) if seed is not None else SeedProviderChain(*seed_chain)
        ),
        output=(
            StaticOutputDirectoryProvider(Path(out))
            if out
            else OutputDirectoryProviderChain(*out_chain)
        ),
    )
