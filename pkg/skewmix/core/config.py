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

import os
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import tomli

from skewmix.core.errors import ConfigError
from skewmix.core.util import parse_override, set_dotted


class ConfigLoader:
    def __init__(
        self, path: Path, namespace: str = None, overrides: Sequence[str] = ()
    ):
        self.path = Path(path)
        self.namespace = namespace
        self.overrides = tuple(overrides)

    def load_document(self) -> Dict[str, Any]:
        """
        Reads the TOML document, selects the namespace (if any) and applies the
        `key.path=value` overrides in order.
        """
        with open(self.path, "rb") as file:
            try:
                document = tomli.load(file)
            except tomli.TOMLDecodeError as exc:
                raise ConfigError("<file>", str(exc)) from exc
        if self.namespace is not None:
            document = document.get(self.namespace)
            if document is None:
                raise ConfigError(
                    self.namespace,
                    f"did not find '{self.namespace}' namespace in {self.path}",
                )
        for override in self.overrides:
            key, value = parse_override(override)
            set_dotted(document, key, value)
        return document

    def get(self, dotted: str) -> Optional[Any]:
        node: Any = self.load_document()
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                return None
            node = node[part]
        return node

    def __eq__(self, other):
        return other is self or (
            isinstance(other, ConfigLoader)
            and other.namespace == self.namespace
            and other.path == self.path
            and other.overrides == self.overrides
        )


class SeedProvider(ABC):
    @abstractmethod
    def get(self) -> int:
        pass

    def try_get(self) -> Optional[int]:
        return self.get()


class StaticSeedProvider(SeedProvider):
    def __init__(self, seed: int):
        self.seed = seed

    def get(self) -> int:
        return self.seed

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, StaticSeedProvider) and other.seed == self.seed
        )


class EnvironmentSeedProvider(SeedProvider):
    def __init__(self, env_var: str = None):
        self.env_var = env_var or "SKEWMIX_SEED"

    def get(self) -> int:
        seed = self.try_get()
        if seed is not None:
            return seed
        raise ValueError(f"${self.env_var} is unset or empty")

    def try_get(self) -> Optional[int]:
        raw = os.environ.get(self.env_var)
        if not raw:
            return None
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"${self.env_var}", f"not an integer: {raw!r}") from exc

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, EnvironmentSeedProvider)
            and other.env_var == self.env_var
        )


class ConfigFileSeedProvider(SeedProvider):
    def __init__(self, config_loader: ConfigLoader):
        self.config_loader = config_loader

    def get(self) -> int:
        seed = self.try_get()
        if seed is not None:
            return seed
        raise ValueError("experiment.seed not found in config file")

    def try_get(self) -> Optional[int]:
        try:
            seed = self.config_loader.get("experiment.seed")
        except FileNotFoundError:
            return None
        return None if seed is None else int(seed)

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, ConfigFileSeedProvider)
            and other.config_loader == self.config_loader
        )


class SeedProviderChain(SeedProvider):
    def __init__(self, *args: SeedProvider):
        self.providers = args

    def get(self) -> int:
        try:
            return next(
                val
                for val in (provider.try_get() for provider in self.providers)
                if val is not None
            )
        except StopIteration as exc:
            raise ValueError("No configured seed found.") from exc

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, SeedProviderChain) and other.providers == self.providers
        )


class OutputDirectoryProvider(ABC):
    @abstractmethod
    def get(self) -> Path:
        pass

    def try_get(self) -> Optional[Path]:
        return self.get()


class StaticOutputDirectoryProvider(OutputDirectoryProvider):
    def __init__(self, directory: Path):
        self.directory = Path(directory)

    def get(self) -> Path:
        return self.directory

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, StaticOutputDirectoryProvider)
            and other.directory == self.directory
        )


class EnvironmentOutputDirectoryProvider(OutputDirectoryProvider):
    def __init__(self, env_var: str = None):
        self.env_var = env_var or "SKEWMIX_OUT"

    def get(self) -> Path:
        directory = self.try_get()
        if directory:
            return directory
        raise ValueError(f"${self.env_var} is unset or empty")

    def try_get(self) -> Optional[Path]:
        raw = os.environ.get(self.env_var)
        return Path(raw) if raw else None

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, EnvironmentOutputDirectoryProvider)
            and other.env_var == self.env_var
        )


class ConfigFileOutputDirectoryProvider(OutputDirectoryProvider):
    def __init__(self, config_loader: ConfigLoader):
        self.config_loader = config_loader

    def get(self) -> Path:
        directory = self.try_get()
        if directory:
            return directory
        raise ValueError("output.directory not found in config file")

    def try_get(self) -> Optional[Path]:
        try:
            directory = self.config_loader.get("output.directory")
        except FileNotFoundError:
            return None
        return Path(directory) if directory else None

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, ConfigFileOutputDirectoryProvider)
            and other.config_loader == self.config_loader
        )


class OutputDirectoryProviderChain(OutputDirectoryProvider):
    def __init__(self, *args: OutputDirectoryProvider):
        self.providers = args

    def get(self) -> Path:
        try:
            return next(
                val
                for val in (provider.try_get() for provider in self.providers)
                if val is not None
            )
        except StopIteration as exc:
            raise ValueError("No configured output directory found.") from exc

    def __eq__(self, other: object) -> bool:
        return other is self or (
            isinstance(other, OutputDirectoryProviderChain)
            and other.providers == self.providers
        )
