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

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from skewmix.core.errors import ConfigError
from skewmix.mixing.correlate import ESTIMATORS
from skewmix.mixing.presets import GLOBAL_OBSERVABLES, LOCAL_OBSERVABLES, SYSTEMS

KINDS = ("gibbs", "spectrum", "correlate", "cancel", "access", "rates")


@dataclass(frozen=True)
class SystemConfig:
    preset: Optional[str] = None
    alphabet_size: Optional[int] = None
    transitions: Optional[List[List[int]]] = None
    theta: float = 0.5
    depth: Optional[int] = None
    potential: Optional[Dict[str, float]] = None
    potential_depth: int = 0
    cocycle: Optional[Dict[str, float]] = None
    cocycle_depth: int = 1
    center: bool = True

    def __post_init__(self):
        if self.preset is not None:
            if self.preset not in SYSTEMS:
                raise ConfigError("system.preset", f"unknown preset '{self.preset}'")
            return
        for name in ("alphabet_size", "transitions", "cocycle"):
            if getattr(self, name) is None:
                raise ConfigError(f"system.{name}", "required when no preset is given")


@dataclass(frozen=True)
class ObservablesConfig:
    phi: str = "cosine"
    psi: str = "gaussian_bump"
    phi_params: Dict[str, Any] = field(default_factory=dict)
    psi_params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.phi not in GLOBAL_OBSERVABLES:
            raise ConfigError("observables.phi", f"unknown global observable '{self.phi}'")
        if self.psi not in LOCAL_OBSERVABLES:
            raise ConfigError("observables.psi", f"unknown local observable '{self.psi}'")


@dataclass(frozen=True)
class ExperimentSection:
    kind: str
    n: List[int] = field(default_factory=lambda: [0, 1, 2, 4, 8, 12])
    alpha: float = 0.4
    xi: Optional[List[float]] = None
    profile_xi: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.2, 1.0, 2.0, 4.0])
    n_max: int = 200
    seed: Optional[int] = None
    samples: int = 100_000
    estimator: str = "spectral"
    budget: int = 2_000_000
    max_pairs: int = 4
    closeness: Optional[int] = None
    epsilon: Optional[float] = None
    xi0: float = 1.0
    trials: int = 100
    window: Optional[List[int]] = None
    levels: List[float] = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0])
    log_power: float = 0.0
    exponent_range: Optional[List[float]] = None
    k: float = 4.0
    eps: float = 0.1
    max_period: int = 8

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError("experiment.kind", f"expected one of {KINDS}, got '{self.kind}'")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(
                "experiment.estimator", f"expected one of {ESTIMATORS}, got '{self.estimator}'"
            )
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError("experiment.alpha", "must lie in (0, 1/2)")
        if any(n < 0 for n in self.n):
            raise ConfigError("experiment.n", "values must be nonnegative")
        if self.window is not None and len(self.window) != 2:
            raise ConfigError("experiment.window", "expected [first, last]")
        if self.exponent_range is not None and (
            len(self.exponent_range) != 2 or self.exponent_range[0] >= self.exponent_range[1]
        ):
            raise ConfigError("experiment.exponent_range", "expected [low, high] with low < high")


@dataclass(frozen=True)
class OutputConfig:
    directory: Optional[str] = None
    plots: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentSection
    system: SystemConfig = field(default_factory=lambda: SystemConfig(preset="bernoulli_s1"))
    observables: ObservablesConfig = field(default_factory=ObservablesConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"

    @classmethod
    def of(cls, condition: Optional[bool]) -> "Verdict":
        if condition is None:
            return cls.SKIPPED
        return cls.PASS if condition else cls.FAIL


@dataclass
class ResultManifest:
    config: Dict[str, Any]
    version: str
    seeds: Dict[str, int]
    outputs: List[Path] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    verdicts: Dict[str, Verdict] = field(default_factory=dict)
    results: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v is not Verdict.FAIL for v in self.verdicts.values())

    def as_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "config": self.config,
            "seeds": self.seeds,
            "outputs": [str(p) for p in self.outputs],
            "timings": self.timings,
            "verdicts": {k: v.value for k, v in self.verdicts.items()},
            "results": self.results,
        }
