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

"""Named systems and observables selectable from configuration files."""

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
from scipy import special

from skewmix.core.util import alias
from skewmix.mixing.gibbs import Potential
from skewmix.mixing.observables import FrequencyGrid, GlobalObservable, LocalObservable
from skewmix.mixing.skewprod import FiberCocycle
from skewmix.mixing.symbolic import SftSpace, build_sft

SYSTEMS = alias(ignore_case=True)
GLOBAL_OBSERVABLES = alias(ignore_case=True)
LOCAL_OBSERVABLES = alias(ignore_case=True)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SkewSystem:
    sft: SftSpace
    potential: Potential
    cocycle: FiberCocycle
    name: str = "custom"
    accessible: Optional[bool] = None


@SYSTEMS.alias(
    "bernoulli_s1",
    description="full 2-shift, Bernoulli(1/2), f(x0 x1) = (1, -1, sqrt2, -sqrt2); accessible",
)
def bernoulli_s1(theta: float = 0.5) -> SkewSystem:
    sft = build_sft(2, [[1, 1], [1, 1]], theta)
    potential = Potential.constant(sft, -math.log(2.0))
    cocycle = FiberCocycle(sft, 2, np.array([1.0, -1.0, SQRT2, -SQRT2]))
    return SkewSystem(sft, potential, cocycle, "bernoulli_s1", True)


@SYSTEMS.alias(
    "golden_mean",
    description="golden-mean shift with its Parry measure, f the centered indicator of x0 = 0",
)
def golden_mean(theta: float = 0.5) -> SkewSystem:
    sft = build_sft(2, [[1, 1], [1, 0]], theta)
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    weight = phi**2 / (phi**2 + 1.0)
    # Parry mass of the cylinder [0] is weight; the cocycle below integrates to zero
    cocycle = FiberCocycle(sft, 1, np.array([1.0 - weight, -weight]))
    return SkewSystem(sft, Potential.constant(sft, 0.0), cocycle, "golden_mean", None)


@SYSTEMS.alias(
    "lattice_counterexample",
    description="full 2-shift with f(x0 x1) = 1 - 2 x1, valued in an odd lattice; non-accessible",
)
def lattice_counterexample(theta: float = 0.5) -> SkewSystem:
    sft = build_sft(2, [[1, 1], [1, 1]], theta)
    potential = Potential.constant(sft, -math.log(2.0))
    cocycle = FiberCocycle(sft, 2, np.array([1.0, -1.0, 1.0, -1.0]))
    return SkewSystem(sft, potential, cocycle, "lattice_counterexample", False)


@GLOBAL_OBSERVABLES.alias("cosine", description="Phi(r) = cos(frequency r), atoms at +-frequency")
def cosine(sft: SftSpace, frequency: float = 1.0, alpha: float = 0.4) -> GlobalObservable:
    if frequency == 0:
        return constant(sft, alpha=alpha)
    grid = FrequencyGrid.empty(alpha)
    atoms = ((-frequency, 0.5 + 0j), (frequency, 0.5 + 0j))
    return GlobalObservable(
        sft,
        0,
        (atoms,),
        grid,
        np.zeros((1, 0)),
        lambda _, r: np.cos(frequency * r),
        (math.inf, 0.0),
        "cosine",
    )


@GLOBAL_OBSERVABLES.alias("constant", description="Phi = 1, a single atom at frequency 0")
def constant(sft: SftSpace, alpha: float = 0.4) -> GlobalObservable:
    return GlobalObservable(
        sft,
        0,
        (((0.0, 1.0 + 0j),),),
        FrequencyGrid.empty(alpha),
        np.zeros((1, 0)),
        lambda _, r: np.ones_like(r),
        (math.inf, 0.0),
        "constant",
    )


@GLOBAL_OBSERVABLES.alias(
    "gaussian_bump", "gaussian", description="Phi(r) = exp(-r^2/2), standard normal spectral density"
)
def gaussian(
    sft: SftSpace, xi_max: float = 12.0, step: float = 1.0 / 64.0, alpha: float = 0.4
) -> GlobalObservable:
    grid = FrequencyGrid.uniform(xi_max, step, alpha)
    return GlobalObservable(
        sft,
        0,
        ((),),
        grid,
        normal_density(grid.nodes),
        lambda _, r: np.exp(-(r**2) / 2.0),
        None,
        "gaussian_bump",
        normal_density,
    )


def normal_density(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return (np.exp(-(xi**2) / 2.0) / math.sqrt(2.0 * math.pi)).reshape(1, -1)


def inverse_abs_density(xi: np.ndarray) -> np.ndarray:
    """Spectral density of 1/(1+|r|), logarithmic at 0 and of order 1/(pi xi^2) at infinity."""
    x = np.abs(np.asarray(xi, dtype=float))
    si, ci = special.sici(x)
    return ((math.pi / 2.0 - si) * np.sin(x) - ci * np.cos(x)) / math.pi


def _inverse_abs_words(xi: np.ndarray) -> np.ndarray:
    return inverse_abs_density(xi).reshape(1, -1)


def cauchy_density(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return (1.0 / (math.pi * (1.0 + xi**2))).reshape(1, -1)


@GLOBAL_OBSERVABLES.alias(
    "inverse_abs",
    description="Phi(r) = 1/(1+|r|), vanishing at infinity, correlations decaying like log n / sqrt n",
)
def inverse_abs(
    sft: SftSpace,
    xi_max: float = 64.0,
    step: float = 1.0 / 64.0,
    smallest: float = 1e-6,
    cells_per_decade: int = 96,
    alpha: float = 0.4,
) -> GlobalObservable:
    grid = FrequencyGrid.graded(xi_max, step, smallest, cells_per_decade, alpha)
    return GlobalObservable(
        sft,
        0,
        ((),),
        grid,
        _inverse_abs_words(grid.nodes),
        lambda _, r: 1.0 / (1.0 + np.abs(r)),
        None,
        "inverse_abs",
        _inverse_abs_words,
    )


@GLOBAL_OBSERVABLES.alias(
    "laplace", description="Phi(r) = exp(-|r|), Cauchy spectral density with tail 2/(pi r)"
)
def laplace(
    sft: SftSpace, xi_max: float = 1024.0, step: float = 1.0 / 16.0, alpha: float = 0.4
) -> GlobalObservable:
    grid = FrequencyGrid.uniform(xi_max, step, alpha)
    return GlobalObservable(
        sft,
        0,
        ((),),
        grid,
        cauchy_density(grid.nodes),
        lambda _, r: np.exp(-np.abs(r)),
        (1.0, 2.0 / math.pi),
        "laplace",
        cauchy_density,
    )


@GLOBAL_OBSERVABLES.alias(
    "atoms", description="word-dependent atom table {word: [[location, re, im], ...]}"
)
def atoms_table(
    sft: SftSpace, depth: int, table: Mapping[str, Sequence[Sequence[float]]], alpha: float = 0.4
) -> GlobalObservable:
    index = sft.index(depth)
    per_word = [()] * len(index)
    for key, rows in table.items():
        symbols = tuple(int(c) for c in key)
        if symbols not in index:
            raise KeyError(key)
        per_word[index[symbols]] = tuple(
            (float(row[0]), complex(row[1], row[2] if len(row) > 2 else 0.0)) for row in rows
        )
    return GlobalObservable(
        sft,
        depth,
        tuple(per_word),
        FrequencyGrid.empty(alpha),
        np.zeros((len(index), 0)),
        name="atoms",
    )


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    inner = np.clip(t, 1e-12, 1 - 1e-12)
    a = np.exp(-1.0 / inner)
    b = np.exp(-1.0 / (1.0 - inner))
    return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, a / (a + b)))


@LOCAL_OBSERVABLES.alias("gaussian_bump", description="psi(r) = exp(-r^2/2)")
def gaussian_bump(sft: SftSpace, r_max: float = 40.0, dr: float = 1.0 / 64.0) -> LocalObservable:
    return LocalObservable.from_profile(
        sft, 0, lambda _, r: np.exp(-(r**2) / 2.0), r_max, dr, "gaussian_bump"
    )


@LOCAL_OBSERVABLES.alias(
    "mollified_indicator", description="smooth, 1 on [-1/2, 1/2], supported in [-1, 1]"
)
def mollified_indicator(
    sft: SftSpace, r_max: float = 40.0, dr: float = 1.0 / 64.0
) -> LocalObservable:
    return LocalObservable.from_profile(
        sft, 0, lambda _, r: smooth_step((1.0 - np.abs(r)) / 0.5), r_max, dr, "mollified_indicator"
    )


@LOCAL_OBSERVABLES.alias(
    "scaled_bump",
    description="word-dependent exp(-(r - shift_w)^2/2) scale_w from {word: [scale, shift]}",
)
def scaled_bump(
    sft: SftSpace,
    depth: int,
    table: Mapping[str, Sequence[float]],
    r_max: float = 40.0,
    dr: float = 1.0 / 64.0,
) -> LocalObservable:
    words = sft.words(depth)
    params: Dict[int, Sequence[float]] = {}
    for i, word in enumerate(words):
        params[i] = table.get(str(word), (1.0, 0.0))

    def profile(i: int, r: np.ndarray) -> np.ndarray:
        scale, shift = params[i]
        return scale * np.exp(-((r - shift) ** 2) / 2.0)

    return LocalObservable.from_profile(sft, depth, profile, r_max, dr, "scaled_bump")


def list_presets() -> str:
    lines = ["systems:"]
    lines += [f"  {name}: {text}" for name, text in SYSTEMS.describe()]
    lines.append("global observables:")
    lines += [f"  {name}: {text}" for name, text in GLOBAL_OBSERVABLES.describe()]
    lines.append("local observables:")
    lines += [f"  {name}: {text}" for name, text in LOCAL_OBSERVABLES.describe()]
    return "\n".join(lines)
