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

"""
Local observables psi (per-word fiber functions on a uniform grid) and global
observables Phi (per-word complex spectral measures, atoms plus density), with
the fiber Fourier transform and the averages, variations and tail bounds built
on them.

Conventions: Phi(w, r) = integral of exp(-i r xi) d eta_w(xi) and
psi_hat_xi(w) = integral of exp(-i r xi) psi(w, r) dr.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, partial
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from skewmix.mixing.errors import NotPositiveError
from skewmix.mixing.gibbs import RpfData, cylinder_measures
from skewmix.mixing.symbolic import SftSpace, StateFunction, agreement_matrix

LOGGER = logging.getLogger(__name__)

DEFAULT_R_MAX = 40.0
DEFAULT_DR = 1.0 / 64.0
FOURIER_CHUNK = 256

Profile = Callable[[int, np.ndarray], np.ndarray]
Atom = Tuple[float, complex]
SpectralDensity = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """
    Midpoint quadrature: cell i is [edges[i], edges[i+1]], node at its centre,
    weight its width. Zero is never an interior point of a cell.
    """

    edges: np.ndarray
    alpha: float = 0.4

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.size and np.any(np.diff(edges) <= 0):
            raise ValueError("frequency grid edges must be strictly increasing")
        if edges.size and np.any((edges[:-1] < 0) & (edges[1:] > 0)):
            raise ValueError("no frequency cell may straddle zero")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 1/2), got {self.alpha}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def empty(cls, alpha: float = 0.4) -> "FrequencyGrid":
        return cls(np.zeros(0), alpha)

    @classmethod
    def uniform(cls, xi_max: float, step: float, alpha: float = 0.4) -> "FrequencyGrid":
        half = np.arange(0.0, xi_max + step / 2, step)
        return cls(np.concatenate([-half[:0:-1], half]), alpha)

    @classmethod
    def graded(
        cls,
        xi_max: float,
        step: float,
        smallest: float = 1e-6,
        cells_per_decade: int = 24,
        alpha: float = 0.4,
    ) -> "FrequencyGrid":
        """Geometric cells from `smallest` up to 1, uniform cells of `step` beyond."""
        decades = -math.log10(smallest)
        inner = np.logspace(math.log10(smallest), 0.0, int(decades * cells_per_decade) + 1)
        outer = np.arange(1.0 + step, xi_max + step / 2, step)
        half = np.concatenate([[0.0], inner, outer])
        return cls(np.concatenate([-half[:0:-1], half]), alpha)

    @property
    def nodes(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:]) if self.edges.size else self.edges

    @property
    def weights(self) -> np.ndarray:
        return np.diff(self.edges) if self.edges.size else self.edges

    def inside_fraction(self, r: float) -> np.ndarray:
        """Fraction of every cell lying in (-r, r)."""
        if not self.edges.size:
            return self.edges
        lo, hi = self.edges[:-1], self.edges[1:]
        overlap = np.clip(np.minimum(hi, r) - np.maximum(lo, -r), 0.0, None)
        return overlap / (hi - lo)

    def resolution_near_zero(self) -> float:
        if not self.edges.size:
            return 0.0
        return float(np.min(np.abs(self.edges[self.edges != 0.0])))

    def refined(self) -> "FrequencyGrid":
        """Every cell split at its node."""
        if not self.edges.size:
            return self
        edges = np.empty(2 * self.edges.size - 1)
        edges[0::2] = self.edges
        edges[1::2] = self.nodes
        return FrequencyGrid(edges, self.alpha)

    def reach(self) -> float:
        """Largest r with [-r, r] inside the grid."""
        if not self.edges.size:
            return 0.0
        return float(min(-self.edges[0], self.edges[-1]))


@dataclass(frozen=True, eq=False)
class GlobalObservable:
    sft: SftSpace
    depth: int
    atoms: Tuple[Tuple[Atom, ...], ...]
    grid: FrequencyGrid
    density: np.ndarray
    profile: Optional[Profile] = None
    tightness: Optional[Tuple[float, float]] = None
    name: str = "custom"
    spectral_density: Optional[SpectralDensity] = None

    def __post_init__(self):
        count = len(self.sft.words(self.depth))
        density = np.asarray(self.density, dtype=complex).reshape(count, len(self.grid.nodes))
        if len(self.atoms) != count:
            raise ValueError(f"expected atoms for {count} words, got {len(self.atoms)}")
        object.__setattr__(self, "density", density)

    @property
    def word_count(self) -> int:
        return len(self.atoms)

    def atom_locations(self) -> np.ndarray:
        return np.unique([loc for word in self.atoms for loc, _ in word])

    def atom_weights(self, location: float) -> np.ndarray:
        return np.array(
            [sum(w for loc, w in word if loc == location) for word in self.atoms],
            dtype=complex,
        )

    def variation(self) -> np.ndarray:
        """Total variation of eta_w per word."""
        atoms = np.array([sum(abs(w) for _, w in word) for word in self.atoms])
        return atoms + np.abs(self.density) @ self.grid.weights

    def total_variation(self) -> float:
        return float(np.max(self.variation()))

    def tail_mass(self, r: float) -> np.ndarray:
        """|eta_w|(R minus [-r, r]) per word."""
        atoms = np.array([sum(abs(w) for loc, w in word if abs(loc) > r) for word in self.atoms])
        outside = 1.0 - self.grid.inside_fraction(r)
        return atoms + np.abs(self.density) @ (self.grid.weights * outside)

    def refined(self) -> "GlobalObservable":
        """The same observable sampled on the refined grid."""
        if self.spectral_density is None:
            raise ValueError(f"{self.name} carries no spectral density to resample")
        grid = self.grid.refined()
        return dataclasses.replace(self, grid=grid, density=self.spectral_density(grid.nodes))

    def truncated_mass(self) -> float:
        """
        Largest |eta_w| mass of the density beyond the grid. Without a spectral
        density the grid samples are the measure itself and nothing is cut off.
        """
        if self.spectral_density is None or not self.grid.edges.size:
            return 0.0
        density = self.spectral_density

        def beyond(word: int, sign: float, edge: float) -> float:
            return integrate.quad(
                lambda x: abs(density(np.array([sign * x]))[word, 0]), edge, np.inf, limit=200
            )[0]

        lo, hi = -float(self.grid.edges[0]), float(self.grid.edges[-1])
        return max(beyond(w, -1.0, lo) + beyond(w, 1.0, hi) for w in range(self.word_count))

    def evaluate(self, word_index: int, r: np.ndarray) -> np.ndarray:
        """Phi(w, r) for the given word index and fiber coordinates."""
        r = np.asarray(r, dtype=float)
        if self.profile is not None:
            return np.asarray(self.profile(word_index, r), dtype=complex)
        total = np.zeros(r.shape, dtype=complex)
        for loc, weight in self.atoms[word_index]:
            total += weight * np.exp(-1j * loc * r)
        nodes = self.grid.nodes
        if nodes.size:
            coefficients = self.density[word_index] * self.grid.weights
            for chunk in range(0, nodes.size, FOURIER_CHUNK):
                part = slice(chunk, chunk + FOURIER_CHUNK)
                total += np.exp(-1j * np.outer(r, nodes[part])) @ coefficients[part]
        return total

    def pushforward(self, f) -> "GlobalObservable":
        """Spectral representation of Phi o F: word x carries exp(-i xi f(x)) eta_{sigma x}."""
        sft = self.sft
        depth = max(self.depth + 1, f.depth)
        index = sft.index(self.depth)
        f_index = sft.index(f.depth)
        images, shifts = [], []
        for word in sft.words(depth):
            images.append(index[word.symbols[1 : 1 + self.depth]])
            shifts.append(float(f.values[f_index[word.symbols[: f.depth]]]))
        atoms = tuple(
            tuple((loc, w * np.exp(-1j * loc * s)) for loc, w in self.atoms[i])
            for i, s in zip(images, shifts)
        )
        phases = np.exp(-1j * np.outer(shifts, self.grid.nodes))
        density = self.density[images] * phases
        parent = self

        def profile(word_index: int, r: np.ndarray) -> np.ndarray:
            return parent.evaluate(images[word_index], r + shifts[word_index])

        resampled = None
        if self.spectral_density is not None:
            resampled = partial(_pushed_density, self.spectral_density, images, shifts)

        return GlobalObservable(
            sft,
            depth,
            atoms,
            self.grid,
            density,
            profile,
            self.tightness,
            f"{self.name}∘F",
            resampled,
        )


def _pushed_density(
    source: SpectralDensity, images: Sequence[int], shifts: Sequence[float], xi: np.ndarray
) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return source(xi)[list(images)] * np.exp(-1j * np.outer(shifts, xi))


@dataclass(frozen=True, eq=False)
class LocalObservable:
    sft: SftSpace
    depth: int
    r: np.ndarray
    values: np.ndarray
    l_max: int = 4
    name: str = "custom"
    support: slice = field(init=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        steps = np.diff(r)
        if r.size < 3 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("fiber grid must be uniform with at least three points")
        count = len(self.sft.words(self.depth))
        values = np.asarray(self.values)
        if values.shape != (count, r.size) or not np.isfinite(values).all():
            raise ValueError(f"expected finite values of shape {(count, r.size)}")
        scale = np.max(np.abs(values))
        active = np.nonzero(np.max(np.abs(values), axis=0) > 1e-18 * scale)[0]
        if active.size == 0:
            active = np.array([0, r.size - 1])
        lo, hi = max(active[0] - 1, 0), min(active[-1] + 2, r.size)
        if lo == 0 and scale > 0 and np.any(np.abs(values[:, 0]) > 1e-12 * scale):
            LOGGER.warning("local observable %s does not vanish at the grid edge", self.name)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", slice(int(lo), int(hi)))

    @classmethod
    def from_profile(
        cls,
        sft: SftSpace,
        depth: int,
        profile: Profile,
        r_max: float = DEFAULT_R_MAX,
        dr: float = DEFAULT_DR,
        name: str = "custom",
    ) -> "LocalObservable":
        count = int(round(2 * r_max / dr)) + 1
        r = np.linspace(-r_max, r_max, count)
        values = np.array([profile(i, r) for i in range(len(sft.words(depth)))])
        return cls(sft, depth, r, values, name=name)

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    @cached_property
    def quadrature(self) -> np.ndarray:
        """Trapezoid weights on the support."""
        weights = np.full(self.support.stop - self.support.start, self.dr)
        weights[0] *= 0.5
        weights[-1] *= 0.5
        return weights

    def derivative(self, order: int) -> np.ndarray:
        values = self.values[:, self.support]
        for _ in range(order):
            values = np.gradient(values, self.dr, axis=1)
        return values

    def max_norm(self, order: int = 0) -> float:
        """Max over words of the L1 norm of the order-th fiber derivative."""
        return float(np.max(np.abs(self.derivative(order)) @ self.quadrature))

    def lip_norm(self, order: int = 0) -> float:
        """Smallest Lip with ||d^l psi(w1) - d^l psi(w2)||_1 <= Lip d(w1, w2)."""
        values = self.derivative(order)
        if len(values) < 2:
            return 0.0
        agree = agreement_matrix(self.sft, self.depth)
        worst = 0.0
        for i in range(len(values)):
            for j in range(i + 1, len(values)):
                gap = float(np.abs(values[i] - values[j]) @ self.quadrature)
                worst = max(worst, gap / self.sft.theta ** agree[i, j])
        return worst

    def fourier_bound(self, xi: float) -> float:
        """Bound on |psi_hat| at frequencies |zeta| >= xi, min over l of ||d^l psi||_1 / xi^l."""
        if xi <= 0:
            return self.max_norm(0)
        return min(self.max_norm(order) / xi**order for order in range(self.l_max + 1))


def fiber_fourier_many(psi: LocalObservable, xis: Sequence[float]) -> np.ndarray:
    """psi_hat at many frequencies: array of shape (len(xis), words)."""
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    r = psi.r[psi.support]
    weighted = psi.values[:, psi.support] * psi.quadrature
    out = np.empty((xis.size, weighted.shape[0]), dtype=complex)
    for chunk in range(0, xis.size, FOURIER_CHUNK):
        part = slice(chunk, chunk + FOURIER_CHUNK)
        out[part] = np.exp(-1j * np.outer(xis[part], r)) @ weighted.T
    return out


def fiber_fourier(psi: LocalObservable, xi: float) -> StateFunction:
    return StateFunction(psi.sft, psi.depth, fiber_fourier_many(psi, [xi])[0])


def nu_local(psi: LocalObservable, rpf: RpfData) -> complex:
    return complex(cylinder_measures(rpf, psi.depth) @ fiber_fourier(psi, 0.0).values)


def nu_av_global(Phi: GlobalObservable, rpf: RpfData) -> complex:
    return complex(cylinder_measures(rpf, Phi.depth) @ Phi.atom_weights(0.0))


def low_freq_variation(Phi: GlobalObservable, rpf: RpfData, r: float) -> float:
    """
    mu-average of |eta_w|((-r, r) minus {0}); density cells count by the
    fraction of their width inside (-r, r).
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    atoms = np.array(
        [sum(abs(w) for loc, w in word if 0.0 < abs(loc) < r) for word in Phi.atoms]
    )
    inside = Phi.grid.inside_fraction(r)
    per_word = atoms + np.abs(Phi.density) @ (Phi.grid.weights * inside)
    return float(cylinder_measures(rpf, Phi.depth) @ per_word)


@dataclass(frozen=True)
class TightnessResult:
    a: float
    A: float
    passed: bool
    tails: Tuple[float, ...]


def tightness_check(
    Phi: GlobalObservable,
    radii: Sequence[float],
    stated: Optional[Tuple[float, float]] = None,
) -> TightnessResult:
    """
    Checks |eta_w|(R minus [-r, r]) <= A r^-a on every word and radius for the
    stated pair (or the observable's own) and returns the tightest fitted pair.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 1.0):
        raise ValueError("tightness radii must be at least 1")
    tails = np.array([float(np.max(Phi.tail_mass(r))) for r in radii])
    positive = tails > 0
    if positive.sum() >= 2:
        fit = stats.linregress(np.log(radii[positive]), np.log(tails[positive]))
        a = -float(fit.slope)
        A = float(np.max(tails[positive] * radii[positive] ** a))
    elif positive.any():
        a, A = 0.0, float(tails.max())
    else:
        a, A = math.inf, 0.0
    claim = stated or Phi.tightness
    if claim is None:
        passed = True
    else:
        passed = bool(np.all(tails <= claim[1] * radii ** (-claim[0]) * (1 + 1e-9) + 1e-15))
    return TightnessResult(a, A, passed, tuple(tails.tolist()))


def positive_definite(Phi: GlobalObservable, tol: float = 1e-12) -> bool:
    try:
        _check_positive(Phi, tol)
    except NotPositiveError:
        return False
    return True


def _check_positive(Phi: GlobalObservable, tol: float) -> None:
    for i, word in enumerate(Phi.atoms):
        for _, weight in word:
            if abs(complex(weight).imag) > tol or complex(weight).real < -tol:
                raise NotPositiveError(i, weight)
    bad = (np.abs(Phi.density.imag) > tol) | (Phi.density.real < -tol)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NotPositiveError(int(i), complex(Phi.density[i, j]))


def fiber_lipschitz(
    Phi: GlobalObservable, r_max: float = DEFAULT_R_MAX, dr: float = DEFAULT_DR
) -> float:
    r = np.arange(-r_max, r_max + dr / 2, dr)
    return max(
        float(np.max(np.abs(np.diff(Phi.evaluate(i, r))))) / dr
        for i in range(Phi.word_count)
    )


def lipschitz_tail_check(Phi: GlobalObservable, radii: Sequence[float]) -> bool:
    """Asserts eta_w(R minus [-r, r]) <= 2L/r for positive spectral measures."""
    _check_positive(Phi, 1e-12)
    lipschitz = fiber_lipschitz(Phi)
    for radius in radii:
        tail = float(np.max(Phi.tail_mass(radius)))
        if tail > 2.0 * lipschitz / radius + 1e-12:
            LOGGER.info("tail %.3e exceeds 2L/r=%.3e at r=%g", tail, 2 * lipschitz / radius, radius)
            return False
    return True
