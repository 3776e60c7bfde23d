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
Estimators of the global-local correlation

    cov(Phi o F^n, psi) = int int Phi(sigma^n x, r + f_n(x)) conj(psi(x, r)) dr dmu(x)
                          - nu_av(Phi) conj(nu(psi))

by exact enumeration, Monte Carlo and the frequency-split spectral formula,
with decay-rate fitting and envelope checks on the resulting series.
"""

import logging
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from skewmix.mixing.errors import (
    BudgetExceededError,
    DegenerateWindowError,
    DepthTooSmallError,
    QuadratureWarning,
)
from skewmix.mixing.gibbs import RpfData, sample_words
from skewmix.mixing.observables import (
    GlobalObservable,
    LocalObservable,
    fiber_fourier_many,
    low_freq_variation,
    nu_av_global,
    nu_local,
)
from skewmix.mixing.skewprod import KEY_DIGITS, FiberCocycle
from skewmix.mixing.symbolic import prefix_map

LOGGER = logging.getLogger(__name__)

ESTIMATORS = ("exact", "direct", "spectral")
DEFAULT_ALPHA = 0.4
SPECTRAL_CHUNK = 512


def _check_depths(rpf: RpfData, f: FiberCocycle, Phi: GlobalObservable, psi: LocalObservable):
    required = max(f.depth, Phi.depth, psi.depth, 1)
    if rpf.depth < required:
        raise DepthTooSmallError(rpf.depth, required)
    if f.offset != 0:
        raise ValueError("correlations need a one-sided cocycle")


def _baseline(rpf: RpfData, Phi: GlobalObservable, psi: LocalObservable) -> complex:
    return nu_av_global(Phi, rpf) * np.conj(nu_local(psi, rpf))


def _fiber_pairing(
    Phi: GlobalObservable, psi: LocalObservable, phi_index: int, psi_index: int, shift: float
) -> Tuple[complex, complex]:
    """
    int Phi(w', r + s) conj(psi(w, r)) dr on the support of psi, by the trapezoid
    rule on the fiber grid and on every second node of it.
    """
    r = psi.r[psi.support]
    values = Phi.evaluate(phi_index, r + shift) * np.conj(psi.values[psi_index, psi.support])
    coarse = np.full((values.size + 1) // 2, 2.0 * psi.dr)
    coarse[0] *= 0.5
    coarse[-1] *= 0.5
    return complex(values @ psi.quadrature), complex(values[::2] @ coarse)


@dataclass(frozen=True)
class ExactEstimate:
    value: complex
    error: float
    states: int


def exact_estimate(
    rpf: RpfData,
    f: FiberCocycle,
    Phi: GlobalObservable,
    psi: LocalObservable,
    n: int,
    budget: int = 2_000_000,
) -> ExactEstimate:
    """
    Exact covariance: the forward chain of depth-m windows carries the psi word
    and the running Birkhoff sum, so every cylinder of depth n+m contributes
    through one fiber quadrature per distinct (psi word, Phi word, sum). The
    error is the Richardson estimate of the fiber trapezoid rule from the same
    pairings at twice the step.

    Raises:
        BudgetExceededError: More than `budget` distinct states appear.
    """
    _check_depths(rpf, f, Phi, psi)
    sft, m = rpf.sft, rpf.depth
    to_psi = prefix_map(sft, m, psi.depth)
    to_phi = prefix_map(sft, m, Phi.depth)
    f_values = f.values[prefix_map(sft, m, f.depth)]
    transitions = rpf.chain.transitions
    successors = [np.nonzero(row > 0)[0] for row in transitions]

    states: Dict[Tuple[int, int, float], float] = {
        (int(to_psi[w]), w, 0.0): float(p) for w, p in enumerate(rpf.mu) if p > 0
    }
    for step in range(n):
        advanced: Dict[Tuple[int, int, float], float] = defaultdict(float)
        for (psi_index, w, s), p in states.items():
            shifted = round(s + f_values[w], KEY_DIGITS)
            for w2 in successors[w]:
                advanced[(psi_index, int(w2), shifted)] += p * transitions[w, w2]
        states = advanced
        if len(states) > budget:
            raise BudgetExceededError("exact enumeration states", budget, step + 1)

    collapsed: Dict[Tuple[int, int, float], float] = defaultdict(float)
    for (psi_index, w, s), p in states.items():
        collapsed[(psi_index, int(to_phi[w]), s)] += p
    total, gap = 0j, 0.0
    for (psi_index, phi_index, s), p in collapsed.items():
        fine, coarse = _fiber_pairing(Phi, psi, phi_index, psi_index, s)
        total += p * fine
        gap += p * abs(fine - coarse) / 3.0
    LOGGER.debug("exact covariance at n=%d used %d states", n, len(collapsed))
    error = gap + 1e-12 * Phi.total_variation() * psi.max_norm(0)
    return ExactEstimate(complex(total - _baseline(rpf, Phi, psi)), error, len(collapsed))


def cov_exact(
    rpf: RpfData,
    f: FiberCocycle,
    Phi: GlobalObservable,
    psi: LocalObservable,
    n: int,
    budget: int = 2_000_000,
) -> complex:
    """The value of :func:`exact_estimate`."""
    return exact_estimate(rpf, f, Phi, psi, n, budget).value


@dataclass(frozen=True)
class DirectEstimate:
    value: complex
    stderr: float
    samples: int


def cov_direct(
    rpf: RpfData,
    f: FiberCocycle,
    Phi: GlobalObservable,
    psi: LocalObservable,
    n: int,
    samples: int,
    seed: int,
) -> DirectEstimate:
    """Monte Carlo covariance over `samples` mu-distributed words; deterministic per seed."""
    _check_depths(rpf, f, Phi, psi)
    if samples < 2:
        raise ValueError("at least two samples are needed for a standard error")
    sft = rpf.sft
    length = max(n + f.depth, n + Phi.depth, psi.depth, rpf.depth)
    words = sample_words(rpf.chain, samples, length, seed)

    sums = np.zeros(samples)
    if n:
        codes = _window_codes(words, f.depth, sft.alphabet_size)
        table = _code_table(sft, f.depth, f.values)
        sums = table[codes[:, :n]].sum(axis=1)
    psi_codes = _window_codes(words[:, : psi.depth], psi.depth, sft.alphabet_size)[:, 0]
    phi_codes = _window_codes(words[:, n : n + Phi.depth], Phi.depth, sft.alphabet_size)[:, 0]
    psi_rows = _code_table(sft, psi.depth, np.arange(len(sft.words(psi.depth)))).astype(int)
    phi_rows = _code_table(sft, Phi.depth, np.arange(len(sft.words(Phi.depth)))).astype(int)

    keys = np.stack(
        [psi_rows[psi_codes], phi_rows[phi_codes], np.round(sums, KEY_DIGITS)], axis=1
    )
    unique, inverse = np.unique(keys, axis=0, return_inverse=True)
    pairings = np.array(
        [_fiber_pairing(Phi, psi, int(b), int(a), float(s))[0] for a, b, s in unique]
    )
    values = pairings[np.asarray(inverse).reshape(-1)]
    stderr = float(np.std(values, ddof=1) / math.sqrt(samples))
    value = complex(values.mean() - _baseline(rpf, Phi, psi))
    return DirectEstimate(value, stderr, samples)


def _window_codes(words: np.ndarray, depth: int, alphabet: int) -> np.ndarray:
    """Base-alphabet code of every length-`depth` window, one column per start."""
    count = words.shape[1] - depth + 1
    codes = np.zeros((words.shape[0], max(count, 1)), dtype=np.int64)
    for j in range(depth):
        codes = codes * alphabet + words[:, j : j + count]
    return codes


def _code_table(sft, depth: int, values: np.ndarray) -> np.ndarray:
    table = np.full(sft.alphabet_size**depth, np.nan)
    for i, word in enumerate(sft.words(depth)):
        code = 0
        for symbol in word.symbols:
            code = code * sft.alphabet_size + symbol
        table[code] = values[i]
    return table


@dataclass(frozen=True)
class SpectralEstimate:
    n: int
    value: complex
    band0: complex
    band_low: complex
    band_high: complex
    error: float
    low_band_bound: float


def _atom_nodes(Phi: GlobalObservable, threshold: float):
    """Atom frequencies with their per-word weights and band memberships."""
    atoms = Phi.atom_locations()
    weights = np.array([Phi.atom_weights(loc) for loc in atoms]).reshape(
        len(atoms), Phi.word_count
    )
    zero = atoms == 0.0
    low = (~zero) & (np.abs(atoms) < threshold)
    bands = np.stack([zero, low, ~zero & ~low], axis=1).astype(float)
    return atoms, weights, bands


def _density_nodes(Phi: GlobalObservable, threshold: float):
    """Quadrature nodes of the density, cells split between the bands by overlap."""
    grid = Phi.grid
    inside = grid.inside_fraction(threshold)
    weights = (Phi.density * grid.weights).T
    bands = np.stack([np.zeros_like(inside), inside, 1.0 - inside], axis=1)
    return grid.nodes, weights, bands


def _band_totals(
    rpf: RpfData,
    f: FiberCocycle,
    Phi: GlobalObservable,
    psi: LocalObservable,
    n: int,
    nodes,
) -> np.ndarray:
    """sum_w mu(w) (L_{-xi}^n chi_xi)(w) eta_w(xi) over the nodes, per band."""
    xis, weights, bands = nodes
    sft, m = rpf.sft, rpf.depth
    f_values = f.values[prefix_map(sft, m, f.depth)]
    to_psi = prefix_map(sft, m, psi.depth)
    word_weights = weights[:, prefix_map(sft, m, Phi.depth)] * rpf.mu[None, :]

    totals = np.zeros(3, dtype=complex)
    for start in range(0, len(xis), SPECTRAL_CHUNK):
        part = slice(start, start + SPECTRAL_CHUNK)
        xi = xis[part]
        chi = np.conj(fiber_fourier_many(psi, -xi))[:, to_psi]
        if n:
            twisted = rpf.g[None, :, :] * np.exp(-1j * np.outer(xi, f_values))[:, None, :]
            chi = np.einsum("kij,kj->ki", np.linalg.matrix_power(twisted, n), chi)
        contributions = np.sum(chi * word_weights[part], axis=1)
        totals += contributions @ bands[part]
    return totals


def cov_spectral(
    rpf: RpfData,
    f: FiberCocycle,
    Phi: GlobalObservable,
    psi: LocalObservable,
    n: int,
    alpha: float = DEFAULT_ALPHA,
) -> SpectralEstimate:
    """
    Covariance from sum_w mu(w) int (L_{-xi}^n chi_xi)(w) d eta_w(xi) with
    chi_xi = conj(psi_hat_{-xi}), atoms exact and density by quadrature, split
    into the bands xi = 0, 0 < |xi| < n^-alpha and |xi| >= n^-alpha.

    When Phi knows its spectral density the quadrature is repeated on the grid
    with every cell halved; the finer value is reported and the change of the
    total between the two bounds its error. The density beyond the grid adds its mass times
    the decay of psi_hat there.
    """
    _check_depths(rpf, f, Phi, psi)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    threshold = math.inf if n == 0 else n ** (-alpha)
    if Phi.grid.weights.size and Phi.grid.resolution_near_zero() > threshold / 4:
        message = (
            f"frequency grid spacing {Phi.grid.resolution_near_zero():.3g} near zero is "
            f"coarse against the low band |xi| < {threshold:.3g}"
        )
        LOGGER.warning(message)
        warnings.warn(message, QuadratureWarning)

    max0 = psi.max_norm(0)
    error = 1e-12 * Phi.total_variation() * max0
    totals = _band_totals(rpf, f, Phi, psi, n, _atom_nodes(Phi, threshold))
    density = _band_totals(rpf, f, Phi, psi, n, _density_nodes(Phi, threshold))
    if Phi.spectral_density is not None and Phi.grid.weights.size:
        refined = Phi.refined()
        finer = _band_totals(rpf, f, refined, psi, n, _density_nodes(refined, threshold))
        error += float(abs((finer - density).sum()))
        error += Phi.truncated_mass() * psi.fourier_bound(Phi.grid.reach())
        density = finer
    totals = totals + density

    baseline = _baseline(rpf, Phi, psi)
    lf = low_freq_variation(Phi, rpf, threshold)
    return SpectralEstimate(
        n=n,
        value=complex(totals.sum() - baseline),
        band0=complex(totals[0]),
        band_low=complex(totals[1]),
        band_high=complex(totals[2]),
        error=error,
        low_band_bound=max0 * lf,
    )


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    n: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    estimator: str
    bands: Optional[np.ndarray] = None

    def __post_init__(self):
        n = np.asarray(self.n, dtype=int)
        if n.size and np.any(np.diff(n) <= 0):
            raise ValueError("n values must be strictly increasing")
        errors = np.asarray(self.errors, dtype=float)
        if np.any(errors < 0):
            raise ValueError("errors must be nonnegative")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        object.__setattr__(self, "errors", errors)

    def as_frame(self) -> pd.DataFrame:
        bands = self.bands if self.bands is not None else np.full((len(self.n), 3), np.nan)
        return pd.DataFrame(
            {
                "n": self.n,
                "re_cov": self.values.real,
                "im_cov": self.values.imag,
                "err": self.errors,
                "band0": np.real(bands[:, 0]),
                "band_low": np.real(bands[:, 1]),
                "band_high": np.real(bands[:, 2]),
                "estimator": self.estimator,
            }
        )


def correlation_series(
    estimator: str,
    ns: Sequence[int],
    rpf: RpfData,
    f: FiberCocycle,
    Phi: GlobalObservable,
    psi: LocalObservable,
    alpha: float = DEFAULT_ALPHA,
    samples: int = 100_000,
    seed: int = 0,
    budget: int = 2_000_000,
) -> CorrelationSeries:
    """Evaluates one estimator over `ns`; Monte Carlo seeds are derived per n."""
    ns = sorted(set(int(n) for n in ns))
    values, errors, bands = [], [], []
    for n in ns:
        if estimator == "exact":
            exact = exact_estimate(rpf, f, Phi, psi, n, budget)
            values.append(exact.value)
            errors.append(exact.error)
            bands.append((np.nan, np.nan, np.nan))
        elif estimator == "direct":
            estimate = cov_direct(rpf, f, Phi, psi, n, samples, derived_seed(seed, n))
            values.append(estimate.value)
            errors.append(estimate.stderr)
            bands.append((np.nan, np.nan, np.nan))
        elif estimator == "spectral":
            estimate = cov_spectral(rpf, f, Phi, psi, n, alpha)
            values.append(estimate.value)
            errors.append(estimate.error)
            bands.append((estimate.band0, estimate.band_low, estimate.band_high))
        else:
            raise ValueError(f"unknown estimator {estimator!r}, expected one of {ESTIMATORS}")
        LOGGER.info("%s estimate at n=%d: %s", estimator, n, values[-1])
    return CorrelationSeries(
        np.array(ns), np.array(values), np.array(errors), estimator, np.array(bands, dtype=complex)
    )


def derived_seed(seed: int, n: int) -> int:
    return int(np.random.SeedSequence([seed, n]).generate_state(1)[0])


@dataclass(frozen=True)
class RateFit:
    window: Tuple[int, int]
    exponent: float
    confidence: Tuple[float, float]
    points: int
    rapid_decay: Dict[float, bool] = field(default_factory=dict)
    log_power: float = 0.0


def _window(series: CorrelationSeries, window: Optional[Tuple[int, int]]):
    lo, hi = window if window is not None else (int(series.n[0]), int(series.n[-1]))
    inside = (series.n >= lo) & (series.n <= hi)
    return (lo, hi), series.n[inside], np.abs(series.values[inside]), series.errors[inside]


def rate_fit(
    series: CorrelationSeries,
    window: Optional[Tuple[int, int]] = None,
    levels: Sequence[float] = (1, 2, 3, 4),
    log_power: float = 0.0,
) -> RateFit:
    """
    Slope of log|cov| against log n over the window with its 95% interval,
    fitted on points above ten times their error, and the rapid-decay verdict
    per level. A nonzero `log_power` p fits |cov| / (log n)^p instead, for
    series decaying like n^a (log n)^p; the window then starts at n = 2.

    Raises:
        DegenerateWindowError: Fewer than five nonzero points in the window.
    """
    bounds, n, size, errors = _window(series, window)
    nonzero = (size > 0) & (n > (1 if log_power else 0))
    if nonzero.sum() < 5:
        raise DegenerateWindowError(bounds, int(nonzero.sum()))
    usable = nonzero & (size > 10 * errors)
    if usable.sum() >= 3:
        logs = np.log(n[usable])
        fit = stats.linregress(logs, np.log(size[usable]) - log_power * np.log(logs))
        spread = stats.t.ppf(0.975, usable.sum() - 2) * fit.stderr
        exponent = float(fit.slope)
        confidence = (exponent - spread, exponent + spread)
    else:
        exponent, confidence = math.nan, (math.nan, math.nan)
    verdicts = {level: rapid_decay(n[nonzero], size[nonzero], level) for level in levels}
    return RateFit(bounds, exponent, confidence, int(usable.sum()), verdicts, log_power)


def _leading_bound(values: np.ndarray, fraction: float, factor: float = 10.0) -> bool:
    head = max(1, int(math.ceil(len(values) * fraction)))
    return bool(np.max(values) <= factor * np.max(values[:head]))


def rapid_decay(n: np.ndarray, size: np.ndarray, level: float) -> bool:
    """n^level |s_n| stays within a factor 10 of its maximum over the leading quarter."""
    return _leading_bound(np.asarray(n, dtype=float) ** level * np.asarray(size), 0.25)


@dataclass(frozen=True, eq=False)
class LfBoundCheck:
    c: float
    envelope: np.ndarray
    ratios: np.ndarray
    passed: bool


def lf_bound_check(
    series: CorrelationSeries,
    Phi: GlobalObservable,
    rpf: RpfData,
    k: float = 4,
    eps: float = 0.1,
    window: Optional[Tuple[int, int]] = None,
) -> LfBoundCheck:
    """
    Fits the smallest C with |cov(n)| <= C (LF(Phi, n^(-1/2+eps)) + n^-k) over
    the window; the fit passes when the ratios of the trailing half stay within
    a factor 10 of those of the leading half.
    """
    _, n, size, _ = _window(series, window)
    keep = n > 0
    n, size = n[keep], size[keep]
    if n.size == 0:
        raise DegenerateWindowError(window or (0, 0), 0)
    envelope = np.array(
        [low_freq_variation(Phi, rpf, float(v) ** (-0.5 + eps)) + float(v) ** (-k) for v in n]
    )
    ratios = size / envelope
    passed = bool(np.isfinite(ratios).all()) and _leading_bound(ratios, 0.5)
    return LfBoundCheck(float(np.max(ratios)), envelope, ratios, passed)
