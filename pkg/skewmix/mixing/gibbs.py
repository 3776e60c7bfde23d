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
Ruelle-Perron-Frobenius eigendata of locally constant potentials, the Gibbs
measure they define, and seeded samplers of that measure.
"""

import bisect
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy import stats

from skewmix.mixing.errors import (
    DepthTooSmallError,
    InadmissibleWordError,
    InsufficientDataError,
    NoConvergenceError,
)
from skewmix.mixing.symbolic import (
    SftSpace,
    StateFunction,
    WordLike,
    as_symbols,
    prefix_map,
)

LOGGER = logging.getLogger(__name__)

DENSE_SOLVER_LIMIT = 64


@dataclass(frozen=True, eq=False)
class Potential:
    sft: SftSpace
    depth: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = len(self.sft.words(self.depth))
        if values.shape != (expected,) or not np.isfinite(values).all():
            raise ValueError(
                f"potential of depth {self.depth} needs {expected} finite values"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, sft: SftSpace, value: float = 0.0) -> "Potential":
        return cls(sft, 0, np.array([value]))


@dataclass(frozen=True)
class GibbsBallFit:
    c_u: float
    d: float
    radii: Sequence[float]


@dataclass(frozen=True, eq=False)
class GibbsChain:
    """Forward Markov chain on depth-m words whose stationary law is mu."""

    sft: SftSpace
    depth: int
    transitions: np.ndarray
    initial: np.ndarray


@dataclass(frozen=True, eq=False)
class RpfData:
    sft: SftSpace
    depth: int
    lam: float
    h: np.ndarray
    nu: np.ndarray
    g: np.ndarray
    mu: np.ndarray
    ball_fit: Optional[GibbsBallFit] = None

    @property
    def chain(self) -> GibbsChain:
        return _forward_chain(self)

    def transfer(self, v: StateFunction, n: int = 1) -> StateFunction:
        """The normalized operator applied n times: (Lv)(x) = sum over preimages g(y)v(y)."""
        values = v.lift(self.depth).values
        for _ in range(n):
            values = self.g @ values
        return StateFunction(self.sft, self.depth, values)

    def integrate(self, v: StateFunction) -> complex:
        return complex(self.mu @ v.lift(self.depth).values)

    def extended_weights(self) -> np.ndarray:
        """g as a function of depth-(m+1) words z = a.x: g(z) = L[x, z[:m]]."""
        return _extended_weights(self)

    def with_ball_fit(self, fit: GibbsBallFit) -> "RpfData":
        return dataclasses.replace(self, ball_fit=fit)

    def as_dict(self) -> Dict[str, Any]:
        words = [str(w) for w in self.sft.words(self.depth)]
        return {
            "depth": self.depth,
            "lambda": self.lam,
            "h": dict(zip(words, self.h.tolist())),
            "nu": dict(zip(words, self.nu.tolist())),
            "mu": dict(zip(words, self.mu.tolist())),
            "g": self.g.tolist(),
        }


def ruelle_matrix(sft: SftSpace, u: Potential, m: int) -> np.ndarray:
    """
    Matrix of the transfer operator on depth-m words: M[x, y] = exp(u(y)) when y
    is a one-step preimage of x, else 0.
    """
    if m < max(u.depth, 1):
        raise DepthTooSmallError(m, max(u.depth, 1))
    index = sft.index(m)
    to_potential = prefix_map(sft, m, u.depth)
    matrix = np.zeros((len(index), len(index)))
    for x, i in index.items():
        for a in range(sft.alphabet_size):
            if sft.transitions[a][x[0]]:
                j = index[((a,) + x)[:m]]
                matrix[i, j] = math.exp(u.values[to_potential[j]])
    return matrix


def rpf_eigendata(
    sft: SftSpace,
    matrix: np.ndarray,
    depth: int,
    tol: float = 1e-13,
    max_iters: int = 100_000,
) -> RpfData:
    """
    Leading eigentriple of a Ruelle matrix, normalized so that L1 = 1.

    Args:
        sft: The subshift the matrix is indexed by.
        matrix: Output of :func:`ruelle_matrix` at the same depth.
        depth: Word depth of the matrix.
        tol: Residual tolerance of the power iteration.
        max_iters: Iteration cap of the power iteration.

    Returns: :class:`RpfData` with g(y -> x) = exp(u(y)) h(y) / (lambda h(x)) and
        mu(C_w) = h(w) nu(w), nu a probability vector and <nu, h> = 1.
    """
    matrix = np.asarray(matrix, dtype=float)
    if len(matrix) < DENSE_SOLVER_LIMIT:
        right = _dense_perron_vector(matrix)
        left = _dense_perron_vector(matrix.T)
    else:
        right = _power_iteration(matrix, tol, max_iters)
        left = _power_iteration(matrix.T, tol, max_iters)

    nu = left / left.sum()
    h = right / (nu @ right)
    lam = float(nu @ matrix @ h)
    g = matrix * h[None, :] / (lam * h[:, None])
    g /= g.sum(axis=1, keepdims=True)
    mu = h * nu
    mu /= mu.sum()
    LOGGER.debug("leading eigenvalue %.15g on %d states", lam, len(matrix))
    return RpfData(sft=sft, depth=depth, lam=lam, h=h, nu=nu, g=g, mu=mu)


def gibbs_measure(sft: SftSpace, u: Potential, m: int, tol: float = 1e-13) -> RpfData:
    return rpf_eigendata(sft, ruelle_matrix(sft, u, m), m, tol)


def _dense_perron_vector(matrix: np.ndarray) -> np.ndarray:
    values, vectors = scipy.linalg.eig(matrix)
    lead = int(np.argmax(values.real))
    vector = vectors[:, lead]
    vector = vector / vector[np.argmax(np.abs(vector))]
    return np.abs(vector.real)


def _power_iteration(matrix: np.ndarray, tol: float, max_iters: int) -> np.ndarray:
    vector = np.ones(len(matrix)) / len(matrix)
    residual = math.inf
    for _ in range(max_iters):
        image = matrix @ vector
        lam = image.sum() / vector.sum()
        residual = float(np.max(np.abs(image - lam * vector)) / max(lam, 1e-300))
        vector = image / image.sum()
        if residual <= tol:
            return vector
    raise NoConvergenceError(tol, max_iters, residual)


def _forward_chain(rpf: RpfData) -> GibbsChain:
    # Q[y, x] = mu(x) g(y0.x) / mu(y) for x a one-step successor of y
    transitions = (rpf.g * rpf.mu[:, None]).T / rpf.mu[:, None]
    transitions /= transitions.sum(axis=1, keepdims=True)
    return GibbsChain(rpf.sft, rpf.depth, transitions, rpf.mu.copy())


def _extended_weights(rpf: RpfData) -> np.ndarray:
    sft, m = rpf.sft, rpf.depth
    index = sft.index(m)
    return np.array(
        [rpf.g[index[z.symbols[1:]], index[z.symbols[:m]]] for z in sft.words(m + 1)]
    )


def cylinder_measure(rpf: RpfData, word: WordLike) -> float:
    """mu of the cylinder of a word of any length."""
    symbols = as_symbols(word)
    sft, m = rpf.sft, rpf.depth
    if not sft.is_admissible(symbols):
        raise InadmissibleWordError(symbols)
    if len(symbols) <= m:
        keep = prefix_map(sft, m, len(symbols)) == sft.index(len(symbols))[symbols]
        return float(rpf.mu[keep].sum())
    index = sft.index(m)
    transitions = rpf.chain.transitions
    state = index[symbols[:m]]
    measure = rpf.mu[state]
    for i in range(1, len(symbols) - m + 1):
        following = index[symbols[i : i + m]]
        measure *= transitions[state, following]
        state = following
    return float(measure)


def cylinder_measures(rpf: RpfData, depth: int) -> np.ndarray:
    """mu of every depth-`depth` cylinder, in word order."""
    sft, m = rpf.sft, rpf.depth
    if depth <= m:
        return np.bincount(
            prefix_map(sft, m, depth), weights=rpf.mu, minlength=len(sft.words(depth))
        )
    return np.array([cylinder_measure(rpf, w) for w in sft.words(depth)])


def sample_orbit(chain: GibbsChain, length: int, seed: int) -> np.ndarray:
    """
    A single mu-typical symbol sequence of the given length; deterministic per seed.
    """
    if length < chain.depth:
        raise ValueError(f"length {length} is below the chain depth {chain.depth}")
    rng = np.random.default_rng(seed)
    words = chain.sft.words(chain.depth)
    cumulative = [list(np.cumsum(row)) for row in chain.transitions]
    initial = np.cumsum(chain.initial)
    state = min(int(np.searchsorted(initial, rng.random(), side="right")), len(words) - 1)
    symbols = list(words[state].symbols)
    last = len(words) - 1
    for u in rng.random(length - chain.depth).tolist():
        state = min(bisect.bisect_right(cumulative[state], u), last)
        symbols.append(words[state].symbols[-1])
    return np.array(symbols, dtype=np.int64)


def sample_words(chain: GibbsChain, count: int, length: int, seed: int) -> np.ndarray:
    """`count` independent mu-distributed words of the given length, one per row."""
    if length < chain.depth:
        raise ValueError(f"length {length} is below the chain depth {chain.depth}")
    rng = np.random.default_rng(seed)
    words = chain.sft.word_array(chain.depth)
    cumulative = np.cumsum(chain.transitions, axis=1)
    states = rng.choice(len(words), size=count, p=chain.initial)
    columns = [words[states]]
    last = len(words) - 1
    for _ in range(length - chain.depth):
        u = rng.random(count)
        states = np.minimum((u[:, None] >= cumulative[states]).sum(axis=1), last)
        columns.append(words[states][:, -1:])
    return np.concatenate(columns, axis=1)


def gibbs_ball_fit(rpf: RpfData, radii: Sequence[float]) -> GibbsBallFit:
    """
    Fits mu(B(x, r)) >= C_u r^d over every center cylinder at every radius;
    radii must be powers of theta. The returned C_u makes the bound hold on all
    sampled pairs.
    """
    theta = rpf.sft.theta
    depths = []
    for radius in radii:
        j = round(math.log(radius) / math.log(theta))
        if j < 0 or not math.isclose(theta**j, radius, rel_tol=1e-9):
            raise ValueError(f"radius {radius} is not a power of theta={theta}")
        depths.append(j)
    if len(set(depths)) < 2:
        raise InsufficientDataError("gibbs ball fit radii", len(set(depths)), 2)

    log_r, log_mu = [], []
    for j in sorted(set(depths)):
        measures = cylinder_measures(rpf, j)
        measures = measures[measures > 0]
        log_r.extend([j * math.log(theta)] * len(measures))
        log_mu.extend(np.log(measures).tolist())
    log_r_arr, log_mu_arr = np.array(log_r), np.array(log_mu)
    d = float(stats.linregress(log_r_arr, log_mu_arr).slope)
    c_u = float(np.exp(np.min(log_mu_arr - d * log_r_arr)))
    return GibbsBallFit(c_u=c_u, d=d, radii=tuple(theta**j for j in sorted(set(depths))))


@dataclass(frozen=True)
class GapEnvelope:
    c: float
    delta: float
    second_eigenvalue: float
    errors: Sequence[float]


def gap_envelope(rpf: RpfData, v: StateFunction, n_max: int) -> GapEnvelope:
    """
    Measures ||L^n v - integral(v)||_inf for n <= n_max and the tightest
    C delta^n envelope with C = ||v - integral(v)||_inf.
    """
    mean = rpf.integrate(v)
    values = v.lift(rpf.depth).values.astype(complex)
    errors = []
    for _ in range(n_max + 1):
        errors.append(float(np.max(np.abs(values - mean))))
        values = rpf.g @ values
    moduli = np.sort(np.abs(np.linalg.eigvals(rpf.g)))[::-1]
    second = float(moduli[1]) if len(moduli) > 1 else 0.0
    e0 = errors[0]
    if e0 == 0.0:
        return GapEnvelope(0.0, second, second, tuple(errors))
    delta = max(
        [second] + [(e / e0) ** (1.0 / n) for n, e in enumerate(errors) if n > 0]
    )
    return GapEnvelope(e0, float(delta), second, tuple(errors))
