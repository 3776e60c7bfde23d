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
Twisted transfer operators L_xi v(x) = sum over preimages y of g(y) exp(i xi f(y)) v(y),
their H-norm calculus and spectral curves, and the cancellation machinery of
stable pairs, tolerances and us-cycles.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from skewmix.mixing.errors import (
    DepthMismatchError,
    DepthTooSmallError,
    EigenvalueCrossingError,
    InvariantViolationError,
    NotFoundError,
    NotNiceError,
    ToleranceUndefinedError,
)
from skewmix.mixing.gibbs import RpfData
from skewmix.mixing.skewprod import (
    CycleGeometry,
    FiberCocycle,
    birkhoff_sum,
    closed_walks,
)
from skewmix.mixing.symbolic import (
    StateFunction,
    Word,
    WordLike,
    agreement_matrix,
    admissible_extensions,
    as_symbols,
    check_admissible,
    lipschitz_seminorm,
    prefix_map,
    word_metric,
)

LOGGER = logging.getLogger(__name__)

SCHEDULE_CONSTANT = 64.0
CURVATURE_STEP = 1e-3
JUNCTION_CLOSENESS = 4


def wrap_phase(phase: float) -> float:
    """Reduces an angle to (-pi, pi]."""
    wrapped = math.remainder(phase, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True, eq=False)
class TwistedOperator:
    rpf: RpfData
    f: FiberCocycle
    xi: float
    matrix: np.ndarray
    extended: np.ndarray
    r_bound: float
    weight_seminorm: float

    @property
    def sft(self):
        return self.rpf.sft

    @property
    def depth(self) -> int:
        return self.rpf.depth

    @property
    def theta(self) -> float:
        return self.rpf.sft.theta

    @property
    def c0(self) -> float:
        """R / |g~|_theta, the constant of the basic inequality."""
        if self.weight_seminorm > 0:
            return self.r_bound / self.weight_seminorm
        return 0.0 if self.r_bound == 0 else math.inf

    @property
    def H(self) -> float:
        return max(1.0, 2.0 * self.r_bound / (1.0 - self.theta))

    def apply(self, v: StateFunction, n: int = 1) -> StateFunction:
        values = v.lift(self.depth).values.astype(complex)
        for _ in range(n):
            values = self.matrix @ values
        return StateFunction(self.sft, self.depth, values)

    def power(self, n: int) -> np.ndarray:
        return np.linalg.matrix_power(self.matrix, n)


def twisted_matrix(
    rpf: RpfData, f: FiberCocycle, xi: float, m: Optional[int] = None
) -> TwistedOperator:
    """
    The matrix of L_xi on depth-m words, entries g(y) exp(i xi f(y)) over
    preimage pairs, with its certified constant R and H = max(1, 2R/(1-theta)).

    Args:
        rpf: Normalized eigendata; the operator lives at its depth.
        f: One-sided cocycle of depth at most m.
        xi: Real fiber frequency.
        m: Word depth; defaults to the eigendata depth and must match it.
    """
    m = rpf.depth if m is None else m
    if m != rpf.depth:
        raise DepthMismatchError(m, rpf.depth)
    if f.offset != 0:
        raise ValueError("twisted operators need a one-sided cocycle")
    if f.depth > m:
        raise DepthTooSmallError(m, f.depth)
    sft = rpf.sft
    phases = np.exp(1j * xi * f.values[prefix_map(sft, m, f.depth)])
    matrix = rpf.g * phases[None, :]

    index = sft.index(m)
    extended = np.array(
        [
            rpf.g[index[z.symbols[1:]], index[z.symbols[:m]]]
            * np.exp(1j * xi * f(z.symbols[: f.depth]))
            for z in sft.words(m + 1)
        ]
    )
    r_bound = _certified_r(matrix, sft, m)
    seminorm = lipschitz_seminorm(StateFunction(sft, m + 1, extended))
    return TwistedOperator(rpf, f, float(xi), matrix, extended, r_bound, seminorm)


def _certified_r(matrix: np.ndarray, sft, m: int) -> float:
    # weights[x, a]: entry for the preimage a.x, zero when a may not precede x
    words = sft.words(m)
    index = sft.index(m)
    weights = np.zeros((len(words), sft.alphabet_size), dtype=complex)
    for i, word in enumerate(words):
        for a in range(sft.alphabet_size):
            if sft.transitions[a][word.symbols[0]]:
                weights[i, a] = matrix[i, index[((a,) + word.symbols)[:m]]]
    agree = agreement_matrix(sft, m)
    spread = np.abs(weights[:, None, :] - weights[None, :, :]).sum(axis=2)
    distinct = agree < m
    if not distinct.any():
        return 0.0
    return float((spread[distinct] / sft.theta ** agree[distinct]).max())


def h_norm(v: StateFunction, H: float, theta: Optional[float] = None) -> float:
    """||v||_H = max(||v||_inf, |v|_theta / H)."""
    if H < 1:
        raise ValueError(f"H must be at least 1, got {H}")
    return max(v.sup_norm(), lipschitz_seminorm(v, theta) / H)


@dataclass(frozen=True)
class C0Calibration:
    trials: int
    r_empirical: float
    c0_empirical: float
    r_certified: float
    c0_certified: float


def calibrate_c0(op: TwistedOperator, trials: int = 1000, seed: int = 0) -> C0Calibration:
    """
    Smallest R with |L v|_theta <= theta |v|_theta + R ||v||_inf over random
    complex v, and the matching C0 = R / |g~|_theta.
    """
    rng = np.random.default_rng(seed)
    count = len(op.sft.words(op.depth))
    worst = 0.0
    for _ in range(trials):
        v = StateFunction(
            op.sft, op.depth, rng.standard_normal(count) + 1j * rng.standard_normal(count)
        )
        excess = lipschitz_seminorm(op.apply(v)) - op.theta * lipschitz_seminorm(v)
        worst = max(worst, excess / v.sup_norm())
    c0 = worst / op.weight_seminorm if op.weight_seminorm > 0 else op.c0
    if worst > op.r_bound * (1 + 1e-9) + 1e-12:
        raise InvariantViolationError(
            "basic inequality", f"observed R={worst:.6g} above certified {op.r_bound:.6g}"
        )
    LOGGER.debug("xi=%g: calibrated R=%.6g, certified R=%.6g", op.xi, worst, op.r_bound)
    return C0Calibration(trials, worst, c0, op.r_bound, op.c0)


def green_kubo_variance(rpf: RpfData, f: FiberCocycle, terms: int = 50) -> float:
    """sigma^2 = int f^2 + 2 sum_{k=1..terms} int f (f o sigma^k), exact via the transfer operator."""
    if f.depth > rpf.depth:
        raise DepthTooSmallError(rpf.depth, f.depth)
    values = f.values[prefix_map(rpf.sft, rpf.depth, f.depth)]
    values = values - rpf.mu @ values
    total = float(rpf.mu @ (values * values))
    pushed = values.copy()
    for _ in range(terms):
        pushed = rpf.g @ pushed
        total += 2.0 * float(rpf.mu @ (pushed * values))
    return total


@dataclass(frozen=True)
class LowFrequencyFit:
    """1 - Re lambda_xi = c xi^2 fitted on [0, xi_max]; c plays 2 A_kappa."""

    xi_max: float
    c: float
    b: float

    @property
    def a_kappa(self) -> float:
        return self.c / 2.0


@dataclass(frozen=True, eq=False)
class SpectralCurve:
    xi: np.ndarray
    lambdas: np.ndarray
    second_derivative: float
    variance: float
    truncated_at: Optional[float] = None
    fit: Optional[LowFrequencyFit] = None

    @property
    def curvature_error(self) -> float:
        gap = abs(self.second_derivative + self.variance)
        if self.variance == 0:
            return 0.0 if gap == 0 else math.inf
        return gap / abs(self.variance)


def _leading_near(matrix: np.ndarray, previous: complex) -> Tuple[complex, complex]:
    values = scipy.linalg.eigvals(matrix)
    tracked = complex(values[np.argmin(np.abs(values - previous))])
    dominant = complex(values[np.argmax(np.abs(values))])
    return tracked, dominant


def spectral_curve(
    rpf: RpfData,
    f: FiberCocycle,
    xi_grid: Sequence[float],
    m: Optional[int] = None,
    terms: int = 50,
    fit_xi_max: float = 0.2,
) -> SpectralCurve:
    """
    Leading eigenvalue lambda_xi of L_xi over `xi_grid`, tracked by continuity
    outwards from xi = 0 on each side. A tracked eigenvalue that stops being
    dominant truncates that side of the curve.
    """
    grid = np.unique(np.append(np.asarray(xi_grid, dtype=float), 0.0))
    lambdas = {0.0: complex(1.0)}
    truncated_at = None
    for side in (grid[grid > 0], grid[grid < 0][::-1]):
        previous = complex(1.0)
        for xi in side:
            op = twisted_matrix(rpf, f, float(xi), m)
            tracked, dominant = _leading_near(op.matrix, previous)
            if abs(tracked) < abs(dominant) - 1e-9:
                error = EigenvalueCrossingError(float(xi), tracked, dominant)
                LOGGER.warning("%s; truncating the curve", error)
                if truncated_at is None or abs(xi) < abs(truncated_at):
                    truncated_at = float(xi)
                break
            lambdas[float(xi)] = tracked
            previous = tracked
    xis = np.array(sorted(lambdas))
    values = np.array([lambdas[x] for x in xis])

    h = CURVATURE_STEP
    plus, _ = _leading_near(twisted_matrix(rpf, f, h, m).matrix, 1.0)
    minus, _ = _leading_near(twisted_matrix(rpf, f, -h, m).matrix, 1.0)
    second = float(((plus - 2.0 + minus) / h**2).real)
    variance = green_kubo_variance(rpf, f, terms)
    curve = SpectralCurve(xis, values, second, variance, truncated_at)
    if curve.curvature_error > 0.02:
        LOGGER.warning(
            "lambda''(0)=%.6g does not match -sigma^2=%.6g", second, -variance
        )
    inside = (xis > 0) & (xis <= fit_xi_max)
    if inside.sum() >= 2:
        curve = SpectralCurve(
            xis, values, second, variance, truncated_at, fit_low_frequency(curve, fit_xi_max)
        )
    return curve


def fit_low_frequency(curve: SpectralCurve, xi_max: float = 0.2) -> LowFrequencyFit:
    inside = (curve.xi > 0) & (curve.xi <= xi_max)
    xi = curve.xi[inside]
    lam = curve.lambdas[inside]
    if xi.size == 0:
        raise ValueError(f"no positive frequencies up to {xi_max}")
    c = float(np.sum((1.0 - lam.real) * xi**2) / np.sum(xi**4))
    b = float(np.max(np.abs(lam - (1.0 - c * xi**2)) / xi**3))
    return LowFrequencyFit(xi_max, c, b)


@dataclass(frozen=True, eq=False)
class DecayProfile:
    xi: float
    H: float
    values: np.ndarray
    rate: float

    def within(self, a_kappa: float, factor: float = 4.0) -> bool:
        """w_n <= factor (1 - a_kappa xi^2)^n for every n."""
        n = np.arange(len(self.values))
        base = max(1.0 - a_kappa * self.xi**2, 0.0)
        return bool(np.all(self.values <= factor * base**n * (1 + 1e-12)))

    def first_below(self, level: float) -> Optional[int]:
        hits = np.nonzero(self.values < level)[0]
        return int(hits[0]) if hits.size else None


def norm_decay_profile(op: TwistedOperator, start: StateFunction, n_max: int) -> DecayProfile:
    """w_n = ||L_xi^n v||_H for n <= n_max, the start v scaled to H-norm 1."""
    H = op.H
    scale = h_norm(start.lift(op.depth), H, op.theta)
    if scale == 0:
        raise ValueError("start function must be nonzero")
    values = start.lift(op.depth).values.astype(complex) / scale
    norms = []
    for _ in range(n_max + 1):
        norms.append(h_norm(StateFunction(op.sft, op.depth, values), H, op.theta))
        values = op.matrix @ values
    norms_arr = np.array(norms)
    for n in range(1, len(norms_arr)):
        if norms_arr[n] > norms_arr[n - 1] * (1 + 1e-9) + 1e-15:
            raise InvariantViolationError(
                "H-norm monotonicity", f"w_{n}={norms_arr[n]:.6g} > w_{n-1}={norms_arr[n-1]:.6g}"
            )
    positive = norms_arr > 1e-300
    tail = np.nonzero(positive)[0]
    rate = float((norms_arr[tail[-1]] / norms_arr[0]) ** (1.0 / tail[-1])) if tail[-1] > 0 else 1.0
    return DecayProfile(op.xi, H, norms_arr, rate)


@dataclass(frozen=True)
class StablePair:
    """x and y share their length-m suffix: sigma^n x = sigma^n y."""

    x: Word
    y: Word
    n: int
    g_x: float
    g_y: float
    phase: float

    @property
    def suffix(self) -> Tuple[int, ...]:
        return self.x.symbols[self.n :]


def _weight(op: TwistedOperator, symbols: Sequence[int], n: int) -> float:
    index = op.sft.index(op.depth + 1)
    g = np.abs(op.extended)
    return float(np.prod([g[index[tuple(symbols[i : i + op.depth + 1])]] for i in range(n)]))


def _pair(op: TwistedOperator, x: Sequence[int], y: Sequence[int], n: int) -> StablePair:
    phase = wrap_phase(op.xi * (birkhoff_sum(op.f, y, n) - birkhoff_sum(op.f, x, n)))
    return StablePair(
        Word(tuple(x)), Word(tuple(y)), n, _weight(op, x, n), _weight(op, y, n), phase
    )


def stable_pairs(
    op: TwistedOperator, n: int, suffix: WordLike, budget: int = 1_000_000
) -> List[StablePair]:
    """
    Every ordered pair of admissible depth-(n+m) words ending in `suffix`,
    including x = y, with weights g_n and phase xi (f_n(y) - f_n(x)).
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    symbols = check_admissible(op.sft, suffix)
    if len(symbols) != op.depth:
        raise DepthMismatchError(len(symbols), op.depth)
    heads = [
        h for h in admissible_extensions(op.sft, (), n) if op.sft.is_admissible(h + symbols)
    ]
    if len(heads) ** 2 > budget:
        raise ValueError(f"{len(heads) ** 2} stable pairs exceed the budget {budget}")
    words = [h + symbols for h in heads]
    return [_pair(op, x, y, n) for x in words for y in words]


def stable_tolerance(g_x: float, g_y: float, epsilon: float) -> float:
    """delta in (0, pi) with 1 - cos(delta) = epsilon (1/g_x + 1/g_y)."""
    rhs = epsilon * (1.0 / g_x + 1.0 / g_y)
    if not 0.0 < rhs < 2.0:
        raise ToleranceUndefinedError("stable", rhs)
    return math.acos(1.0 - rhs)


def unstable_tolerance(d: float, H: float) -> float:
    """delta in [0, pi/2) with sin(delta) = 2 H d."""
    rhs = 2.0 * H * d
    if not 0.0 <= rhs < 1.0:
        raise ToleranceUndefinedError("unstable", rhs)
    return math.asin(rhs)


def tolerances(
    pair: StablePair, epsilon: float, H: float, theta: float
) -> Tuple[float, float]:
    return (
        stable_tolerance(pair.g_x, pair.g_y, epsilon),
        unstable_tolerance(word_metric(pair.x, pair.y, theta), H),
    )


@dataclass(frozen=True)
class CancellationSchedule:
    xi: float
    b: float
    n_xi: int
    epsilon_xi: float
    growth: float


def cancellation_schedule(
    rpf: RpfData, xi: float, b: float, a_const: float = SCHEDULE_CONSTANT
) -> CancellationSchedule:
    """n_xi = min{n : theta^n < 1/(b xi)} and epsilon_xi = 1/(A G^n_xi), G = 1/max g."""
    if xi <= 0 or b <= 0:
        raise ValueError("xi and b must be positive")
    theta = rpf.sft.theta
    n_xi = 0
    while theta**n_xi >= 1.0 / (b * xi):
        n_xi += 1
    growth = 1.0 / float(np.max(rpf.g))
    return CancellationSchedule(xi, b, n_xi, 1.0 / (a_const * growth**n_xi), growth)


@dataclass(frozen=True)
class UsCycle:
    xi: float
    epsilon: float
    H: float
    pairs: Tuple[StablePair, ...]
    stable_tolerances: Tuple[float, ...]
    junction_distances: Tuple[float, ...]
    unstable_tolerances: Tuple[float, ...]
    total_phase: float
    total_tolerance: float

    @property
    def margin(self) -> float:
        return abs(self.total_phase) - self.total_tolerance

    def recomputed_phase(self) -> float:
        return wrap_phase(sum(p.phase for p in self.pairs))


def find_us_cycle(
    rpf: RpfData,
    f: FiberCocycle,
    xi0: float,
    n: int,
    max_pairs: int,
    budget: int = 200_000,
    epsilon: Optional[float] = None,
    closeness: Optional[int] = None,
) -> UsCycle:
    """
    Searches us-cycles of at most `max_pairs` stable pairs of depth n+m words whose
    junction partners share their first n-c symbols, returning the one with the
    largest phase - tolerance margin among the shortest lengths that reach a
    positive margin.

    Args:
        rpf: Normalized eigendata, fixing the suffix depth m.
        f: One-sided cocycle.
        xi0: Frequency at which phases are measured.
        n: Stable-pair level.
        max_pairs: Longest cycle tried.
        budget: Candidate cycles examined over all lengths.
        epsilon: Cancellation size; defaults to 1/(A G^n).
        closeness: The constant c of the junction condition; defaults to JUNCTION_CLOSENESS.

    Raises:
        NotFoundError: No positive margin within the budget.
    """
    op = twisted_matrix(rpf, f, xi0)
    if epsilon is None:
        epsilon = 1.0 / (SCHEDULE_CONSTANT * (1.0 / float(np.max(rpf.g))) ** n)
    if closeness is None:
        closeness = JUNCTION_CLOSENESS
    geometry = CycleGeometry(rpf.sft, n, rpf.depth, closeness, f.depth)
    H, theta = op.H, op.theta

    cache = {}

    def lookup(tail):
        if tail not in cache:
            word = geometry.word(tail)
            cache[tail] = (word, birkhoff_sum(f, word, n), _weight(op, word, n))
        return cache[tail]

    examined = 0
    for rounds in range(1, max_pairs + 1):
        best: Optional[UsCycle] = None
        for walk in closed_walks(geometry, rounds, budget - examined):
            examined += 1
            try:
                cycle = _evaluate(walk, lookup, op, n, epsilon, H, theta)
            except ToleranceUndefinedError:
                continue
            if cycle.margin > 0 and (best is None or cycle.margin > best.margin):
                best = cycle
        if best is not None:
            LOGGER.info(
                "us-cycle with %d pairs at xi=%g: phase %.6g, tolerance %.6g",
                rounds,
                xi0,
                best.total_phase,
                best.total_tolerance,
            )
            return best
        if examined >= budget:
            break
    raise NotFoundError("us-cycle", budget)


def _evaluate(walk, lookup, op: TwistedOperator, n, epsilon, H, theta) -> UsCycle:
    pairs, stable, distances, unstable = [], [], [], []
    for k, (x_tail, y_tail) in enumerate(walk):
        x_word, fx, gx = lookup(x_tail)
        y_word, fy, gy = lookup(y_tail)
        pair = StablePair(
            Word(x_word), Word(y_word), n, gx, gy, wrap_phase(op.xi * (fy - fx))
        )
        stable.append(stable_tolerance(gx, gy, epsilon))
        following = lookup(walk[(k + 1) % len(walk)][0])[0]
        d = word_metric(y_word, following, theta)
        distances.append(d)
        unstable.append(unstable_tolerance(d, H))
        pairs.append(pair)
    total = wrap_phase(sum(p.phase for p in pairs))
    return UsCycle(
        op.xi,
        epsilon,
        H,
        tuple(pairs),
        tuple(stable),
        tuple(distances),
        tuple(unstable),
        total,
        float(sum(stable) + sum(unstable)),
    )


def sample_nice_observable(
    op: TwistedOperator, epsilon: float, seed: int, max_halvings: int = 200
) -> StateFunction:
    """
    A random v~ with 1 - epsilon < |v~| < 1 and |v~|_theta <= H: phases built
    along the prefix tree (each level contributes theta^level times a uniform
    draw), then phases and modulus spread shrunk together until the seminorm fits.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    rng = np.random.default_rng(seed)
    sft, m, H = op.sft, op.depth, op.H
    words = sft.words(m)
    phases = np.zeros(len(words))
    for level in range(1, m + 1):
        to_prefix = prefix_map(sft, m, level)
        kicks = rng.uniform(-math.pi, math.pi, len(sft.words(level)))
        phases += op.theta ** (level - 1) * kicks[to_prefix]
    spread = rng.uniform(-0.5, 0.5, len(words))
    middle = 1.0 - epsilon / 2.0
    scale = 1.0
    for _ in range(max_halvings):
        moduli = middle + scale * spread * epsilon * 0.98
        v = StateFunction(sft, m, moduli * np.exp(1j * scale * phases))
        if lipschitz_seminorm(v) <= H:
            return v
        scale /= 2.0
    raise NotNiceError(f"no nice observable with |v|_theta <= {H} after {max_halvings} halvings")


@dataclass(frozen=True)
class CancellationCheck:
    is_cancellation: bool
    margin: float
    transferred: Optional[float] = None


def cancellation_pair_check(
    pair: StablePair, v: StateFunction, op: TwistedOperator, epsilon: float
) -> CancellationCheck:
    """
    Tests |g~_n(x) v(x) + g~_n(y) v(y)| <= g_n(x)|v(x)| + g_n(y)|v(y)| - epsilon and,
    for a cancellation pair, that |L^n v(p)| <= 1 - epsilon at the shared suffix p.

    Raises:
        NotNiceError: v is not nice for epsilon and the operator's H.
    """
    v = v.lift(op.depth)
    moduli = np.abs(v.values)
    if np.any(moduli <= 1.0 - epsilon) or np.any(moduli >= 1.0):
        raise NotNiceError(f"moduli must lie in ({1 - epsilon}, 1)")
    seminorm = lipschitz_seminorm(v)
    if seminorm > op.H * (1 + 1e-12):
        raise NotNiceError(f"|v|_theta={seminorm:.6g} exceeds H={op.H:.6g}")

    vx, vy = v[pair.x], v[pair.y]
    joint = abs(pair.g_x * vx + pair.g_y * np.exp(1j * pair.phase) * vy)
    margin = float(pair.g_x * abs(vx) + pair.g_y * abs(vy) - epsilon - joint)
    if margin < 0:
        return CancellationCheck(False, margin)

    suffix = as_symbols(pair.suffix)
    p = op.sft.index(op.depth)[suffix[: op.depth]]
    transferred = float(abs((op.power(pair.n) @ v.values)[p]))
    if transferred > 1.0 - epsilon + 1e-12:
        raise InvariantViolationError(
            "cancellation bound", f"|L^n v(p)|={transferred:.12g} > 1 - {epsilon:g}"
        )
    return CancellationCheck(True, margin, transferred)


def strong_cancellation(
    cycle: UsCycle, v: StateFunction, op: TwistedOperator, epsilon: Optional[float] = None
) -> bool:
    """Whether some pair of the cycle is a cancellation pair for v."""
    epsilon = cycle.epsilon if epsilon is None else epsilon
    return any(cancellation_pair_check(p, v, op, epsilon).is_cancellation for p in cycle.pairs)
