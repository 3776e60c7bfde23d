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
The skew product F(x, r) = (sigma x, r + f(x)): cocycles, Birkhoff sums, the
exact one-sided reduction of finite-range cocycles, and accessibility checks.
"""

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from skewmix.mixing.errors import WordTooShortError
from skewmix.mixing.gibbs import RpfData, cylinder_measures
from skewmix.mixing.symbolic import (
    SftSpace,
    StateFunction,
    Word,
    WordLike,
    as_symbols,
    periodic_words,
)

LOGGER = logging.getLogger(__name__)

KEY_DIGITS = 9


@dataclass(frozen=True, eq=False)
class FiberCocycle:
    """
    A real function of the coordinates offset .. offset+depth-1 of a point,
    stored per admissible word of length `depth`.
    """

    sft: SftSpace
    depth: int
    values: np.ndarray
    offset: int = 0
    mean: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = len(self.sft.words(self.depth))
        if values.shape != (expected,) or not np.isfinite(values).all():
            raise ValueError(
                f"cocycle of depth {self.depth} needs {expected} finite values"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, sft: SftSpace, depth: int, mapping: Dict[str, float]):
        index = sft.index(depth)
        values = np.zeros(len(index))
        for key, value in mapping.items():
            values[index[as_symbols(key)]] = value
        return cls(sft, depth, values)

    def __call__(self, window: Sequence[int]) -> float:
        return float(self.values[self.sft.index(self.depth)[tuple(window)]])

    def at(self, window: Sequence[int], origin: int) -> float:
        """Value at the point whose coordinate 0 sits at position `origin` of `window`."""
        start = origin + self.offset
        return self(window[start : start + self.depth])

    def as_state_function(self, depth: Optional[int] = None) -> StateFunction:
        if self.offset != 0:
            raise ValueError("only one-sided cocycles are state functions")
        state = StateFunction(self.sft, self.depth, self.values.astype(complex))
        return state if depth is None else state.lift(depth)


@dataclass(frozen=True, eq=False)
class TwoSidedCocycle(FiberCocycle):
    @classmethod
    def of_range(cls, sft: SftSpace, k: int, values: np.ndarray) -> "TwoSidedCocycle":
        return cls(sft, 2 * k + 1, values, offset=-k)

    @property
    def range(self) -> int:
        return -self.offset


def birkhoff_sum(f: FiberCocycle, w: WordLike, n: int) -> float:
    symbols = as_symbols(w)
    required = n + f.depth - 1
    if len(symbols) < required:
        raise WordTooShortError(len(symbols), required)
    index = f.sft.index(f.depth)
    return float(sum(f.values[index[symbols[i : i + f.depth]]] for i in range(n)))


def center(f: FiberCocycle, rpf: RpfData) -> FiberCocycle:
    weights = cylinder_measures(rpf, f.depth)
    values = f.values - float(weights @ f.values)
    return FiberCocycle(
        f.sft, f.depth, values, offset=f.offset, mean=float(weights @ values)
    )


def reduce_to_one_sided(
    f2: TwoSidedCocycle,
) -> Tuple[FiberCocycle, FiberCocycle]:
    """
    Writes a range-k cocycle as f = f_plus + h - h o sigma with f_plus = f o sigma^k
    (coordinates 0..2k) and h = sum_{j<k} f o sigma^j (coordinates -k..2k-1).
    """
    sft, k = f2.sft, f2.range
    f_plus = FiberCocycle(sft, f2.depth, f2.values.copy())
    if k == 0:
        return f_plus, FiberCocycle(sft, 0, np.zeros(1))
    h_values = np.array(
        [
            sum(f2(w.symbols[j : j + 2 * k + 1]) for j in range(k))
            for w in sft.words(3 * k)
        ]
    )
    return f_plus, FiberCocycle(sft, 3 * k, h_values, offset=-k)


def cohomology_residual(
    f2: TwoSidedCocycle, f_plus: FiberCocycle, h: FiberCocycle
) -> float:
    """max |f - (f_plus + h - h o sigma)| over admissible windows of coordinates -k..2k."""
    k = f2.range
    worst = 0.0
    for window in f2.sft.words(3 * k + 1):
        w = window.symbols
        rebuilt = f_plus.at(w, k) + h.at(w, k) - h.at(w, k + 1)
        worst = max(worst, abs(f2.at(w, k) - rebuilt))
    return worst


@dataclass(frozen=True)
class OrbitSum:
    period: int
    word: Word
    total: float


@dataclass(frozen=True)
class ArithmeticityReport:
    orbit_sums: Tuple[OrbitSum, ...]
    normalized: Tuple[float, ...]
    differences: Tuple[float, ...]
    cohomologous_to_constant: bool
    lattice_candidate: bool
    lattice_step: Optional[float]


def periodic_sum(f: FiberCocycle, word: Word) -> float:
    period = word.depth
    repeats = -(-(period + f.depth) // period)
    extended = word.symbols * repeats
    return float(sum(f(extended[i : i + f.depth]) for i in range(period)))


def non_arithmeticity_check(
    sft: SftSpace, f: FiberCocycle, max_period: int, tol: float = 1e-10
) -> ArithmeticityReport:
    sums = [
        OrbitSum(p, w, periodic_sum(f, w))
        for p in range(1, max_period + 1)
        for w in periodic_words(sft, p)
    ]
    normalized = tuple(s.total / s.period for s in sums)
    by_period: Dict[int, List[float]] = defaultdict(list)
    for s in sums:
        by_period[s.period].append(s.total)
    differences = tuple(
        abs(a - b)
        for totals in by_period.values()
        for a, b in itertools.combinations(totals, 2)
    )
    constant = max(normalized) - min(normalized) <= tol

    nonzero = [d for d in differences if d > tol]
    step = None
    if nonzero:
        candidate = nonzero[0]
        for d in nonzero[1:]:
            candidate = _real_gcd(candidate, d, tol)
        if candidate > 1e-6 and all(
            abs(d / candidate - round(d / candidate)) <= 1e-8 for d in nonzero
        ):
            step = candidate
    LOGGER.info(
        "checked %d periodic orbits: constant=%s lattice step=%s",
        len(sums),
        constant,
        step,
    )
    return ArithmeticityReport(
        orbit_sums=tuple(sums),
        normalized=normalized,
        differences=differences,
        cohomologous_to_constant=constant,
        lattice_candidate=step is not None,
        lattice_step=step,
    )


def _real_gcd(a: float, b: float, tol: float, max_steps: int = 200) -> float:
    a, b = max(a, b), min(a, b)
    for _ in range(max_steps):
        if b <= tol:
            return a
        remainder = math.fmod(a, b)
        if b - remainder <= tol:
            remainder = 0.0
        a, b = b, remainder
    return 0.0


@dataclass(frozen=True)
class CycleGeometry:
    """
    Word layout of stable pairs and junctions at level n: depth n+m words split
    into a free prefix, the kept lead (positions n-c-lead .. n-c-1), a middle
    block (n-c .. n-1) and the shared suffix (n .. n+m-1). Junction partners
    share everything before position n-c, so d(y, x') <= theta^(n-c). With
    c = n nothing is shared and the lead is empty.
    """

    sft: SftSpace
    n: int
    m: int
    closeness: int
    cocycle_depth: int

    def __post_init__(self):
        if self.closeness < 1 or self.m < 1:
            raise ValueError("closeness and suffix depth must be positive")
        if self.closeness > self.n:
            raise ValueError(
                f"n={self.n} is too small for closeness {self.closeness}"
            )
        if self.cocycle_depth > self.m + 1:
            raise ValueError(
                f"cocycle depth {self.cocycle_depth} exceeds suffix depth + 1"
            )

    @property
    def lead(self) -> int:
        return min(max(self.cocycle_depth - 1, 1), self.n - self.closeness)

    @property
    def start(self) -> int:
        return self.n - self.closeness - self.lead

    @property
    def tail_length(self) -> int:
        return self.lead + self.closeness + self.m

    def tails(self) -> Tuple[Word, ...]:
        return self.sft.words(self.tail_length)

    def by_suffix(self) -> Dict[Tuple[int, ...], List[Tuple[int, ...]]]:
        groups: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = defaultdict(list)
        for tail in self.tails():
            groups[tail.symbols[-self.m :]].append(tail.symbols)
        return groups

    def by_lead(self) -> Dict[Tuple[int, ...], List[Tuple[int, ...]]]:
        groups: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = defaultdict(list)
        for tail in self.tails():
            groups[tail.symbols[: self.lead]].append(tail.symbols)
        return groups

    def junction_sum(self, f: FiberCocycle, tail: Sequence[int]) -> float:
        """The part of f_n that a junction can change: windows starting at n-c-(k-1) or later."""
        first = max(self.n - self.closeness - max(f.depth - 1, 0), self.start)
        return float(
            sum(
                f(tail[i - self.start : i - self.start + f.depth])
                for i in range(first, self.n)
            )
        )

    def prefix_for(self, first_symbol: int) -> Tuple[int, ...]:
        return canonical_prefix(self.sft, self.start, first_symbol)

    def word(self, tail: Sequence[int]) -> Tuple[int, ...]:
        return self.prefix_for(tail[0]) + tuple(tail)


def canonical_prefix(sft: SftSpace, length: int, follower: int) -> Tuple[int, ...]:
    """Lexicographically least admissible word of `length` symbols that may precede `follower`."""
    if length == 0:
        return ()
    feasible = [{a for a in range(sft.alphabet_size) if sft.transitions[a][follower]}]
    for _ in range(length - 1):
        feasible.append(
            {
                a
                for a in range(sft.alphabet_size)
                if any(sft.transitions[a][c] for c in feasible[-1])
            }
        )
    word = [min(feasible[length - 1])]
    for remaining in range(length - 2, -1, -1):
        word.append(
            min(c for c in feasible[remaining] if sft.transitions[word[-1]][c])
        )
    return tuple(word)


def closed_walks(
    geometry: CycleGeometry, rounds: int, budget: int
) -> Iterator[List[Tuple[Tuple[int, ...], Tuple[int, ...]]]]:
    """
    Tails (x_k, y_k) of closed us-walks with `rounds` stable pairs: y_k keeps the
    suffix of x_k, x_{k+1} keeps the lead of y_k, and x_{rounds+1} = x_1.
    Stops silently after `budget` candidates.
    """
    by_suffix, by_lead = geometry.by_suffix(), geometry.by_lead()
    m, lead = geometry.m, geometry.lead
    emitted = 0

    def extend(path, x_tail, remaining):
        nonlocal emitted
        first = path[0][0] if path else x_tail
        for y_tail in by_suffix[x_tail[-m:]]:
            if remaining == 1:
                if y_tail[:lead] == first[:lead] and y_tail != first:
                    if emitted >= budget:
                        return
                    emitted += 1
                    yield path + [(x_tail, y_tail)]
                continue
            for next_x in by_lead[y_tail[:lead]]:
                if emitted >= budget:
                    return
                yield from extend(path + [(x_tail, y_tail)], next_x, remaining - 1)

    for tail in geometry.tails():
        if emitted >= budget:
            return
        yield from extend([], tail.symbols, rounds)


@dataclass(frozen=True)
class AccessReport:
    n: int
    max_pairs: int
    budget: int
    closeness: int
    achieved: Tuple[float, ...]
    cycle_lengths: Tuple[int, ...]
    covering_radius: float
    truncated: bool = field(default=False)


def covering_radius(points: Sequence[float]) -> float:
    marks = np.concatenate([[0.0], np.sort(np.asarray(points, dtype=float)), [1.0]])
    return float(np.max(np.diff(marks)) / 2.0)


def unique_mod_one(
    values: Sequence[float], counts: Sequence[int], tol: float = 1e-7
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distinct values modulo 1, with points closer than `tol` merged and values
    within `tol` below 1 wrapped to 0. Each merged point keeps the smallest of
    its counts.
    """
    wrapped = np.mod(np.asarray(values, dtype=float), 1.0)
    wrapped[wrapped > 1.0 - tol] = 0.0
    counts = np.asarray(counts, dtype=int)
    if wrapped.size == 0:
        return wrapped, counts
    order = np.argsort(wrapped, kind="stable")
    wrapped, counts = wrapped[order], counts[order]
    starts = np.flatnonzero(np.concatenate([[True], np.diff(wrapped) > tol]))
    return wrapped[starts], np.minimum.reduceat(counts, starts)


def collapsed_access_coverage(
    sft: SftSpace,
    f: FiberCocycle,
    n: int,
    max_pairs: int,
    budget: int = 2_000_000,
    closeness: Optional[int] = None,
) -> AccessReport:
    """
    Collects the values t = sum_k f_n(x_k) - f_n(y_k) realized by us-cycles of at
    most `max_pairs` stable pairs of depth n+k words with shared length-k
    suffixes, keeping those in [0, 1] modulo 1.

    Only junctions change t, by B(x_{k+1}) - B(y_k) with B the windows that a
    junction can reach, so the search runs over (suffix, t) states. Without a
    `closeness` junction partners may differ anywhere before the suffix. When
    the state count passes `budget` the partial report is flagged `truncated`.
    """
    if n < 2 * max_pairs:
        raise ValueError(f"n={n} must be at least twice max_pairs={max_pairs}")
    closeness = n if closeness is None else closeness
    geometry = CycleGeometry(sft, n, max(f.depth, 1), closeness, f.depth)
    lead, m = geometry.lead, geometry.m

    levels: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], set] = defaultdict(set)
    for tail in geometry.tails():
        word = tail.symbols
        levels[(word[-m:], word[:lead])].add(
            round(geometry.junction_sum(f, word), KEY_DIGITS)
        )
    suffixes = sorted({suffix for suffix, _ in levels})

    # deltas[s][s2]: B(x') - B(y) over y ending in s and x' ending in s2 with a common lead
    deltas: Dict[Tuple[int, ...], Dict[Tuple[int, ...], np.ndarray]] = defaultdict(dict)
    for (suffix, kept), ys in levels.items():
        y_values = np.array(sorted(ys))
        for (target, target_kept), xs in levels.items():
            if target_kept != kept:
                continue
            step = np.add.outer(np.array(sorted(xs)), -y_values).ravel()
            previous = deltas[suffix].get(target)
            if previous is not None:
                step = np.concatenate([previous, step])
            deltas[suffix][target] = np.unique(np.round(step, KEY_DIGITS))

    found: List[np.ndarray] = []
    lengths: List[np.ndarray] = []
    states = 0
    truncated = False
    frontiers: Dict[Tuple[int, ...], Dict[Tuple[int, ...], np.ndarray]] = {
        s: {s: np.zeros(1)} for s in suffixes
    }
    for rounds in range(1, max_pairs + 1):
        # closing x_{rounds+1} = x_1 is a junction back to the origin suffix
        for origin, frontier in frontiers.items():
            for suffix, ts in frontier.items():
                closing = deltas[suffix].get(origin)
                if closing is None:
                    continue
                near = ts[(ts >= -closing[-1] - 1e-9) & (ts <= 1.0 - closing[0] + 1e-9)]
                totals = np.add.outer(near, closing).ravel()
                totals = totals[(totals >= -1e-9) & (totals <= 1.0 + 1e-9)]
                found.append(totals)
                lengths.append(np.full(totals.size, rounds))
        if rounds == max_pairs:
            break
        advanced = {}
        for origin, frontier in frontiers.items():
            merged: Dict[Tuple[int, ...], List[np.ndarray]] = defaultdict(list)
            for suffix, ts in frontier.items():
                for target, steps in deltas[suffix].items():
                    merged[target].append(np.add.outer(ts, steps).ravel())
            advanced[origin] = {
                s: np.unique(np.round(np.concatenate(parts), KEY_DIGITS))
                for s, parts in merged.items()
            }
            states += sum(len(v) for v in advanced[origin].values())
        frontiers = advanced
        if states > budget:
            truncated = True
            LOGGER.warning(
                "access coverage stopped after %d pairs: %d states exceed budget %d",
                rounds + 1,
                states,
                budget,
            )
            break

    achieved, cycle_lengths = unique_mod_one(
        np.concatenate(found) if found else np.zeros(0),
        np.concatenate(lengths) if lengths else np.zeros(0, dtype=int),
    )
    return AccessReport(
        n=n,
        max_pairs=max_pairs,
        budget=budget,
        closeness=closeness,
        achieved=tuple(achieved.tolist()),
        cycle_lengths=tuple(int(c) for c in cycle_lengths),
        covering_radius=covering_radius(achieved),
        truncated=truncated,
    )
