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
One-sided subshifts of finite type, cylinder words and locally constant functions.

Points of the shift are only ever seen through their depth-m cylinder words,
ordered lexicographically. Every function of a point is locally constant at a
fixed depth and is stored as a :class:`StateFunction`.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from skewmix.mixing.errors import (
    DeadSymbolError,
    DepthMismatchError,
    InadmissibleWordError,
    NotMixingError,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SftSpace:
    alphabet_size: int
    transitions: Tuple[Tuple[bool, ...], ...]
    theta: float
    primitivity_power: int = field(default=1, compare=False)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=bool)

    def allowed(self, a: int, b: int) -> bool:
        return self.transitions[a][b]

    def words(self, depth: int) -> "Tuple[Word, ...]":
        return _words(self, depth)

    def index(self, depth: int) -> Dict[Tuple[int, ...], int]:
        return _index(self, depth)

    def word_array(self, depth: int) -> np.ndarray:
        return _word_array(self, depth)

    def is_admissible(self, symbols: Sequence[int]) -> bool:
        return all(0 <= s < self.alphabet_size for s in symbols) and all(
            self.transitions[a][b] for a, b in zip(symbols, symbols[1:])
        )


@dataclass(frozen=True)
class Word:
    symbols: Tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.symbols)

    @classmethod
    def parse(cls, text: str) -> "Word":
        return cls(tuple(int(c) for c in text))

    def prefix(self, length: int) -> "Word":
        return Word(self.symbols[:length])

    def suffix(self, length: int) -> "Word":
        return Word(self.symbols[len(self.symbols) - length :])

    def __str__(self):
        return "".join(str(s) for s in self.symbols)

    def __repr__(self):
        return f"Word('{self}')"


WordLike = Union[Word, Sequence[int], str]


def as_symbols(word: WordLike) -> Tuple[int, ...]:
    if isinstance(word, Word):
        return word.symbols
    if isinstance(word, str):
        return Word.parse(word).symbols
    return tuple(int(s) for s in word)


@lru_cache(maxsize=None)
def _words(sft: SftSpace, depth: int) -> "Tuple[Word, ...]":
    if depth == 0:
        return (Word(()),)
    layer: List[Tuple[int, ...]] = [(a,) for a in range(sft.alphabet_size)]
    for _ in range(depth - 1):
        layer = [
            w + (b,)
            for w in layer
            for b in range(sft.alphabet_size)
            if sft.transitions[w[-1]][b]
        ]
    return tuple(Word(w) for w in layer)


@lru_cache(maxsize=None)
def _index(sft: SftSpace, depth: int) -> Dict[Tuple[int, ...], int]:
    return {w.symbols: i for i, w in enumerate(_words(sft, depth))}


@lru_cache(maxsize=None)
def _word_array(sft: SftSpace, depth: int) -> np.ndarray:
    array = np.array([w.symbols for w in _words(sft, depth)], dtype=np.int64)
    array = array.reshape(len(_words(sft, depth)), depth)
    array.setflags(write=False)
    return array


def build_sft(
    alphabet_size: int, transitions: Sequence[Sequence[Union[int, bool]]], theta: float
) -> SftSpace:
    """
    Validates a transition matrix and returns the subshift it defines.

    Args:
        alphabet_size: Number of symbols.
        transitions: Square 0/1 matrix, entry (a, b) set iff b may follow a.
        theta: Base of the metric d(x, y) = theta^(common prefix length), in (0, 1).

    Returns: The validated :class:`SftSpace`, recording the smallest power of the
        transition matrix that is entrywise positive.
    """
    matrix = np.array(transitions, dtype=int) != 0
    if matrix.shape != (alphabet_size, alphabet_size):
        raise ValueError(
            f"transition matrix must be {alphabet_size}x{alphabet_size}, got {matrix.shape}"
        )
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    for symbol in range(alphabet_size):
        if not matrix[symbol].any():
            raise DeadSymbolError(symbol, "row")
        if not matrix[:, symbol].any():
            raise DeadSymbolError(symbol, "column")

    max_power = alphabet_size**2
    power = matrix.astype(np.int64)
    step = matrix.astype(np.int64)
    for k in range(1, max_power + 1):
        if (power > 0).all():
            LOGGER.debug("transition matrix is primitive at power %d", k)
            return SftSpace(
                alphabet_size=alphabet_size,
                transitions=tuple(tuple(bool(v) for v in row) for row in matrix),
                theta=float(theta),
                primitivity_power=k,
            )
        power = np.minimum(power @ step, 1)
    raise NotMixingError(max_power)


def check_admissible(sft: SftSpace, word: WordLike) -> Tuple[int, ...]:
    symbols = as_symbols(word)
    if not sft.is_admissible(symbols):
        raise InadmissibleWordError(symbols)
    return symbols


def word_metric(w1: WordLike, w2: WordLike, theta: float) -> float:
    s1, s2 = as_symbols(w1), as_symbols(w2)
    if len(s1) != len(s2):
        raise DepthMismatchError(len(s1), len(s2))
    return theta ** common_prefix(s1, s2)


def common_prefix(s1: Sequence[int], s2: Sequence[int]) -> int:
    j = 0
    for a, b in zip(s1, s2):
        if a != b:
            break
        j += 1
    return j


def preimages(sft: SftSpace, word: WordLike) -> List[Word]:
    symbols = check_admissible(sft, word)
    if not symbols:
        return [Word(())]
    return [
        Word(((a,) + symbols)[: len(symbols)])
        for a in range(sft.alphabet_size)
        if sft.transitions[a][symbols[0]]
    ]


@lru_cache(maxsize=None)
def agreement_matrix(sft: SftSpace, depth: int) -> np.ndarray:
    """Common prefix length of every pair of depth-`depth` words."""
    words = sft.word_array(depth)
    agree = np.cumprod(words[:, None, :] == words[None, :, :], axis=2).sum(axis=2)
    agree = agree.reshape(len(words), len(words))
    agree.setflags(write=False)
    return agree


def distance_matrix(sft: SftSpace, depth: int) -> np.ndarray:
    """
    Pairwise d_theta between depth-`depth` words; the diagonal holds the
    cylinder diameter theta^depth.
    """
    return sft.theta ** agreement_matrix(sft, depth)


@lru_cache(maxsize=None)
def prefix_map(sft: SftSpace, depth: int, prefix_depth: int) -> np.ndarray:
    """Index of the length-`prefix_depth` prefix of every depth-`depth` word."""
    if prefix_depth > depth:
        raise ValueError(f"prefix depth {prefix_depth} exceeds depth {depth}")
    index = sft.index(prefix_depth)
    mapping = np.array(
        [index[w.symbols[:prefix_depth]] for w in sft.words(depth)], dtype=np.int64
    )
    mapping.setflags(write=False)
    return mapping


@dataclass(frozen=True, eq=False)
class StateFunction:
    sft: SftSpace
    depth: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        expected = len(self.sft.words(self.depth))
        if values.shape != (expected,):
            raise ValueError(
                f"expected {expected} values for depth {self.depth}, got shape {values.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("state function values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(
        cls, sft: SftSpace, depth: int, mapping: Mapping[str, complex]
    ) -> "StateFunction":
        index = sft.index(depth)
        values = np.zeros(len(index), dtype=complex)
        for key, value in mapping.items():
            symbols = check_admissible(sft, key)
            values[index[symbols]] = value
        return cls(sft, depth, values)

    @classmethod
    def constant(cls, sft: SftSpace, depth: int, value: complex) -> "StateFunction":
        return cls(sft, depth, np.full(len(sft.words(depth)), value))

    def __getitem__(self, word: WordLike) -> complex:
        symbols = as_symbols(word)
        if len(symbols) < self.depth:
            raise DepthMismatchError(len(symbols), self.depth)
        return self.values[self.sft.index(self.depth)[symbols[: self.depth]]]

    def lift(self, depth: int) -> "StateFunction":
        if depth == self.depth:
            return self
        return StateFunction(
            self.sft, depth, self.values[prefix_map(self.sft, depth, self.depth)]
        )

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def as_dict(self) -> Dict[str, complex]:
        return {str(w): v for w, v in zip(self.sft.words(self.depth), self.values)}


def lipschitz_seminorm(v: StateFunction, theta: float = None) -> float:
    """
    Exact theta-seminorm of the locally constant extension of `v`: the maximum
    of |v(w1) - v(w2)| / d(w1, w2) over distinct words.
    """
    if theta is None:
        theta = v.sft.theta
    values = v.values
    if len(values) < 2:
        return 0.0
    agree = agreement_matrix(v.sft, v.depth)
    distinct = agree < v.depth
    ratios = np.abs(values[:, None] - values[None, :])[distinct] / theta ** agree[distinct]
    return float(ratios.max(initial=0.0))


def periodic_words(sft: SftSpace, period: int) -> List[Word]:
    """
    One representative (least rotation) per periodic orbit of exact or dividing
    period `period`: words whose cyclic closure is admissible.
    """
    found = []
    for symbols in itertools.product(range(sft.alphabet_size), repeat=period):
        cyclic = symbols + symbols[:1]
        if not sft.is_admissible(cyclic):
            continue
        if symbols == min(symbols[i:] + symbols[:i] for i in range(period)):
            found.append(Word(symbols))
    return found


def admissible_extensions(
    sft: SftSpace, symbols: Sequence[int], length: int
) -> List[Tuple[int, ...]]:
    """All admissible continuations of `symbols` by `length` more symbols."""
    layer = [tuple(symbols)]
    for _ in range(length):
        layer = [
            w + (b,)
            for w in layer
            for b in range(sft.alphabet_size)
            if not w or sft.transitions[w[-1]][b]
        ]
    return [w[len(symbols) :] for w in layer]
