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

from typing import Any, Sequence


class NotMixingError(Exception):
    def __init__(self, max_power: int):
        super().__init__(
            f"transition matrix has no entrywise positive power up to {max_power}"
        )
        self.max_power = max_power


class DeadSymbolError(Exception):
    def __init__(self, symbol: int, kind: str):
        super().__init__(f"symbol {symbol} has an empty {kind} in the transition matrix")
        self.symbol = symbol
        self.kind = kind


class DepthMismatchError(Exception):
    def __init__(self, left: int, right: int):
        super().__init__(f"words have different depths {left} and {right}")
        self.left = left
        self.right = right


class InadmissibleWordError(Exception):
    def __init__(self, symbols: Sequence[int]):
        word = "".join(str(s) for s in symbols)
        super().__init__(f"word '{word}' uses a forbidden transition")
        self.symbols = tuple(symbols)


class DepthTooSmallError(Exception):
    def __init__(self, depth: int, required: int):
        super().__init__(f"depth {depth} is below the required depth {required}")
        self.depth = depth
        self.required = required


class NoConvergenceError(Exception):
    def __init__(self, tol: float, max_iters: int, residual: float):
        super().__init__(
            f"eigen-iteration did not reach tolerance {tol:g} within {max_iters} "
            f"iterations (residual {residual:.3e})"
        )
        self.tol = tol
        self.max_iters = max_iters
        self.residual = residual


class InsufficientDataError(Exception):
    def __init__(self, what: str, count: int, required: int):
        super().__init__(f"{what}: got {count} points, need at least {required}")
        self.count = count
        self.required = required


class WordTooShortError(Exception):
    def __init__(self, depth: int, required: int):
        super().__init__(f"word of depth {depth} is shorter than the required {required}")
        self.depth = depth
        self.required = required


class BudgetExceededError(Exception):
    def __init__(self, what: str, budget: int, partial: Any = None):
        super().__init__(f"{what} exceeded the enumeration budget of {budget}")
        self.budget = budget
        self.partial = partial


class NotPositiveError(Exception):
    def __init__(self, word_index: int, weight: complex):
        super().__init__(
            f"spectral measure of word {word_index} has a non-positive weight {weight}"
        )
        self.word_index = word_index
        self.weight = weight


class EigenvalueCrossingError(Exception):
    def __init__(self, xi: float, tracked: complex, dominant: complex):
        super().__init__(
            f"tracked eigenvalue {tracked:.6g} lost dominance to {dominant:.6g} at xi={xi:g}"
        )
        self.xi = xi
        self.tracked = tracked
        self.dominant = dominant


class ToleranceUndefinedError(Exception):
    def __init__(self, kind: str, rhs: float):
        super().__init__(
            f"{kind} tolerance is undefined: right-hand side {rhs:.6g} out of range"
        )
        self.kind = kind
        self.rhs = rhs


class NotFoundError(Exception):
    def __init__(self, what: str, budget: int):
        super().__init__(f"no {what} found within a budget of {budget}")
        self.budget = budget


class NotNiceError(Exception):
    def __init__(self, reason: str):
        super().__init__(f"observable is not nice: {reason}")
        self.reason = reason


class DegenerateWindowError(Exception):
    def __init__(self, window: Sequence[int], count: int):
        super().__init__(
            f"window {tuple(window)} holds {count} usable points, at least 5 are needed"
        )
        self.window = tuple(window)
        self.count = count


class InvariantViolationError(Exception):
    def __init__(self, name: str, detail: str):
        super().__init__(f"{name} violated: {detail}")
        self.name = name
        self.detail = detail


class QuadratureWarning(UserWarning):
    pass
