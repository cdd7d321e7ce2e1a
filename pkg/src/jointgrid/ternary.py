"""Three-valued operational logic kernel.

Entities of the joint network carry an operational level: 0 (no operation),
1 (reduced operation), or 2 (full operation).  Three operators combine
levels: min-AND selects the lowest input, max-OR selects the highest, and
new-XOR passes a unanimous value through and yields 1 (reduced) otherwise.
The binary predecessor model uses ordinary Boolean AND/OR on {0, 1}.

All operators are total, commutative, associative, idempotent, and
monotone non-decreasing in every argument under the order 0 < 1 < 2;
cascade convergence rests on the monotonicity.
"""

from __future__ import annotations

from typing import Iterable, Sequence

FAILED = 0
REDUCED = 1
FULL = 2

TERNARY_LEVELS = (FAILED, REDUCED, FULL)
BINARY_LEVELS = (0, 1)


def _check_ternary(value: int) -> int:
    if value not in TERNARY_LEVELS:
        raise ValueError(f"not a ternary operational level: {value!r}")
    return value


def _check_binary(value: int) -> int:
    if value not in BINARY_LEVELS:
        raise ValueError(f"not a binary operational level: {value!r}")
    return value


def min_and(a: int, b: int) -> int:
    """Lowest of the two input levels."""
    return min(_check_ternary(a), _check_ternary(b))


def max_or(a: int, b: int) -> int:
    """Highest of the two input levels."""
    return max(_check_ternary(a), _check_ternary(b))


def new_xor(values: Iterable[int]) -> int:
    """Unanimous input level, or 1 (reduced operation) on any disagreement.

    Accepts one or more operands; a single operand passes through unchanged.
    """
    vals = [_check_ternary(v) for v in values]
    if not vals:
        raise ValueError("empty operand list")
    first = vals[0]
    if all(v == first for v in vals):
        return first
    return REDUCED


def min_and_all(values: Sequence[int]) -> int:
    """Left fold of min_and over one or more operands."""
    if not values:
        raise ValueError("empty operand list")
    result = _check_ternary(values[0])
    for v in values[1:]:
        result = min_and(result, v)
    return result


def max_or_all(values: Sequence[int]) -> int:
    """Left fold of max_or over one or more operands."""
    if not values:
        raise ValueError("empty operand list")
    result = _check_ternary(values[0])
    for v in values[1:]:
        result = max_or(result, v)
    return result


def binary_and(a: int, b: int) -> int:
    """Boolean conjunction on {0, 1}."""
    return _check_binary(a) & _check_binary(b)


def binary_or(a: int, b: int) -> int:
    """Boolean disjunction on {0, 1}."""
    return _check_binary(a) | _check_binary(b)


def to_binary(level: int) -> int:
    """Project a ternary level onto {0, 1}: reduced operation counts as operational."""
    return 0 if _check_ternary(level) == FAILED else 1
