"""Distance operators ``O(n1, n2, ...)`` and quantized distances.

An operator names a move that raises or lowers some components of a vector
by the integers ``n_i``.  Its length is ``sqrt(sum(n_i ** 2))``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import OperatorParseError

_NAME_RE = re.compile(r"^\s*O\s*\(\s*(\d+(?:\s*,\s*\d+)*)?\s*\)\s*$")


@dataclass(frozen=True, order=True)
class Distance:
    """A non-negative distance, keeping the exact square when it is integral."""

    value: float
    square: Optional[int] = None

    @classmethod
    def from_square(cls, square: int) -> "Distance":
        return cls(math.sqrt(square), int(square))

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        if self.square is None:
            return f"{self.value:g}"
        root = math.isqrt(self.square)
        if root * root == self.square:
            return str(root)
        return f"sqrt({self.square})"


@dataclass(frozen=True)
class OperatorName:
    """Canonical operator name: positive moves sorted ascending, zeros dropped."""

    moves: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        moves = tuple(sorted(int(abs(n)) for n in self.moves if n != 0))
        object.__setattr__(self, "moves", moves)

    @classmethod
    def parse(cls, name: "str | OperatorName") -> "OperatorName":
        if isinstance(name, OperatorName):
            return name
        match = _NAME_RE.match(name)
        if match is None:
            raise OperatorParseError(f"malformed operator name: {name!r}")
        body = match.group(1)
        if body is None:
            return cls(())
        return cls(tuple(int(tok) for tok in body.split(",")))

    @classmethod
    def from_moves(cls, moves: Iterable[int]) -> "OperatorName":
        return cls(tuple(moves))

    @property
    def arity(self) -> int:
        return len(self.moves)

    @property
    def distance(self) -> Distance:
        return Distance.from_square(sum(n * n for n in self.moves))

    def __str__(self) -> str:
        return "O(" + ",".join(str(n) for n in self.moves) + ")"


def ops_distance(name: "str | OperatorName") -> Distance:
    """Length of an operator, ``sqrt(sum n_i^2)``."""
    return OperatorName.parse(name).distance


# Neo-Riemannian transformations expressed as distance operators.
NEO_RIEMANNIAN = {
    "P": "O(1)",
    "L": "O(1)",
    "R": "O(2)",
    "N": "O(1,1)",
    "S": "O(1,1)",
    "H": "O(1,1,1)",
}


def neo_riemannian_table() -> dict[str, OperatorName]:
    return {k: OperatorName.parse(v) for k, v in NEO_RIEMANNIAN.items()}


def neo_riemannian(transformation: str) -> OperatorName:
    """Operator equivalent to a neo-Riemannian transformation letter."""
    try:
        return OperatorName.parse(NEO_RIEMANNIAN[transformation.upper()])
    except KeyError:
        raise KeyError(f"unknown neo-Riemannian transformation: {transformation!r}") from None
