"""Distances between musical objects.

* interval-vector distance: Euclidean norm between interval vectors
* minimal voice-leading distance: the smallest Euclidean size of a mapping
  of the voices of one chord onto another, each voice moving by its shortest
  path around the pitch-class circle
* operator names: the multiset of per-voice moves realizing that minimum
* parsimony: mean inverse step distance along a progression
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import Sequence

from .errors import DomainError
from .operators import Distance, OperatorName, neo_riemannian, neo_riemannian_table, ops_distance
from .pcs import PitchClassSet

log = logging.getLogger(__name__)

__all__ = [
    "Distance",
    "OperatorName",
    "interval_vector_distance",
    "minimal_distance",
    "minimal_nobij_distance",
    "neo_riemannian",
    "neo_riemannian_table",
    "ops_check_by_name",
    "ops_distance",
    "ops_name",
    "parsimony",
    "progression_steps",
    "rhythm_vector_distance",
    "vector_distance",
]


def vector_distance(x: Sequence[int], y: Sequence[int]) -> Distance:
    if len(x) != len(y):
        raise DomainError(f"vector lengths differ: {len(x)} != {len(y)}")
    return Distance.from_square(sum((a - b) ** 2 for a, b in zip(x, y)))


def interval_vector_distance(x: Sequence[int], y: Sequence[int]) -> Distance:
    """Euclidean distance between two interval vectors."""
    return vector_distance(x, y)


def rhythm_vector_distance(x: Sequence[int], y: Sequence[int]) -> Distance:
    """Euclidean distance between two duration (or inter-onset) vectors."""
    return vector_distance(x, y)


def _fold(d: int, tet: int) -> int:
    d %= tet
    return min(d, tet - d)


def _best_alignment(a: Sequence[int], b: Sequence[int], tet: int) -> tuple[int, tuple[int, ...]]:
    """Minimal squared voice leading between equal-size ascending sequences.

    Returns the squared distance and the sorted per-voice moves.  Among
    rotations achieving the minimum, the lexicographically smallest move
    tuple wins (fewest moving voices first).
    """
    n = len(a)
    best_sq = -1
    best_moves: tuple[int, ...] = ()
    for r in range(n):
        moves = tuple(sorted(_fold(a[i] - b[(i + r) % n], tet) for i in range(n)))
        sq = sum(m * m for m in moves)
        if best_sq < 0 or sq < best_sq or (sq == best_sq and moves < best_moves):
            best_sq, best_moves = sq, moves
    return best_sq, best_moves


def _check_tet(a: PitchClassSet, b: PitchClassSet) -> int:
    if a.tet != b.tet:
        raise DomainError(f"temperaments differ: {a.tet} != {b.tet}")
    return a.tet


def minimal_distance(a: PitchClassSet, b: PitchClassSet) -> Distance:
    """Minimal voice-leading distance between sets of equal cardinality."""
    tet = _check_tet(a, b)
    if len(a) != len(b):
        raise DomainError(
            f"cardinalities differ ({len(a)} vs {len(b)}); use minimal_nobij_distance")
    sq, _ = _best_alignment(sorted(a.pitches), sorted(b.pitches), tet)
    return Distance.from_square(sq)


def _expansions(small: Sequence[int], size: int):
    base = tuple(sorted(small))
    for extra in itertools.combinations_with_replacement(base, size - len(base)):
        yield tuple(sorted(base + extra))


def _nobij(a: PitchClassSet, b: PitchClassSet) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    tet = _check_tet(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    target = tuple(sorted(large.pitches))
    best: tuple[int, tuple[int, ...], tuple[int, ...]] | None = None
    for exp in _expansions(small.pitches, len(large)):
        sq, moves = _best_alignment(exp, target, tet)
        if best is None or (sq, moves) < (best[0], best[1]):
            best = (sq, moves, exp)
    assert best is not None
    return best


def minimal_nobij_distance(a: PitchClassSet, b: PitchClassSet) -> tuple[Distance, tuple[int, ...]]:
    """Minimal voice leading between sets of any cardinalities.

    The smaller set is expanded by doubling some of its pitches up to the
    larger cardinality; the best expansion (lexicographically smallest among
    ties) is returned together with the distance.
    """
    sq, _, exp = _nobij(a, b)
    return Distance.from_square(sq), exp


def _alignment(a: PitchClassSet, b: PitchClassSet) -> tuple[int, tuple[int, ...]]:
    if len(a) == len(b):
        return _best_alignment(sorted(a.pitches), sorted(b.pitches), _check_tet(a, b))
    sq, moves, _ = _nobij(a, b)
    return sq, moves


def voice_leading(a: PitchClassSet, b: PitchClassSet) -> tuple[Distance, OperatorName]:
    """Minimal distance and its operator name, for any cardinalities."""
    sq, moves = _alignment(a, b)
    return Distance.from_square(sq), OperatorName.from_moves(moves)


def ops_name(a: PitchClassSet, b: PitchClassSet) -> OperatorName:
    """Name of the operator realizing the minimal voice leading from ``a`` to ``b``."""
    return OperatorName.from_moves(_alignment(a, b)[1])


def ops_check_by_name(a: PitchClassSet, b: PitchClassSet, name: "str | OperatorName") -> bool:
    return ops_name(a, b) == OperatorName.parse(name)


def progression_steps(progression: Sequence[PitchClassSet]) -> list[tuple[Distance, OperatorName]]:
    return [voice_leading(x, y) for x, y in zip(progression, progression[1:])]


def parsimony(progression: Sequence[PitchClassSet], repeats: str = "skip") -> float:
    """Mean of ``1/d`` over the steps of a chord progression.

    A step between identical chords has no finite weight: ``repeats="skip"``
    leaves it out (with a warning), ``repeats="inf"`` makes the result infinite.
    """
    if len(progression) < 2:
        raise DomainError("parsimony needs at least two chords")
    if repeats not in ("skip", "inf"):
        raise DomainError(f"repeats must be 'skip' or 'inf', got {repeats!r}")
    weights = []
    skipped = 0
    for dist, _ in progression_steps(progression):
        if dist.value == 0:
            if repeats == "inf":
                return math.inf
            skipped += 1
            continue
        weights.append(1.0 / dist.value)
    if skipped:
        log.warning("parsimony: skipped %d zero-distance step(s)", skipped)
    if not weights:
        raise DomainError("progression has no non-zero step")
    return sum(weights) / len(weights)
