"""Pitch-class-set algebra in arbitrary N-tone equal temperaments.

Pitch classes are integers modulo ``tet``.  A :class:`PitchClassSet` is an
immutable value; every transformation returns a new set.  The module-level
helpers prefixed with an underscore work on plain tuples and are what the
enumeration and network code call in hot loops.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

from .errors import DomainError
from .operators import OperatorName

Pitches = tuple[int, ...]


def _rotations(pcs: Sequence[int]) -> Iterator[Pitches]:
    n = len(pcs)
    for i in range(n):
        yield tuple(pcs[i:]) + tuple(pcs[:i])


def _rahn_key(rot: Pitches, tet: int) -> tuple[int, ...]:
    # spans first->last, first->second-to-last, ..., then the first pitch
    first = rot[0]
    spans = tuple((rot[k] - first) % tet for k in range(len(rot) - 1, 0, -1))
    return spans + (first,)


def _normal_order(pcs: Sequence[int], tet: int) -> Pitches:
    ordered = sorted(pcs)
    if len(ordered) <= 1:
        return tuple(ordered)
    return min(_rotations(ordered), key=lambda r: _rahn_key(r, tet))


def _zero(pcs: Sequence[int], tet: int) -> Pitches:
    first = pcs[0]
    return tuple((p - first) % tet for p in pcs)


def _normal_zero_order(pcs: Sequence[int], tet: int) -> Pitches:
    return _zero(_normal_order(pcs, tet), tet)


def _prime_form(pcs: Sequence[int], tet: int) -> Pitches:
    up = _normal_zero_order(pcs, tet)
    down = _normal_zero_order([(-p) % tet for p in pcs], tet)
    return min(up, down)


def _interval_vector(pcs: Sequence[int], tet: int) -> tuple[int, ...]:
    counts = [0] * (tet // 2)
    for a, b in itertools.combinations(pcs, 2):
        d = abs(a - b) % tet
        ic = min(d, tet - d)
        if ic:
            counts[ic - 1] += 1
    return tuple(counts)


class PitchClassSet:
    """An ordered collection of pitch classes in ``tet``-tone equal temperament.

    Pitches are reduced modulo ``tet`` on construction.  With ``unify`` the
    duplicates are removed (first occurrence kept) and with ``ordered`` the
    result is sorted ascending.
    """

    __slots__ = ("_pitches", "_tet")

    def __init__(self, pitches: Iterable[int], tet: int = 12, unify: bool = True,
                 ordered: bool = True):
        if int(tet) != tet or tet < 1:
            raise DomainError(f"tet must be a positive integer, got {tet!r}")
        tet = int(tet)
        reduced = [int(p) % tet for p in pitches]
        if unify:
            reduced = list(dict.fromkeys(reduced))
        if ordered:
            reduced.sort()
        if not reduced:
            raise DomainError("a pitch-class set needs at least one pitch")
        if len(reduced) > tet:
            raise DomainError(f"cardinality {len(reduced)} exceeds tet={tet}")
        self._pitches: Pitches = tuple(reduced)
        self._tet = tet

    @classmethod
    def _raw(cls, pitches: Pitches, tet: int) -> "PitchClassSet":
        obj = cls.__new__(cls)
        obj._pitches = pitches
        obj._tet = tet
        return obj

    @classmethod
    def parse(cls, literal: str, tet: int | None = None) -> "PitchClassSet":
        """Parse a literal such as ``"0,4,7@12"`` or ``"0 4 7"``."""
        text = literal.strip().strip("[]")
        if "@" in text:
            text, tet_text = text.rsplit("@", 1)
            tet = int(tet_text)
        tokens = [t for t in text.replace(",", " ").split() if t]
        if not tokens:
            raise DomainError(f"empty pitch-class set literal: {literal!r}")
        try:
            pitches = [int(t) for t in tokens]
        except ValueError:
            raise DomainError(f"bad pitch-class set literal: {literal!r}") from None
        return cls(pitches, tet=12 if tet is None else tet)

    @property
    def pitches(self) -> Pitches:
        return self._pitches

    @property
    def tet(self) -> int:
        return self._tet

    @property
    def cardinality(self) -> int:
        return len(self._pitches)

    def __len__(self) -> int:
        return len(self._pitches)

    def __iter__(self) -> Iterator[int]:
        return iter(self._pitches)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PitchClassSet):
            return self._tet == other._tet and self._pitches == other._pitches
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._pitches, self._tet))

    def __lt__(self, other: "PitchClassSet") -> bool:
        return (self._tet, self._pitches) < (other._tet, other._pitches)

    def __repr__(self) -> str:
        return f"PitchClassSet({list(self._pitches)}, tet={self._tet})"

    def __str__(self) -> str:
        return ",".join(map(str, self._pitches)) + f"@{self._tet}"

    def as_set(self) -> frozenset[int]:
        return frozenset(self._pitches)

    def sorted(self) -> "PitchClassSet":
        return PitchClassSet._raw(tuple(sorted(self._pitches)), self._tet)

    # -- orderings and canonical forms -------------------------------------

    def normal_order(self) -> "PitchClassSet":
        """Most compact cyclic rotation, ties broken by Rahn's rule."""
        return PitchClassSet._raw(_normal_order(self._pitches, self._tet), self._tet)

    def normal_zero_order(self) -> "PitchClassSet":
        return PitchClassSet._raw(_normal_zero_order(self._pitches, self._tet), self._tet)

    def zero_order(self) -> "PitchClassSet":
        """Transpose so that the first pitch (in current order) is 0."""
        return PitchClassSet._raw(_zero(self._pitches, self._tet), self._tet)

    def transpose(self, t: int = 0) -> "PitchClassSet":
        return PitchClassSet._raw(tuple((p + t) % self._tet for p in self._pitches), self._tet)

    def inverse(self) -> "PitchClassSet":
        """Inversion ``p -> -p mod tet``, re-sorted ascending."""
        return PitchClassSet._raw(tuple(sorted((-p) % self._tet for p in self._pitches)),
                                  self._tet)

    def prime_form(self) -> "PitchClassSet":
        """Lexicographically smaller of the normal-0 orders of the set and its inverse."""
        return PitchClassSet._raw(_prime_form(self._pitches, self._tet), self._tet)

    # -- descriptors --------------------------------------------------------

    def interval_vector(self) -> tuple[int, ...]:
        """Interval-class counts, slot ``k-1`` holding interval class ``k``."""
        return _interval_vector(self._pitches, self._tet)

    def lis_vector(self) -> tuple[int, ...]:
        """Successive intervals of the normal order."""
        no = _normal_order(self._pitches, self._tet)
        return tuple((b - a) % self._tet for a, b in zip(no, no[1:]))

    # -- distance operators -------------------------------------------------

    def operator(self, name: "str | OperatorName", positional: bool = False) -> list["PitchClassSet"]:
        return apply_operator(self, name, positional=positional)


def apply_operator(s: PitchClassSet, name: "str | OperatorName",
                   positional: bool = False) -> list[PitchClassSet]:
    """All sets reachable from ``s`` by the distance operator ``name``.

    By default the moves are assigned to any choice of distinct pitches.  With
    ``positional=True`` move ``i`` applies to the ``i``-th pitch of ``s`` as
    ordered.  Each move may raise or lower its pitch.  Results in which two
    pitches coincide are discarded.  Output is deduplicated and sorted.
    """
    op = OperatorName.parse(name)
    moves = op.moves
    tet = s.tet
    pcs = s.pitches
    if len(moves) > len(pcs):
        raise DomainError(f"{op} moves {len(moves)} pitches but the set has {len(pcs)}")
    if not moves:
        return [s.sorted()]
    if positional:
        assignments: Iterable[tuple[int, ...]] = [tuple(range(len(moves)))]
    else:
        assignments = itertools.permutations(range(len(pcs)), len(moves))
    found: set[Pitches] = set()
    for idx in assignments:
        for signs in itertools.product((1, -1), repeat=len(moves)):
            out = list(pcs)
            for i, n, sg in zip(idx, moves, signs):
                out[i] = (out[i] + sg * n) % tet
            if len(set(out)) == len(out):
                found.add(tuple(sorted(out)))
    return [PitchClassSet._raw(p, tet) for p in sorted(found)]
