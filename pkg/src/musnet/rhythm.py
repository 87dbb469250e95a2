"""Rhythmic cells with exact rational durations.

Durations are fractions of a whole note.  The two descriptors are the
duration vector (histogram of pairwise duration differences) and the
inter-onset interval vector (histogram of circular distances between
onsets, with the cell length as the period).
"""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import DomainError

log = logging.getLogger(__name__)

DURATIONS: dict[str, Fraction] = {
    "w": Fraction(1, 1), "h": Fraction(1, 2), "q": Fraction(1, 4),
    "e": Fraction(1, 8), "s": Fraction(1, 16), "t": Fraction(1, 32),
    "wd": Fraction(3, 2), "hd": Fraction(3, 4), "qd": Fraction(3, 8),
    "ed": Fraction(3, 16), "sd": Fraction(3, 32),
    "qt": Fraction(1, 6), "et": Fraction(1, 12), "st": Fraction(1, 24),
    "qq": Fraction(1, 5), "eq": Fraction(1, 10), "sq": Fraction(1, 20),
}

DEFAULT_REFS: tuple[Fraction, ...] = tuple(Fraction(k, 8) for k in range(1, 10))

DurationLike = Union[str, Fraction, int, float]


def to_fraction(value: DurationLike, names: Mapping[str, Fraction] | None = None) -> Fraction:
    """Convert a duration name, fraction string, or number to a Fraction."""
    table = DURATIONS if names is None else names
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a duration: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    text = str(value).strip()
    if text in table:
        return table[text]
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"unknown duration: {value!r}") from None


def parse_cell_literal(text: str, names: Mapping[str, Fraction] | None = None) -> list[Fraction]:
    """``"q e e qd s"`` or ``"1/4 1/8 1/8"`` (commas also accepted)."""
    tokens = text.replace(",", " ").split()
    return [to_fraction(tok, names) for tok in tokens]


def _gcd(values: Iterable[Fraction]) -> Fraction:
    num = 0
    den = 1
    for v in values:
        num = math.gcd(num, v.numerator)
        den = den * v.denominator // math.gcd(den, v.denominator)
    # gcd of fractions = gcd(numerators) / lcm(denominators) for reduced terms
    return Fraction(num, den)


def _check_refs(refs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    out = tuple(to_fraction(r) for r in refs)
    if any(r <= 0 for r in out) or any(b <= a for a, b in zip(out, out[1:])):
        raise DomainError("reference durations must be positive and strictly increasing")
    return out


def _tally(values: Iterable[Fraction], refs: tuple[Fraction, ...], what: str,
           warn: bool = True) -> tuple[int, ...]:
    slot = {r: i for i, r in enumerate(refs)}
    counts = [0] * len(refs)
    dropped = 0
    for v in values:
        if v == 0:
            continue
        i = slot.get(v)
        if i is None:
            dropped += 1
        else:
            counts[i] += 1
    if dropped and warn:
        log.warning("%s: %d value(s) outside the reference list were dropped", what, dropped)
    return tuple(counts)


class RhythmCell:
    """An ordered sequence of positive rational durations.

    ``ref`` names the reference duration in which the prime form is
    expressed (default ``'e'``, an eighth note).
    """

    __slots__ = ("_durations", "_ref", "_names")

    def __init__(self, durations: Iterable[DurationLike], ref: DurationLike = "e",
                 names: Mapping[str, Fraction] | None = None):
        table = DURATIONS if names is None else names
        if isinstance(durations, str):
            durs = parse_cell_literal(durations, table)
        else:
            durs = [to_fraction(d, table) for d in durations]
        if not durs:
            raise DomainError("a rhythmic cell needs at least one duration")
        if any(d <= 0 for d in durs):
            raise DomainError("durations must be positive")
        self._durations: tuple[Fraction, ...] = tuple(durs)
        self._ref = to_fraction(ref, table)
        if self._ref <= 0:
            raise DomainError("reference duration must be positive")
        self._names = table

    def _new(self, durations: Iterable[Fraction]) -> "RhythmCell":
        return RhythmCell(durations, ref=self._ref, names=self._names)

    @property
    def durations(self) -> tuple[Fraction, ...]:
        return self._durations

    @property
    def ref(self) -> Fraction:
        return self._ref

    @property
    def length(self) -> Fraction:
        return sum(self._durations, Fraction(0))

    @property
    def units(self) -> tuple[Fraction, ...]:
        """Durations as multiples of the reference duration."""
        return tuple(d / self._ref for d in self._durations)

    def onsets(self) -> tuple[Fraction, ...]:
        return tuple(itertools.accumulate(self._durations[:-1], initial=Fraction(0)))

    def __len__(self) -> int:
        return len(self._durations)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._durations)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RhythmCell):
            return self._durations == other._durations
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._durations)

    def __lt__(self, other: "RhythmCell") -> bool:
        return self._durations < other._durations

    def __repr__(self) -> str:
        return f"RhythmCell([{', '.join(str(d) for d in self._durations)}])"

    def __str__(self) -> str:
        return " ".join(str(d) for d in self._durations)

    # -- transformations ---------------------------------------------------

    def normal_order(self) -> "RhythmCell":
        """Cyclic rotation with the lexicographically smallest duration sequence."""
        d = self._durations
        return self._new(min(d[i:] + d[:i] for i in range(len(d))))

    def retrograde(self) -> "RhythmCell":
        return self._new(reversed(self._durations))

    def augment(self, t: DurationLike = "e") -> "RhythmCell":
        """Add ``t`` to every duration."""
        step = to_fraction(t, self._names)
        return self._new(d + step for d in self._durations)

    def diminish(self, t: DurationLike = "e") -> "RhythmCell":
        """Subtract ``t`` from every duration; fails if any would become non-positive."""
        step = to_fraction(t, self._names)
        out = [d - step for d in self._durations]
        if any(d <= 0 for d in out):
            raise DomainError(f"diminution by {step} leaves a non-positive duration")
        return self._new(out)

    def reduce_to_gcd(self) -> "RhythmCell":
        """Divide by the rational GCD and re-express in units of ``ref``."""
        g = _gcd(self._durations)
        return self._new(d / g * self._ref for d in self._durations)

    def prime_form(self) -> "RhythmCell":
        return self.reduce_to_gcd().normal_order()

    def is_non_retrogradable(self) -> bool:
        return self._durations == self._durations[::-1]

    # -- descriptors ---------------------------------------------------------

    def duration_vector(self, refs: Sequence[DurationLike] | None = None,
                        warn: bool = True) -> tuple[int, ...]:
        """Histogram of the non-zero pairwise duration differences."""
        rr = DEFAULT_REFS if refs is None else _check_refs(refs)
        diffs = (abs(a - b) for a, b in itertools.combinations(self._durations, 2))
        return _tally(diffs, rr, "duration_vector", warn)

    def interval_vector(self, refs: Sequence[DurationLike] | None = None,
                        warn: bool = True) -> tuple[int, ...]:
        """Histogram of circular inter-onset intervals (period = cell length)."""
        rr = DEFAULT_REFS if refs is None else _check_refs(refs)
        total = self.length
        ioi = []
        for a, b in itertools.combinations(self.onsets(), 2):
            d = abs(a - b)
            ioi.append(min(d, total - d))
        return _tally(ioi, rr, "interval_vector", warn)


def duration_vector(cell: RhythmCell, refs: Sequence[DurationLike] | None = None) -> tuple[int, ...]:
    return cell.duration_vector(refs)


def r_interval_vector(cell: RhythmCell, refs: Sequence[DurationLike] | None = None) -> tuple[int, ...]:
    return cell.interval_vector(refs)
