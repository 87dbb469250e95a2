"""Enumeration of set classes and rhythmic cells, with Forte-like labels.

A dictionary is an ordered table of ``(label, form, descriptor, extra)``
rows.  Labels are ``"{cardinality}-{ordinal}"`` where the ordinal follows
the ascending order of the canonical forms, suffixed with ``Z`` when the
descriptor is shared with a different class and, for rhythms, ``N`` when
the cell is non-retrogradable.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError
from .pcs import PitchClassSet, _interval_vector, _normal_order, _normal_zero_order, _prime_form
from .rhythm import DurationLike, RhythmCell, to_fraction

REDUCTIONS = ("prime", "normal", "normal0", "raw")

# above this many subsets per cardinality the bitmask engine is used
_FAST_PATH_MIN = 50_000
_FAST_PATH_MAX_TET = 26


@dataclass(frozen=True)
class DictionaryEntry:
    label: str
    form: tuple
    descriptor: tuple[int, ...]
    extra: dict[str, Any] = field(default_factory=dict, compare=True, hash=False)

    @property
    def cardinality(self) -> int:
        return len(self.form)


@dataclass
class Dictionary:
    entries: list[DictionaryEntry]
    kind: str = "pcs"
    tet: int | None = 12
    cardinality: int | str = "all"
    reduction: str = "prime"

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[DictionaryEntry]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> DictionaryEntry:
        return self.entries[i]

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    @property
    def z_related(self) -> list[DictionaryEntry]:
        return [e for e in self.entries if "Z" in e.label.split("-", 1)[-1]]

    def counts_by_cardinality(self) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for e in self.entries:
            out[e.cardinality] += 1
        return dict(sorted(out.items()))

    def index_of(self, label: str) -> int:
        for i, e in enumerate(self.entries):
            if e.label == label:
                return i
        raise DomainError(f"label {label!r} not in dictionary")

    def find(self, key: "str | PitchClassSet | RhythmCell") -> int:
        """Index of an entry given its label or its form.

        A pitch-class set that is not stored literally is looked up by its
        reduced form, so C major finds ``(0, 3, 7)`` in a prime-form dictionary.
        """
        if isinstance(key, PitchClassSet):
            targets: list[Any] = [frozenset(key.pitches)]
            if self.reduction in REDUCTIONS:
                targets.append(frozenset(_reducer(self.reduction)(key.pitches, key.tet)))
            for target in targets:
                for i, e in enumerate(self.entries):
                    if frozenset(e.form) == target:
                        return i
            raise DomainError(f"{key} not in dictionary")
        if isinstance(key, RhythmCell):
            for i, e in enumerate(self.entries):
                if tuple(e.form) == key.durations:
                    return i
            raise DomainError(f"{key!r} not in dictionary")
        return self.index_of(key)

    def pcs(self, i: int) -> PitchClassSet:
        if self.kind != "pcs":
            raise DomainError("not a pitch-class-set dictionary")
        return PitchClassSet._raw(tuple(self.entries[i].form), self.tet or 12)

    def cell(self, i: int) -> RhythmCell:
        if self.kind != "rhythm":
            raise DomainError("not a rhythm dictionary")
        return RhythmCell(self.entries[i].form)

    def subset(self, entries: Iterable[DictionaryEntry]) -> "Dictionary":
        return Dictionary(list(entries), self.kind, self.tet, self.cardinality, self.reduction)


# -- pitch-class sets -------------------------------------------------------


def _reducer(reduction: str) -> Callable[[Sequence[int], int], tuple[int, ...]]:
    if reduction == "prime":
        return _prime_form
    if reduction == "normal":
        return _normal_order
    if reduction == "normal0":
        return _normal_zero_order
    if reduction == "raw":
        return lambda pcs, tet: tuple(sorted(pcs))
    raise DomainError(f"unknown reduction {reduction!r}; expected one of {REDUCTIONS}")


def _cardinalities(nc: "int | str | None", top: int) -> list[int]:
    if nc is None or nc == "all":
        return list(range(1, top + 1))
    nc = int(nc)
    if not 1 <= nc <= top:
        raise DomainError(f"cardinality {nc} outside 1..{top}")
    return [nc]


_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
_REV8 = np.array([int(f"{i:08b}"[::-1], 2) for i in range(256)], dtype=np.uint32)


def _popcount(m: np.ndarray) -> np.ndarray:
    m = m.astype(np.uint32, copy=False)
    return (_POP8[m & 0xFF] + _POP8[(m >> 8) & 0xFF]
            + _POP8[(m >> 16) & 0xFF] + _POP8[(m >> 24) & 0xFF])


def _reverse(m: np.ndarray, tet: int) -> np.ndarray:
    r = ((_REV8[m & 0xFF] << 24) | (_REV8[(m >> 8) & 0xFF] << 16)
         | (_REV8[(m >> 16) & 0xFF] << 8) | _REV8[(m >> 24) & 0xFF])
    return r >> np.uint32(32 - tet)


def _orbit_minima(masks: np.ndarray, tet: int, inversion: bool) -> np.ndarray:
    """Smallest bitmask in each orbit under rotation (and reflection)."""
    full = np.uint32((1 << tet) - 1)
    best = masks.copy()
    sources = [masks]
    if inversion:
        sources.append(_reverse(masks, tet))
    for src in sources:
        for k in range(tet):
            if k == 0:
                rot = src
            else:
                rot = ((src << np.uint32(k)) | (src >> np.uint32(tet - k))) & full
            np.minimum(best, rot, out=best)
    return best


def _masks_of_popcount(tet: int) -> tuple[np.ndarray, np.ndarray]:
    masks = np.arange(1 << tet, dtype=np.uint32)
    return masks, _popcount(masks)


def _class_masks_by_cardinality(tet: int, cards: Sequence[int], inversion: bool,
                                cache: dict) -> dict[int, np.ndarray]:
    if "all" not in cache:
        cache["all"] = _masks_of_popcount(tet)
    masks, pop = cache["all"]
    out = {}
    for k in cards:
        sel = masks[pop == k]
        out[k] = np.unique(_orbit_minima(sel, tet, inversion))
    return out


def _mask_to_pitches(m: int, tet: int) -> tuple[int, ...]:
    return tuple(p for p in range(tet) if (m >> p) & 1)


def count_classes(tet: int = 12, reduction: str = "prime",
                  nc: "int | str | None" = "all") -> dict[int, int]:
    """Number of dictionary entries per cardinality, without building entries."""
    _reducer(reduction)
    cards = _cardinalities(nc, tet)
    if reduction in ("raw", "normal"):
        return {k: math.comb(tet, k) for k in cards}
    if tet > _FAST_PATH_MAX_TET:
        return {k: len(pcs_dictionary(k, tet, reduction)) for k in cards}
    cache: dict = {}
    got = _class_masks_by_cardinality(tet, cards, reduction == "prime", cache)
    return {k: int(len(v)) for k, v in got.items()}


def count_subsets(tet: int = 12, include_empty: bool = True) -> int:
    """Size of the super-set of all pitch combinations in ``tet``-TET."""
    total = sum(count_classes(tet, "raw").values())
    return total + 1 if include_empty else total


def _candidate_forms(k: int, tet: int, reduction: str, row: Sequence[int] | None,
                     cache: dict) -> set[tuple[int, ...]]:
    reduce = _reducer(reduction)
    if row is not None:
        return {reduce(c, tet) for c in itertools.combinations(row, k)}
    if reduction in ("prime", "normal0"):
        n_candidates = math.comb(tet - 1, k - 1)
        if n_candidates >= _FAST_PATH_MIN and tet <= _FAST_PATH_MAX_TET:
            reps = _class_masks_by_cardinality(tet, [k], reduction == "prime", cache)[k]
            return {reduce(_mask_to_pitches(int(m), tet), tet) for m in reps}
        # every class has a member containing pitch 0
        return {reduce((0,) + c, tet) for c in itertools.combinations(range(1, tet), k - 1)}
    return {reduce(c, tet) for c in itertools.combinations(range(tet), k)}


def _label_entries(groups: dict[int, list[tuple]], descriptor: Callable[[tuple], tuple],
                   class_key: Callable[[tuple], tuple],
                   extra: Callable[[tuple], dict] | None = None,
                   z_key: Callable[[DictionaryEntry], tuple] | None = None,
                   suffix: Callable[[tuple], str] | None = None) -> list[DictionaryEntry]:
    rows = []
    for k in sorted(groups):
        for i, form in enumerate(sorted(groups[k]), start=1):
            rows.append(DictionaryEntry(f"{k}-{i}", form, descriptor(form),
                                        extra(form) if extra else {}))
    key = z_key or (lambda e: e.descriptor)
    # Z: same key (descriptor by default) but a different class
    classes: dict[tuple, set] = defaultdict(set)
    for e in rows:
        classes[key(e)].add(class_key(e.form))
    entries = []
    for e in rows:
        label = e.label
        if len(classes[key(e)]) > 1:
            label += "Z"
        if suffix is not None:
            label += suffix(e.form)
        entries.append(DictionaryEntry(label, e.form, e.descriptor, e.extra))
    return entries


def pcs_dictionary(nc: "int | str | None" = "all", tet: int = 12, reduction: str = "prime",
                   row: Sequence[int] | None = None) -> Dictionary:
    """All pitch-class sets of cardinality ``nc`` reduced by ``reduction``.

    ``reduction`` is one of ``prime`` (transposition and inversion
    classes), ``normal0`` (transposition classes), ``normal`` (every set in
    normal order) and ``raw`` (every set sorted).  With ``row`` the subsets
    are drawn from the given tone row instead of all ``tet`` pitches.
    """
    if int(tet) != tet or tet < 1:
        raise DomainError(f"tet must be a positive integer, got {tet!r}")
    _reducer(reduction)
    if row is not None:
        row = tuple(dict.fromkeys(int(p) % tet for p in row))
        if not row:
            raise DomainError("tone row is empty")
    cards = _cardinalities(nc, len(row) if row is not None else tet)
    cache: dict = {}
    groups = {k: list(_candidate_forms(k, tet, reduction, row, cache)) for k in cards}
    cache.clear()
    entries = _label_entries(
        groups,
        descriptor=lambda f: _interval_vector(f, tet),
        class_key=lambda f: _prime_form(f, tet),
    )
    card = cards[0] if len(cards) == 1 and nc not in (None, "all") else "all"
    return Dictionary(entries, "pcs", tet, card, reduction)


# -- rhythms ----------------------------------------------------------------


def _rhythm_entries(cells: Iterable[RhythmCell], refs: Sequence[DurationLike] | None) -> list[DictionaryEntry]:
    groups: dict[int, set] = defaultdict(set)
    for c in cells:
        groups[len(c)].add(c.prime_form().durations)

    def with_ioi(form: tuple) -> dict:
        return {"interval_vector": RhythmCell(form).interval_vector(refs, warn=False)}

    return _label_entries(
        {k: list(v) for k, v in groups.items()},
        descriptor=lambda f: RhythmCell(f).duration_vector(refs, warn=False),
        class_key=lambda f: f,
        extra=with_ioi,
        z_key=lambda e: e.extra["interval_vector"],
        suffix=lambda f: "N" if f == f[::-1] else "",
    )


def rhythm_dictionary(nc: int, alphabet: Sequence[DurationLike], ref: DurationLike = "e",
                      refs: Sequence[DurationLike] | None = None) -> Dictionary:
    """Prime forms of all ``nc``-note cells over a duration alphabet."""
    if nc < 1:
        raise DomainError("cell length must be at least 1")
    alpha = sorted({to_fraction(a) for a in alphabet})
    if not alpha:
        raise DomainError("duration alphabet is empty")
    cells = (RhythmCell(c, ref=ref) for c in itertools.product(alpha, repeat=nc))
    entries = _rhythm_entries(cells, refs)
    return Dictionary(entries, "rhythm", None, nc, "prime")


def compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways of writing ``n`` as a sum of ``k`` positive integers."""
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0,) + cuts + (n,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


def rhythm_p_dictionary(n: int, nc: int, ref: DurationLike = "e",
                        refs: Sequence[DurationLike] | None = None) -> Dictionary:
    """Prime forms of all ways to fill ``n`` reference units with ``nc`` notes."""
    if nc < 1 or n < 1:
        raise DomainError("n and nc must be positive")
    if nc > n:
        raise DomainError(f"cannot split {n} units into {nc} notes")
    unit = to_fraction(ref)
    cells = (RhythmCell([p * unit for p in parts], ref=unit) for parts in compositions(n, nc))
    entries = _rhythm_entries(cells, refs)
    return Dictionary(entries, "rhythm", None, nc, "prime")


# -- queries ----------------------------------------------------------------


def _column_text(entry: DictionaryEntry, column: str) -> str:
    if column == "label":
        return entry.label
    if column == "form":
        return form_to_text(entry.form)
    if column == "descriptor":
        return " ".join(map(str, entry.descriptor))
    value = entry.extra[column]
    if isinstance(value, (tuple, list)):
        return " ".join(map(str, value))
    return str(value)


def columns(d: Dictionary) -> list[str]:
    extra = sorted({k for e in d.entries for k in e.extra})
    return ["label", "form", "descriptor"] + extra


def extract_by_string(d: Dictionary, column: str, needle: str, exact: bool = False) -> Dictionary:
    """Rows of ``d`` whose ``column`` contains (or equals) ``needle``."""
    if column not in columns(d):
        raise DomainError(f"unknown column {column!r}; have {columns(d)}")
    if exact:
        keep = [e for e in d.entries if _column_text(e, column) == needle]
    else:
        keep = [e for e in d.entries if needle in _column_text(e, column)]
    return d.subset(keep)


def form_to_text(form: Sequence) -> str:
    return " ".join(str(x) for x in form)


def form_from_text(text: str) -> tuple:
    out: list = []
    for tok in text.split():
        out.append(Fraction(tok) if "/" in tok else int(tok))
    return tuple(out)
