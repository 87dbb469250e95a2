"""Score ingestion and chord-progression networks.

Two input formats are supported: a subset of score-partwise MusicXML
(``.xml``/``.musicxml``, or ``.mxl`` zip containers) and a plain-text chord
sequence with one chord per line or ``;``-separated chords::

    # tet: 12
    0,4,7; 7,11,2
    0 4 7
"""

from __future__ import annotations

import json
import logging
import os
import posixpath
import xml.etree.ElementTree as ET
import zipfile
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .dictionaries import Dictionary, DictionaryEntry
from .errors import DomainError, ScoreParseError
from .graphstats import average_degree, louvain
from .metrics import _alignment
from .network import Edge, MusicNetwork, Node
from .operators import OperatorName
from .pcs import PitchClassSet

log = logging.getLogger(__name__)

TEXT_SUFFIXES = (".txt", ".chords", ".seq")
XML_SUFFIXES = (".xml", ".musicxml")
FORMAT_TAG = "musnet-chords/1"

_STEPS = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}


@dataclass
class ChordSequence:
    chords: list[PitchClassSet]
    source_id: str = ""
    tet: int = 12

    def __post_init__(self) -> None:
        for c in self.chords:
            if c.tet != self.tet:
                raise DomainError(f"chord {c} is not in {self.tet}-TET")

    def __len__(self) -> int:
        return len(self.chords)

    def collapsed(self) -> list[PitchClassSet]:
        """Chords with consecutive repeats removed."""
        out: list[PitchClassSet] = []
        for c in self.chords:
            if not out or out[-1] != c:
                out.append(c)
        return out

    def transitions(self, keep_repeats: bool = False) -> list[tuple[PitchClassSet, PitchClassSet]]:
        chords = self.chords if keep_repeats else self.collapsed()
        return list(zip(chords, chords[1:]))


# -- plain text ---------------------------------------------------------------


def parse_chord_text(text: str, source_id: str = "", tet: int | None = None) -> ChordSequence:
    chords: list[PitchClassSet] = []
    found_tet = tet
    raw: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body, _, comment = line.partition("#")
        key, sep, value = comment.partition(":")
        if sep and not body.strip():
            key = key.strip().lower()
            if key == "tet" and tet is None:
                try:
                    found_tet = int(value)
                except ValueError:
                    raise ScoreParseError(f"{source_id}:{lineno}: bad tet header {value.strip()!r}") from None
            elif key == "source" and not source_id:
                source_id = value.strip()
        for chunk in body.split(";"):
            if chunk.strip():
                raw.append((lineno, chunk))
    t = 12 if found_tet is None else found_tet
    for lineno, chunk in raw:
        try:
            pitches = [int(tok) for tok in chunk.replace(",", " ").split()]
        except ValueError:
            raise ScoreParseError(f"{source_id}:{lineno}: bad chord {chunk.strip()!r}") from None
        chords.append(PitchClassSet(pitches, tet=t))
    return ChordSequence(chords, source_id, t)


def format_chord_text(seq: ChordSequence) -> str:
    lines = [f"# {FORMAT_TAG}", f"# tet: {seq.tet}"]
    if seq.source_id:
        lines.append(f"# source: {seq.source_id}")
    lines.extend(",".join(map(str, c.pitches)) for c in seq.chords)
    return "\n".join(lines) + "\n"


def write_chord_sequence(seq: ChordSequence, path: "str | os.PathLike") -> None:
    Path(path).write_text(format_chord_text(seq), encoding="utf-8")


# -- MusicXML -------------------------------------------------------------------


@dataclass
class _Event:
    start: Fraction
    end: Fraction
    pitch: float
    part: str


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child(el: ET.Element, name: str) -> ET.Element | None:
    for c in el:
        if _local(c.tag) == name:
            return c
    return None


def _text(el: ET.Element | None, name: str, default: str | None = None) -> str | None:
    if el is None:
        return default
    c = _child(el, name)
    return default if c is None or c.text is None else c.text.strip()


def _read_mxl(path: Path) -> tuple[bytes, str]:
    try:
        with zipfile.ZipFile(path) as z:
            names = z.namelist()
            root_file = None
            if "META-INF/container.xml" in names:
                container = ET.fromstring(z.read("META-INF/container.xml"))
                for el in container.iter():
                    if _local(el.tag) == "rootfile" and el.get("full-path"):
                        root_file = el.get("full-path")
                        break
            if root_file is None:
                candidates = [n for n in names if n.endswith((".xml", ".musicxml"))
                              and not n.startswith("META-INF/")]
                if not candidates:
                    raise ScoreParseError(f"{path}: no score inside the archive")
                root_file = sorted(candidates)[0]
            return z.read(posixpath.normpath(root_file)), f"{path}!{root_file}"
    except (zipfile.BadZipFile, KeyError, ET.ParseError) as exc:
        raise ScoreParseError(f"{path}: unreadable archive ({exc})") from None


def _note_events(root: ET.Element, where: str, tet: int) -> list[_Event]:
    if _local(root.tag) != "score-partwise":
        raise ScoreParseError(f"{where}: only score-partwise MusicXML is supported, got <{_local(root.tag)}>")
    events: list[_Event] = []
    skipped: Counter[str] = Counter()
    for part in root:
        if _local(part.tag) != "part":
            continue
        pid = part.get("id", "")
        divisions = Fraction(1)
        t = Fraction(0)
        # open tied events per pitch, keyed by (voice, pitch)
        open_ties: dict[tuple[str, float], _Event] = {}
        for measure in part:
            if _local(measure.tag) != "measure":
                continue
            last_start = t
            for el in measure:
                tag = _local(el.tag)
                if tag == "attributes":
                    div = _text(el, "divisions")
                    if div is not None:
                        divisions = Fraction(div)
                elif tag in ("backup", "forward"):
                    d = Fraction(_text(el, "duration", "0")) / divisions
                    t = t - d if tag == "backup" else t + d
                    if t < 0:
                        raise ScoreParseError(f"{where}: part {pid} measure {measure.get('number')}: backup before start")
                elif tag == "note":
                    if _child(el, "grace") is not None:
                        skipped["grace note"] += 1
                        continue
                    dur = Fraction(_text(el, "duration", "0")) / divisions
                    is_chord = _child(el, "chord") is not None
                    start = last_start if is_chord else t
                    if not is_chord:
                        last_start = t
                        t = t + dur
                    if _child(el, "rest") is not None:
                        continue
                    pitch_el = _child(el, "pitch")
                    if pitch_el is None:
                        skipped["unpitched note"] += 1
                        continue
                    step = _text(pitch_el, "step")
                    if step not in _STEPS:
                        raise ScoreParseError(f"{where}: part {pid} measure {measure.get('number')}: bad step {step!r}")
                    try:
                        alter = float(_text(pitch_el, "alter", "0"))
                        octave = int(_text(pitch_el, "octave", "4"))
                    except ValueError:
                        raise ScoreParseError(f"{where}: part {pid} measure {measure.get('number')}: bad pitch") from None
                    semis = _STEPS[step] + alter + 12 * octave
                    voice = _text(el, "voice", "1")
                    ties = {c.get("type") for c in el if _local(c.tag) == "tie"}
                    key = (voice, semis)
                    prev = open_ties.pop(key, None)
                    if "stop" in ties and prev is not None and prev.end == start:
                        prev.end = start + dur
                        ev = prev
                    else:
                        ev = _Event(start, start + dur, semis, pid)
                        events.append(ev)
                    if "start" in ties:
                        open_ties[key] = ev
                elif tag not in ("print", "sound", "barline", "direction", "harmony",
                                 "figured-bass", "bookmark", "link", "grouping"):
                    skipped[f"<{tag}>"] += 1
    for what, n in sorted(skipped.items()):
        log.warning("%s: skipped %d %s element(s)", where, n, what)
    return events


def chordify(events: Sequence[_Event], tet: int = 12,
             min_duration: Fraction | float = 0) -> list[PitchClassSet]:
    """Sounding pitch classes between consecutive change points.

    A new chord starts wherever any note starts or stops.  Segments in which
    nothing sounds are dropped, as are segments shorter than
    ``min_duration`` (in quarter notes).
    """
    cuts = sorted({e.start for e in events} | {e.end for e in events})
    limit = Fraction(min_duration) if not isinstance(min_duration, float) else Fraction(str(min_duration))
    by_start = sorted(events, key=lambda e: e.start)
    chords: list[PitchClassSet] = []
    active: list[_Event] = []
    k = 0
    for a, b in zip(cuts, cuts[1:]):
        while k < len(by_start) and by_start[k].start <= a:
            active.append(by_start[k])
            k += 1
        active = [e for e in active if e.end > a]
        if not active or b - a < limit:
            continue
        pcs = [round(e.pitch * tet / 12) for e in active]
        chords.append(PitchClassSet(pcs, tet=tet))
    return chords


def parse_musicxml(data: bytes | str, where: str = "<string>", tet: int = 12,
                   min_duration: Fraction | float = 0) -> ChordSequence:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ScoreParseError(f"{where}:{line}:{col}: malformed XML ({exc.msg if hasattr(exc, 'msg') else exc})") from None
    events = _note_events(root, where, tet)
    return ChordSequence(chordify(events, tet, min_duration), where, tet)


def read_score(path: "str | os.PathLike", tet: int | None = None,
               min_duration: Fraction | float = 0) -> ChordSequence:
    """Read a MusicXML file, an ``.mxl`` archive or a plain-text chord sequence."""
    p = Path(path)
    try:
        suffix = p.suffix.lower()
        if suffix == ".mxl":
            data, where = _read_mxl(p)
            seq = parse_musicxml(data, where, 12 if tet is None else tet, min_duration)
        elif suffix in XML_SUFFIXES:
            seq = parse_musicxml(p.read_bytes(), str(p), 12 if tet is None else tet, min_duration)
        else:
            seq = parse_chord_text(p.read_text(encoding="utf-8"), str(p), tet)
    except OSError as exc:
        raise ScoreParseError(f"{p}: {exc.strerror or exc}") from None
    seq.source_id = p.stem
    return seq


# -- dictionaries and networks ------------------------------------------------


def _chord_label(c: PitchClassSet) -> str:
    return " ".join(map(str, c.pitches))


def score_dictionary(seq: ChordSequence) -> Dictionary:
    """Distinct chords with interval vectors and occurrence counts."""
    if not seq.chords:
        raise DomainError("empty chord sequence")
    counts = Counter(seq.chords)
    entries = [DictionaryEntry(_chord_label(c), c.pitches, c.interval_vector(), {"count": counts[c]})
               for c in sorted(counts, key=lambda c: (c.cardinality, c.pitches))]
    return Dictionary(entries, "pcs", seq.tet, "all", "raw")


def _network_from_counts(chords: Iterable[PitchClassSet], counts: Counter, tet: int,
                         keep_repeats: bool) -> MusicNetwork:
    ordered = sorted(set(chords), key=lambda c: (c.cardinality, c.pitches))
    index = {c: i for i, c in enumerate(ordered)}
    net = MusicNetwork(directed=True, allow_self_loops=keep_repeats)
    for c, i in index.items():
        net.add_node(Node(i, _chord_label(c), c.pitches, c.interval_vector()))
    for (a, b), n in sorted(counts.items(), key=lambda kv: (index[kv[0][0]], index[kv[0][1]])):
        sq, moves = _alignment(a, b)
        net.add_edge(Edge(index[a], index[b], float(n), sq, str(OperatorName.from_moves(moves)), n))
    return net


def score_network(seq: ChordSequence, keep_repeats: bool = False) -> MusicNetwork:
    """Directed network of chord transitions weighted by their counts."""
    steps = seq.transitions(keep_repeats)
    if len(seq.chords) < 2:
        raise DomainError("a chord network needs at least two chords")
    return _network_from_counts(seq.chords, Counter(steps), seq.tet, keep_repeats)


@dataclass
class OperatorHistogram:
    counts: dict[str, int] = field(default_factory=dict)
    total: int = 0

    @classmethod
    def from_names(cls, names: Iterable["str | OperatorName"]) -> "OperatorHistogram":
        c = Counter(str(OperatorName.parse(n)) for n in names)
        return cls(_ordered(c), sum(c.values()))

    def probabilities(self) -> dict[str, float]:
        if self.total == 0:
            return {}
        return {k: v / self.total for k, v in self.counts.items()}

    def top(self, k: int) -> list[tuple[str, int]]:
        return list(self.counts.items())[:k]

    def coverage(self, names: Iterable["str | OperatorName"]) -> float:
        """Fraction of transitions realized by any of ``names``."""
        if self.total == 0:
            return 0.0
        wanted = {str(OperatorName.parse(n)) for n in names}
        return sum(v for k, v in self.counts.items() if k in wanted) / self.total

    def merge(self, other: "OperatorHistogram") -> "OperatorHistogram":
        c = Counter(self.counts)
        c.update(other.counts)
        return OperatorHistogram(_ordered(c), self.total + other.total)

    def to_json(self) -> str:
        return json.dumps({"total": self.total, "counts": self.counts,
                           "probabilities": self.probabilities()}, indent=2)


def _ordered(c: Counter) -> dict[str, int]:
    return dict(sorted(c.items(), key=lambda kv: (-kv[1], OperatorName.parse(kv[0]).distance.square, kv[0])))


def operator_distribution(seq: ChordSequence, keep_repeats: bool = False) -> OperatorHistogram:
    if len(seq.chords) < 2:
        raise DomainError("an operator distribution needs at least two chords")
    names = []
    for a, b in seq.transitions(keep_repeats):
        names.append(OperatorName.from_moves(_alignment(a, b)[1]))
    return OperatorHistogram.from_names(names)


# -- corpora ------------------------------------------------------------------


@dataclass
class PieceStats:
    source_id: str
    path: str
    chords: int
    nodes: int
    edges: int
    average_degree: float
    modularity: float | None


@dataclass
class CorpusReport:
    pieces: list[PieceStats]
    failures: list[tuple[str, str]]
    network: MusicNetwork
    histogram: OperatorHistogram

    @property
    def mean_degree(self) -> float:
        return sum(p.average_degree for p in self.pieces) / len(self.pieces)

    @property
    def mean_modularity(self) -> float | None:
        qs = [p.modularity for p in self.pieces if p.modularity is not None]
        return sum(qs) / len(qs) if qs else None

    def summary(self) -> dict:
        return {
            "pieces": len(self.pieces),
            "failures": len(self.failures),
            "mean_degree": self.mean_degree,
            "mean_modularity": self.mean_modularity,
            "merged_nodes": self.network.n_nodes,
            "merged_edges": self.network.n_edges,
            "transitions": self.histogram.total,
        }


def _analyze_one(path: str, keep_repeats: bool, seed: int | None, min_duration):
    seq = read_score(path, min_duration=min_duration)
    net = score_network(seq, keep_repeats)
    q = louvain(net, seed=seed).modularity if net.n_edges else None
    stats = PieceStats(seq.source_id, str(path), len(seq), net.n_nodes, net.n_edges,
                       average_degree(net), q)
    steps = Counter(seq.transitions(keep_repeats))
    return stats, seq, steps, operator_distribution(seq, keep_repeats)


def corpus_analyze(paths: Iterable["str | os.PathLike"], keep_repeats: bool = False,
                   seed: int | None = 0, workers: int = 1,
                   min_duration: Fraction | float = 0) -> CorpusReport:
    """Per-piece statistics plus the merged network and operator histogram.

    Unreadable scores are logged and listed in ``failures``.  Results are
    ordered by ``(source_id, path)`` whatever the number of workers.
    """
    files = [str(p) for p in paths]

    def run(path: str):
        try:
            return path, _analyze_one(path, keep_repeats, seed, min_duration), None
        except (ScoreParseError, DomainError, OSError) as exc:
            return path, None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, files))
    else:
        results = [run(p) for p in files]

    done = []
    failures = []
    for path, res, err in results:
        if res is None:
            log.warning("skipping %s: %s", path, err)
            failures.append((path, err))
        else:
            done.append(res)
    if not done:
        raise DomainError("no readable score in the corpus")
    done.sort(key=lambda r: (r[0].source_id, r[0].path))

    merged: Counter = Counter()
    chords: set[PitchClassSet] = set()
    hist = OperatorHistogram()
    tet = done[0][1].tet
    for stats, seq, steps, h in done:
        if seq.tet != tet:
            raise DomainError("corpus mixes temperaments")
        merged.update(steps)
        chords.update(seq.chords)
        hist = hist.merge(h)
    net = _network_from_counts(chords, merged, tet, keep_repeats)
    return CorpusReport([r[0] for r in done], failures, net, hist)
