"""Construction of networks over dictionaries.

Pairs are evaluated over the upper triangle in fixed row blocks.  Each block
draws its random numbers from its own seeded substream, so the result does
not depend on how many workers evaluate the blocks.  Edges are kept when the
pair distance lies in the half-open window ``(thdw, thup]``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dictionaries import Dictionary, DictionaryEntry
from .errors import DomainError
from .metrics import voice_leading
from .network import Edge, MusicNetwork, Node
from .operators import OperatorName
from .pcs import PitchClassSet

log = logging.getLogger(__name__)

EPS = 1e-9
_BLOCK_CELLS = 1 << 21


def nodes_from_dictionary(d: Dictionary) -> list[Node]:
    return [Node(i, e.label, tuple(e.form), tuple(e.descriptor), dict(e.extra))
            for i, e in enumerate(d.entries)]


def _window(thup: float, thdw: float) -> tuple[float, float]:
    if thdw < 0 or thup <= thdw:
        raise DomainError(f"need 0 <= thdw < thup, got thdw={thdw}, thup={thup}")
    return (thdw + EPS) ** 2, (thup + EPS) ** 2


def _check_prob(prob: float) -> None:
    if not 0 < prob <= 1:
        raise DomainError(f"prob must be in (0, 1], got {prob}")


def _block_rows(n: int, width: int) -> list[tuple[int, int]]:
    size = max(1, _BLOCK_CELLS // max(1, n * width))
    return [(i, min(n, i + size)) for i in range(0, n, size)]


def _slice(block: int, count: int, prob: float, seed: int | None) -> np.ndarray:
    if prob >= 1:
        return np.ones(count, dtype=bool)
    rng = np.random.default_rng([0 if seed is None else seed, block])
    return rng.random(count) < prob


def _run_blocks(fn: Callable[[int, int, int], list], n: int, width: int, workers: int) -> list:
    blocks = _block_rows(n, width)
    jobs = [(b, lo, hi) for b, (lo, hi) in enumerate(blocks)]
    if workers <= 1:
        parts = [fn(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: fn(*j), jobs))
    return [e for part in parts for e in part]


def _vector_pairs(vectors: np.ndarray, lo2: float, hi2: float, prob: float,
                  seed: int | None, workers: int) -> list[tuple[int, int, int]]:
    """Upper-triangle pairs whose squared Euclidean distance is in (lo2, hi2]."""
    x = vectors.astype(np.int64)
    n = len(x)
    norms = (x * x).sum(axis=1)

    def block(b: int, lo: int, hi: int) -> list[tuple[int, int, int]]:
        d2 = norms[lo:hi, None] + norms[None, :] - 2 * (x[lo:hi] @ x.T)
        rows, cols = np.nonzero((d2 > lo2) & (d2 <= hi2))
        upper = cols > rows + lo
        rows, cols = rows[upper], cols[upper]
        keep = _slice(b, len(rows), prob, seed)
        return [(int(r + lo), int(c), int(d2[r, c])) for r, c in zip(rows[keep], cols[keep])]

    return _run_blocks(block, n, x.shape[1] + 1, workers)


def _descriptor_matrix(d: Dictionary, column: str | None = None) -> np.ndarray:
    if not d.entries:
        raise DomainError("dictionary is empty")
    if column is None:
        rows = [e.descriptor for e in d.entries]
    else:
        rows = [e.extra[column] for e in d.entries]
    if len({len(r) for r in rows}) != 1:
        raise DomainError("descriptors have different lengths")
    return np.array(rows, dtype=np.int64)


def _network_from_pairs(d: Dictionary, pairs: list[tuple[int, int, int]],
                        label_operator: bool = False) -> MusicNetwork:
    net = MusicNetwork(nodes_from_dictionary(d))
    for i, j, d2 in pairs:
        op = None
        if label_operator:
            op = str(_vl(d, i, j)[1])
        net.add_edge(Edge(i, j, weight=1.0 / math.sqrt(d2), distance2=d2, operator=op))
    return net


def pcs_network(d: Dictionary, thup: float = 1.5, thdw: float = 0.0, prob: float = 1.0,
                seed: int | None = None, workers: int = 1) -> MusicNetwork:
    """Network linking sets whose interval vectors lie within ``(thdw, thup]``."""
    lo2, hi2 = _window(thup, thdw)
    _check_prob(prob)
    pairs = _vector_pairs(_descriptor_matrix(d), lo2, hi2, prob, seed, workers)
    return _network_from_pairs(d, pairs)


def rhythm_network(d: Dictionary, thup: float = 1.5, thdw: float = 0.0, prob: float = 1.0,
                   seed: int | None = None, workers: int = 1) -> MusicNetwork:
    """Network of rhythmic cells by duration-vector distance."""
    lo2, hi2 = _window(thup, thdw)
    _check_prob(prob)
    pairs = _vector_pairs(_descriptor_matrix(d), lo2, hi2, prob, seed, workers)
    return _network_from_pairs(d, pairs)


def rlead_network(d: Dictionary, thup: float = 1.5, thdw: float = 0.1, prob: float = 1.0,
                  seed: int | None = None, workers: int = 1) -> MusicNetwork:
    """Network of rhythmic cells by inter-onset-interval-vector distance."""
    lo2, hi2 = _window(thup, thdw)
    _check_prob(prob)
    pairs = _vector_pairs(_descriptor_matrix(d, "interval_vector"), lo2, hi2, prob, seed, workers)
    return _network_from_pairs(d, pairs)


# -- voice leading ----------------------------------------------------------


def _pcs(d: Dictionary, i: int) -> PitchClassSet:
    return PitchClassSet._raw(tuple(sorted(d.entries[i].form)), d.tet or 12)


def _vl(d: Dictionary, i: int, j: int):
    return voice_leading(_pcs(d, i), _pcs(d, j))


def _vl_squares(d: Dictionary, workers: int, select: Callable[[np.ndarray], np.ndarray],
                prob: float, seed: int | None) -> list[tuple[int, int, int]]:
    """Upper-triangle pairs (i, j, d2) of minimal voice-leading distances
    for which ``select(d2)`` holds."""
    tet = d.tet or 12
    sizes = {len(e.form) for e in d.entries}
    n = len(d.entries)
    if len(sizes) == 1:
        width = sizes.pop()
        forms = np.array([sorted(e.form) for e in d.entries], dtype=np.int64)
        rolled = [np.roll(forms, -r, axis=1) for r in range(width)]

        def block(b: int, lo: int, hi: int) -> list[tuple[int, int, int]]:
            a = forms[lo:hi, None, :]
            best = None
            for rb in rolled:
                diff = (a - rb[None, :, :]) % tet
                diff = np.minimum(diff, tet - diff)
                sq = (diff * diff).sum(axis=2)
                best = sq if best is None else np.minimum(best, sq)
            rows, cols = np.nonzero(select(best))
            upper = cols > rows + lo
            rows, cols = rows[upper], cols[upper]
            keep = _slice(b, len(rows), prob, seed)
            return [(int(r + lo), int(c), int(best[r, c])) for r, c in zip(rows[keep], cols[keep])]

        return _run_blocks(block, n, width, workers)

    def block_mixed(b: int, lo: int, hi: int) -> list[tuple[int, int, int]]:
        found = []
        for i in range(lo, hi):
            for j in range(i + 1, n):
                sq = _vl(d, i, j)[0].square
                if select(np.array(sq)):
                    found.append((i, j, sq))
        keep = _slice(b, len(found), prob, seed)
        return [p for p, k in zip(found, keep) if k]

    return _run_blocks(block_mixed, n, 1, workers)


def _require_pcs(d: Dictionary) -> None:
    if d.kind != "pcs":
        raise DomainError("voice-leading networks need a pitch-class-set dictionary")
    if not d.entries:
        raise DomainError("dictionary is empty")


def vlead_network(d: Dictionary, thup: float = 1.5, thdw: float = 0.1, prob: float = 1.0,
                  seed: int | None = None, workers: int = 1) -> MusicNetwork:
    """Network of minimal voice leadings with distance in ``(thdw, thup]``."""
    _require_pcs(d)
    lo2, hi2 = _window(thup, thdw)
    _check_prob(prob)
    pairs = _vl_squares(d, workers, lambda sq: (sq > lo2) & (sq <= hi2), prob, seed)
    return _network_from_pairs(d, pairs, label_operator=True)


def vlead_network_by_name(d: Dictionary, name: "str | OperatorName", prob: float = 1.0,
                          seed: int | None = None, workers: int = 1) -> MusicNetwork:
    """Network of the pairs whose minimal voice leading is the operator ``name``."""
    _require_pcs(d)
    _check_prob(prob)
    op = OperatorName.parse(name)
    target = op.distance.square
    if target == 0:
        raise DomainError("the identity operator O() never links two distinct sets")
    candidates = _vl_squares(d, workers, lambda sq: sq == target, 1.0, None)
    pairs = [(i, j, sq) for i, j, sq in candidates if _vl(d, i, j)[1] == op]
    if prob < 1:
        keep = _slice(0, len(pairs), prob, seed)
        pairs = [p for p, k in zip(pairs, keep) if k]
    return _network_from_pairs(d, pairs, label_operator=True)


# -- ego networks -----------------------------------------------------------


def _entry_distance2(metric: str, d: Dictionary) -> Callable[[int, int], int]:
    if metric == "iv":
        return lambda i, j: sum((a - b) ** 2 for a, b in zip(d[i].descriptor, d[j].descriptor))
    if metric == "ioi":
        return lambda i, j: sum((a - b) ** 2 for a, b in
                                zip(d[i].extra["interval_vector"], d[j].extra["interval_vector"]))
    if metric == "vl":
        _require_pcs(d)
        return lambda i, j: _vl(d, i, j)[0].square
    raise DomainError(f"unknown metric {metric!r}; expected iv, ioi or vl")


def pcs_ego_network(key: "str | PitchClassSet", d: Dictionary, thup_e: float = 5.0,
                    thdw_e: float = 0.1, thup: float = 1.5, thdw: float = 0.1,
                    metric: str = "iv") -> MusicNetwork:
    """Ego network: alters within ``(thdw_e, thup_e]`` of the ego, then alter
    pairs linked within ``(thdw, thup]``.  ``thup=0`` gives a star."""
    ego = d.find(key)
    lo_e, hi_e = _window(thup_e, thdw_e)
    dist2 = _entry_distance2(metric, d)
    alters = []
    for i in range(len(d)):
        if i != ego:
            sq = dist2(ego, i)
            if lo_e < sq <= hi_e:
                alters.append((i, sq))
    members = [ego] + [i for i, _ in alters]
    nodes = []
    for new_id, i in enumerate(members):
        e = d[i]
        attrs = dict(e.extra)
        attrs["ego"] = i == ego
        nodes.append(Node(new_id, e.label, tuple(e.form), tuple(e.descriptor), attrs))
    net = MusicNetwork(nodes)
    vl = metric == "vl"
    for new_id, (i, sq) in enumerate(alters, start=1):
        op = str(_vl(d, ego, i)[1]) if vl else None
        net.add_edge(Edge(0, new_id, 1.0 / math.sqrt(sq), sq, op))
    if thup > 0:
        lo, hi = _window(thup, thdw)
        for a in range(len(alters)):
            for b in range(a + 1, len(alters)):
                sq = dist2(alters[a][0], alters[b][0])
                if lo < sq <= hi:
                    op = str(_vl(d, alters[a][0], alters[b][0])[1]) if vl else None
                    net.add_edge(Edge(a + 1, b + 1, 1.0 / math.sqrt(sq), sq, op))
    return net


# -- generative operations --------------------------------------------------


@dataclass
class Walk:
    nodes: list[int]
    labels: list[str]
    parsimony: float | None
    truncated: bool


POLICIES = ("uniform", "weight", "degree")


def _step_weight(e: Edge) -> float:
    if e.distance2:
        return 1.0 / math.sqrt(e.distance2)
    return e.weight


def generate_progression(net: MusicNetwork, start: "int | str", length: int,
                         policy: str = "uniform", seed: int | None = None) -> Walk:
    """Seeded random walk of ``length`` nodes.

    ``policy`` picks the next node uniformly, proportionally to the edge
    weight, or proportionally to the neighbour's degree.  A walk that reaches
    a node without successors stops early and is flagged ``truncated``.
    """
    if length < 1:
        raise DomainError("length must be at least 1")
    if policy not in POLICIES:
        raise DomainError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    rng = np.random.default_rng(seed)
    current = net.find(start)
    path = [current]
    weights: list[float] = []
    truncated = False
    degrees = net.degrees() if policy == "degree" else {}
    while len(path) < length:
        succ = net.successors(current)
        if not succ:
            truncated = True
            break
        if policy == "uniform":
            p = None
        else:
            if policy == "weight":
                w = np.array([e.weight for _, e in succ], dtype=float)
            else:
                w = np.array([degrees[t] for t, _ in succ], dtype=float)
            p = w / w.sum()
        k = int(rng.choice(len(succ), p=p))
        current, edge = succ[k]
        path.append(current)
        weights.append(_step_weight(edge))
    pars = sum(weights) / len(weights) if weights else None
    return Walk(path, [net.node(i).label for i in path], pars, truncated)


def grow_preferential_network(d: Dictionary, m: int = 1, seed: int | None = None,
                              smoothing: float = 1.0,
                              affinity: Callable[[DictionaryEntry, DictionaryEntry], float] | None = None
                              ) -> MusicNetwork:
    """Preferential-attachment growth over the dictionary in label order.

    Node ``k`` links to ``min(m, k)`` distinct earlier nodes drawn with
    probability proportional to ``(degree + smoothing) * affinity``.  A node
    whose scores are all zero stays isolated.
    """
    n = len(d)
    if not 1 <= m < n:
        raise DomainError(f"m must satisfy 1 <= m < {n}, got {m}")
    if smoothing <= 0 and affinity is None:
        raise DomainError("smoothing must be positive")
    rng = np.random.default_rng(seed)
    net = MusicNetwork(nodes_from_dictionary(d))
    deg = np.zeros(n, dtype=float)
    isolated = 0
    for k in range(1, n):
        score = deg[:k] + smoothing
        if affinity is not None:
            score = score * np.array([affinity(d[k], d[j]) for j in range(k)], dtype=float)
        if np.any(score < 0):
            raise DomainError("attachment scores must be non-negative")
        size = min(m, k, int(np.count_nonzero(score)))
        if size == 0:
            isolated += 1
            continue
        targets = rng.choice(k, size=size, replace=False, p=score / score.sum())
        for j in sorted(int(t) for t in targets):
            sq = sum((a - b) ** 2 for a, b in zip(d[k].descriptor, d[j].descriptor))
            w = 1.0 / math.sqrt(sq) if sq else 1.0
            net.add_edge(Edge(j, k, w, sq))
            deg[j] += 1
            deg[k] += 1
    if isolated:
        log.warning("%d node(s) had no admissible partner and stay isolated", isolated)
    return net

