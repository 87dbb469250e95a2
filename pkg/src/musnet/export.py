"""CSV and GEXF persistence for dictionaries and networks.

Every CSV file starts with a comment line naming the schema version and,
where needed, the metadata that is not carried by the rows
(``# musnet-network/1 directed=false self_loops=false``).
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Any, Mapping

from .dictionaries import Dictionary, DictionaryEntry, form_from_text, form_to_text
from .errors import DomainError, SchemaError
from .network import Edge, MusicNetwork, Node

NETWORK_TAG = "musnet-network/1"
DICTIONARY_TAG = "musnet-dictionary/1"
NODE_COLUMNS = ["id", "label", "form", "descriptor", "attributes"]
EDGE_COLUMNS = ["source", "target", "weight", "distance2", "operator", "count"]
GEXF_NS = "http://www.gexf.net/1.2draft"


def _tupled(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(_tupled(v) for v in value)
    if isinstance(value, dict):
        return {k: _tupled(v) for k, v in value.items()}
    return value


def _json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), default=str)


def _header(tag: str, meta: Mapping[str, Any]) -> str:
    parts = [tag] + [f"{k}={_meta_text(v)}" for k, v in meta.items()]
    return "# " + " ".join(parts) + "\r\n"


def _meta_text(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return "none" if v is None else str(v)


def _parse_header(line: str, tag: str, where: str) -> dict[str, str]:
    if not line.startswith("# "):
        raise SchemaError(f"{where}: missing schema header line")
    fields = line[2:].split()
    if not fields or fields[0] != tag:
        found = fields[0] if fields else ""
        raise SchemaError(f"{where}: expected schema {tag!r}, found {found!r}")
    meta = {}
    for f in fields[1:]:
        k, _, v = f.partition("=")
        meta[k] = v
    return meta


# characters XML 1.0 cannot carry; NUL also breaks the csv module
_BAD_CHARS = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ufffe\uffff]")


def _text(value: str, what: str) -> str:
    if _BAD_CHARS.search(value):
        raise DomainError(f"{what} {value!r} contains a control character that cannot be written")
    return value


def _write_rows(path: Path, header: str, columns: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def _read_rows(path: Path, tag: str, columns: list[str] | None) -> tuple[dict[str, str], list[str], list[list[str]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise SchemaError(f"{path}: file not found") from None
    first, _, rest = text.partition("\n")
    meta = _parse_header(first.rstrip("\r"), tag, str(path))
    reader = csv.reader(io.StringIO(rest, newline=""))
    try:
        head = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: missing column header") from None
    if columns is not None and head != columns:
        raise SchemaError(f"{path}: columns {head} do not match {columns}")
    return meta, head, [r for r in reader if r]


# -- networks -------------------------------------------------------------------


def _opt(value: Any) -> str:
    return "" if value is None else str(value)


def write_csv(net: MusicNetwork, directory: "str | os.PathLike") -> tuple[Path, Path]:
    """Write ``nodes.csv`` and ``edges.csv`` into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    header = _header(NETWORK_TAG, {"directed": net.directed, "self_loops": net.allow_self_loops})
    nodes = [[n.id, _text(n.label, "label"), form_to_text(n.form), form_to_text(n.descriptor), _json(n.attributes)]
             for n in sorted(net.nodes, key=lambda n: n.id)]
    edges = [[e.source, e.target, repr(float(e.weight)), _opt(e.distance2), _opt(e.operator and _text(e.operator, "operator")), _opt(e.count)]
             for e in net.edges]
    _write_rows(out / "nodes.csv", header, NODE_COLUMNS, nodes)
    _write_rows(out / "edges.csv", header, EDGE_COLUMNS, edges)
    return out / "nodes.csv", out / "edges.csv"


def _int_or_none(text: str, where: str) -> int | None:
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        raise SchemaError(f"{where}: expected an integer, got {text!r}") from None


def read_csv(directory: "str | os.PathLike") -> MusicNetwork:
    src = Path(directory)
    meta, _, node_rows = _read_rows(src / "nodes.csv", NETWORK_TAG, NODE_COLUMNS)
    emeta, _, edge_rows = _read_rows(src / "edges.csv", NETWORK_TAG, EDGE_COLUMNS)
    if meta != emeta:
        raise SchemaError(f"{src}: nodes.csv and edges.csv disagree on {meta} vs {emeta}")
    net = MusicNetwork(directed=meta.get("directed") == "true",
                       allow_self_loops=meta.get("self_loops") == "true")
    try:
        for i, r in enumerate(node_rows, 3):
            where = f"{src / 'nodes.csv'}:{i}"
            if len(r) != len(NODE_COLUMNS):
                raise SchemaError(f"{where}: expected {len(NODE_COLUMNS)} fields")
            attrs = _tupled(json.loads(r[4])) if r[4] else {}
            net.add_node(Node(int(r[0]), r[1], form_from_text(r[2]), form_from_text(r[3]), attrs))
        for i, r in enumerate(edge_rows, 3):
            where = f"{src / 'edges.csv'}:{i}"
            if len(r) != len(EDGE_COLUMNS):
                raise SchemaError(f"{where}: expected {len(EDGE_COLUMNS)} fields")
            net.add_edge(Edge(int(r[0]), int(r[1]), float(r[2]), _int_or_none(r[3], where),
                              r[4] or None, _int_or_none(r[5], where)))
    except ValueError as exc:
        raise SchemaError(f"{src}: {exc}") from None
    return net


# -- dictionaries ---------------------------------------------------------------


def write_dictionary_csv(d: Dictionary, path: "str | os.PathLike") -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    extra = sorted({k for e in d.entries for k in e.extra})
    header = _header(DICTIONARY_TAG, {"kind": d.kind, "tet": d.tet, "cardinality": d.cardinality,
                                      "reduction": d.reduction})
    rows = [[_text(e.label, "label"), form_to_text(e.form), form_to_text(e.descriptor)]
            + [_json(e.extra[k]) if k in e.extra else "" for k in extra]
            for e in d.entries]
    _write_rows(p, header, ["label", "form", "descriptor"] + extra, rows)
    return p


def read_dictionary_csv(path: "str | os.PathLike") -> Dictionary:
    p = Path(path)
    meta, head, rows = _read_rows(p, DICTIONARY_TAG, None)
    if head[:3] != ["label", "form", "descriptor"]:
        raise SchemaError(f"{p}: first columns must be label, form, descriptor")
    extra = head[3:]
    entries = []
    for i, r in enumerate(rows, 3):
        if len(r) != len(head):
            raise SchemaError(f"{p}:{i}: expected {len(head)} fields")
        try:
            ex = {k: _tupled(json.loads(v)) for k, v in zip(extra, r[3:]) if v != ""}
            entries.append(DictionaryEntry(r[0], form_from_text(r[1]), form_from_text(r[2]), ex))
        except ValueError as exc:
            raise SchemaError(f"{p}:{i}: {exc}") from None
    tet = None if meta.get("tet", "none") == "none" else int(meta["tet"])
    card: int | str = meta.get("cardinality", "all")
    if isinstance(card, str) and card.isdigit():
        card = int(card)
    return Dictionary(entries, meta.get("kind", "pcs"), tet, card, meta.get("reduction", "prime"))


# -- GEXF -----------------------------------------------------------------------

_NODE_ATTRS = [("0", "form", "string"), ("1", "descriptor", "string"), ("2", "attributes", "string")]
_COMMUNITY = ("3", "community", "integer")
_EDGE_ATTRS = [("0", "distance2", "integer"), ("1", "operator", "string"), ("2", "count", "integer")]


def _q(tag: str) -> str:
    return f"{{{GEXF_NS}}}{tag}"


def write_gexf(net: MusicNetwork, path: "str | os.PathLike",
               assignment: Mapping[int, int] | None = None) -> Path:
    """GEXF 1.2 document with node labels, edge weights and optional communities."""
    ET.register_namespace("", GEXF_NS)
    root = ET.Element(_q("gexf"), {"version": "1.2"})
    meta = ET.SubElement(root, _q("meta"))
    ET.SubElement(meta, _q("creator")).text = "musnet"
    graph = ET.SubElement(root, _q("graph"), {
        "defaultedgetype": "directed" if net.directed else "undirected", "mode": "static"})
    nattrs = ET.SubElement(graph, _q("attributes"), {"class": "node", "mode": "static"})
    decls = _NODE_ATTRS + ([_COMMUNITY] if assignment is not None else [])
    for aid, title, kind in decls:
        ET.SubElement(nattrs, _q("attribute"), {"id": aid, "title": title, "type": kind})
    eattrs = ET.SubElement(graph, _q("attributes"), {"class": "edge", "mode": "static"})
    for aid, title, kind in _EDGE_ATTRS:
        ET.SubElement(eattrs, _q("attribute"), {"id": aid, "title": title, "type": kind})

    nodes = ET.SubElement(graph, _q("nodes"))
    for n in sorted(net.nodes, key=lambda n: n.id):
        el = ET.SubElement(nodes, _q("node"), {"id": str(n.id), "label": _text(n.label, "label")})
        values = ET.SubElement(el, _q("attvalues"))
        texts = [form_to_text(n.form), form_to_text(n.descriptor), _json(n.attributes)]
        if assignment is not None:
            texts.append(str(assignment[n.id]))
        for (aid, _, _), text in zip(decls, texts):
            ET.SubElement(values, _q("attvalue"), {"for": aid, "value": text})

    edges = ET.SubElement(graph, _q("edges"))
    for k, e in enumerate(net.edges):
        el = ET.SubElement(edges, _q("edge"), {"id": str(k), "source": str(e.source),
                                               "target": str(e.target), "weight": repr(float(e.weight))})
        values = ET.SubElement(el, _q("attvalues"))
        for (aid, _, _), v in zip(_EDGE_ATTRS, (e.distance2, e.operator, e.count)):
            if v is not None:
                ET.SubElement(values, _q("attvalue"), {"for": aid, "value": _text(str(v), "operator")})

    ET.indent(root)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    data = ET.tostring(root, encoding="utf-8", xml_declaration=True)
    p.write_bytes(data + b"\n")
    return p


def read_gexf(path: "str | os.PathLike") -> tuple[MusicNetwork, dict[int, int] | None]:
    """Inverse of :func:`write_gexf`; also returns the community assignment if present."""
    p = Path(path)
    try:
        root = ET.parse(p).getroot()
    except ET.ParseError as exc:
        raise SchemaError(f"{p}:{exc.position[0]}:{exc.position[1]}: malformed GEXF") from None
    except FileNotFoundError:
        raise SchemaError(f"{p}: file not found") from None
    graph = root.find(_q("graph"))
    if root.tag != _q("gexf") or graph is None:
        raise SchemaError(f"{p}: not a GEXF 1.2 document")
    titles: dict[str, dict[str, str]] = {"node": {}, "edge": {}}
    for block in graph.findall(_q("attributes")):
        for a in block.findall(_q("attribute")):
            titles[block.get("class", "node")][a.get("id")] = a.get("title")
    net = MusicNetwork(directed=graph.get("defaultedgetype") == "directed", allow_self_loops=True)
    assignment: dict[int, int] = {}
    for el in graph.iter(_q("node")):
        vals = {titles["node"].get(v.get("for")): v.get("value") for v in el.iter(_q("attvalue"))}
        nid = int(el.get("id"))
        attrs = _tupled(json.loads(vals["attributes"])) if vals.get("attributes") else {}
        net.add_node(Node(nid, el.get("label", ""), form_from_text(vals.get("form", "")),
                          form_from_text(vals.get("descriptor", "")), attrs))
        if "community" in vals:
            assignment[nid] = int(vals["community"])
    loops = False
    for el in graph.iter(_q("edge")):
        vals = {titles["edge"].get(v.get("for")): v.get("value") for v in el.iter(_q("attvalue"))}
        s, t = int(el.get("source")), int(el.get("target"))
        loops = loops or s == t
        d2 = vals.get("distance2")
        c = vals.get("count")
        net.add_edge(Edge(s, t, float(el.get("weight", "1.0")), None if d2 is None else int(d2),
                          vals.get("operator"), None if c is None else int(c)))
    net.allow_self_loops = loops
    return net, (assignment or None)
