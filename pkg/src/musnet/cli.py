"""Command line interface.

Each subcommand runs one pipeline, prints a summary and writes its
artifacts into ``--out`` (default ``$MUSNET_OUT`` or ``./musnet-out``).
Files are first written to a staging directory and moved into place only
when the whole run succeeds.  A ``run.cfg`` with every effective parameter
is written next to the artifacts; ``musnet --config run.cfg`` repeats the
run.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .dictionaries import REDUCTIONS, Dictionary, pcs_dictionary, rhythm_dictionary, rhythm_p_dictionary
from .errors import DomainError, MusnetError, SchemaError, ScoreParseError
from .export import read_csv, read_dictionary_csv, read_gexf, write_csv, write_dictionary_csv, write_gexf
from .graphstats import format_stats, louvain, network_stats
from .netbuild import (POLICIES, generate_progression, grow_preferential_network, pcs_ego_network,
                       pcs_network, rhythm_network, rlead_network, vlead_network, vlead_network_by_name)
from .network import MusicNetwork
from .operators import OperatorName
from .pcs import PitchClassSet
from .rhythm import parse_cell_literal
from .score import (OperatorHistogram, corpus_analyze, format_chord_text, operator_distribution,
                    read_score, score_dictionary, score_network)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DOMAIN = 4

RUN_TAG = "musnet-run/1"
SECTION = "run"
_NOT_SAVED = {"out", "config", "func", "verbose", "quiet"}

log = logging.getLogger("musnet")


class Stage:
    """Directory collecting the artifacts of one run."""

    def __init__(self, path: Path):
        self.path = path
        self.files: list[str] = []

    def file(self, name: str) -> Path:
        self.files.append(name)
        return self.path / name

    def text(self, name: str, content: str) -> None:
        self.file(name).write_text(content, encoding="utf-8", newline="")

    def json(self, name: str, obj: Any) -> None:
        self.text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- shared pieces ------------------------------------------------------------------


def _summary_line(d: Dictionary) -> str:
    return f"{len(d)} entries, {len(d.z_related)} Z-related"


def _pcs_dict(args) -> Dictionary:
    if args.dict:
        d = read_dictionary_csv(args.dict)
        if d.kind != "pcs":
            raise DomainError(f"{args.dict} is not a pitch-class-set dictionary")
        return d
    return pcs_dictionary(args.nc, tet=args.tet, reduction=args.reduce)


def _rhythm_dict(args) -> Dictionary:
    if getattr(args, "dict", None):
        d = read_dictionary_csv(args.dict)
        if d.kind != "rhythm":
            raise DomainError(f"{args.dict} is not a rhythm dictionary")
        return d
    if args.nc is None:
        raise DomainError("--nc is required to build a rhythm dictionary")
    refs = parse_cell_literal(args.refs) if args.refs else None
    if args.pulses is not None:
        return rhythm_p_dictionary(args.pulses, args.nc, ref=args.ref, refs=refs)
    if not args.alphabet:
        raise DomainError("give --pulses or --alphabet")
    return rhythm_dictionary(args.nc, parse_cell_literal(args.alphabet), ref=args.ref, refs=refs)


def _emit_network(stage: Stage, net: MusicNetwork, seed: int | None, extra: dict | None = None) -> dict:
    write_csv(net, stage.path)
    stage.files += ["nodes.csv", "edges.csv"]
    part = louvain(net, seed=seed) if net.n_edges else None
    write_gexf(net, stage.file("network.gexf"), part.node_to_community if part else None)
    stats = network_stats(net, seed=seed, partition=part)
    if extra:
        stats.update(extra)
    stage.json("stats.json", stats)
    print(format_stats(stats))
    return stats


def _histogram_csv(h: OperatorHistogram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["operator", "distance", "count", "probability"])
    for name, count in h.counts.items():
        w.writerow([name, str(OperatorName.parse(name).distance), count, repr(count / h.total)])
    return buf.getvalue()


def _print_histogram(h: OperatorHistogram, k: int = 8) -> None:
    print(f"{h.total} transitions")
    for name, count in h.top(k):
        print(f"  {name:<12} {count:>7}  {count / h.total:.3f}")


# -- subcommands ------------------------------------------------------------------


def cmd_dict(args, stage: Stage) -> None:
    d = pcs_dictionary(args.nc, tet=args.tet, reduction=args.reduce,
                       row=[int(x) for x in args.row.replace(",", " ").split()] if args.row else None)
    write_dictionary_csv(d, stage.file("dictionary.csv"))
    print(_summary_line(d))


def cmd_pcsnet(args, stage: Stage) -> None:
    d = _pcs_dict(args)
    net = pcs_network(d, args.thup, args.thdw, args.prob, args.seed, args.workers)
    _emit_network(stage, net, args.seed)


def cmd_vleadnet(args, stage: Stage) -> None:
    d = _pcs_dict(args)
    if args.name:
        net = vlead_network_by_name(d, args.name, args.prob, args.seed, args.workers)
    else:
        net = vlead_network(d, args.thup, args.thdw, args.prob, args.seed, args.workers)
    _emit_network(stage, net, args.seed)


def cmd_egonet(args, stage: Stage) -> None:
    d = _pcs_dict(args)
    key: "str | PitchClassSet" = args.key
    if args.key not in d.labels:
        key = PitchClassSet.parse(args.key, tet=d.tet)
    net = pcs_ego_network(key, d, args.thup_e, args.thdw_e, args.thup, args.thdw, args.metric)
    _emit_network(stage, net, args.seed)


def cmd_rhythmdict(args, stage: Stage) -> None:
    d = _rhythm_dict(args)
    write_dictionary_csv(d, stage.file("dictionary.csv"))
    print(_summary_line(d))


def cmd_rhythmnet(args, stage: Stage) -> None:
    d = _rhythm_dict(args)
    build = rlead_network if args.descriptor == "ioi" else rhythm_network
    net = build(d, args.thup, args.thdw, args.prob, args.seed, args.workers)
    _emit_network(stage, net, args.seed)


def cmd_score(args, stage: Stage) -> None:
    seq = read_score(args.path, tet=args.tet, min_duration=args.min_duration)
    stage.text("chords.txt", format_chord_text(seq))
    d = score_dictionary(seq)
    write_dictionary_csv(d, stage.file("dictionary.csv"))
    net = score_network(seq, keep_repeats=args.keep_repeats)
    _emit_network(stage, net, args.seed, {"chords": len(seq), "source": seq.source_id})
    h = operator_distribution(seq, keep_repeats=args.keep_repeats)
    stage.text("operators.json", h.to_json() + "\n")
    stage.text("operators.csv", _histogram_csv(h))
    _print_histogram(h)


def _expand_corpus(paths: Sequence[str]) -> list[str]:
    out: list[str] = []
    for p in map(Path, paths):
        if p.is_dir():
            out += sorted(str(f) for f in p.iterdir()
                          if f.suffix.lower() in (".mxl", ".xml", ".musicxml", ".txt"))
        elif p.suffix.lower() == ".csv":
            with p.open(encoding="utf-8", newline="") as fh:
                out += [str(p.parent / row["file"]) for row in csv.DictReader(fh)]
        else:
            out.append(str(p))
    return out


def cmd_corpus(args, stage: Stage) -> None:
    report = corpus_analyze(_expand_corpus(args.paths), keep_repeats=args.keep_repeats,
                            seed=args.seed, workers=args.workers, min_duration=args.min_duration)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["source_id", "path", "chords", "nodes", "edges", "average_degree", "modularity"])
    for p in report.pieces:
        w.writerow([p.source_id, p.path, p.chords, p.nodes, p.edges, repr(p.average_degree),
                    "" if p.modularity is None else repr(p.modularity)])
    stage.text("pieces.csv", buf.getvalue())
    summary = report.summary()
    summary["failed"] = [{"path": p, "error": e} for p, e in report.failures]
    stage.json("summary.json", summary)
    write_csv(report.network, stage.path)
    stage.files += ["nodes.csv", "edges.csv"]
    write_gexf(report.network, stage.file("network.gexf"))
    stage.text("operators.json", report.histogram.to_json() + "\n")
    stage.text("operators.csv", _histogram_csv(report.histogram))
    q = report.mean_modularity
    print(f"{len(report.pieces)} pieces, {len(report.failures)} failed")
    print(f"mean degree      {report.mean_degree:.4f}")
    print(f"mean modularity  {'n/a' if q is None else f'{q:.4f}'}")
    _print_histogram(report.histogram)


def _load_network(path: str) -> MusicNetwork:
    p = Path(path)
    if p.suffix.lower() == ".gexf":
        return read_gexf(p)[0]
    return read_csv(p)


def cmd_stats(args, stage: Stage) -> None:
    net = _load_network(args.input)
    stats = network_stats(net, seed=args.seed)
    stage.json("stats.json", stats)
    print(format_stats(stats))


def cmd_walk(args, stage: Stage) -> None:
    net = _load_network(args.input)
    start: "int | str" = args.start
    if args.start.isdigit() and int(args.start) in set(net.node_ids()):
        start = int(args.start)
    walk = generate_progression(net, start, args.length, args.policy, args.seed)
    stage.json("walk.json", {"nodes": walk.nodes, "labels": walk.labels,
                             "parsimony": walk.parsimony, "truncated": walk.truncated})
    print(" -> ".join(walk.labels))
    if walk.parsimony is not None:
        print(f"parsimony {walk.parsimony:.4f}")
    if walk.truncated:
        print("walk stopped early at a node without successors")


def cmd_grow(args, stage: Stage) -> None:
    d = _pcs_dict(args)
    net = grow_preferential_network(d, m=args.m, seed=args.seed, smoothing=args.smoothing)
    _emit_network(stage, net, args.seed)


# -- parser -----------------------------------------------------------------------


def _nc(text: str) -> "int | str":
    return "all" if text == "all" else int(text)


def _add_pcs_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dict", help="dictionary CSV to use instead of generating one")
    p.add_argument("--tet", type=int, default=12)
    p.add_argument("--nc", type=_nc, default=3, help="cardinality or 'all'")
    p.add_argument("--reduce", choices=REDUCTIONS, default="prime")


def _add_window(p: argparse.ArgumentParser, thup: float, thdw: float) -> None:
    p.add_argument("--thup", type=float, default=thup, help="upper distance bound (inclusive)")
    p.add_argument("--thdw", type=float, default=thdw, help="lower distance bound (exclusive)")
    p.add_argument("--prob", type=float, default=1.0, help="probability of keeping a candidate edge")


def _add_rhythm_source(p: argparse.ArgumentParser, with_file: bool) -> None:
    if with_file:
        p.add_argument("--dict", help="rhythm dictionary CSV")
    p.add_argument("--nc", type=int, help="notes per cell")
    p.add_argument("--pulses", type=int, help="fill this many reference units")
    p.add_argument("--alphabet", help='durations to combine, e.g. "q e s"')
    p.add_argument("--ref", default="e", help="reference duration (default: eighth)")
    p.add_argument("--refs", help='descriptor reference list, e.g. "1/8 1/4 3/8"')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="musnet", description="Networks of musical objects.")
    parser.add_argument("--version", action="version", version=f"musnet {__version__}")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=os.environ.get("MUSNET_OUT", "musnet-out"),
                        help="output directory (default: $MUSNET_OUT or ./musnet-out)")
    parser.add_argument("--config", help="key = value file with parameters")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name: str, func: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=func)
        return p

    p = add("dict", cmd_dict, "enumerate a pitch-class-set dictionary")
    p.add_argument("--tet", type=int, default=12)
    p.add_argument("--nc", type=_nc, default="all", help="cardinality or 'all'")
    p.add_argument("--reduce", choices=REDUCTIONS, default="prime")
    p.add_argument("--row", help="restrict to subsets of this pitch row")

    p = add("pcsnet", cmd_pcsnet, "interval-vector distance network")
    _add_pcs_source(p)
    _add_window(p, 1.5, 0.0)

    p = add("vleadnet", cmd_vleadnet, "voice-leading network")
    _add_pcs_source(p)
    _add_window(p, 1.5, 0.1)
    p.add_argument("--name", help='link only pairs related by this operator, e.g. "O(1)"')

    p = add("egonet", cmd_egonet, "ego network around one set")
    _add_pcs_source(p)
    p.add_argument("--key", required=True, help='dictionary label or literal such as "0,4,7"')
    p.add_argument("--thup-e", type=float, default=5.0)
    p.add_argument("--thdw-e", type=float, default=0.1)
    p.add_argument("--thup", type=float, default=1.5)
    p.add_argument("--thdw", type=float, default=0.1)
    p.add_argument("--metric", choices=("iv", "vl"), default="iv")

    p = add("rhythmdict", cmd_rhythmdict, "enumerate a rhythm dictionary")
    _add_rhythm_source(p, with_file=False)

    p = add("rhythmnet", cmd_rhythmnet, "rhythm distance network")
    _add_rhythm_source(p, with_file=True)
    _add_window(p, 1.5, 0.0)
    p.add_argument("--descriptor", choices=("duration", "ioi"), default="duration")

    p = add("score", cmd_score, "chord network and operator histogram of one score")
    p.add_argument("path")
    p.add_argument("--keep-repeats", action="store_true", help="keep repeated chords as self-loops")
    p.add_argument("--min-duration", type=float, default=0.0, help="drop slices shorter than this (quarters)")
    p.add_argument("--tet", type=int, help="temperament for plain-text input")

    p = add("corpus", cmd_corpus, "statistics over many scores")
    p.add_argument("paths", nargs="+", help="score files, directories or manifest CSVs")
    p.add_argument("--keep-repeats", action="store_true")
    p.add_argument("--min-duration", type=float, default=0.0)

    p = add("stats", cmd_stats, "statistics of a saved network")
    p.add_argument("--in", dest="input", required=True, help="directory with nodes.csv/edges.csv, or a .gexf")

    p = add("walk", cmd_walk, "random walk on a saved network")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--start", required=True, help="node id or label")
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--policy", choices=POLICIES, default="uniform")

    p = add("grow", cmd_grow, "preferential-attachment network over a dictionary")
    _add_pcs_source(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--smoothing", type=float, default=1.0)
    return parser


# -- config files -------------------------------------------------------------------


def _subparsers(parser: argparse.ArgumentParser) -> argparse._SubParsersAction:
    return next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))


def _config_defaults(parser: argparse.ArgumentParser, values: dict[str, str]) -> dict[str, Any]:
    """Convert config strings with the types of the matching options."""
    out: dict[str, Any] = {}
    actions = {a.dest: a for a in parser._actions}
    for key, text in values.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            parser.error(f"config key {key!r} is not an option of {parser.prog}")
        if isinstance(action, argparse._StoreTrueAction):
            out[dest] = text.strip().lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*"):
            out[dest] = json.loads(text)
        elif text == "":
            out[dest] = None
        else:
            out[dest] = action.type(text) if action.type else text
    return out


def _read_config(path: str) -> tuple[str | None, dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    try:
        try:
            cp.read_string(text, source=path)
        except configparser.MissingSectionHeaderError:
            cp.read_string(f"[{SECTION}]\n" + text, source=path)
    except configparser.Error as exc:
        raise SchemaError(f"{path}: {exc}") from None
    values = dict(cp[SECTION]) if cp.has_section(SECTION) else {}
    return values.pop("command", None), values


def _format_config(args: argparse.Namespace) -> str:
    lines = [f"# {RUN_TAG}", f"[{SECTION}]", f"command = {args.command}"]
    for key in sorted(vars(args)):
        if key in _NOT_SAVED or key == "command":
            continue
        value = getattr(args, key)
        if isinstance(value, list):
            text = json.dumps(value)
        elif value is None:
            text = ""
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    argv = list(argv)
    if known.config:
        command, values = _read_config(known.config)
        names = set(_subparsers(parser).choices)
        given = next((a for a in argv if a in names), None)
        command = given or command
        if command is None:
            parser.error("the config file names no command and none was given")
        if command not in names:
            parser.error(f"unknown command {command!r} in config")
        sub = _subparsers(parser).choices[command]
        positional = [a.dest for a in sub._actions if not a.option_strings]
        top = {k: v for k, v in values.items() if k in ("seed", "workers")}
        rest = {k: v for k, v in values.items() if k not in top and k not in positional}
        parser.set_defaults(**_config_defaults(parser, top))
        sub.set_defaults(**_config_defaults(sub, rest))
        if given is None:
            # positional arguments are restored from the config file
            argv.append(command)
            for dest in positional:
                if dest in values:
                    value = _config_defaults(sub, {dest: values[dest]})[dest]
                    argv += value if isinstance(value, list) else [value]
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a command is required")
    return args


# -- entry point ------------------------------------------------------------------


def _commit(stage: Stage, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name in stage.files:
        os.replace(stage.path / name, out / name)


def run(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".musnet-", dir=out.parent))
    try:
        stage = Stage(tmp)
        args.func(args, stage)
        stage.text("run.cfg", _format_config(args))
        _commit(stage, out)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except SchemaError as exc:
        print(f"musnet: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    level = logging.INFO if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return run(args)
    except (ScoreParseError, SchemaError, OSError) as exc:
        print(f"musnet: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"musnet: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except MusnetError as exc:
        print(f"musnet: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
