"""Command-line driver: ``ckengine run|check-graph|hyp|outsplit``."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path as FsPath

from . import __version__
from .dsl import parse_unitary_text
from .endo import hypothesis_by_conjugation, hypothesis_check, verify_unitary
from .errors import CKError
from .graph import parse_graph_text, validate_standing_assumption
from .moves import block_structure_report, induced_images, out_split, parse_partition_text, verify_homomorphism
from .scalars import field_for
from .script import run_script_file


def _read(path: str) -> str:
    try:
        return FsPath(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CKError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise CKError(f"{path} is not valid UTF-8") from None


def _load_graph(path: str, name: str | None = None):
    return parse_graph_text(_read(path), name=name or FsPath(path).stem, source=path)


def _emit(data: dict, report: str | None) -> None:
    text = json.dumps(data, indent=2)
    if report:
        FsPath(report).write_text(text + "\n", encoding="utf-8")
    print(text)


def cmd_run(args) -> int:
    rep = run_script_file(args.script, args.mode, args.seed)
    if args.report:
        rep.write(args.report)
    for e in rep.entries:
        line = f"[{e['status']:5}] line {e['line']}: {e.get('text', e['kind'])}"
        print(line)
        if e["status"] in ("fail", "error") and "failure" in e:
            print("        " + json.dumps(e["failure"])[:2000])
    print(json.dumps(rep.summary()))
    return rep.exit_code


def cmd_check_graph(args) -> int:
    g = _load_graph(args.file)
    rep = validate_standing_assumption(g)
    data = {"graph": g.name, "vertices": list(g.vertices), "edges": len(g.edges),
            "standing_assumption": rep.as_dict(),
            "blocks": [list(b) for b in block_structure_report(g)]}
    _emit(data, args.report)
    return 0 if rep.ok else 1


def cmd_hyp(args) -> int:
    fld = field_for(args.mode)
    g = _load_graph(args.graph)
    text = _read(args.unitary)
    # the unitary file names its graph; bind that name to the graph given on the command line
    m = re.search(r"\bon\s+(\S+)", text)
    graphs = {g.name: g, **({m.group(1): g} if m else {})}
    u = parse_unitary_text(text, graphs, fld, source=args.unitary)
    res = hypothesis_check(u)
    data = {"unitary": u.name, "class": verify_unitary(u).as_dict(), "hypothesis": res.as_dict()}
    if fld.exact:
        data["oracle_agrees"] = hypothesis_by_conjugation(u) == res.holds
    _emit(data, args.report)
    return 0 if res.holds else 1


def cmd_outsplit(args) -> int:
    fld = field_for(args.mode)
    g = _load_graph(args.graph)
    part = parse_partition_text(_read(args.partition), g, source=args.partition)
    f = out_split(g, part)
    phi = induced_images(g, f, part, fld)
    hom = verify_homomorphism(phi)
    data = {"graph": f.to_text(), "homomorphism": hom.as_dict(),
            "standing_assumption": validate_standing_assumption(f).as_dict()}
    _emit(data, args.report)
    return 0 if hom.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["exact", "float"], default="exact")
    common.add_argument("--report", metavar="PATH", help="write a JSON report to PATH")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")

    p = argparse.ArgumentParser(prog="ckengine")
    p.add_argument("--version", action="version", version=f"ckengine {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("run", parents=[common], help="run a script")
    s.add_argument("script")
    s.set_defaults(func=cmd_run)
    s = sub.add_parser("check-graph", parents=[common], help="parse a graph and check the standing assumption")
    s.add_argument("file")
    s.set_defaults(func=cmd_check_graph)
    s = sub.add_parser("hyp", parents=[common], help="decide whether u D^1 u* differs from D^1")
    s.add_argument("graph")
    s.add_argument("unitary")
    s.set_defaults(func=cmd_hyp)
    s = sub.add_parser("outsplit", parents=[common], help="out-split a graph and verify the induced map")
    s.add_argument("graph")
    s.add_argument("partition")
    s.set_defaults(func=cmd_outsplit)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (CKError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
