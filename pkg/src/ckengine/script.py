"""Script model and runner.

A script is a sequence of statements, one per line (``#`` starts a comment,
a trailing ``\\`` continues a line)::

    load graph <name> <path>
    load unitary <path>
    load map <path>
    load partition <name> <path> on <graph>
    use graph <name>
    define <name> = <expr>
    eval <expr>
    assert <expr>
    assert-equal <expr>, <expr>
    assert-zero <expr>
    verify-graph <graph>
    verify-unitary <expr>
    verify-hom <map>
    verify-diag <map> <k>
    verify-laws <trials>
    outsplit <new graph> = <graph> by <partition> as <map name>
    report <path>

Paths are resolved relative to the script file.  Running a script yields a
:class:`Report` and an exit code: 0 when every assertion and verification
passes, 1 when one fails, 2 on a parse or usage error.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any

from . import __version__
from .algebra import Element
from .dsl import (RESERVED, Context, EvalError, Evaluator, parse_expression, parse_generator_map_text,
                  parse_unitary_text)
from .endo import BlockUnitary, hypothesis_check, verify_unitary
from .errors import CKError, ParseError, UsageError
from .graph import IDENT, Graph, parse_graph_text, validate_standing_assumption
from .matrix_rep import BlockMatrixRep
from .moves import (GeneratorMap, OutSplitPartition, diagonal_carry_failures, induced_images, out_split,
                    parse_partition_text, verify_homomorphism)
from .scalars import field_for

REPORT_SCHEMA = "ckengine-report/1"

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"


@dataclass
class Statement:
    index: int
    line: int
    kind: str
    text: str
    args: dict = field(default_factory=dict)


_PATTERNS = [
    ("load-graph", re.compile(rf"load\s+graph\s+({IDENT})\s+(\S+)\Z")),
    ("load-unitary", re.compile(r"load\s+unitary\s+(\S+)\Z")),
    ("load-map", re.compile(r"load\s+map\s+(\S+)\Z")),
    ("load-partition", re.compile(rf"load\s+partition\s+({_NAME})\s+(\S+)\s+on\s+({IDENT})\Z")),
    ("use", re.compile(rf"use\s+graph\s+({IDENT})\Z")),
    ("define", re.compile(rf"(?:define|let)\s+({_NAME})\s*=\s*(.+)\Z", re.S)),
    ("eval", re.compile(r"eval\s+(.+)\Z", re.S)),
    ("assert-equal", re.compile(r"assert-equal\s+(.+)\Z", re.S)),
    ("assert-zero", re.compile(r"assert-zero\s+(.+)\Z", re.S)),
    ("assert", re.compile(r"assert\s+(.+)\Z", re.S)),
    ("verify-graph", re.compile(rf"verify-graph\s+({IDENT})\Z")),
    ("verify-unitary", re.compile(r"verify-unitary\s+(.+)\Z", re.S)),
    ("verify-hom", re.compile(rf"verify-hom\s+({_NAME})\Z")),
    ("verify-diag", re.compile(rf"verify-diag\s+({_NAME})\s+(\d+)\Z")),
    ("verify-laws", re.compile(r"verify-laws\s+(\d+)\Z")),
    ("outsplit", re.compile(rf"outsplit\s+({IDENT})\s*=\s*({IDENT})\s+by\s+({_NAME})\s+as\s+({_NAME})\Z")),
    ("report", re.compile(r"report\s+(\S+)\Z")),
]


def _split_top_comma(text: str) -> list[str]:
    depth = 0
    parts, cur = [], []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _logical_lines(text: str):
    buf, start = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if start is None:
            start = lineno
        if line.endswith("\\"):
            buf.append(line[:-1].strip())
            continue
        buf.append(line.strip())
        joined = " ".join(buf).strip()
        if joined:
            yield start, joined
        buf, start = [], None
    if buf and " ".join(buf).strip():
        yield start, " ".join(buf).strip()


def parse_script(text: str, source: str | None = None) -> list[Statement]:
    """Parse every statement up front so that syntax errors surface before anything runs."""
    out: list[Statement] = []
    for lineno, line in _logical_lines(text):
        for kind, rx in _PATTERNS:
            m = rx.match(line)
            if m:
                break
        else:
            verb = line.split()[0]
            raise ParseError(f"unknown statement {verb!r}", lineno, source=source)
        st = Statement(len(out), lineno, kind, line)
        g = m.groups()
        if kind in ("define",):
            if g[0] in RESERVED:
                raise ParseError(f"{g[0]!r} is reserved", lineno, source=source)
            st.args = {"name": g[0], "expr": parse_expression(g[1], source, lineno)}
        elif kind in ("eval", "assert", "assert-zero", "verify-unitary"):
            st.args = {"expr": parse_expression(g[0], source, lineno)}
        elif kind == "assert-equal":
            parts = _split_top_comma(g[0])
            if len(parts) != 2:
                raise ParseError("assert-equal needs two expressions separated by a comma", lineno, source=source)
            st.args = {"lhs": parse_expression(parts[0].strip(), source, lineno),
                       "rhs": parse_expression(parts[1].strip(), source, lineno)}
        else:
            st.args = {"groups": g}
        out.append(st)
    return out


class Report:
    def __init__(self, mode: str, seed: int):
        self.mode = mode
        self.seed = seed
        self.inputs: dict[str, str] = {}
        self.entries: list[dict] = []
        self.timing: dict[str, float] = {}
        self.exit_code = 0

    def add(self, st: Statement, status: str, result: Any = None, failure: Any = None, elapsed: float = 0.0):
        entry = {"index": st.index, "line": st.line, "kind": st.kind, "text": st.text, "status": status}
        if result is not None:
            entry["result"] = result
        if failure is not None:
            entry["failure"] = failure
        self.entries.append(entry)
        self.timing[str(st.index)] = round(elapsed * 1000.0, 3)

    def summary(self) -> dict:
        counts = {"pass": 0, "fail": 0, "ok": 0, "error": 0}
        for e in self.entries:
            counts[e["status"]] += 1
        return counts

    def as_dict(self, timing: bool = True) -> dict:
        d = {
            "schema": REPORT_SCHEMA,
            "tool_version": __version__,
            "mode": self.mode,
            "seed": self.seed,
            "inputs": dict(sorted(self.inputs.items())),
            "statements": self.entries,
            "summary": self.summary(),
            "exit_code": self.exit_code,
        }
        if timing:
            d["timing_ms"] = self.timing
        return d

    def write(self, path, timing: bool = True):
        FsPath(path).write_text(json.dumps(self.as_dict(timing), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def render_value(v, fld) -> Any:
    """JSON-friendly rendering of an evaluation result."""
    if isinstance(v, Element):
        return {"element": v.serialize(), "text": v.to_grammar()}
    if isinstance(v, bool):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, BlockMatrixRep):
        return v.to_json(fld.format if v.exact else (lambda c: repr(complex(c))))
    if isinstance(v, BlockUnitary):
        return v.describe()
    if isinstance(v, GeneratorMap):
        return {"map": v.name, "source": v.source.name, "target": v.target.name}
    if isinstance(v, Graph):
        return {"graph": v.name, "vertices": list(v.vertices), "edges": len(v.edges)}
    if isinstance(v, (list, tuple)):
        return [render_value(x, fld) for x in v]
    if isinstance(v, dict):
        return {str(k): render_value(x, fld) for k, x in v.items()}
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    return fld.format(v)


def _plain(v, fld):
    """Comparable form for non-element values; integers and field scalars coincide."""
    if isinstance(v, list):
        return [_plain(x, fld) for x in v]
    if isinstance(v, int) and not isinstance(v, bool):
        return fld.format(fld.coerce(v))
    return render_value(v, fld)


class ScriptRunner:
    def __init__(self, base_dir=".", mode: str = "exact", seed: int = 0, source: str | None = None):
        self.base = FsPath(base_dir)
        self.field = field_for(mode)
        self.seed = seed
        self.source = source
        self.ctx = Context(field=self.field)
        self.ev = Evaluator(self.ctx)
        self.partitions: dict[str, OutSplitPartition] = {}
        self.report = Report(mode, seed)

    def _read(self, rel: str) -> tuple[str, str]:
        path = self.base / rel
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {rel}: {exc.strerror}") from None
        self.report.inputs[rel] = hashlib.sha256(data).hexdigest()
        try:
            return data.decode("utf-8"), str(path)
        except UnicodeDecodeError:
            raise ParseError("input is not valid UTF-8", source=rel) from None

    def _name_free(self, name: str):
        if name in RESERVED:
            raise UsageError(f"{name!r} is reserved")

    def run(self, statements: list[Statement]) -> Report:
        failed = False
        for st in statements:
            t0 = time.perf_counter()
            try:
                status, result, failure = self.execute(st)
            except (CKError, ValueError, ZeroDivisionError) as exc:
                self.report.add(st, "error", failure={"message": str(exc)}, elapsed=time.perf_counter() - t0)
                self.report.exit_code = 2
                return self.report
            self.report.add(st, status, render_value(result, self.field) if result is not None else None,
                            failure, time.perf_counter() - t0)
            if status == "fail":
                failed = True
            self.report.exit_code = 1 if failed else 0
        self.report.exit_code = 1 if failed else 0
        return self.report

    def execute(self, st: Statement):
        a = st.args
        g = a.get("groups", ())
        ev, ctx = self.ev, self.ctx
        fld = self.field
        if st.kind == "load-graph":
            text, src = self._read(g[1])
            self._name_free(g[0])
            graph = parse_graph_text(text, name=g[0], source=g[1])
            ctx.graphs[g[0]] = graph
            if ctx.graph is None:
                ctx.graph = graph
            return "ok", graph, None
        if st.kind == "load-unitary":
            text, _ = self._read(g[0])
            u = parse_unitary_text(text, ctx.graphs, fld, source=g[0])
            self._name_free(u.name)
            ctx.env[u.name] = u
            return "ok", u, None
        if st.kind == "load-map":
            text, _ = self._read(g[0])
            phi = parse_generator_map_text(text, ctx.graphs, fld, source=g[0])
            self._name_free(phi.name)
            ctx.env[phi.name] = phi
            return "ok", phi, None
        if st.kind == "load-partition":
            if g[2] not in ctx.graphs:
                raise UsageError(f"unknown graph {g[2]!r}")
            text, _ = self._read(g[1])
            self.partitions[g[0]] = parse_partition_text(text, ctx.graphs[g[2]], source=g[1])
            return "ok", self.partitions[g[0]].to_text(), None
        if st.kind == "use":
            if g[0] not in ctx.graphs:
                raise UsageError(f"unknown graph {g[0]!r}")
            ctx.graph = ctx.graphs[g[0]]
            return "ok", None, None
        if st.kind == "define":
            val = ev.eval(a["expr"])
            ctx.env[a["name"]] = val
            return "ok", val, None
        if st.kind == "eval":
            return "ok", ev.eval(a["expr"]), None
        if st.kind == "assert":
            val = ev.eval(a["expr"])
            if not isinstance(val, bool):
                raise EvalError("assert needs a boolean expression")
            return ("pass" if val else "fail"), val, None if val else {"value": False}
        if st.kind == "assert-zero":
            x = ev.as_element(ev.eval(a["expr"]))
            if x.is_zero():
                return "pass", None, None
            return "fail", None, {"normal_form": x.serialize(), "text": x.to_grammar()}
        if st.kind == "assert-equal":
            lhs = ev.eval(a["lhs"])
            rhs = ev.eval(a["rhs"])
            if isinstance(lhs, (bool, float, str, list)) or isinstance(rhs, (bool, float, str, list)):
                same = _plain(lhs, fld) == _plain(rhs, fld)
                return ("pass" if same else "fail"), None, None if same else {"lhs": render_value(lhs, fld),
                                                                                "rhs": render_value(rhs, fld)}
            x, y = ev.as_element(lhs), ev.as_element(rhs)
            if x.graph != y.graph:
                raise EvalError("assert-equal compares elements over different graphs")
            if x.equals(y):
                return "pass", None, None
            return "fail", None, {"lhs": x.serialize(), "rhs": y.serialize(),
                                  "difference": (x - y).serialize()}
        if st.kind == "verify-graph":
            if g[0] not in ctx.graphs:
                raise UsageError(f"unknown graph {g[0]!r}")
            rep = validate_standing_assumption(ctx.graphs[g[0]])
            return ("pass" if rep.ok else "fail"), rep.as_dict(), None if rep.ok else rep.as_dict()
        if st.kind == "verify-unitary":
            u = ev.as_unitary(ev.eval(a["expr"]))
            cls = verify_unitary(u)
            res = cls.as_dict()
            if isinstance(u, BlockUnitary):
                res["hypothesis"] = hypothesis_check(u).as_dict()
            return ("pass" if cls.in_UE else "fail"), res, None
        if st.kind == "verify-hom":
            phi = self._map(g[0])
            rep = verify_homomorphism(phi)
            return ("pass" if rep.passed else "fail"), rep.as_dict(), None if rep.passed else {
                "failed": [c.as_dict() for c in rep.failures()]}
        if st.kind == "verify-diag":
            phi = self._map(g[0])
            k = int(g[1])
            hom = verify_homomorphism(phi)
            if not hom.passed:
                return "fail", None, {"message": "map does not preserve the relations",
                                      "failed": [c.as_dict() for c in hom.failures()]}
            bad = diagonal_carry_failures(phi, k)
            return ("fail" if bad else "pass"), {"k": k, "carried": not bad}, {"paths": bad} if bad else None
        if st.kind == "verify-laws":
            from .laws import run_law_suite

            if ctx.graph is None:
                raise UsageError("verify-laws needs an active graph")
            res = run_law_suite(ctx.graph, int(g[0]), random.Random(self.seed))
            ok = all(r["passed"] for r in res)
            return ("pass" if ok else "fail"), res, None if ok else {
                "failed": [r["law"] for r in res if not r["passed"]]}
        if st.kind == "outsplit":
            new, old, pname, mname = g
            if old not in ctx.graphs:
                raise UsageError(f"unknown graph {old!r}")
            if pname not in self.partitions:
                raise UsageError(f"unknown partition {pname!r}")
            self._name_free(new)
            self._name_free(mname)
            src = ctx.graphs[old]
            part = self.partitions[pname]
            if part.graph != src:
                raise UsageError(f"partition {pname} is not over {old}")
            f = out_split(src, part)
            f = Graph(f.vertices, f.edges, new)
            ctx.graphs[new] = f
            phi = induced_images(src, f, OutSplitPartition(src, part.classes), fld)
            phi.name = mname
            ctx.env[mname] = phi
            return "ok", {"graph": f.to_text(), "map": mname}, None
        if st.kind == "report":
            self.report.write(self.base / g[0])
            return "ok", g[0], None
        raise UsageError(f"unhandled statement {st.kind}")

    def _map(self, name: str) -> GeneratorMap:
        phi = self.ctx.env.get(name)
        if not isinstance(phi, GeneratorMap):
            raise UsageError(f"{name!r} is not a generator map")
        return phi


def run_script_text(text: str, base_dir=".", mode: str = "exact", seed: int = 0, source: str | None = None
                    ) -> Report:
    runner = ScriptRunner(base_dir, mode, seed, source)
    try:
        statements = parse_script(text, source)
    except ParseError as exc:
        runner.report.entries.append({"index": None, "line": exc.line, "kind": "parse", "status": "error",
                                      "failure": {"message": str(exc)}})
        runner.report.exit_code = 2
        return runner.report
    return runner.run(statements)


def run_script_file(path, mode: str = "exact", seed: int = 0) -> Report:
    p = FsPath(path)
    data = p.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        rep = Report(mode, seed)
        rep.entries.append({"index": None, "line": None, "kind": "parse", "status": "error",
                            "failure": {"message": "script is not valid UTF-8"}})
        rep.exit_code = 2
        return rep
    rep = run_script_text(text, p.parent, mode, seed, source=p.name)
    rep.inputs[p.name] = hashlib.sha256(data).hexdigest()
    return rep
