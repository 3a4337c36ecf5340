"""Element expression grammar, evaluator, and the unitary / generator-map file formats.

Expression grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | primary
    primary := literal | 'i' | '(' expr ')' | '[' expr (',' expr)* ']' | STRING
             | 'P' '(' id ')' | 'S' '(' id+ ')' | name '(' args ')' | name
    literal := R | R 'i' | R ('+' | '-') R? 'i'          R := digits ['.' digits] ['/' digits]

A Gaussian literal such as ``1/2+1/2 i`` is read as one token, so it binds
tighter than any operator; a leading minus belongs to its first component
(``-1+i`` is ``(-1)+i``).  A scalar used where an element is expected
stands for that multiple of the identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .algebra import Element, in_diagonal, membership
from .endo import BlockUnitary, QuasiFree, hypothesis_by_conjugation, hypothesis_check, verify_unitary
from .errors import ParseError, UsageError
from .graph import IDENT, Graph
from .matrix_rep import BlockMatrixRep, central_projection_Q, compute_delta, operator_norm, represent
from .moves import GeneratorMap, block_structure_report
from .scalars import EXACT, ScalarError
from .structure import degree_component, expect_core_level, expect_diagonal, gauge, shift

# --- AST


@dataclass(frozen=True)
class Num:
    re: Fraction
    im: Fraction


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Name:
    id: str
    pos: int


@dataclass(frozen=True)
class Gen:
    kind: str  # "P" or "S"
    ids: tuple[str, ...]
    pos: int


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    pos: int


@dataclass(frozen=True)
class Bin:
    op: str
    left: Any
    right: Any
    pos: int


@dataclass(frozen=True)
class Neg:
    arg: Any


@dataclass(frozen=True)
class ListLit:
    items: tuple


VERBS = {
    "adj": (1, 1), "shift": (1, 1), "gauge": (2, 2), "comp": (2, 2), "expD": (1, 1), "expF": (2, 2),
    "lambda": (2, 2), "chain": (2, 2), "hyp": (1, 1), "hyp_oracle": (1, 1), "rep": (2, 2),
    "norm": (1, 2), "delta": (3, 3), "Q": (2, 2), "member": (2, 2), "classify": (1, 1), "eq": (2, 2),
    "zero": (1, 1), "apply": (2, 2), "at": (2, 2), "compose": (2, 2), "inv": (1, 1), "unit": (1, 1),
    "sqrt": (1, 1), "conj": (1, 1), "one": (0, 0), "blocks": (0, 1), "diag": (1, 1),
}
RESERVED = {"P", "S", "i"} | set(VERBS)

_R = r"[0-9]+(?:\.[0-9]+)?(?:/[0-9]+)?"
_END = r"(?![A-Za-z0-9_^'.])"
_COMPLEX = re.compile(rf"({_R})\s*([+-])\s*({_R})?\s*i{_END}")
_IMAG = re.compile(rf"({_R})\s*i{_END}")
_REAL = re.compile(_R)
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ID = re.compile(IDENT)
_STRING = re.compile(r'"([^"\\\n]*)"')


def _rat(text: str) -> Fraction:
    if "/" in text:
        a, b = text.split("/")
        if Fraction(b) == 0:
            raise ZeroDivisionError
        return Fraction(a) / Fraction(b)
    return Fraction(text)


class ExprParser:
    def __init__(self, text: str, source: str | None = None, line: int | None = None):
        self.text = text
        self.pos = 0
        self.source = source
        self.line = line

    def error(self, msg: str, pos: int | None = None) -> ParseError:
        p = self.pos if pos is None else pos
        return ParseError(msg, self.line, p + 1, self.source)

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.eat(ch):
            got = self.peek() or "end of input"
            raise self.error(f"expected {ch!r}, got {got!r}")

    def parse(self):
        node = self.expr()
        self.ws()
        if self.pos != len(self.text):
            raise self.error(f"unexpected {self.text[self.pos]!r}")
        return node

    def expr(self):
        node = self.term()
        while True:
            c = self.peek()
            if c in ("+", "-"):
                pos = self.pos
                self.pos += 1
                node = Bin(c, node, self.term(), pos)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            c = self.peek()
            if c in ("*", "/"):
                pos = self.pos
                self.pos += 1
                node = Bin(c, node, self.unary(), pos)
            else:
                return node

    def unary(self):
        c = self.peek()
        if c == "-":
            self.pos += 1
            if self.peek() in tuple("0123456789"):
                # a leading sign belongs to the first component of a Gaussian literal: -1+i is (-1)+i
                return self.literal(negate=True)
            return Neg(self.unary())
        if c == "+":
            self.pos += 1
            return self.unary()
        return self.primary()

    def primary(self):
        c = self.peek()
        start = self.pos
        if not c:
            raise self.error("unexpected end of input")
        if c in "0123456789":
            return self.literal()
        if c == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if c == "[":
            self.pos += 1
            items = [self.expr()]
            while self.eat(","):
                items.append(self.expr())
            self.expect("]")
            return ListLit(tuple(items))
        if c == '"':
            m = _STRING.match(self.text, self.pos)
            if not m:
                raise self.error("unterminated string")
            self.pos = m.end()
            return Str(m.group(1))
        m = _NAME.match(self.text, self.pos)
        if not m:
            raise self.error(f"unexpected {c!r}")
        name = m.group(0)
        self.pos = m.end()
        if name == "i":
            return Imag()
        if name in ("P", "S"):
            self.expect("(")
            ids = []
            while True:
                self.ws()
                im = _ID.match(self.text, self.pos)
                if not im:
                    break
                ids.append(im.group(0))
                self.pos = im.end()
            self.expect(")")
            if not ids:
                raise self.error(f"{name}(...) needs an identifier", start)
            if name == "P" and len(ids) != 1:
                raise self.error("P(...) takes exactly one vertex", start)
            return Gen(name, tuple(ids), start)
        if self.peek() == "(":
            if name not in VERBS:
                raise self.error(f"unknown verb {name!r}", start)
            self.pos += 1
            args = []
            if not self.eat(")"):
                args.append(self.expr())
                while self.eat(","):
                    args.append(self.expr())
                self.expect(")")
            lo, hi = VERBS[name]
            if not lo <= len(args) <= hi:
                raise self.error(f"{name} takes {lo}..{hi} arguments, got {len(args)}", start)
            return Call(name, tuple(args), start)
        if name in VERBS:
            raise self.error(f"verb {name!r} needs arguments", start)
        return Name(name, start)

    def literal(self, negate: bool = False):
        sign = -1 if negate else 1
        for rx in (_COMPLEX, _IMAG):
            m = rx.match(self.text, self.pos)
            if m:
                try:
                    if rx is _COMPLEX:
                        im = _rat(m.group(3)) if m.group(3) else Fraction(1)
                        if m.group(2) == "-":
                            im = -im
                        node = Num(sign * _rat(m.group(1)), im)
                    else:
                        node = Num(Fraction(0), sign * _rat(m.group(1)))
                except ZeroDivisionError:
                    raise self.error("zero denominator in literal") from None
                self.pos = m.end()
                return node
        m = _REAL.match(self.text, self.pos)
        try:
            node = Num(sign * _rat(m.group(0)), Fraction(0))
        except ZeroDivisionError:
            raise self.error("zero denominator in literal") from None
        self.pos = m.end()
        return node


def parse_expression(text: str, source: str | None = None, line: int | None = None):
    try:
        return ExprParser(text, source, line).parse()
    except RecursionError:
        raise ParseError("expression nested too deeply", line, source=source) from None


# --- evaluation


@dataclass
class Context:
    """Names visible to expressions: graphs, unitaries, maps, defined values."""

    field: Any = EXACT
    graphs: dict = None  # type: ignore[assignment]
    env: dict = None  # type: ignore[assignment]
    graph: Graph | None = None

    def __post_init__(self):
        self.graphs = {} if self.graphs is None else self.graphs
        self.env = {} if self.env is None else self.env


class EvalError(UsageError):
    pass


def _is_scalar(x, fld) -> bool:
    return not isinstance(x, (Element, BlockUnitary, GeneratorMap, BlockMatrixRep, bool, str, list, dict, Graph,
                              float)) and x is not None


class Evaluator:
    def __init__(self, ctx: Context):
        self.ctx = ctx
        self._lambdas: dict[int, tuple] = {}

    @property
    def field(self):
        return self.ctx.field

    def graph_or_fail(self, graph: Graph | None) -> Graph:
        g = graph or self.ctx.graph
        if g is None:
            raise EvalError("no active graph; add a 'use graph <name>' statement")
        return g

    def eval(self, node, graph: Graph | None = None):
        fld = self.field
        if isinstance(node, Num):
            return fld.make(node.re, node.im)
        if isinstance(node, Imag):
            return fld.i
        if isinstance(node, Str):
            return node.value
        if isinstance(node, ListLit):
            return [self.eval(x, graph) for x in node.items]
        if isinstance(node, Neg):
            v = self.eval(node.arg, graph)
            if isinstance(v, BlockUnitary):
                v = v.to_element()
            if isinstance(v, (Element, float)) or _is_scalar(v, fld):
                return -v
            raise EvalError(f"cannot negate {type(v).__name__}")
        if isinstance(node, Gen):
            g = self.graph_or_fail(graph)
            try:
                if node.kind == "P":
                    p = g.vertex(node.ids[0])
                    return Element(g, {(p, p): fld.one}, fld)
                mu = g.path(node.ids)
                return Element(g, {(mu, g.vertex(mu.range)): fld.one}, fld)
            except UsageError as exc:
                raise EvalError(str(exc)) from None
        if isinstance(node, Name):
            if node.id in self.ctx.env:
                return self.ctx.env[node.id]
            if node.id in self.ctx.graphs:
                return self.ctx.graphs[node.id]
            return node.id  # bare identifier, e.g. a vertex id for delta/Q
        if isinstance(node, Bin):
            return self.binary(node.op, self.eval(node.left, graph), self.eval(node.right, graph), graph)
        if isinstance(node, Call):
            return self.call(node, graph)
        raise EvalError(f"cannot evaluate {node!r}")

    def as_element(self, v, graph: Graph | None = None) -> Element:
        if isinstance(v, Element):
            return v
        if isinstance(v, BlockUnitary):
            return v.to_element()
        if _is_scalar(v, self.field):
            return Element.identity(self.graph_or_fail(graph), self.field).scale(v)
        raise EvalError(f"expected an element, got {type(v).__name__}")

    def as_int(self, v) -> int:
        if isinstance(v, bool):
            raise EvalError("expected an integer")
        if isinstance(v, int):
            return v
        if _is_scalar(v, self.field):
            z = self.field.to_complex(v)
            if z.imag == 0 and float(z.real).is_integer():
                return int(z.real)
        raise EvalError("expected an integer")

    def as_unitary(self, v):
        if isinstance(v, (BlockUnitary, Element)):
            return v
        raise EvalError(f"expected a unitary, got {type(v).__name__}")

    def quasifree(self, u) -> QuasiFree:
        # keyed by identity; the stored reference keeps the id from being reused
        hit = self._lambdas.get(id(u))
        if hit is None or hit[0] is not u:
            hit = (u, QuasiFree(u))
            self._lambdas[id(u)] = hit
        return hit[1]

    def binary(self, op: str, a, b, graph):
        fld = self.field
        if isinstance(a, float) or isinstance(b, float):
            if not (isinstance(a, (float, Element)) or _is_scalar(a, fld)) or isinstance(a, Element) \
                    or isinstance(b, Element):
                raise EvalError("real numbers only combine with scalars")
            x = a if isinstance(a, float) else fld.to_complex(a)
            y = b if isinstance(b, float) else fld.to_complex(b)
            r = {"+": x + y, "-": x - y, "*": x * y, "/": x / y if y else None}[op]
            if r is None:
                raise EvalError("division by zero")
            return r.real if isinstance(r, complex) and r.imag == 0 else r
        if _is_scalar(a, fld) and _is_scalar(b, fld):
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            try:
                return fld.div(a, b)
            except ScalarError as exc:
                raise EvalError(str(exc)) from None
        if op == "/":
            if not _is_scalar(b, fld):
                raise EvalError("can only divide by a scalar")
            try:
                return self.as_element(a, graph).scale(fld.div(fld.one, b))
            except ScalarError as exc:
                raise EvalError(str(exc)) from None
        if op == "*" and _is_scalar(a, fld):
            return self.as_element(b, graph).scale(a)
        if op == "*" and _is_scalar(b, fld):
            return self.as_element(a, graph).scale(b)
        x, y = self.as_element(a, graph), self.as_element(b, graph)
        if x.graph != y.graph:
            raise EvalError("operands live over different graphs")
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        return x * y

    def call(self, node: Call, graph: Graph | None):
        name, args = node.name, node.args
        if name == "apply":
            phi = self.eval(args[0], graph)
            if not isinstance(phi, GeneratorMap):
                raise EvalError("apply needs a generator map")
            return phi.apply(self.as_element(self.eval(args[1], phi.source), phi.source))
        if name == "at":
            g = self.eval(args[0], graph)
            if not isinstance(g, Graph):
                raise EvalError("at needs a graph name")
            return self.eval(args[1], g)
        if name == "one":
            return Element.identity(self.graph_or_fail(graph), self.field)
        if name == "blocks":
            g = self.eval(args[0], graph) if args else self.graph_or_fail(graph)
            if not isinstance(g, Graph):
                raise EvalError("blocks needs a graph")
            return [n for _, _, n in block_structure_report(g)]
        vals = [self.eval(a, graph) for a in args]
        fld = self.field
        try:
            return self._call(name, vals, graph, fld)
        except (UsageError, ScalarError) as exc:
            if isinstance(exc, EvalError):
                raise
            raise EvalError(f"{name}: {exc}") from None

    def _call(self, name, vals, graph, fld):
        el = lambda v: self.as_element(v, graph)  # noqa: E731
        if name == "adj":
            v = vals[0]
            if isinstance(v, BlockUnitary):
                return v.adjoint()
            if _is_scalar(v, fld):
                return fld.conj(v)
            return el(v).adjoint()
        if name == "conj":
            if not _is_scalar(vals[0], fld):
                raise EvalError("conj needs a scalar")
            return fld.conj(vals[0])
        if name == "sqrt":
            if not _is_scalar(vals[0], fld):
                raise EvalError("sqrt needs a scalar")
            return fld.sqrt(vals[0])
        if name == "shift":
            return shift(el(vals[0]))
        if name == "gauge":
            return gauge(el(vals[0]), vals[1])
        if name == "comp":
            return degree_component(el(vals[0]), self.as_int(vals[1]))
        if name == "expD":
            return expect_diagonal(el(vals[0]))
        if name == "expF":
            return expect_core_level(el(vals[0]), self.as_int(vals[1]))
        if name == "lambda":
            return self.quasifree(self.as_unitary(vals[0]))(el(vals[1]))
        if name == "chain":
            k = self.as_int(vals[1])
            if k < 1:
                raise EvalError("chain needs k >= 1")
            return self.quasifree(self.as_unitary(vals[0])).chain(k)
        if name == "hyp":
            u = vals[0]
            if isinstance(u, Element):
                u = BlockUnitary.from_element(u)
            if not isinstance(u, BlockUnitary):
                raise EvalError("hyp needs a block unitary")
            return hypothesis_check(u).holds
        if name == "hyp_oracle":
            return hypothesis_by_conjugation(self.as_unitary(vals[0]))
        if name == "rep":
            return represent(el(vals[0]), self.as_int(vals[1]))
        if name == "norm":
            return operator_norm(el(vals[0]), self.as_int(vals[1]) if len(vals) > 1 else None)
        if name == "delta":
            if not isinstance(vals[2], str):
                raise EvalError("delta needs a vertex id as third argument")
            return compute_delta(self.as_unitary(vals[0]), el(vals[1]), vals[2])
        if name == "Q":
            if not all(isinstance(v, str) for v in vals):
                raise EvalError("Q needs two vertex ids")
            g = self.graph_or_fail(graph)
            for v in vals:
                g.vertex(v)
            return central_projection_Q(g, vals[0], vals[1], fld)
        if name == "member":
            if not isinstance(vals[1], str):
                raise EvalError("member needs a tag such as \"D^1\"")
            return membership(el(vals[0]), vals[1])
        if name == "diag":
            return in_diagonal(el(vals[0]))
        if name == "classify":
            return verify_unitary(self.as_unitary(vals[0])).as_dict()
        if name == "eq":
            return el(vals[0]).equals(el(vals[1]))
        if name == "zero":
            return el(vals[0]).is_zero()
        if name == "compose":
            u, w = vals
            if not (isinstance(u, BlockUnitary) and isinstance(w, BlockUnitary)):
                raise EvalError("compose needs two block unitaries")
            return u.compose(w)
        if name == "inv":
            u = vals[0]
            if not isinstance(u, BlockUnitary):
                raise EvalError("inv needs a block unitary")
            return u.adjoint()
        if name == "unit":
            return el(vals[0])
        raise EvalError(f"unknown verb {name!r}")


def parse_element(text: str, g: Graph, field=EXACT, env: dict | None = None) -> Element:
    """Parse and normalize an element over ``g``."""
    node = parse_expression(text)
    ev = Evaluator(Context(field=field, graph=g, env=dict(env or {})))
    val = ev.eval(node)
    return ev.as_element(val)


# --- unitary files

_UNITARY_HEAD = re.compile(rf"\s*unitary\s+({_NAME.pattern})\s+on\s+({IDENT})\s*\{{(.*)\}}\s*\Z", re.S)
_BLOCK = re.compile(rf"\s*block\s+({IDENT})\s*->\s*({IDENT})\s*=\s*(.*)\Z", re.S)


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def parse_unitary_text(text: str, graphs: dict[str, Graph], field=EXACT, source: str | None = None
                       ) -> BlockUnitary:
    """``unitary <name> on <graph> { block <v> -> <w> = [[...], ...]; default identity }``."""
    body = _strip_comments(text)
    m = _UNITARY_HEAD.match(body)
    if not m:
        raise ParseError("expected 'unitary <name> on <graph> { ... }'", 1, source=source)
    name, gname, inner = m.groups()
    if gname not in graphs:
        raise ParseError(f"unknown graph {gname!r}", _line_of(body, m.start(2)), source=source)
    g = graphs[gname]
    ev = Evaluator(Context(field=field, graph=g))
    blocks = {}
    offset = m.start(3)
    for stmt in inner.split(";"):
        line = _line_of(body, offset)
        offset += len(stmt) + 1
        if not stmt.strip():
            continue
        if stmt.strip() == "default identity":
            continue
        bm = _BLOCK.match(stmt)
        if not bm:
            raise ParseError(f"expected 'block <v> -> <w> = [[...]]', got {stmt.strip()!r}", line, source=source)
        v, w, mat_text = bm.groups()
        node = parse_expression(mat_text.strip(), source, line)
        try:
            mat = ev.eval(node)
        except UsageError as exc:
            raise ParseError(str(exc), line, source=source) from None
        if not (isinstance(mat, list) and all(isinstance(r, list) for r in mat)
                and all(_is_scalar(c, field) for r in mat for c in r)):
            raise ParseError("block must be a matrix literal of scalars", line, source=source)
        if (v, w) in blocks:
            raise ParseError(f"block {v} -> {w} given twice", line, source=source)
        blocks[(v, w)] = mat
    try:
        return BlockUnitary(g, blocks, field, name)
    except UsageError as exc:
        raise ParseError(str(exc), source=source) from None


# --- generator-map files

_MAP_HEAD = re.compile(rf"map\s+({_NAME.pattern})\s*:\s*({IDENT})\s*->\s*({IDENT})\Z")
_MAP_LINE = re.compile(rf"(P|S)\s*\(\s*({IDENT})\s*\)\s*=\s*(.+)\Z")


def parse_generator_map_text(text: str, graphs: dict[str, Graph], field=EXACT, source: str | None = None
                             ) -> GeneratorMap:
    """Header ``map <name> : <source> -> <target>`` then ``P(v) = <expr>`` / ``S(e) = <expr>`` lines."""
    head = None
    vimg: dict[str, Element] = {}
    eimg: dict[str, Element] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if head is None:
            m = _MAP_HEAD.match(line)
            if not m:
                raise ParseError("expected 'map <name> : <source> -> <target>'", lineno, source=source)
            name, sname, tname = m.groups()
            for gname in (sname, tname):
                if gname not in graphs:
                    raise ParseError(f"unknown graph {gname!r}", lineno, source=source)
            head = (name, graphs[sname], graphs[tname])
            ev = Evaluator(Context(field=field, graph=graphs[tname]))
            continue
        m = _MAP_LINE.match(line)
        if not m:
            raise ParseError(f"expected 'P(v) = ...' or 'S(e) = ...', got {line!r}", lineno, source=source)
        kind, gen, expr = m.groups()
        src = head[1]
        if kind == "P" and gen not in src.index:
            raise ParseError(f"unknown source vertex {gen!r}", lineno, source=source)
        if kind == "S" and gen not in src.edges:
            raise ParseError(f"unknown source edge {gen!r}", lineno, source=source)
        target = vimg if kind == "P" else eimg
        if gen in target:
            raise ParseError(f"{kind}({gen}) assigned twice", lineno, source=source)
        node = parse_expression(expr, source, lineno)
        try:
            target[gen] = ev.as_element(ev.eval(node))
        except UsageError as exc:
            raise ParseError(str(exc), lineno, source=source) from None
    if head is None:
        raise ParseError("empty map file", source=source)
    try:
        return GeneratorMap(head[1], head[2], vimg, eimg, head[0])
    except UsageError as exc:
        raise ParseError(str(exc), source=source) from None
