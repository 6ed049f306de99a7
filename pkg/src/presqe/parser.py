"""S-expression surface syntax for formulas (``.pa`` files) and CSV matrices.

Grammar (``;`` starts a comment that runs to end of line)::

    formula := true | false
             | (and formula*) | (or formula*) | (not formula)
             | (exists (var+) formula) | (forall (var+) formula)
             | (<= term term) | (< term term) | (>= term term) | (> term term)
             | (= term term) | (modeq term term modulus)
    term    := integer | var | (+ term*) | (- term term*) | (* term term*)

Products must stay linear: at most one factor of a ``*`` may mention a
variable.  ``modulus`` is a positive decimal integer.  Bounded-existential
formulas use an extra binder, ``(bexists ((var bound)+) body)``, whose body
may multiply bounded variables with each other and with free variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .core import (
    EQ,
    FALSE,
    LE,
    TRUE,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    LinTerm,
    Not,
    Or,
    eq,
    le,
    mod,
)
from .bepa import POLY_LE, POLY_MOD, BepaAtom, BepaFormula, Poly
from .errors import ModulusError, ParseError, SourceSpan, UnboundVariableError

KEYWORDS = frozenset(
    {"exists", "forall", "bexists", "and", "or", "not", "<=", "<", ">=", ">", "=", "modeq",
     "+", "-", "*", "true", "false"}
)

_TOKEN = re.compile(rb"\s+|;[^\n]*|\(|\)|[^\s();]+")
_INT = re.compile(r"[+-]?[0-9]+\Z")
_SYMBOL = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*\Z")


@dataclass(frozen=True)
class Token:
    text: str
    span: SourceSpan


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    span: SourceSpan


SExpr = Union[Token, SList]


def read_sexprs(text: str | bytes) -> list[SExpr]:
    data = text.encode("utf-8") if isinstance(text, str) else text
    stack: list[tuple[int, list[SExpr]]] = []
    top: list[SExpr] = []
    pos = 0
    while pos < len(data):
        m = _TOKEN.match(data, pos)
        if m is None:  # pragma: no cover - the token regex matches any byte
            raise ParseError("unreadable input", SourceSpan(pos, pos + 1))
        lexeme = m.group()
        start, pos = m.start(), m.end()
        if lexeme[:1].isspace() or lexeme.startswith(b";"):
            continue
        if lexeme == b"(":
            stack.append((start, []))
        elif lexeme == b")":
            if not stack:
                raise ParseError("unbalanced ')'", SourceSpan(start, pos))
            open_at, items = stack.pop()
            node = SList(tuple(items), SourceSpan(open_at, pos))
            (stack[-1][1] if stack else top).append(node)
        else:
            try:
                word = lexeme.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError("invalid UTF-8", SourceSpan(start, pos)) from exc
            (stack[-1][1] if stack else top).append(Token(word, SourceSpan(start, pos)))
    if stack:
        raise ParseError("unclosed '('", SourceSpan(stack[-1][0], len(data)))
    return top


def _head(node: SExpr) -> str | None:
    if isinstance(node, SList) and node.items and isinstance(node.items[0], Token):
        return node.items[0].text
    return None


def _expect_arity(node: SList, low: int, high: int | None = None) -> None:
    n = len(node.items) - 1
    if n < low or (high is not None and n > high):
        want = str(low) if high == low else f"{low}..{high if high is not None else ''}"
        raise ParseError(f"'{_head(node)}' expects {want} arguments, got {n}", node.span)


def _var_token(node: SExpr) -> Token:
    if not isinstance(node, Token) or not _SYMBOL.match(node.text) or node.text in KEYWORDS:
        raise ParseError("expected a variable name", node.span)
    return node


# ---------------------------------------------------------------------------
# polynomial terms (shared by the linear and the bounded-existential parser)

Monomial = tuple[str, ...]  # sorted variable names with multiplicity


def _poly_add(p: dict, q: dict, sign: int = 1) -> dict:
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0) + sign * c
        if not out[m]:
            del out[m]
    return out


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = tuple(sorted(m1 + m2))
            out[m] = out.get(m, 0) + c1 * c2
            if not out[m]:
                del out[m]
    return out


class _Builder:
    """Turns s-expressions into formulas, renaming binders that would clash."""

    def __init__(self, free_allowed: Iterable[str] | None):
        self.free_allowed = None if free_allowed is None else set(free_allowed)
        self.taken: set[str] = set()
        self.names: set[str] = set()
        self.counter = 0

    # -- pass 1: names -----------------------------------------------------
    def scan(self, node: SExpr, bound: frozenset[str]) -> None:
        if isinstance(node, Token):
            if _SYMBOL.match(node.text) and node.text not in KEYWORDS:
                self.names.add(node.text)
                if node.text not in bound:
                    self.taken.add(node.text)
                    if self.free_allowed is not None and node.text not in self.free_allowed:
                        raise UnboundVariableError(f"unbound variable {node.text!r}", node.span)
            return
        head = _head(node)
        if head in ("exists", "forall") and len(node.items) == 3 and isinstance(node.items[1], SList):
            vs = [_var_token(t).text for t in node.items[1].items]
            self.names.update(vs)
            self.scan(node.items[2], bound | set(vs))
            return
        if head == "bexists" and len(node.items) == 3 and isinstance(node.items[1], SList):
            vs = []
            for pair in node.items[1].items:
                if isinstance(pair, SList) and pair.items:
                    vs.append(_var_token(pair.items[0]).text)
            self.names.update(vs)
            self.scan(node.items[2], bound | set(vs))
            return
        for child in node.items[1:] if head is not None else node.items:
            self.scan(child, bound)

    def fresh(self, base: str) -> str:
        while True:
            self.counter += 1
            cand = f"{base}_{self.counter}"
            if cand not in self.names and cand not in self.taken:
                return cand

    def bind(self, name: str) -> str:
        new = name if name not in self.taken else self.fresh(name)
        self.taken.add(new)
        return new

    # -- terms ---------------------------------------------------------------
    def poly(self, node: SExpr, env: dict[str, str]) -> dict[Monomial, int]:
        if isinstance(node, Token):
            if _INT.match(node.text):
                v = int(node.text)
                return {(): v} if v else {}
            name = _var_token(node).text
            return {(env.get(name, name),): 1}
        head = _head(node)
        args = node.items[1:]
        if head == "+":
            acc: dict = {}
            for a in args:
                acc = _poly_add(acc, self.poly(a, env))
            return acc
        if head == "-":
            _expect_arity(node, 1)
            first = self.poly(args[0], env)
            if len(args) == 1:
                return _poly_add({}, first, -1)
            for a in args[1:]:
                first = _poly_add(first, self.poly(a, env), -1)
            return first
        if head == "*":
            _expect_arity(node, 1)
            acc = {(): 1}
            for a in args:
                acc = _poly_mul(acc, self.poly(a, env))
            return acc
        raise ParseError("expected a term", node.span)

    def linear(self, node: SExpr, env: dict[str, str]) -> LinTerm:
        p = self.poly(node, env)
        coeffs, const = [], 0
        for m, c in p.items():
            if len(m) == 0:
                const = c
            elif len(m) == 1:
                coeffs.append((m[0], c))
            else:
                raise ParseError("nonlinear term", node.span)
        return LinTerm.of(coeffs, const)

    # -- formulas --------------------------------------------------------------
    def formula(self, node: SExpr, env: dict[str, str]) -> Formula:
        if isinstance(node, Token):
            if node.text == "true":
                return TRUE
            if node.text == "false":
                return FALSE
            raise ParseError("expected a formula", node.span)
        head = _head(node)
        args = node.items[1:]
        if head == "and":
            return And(tuple(self.formula(a, env) for a in args))
        if head == "or":
            return Or(tuple(self.formula(a, env) for a in args))
        if head == "not":
            _expect_arity(node, 1, 1)
            return Not(self.formula(args[0], env))
        if head in ("exists", "forall"):
            _expect_arity(node, 2, 2)
            if not isinstance(args[0], SList) or not args[0].items:
                raise ParseError("expected a non-empty variable list", args[0].span)
            raw = [_var_token(tok).text for tok in args[0].items]
            if len(set(raw)) != len(raw):
                raise ParseError("duplicate variable in binder", args[0].span)
            inner = dict(env)
            names = []
            for name in raw:
                new = self.bind(name)
                inner[name] = new
                names.append(new)
            body = self.formula(args[1], inner)
            kind = Exists if head == "exists" else Forall
            if isinstance(body, kind):  # a directly nested block of the same kind is one block
                return kind(tuple(names) + body.vars, body.body)
            return kind(tuple(names), body)
        if head in ("<=", "<", ">=", ">", "="):
            _expect_arity(node, 2, 2)
            lhs, rhs = self.linear(args[0], env), self.linear(args[1], env)
            if head == "<=":
                return le(lhs - rhs)
            if head == "<":
                return le((lhs - rhs).shift(1))
            if head == ">=":
                return le(rhs - lhs)
            if head == ">":
                return le((rhs - lhs).shift(1))
            return eq(lhs - rhs)
        if head == "modeq":
            _expect_arity(node, 3, 3)
            lhs, rhs = self.linear(args[0], env), self.linear(args[1], env)
            m = self.modulus(args[2])
            return mod(lhs - rhs, m)
        raise ParseError(f"unknown form {head!r}", node.span)

    def modulus(self, node: SExpr) -> int:
        if not isinstance(node, Token) or not _INT.match(node.text):
            raise ParseError("modulus must be an integer literal", node.span)
        m = int(node.text)
        if m <= 0:
            raise ModulusError(f"modulus must be positive, got {m}", node.span)
        return m


def _single(text: str | bytes) -> SExpr:
    nodes = read_sexprs(text)
    if len(nodes) != 1:
        data = text.encode("utf-8") if isinstance(text, str) else text
        span = nodes[1].span if len(nodes) > 1 else SourceSpan(0, len(data))
        raise ParseError(f"expected exactly one formula, found {len(nodes)}", span)
    return nodes[0]


def parse(text: str | bytes, free: Iterable[str] | None = None) -> Formula:
    """Parse one formula.

    Bound variables that clash with a free variable or an earlier binder are
    renamed (``x`` becomes ``x_1``), so every binder in the result is unique.
    If ``free`` is given, any free variable outside it is an error.
    """
    node = _single(text)
    b = _Builder(free)
    b.scan(node, frozenset())
    return b.formula(node, {})


# ---------------------------------------------------------------------------
# bounded-existential formulas


class _BepaBuilder(_Builder):
    def __init__(self, bounded: dict[str, int]):
        super().__init__(None)
        self.bounded = bounded

    def split(self, node: SExpr, env: dict[str, str]):
        """Polynomial term as (coefficients per free variable, bounded-only part)."""
        coeffs: dict[str, list] = {}
        rest = []
        for m, c in self.poly(node, env).items():
            free = [v for v in m if v not in self.bounded]
            if len(free) > 1:
                raise ParseError("product of two free variables", node.span)
            if free:
                inner = list(m)
                inner.remove(free[0])
                coeffs.setdefault(free[0], []).append((tuple(inner), c))
            else:
                rest.append((m, c))
        return {y: Poly.of(ts) for y, ts in coeffs.items()}, Poly.of(rest)

    def bformula(self, node: SExpr):
        if isinstance(node, Token):
            return self.formula(node, {})
        head = _head(node)
        args = node.items[1:]
        if head in ("and", "or"):
            return (And if head == "and" else Or)(tuple(self.bformula(a) for a in args))
        if head == "not":
            _expect_arity(node, 1, 1)
            return Not(self.bformula(args[0]))
        if head in ("<=", "<", ">=", ">"):
            _expect_arity(node, 2, 2)
            lc, lr = self.split(args[0], {})
            rc, rr = self.split(args[1], {})
            if head in (">=", ">"):
                lc, lr, rc, rr = rc, rr, lc, lr
            coeffs = {y: lc.get(y, Poly()) - rc.get(y, Poly()) for y in set(lc) | set(rc)}
            rhs = rr - lr - (Poly.const(1) if head in ("<", ">") else Poly())
            return BepaAtom.make(POLY_LE, coeffs, rhs)
        if head == "modeq":
            _expect_arity(node, 3, 3)
            lc, lr = self.split(args[0], {})
            rc, rr = self.split(args[1], {})
            qc, q = self.split(args[2], {})
            if qc:
                raise ParseError("modulus may only mention bounded variables", args[2].span)
            if q.is_constant() and q.constant_value() <= 0:
                raise ModulusError(f"modulus must be positive, got {q.constant_value()}", args[2].span)
            coeffs = {y: lc.get(y, Poly()) - rc.get(y, Poly()) for y in set(lc) | set(rc)}
            return BepaAtom.make(POLY_MOD, coeffs, rr - lr, q)
        raise ParseError(f"unknown form {head!r} in a bounded formula", node.span)


def parse_bepa(text: str | bytes) -> BepaFormula:
    """Parse ``(bexists ((u k) ...) body)``."""
    node = _single(text)
    if _head(node) != "bexists" or len(node.items) != 3 or not isinstance(node.items[1], SList):
        raise ParseError("expected (bexists ((var bound) ...) body)", node.span)
    bounds = []
    for pair in node.items[1].items:
        if not isinstance(pair, SList) or len(pair.items) != 2:
            raise ParseError("expected (var bound)", pair.span)
        name = _var_token(pair.items[0]).text
        tok = pair.items[1]
        if not isinstance(tok, Token) or not _INT.match(tok.text) or int(tok.text) < 0:
            raise ParseError("bound must be a nonnegative integer", tok.span)
        bounds.append((name, int(tok.text)))
    if len({v for v, _ in bounds}) != len(bounds):
        raise ParseError("bounded variable listed twice", node.items[1].span)
    b = _BepaBuilder(dict(bounds))
    return BepaFormula(tuple(bounds), b.bformula(node.items[2]))


def print_bepa(g: BepaFormula) -> str:
    return g.to_sexpr()


# ---------------------------------------------------------------------------
# printing


def format_linear(coeffs: Sequence[tuple[str, int]]) -> str:
    if not coeffs:
        return "0"
    parts = [v if c == 1 else f"(* {c} {v})" for v, c in coeffs]
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def format_atom(a: Atom) -> str:
    lhs = format_linear(a.term.coeffs)
    rhs = str(-a.term.const)
    if a.kind == LE:
        return f"(<= {lhs} {rhs})"
    if a.kind == EQ:
        return f"(= {lhs} {rhs})"
    return f"(modeq {lhs} {rhs} {a.modulus})"


def print_formula(f: Formula) -> str:
    """Deterministic canonical text of ``f``; ``parse`` inverts it exactly."""
    out: list[str] = []
    _emit(f, out)
    return "".join(out)


def _emit(f, out: list[str]) -> None:
    if isinstance(f, Atom):
        out.append(format_atom(f))
    elif isinstance(f, Not):
        out.append("(not ")
        _emit(f.arg, out)
        out.append(")")
    elif isinstance(f, (And, Or)):
        if not f.args:
            out.append("true" if isinstance(f, And) else "false")
            return
        out.append("(and" if isinstance(f, And) else "(or")
        for a in f.args:
            out.append(" ")
            _emit(a, out)
        out.append(")")
    elif isinstance(f, (Exists, Forall)):
        out.append("(exists (" if isinstance(f, Exists) else "(forall (")
        names, body = list(f.vars), f.body
        while type(body) is type(f) and not set(names) & set(body.vars):
            names += body.vars
            body = body.body
        out.append(" ".join(names))
        out.append(") ")
        _emit(body, out)
        out.append(")")
    else:
        emit_other = getattr(f, "to_sexpr", None)
        if emit_other is None:
            raise TypeError(f"cannot print {type(f).__name__}")
        out.append(emit_other())


def formula_size(f: Formula) -> int:
    """Size measure used throughout: length of the canonical print."""
    return len(print_formula(f))


# ---------------------------------------------------------------------------
# CSV matrices


def parse_matrix_csv(text: str) -> tuple[tuple[int, ...], ...]:
    rows = []
    offset = 0
    for line in text.splitlines(keepends=True):
        body = line.split("#", 1)[0].strip()
        if body:
            try:
                rows.append(tuple(int(x) for x in body.replace(";", ",").split(",") if x.strip()))
            except ValueError as exc:
                raise ParseError(f"bad integer in CSV row {body!r}", SourceSpan(offset, offset + len(line))) from exc
        offset += len(line.encode("utf-8"))
    if len({len(r) for r in rows}) > 1:
        raise ParseError("CSV matrix rows have different lengths", SourceSpan(0, offset))
    return tuple(rows)


def parse_vector_csv(text: str) -> tuple[int, ...]:
    m = parse_matrix_csv(text)
    if not m:
        return ()
    if len(m) == 1:
        return m[0]
    if all(len(r) == 1 for r in m):
        return tuple(r[0] for r in m)
    raise ParseError("expected a single row or column of integers", SourceSpan(0, len(text)))


def format_matrix_csv(rows: Sequence[Sequence[object]]) -> str:
    return "".join(",".join(str(x) for x in r) + "\n" for r in rows)
