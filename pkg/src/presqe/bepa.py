"""Bounded existential formulas with polynomial coefficients.

A bounded formula ``(bexists ((u k) ...) body)`` quantifies each ``u`` over
``[-k, k]``.  Atoms have the shapes ``sum(p_i * y_i) <= q`` and
``sum(p_i * y_i) == r (mod q)`` where the ``p_i``, ``q`` and ``r`` are
integer polynomials over the bounded variables and the ``y_i`` are free.
Boolean structure reuses the :mod:`presqe.core` connectives.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Iterable, Iterator, Mapping, Sequence

from .core import (
    FALSE,
    LE,
    MOD,
    TRUE,
    And,
    Atom,
    Exists,
    Formula,
    LinTerm,
    Not,
    Or,
    all_names,
    conj,
    disj,
    eliminate_divisibilities,
    eliminate_equalities,
    eq,
    fresh_names,
    le,
    mod,
    normalize_nnf,
    pull_exists,
)
from .errors import PreconditionError, ResourceLimitError
from .linalg import DEFAULT_DELTA_CAP, delta_auto

DEFAULT_EXPAND_CAP = 10**7

Monomial = tuple[str, ...]


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Poly:
    """Sparse integer polynomial; ``terms`` sorted by monomial, no zero coefficients."""

    terms: tuple[tuple[Monomial, int], ...] = ()

    @classmethod
    def of(cls, items: Mapping[Monomial, int] | Iterable[tuple[Monomial, int]]) -> "Poly":
        acc: dict[Monomial, int] = {}
        for m, c in items.items() if isinstance(items, Mapping) else items:
            m = tuple(sorted(m))
            acc[m] = acc.get(m, 0) + c
        return cls(tuple(sorted((m, c) for m, c in acc.items() if c)))

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls((((), c),) if c else ())

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls((((name,), 1),))

    def __add__(self, other: "Poly") -> "Poly":
        return Poly.of(itertools.chain(self.terms, other.terms))

    def __neg__(self) -> "Poly":
        return Poly(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        return Poly.of((m1 + m2, c1 * c2) for m1, c1 in self.terms for m2, c2 in other.terms)

    def scale(self, k: int) -> "Poly":
        return Poly(tuple((m, c * k) for m, c in self.terms)) if k else Poly()

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(v for m, _ in self.terms for v in m)

    @property
    def degree(self) -> int:
        return max((len(m) for m, _ in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(not m for m, _ in self.terms)

    def constant_value(self) -> int:
        return sum(c for m, c in self.terms if not m)

    def evaluate(self, env: Mapping[str, int]) -> int:
        return sum(c * prod(env[v] for v in m) for m, c in self.terms)

    def partial(self, env: Mapping[str, int]) -> "Poly":
        """Substitute the variables present in ``env``."""
        out = []
        for m, c in self.terms:
            rest = []
            for v in m:
                if v in env:
                    c *= env[v]
                else:
                    rest.append(v)
            out.append((tuple(rest), c))
        return Poly.of(out)

    def to_sexpr(self) -> str:
        parts = [_monomial_text(c, m) for m, c in self.terms]
        if not parts:
            return "0"
        return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def _monomial_text(c: int, m: Sequence[str]) -> str:
    if not m:
        return str(c)
    if c == 1 and len(m) == 1:
        return m[0]
    factors = ([] if c == 1 else [str(c)]) + list(m)
    return "(* " + " ".join(factors) + ")"


# ---------------------------------------------------------------------------
# bounded atoms and formulas

POLY_LE = "le"
POLY_MOD = "mod"


@dataclass(frozen=True)
class BepaAtom:
    """``sum(p_i y_i) <= rhs`` or ``sum(p_i y_i) == rhs (mod modulus)``."""

    kind: str
    coeffs: tuple[tuple[str, Poly], ...]
    rhs: Poly
    modulus: Poly = Poly()

    def __post_init__(self) -> None:
        if self.kind not in (POLY_LE, POLY_MOD):
            raise ValueError(f"unknown bounded atom kind {self.kind!r}")

    @classmethod
    def make(cls, kind: str, coeffs: Mapping[str, Poly] | Iterable[tuple[str, Poly]], rhs: Poly, modulus: Poly = Poly()) -> "BepaAtom":
        acc: dict[str, Poly] = {}
        for y, p in coeffs.items() if isinstance(coeffs, Mapping) else coeffs:
            acc[y] = acc.get(y, Poly()) + p
        return cls(kind, tuple(sorted((y, p) for y, p in acc.items() if p.terms)), rhs, modulus)

    @property
    def free(self) -> frozenset[str]:
        return frozenset(y for y, _ in self.coeffs)

    @property
    def bounded(self) -> frozenset[str]:
        out = set(self.rhs.variables) | set(self.modulus.variables)
        for _, p in self.coeffs:
            out |= p.variables
        return frozenset(out)

    def instantiate(self, env: Mapping[str, int]) -> Formula:
        """Ordinary atom once every bounded variable is fixed."""
        term = LinTerm.of(((y, p.evaluate(env)) for y, p in self.coeffs), -self.rhs.evaluate(env))
        if self.kind == POLY_LE:
            return _fold(le(term))
        q = abs(self.modulus.evaluate(env))
        return _fold(eq(term) if q == 0 else mod(term, q))

    def partial(self, env: Mapping[str, int]) -> "BepaAtom":
        return BepaAtom.make(
            self.kind, ((y, p.partial(env)) for y, p in self.coeffs), self.rhs.partial(env), self.modulus.partial(env)
        )

    def holds(self, env: Mapping[str, int]) -> bool:
        lhs = sum(p.evaluate(env) * env[y] for y, p in self.coeffs)
        if self.kind == POLY_LE:
            return lhs <= self.rhs.evaluate(env)
        q = self.modulus.evaluate(env)
        diff = lhs - self.rhs.evaluate(env)
        return diff == 0 if q == 0 else diff % abs(q) == 0

    def to_sexpr(self) -> str:
        parts = []
        for y, p in self.coeffs:
            for m, c in p.terms:
                parts.append(_monomial_text(c, m + (y,)) if (c != 1 or m) else y)
        lhs = "0" if not parts else parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"
        if self.kind == POLY_LE:
            return f"(<= {lhs} {self.rhs.to_sexpr()})"
        return f"(modeq {lhs} {self.rhs.to_sexpr()} {self.modulus.to_sexpr()})"


def _fold(a: Atom) -> Formula:
    t = a.constant_truth()
    if t is None:
        return a
    return TRUE if t else FALSE


@dataclass(frozen=True)
class BepaFormula:
    bounds: tuple[tuple[str, int], ...]
    body: Formula

    def __post_init__(self) -> None:
        names = [v for v, _ in self.bounds]
        if len(set(names)) != len(names):
            raise ValueError("bounded variable listed twice")
        if any(k < 0 for _, k in self.bounds):
            raise ValueError("bounds must be nonnegative")

    @property
    def free_vars(self) -> frozenset[str]:
        out: set[str] = set()
        for a in bepa_atoms(self.body):
            if isinstance(a, BepaAtom):
                out |= a.free
            else:
                out |= set(a.term.variables)
        return frozenset(out - {v for v, _ in self.bounds})

    def to_sexpr(self) -> str:
        head = " ".join(f"({v} {k})" for v, k in self.bounds)
        return f"(bexists ({head}) {_body_text(self.body)})"


def _body_text(f) -> str:
    if isinstance(f, BepaAtom):
        return f.to_sexpr()
    if isinstance(f, Atom):
        from .parser import format_atom

        return format_atom(f)
    if isinstance(f, Not):
        return f"(not {_body_text(f.arg)})"
    if isinstance(f, (And, Or)):
        if not f.args:
            return "true" if isinstance(f, And) else "false"
        op = "and" if isinstance(f, And) else "or"
        return f"({op} " + " ".join(_body_text(a) for a in f.args) + ")"
    raise TypeError(f"unexpected node {type(f).__name__} in a bounded formula")


def print_bepa(g: BepaFormula) -> str:
    return g.to_sexpr()


def bepa_size(g: BepaFormula) -> int:
    return len(print_bepa(g))


def bepa_atoms(f) -> Iterator:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (BepaAtom, Atom)):
            yield g
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        else:
            raise TypeError(f"unexpected node {type(g).__name__} in a bounded formula")


def _lin_to_bepa(a: Atom) -> Formula:
    """Ordinary atom as a bounded atom with constant polynomials."""
    coeffs = [(v, Poly.const(c)) for v, c in a.term.coeffs]
    rhs = Poly.const(-a.term.const)
    if a.kind == LE:
        return BepaAtom.make(POLY_LE, coeffs, rhs)
    if a.kind == MOD:
        return BepaAtom.make(POLY_MOD, coeffs, rhs, Poly.const(a.modulus))
    neg = [(v, -p) for v, p in coeffs]
    return And((BepaAtom.make(POLY_LE, coeffs, rhs), BepaAtom.make(POLY_LE, neg, -rhs)))


def _le(coeffs, rhs: Poly) -> BepaAtom:
    return BepaAtom.make(POLY_LE, coeffs, rhs)


def _at_least(p: Poly, k: int) -> BepaAtom:
    """``p >= k`` with no free variables: ``0 <= p - k``."""
    return _le((), p - Poly.const(k))


# ---------------------------------------------------------------------------
# compilation of an existential block into a bounded formula


@dataclass(frozen=True)
class BepaResult:
    formula: BepaFormula
    stats: Mapping[str, object]


def _prepare(f: Formula) -> tuple[tuple[str, ...], Formula]:
    block, body = pull_exists(f)
    body = normalize_nnf(body)
    body, fresh = eliminate_divisibilities(body, block, only_block=True)
    return block + fresh, eliminate_equalities(body)


def to_bepa(f: Formula, delta_cap: int = DEFAULT_DELTA_CAP) -> BepaResult:
    """Equivalent bounded formula of size polynomial in ``f``.

    Every inequality atom becomes row ``i`` of ``A x <= B y + c`` and gets a
    selector ``z_i`` in ``{0, 1}``.  Entries of ``D`` are ``P/Q`` and entries
    of ``d`` are ``S/T`` with positive denominators.  The body keeps the
    Boolean skeleton with each row replaced by ``z_i = 1``, requires
    ``D(By + c) + d`` to be integral, and enforces row ``i`` at that point
    whenever ``z_i = 1``.
    """
    block, body = _prepare(f)
    block_set = set(block)
    rows: dict[Atom, int] = {}
    for a in _atoms_in_order(body):
        if a.kind == LE and a not in rows:
            rows[a] = len(rows)
    row_atoms = list(rows)
    free = sorted({v for a in _atoms_in_order(body) for v in a.term.variables} - block_set)
    block = tuple(v for v in block if any(a.term.coeff(v) for a in row_atoms))
    n, l = len(block), len(row_atoms)
    A = [[a.term.coeff(x) for x in block] for a in row_atoms]
    delta = delta_auto(A, delta_cap) if n and l else None
    dval = delta.value if delta else 1

    used = all_names(f) | set(free) | set(block)
    supply = fresh_names(used, "_b")
    names: dict[str, str] = {}

    def name(key: str) -> str:
        if key not in names:
            names[key] = next(supply)
        return names[key]

    bounds: list[tuple[str, int]] = []
    ranges: list[Formula] = []
    z = []
    for i in range(l):
        v = name(f"z{i}")
        z.append(v)
        bounds.append((v, 1))
        ranges.append(_at_least(Poly.var(v), 0))
    P = [[None] * l for _ in range(n)]
    Q = [[None] * l for _ in range(n)]
    for j in range(n):
        for i in range(l):
            P[j][i] = name(f"P{j}_{i}")
            Q[j][i] = name(f"Q{j}_{i}")
            bounds += [(P[j][i], dval), (Q[j][i], dval)]
            ranges.append(_at_least(Poly.var(Q[j][i]), 1))
    dk = n * dval * dval
    S, T = [], []
    for j in range(n):
        S.append(name(f"S{j}"))
        T.append(name(f"T{j}"))
        bounds += [(S[j], dk), (T[j], dk)]
        ranges.append(_at_least(Poly.var(T[j]), 1))

    # rhs_i = B_i y + c_i as (coeffs, const) polynomials
    def rhs_row(a: Atom) -> tuple[dict[str, Poly], Poly]:
        return {y: Poly.const(-a.term.coeff(y)) for y in free if a.term.coeff(y)}, Poly.const(-a.term.const)

    rhs = [rhs_row(a) for a in row_atoms]
    Qj = []
    Nj = []  # (coeffs over y, constant) with x_j = N_j / Q_j
    for j in range(n):
        qprod = Poly.const(1)
        for i in range(l):
            qprod = qprod * Poly.var(Q[j][i])
        Qj.append(qprod * Poly.var(T[j]))
        coeffs: dict[str, Poly] = {}
        const = Poly.var(S[j]) * qprod
        for i in range(l):
            others = Poly.var(T[j])
            for k in range(l):
                if k != i:
                    others = others * Poly.var(Q[j][k])
            w = Poly.var(P[j][i]) * others
            ry, rc = rhs[i]
            for y, p in ry.items():
                coeffs[y] = coeffs.get(y, Poly()) + w * p
            const = const + w * rc
        Nj.append((coeffs, const))

    integrality = [
        BepaAtom.make(POLY_MOD, Nj[j][0], -Nj[j][1], Qj[j]) for j in range(n)
    ]

    guards = []
    for i, a in enumerate(row_atoms):
        cols = [j for j in range(n) if A[i][j]]
        if not cols:
            psi: Formula = _lin_to_bepa(a)
        else:
            total = Poly.const(1)
            for j in cols:
                total = total * Qj[j]
            lhs: dict[str, Poly] = {}
            const = Poly()
            for j in cols:
                mult = Poly.const(A[i][j])
                for k in cols:
                    if k != j:
                        mult = mult * Qj[k]
                for y, p in Nj[j][0].items():
                    lhs[y] = lhs.get(y, Poly()) + mult * p
                const = const + mult * Nj[j][1]
            ry, rc = rhs[i]
            for y, p in ry.items():
                lhs[y] = lhs.get(y, Poly()) - total * p
            psi = _le(lhs.items(), total * rc - const)
        guards.append(Or((_le((), -Poly.var(z[i])), psi)))

    def skeleton(g: Formula) -> Formula:
        if isinstance(g, Atom):
            if g.kind == LE:
                return _at_least(Poly.var(z[rows[g]]), 1)
            return _lin_to_bepa(g)
        if isinstance(g, Not):
            return Not(_lin_to_bepa(g.arg))
        return type(g)(tuple(skeleton(a) for a in g.args))

    body_out = And(tuple(ranges) + (skeleton(body),) + tuple(integrality) + tuple(guards))
    g = BepaFormula(tuple(bounds), body_out)
    stats = {
        "rows": l,
        "block": n,
        "delta": dval,
        "delta_mode": delta.mode if delta else "exact",
        "bounded_vars": len(bounds),
        "size": bepa_size(g),
    }
    return BepaResult(g, stats)


def _atoms_in_order(f: Formula) -> list[Atom]:
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            out.append(g)
        elif isinstance(g, Not):
            stack.append(g.arg)
        else:
            stack.extend(reversed(g.args))
    return out


# ---------------------------------------------------------------------------
# expansion


def expansion_size(g: BepaFormula) -> int:
    return prod(2 * k + 1 for _, k in g.bounds)


def _instantiate(f, env: Mapping[str, int]) -> Formula:
    if isinstance(f, BepaAtom):
        return f.instantiate(env)
    if isinstance(f, Atom):
        return _fold(f)
    if isinstance(f, Not):
        inner = _instantiate(f.arg, env)
        if inner == TRUE:
            return FALSE
        if inner == FALSE:
            return TRUE
        return Not(inner)
    if isinstance(f, And):
        parts = []
        for a in f.args:
            p = _instantiate(a, env)
            if p == FALSE:
                return FALSE
            if p != TRUE:
                parts.append(p)
        return conj(*parts) if parts else TRUE
    parts = []
    for a in f.args:
        p = _instantiate(a, env)
        if p == TRUE:
            return TRUE
        if p != FALSE:
            parts.append(p)
    return disj(*parts) if parts else FALSE


def _assignments(g: BepaFormula, cap: int) -> Iterator[dict[str, int]]:
    """Assignments of the bounded variables surviving the closed top-level conjuncts."""
    size = expansion_size(g)
    if size > cap:
        raise ResourceLimitError(f"expansion needs {size} assignments, cap is {cap}", size)
    top = g.body.args if isinstance(g.body, And) else (g.body,)
    order = [v for v, _ in g.bounds]
    pos = {v: i for i, v in enumerate(order)}
    # a conjunct is checkable once its last bounded variable is assigned, if it has no free vars
    checks: list[list] = [[] for _ in order]
    for c in top:
        atoms_here = list(bepa_atoms(c))
        if any((a.free if isinstance(a, BepaAtom) else a.term.variables) for a in atoms_here):
            continue
        bvars = set()
        for a in atoms_here:
            if isinstance(a, BepaAtom):
                bvars |= a.bounded
        if not bvars:
            continue
        checks[max(pos[v] for v in bvars)].append(c)
    env: dict[str, int] = {}

    def dfs(i: int) -> Iterator[dict[str, int]]:
        if i == len(order):
            yield dict(env)
            return
        v, k = g.bounds[i]
        for val in range(-k, k + 1):
            env[v] = val
            if all(_instantiate(c, env) == TRUE for c in checks[i]):
                yield from dfs(i + 1)
        del env[v]

    yield from dfs(0)


def bepa_expand(g: BepaFormula, cap: int = DEFAULT_EXPAND_CAP) -> Formula:
    """Quantifier-free disjunction over all assignments of the bounded variables."""
    seen: dict[Formula, None] = {}
    for env in _assignments(g, cap):
        inst = _instantiate(g.body, env)
        if inst == TRUE:
            return TRUE
        if inst != FALSE:
            seen[inst] = None
    return disj(*seen) if seen else FALSE


def eval_bepa(g: BepaFormula, sigma: Mapping[str, int], cap: int = DEFAULT_EXPAND_CAP) -> bool:
    """Truth of ``g`` at an assignment of its free variables."""
    from .semantics import eval_qf

    for env in _assignments(g, cap):
        inst = _instantiate(g.body, env)
        if inst == TRUE or (inst != FALSE and eval_qf(inst, sigma)):
            return True
    return False


# ---------------------------------------------------------------------------
# multiplication gadget and translation back to existential formulas


def mu_gadget(ell: int, x: str = "x", y: str = "y", z: str = "z", prefix: str = "_m") -> Formula:
    """Existential formula stating ``z = x * y`` and ``|x| <= 2**ell``.

    ``x + 2**ell`` is written in binary with ``ell + 2`` bits.  Doubling
    variables carry ``2**i * y``, each bit selects its doubled copy, and a
    running sum adds the selections; subtracting ``2**ell * y`` leaves
    ``x * y``.  The size is linear in ``ell``.
    """
    if ell < 0:
        raise PreconditionError("gadget size must be nonnegative")
    supply = fresh_names({x, y, z}, prefix)
    m = ell + 2
    bits = [next(supply) for _ in range(m)]
    horner = [next(supply) for _ in range(m)]
    dbl = [y] + [next(supply) for _ in range(m - 1)]
    pick = [next(supply) for _ in range(m)]
    acc = [next(supply) for _ in range(m)]
    X, Z = LinTerm.var(x), LinTerm.var(z)
    V = LinTerm.var
    e = 1 << ell
    parts: list[Formula] = [le(-X.shift(e)), le(X.shift(-e)), eq(X.shift(e) - V(horner[0]))]
    for i in range(m):
        parts += [le(-V(bits[i])), le(V(bits[i]).shift(-1))]
        nxt = V(horner[i + 1]) if i + 1 < m else LinTerm()
        parts.append(eq(V(horner[i]) - nxt.scale(2) - V(bits[i])))
        if i + 1 < m:
            parts.append(eq(V(dbl[i + 1]) - V(dbl[i]).scale(2)))
        parts.append(
            Or(
                (
                    And((eq(V(bits[i])), eq(V(pick[i])))),
                    And((eq(V(bits[i]).shift(-1)), eq(V(pick[i]) - V(dbl[i])))),
                )
            )
        )
        prev = V(acc[i - 1]) if i else LinTerm()
        parts.append(eq(V(acc[i]) - prev - V(pick[i])))
    parts.append(eq(Z - V(acc[m - 1]) + V(dbl[ell])))
    fresh = tuple(bits + horner + dbl[1:] + pick + acc)
    return Exists(fresh, And(tuple(parts)))


class _Translator:
    def __init__(self, g: BepaFormula):
        self.bound = dict(g.bounds)
        self.supply = fresh_names(set(self.bound) | set(g.free_vars) | _bepa_names(g.body), "_t")
        self.block: list[str] = [v for v, _ in g.bounds]
        self.parts: list[Formula] = []
        for v, k in g.bounds:
            self.parts += [le(LinTerm.var(v, -1).shift(-k)), le(LinTerm.var(v).shift(-k))]
        self.memo: dict[tuple[Monomial, str | None], tuple[str, int | None]] = {}

    def new(self) -> str:
        v = next(self.supply)
        self.block.append(v)
        return v

    def product(self, x: str, ell: int, y: str) -> str:
        z = self.new()
        gadget = mu_gadget(ell, x, y, z, prefix=f"{z}_")
        self.block.extend(gadget.vars)
        self.parts.append(gadget.body)
        return z

    def monomial(self, m: Monomial, base: str | None) -> tuple[str, int | None]:
        """Variable equal to ``prod(m) * base`` and its bound (``None`` if unbounded)."""
        key = (m, base)
        if key in self.memo:
            return self.memo[key]
        if not m:
            raise PreconditionError("empty monomial")
        if len(m) == 1 and base is None:
            out = (m[0], self.bound[m[0]])
        else:
            inner, inner_bound = (base, None) if len(m) == 1 else self.monomial(m[:-1], base)
            last = m[-1]
            k = self.bound[last]
            out_var = self.product(last, k.bit_length(), inner)
            out = (out_var, None if inner_bound is None else inner_bound * k)
        self.memo[key] = out
        return out

    def linear(self, p: Poly, base: str | None) -> LinTerm:
        """Linear term equal to ``p * base`` (``base=None`` means 1)."""
        acc = []
        const = 0
        for m, c in p.terms:
            if not m:
                if base is None:
                    const += c
                else:
                    acc.append((base, c))
            else:
                acc.append((self.monomial(m, base)[0], c))
        return LinTerm.of(acc, const)

    def bound_of(self, p: Poly) -> int:
        return sum(abs(c) * prod(self.bound[v] for v in m) for m, c in p.terms)

    def lhs(self, a: BepaAtom) -> LinTerm:
        out = LinTerm()
        for y, p in a.coeffs:
            out = out + self.linear(p, y)
        return out

    def atom(self, a: BepaAtom, positive: bool) -> Formula:
        t = self.lhs(a) - self.linear(a.rhs, None)
        if a.kind == POLY_LE:
            return le(t) if positive else le((-t).shift(1))
        if a.modulus.is_constant():
            q = abs(a.modulus.constant_value())
            base = eq(t) if q == 0 else mod(t, q)
            if positive:
                return base
            return Or((le(t.shift(1)), le((-t).shift(1)))) if q == 0 else Not(base)
        qv = self.new()
        self.parts_q(qv, a.modulus)
        k = self.new()
        w = self.product(qv, self.bound_of(a.modulus).bit_length(), k)
        W, Q = LinTerm.var(w), LinTerm.var(qv)
        if positive:
            return eq(t - W)
        s = self.new()
        S = LinTerm.var(s)
        return And(
            (
                eq(t - W - S),
                Or(
                    (
                        And((le((-Q).shift(1)), le((-S).shift(1)), le((S - Q).shift(1)))),
                        And((le(Q.shift(1)), le((-S).shift(1)), le((S + Q).shift(1)))),
                        And((eq(Q), Or((le((-S).shift(1)), le(S.shift(1)))))),
                    )
                ),
            )
        )

    def parts_q(self, qv: str, p: Poly) -> None:
        self.parts.append(eq(LinTerm.var(qv) - self.linear(p, None)))

    def body(self, f, positive: bool = True) -> Formula:
        if isinstance(f, BepaAtom):
            return self.atom(f, positive)
        if isinstance(f, Atom):
            return f if positive else Not(f)
        if isinstance(f, Not):
            return self.body(f.arg, not positive)
        parts = tuple(self.body(a, positive) for a in f.args)
        if isinstance(f, And) == positive:
            return And(parts)
        return Or(parts)


def _bepa_names(f) -> set[str]:
    out: set[str] = set()
    for a in bepa_atoms(f):
        if isinstance(a, BepaAtom):
            out |= a.free | a.bounded
        else:
            out |= set(a.term.variables)
    return out


def bepa_to_epa(g: BepaFormula) -> Formula:
    """Existential formula equivalent to ``g``; products become gadget instances."""
    tr = _Translator(g)
    core = tr.body(g.body)
    body = And(tuple(tr.parts) + (core,))
    return Exists(tuple(tr.block), body) if tr.block else body
