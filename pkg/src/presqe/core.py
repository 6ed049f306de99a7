"""Formula AST, linear systems and the normalization pipeline.

Atoms are stored in a single normal shape: ``t <= 0``, ``t = 0`` or
``t == 0 (mod m)`` for a linear term ``t``.  All arithmetic is over Python
integers; nothing in here ever touches a float.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import PreconditionError, ResourceLimitError

DEFAULT_DNF_CAP = 10**6

LE = "le"
EQ = "eq"
MOD = "mod"


@dataclass(frozen=True)
class LinTerm:
    """Integer linear term ``sum(c * v) + const`` with no zero coefficients."""

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @classmethod
    def of(cls, coeffs: Mapping[str, int] | Iterable[tuple[str, int]] = (), const: int = 0) -> "LinTerm":
        acc: dict[str, int] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for v, c in items:
            acc[v] = acc.get(v, 0) + c
        return cls(tuple(sorted((v, c) for v, c in acc.items() if c)), const)

    @classmethod
    def var(cls, name: str, coeff: int = 1) -> "LinTerm":
        return cls(((name, coeff),) if coeff else (), 0)

    @classmethod
    def constant(cls, value: int) -> "LinTerm":
        return cls((), value)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def coeff(self, name: str) -> int:
        for v, c in self.coeffs:
            if v == name:
                return c
        return 0

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LinTerm") -> "LinTerm":
        return LinTerm.of(itertools.chain(self.coeffs, other.coeffs), self.const + other.const)

    def __neg__(self) -> "LinTerm":
        return LinTerm(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: "LinTerm") -> "LinTerm":
        return self + (-other)

    def scale(self, k: int) -> "LinTerm":
        if k == 0:
            return LinTerm()
        return LinTerm(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def shift(self, k: int) -> "LinTerm":
        return LinTerm(self.coeffs, self.const + k)

    def evaluate(self, env: Mapping[str, int]) -> int:
        return self.const + sum(c * env[v] for v, c in self.coeffs)

    def substitute(self, mapping: Mapping[str, "LinTerm"]) -> "LinTerm":
        if not any(v in mapping for v, _ in self.coeffs):
            return self
        out = LinTerm.constant(self.const)
        keep = []
        for v, c in self.coeffs:
            if v in mapping:
                out = out + mapping[v].scale(c)
            else:
                keep.append((v, c))
        return out + LinTerm(tuple(keep), 0)

    def rename(self, mapping: Mapping[str, str]) -> "LinTerm":
        return LinTerm.of(((mapping.get(v, v), c) for v, c in self.coeffs), self.const)


@dataclass(frozen=True)
class Atom:
    """``term <= 0`` (LE), ``term = 0`` (EQ) or ``term = 0 mod modulus`` (MOD)."""

    kind: str
    term: LinTerm
    modulus: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (LE, EQ, MOD):
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.kind == MOD and self.modulus <= 0:
            raise ValueError("modulus must be positive")
        if self.kind != MOD and self.modulus:
            raise ValueError("only MOD atoms carry a modulus")

    def holds(self, value: int) -> bool:
        if self.kind == LE:
            return value <= 0
        if self.kind == EQ:
            return value == 0
        return value % self.modulus == 0

    def constant_truth(self) -> bool | None:
        """Truth value if the atom mentions no variable, else ``None``."""
        if self.term.coeffs:
            return None
        return self.holds(self.term.const)

    def substitute(self, mapping: Mapping[str, LinTerm]) -> "Atom":
        t = self.term.substitute(mapping)
        return self if t is self.term else Atom(self.kind, t, self.modulus)


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Exists, Forall]

TRUE = And(())
FALSE = Or(())


def le(term: LinTerm) -> Atom:
    return Atom(LE, term)


def eq(term: LinTerm) -> Atom:
    return Atom(EQ, term)


def mod(term: LinTerm, modulus: int) -> Atom:
    return Atom(MOD, term, modulus)


def conj(*args: Formula) -> Formula:
    """Flattening conjunction; a single argument is returned unwrapped."""
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        else:
            flat.append(a)
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*args: Formula) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        else:
            flat.append(a)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


# ---------------------------------------------------------------------------
# traversal helpers


def atoms(f: Formula) -> Iterator[Atom]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            yield g
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        else:
            stack.append(g.body)


def all_names(f: Formula) -> set[str]:
    """Every variable name occurring in ``f``, bound or free."""
    names: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            names.update(g.term.variables)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
        else:
            names.update(g.vars)
            stack.append(g.body)
    return names


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.term.variables)
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for a in f.args:
            out |= free_vars(a)
        return frozenset(out)
    return free_vars(f.body) - set(f.vars)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return is_quantifier_free(f.arg)
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(a) for a in f.args)
    return False


def substitute(f: Formula, mapping: Mapping[str, LinTerm]) -> Formula:
    """Replace free occurrences of variables by linear terms (no capture check)."""
    if not mapping:
        return f
    if isinstance(f, Atom):
        return f.substitute(mapping)
    if isinstance(f, Not):
        return Not(substitute(f.arg, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(substitute(a, mapping) for a in f.args))
    inner = {k: v for k, v in mapping.items() if k not in f.vars}
    return type(f)(f.vars, substitute(f.body, inner))


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    return substitute(f, {k: LinTerm.var(v) for k, v in mapping.items()})


def split_exists(f: Formula) -> tuple[tuple[str, ...], Formula]:
    """Peel a (possibly nested) existential prefix off ``f``."""
    block: list[str] = []
    while isinstance(f, Exists):
        block.extend(f.vars)
        f = f.body
    return tuple(block), f


def fresh_names(used: Iterable[str], prefix: str) -> Iterator[str]:
    taken = set(used)
    for i in itertools.count():
        name = f"{prefix}{i}"
        if name not in taken:
            taken.add(name)
            yield name


# ---------------------------------------------------------------------------
# linear systems


@dataclass(frozen=True)
class LinearSystem:
    """``A x <= b`` with concrete right-hand side."""

    A: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.A) != len(self.b):
            raise ValueError("A and b disagree on the number of rows")
        if len({len(r) for r in self.A}) > 1:
            raise ValueError("A is not rectangular")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.A), (len(self.A[0]) if self.A else 0)


@dataclass(frozen=True)
class ParamSystem:
    """``A x <= B y + c``; row ``i`` is the atom ``a_i x <= b_i y + c_i``."""

    A: tuple[tuple[int, ...], ...]
    B: tuple[tuple[int, ...], ...]
    c: tuple[int, ...]
    block: tuple[str, ...] = ()
    free: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not (len(self.A) == len(self.B) == len(self.c)):
            raise ValueError("A, B and c disagree on the number of rows")
        if self.block and any(len(r) != len(self.block) for r in self.A):
            raise ValueError("A has the wrong number of columns")
        if self.free and any(len(r) != len(self.free) for r in self.B):
            raise ValueError("B has the wrong number of columns")

    def rhs(self, y: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(bi * yi for bi, yi in zip(row, y)) + ci for row, ci in zip(self.B, self.c))

    def to_atoms(self) -> tuple[Atom, ...]:
        out = []
        for arow, brow, ci in zip(self.A, self.B, self.c):
            t = LinTerm.of(
                list(zip(self.block, arow)) + [(v, -b) for v, b in zip(self.free, brow)], -ci
            )
            out.append(le(t))
        return tuple(out)


def atoms_to_param_system(
    conjunct: Sequence[Formula], block_vars: Sequence[str], free_vars: Sequence[str]
) -> ParamSystem:
    block_vars, free_vars = tuple(block_vars), tuple(free_vars)
    known = set(block_vars) | set(free_vars)
    A, B, c = [], [], []
    for lit in conjunct:
        if not isinstance(lit, Atom) or lit.kind != LE:
            raise PreconditionError(f"expected an inequality atom, got {lit!r}")
        stray = set(lit.term.variables) - known
        if stray:
            raise PreconditionError(f"variables {sorted(stray)} are neither block nor free")
        A.append(tuple(lit.term.coeff(v) for v in block_vars))
        B.append(tuple(-lit.term.coeff(v) for v in free_vars))
        c.append(-lit.term.const)
    return ParamSystem(tuple(A), tuple(B), tuple(c), block_vars, free_vars)


# ---------------------------------------------------------------------------
# normalization


def negate_atom(a: Atom) -> Formula:
    """Positive formula equivalent to ``not a`` over the integers (MOD stays negated)."""
    t = a.term
    if a.kind == LE:
        return le((-t).shift(1))
    if a.kind == EQ:
        return Or((le(t.shift(1)), le((-t).shift(1))))
    return Not(a)


def normalize_nnf(f: Formula) -> Formula:
    """Push negations to the atoms; only negated MOD atoms keep a ``Not``."""
    return _nnf(f, True)


def _nnf(f: Formula, positive: bool) -> Formula:
    if isinstance(f, Atom):
        return f if positive else negate_atom(f)
    if isinstance(f, Not):
        return _nnf(f.arg, not positive)
    if isinstance(f, And):
        parts = [_nnf(a, positive) for a in f.args]
        return conj(*parts) if positive else disj(*parts)
    if isinstance(f, Or):
        parts = [_nnf(a, positive) for a in f.args]
        return disj(*parts) if positive else conj(*parts)
    body = _nnf(f.body, positive)
    if isinstance(f, Exists):
        return Exists(f.vars, body) if positive else Forall(f.vars, body)
    return Forall(f.vars, body) if positive else Exists(f.vars, body)


def eliminate_equalities(f: Formula) -> Formula:
    if isinstance(f, Atom):
        if f.kind == EQ:
            return And((le(f.term), le(-f.term)))
        return f
    if isinstance(f, Not):
        return Not(eliminate_equalities(f.arg))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(eliminate_equalities(a) for a in f.args))
    return type(f)(f.vars, eliminate_equalities(f.body))


def eliminate_divisibilities(
    f: Formula, block: Sequence[str] = (), *, only_block: bool = False, prefix: str = "_k"
) -> tuple[Formula, tuple[str, ...]]:
    """Replace MOD literals by equalities over fresh existential variables.

    ``t = 0 (mod m)`` becomes ``t - m*u = 0``; a negated MOD literal becomes
    the disjunction of its ``m - 1`` complementary residues sharing one fresh
    variable.  The returned tuple lists the fresh variables, which the caller
    appends to its existential block.  With ``only_block`` set, literals not
    mentioning a block variable are left untouched.
    """
    block_set = set(block)
    supply = fresh_names(all_names(f) | block_set, prefix)
    fresh: list[str] = []

    def wanted(a: Atom) -> bool:
        return not only_block or any(v in block_set for v in a.term.variables)

    def go(g: Formula) -> Formula:
        if isinstance(g, Atom):
            if g.kind != MOD or not wanted(g):
                return g
            if g.modulus == 1:
                return TRUE
            u = next(supply)
            fresh.append(u)
            return eq(g.term - LinTerm.var(u, g.modulus))
        if isinstance(g, Not):
            a = g.arg
            if not (isinstance(a, Atom) and a.kind == MOD):
                raise PreconditionError("eliminate_divisibilities expects NNF input")
            if not wanted(a):
                return g
            if a.modulus == 1:
                return FALSE
            u = next(supply)
            fresh.append(u)
            step = LinTerm.var(u, a.modulus)
            return Or(tuple(eq(a.term.shift(-r) - step) for r in range(1, a.modulus)))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(a) for a in g.args))
        raise PreconditionError("eliminate_divisibilities expects a quantifier-free formula")

    return go(f), tuple(fresh)


Literal = Union[Atom, Not]


def literal_truth(lit: Literal) -> bool | None:
    if isinstance(lit, Atom):
        return lit.constant_truth()
    t = lit.arg.constant_truth()
    return None if t is None else not t


def to_dnf(f: Formula, cap: int = DEFAULT_DNF_CAP) -> list[tuple[Literal, ...]]:
    """Disjunctive normal form of a quantifier-free NNF formula.

    Literals are atoms (any kind) or negated MOD atoms.  Constant literals are
    folded away.  Raises :class:`ResourceLimitError` as soon as an
    intermediate or final conjunct count would exceed ``cap``.
    """

    def go(g: Formula) -> list[tuple[Literal, ...]]:
        if isinstance(g, Atom) or isinstance(g, Not):
            if isinstance(g, Not) and not (isinstance(g.arg, Atom) and g.arg.kind == MOD):
                raise PreconditionError("to_dnf expects NNF input")
            truth = literal_truth(g)
            if truth is None:
                return [(g,)]
            return [()] if truth else []
        if isinstance(g, Or):
            out: list[tuple[Literal, ...]] = []
            for a in g.args:
                out.extend(go(a))
                if len(out) > cap:
                    raise ResourceLimitError(f"DNF exceeds {cap} conjuncts", len(out))
            return out
        if isinstance(g, And):
            acc: list[tuple[Literal, ...]] = [()]
            for a in g.args:
                part = go(a)
                if len(acc) * len(part) > cap:
                    raise ResourceLimitError(
                        f"DNF exceeds {cap} conjuncts", len(acc) * len(part)
                    )
                acc = [x + y for x in acc for y in part]
                if not acc:
                    break
            return acc
        raise PreconditionError("to_dnf expects a quantifier-free formula")

    return [tuple(dict.fromkeys(c)) for c in go(f)]


def substitute_unit_equalities(
    literals: Sequence[Literal], eliminable: Iterable[str]
) -> tuple[tuple[Literal, ...], dict[str, LinTerm]] | None:
    """Solve equalities with a unit coefficient on an eliminable variable.

    Each such equality ``+-v + rest = 0`` is dropped and ``v`` replaced by
    ``-+rest`` everywhere; this is exact over the integers.  Constant
    literals are folded.  Returns ``None`` when the conjunction folds to
    false, else the remaining literals and the substitution applied.
    """
    elim = set(eliminable)
    lits = list(literals)
    subst: dict[str, LinTerm] = {}
    while True:
        pick = None
        for idx, lit in enumerate(lits):
            if isinstance(lit, Atom) and lit.kind == EQ:
                for v, c in lit.term.coeffs:
                    if v in elim and c in (1, -1):
                        pick = idx, v, c
                        break
            if pick:
                break
        if pick is None:
            break
        idx, v, c = pick
        t = lits.pop(idx).term
        rest = t - LinTerm.var(v, c)
        value = rest.scale(-c)
        step = {v: value}
        subst = {k: e.substitute(step) for k, e in subst.items()}
        subst[v] = value
        elim.discard(v)
        new = []
        for lit in lits:
            lit = lit.substitute(step) if isinstance(lit, Atom) else Not(lit.arg.substitute(step))
            truth = literal_truth(lit)
            if truth is False:
                return None
            if truth is None:
                new.append(lit)
        lits = new
    out = []
    for lit in lits:
        truth = literal_truth(lit)
        if truth is False:
            return None
        if truth is None:
            out.append(lit)
    return tuple(dict.fromkeys(out)), subst


def pull_exists(f: Formula) -> tuple[tuple[str, ...], Formula]:
    """Hoist existential quantifiers that sit under ``And``/``Or`` only.

    Bound variables are renamed apart from each other and from the free
    variables of ``f``.  Raises :class:`PreconditionError` if a quantifier
    appears under a negation or a universal quantifier appears at all.
    """
    supply = fresh_names(all_names(f), "_e")
    taken = set(free_vars(f))
    block: list[str] = []

    def go(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return g
        if isinstance(g, Not):
            if not is_quantifier_free(g.arg):
                raise PreconditionError("quantifier under negation")
            return g
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(a) for a in g.args))
        if isinstance(g, Forall):
            raise PreconditionError("universal quantifier in an existential formula")
        mapping = {}
        for v in g.vars:
            new = v if v not in taken else next(supply)
            taken.add(new)
            block.append(new)
            if new != v:
                mapping[v] = new
        return go(rename(g.body, mapping) if mapping else g.body)

    body = go(f)
    return tuple(block), body
