"""Ground truth: evaluation, bounded decision of existential formulas,
equivalence checking and periodicity of one-variable formulas."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt, lcm
from typing import Callable, Mapping, Sequence

from .bepa import mu_gadget
from .core import (
    EQ,
    LE,
    MOD,
    And,
    Atom,
    Exists,
    Formula,
    LinTerm,
    Not,
    Or,
    atoms,
    eliminate_divisibilities,
    free_vars,
    is_quantifier_free,
    le,
    literal_truth,
    normalize_nnf,
    pull_exists,
    substitute,
)
from .errors import PreconditionError, ResourceLimitError, UnboundVariableError
from .linalg import delta_auto
from .polyhedra import find_integral_point, search_radius

DEFAULT_DECIDE_CAP = 10**6
DEFAULT_EXHAUSTIVE_CAP = 10**5

Assignment = Mapping[str, int]


# ---------------------------------------------------------------------------
# evaluation


def eval_qf(f: Formula, sigma: Assignment) -> bool:
    """Truth value of a quantifier-free formula; MOD uses the mathematical residue."""
    if isinstance(f, Atom):
        try:
            return f.holds(f.term.evaluate(sigma))
        except KeyError as exc:
            raise UnboundVariableError(f"no value for variable {exc.args[0]!r}") from None
    if isinstance(f, Not):
        return not eval_qf(f.arg, sigma)
    if isinstance(f, And):
        return all(eval_qf(a, sigma) for a in f.args)
    if isinstance(f, Or):
        return any(eval_qf(a, sigma) for a in f.args)
    raise PreconditionError("eval_qf expects a quantifier-free formula")


def _expr(f: Formula, names: Mapping[str, str], out: list[str]) -> None:
    if isinstance(f, Atom):
        t = f.term
        parts = [f"{c}*{names[v]}" for v, c in t.coeffs]
        if t.const or not parts:
            parts.append(str(t.const))
        lin = "+".join(parts)
        if f.kind == LE:
            out.append(f"({lin}<=0)")
        elif f.kind == EQ:
            out.append(f"({lin}==0)")
        else:
            out.append(f"(({lin})%{f.modulus}==0)")
    elif isinstance(f, Not):
        out.append("(not ")
        _expr(f.arg, names, out)
        out.append(")")
    elif isinstance(f, (And, Or)):
        if not f.args:
            out.append("True" if isinstance(f, And) else "False")
            return
        op = " and " if isinstance(f, And) else " or "
        out.append("(")
        for i, a in enumerate(f.args):
            if i:
                out.append(op)
            _expr(a, names, out)
        out.append(")")
    else:
        raise PreconditionError("compile_qf expects a quantifier-free formula")


@dataclass(frozen=True)
class CompiledFormula:
    """Quantifier-free formula compiled to a positional Python predicate."""

    variables: tuple[str, ...]
    fn: Callable[..., bool]

    def __call__(self, *values: int) -> bool:
        return self.fn(*values)

    def at(self, sigma: Assignment) -> bool:
        try:
            return self.fn(*(sigma[v] for v in self.variables))
        except KeyError as exc:
            raise UnboundVariableError(f"no value for variable {exc.args[0]!r}") from None


@lru_cache(maxsize=256)
def _compile(f: Formula, variables: tuple[str, ...]) -> CompiledFormula:
    names = {v: f"v{i}" for i, v in enumerate(variables)}
    out: list[str] = []
    _expr(f, names, out)
    src = f"lambda {', '.join(names.values())}: {''.join(out)}"
    try:
        fn = eval(compile(src, "<formula>", "eval"), {})  # noqa: S307 - generated from our own AST
    except (RecursionError, MemoryError, SyntaxError):
        def fn(*vals, _f=f, _vars=variables):
            return eval_qf(_f, dict(zip(_vars, vals)))
    return CompiledFormula(variables, fn)


def compile_qf(f: Formula, variables: Sequence[str] | None = None) -> CompiledFormula:
    vs = tuple(sorted(free_vars(f))) if variables is None else tuple(variables)
    missing = set(free_vars(f)) - set(vs)
    if missing:
        raise UnboundVariableError(f"no position for variables {sorted(missing)}")
    return _compile(f, vs)


# ---------------------------------------------------------------------------
# bounded decision of existential formulas


@dataclass(frozen=True)
class _Prepared:
    block: tuple[str, ...]
    free: tuple[str, ...]
    body: Formula


@lru_cache(maxsize=256)
def _prepare(f: Formula) -> _Prepared:
    block, body = pull_exists(f)
    body = normalize_nnf(body)
    body, fresh = eliminate_divisibilities(body, block, only_block=True)
    return _Prepared(block + fresh, tuple(sorted(free_vars(f))), body)


class _Search:
    """Depth-first search over the disjunctions of an NNF matrix.

    Literals are collected eagerly; equalities that pin a variable (a unit
    coefficient, or a single variable) are solved and substituted at once,
    and two-sided single-variable bounds that meet fix their variable.
    Disjunctions are branched on one at a time, and a branch is closed
    by an integral search only when nothing is left to branch on.
    """

    def __init__(self, cap: int):
        self.cap = cap
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.cap:
            raise ResourceLimitError(f"decision search exceeded {self.cap} nodes", self.nodes)

    def run(self, pending: list, lits: list, subst: dict) -> bool:
        self.tick()
        ors: list[Formula] = []
        lits = list(lits)
        subst = dict(subst)
        pending = list(pending)
        while True:
            while pending:
                g = pending.pop()
                g = substitute(g, subst) if subst else g
                if isinstance(g, (Atom, Not)):
                    t = literal_truth(g)
                    if t is False:
                        return False
                    if t is None:
                        lits.append(g)
                elif isinstance(g, And):
                    pending.extend(reversed(g.args))
                elif isinstance(g, Or):
                    ors.append(g)
                else:
                    raise PreconditionError("unexpected quantifier in the matrix")
            step = _propagate(lits)
            if step is None:
                return False
            if not step:
                break
            subst = {k: v.substitute(step) for k, v in subst.items()}
            subst.update(step)
            lits = [_subst_lit(a, step) for a in lits]
            pending.extend(reversed(ors))
            ors = []
            pending.extend(reversed(lits))
            lits = []
        if not ors:
            return _conjunct_satisfiable(lits, self.cap)
        first = substitute(ors[0], subst)
        rest = ors[1:]
        options = first.args if isinstance(first, Or) else (first,)
        for child in options:
            if self.run(rest + [child], lits, subst):
                return True
        return False


def _subst_lit(lit, step):
    return lit.substitute(step) if isinstance(lit, Atom) else Not(lit.arg.substitute(step))


def _propagate(lits: list) -> dict[str, LinTerm] | None:
    """Bindings implied by the literals; ``None`` on contradiction, ``{}`` if none."""
    for a in lits:
        if isinstance(a, Atom) and a.kind == EQ:
            t = a.term
            g = 0
            for _, c in t.coeffs:
                g = gcd(g, c)
            if t.const % g:
                return None
            if len(t.coeffs) == 1:
                (v, c), = t.coeffs
                return {v: LinTerm.constant(-t.const // c)}
            for v, c in t.coeffs:
                if c in (1, -1):
                    return {v: (t - LinTerm.var(v, c)).scale(-c)}
    lo: dict[str, int] = {}
    hi: dict[str, int] = {}
    for a in lits:
        if isinstance(a, Atom) and a.kind == LE and len(a.term.coeffs) == 1:
            (v, c), = a.term.coeffs
            k = -a.term.const
            if c > 0:
                hi[v] = min(hi.get(v, k // c), k // c)
            else:
                lo[v] = max(lo.get(v, -(k // -c)), -(k // -c))
    for v in sorted(lo.keys() & hi.keys()):
        if lo[v] > hi[v]:
            return None
        if lo[v] == hi[v]:
            return {v: LinTerm.constant(lo[v])}
    return {}


def _conjunct_satisfiable(lits: Sequence, node_cap: int) -> bool:
    rows: list[Atom] = []
    for a in lits:
        if isinstance(a, Not) or a.kind == MOD:
            raise PreconditionError("unexpected divisibility in a ground conjunct")
        if a.kind == EQ:
            rows += [le(a.term), le(-a.term)]
        else:
            rows.append(a)
    rows = list(dict.fromkeys(rows))
    if not rows:
        return True
    names = sorted({v for a in rows for v in a.term.variables})
    A = [[a.term.coeff(v) for v in names] for a in rows]
    b = [-a.term.const for a in rows]
    delta = delta_auto(A).value
    radius = search_radius(A, b, delta, len(names))
    return find_integral_point(A, b, radius, node_cap, len(names)) is not None


def decide_epa_at(f: Formula, sigma: Assignment, cap: int = DEFAULT_DECIDE_CAP) -> bool:
    """Truth of the existential formula ``f`` at ``sigma``.

    Once ``sigma`` is plugged in, each disjunct of the normalized matrix is a
    system ``A x <= b'``; it is searched inside the box of radius
    ``l * delta * ||b'|| + n * delta``, which contains a solution whenever
    one exists.  Disjuncts are produced lazily.  ``cap`` bounds the number
    of search nodes, both for branching and for each integral search.
    """
    if is_quantifier_free(f):
        return eval_qf(f, sigma)
    prep = _prepare(f)
    missing = [v for v in prep.free if v not in sigma]
    if missing:
        raise UnboundVariableError(f"no value for variables {missing}")
    env = {v: LinTerm.constant(sigma[v]) for v in prep.free}
    return _Search(cap).run([substitute(prep.body, env)], [], {})


def decide(f: Formula, sigma: Assignment, cap: int = DEFAULT_DECIDE_CAP) -> bool:
    """Evaluate quantifier-free formulas, decide existential ones."""
    return eval_qf(f, sigma) if is_quantifier_free(f) else decide_epa_at(f, sigma, cap)


# ---------------------------------------------------------------------------
# equivalence checking


@dataclass(frozen=True)
class EquivResult:
    passed: bool
    counterexample: Mapping[str, int] | None
    points: int
    exhaustive: bool

    def __bool__(self) -> bool:
        return self.passed


def _decider(f: Formula, variables: tuple[str, ...], cap: int) -> Callable[[dict], bool]:
    if is_quantifier_free(f):
        cf = compile_qf(f, variables)
        return cf.at
    return lambda sigma: decide_epa_at(f, sigma, cap)


def check_equiv(
    f: Formula,
    g: Formula,
    box: int = 8,
    samples: int = 1000,
    seed: int = 0,
    cap: int = DEFAULT_DECIDE_CAP,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
) -> EquivResult:
    """Compare ``f`` and ``g`` on ``[-box, box]^m``, exhaustively when small enough."""
    variables = tuple(sorted(free_vars(f) | free_vars(g)))
    m = len(variables)
    df, dg = _decider(f, variables, cap), _decider(g, variables, cap)
    total = (2 * box + 1) ** m
    if m * total <= exhaustive_cap or m == 0:
        points = itertools.product(range(-box, box + 1), repeat=m)
        exhaustive = True
    else:
        rng = random.Random(seed)
        points = (tuple(rng.randint(-box, box) for _ in range(m)) for _ in range(samples))
        exhaustive = False
    count = 0
    for p in points:
        sigma = dict(zip(variables, p))
        count += 1
        if df(sigma) != dg(sigma):
            return EquivResult(False, sigma, count, exhaustive)
    return EquivResult(True, None, count, exhaustive)


# ---------------------------------------------------------------------------
# periodicity


@dataclass(frozen=True)
class PeriodicDescriptor:
    """Ultimately periodic set: for ``|n| >= threshold``, ``n in S`` iff ``n + period in S``.

    ``positive[i]`` is membership of ``threshold + i`` and ``negative[i]`` of
    ``-threshold - i`` for ``0 <= i < period``.
    """

    threshold: int
    period: int
    positive: tuple[bool, ...]
    negative: tuple[bool, ...]

    def contains(self, n: int) -> bool:
        if n >= self.threshold:
            return self.positive[(n - self.threshold) % self.period]
        if n <= -self.threshold:
            return self.negative[(-self.threshold - n) % self.period]
        raise ValueError(f"{n} lies inside the non-periodic window")


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _is_period(seq: Sequence[bool], p: int, span: int) -> bool:
    return all(seq[i] == seq[i + p] for i in range(span))


def _smallest_period(member: Callable[[int], bool], n0: int, P: int) -> PeriodicDescriptor:
    window = 2 * P
    pos = [member(n0 + i) for i in range(window)]
    neg = [member(-n0 - i) for i in range(window)]
    p = P
    for q in _prime_factors(P):
        while p % q == 0 and _is_period(pos, p // q, P) and _is_period(neg, p // q, P):
            p //= q
    threshold = n0 + p
    return PeriodicDescriptor(
        threshold,
        p,
        tuple(member(threshold + i) for i in range(p)),
        tuple(member(-threshold - i) for i in range(p)),
    )


def _qf_threshold_and_modulus(f: Formula, x: str | None) -> tuple[int, int]:
    n0, P = 0, 1
    for a in atoms(f):
        if a.kind == MOD:
            P = lcm(P, a.modulus)
        elif x is not None:
            c = a.term.coeff(x)
            if c:
                bound = -(-abs(a.term.const) // abs(c))
                n0 = max(n0, bound)
    return 1 + n0, P


def _single_free(f: Formula) -> str | None:
    fv = sorted(free_vars(f))
    if len(fv) > 1:
        raise PreconditionError(f"expected at most one free variable, found {fv}")
    return fv[0] if fv else None


def smallest_period(f: Formula) -> PeriodicDescriptor:
    """Exact smallest period of the set defined by a one-variable QF formula."""
    if not is_quantifier_free(f):
        raise PreconditionError("smallest_period expects a quantifier-free formula")
    x = _single_free(f)
    n0, P = _qf_threshold_and_modulus(f, x)
    if x is None:
        value = eval_qf(f, {})
        return PeriodicDescriptor(n0 + 1, 1, (value,), (value,))
    cf = compile_qf(f, (x,))
    return _smallest_period(lambda n: cf(n), n0, P)


def smallest_period_epa(
    f: Formula,
    P: int,
    n0: int = 0,
    member: Callable[[int], bool] | None = None,
    cap: int = DEFAULT_DECIDE_CAP,
) -> PeriodicDescriptor:
    """Smallest period of the set defined by ``f``, given a period multiple ``P``.

    The caller vouches that ``P`` is a period beyond ``n0``.  Membership is
    decided pointwise, or by ``member`` when an independent oracle is at hand.
    """
    if P < 1:
        raise PreconditionError("period multiple must be positive")
    if member is None:
        x = _single_free(f)
        if x is None:
            value = decide(f, {}, cap)
            member = lambda n: value  # noqa: E731
        else:
            member = lambda n: decide(f, {x: n}, cap)  # noqa: E731
    return _smallest_period(member, n0, P)


def period_bound_qf(f: Formula) -> int:
    """Inductive bound: 1 per inequality, the modulus per divisibility, products over connectives."""
    if isinstance(f, Atom):
        return f.modulus if f.kind == MOD else 1
    if isinstance(f, Not):
        return period_bound_qf(f.arg)
    if isinstance(f, (And, Or)):
        out = 1
        for a in f.args:
            out *= period_bound_qf(a)
        return out
    raise PreconditionError("period_bound_qf expects a quantifier-free formula")


def primes_upto(m: int) -> list[int]:
    if m < 2:
        return []
    sieve = bytearray([1]) * (m + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, isqrt(m) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, m + 1, p)))
    return [i for i, flag in enumerate(sieve) if flag]


def primorial(m: int) -> int:
    """Product of all primes ``<= m``."""
    if m < 0:
        raise PreconditionError("primorial of a negative number")
    out = 1
    for p in primes_upto(m):
        out *= p
    return out


def build_sn_formula(n: int, var: str = "a") -> Formula:
    """``a >= 0`` and some ``1 < b < 2**n`` divides ``a``, with ``a = b * q`` as a gadget."""
    if n < 1:
        raise PreconditionError("n must be positive")
    b, q = "b", "q"
    if var in (b, q):
        b, q = "_b", "_q"
    B = LinTerm.var(b)
    gadget = mu_gadget(n, b, q, var, prefix="_g")
    body = And(
        (
            le((-B).shift(2)),
            le(B.shift(1 - (1 << n))),
            le(LinTerm.var(var, -1)),
            gadget,
        )
    )
    return Exists((b, q), body)


def sn_member(n: int, a: int) -> bool:
    """Trial-division membership in ``S_n``."""
    return a >= 0 and any(a % b == 0 for b in range(2, 1 << n))


def sn_period_multiple(n: int) -> int:
    out = 1
    for b in range(1, 1 << n):
        out = lcm(out, b)
    return out


def lcm_all(values: Sequence[int]) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out
