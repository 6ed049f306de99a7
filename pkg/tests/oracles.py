"""Reference oracles for the test suite.

Nothing here calls into the algorithms under test: feasibility comes from
numpy enumeration plus scipy's LP/MILP solvers, subdeterminants from
numpy, cone membership from NNLS, and formula truth from a small evaluator
written against the AST dataclasses only.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import gcd

import numpy as np
from scipy.optimize import LinearConstraint, linprog, milp, nnls

from presqe.core import And, Atom, Exists, LinTerm, Not, Or, mod


# ---------------------------------------------------------------------------
# matrices


def max_subdeterminant(A) -> int:
    """Largest |det| over all square submatrices, the empty one included."""
    M = np.array(A, dtype=float).reshape(len(A), -1) if len(A) else np.zeros((0, 0))
    l, n = M.shape
    best = 1
    for k in range(1, min(l, n) + 1):
        for rows in itertools.combinations(range(l), k):
            for cols in itertools.combinations(range(n), k):
                best = max(best, abs(int(round(np.linalg.det(M[np.ix_(rows, cols)])))))
    return best


def rhs_grid(ell: int, lo: int = -5, hi: int = 5):
    return np.array(list(itertools.product(range(lo, hi + 1), repeat=ell)), dtype=np.int64).reshape(-1, ell)


def box_feasible_rhs(A, lo: int = -5, hi: int = 5, radius: int = 12) -> np.ndarray:
    """Boolean mask over ``rhs_grid``: some integral x with ``||x|| <= radius`` solves ``A x <= b``."""
    A = np.array(A, dtype=np.int64)
    l, n = A.shape
    side = hi - lo + 1
    X = np.array(list(itertools.product(range(-radius, radius + 1), repeat=n)), dtype=np.int64)
    AX = X @ A.T
    AX = AX[(AX <= hi).all(axis=1)]
    idx = np.clip(AX, lo, None) - lo
    grid = np.zeros((side,) * l, dtype=bool)
    grid[tuple(idx.T)] = True
    for axis in range(l):
        grid = np.logical_or.accumulate(grid, axis=axis)
    return grid.reshape(-1)


def lp_feasible(A, b) -> bool:
    A = np.array(A, dtype=float)
    n = A.shape[1]
    res = linprog(np.zeros(n), A_ub=A, b_ub=np.array(b, dtype=float), bounds=[(None, None)] * n, method="highs")
    return res.status == 0


def milp_point(A, b):
    """Integral solution from scipy's MILP solver, verified exactly; None if it reports none."""
    A = np.array(A, dtype=float)
    n = A.shape[1]
    res = milp(
        np.zeros(n),
        constraints=[LinearConstraint(A, -np.inf, np.array(b, dtype=float))],
        integrality=np.ones(n),
        bounds=(-1e6, 1e6),
    )
    if res.status != 0 or res.x is None:
        return None
    x = [int(round(v)) for v in res.x]
    assert all(sum(a * xi for a, xi in zip(row, x)) <= bi for row, bi in zip(A.astype(int).tolist(), b))
    return x


def integrally_feasible(A, b, box_hit: bool) -> bool:
    if box_hit:
        return True
    if not lp_feasible(A, b):
        return False
    return milp_point(A, b) is not None


def satisfies(A, b, x) -> bool:
    return all(sum(Fraction(a) * Fraction(xi) for a, xi in zip(row, x)) <= bi for row, bi in zip(A, b))


def in_cone(G, v, tol: float = 1e-7) -> bool:
    """``v`` is a nonnegative combination of the columns ``G`` (rows of the input)."""
    if not any(v):
        return True
    if not G:
        return False
    M = np.array(G, dtype=float).T
    _, resid = nnls(M, np.array(v, dtype=float))
    return resid < tol


def rand_matrix(rng: random.Random, ell: int, n: int, bound: int = 2):
    return tuple(tuple(rng.randint(-bound, bound) for _ in range(n)) for _ in range(ell))


# ---------------------------------------------------------------------------
# formulas


def eval_formula(f, sigma, radius: int = 10) -> bool:
    """Truth of ``f``; existential quantifiers are searched on ``[-radius, radius]``."""
    if isinstance(f, Atom):
        t = f.term
        v = t.const + sum(c * sigma[x] for x, c in t.coeffs)
        if f.kind == "le":
            return v <= 0
        if f.kind == "eq":
            return v == 0
        return v % f.modulus == 0
    if isinstance(f, Not):
        return not eval_formula(f.arg, sigma, radius)
    if isinstance(f, And):
        return all(eval_formula(a, sigma, radius) for a in f.args)
    if isinstance(f, Or):
        return any(eval_formula(a, sigma, radius) for a in f.args)
    if isinstance(f, Exists):
        for vals in itertools.product(range(-radius, radius + 1), repeat=len(f.vars)):
            if eval_formula(f.body, {**sigma, **dict(zip(f.vars, vals))}, radius):
                return True
        return False
    raise TypeError(type(f))


def rand_atom(rng: random.Random, names):
    kind = rng.choice(["le", "le", "le", "eq", "mod"])
    vs = rng.sample(names, rng.randint(1, min(2, len(names))))
    t = LinTerm.of([(v, rng.choice([-2, -1, 1, 2])) for v in vs], rng.randint(-4, 4))
    if kind == "mod":
        return mod(t, rng.randint(2, 4))
    return Atom(kind, t)


def rand_formula(rng: random.Random, names, natoms: int):
    leaves = [rand_atom(rng, names) for _ in range(natoms)]
    while len(leaves) > 1:
        i = rng.randrange(len(leaves) - 1)
        node = rng.choice([And, Or])((leaves[i], leaves[i + 1]))
        if rng.random() < 0.2:
            node = Not(node)
        leaves[i : i + 2] = [node]
    f = leaves[0]
    return Not(f) if rng.random() < 0.2 else f


def rand_epa(rng: random.Random):
    """One existential block (1-2 vars) over 1-2 free vars, 1-4 atoms."""
    block = ["x", "z"][: rng.randint(1, 2)]
    free = ["y", "w"][: rng.randint(1, 2)]
    return Exists(tuple(block), rand_formula(rng, block + free, rng.randint(1, 4)))


# ---------------------------------------------------------------------------
# periodicity


def smallest_period_bruteforce(member, period_multiple: int, start: int) -> int:
    """Least divisor ``p`` of ``period_multiple`` with ``member(a) == member(a + p)`` for ``a >= start``.

    Checked on two full multiples past ``start``, which suffices once
    ``period_multiple`` is known to be a period from ``start`` on.
    """
    L = period_multiple
    values = np.array([member(a) for a in range(start, start + 3 * L)], dtype=bool)
    for p in sorted(d for d in range(1, L + 1) if L % d == 0):
        if np.array_equal(values[: 2 * L], values[p : p + 2 * L]):
            return p
    raise AssertionError("no period found")


def divides_some(a: int, upto: int) -> bool:
    return a >= 0 and any(a % b == 0 for b in range(2, upto))


def lcm_range(m: int) -> int:
    out = 1
    for k in range(1, m + 1):
        out = out * k // gcd(out, k)
    return out


def primorial_sieve(m: int) -> int:
    out = 1
    for p in range(2, m + 1):
        if all(p % q for q in range(2, int(p**0.5) + 1)):
            out *= p
    return out
