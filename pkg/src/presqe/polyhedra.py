"""Minimal faces, cone generators, integral rounding and affine witnesses.

Everything here follows one constructive chain.  A feasible system
``A x <= b`` has a rational solution ``(1/a) E b`` on a minimal face.  Any
integral solution ``z`` can be pulled towards that point by decomposing
``z - r`` over generators of a sign-split cone and dropping integer parts,
which gives an integral solution ``z*`` close to ``r``.  Writing
``z* = D b + d`` with ``D = E / a`` yields an affine witness whose ``D``
depends only on ``A``; the finitely many possible ``d`` are enumerated by
:func:`enumerate_witness_candidates`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor, gcd
from typing import Iterable, Sequence

from .errors import (
    InvariantError,
    NoIntegralSolutionError,
    NotInConeError,
    PreconditionError,
    ResourceLimitError,
    ShapeError,
)
from .linalg import (
    DEFAULT_DELTA_CAP,
    IntMatrix,
    RatMatrix,
    RatVector,
    adjugate,
    as_int_matrix,
    cramer_solve,
    delta_auto,
    det,
    fm_feasible,
    fm_project,
    independent_rows,
    inf_norm,
    mat_vec,
    rank,
    satisfies,
    submatrix,
)

DEFAULT_CANDIDATE_CAP = 10**5
DEFAULT_NODE_CAP = 10**6


@dataclass(frozen=True)
class FaceSolution:
    """``x* = (1/a) E b``, from Cramer on ``A[row_subset][:, col_subset]``."""

    E: IntMatrix
    a: int
    row_subset: tuple[int, ...]
    col_subset: tuple[int, ...]

    def point(self, b: Sequence[int]) -> RatVector:
        return tuple(Fraction(sum(e * x for e, x in zip(row, b)), self.a) for row in self.E)

    @property
    def D(self) -> RatMatrix:
        return RatMatrix.of(([Fraction(e, self.a) for e in row] for row in self.E), len(self.E[0]) if self.E else 0)


@dataclass(frozen=True)
class ConeGenerators:
    """``{x : A x <= 0} = cone(rays + lineality + -lineality)``."""

    rays: tuple[tuple[int, ...], ...]
    lineality: tuple[tuple[int, ...], ...]

    def all(self) -> tuple[tuple[int, ...], ...]:
        neg = tuple(tuple(-x for x in v) for v in self.lineality)
        return self.rays + self.lineality + neg


@dataclass(frozen=True)
class AffineWitness:
    """The map ``b -> D b + d``; ``rows``/``cols`` record the originating subsystem."""

    D: RatMatrix
    d: RatVector
    rows: tuple[int, ...] = ()
    cols: tuple[int, ...] = ()
    a: int = 1

    def apply(self, b: Sequence[int]) -> RatVector:
        return tuple(x + y for x, y in zip(self.D.apply(b), self.d))

    def validates(self, A: Sequence[Sequence[int]], b: Sequence[int]) -> bool:
        """``D b + d`` is integral and solves ``A x <= b``."""
        x = self.apply(b)
        return all(v.denominator == 1 for v in x) and satisfies(A, b, x)

    def ratnorm_D(self) -> int:
        return self.D.ratnorm()

    def ratnorm_d(self) -> int:
        return max((max(abs(v.numerator), v.denominator) for v in self.d), default=0)


def _ncols(A: IntMatrix, n: int | None) -> int:
    if A:
        return len(A[0])
    if n is None:
        raise ShapeError("column count of an empty matrix must be given")
    return n


def _first_invertible_cols(M: IntMatrix, k: int, ncols: int) -> tuple[tuple[int, ...], int] | None:
    for cols in itertools.combinations(range(ncols), k):
        d = det(submatrix(M, range(len(M)), cols))
        if d:
            return cols, d
    return None


@lru_cache(maxsize=8192)
def _rank_max_subsystems(A: IntMatrix, n: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...], int], ...]:
    """Every independent row subset of size ``rank(A)`` with its first invertible column set."""
    r = rank(A)
    out = []
    for rows in itertools.combinations(range(len(A)), r):
        sub = submatrix(A, rows, range(n))
        found = _first_invertible_cols(sub, r, n)
        if found is not None:
            out.append((rows, found[0], found[1]))
    return tuple(out)


def _face_from(A: IntMatrix, n: int, rows, cols, a) -> FaceSolution:
    adj = adjugate(submatrix(A, rows, cols))
    E = [[0] * len(A) for _ in range(n)]
    for i, c in enumerate(cols):
        for j, r in enumerate(rows):
            E[c][r] = adj[i][j]
    return FaceSolution(tuple(tuple(r) for r in E), a, tuple(rows), tuple(cols))


def minimal_face_solution(A: Sequence[Sequence[int]], b: Sequence[int], n: int | None = None) -> FaceSolution | None:
    """Rational solution ``(1/a) E b`` on a minimal face, or ``None`` if infeasible.

    Row subsets are tried in lexicographic order; the first whose Cramer
    point satisfies the whole system wins.  Infeasibility is certified by
    Fourier-Motzkin before ``None`` is returned.
    """
    A = as_int_matrix(A)
    n = _ncols(A, n)
    if len(b) != len(A):
        raise ShapeError("A and b disagree on the number of rows")
    if rank(A) == 0:
        if all(x >= 0 for x in b):
            return FaceSolution(tuple((0,) * len(A) for _ in range(n)), 1, (), ())
        return None
    for rows, cols, a in _rank_max_subsystems(A, n):
        face = _face_from(A, n, rows, cols, a)
        if satisfies(A, b, face.point(b)):
            return face
    if fm_feasible(A, b):
        raise InvariantError("feasible system without a minimal-face solution")
    return None


# ---------------------------------------------------------------------------
# cones


def _primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, x)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def _canonical_line(v: Sequence[int]) -> tuple[int, ...]:
    v = _primitive(v)
    first = next((x for x in v if x), 0)
    return tuple(-x for x in v) if first < 0 else v


def _lineality_basis(A: IntMatrix, n: int) -> tuple[tuple[int, ...], ...]:
    r = rank(A)
    if r == 0:
        return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    rows = independent_rows(A)
    sub = submatrix(A, rows, range(n))
    cols, dB = _first_invertible_cols(sub, r, n)
    B = submatrix(sub, range(r), cols)
    scale = abs(dB)
    basis = []
    for j in range(n):
        if j in cols:
            continue
        rhs = [-row[j] for row in sub]
        sol = cramer_solve(B, rhs)
        v = [0] * n
        v[j] = scale
        for c, x in zip(cols, sol):
            v[c] = int(x * scale)
        basis.append(_canonical_line(v))
    return tuple(basis)


@lru_cache(maxsize=8192)
def _cone_generators(A: IntMatrix, n: int) -> ConeGenerators:
    lin = _lineality_basis(A, n)
    r = rank(A)
    rays: dict[tuple[int, ...], None] = {}
    if r:
        for T in itertools.combinations(range(len(A)), r):
            sub = submatrix(A, T, range(n))
            found = _first_invertible_cols(sub, r, n)
            if found is None:
                continue
            cols, dE = found
            for pos in range(r):
                # rows of T other than T[pos] tight, row T[pos] strictly negative
                order = [k for k in range(r) if k != pos] + [pos]
                Bm = submatrix(sub, order, cols)
                rhs = [0] * (r - 1) + [-1]
                sol = cramer_solve(Bm, rhs)
                y = [0] * n
                for c, x in zip(cols, sol):
                    y[c] = int(x * abs(dE))
                Ay = mat_vec(A, y)
                if all(v <= 0 for v in Ay) and any(Ay):
                    rays[_primitive(y)] = None
    return ConeGenerators(tuple(sorted(rays)), lin)


def cone_generators(A: Sequence[Sequence[int]], n: int | None = None, cap: int = DEFAULT_DELTA_CAP) -> ConeGenerators:
    """Integral generators of ``{x : A x <= 0}``, each bounded by the subdeterminant bound."""
    A = as_int_matrix(A)
    n = _ncols(A, n)
    if min(len(A), n) > cap:
        raise ResourceLimitError(f"cone generation needs min(rows, cols) <= {cap}", min(len(A), n))
    return _cone_generators(A, n)


def _solve_columns(G: Sequence[Sequence[int]], v: Sequence[Fraction | int]) -> RatVector | None:
    """Exact ``lambda`` with ``sum(lambda_i G_i) = v`` for independent columns ``G_i``."""
    k = len(G)
    n = len(v)
    M = [[G[j][i] for j in range(k)] for i in range(n)]  # n x k
    rows = independent_rows(M)
    if len(rows) != k:
        return None
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    rhs = [int(Fraction(v[i]) * den) for i in rows]
    lam = tuple(x / den for x in cramer_solve(submatrix(M, rows, range(k)), rhs))
    if any(sum(M[i][j] * lam[j] for j in range(k)) != v[i] for i in range(n)):
        return None
    return lam


def caratheodory_decompose(
    generators: Sequence[Sequence[int]], v: Sequence[Fraction | int]
) -> list[tuple[Fraction, tuple[int, ...]]]:
    """Write ``v`` as a nonnegative combination of linearly independent generators."""
    gens = [tuple(g) for g in dict.fromkeys(tuple(g) for g in generators) if any(g)]
    if not any(v):
        return []
    n = len(v)
    for k in range(1, min(n, len(gens)) + 1):
        for subset in itertools.combinations(gens, k):
            if k > 1 and rank(subset) < k:
                continue
            lam = _solve_columns(subset, v)
            if lam is not None and all(x >= 0 for x in lam):
                return [(x, g) for x, g in zip(lam, subset) if x]
    # v = G lambda, lambda >= 0 as a system of inequalities in lambda
    m = len(gens)
    if m:
        den = 1
        for x in v:
            den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
        A, b = [], []
        for i in range(n):
            row = [g[i] for g in gens]
            A.append(row)
            b.append(int(Fraction(v[i]) * den))
            A.append([-x for x in row])
            b.append(-int(Fraction(v[i]) * den))
        for j in range(m):
            A.append([-int(i == j) for i in range(m)])
            b.append(0)
        if fm_feasible(A, b):
            raise InvariantError("vector in cone but no independent decomposition found")
    raise NotInConeError("vector is not in the cone of the generators")


def _sign_split(A: IntMatrix, r: Sequence[Fraction], z: Sequence[int]) -> tuple[int, ...]:
    """-1 for rows with ``a_i r <= a_i z`` (ties included), +1 otherwise."""
    return tuple(
        -1 if sum(a * x for a, x in zip(row, r)) <= sum(a * x for a, x in zip(row, z)) else 1
        for row in A
    )


def _signed(A: IntMatrix, signs: Sequence[int]) -> IntMatrix:
    return tuple(tuple(s * x for x in row) for s, row in zip(signs, A))


def integral_close(
    A: Sequence[Sequence[int]], b: Sequence[int], r: Sequence[Fraction | int], z: Sequence[int]
) -> tuple[int, ...]:
    """Integral solution near the rational solution ``r``, given any integral solution ``z``."""
    A = as_int_matrix(A)
    r = tuple(Fraction(x) for x in r)
    z = tuple(z)
    if any(Fraction(x).denominator != 1 for x in z):
        raise PreconditionError("z must be integral")
    z = tuple(int(x) for x in z)
    if not satisfies(A, b, r) or not satisfies(A, b, z):
        raise PreconditionError("both r and z must satisfy A x <= b")
    if all(x.denominator == 1 for x in r):
        return tuple(int(x) for x in r)
    M = _signed(A, _sign_split(A, r, z))
    gens = cone_generators(M, len(r)).all()
    v = tuple(zi - ri for zi, ri in zip(z, r))
    out = list(r)
    for lam, g in caratheodory_decompose(gens, v):
        frac = lam - floor(lam)
        for i, gi in enumerate(g):
            out[i] += frac * gi
    if any(x.denominator != 1 for x in out):
        raise InvariantError("rounded point is not integral")
    res = tuple(int(x) for x in out)
    if not satisfies(A, b, res):
        raise InvariantError("rounded point violates the system")
    return res


# ---------------------------------------------------------------------------
# integral search and witnesses


def _ordered_range(lo: int, hi: int):
    """Integers of ``[lo, hi]`` ordered by distance from zero, negatives first on ties."""
    if lo > hi:
        return
    if lo >= 0:
        yield from range(lo, hi + 1)
        return
    if hi <= 0:
        yield from range(hi, lo - 1, -1)
        return
    yield 0
    for k in range(1, max(-lo, hi) + 1):
        if -k >= lo:
            yield -k
        if k <= hi:
            yield k


def find_integral_point(
    A: Sequence[Sequence[int]],
    b: Sequence[int],
    radius: int,
    node_cap: int = DEFAULT_NODE_CAP,
    n: int | None = None,
) -> tuple[int, ...] | None:
    """Integral ``x`` with ``A x <= b`` and ``|x_i| <= radius``, or ``None``.

    Depth-first search over the Fourier-Motzkin projections, so each
    coordinate only ranges over its projected rational interval.  Raises
    :class:`ResourceLimitError` once more than ``node_cap`` nodes are visited.
    """
    A = as_int_matrix(A)
    n = _ncols(A, n)
    box_A = [list(row) for row in A]
    box_b = list(b)
    for j in range(n):
        e = [0] * n
        e[j] = 1
        box_A.append(e)
        box_b.append(radius)
        box_A.append([-x for x in e])
        box_b.append(radius)
    proj = fm_project(box_A, box_b)
    if not proj.feasible:
        return None
    nodes = 0
    point: list[int] = []

    def dfs(k: int) -> bool:
        nonlocal nodes
        if k == n:
            return True
        lo, hi = proj.bounds(k, point)
        ilo = -radius if lo is None else max(-radius, lo.__ceil__())
        ihi = radius if hi is None else min(radius, hi.__floor__())
        for v in _ordered_range(ilo, ihi):
            nodes += 1
            if nodes > node_cap:
                raise ResourceLimitError(f"integral search exceeded {node_cap} nodes", nodes)
            point.append(v)
            if dfs(k + 1):
                return True
            point.pop()
        return False

    if dfs(0):
        res = tuple(point)
        if not satisfies(A, b, res):
            raise InvariantError("search returned a non-solution")
        return res
    return None


def search_radius(A: IntMatrix, b: Sequence[int], delta: int, n: int) -> int:
    """Box radius within which an integral solution must exist if any does."""
    return len(A) * delta * int(inf_norm(b)) + n * delta


def witness_for(
    A: Sequence[Sequence[int]], b: Sequence[int], n: int | None = None, node_cap: int = DEFAULT_NODE_CAP
) -> AffineWitness:
    """Affine witness ``(D, d)`` with ``D b + d`` an integral solution of ``A x <= b``."""
    A = as_int_matrix(A)
    n = _ncols(A, n)
    b = tuple(int(x) for x in b)
    face = minimal_face_solution(A, b, n)
    if face is None:
        raise NoIntegralSolutionError("system has no rational solution")
    delta = delta_auto(A).value
    z = find_integral_point(A, b, search_radius(A, b, delta, n), node_cap, n)
    if z is None:
        raise NoIntegralSolutionError("system has no integral solution")
    r = face.point(b)
    zs = integral_close(A, b, r, z)
    D = face.D
    Db = D.apply(b)
    d = tuple(Fraction(x) - y for x, y in zip(zs, Db))
    return AffineWitness(D, d, face.row_subset, face.col_subset, face.a)


# ---------------------------------------------------------------------------
# candidate enumeration


def _frac_vec(v: Iterable[Fraction]) -> tuple[Fraction, ...]:
    return tuple(x - floor(x) for x in v)


def _group_closure(gens: Sequence[Sequence[Fraction]], dim: int, cap: int) -> list[tuple[Fraction, ...]]:
    """Finite subgroup of ``(Q/Z)^dim`` generated by ``gens`` (BFS, reduced mod 1)."""
    zero = (Fraction(0),) * dim
    seen = {zero: None}
    frontier = [zero]
    steps = [_frac_vec(g) for g in gens]
    steps = [s for s in dict.fromkeys(steps) if any(s)]
    while frontier:
        nxt = []
        for v in frontier:
            for s in steps:
                w = _frac_vec(x + y for x, y in zip(v, s))
                if w not in seen:
                    seen[w] = None
                    nxt.append(w)
                    if len(seen) > cap:
                        raise ResourceLimitError(f"lattice quotient exceeds {cap} elements", len(seen))
        frontier = nxt
    return sorted(seen)


def _bases(gens: Sequence[tuple[int, ...]]) -> list[tuple[tuple[int, ...], ...]]:
    gens = [g for g in dict.fromkeys(gens) if any(g)]
    if not gens:
        return [()]
    k = rank(gens)
    return [s for s in itertools.combinations(gens, k) if rank(s) == k]


def _parallelepiped_points(
    basis: Sequence[tuple[int, ...]], rho: Sequence[Fraction], cap: int
) -> list[tuple[Fraction, ...]]:
    """Points of ``rho + Z^n`` of the form ``sum(mu_j g_j)`` with ``mu`` in ``[0, 1)``."""
    n = len(rho)
    k = len(basis)
    if k == 0:
        return [tuple(Fraction(0) for _ in range(n))] if not any(rho) else []
    M = [[basis[j][i] for j in range(k)] for i in range(n)]
    T = independent_rows(M)
    G_T = submatrix(M, T, range(k))
    dG = det(G_T)
    adj = adjugate(G_T)
    inv = [[Fraction(adj[i][j], dG) for j in range(k)] for i in range(k)]
    inv_cols = [tuple(inv[i][j] for i in range(k)) for j in range(k)]
    mu0 = tuple(sum(inv[i][j] * rho[T[j]] for j in range(k)) for i in range(k))
    out = []
    for h in _group_closure(inv_cols, k, cap):
        mu = _frac_vec(x + y for x, y in zip(mu0, h))
        x = tuple(sum(M[i][j] * mu[j] for j in range(k)) for i in range(n))
        if all((xi - ri).denominator == 1 for xi, ri in zip(x, rho)):
            out.append(x)
    return out


@lru_cache(maxsize=1024)
def _split_bases(A: IntMatrix, n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Bases drawn from the generator sets of every sign-split cone of ``A``."""
    seen: dict[tuple[tuple[int, ...], ...], None] = {}
    for signs in itertools.product((-1, 1), repeat=len(A)):
        gens = _cone_generators(_signed(A, signs), n).all()
        for basis in _bases(gens):
            seen[tuple(sorted(basis))] = None
    return tuple(seen)


def _box_offsets(a: int, n: int, delta: int, cap: int) -> list[tuple[Fraction, ...]]:
    bound = n * delta * abs(a)  # numerator bound for ||d|| <= n * delta
    count = (2 * bound + 1) ** n
    if count > cap:
        raise ResourceLimitError(f"d-box has {count} points, cap is {cap}", count)
    rng = range(-bound, bound + 1)
    return [tuple(Fraction(p, abs(a)) for p in ps) for ps in itertools.product(rng, repeat=n)]


def enumerate_witness_candidates(
    A: Sequence[Sequence[int]],
    n: int | None = None,
    family: str = "parallelepiped",
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> tuple[AffineWitness, ...]:
    """Finite family of ``(D, d)`` covering every integrally feasible right-hand side.

    ``D`` ranges over the Cramer maps of the rank-maximal independent row
    subsets (one invertible column choice each, zero columns elsewhere).  With
    ``family="box"`` every ``d`` with denominator ``|a|`` and
    ``||d|| <= n * delta`` is listed.  The default ``"parallelepiped"`` family
    keeps only the offsets that the rounding step can produce: points
    ``sum(mu_j g_j)``, ``0 <= mu_j < 1``, over independent generators ``g`` of
    a sign-split cone, lying in the lattice ``D Z^l + Z^n``.
    """
    A = as_int_matrix(A)
    n = _ncols(A, n)
    l = len(A)
    if rank(A) == 0:
        zero = RatMatrix.zeros(n, l)
        return (AffineWitness(zero, (Fraction(0),) * n),)
    if family not in ("parallelepiped", "box"):
        raise ValueError(f"unknown candidate family {family!r}")
    delta = delta_auto(A).value
    subsystems = _rank_max_subsystems(A, n)
    bases = _split_bases(A, n) if family == "parallelepiped" else ()
    out: list[AffineWitness] = []
    point_cache: dict[tuple, list] = {}
    for rows, cols, a in subsystems:
        face = _face_from(A, n, rows, cols, a)
        D = face.D
        if family == "box":
            offsets = _box_offsets(a, n, delta, cap)
        else:
            cosets = _group_closure([tuple(row[j] for row in D.entries) for j in range(l)], n, cap)
            found: dict[tuple[Fraction, ...], None] = {}
            for rho in cosets:
                for basis in bases:
                    key = (basis, rho)
                    if key not in point_cache:
                        point_cache[key] = _parallelepiped_points(basis, rho, cap)
                    for p in point_cache[key]:
                        found[p] = None
            offsets = sorted(found)
        if len(out) + len(offsets) > cap:
            raise ResourceLimitError(f"more than {cap} witness candidates", len(out) + len(offsets))
        out.extend(AffineWitness(D, d, rows, cols, a) for d in offsets)
    return tuple(out)
