"""Exact integer and rational linear algebra.

Determinants and ranks use fraction-free (Bareiss) elimination, so every
intermediate value is an integer.  Rational vectors are ``Fraction`` tuples.
Fourier-Motzkin elimination works on integer rows as well: combining a row
with positive coefficient ``p`` and one with negative coefficient ``-q``
multiplies them by ``q`` and ``p``, which never leaves the integers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

from .errors import ResourceLimitError, ShapeError, SingularMatrixError

DEFAULT_DELTA_CAP = 6
DEFAULT_FM_CAP = 10**5

IntMatrix = tuple[tuple[int, ...], ...]
RatVector = tuple[Fraction, ...]


def as_int_matrix(M: Iterable[Iterable[int]]) -> IntMatrix:
    out = tuple(tuple(int(x) for x in row) for row in M)
    if len({len(r) for r in out}) > 1:
        raise ShapeError("matrix is not rectangular")
    return out


def shape(M: Sequence[Sequence[object]], ncols: int | None = None) -> tuple[int, int]:
    """Rows and columns; an empty matrix reports ``ncols`` (default 0) columns."""
    if not M:
        return 0, ncols or 0
    return len(M), len(M[0])


def transpose(M: Sequence[Sequence[object]]) -> tuple[tuple, ...]:
    return tuple(zip(*M))


def ratnorm(x: Fraction | int) -> int:
    """``max(|numerator|, denominator)`` of the reduced fraction."""
    x = Fraction(x)
    return max(abs(x.numerator), x.denominator)


def ratnorm_all(values: Iterable[Fraction | int]) -> int:
    return max((ratnorm(v) for v in values), default=0)


def inf_norm(values: Iterable[Fraction | int]) -> Fraction | int:
    return max((abs(v) for v in values), default=0)


@dataclass(frozen=True)
class RatMatrix:
    """Rectangular matrix of reduced rationals."""

    entries: tuple[tuple[Fraction, ...], ...]
    cols: int = 0

    def __post_init__(self) -> None:
        if self.entries:
            if len({len(r) for r in self.entries}) > 1:
                raise ShapeError("matrix is not rectangular")
            object.__setattr__(self, "cols", len(self.entries[0]))

    @classmethod
    def of(cls, rows: Iterable[Iterable[Fraction | int]], cols: int = 0) -> "RatMatrix":
        return cls(tuple(tuple(Fraction(x) for x in r) for r in rows), cols)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(tuple((Fraction(0),) * cols for _ in range(rows)), cols)

    @property
    def rows(self) -> int:
        return len(self.entries)

    def apply(self, v: Sequence[Fraction | int]) -> RatVector:
        if len(v) != self.cols:
            raise ShapeError(f"vector of length {len(v)} for a matrix with {self.cols} columns")
        return tuple(sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in self.entries)

    def ratnorm(self) -> int:
        return ratnorm_all(x for row in self.entries for x in row)

    def common_denominator(self) -> int:
        den = 1
        for row in self.entries:
            for x in row:
                den = den * x.denominator // gcd(den, x.denominator)
        return den

    def __iter__(self):
        return iter(self.entries)


# ---------------------------------------------------------------------------
# determinants and rank


def det(M: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss)."""
    n = len(M)
    if any(len(r) != n for r in M):
        raise ShapeError("determinant of a non-square matrix")
    if n == 0:
        return 1
    if n == 1:
        return int(M[0][0])
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    a = [list(r) for r in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def _integral_rows(M: Sequence[Sequence[Fraction | int]]) -> list[list[int]]:
    out = []
    for row in M:
        den = 1
        for x in row:
            d = Fraction(x).denominator
            den = den * d // gcd(den, d)
        out.append([int(Fraction(x) * den) for x in row])
    return out


def rank(M: Sequence[Sequence[Fraction | int]]) -> int:
    """Rank over the rationals by fraction-free row reduction."""
    a = _integral_rows(M)
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    r, prev = 0, 1
    for c in range(ncols):
        pivot_row = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        pivot = a[r][c]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                a[i][j] = (a[i][j] * pivot - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = pivot
        r += 1
        if r == nrows:
            break
    return r


def independent_rows(M: Sequence[Sequence[Fraction | int]], rows: Iterable[int] | None = None) -> tuple[int, ...]:
    """Greedy maximal independent row set, preferring lower indices."""
    chosen: list[int] = []
    for i in range(len(M)) if rows is None else rows:
        if rank([M[j] for j in chosen] + [M[i]]) == len(chosen) + 1:
            chosen.append(i)
    return tuple(chosen)


def submatrix(M: Sequence[Sequence[int]], rows: Sequence[int], cols: Sequence[int]) -> IntMatrix:
    return tuple(tuple(M[i][j] for j in cols) for i in rows)


def adjugate(B: Sequence[Sequence[int]]) -> IntMatrix:
    """Integer adjugate: ``B @ adj(B) = det(B) * I``."""
    n = len(B)
    if n == 0:
        return ()
    if n == 1:
        return ((1,),)
    out = [[0] * n for _ in range(n)]
    idx = list(range(n))
    for i in range(n):
        for j in range(n):
            minor = submatrix(B, [r for r in idx if r != j], [c for c in idx if c != i])
            out[i][j] = (-1) ** (i + j) * det(minor)
    return tuple(tuple(r) for r in out)


def cramer_solve(B: Sequence[Sequence[int]], rhs: Sequence[int]) -> RatVector:
    """Solve ``B x = rhs`` exactly; ``x_i = det(B_i) / det(B)``."""
    n = len(B)
    if len(rhs) != n or any(len(r) != n for r in B):
        raise ShapeError("cramer_solve needs a square matrix and matching right-hand side")
    d = det(B)
    if d == 0:
        raise SingularMatrixError("matrix is singular")
    out = []
    for i in range(n):
        Bi = [list(r) for r in B]
        for k in range(n):
            Bi[k][i] = rhs[k]
        out.append(Fraction(det(Bi), d))
    return tuple(out)


def mat_vec(M: Sequence[Sequence[Fraction | int]], v: Sequence[Fraction | int]):
    return tuple(sum(a * x for a, x in zip(row, v)) for row in M)


# ---------------------------------------------------------------------------
# subdeterminant bound


@dataclass(frozen=True)
class DeltaBound:
    """Bound on the absolute values of all square subdeterminants.

    The empty minor counts, so ``value >= 1`` always.  ``exact`` marks the
    true maximum; otherwise ``value`` is the Hadamard-style upper bound.
    """

    value: int
    exact: bool

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "hadamard"


def matrix_norm(A: Sequence[Sequence[int]]) -> int:
    return max((abs(x) for r in A for x in r), default=0)


@lru_cache(maxsize=4096)
def _exact_delta(A: IntMatrix) -> int:
    l, n = shape(A)
    best = 1
    for k in range(1, min(l, n) + 1):
        for rows in itertools.combinations(range(l), k):
            for cols in itertools.combinations(range(n), k):
                best = max(best, abs(det(submatrix(A, rows, cols))))
    return best


def delta_bound(A: Sequence[Sequence[int]], mode: str = "exact", cap: int = DEFAULT_DELTA_CAP) -> DeltaBound:
    A = as_int_matrix(A)
    l, n = shape(A)
    k = min(l, n)
    if mode == "exact":
        if k > cap:
            raise ResourceLimitError(f"exact subdeterminant bound needs min(rows, cols) <= {cap}, got {k}", k)
        return DeltaBound(_exact_delta(A), True)
    if mode == "hadamard":
        return DeltaBound(max(1, (k * matrix_norm(A)) ** k), False)
    raise ValueError(f"unknown delta mode {mode!r}")


def delta_auto(A: Sequence[Sequence[int]], cap: int = DEFAULT_DELTA_CAP) -> DeltaBound:
    """Exact bound when within ``cap``, Hadamard otherwise."""
    A = as_int_matrix(A)
    if min(shape(A)) <= cap:
        return delta_bound(A, "exact", cap)
    return delta_bound(A, "hadamard")


# ---------------------------------------------------------------------------
# Fourier-Motzkin


Row = tuple[tuple[int, ...], int]  # (coefficients, rhs) for a.x <= rhs


def _dedupe(rows: Iterable[Row]) -> list[Row] | None:
    """Keep the tightest rhs per direction; ``None`` if a constant row fails.

    Rows are scaled to a primitive coefficient vector so parallel rows
    collide; a fractional rhs is cleared again on output.
    """
    best: dict[tuple[int, ...], Fraction] = {}
    for coeffs, rhs in rows:
        g = 0
        for c in coeffs:
            g = gcd(g, c)
        if g == 0:
            if rhs < 0:
                return None
            continue
        key = tuple(c // g for c in coeffs)
        val = Fraction(rhs, g)
        prior = best.get(key)
        if prior is None or val < prior:
            best[key] = val
    out = [
        (tuple(c * val.denominator for c in key) if val.denominator != 1 else key, val.numerator)
        for key, val in best.items()
    ]
    out.sort()
    return out


@dataclass(frozen=True)
class FMProjection:
    """Projection levels: ``levels[k]`` constrains only variables ``0..k-1``.

    ``levels[n]`` is the (normalized) input system; ``feasible`` is False when
    elimination derived a contradiction, in which case the levels are partial.
    """

    nvars: int
    levels: tuple[tuple[Row, ...], ...]
    feasible: bool

    def bounds(self, k: int, prefix: Sequence[Fraction | int]) -> tuple[Fraction | None, Fraction | None]:
        """Rational interval for variable ``k`` given values of variables ``0..k-1``."""
        lo: Fraction | None = None
        hi: Fraction | None = None
        for coeffs, rhs in self.levels[k + 1]:
            a = coeffs[k]
            if a == 0:
                continue
            rest = rhs - sum(coeffs[j] * prefix[j] for j in range(k))
            bound = Fraction(rest, 1) / a
            if a > 0:
                hi = bound if hi is None or bound < hi else hi
            else:
                lo = bound if lo is None or bound > lo else lo
        return lo, hi


def fm_project(A: Sequence[Sequence[int]], b: Sequence[int], cap: int = DEFAULT_FM_CAP) -> FMProjection:
    A = as_int_matrix(A)
    if len(A) != len(b):
        raise ShapeError("A and b disagree on the number of rows")
    n = len(A[0]) if A else 0
    rows = _dedupe(zip(A, (int(x) for x in b)))
    if rows is None:
        return FMProjection(n, (), False)
    levels: list[tuple[Row, ...]] = [tuple(rows)]
    current = rows
    for k in range(n - 1, -1, -1):
        pos = [r for r in current if r[0][k] > 0]
        neg = [r for r in current if r[0][k] < 0]
        new = [r for r in current if r[0][k] == 0]
        if len(new) + len(pos) * len(neg) > cap:
            raise ResourceLimitError(
                f"Fourier-Motzkin exceeds {cap} rows", len(new) + len(pos) * len(neg)
            )
        for pc, pr in pos:
            p = pc[k]
            for nc, nr in neg:
                q = -nc[k]
                new.append((tuple(q * x + p * y for x, y in zip(pc, nc)), q * pr + p * nr))
        deduped = _dedupe(new)
        if deduped is None:
            return FMProjection(n, (), False)
        current = deduped
        levels.append(tuple(current))
    return FMProjection(n, tuple(reversed(levels)), True)


@dataclass(frozen=True)
class FMResult:
    feasible: bool
    point: RatVector | None = None

    def __bool__(self) -> bool:
        return self.feasible


def _pick(lo: Fraction | None, hi: Fraction | None) -> Fraction:
    """A simple value in ``[lo, hi]``: an integer when one fits."""
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return Fraction(min(0, hi.__floor__()))
    if hi is None:
        return Fraction(max(0, lo.__ceil__()))
    if lo <= 0 <= hi:
        return Fraction(0)
    c = lo.__ceil__()
    return Fraction(c) if c <= hi else lo


def fm_feasible(A: Sequence[Sequence[int]], b: Sequence[int], cap: int = DEFAULT_FM_CAP) -> FMResult:
    """Rational feasibility of ``A x <= b`` with a sample point on success."""
    proj = fm_project(A, b, cap)
    if not proj.feasible:
        return FMResult(False)
    point: list[Fraction] = []
    for k in range(proj.nvars):
        lo, hi = proj.bounds(k, point)
        if lo is not None and hi is not None and lo > hi:  # pragma: no cover - FM guarantees this
            return FMResult(False)
        point.append(_pick(lo, hi))
    return FMResult(True, tuple(point))


def satisfies(A: Sequence[Sequence[int]], b: Sequence[int], x: Sequence[Fraction | int]) -> bool:
    return all(sum(a * v for a, v in zip(row, x)) <= bi for row, bi in zip(A, b))
