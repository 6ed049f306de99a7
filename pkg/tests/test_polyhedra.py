import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import box_feasible_rhs, in_cone, integrally_feasible, max_subdeterminant, rand_matrix, rhs_grid, satisfies
from presqe.errors import NoIntegralSolutionError, NotInConeError, PreconditionError, ResourceLimitError
from presqe.linalg import rank
from presqe.polyhedra import (
    caratheodory_decompose,
    cone_generators,
    enumerate_witness_candidates,
    find_integral_point,
    integral_close,
    minimal_face_solution,
    witness_for,
)


def matrices(max_rows=3, max_cols=3, bound=2):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c), min_size=r, max_size=r).map(
                lambda rows: tuple(map(tuple, rows))
            )
        )
    )


def coverage(A, family, lo=-5, hi=5):
    """Mismatches between witness coverage and true integral feasibility over the rhs box."""
    ell, n = len(A), len(A[0])
    grid = rhs_grid(ell, lo, hi)
    hit = box_feasible_rhs(A, lo, hi)
    cands = enumerate_witness_candidates(A, n, family=family)
    bad = []
    for i, b in enumerate(grid.tolist()):
        covered = any(w.validates(A, b) for w in cands)
        if covered != integrally_feasible(A, b, bool(hit[i])):
            bad.append(b)
    return bad


class TestMinimalFace:
    def test_interval(self):
        face = minimal_face_solution([[1], [-1]], [3, -1])
        assert face.E == ((1, 0),) and face.a == 1
        assert face.point([3, -1]) == (3,)

    def test_single_row(self):
        assert minimal_face_solution([[1]], [0]).point([0]) == (0,)

    def test_zero_matrix(self):
        face = minimal_face_solution([[0]], [2])
        assert face.a == 1 and face.point([2]) == (0,)
        assert minimal_face_solution([[0]], [-2]) is None

    def test_infeasible(self):
        assert minimal_face_solution([[1], [-1]], [1, -2]) is None

    @settings(max_examples=150, deadline=None)
    @given(matrices(), st.lists(st.integers(-5, 5), min_size=3, max_size=3))
    def test_bounds_and_face(self, A, b):
        b = b[: len(A)]
        face = minimal_face_solution(A, b)
        if face is None:
            return
        delta = max_subdeterminant(A)
        x = face.point(b)
        assert satisfies(A, b, x)
        assert abs(face.a) <= delta
        assert max(abs(e) for row in face.E for e in row) <= delta
        tight = [A[i] for i in face.row_subset]
        assert rank(tight) == rank(A)


class TestCones:
    def test_orthant(self):
        gens = cone_generators([[-1, 0], [0, -1]])
        assert set(gens.rays) == {(1, 0), (0, 1)} and gens.lineality == ()

    def test_half_line(self):
        assert cone_generators([[1]]).rays == ((-1,),)

    def test_line(self):
        gens = cone_generators([[1, -1], [-1, 1]])
        assert gens.lineality == ((1, 1),)
        assert set(gens.all()) == {(1, 1), (-1, -1)}

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_bounds_and_both_inclusions(self, A):
        n = len(A[0])
        gens = cone_generators(A, n)
        delta = max_subdeterminant(A)
        An = np.array(A)
        for g in gens.rays:
            assert (An @ np.array(g) <= 0).all() and max(map(abs, g)) <= delta
        for z in gens.lineality:
            assert not (An @ np.array(z)).any() and max(map(abs, z)) <= delta
        for v in itertools.product(range(-3, 4), repeat=n):
            if (An @ np.array(v) <= 0).all():
                assert in_cone(gens.all(), v)


class TestCaratheodory:
    def test_axes(self):
        assert caratheodory_decompose([(1, 0), (0, 1)], (2, 3)) == [(2, (1, 0)), (3, (0, 1))]

    def test_redundant_generators(self):
        parts = caratheodory_decompose([(1, 0), (0, 1), (1, 1)], (1, 1))
        total = tuple(sum(lam * g[i] for lam, g in parts) for i in range(2))
        assert total == (1, 1) and all(lam >= 0 for lam, _ in parts)
        assert rank([g for _, g in parts]) == len(parts)

    def test_zero(self):
        assert caratheodory_decompose([(1, 0)], (0, 0)) == []

    def test_not_in_cone(self):
        with pytest.raises(NotInConeError):
            caratheodory_decompose([(1, 0)], (-1, 0))

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.tuples(*[st.integers(-2, 2)] * 3), min_size=1, max_size=5),
        st.lists(st.integers(0, 3), min_size=5, max_size=5),
    )
    def test_reconstructs(self, gens, coeffs):
        v = tuple(sum(c * g[i] for c, g in zip(coeffs, gens)) for i in range(3))
        parts = caratheodory_decompose(gens, v)
        assert tuple(sum(lam * g[i] for lam, g in parts) for i in range(3)) == v
        assert all(lam >= 0 for lam, _ in parts)
        assert len(parts) <= 3 and rank([g for _, g in parts] or [[0, 0, 0]]) == len(parts)


class TestIntegralClose:
    def test_interval(self):
        z = integral_close([[1], [-1]], [3, -1], [Fraction(3, 2)], [3])
        assert z[0] in (1, 2)

    def test_integral_r(self):
        assert integral_close([[1], [-1]], [3, -1], [2], [3]) == (2,)

    def test_r_equals_z(self):
        assert integral_close([[1, 1]], [4], [1, 1], [1, 1]) == (1, 1)

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            integral_close([[1]], [0], [Fraction(1, 2)], [0])

    def test_brute_force_interval(self):
        # every integral point of [1, 3] is reachable; the rounding stays within n * delta
        for r in (Fraction(1), Fraction(4, 3), Fraction(5, 2), Fraction(3)):
            for z in (1, 2, 3):
                (zs,) = integral_close([[1], [-1]], [3, -1], [r], [z])
                assert 1 <= zs <= 3 and abs(zs - r) <= 1


class TestWitness:
    def test_interval(self):
        w = witness_for([[1], [-1]], [3, -1])
        assert w.D.entries == ((1, 0),)
        x = w.apply([3, -1])
        assert x[0] in (1, 2, 3) and w.validates([[1], [-1]], [3, -1])

    def test_no_integral_solution(self):
        with pytest.raises(NoIntegralSolutionError):
            witness_for([[2], [-2]], [3, -3])

    def test_rationally_infeasible(self):
        with pytest.raises(NoIntegralSolutionError):
            witness_for([[1], [-1]], [0, -1])

    def test_zero_matrix(self):
        w = witness_for([[0]], [0])
        assert w.D.entries == ((0,),) and w.d == (0,)

    @settings(max_examples=100, deadline=None)
    @given(matrices(), st.lists(st.integers(-4, 4), min_size=3, max_size=3))
    def test_bounds(self, A, b):
        b = b[: len(A)]
        n = len(A[0])
        try:
            w = witness_for(A, b)
        except NoIntegralSolutionError:
            assert not integrally_feasible(A, b, False)
            return
        delta = max_subdeterminant(A)
        assert w.validates(A, b)
        assert w.ratnorm_D() <= delta and w.ratnorm_d() <= n * delta * delta

    def test_find_integral_point(self):
        assert find_integral_point([[2], [-2]], [3, -3], 10) is None
        z = find_integral_point([[1, 1], [-1, 0], [0, -1]], [3, -1, -1], 10)
        assert z is not None and satisfies([[1, 1], [-1, 0], [0, -1]], [3, -1, -1], z)


class TestEnumeration:
    def test_interval_parallelepiped(self):
        cands = enumerate_witness_candidates([[1], [-1]])
        assert {w.D.entries for w in cands} == {((1, 0),), ((0, -1),)}
        assert coverage(((1,), (-1,)), "parallelepiped") == []

    def test_interval_box(self):
        cands = enumerate_witness_candidates([[1], [-1]], family="box")
        assert {w.d for w in cands} == {(-1,), (0,), (1,)}
        assert coverage(((1,), (-1,)), "box") == []

    def test_zero_matrix(self):
        (w,) = enumerate_witness_candidates([[0]])
        assert w.D.entries == ((0,),) and w.d == (0,)

    def test_denominators(self):
        cands = enumerate_witness_candidates([[2], [-1]], family="box")
        assert {x.denominator for w in cands for x in w.d} <= {1, 2}
        assert max(abs(x.numerator) for w in cands for x in w.d) <= 4
        assert coverage(((2,), (-1,)), "box", -6, 6) == []
        assert coverage(((2,), (-1,)), "parallelepiped", -6, 6) == []

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            enumerate_witness_candidates([[2, 1, 1], [1, 2, 1], [1, 1, 2]], family="box", cap=10)

    def test_parallelepiped_subset_of_box(self):
        rng = random.Random(11)
        for _ in range(30):
            A = rand_matrix(rng, rng.randint(1, 2), rng.randint(1, 2))
            par = {(w.D.entries, w.d) for w in enumerate_witness_candidates(A)}
            box = {(w.D.entries, w.d) for w in enumerate_witness_candidates(A, family="box")}
            assert par <= box

    @settings(max_examples=40, deadline=None)
    @given(matrices(2, 2))
    def test_box_family_complete(self, A):
        assert coverage(A, "box", -4, 4) == []
