"""Matrix helpers, bivariate polynomials, and curve intersections."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caloronkit.builders import random_skew
from caloronkit.errors import RankError
from caloronkit.nahmdata import A_coeffs
from caloronkit.polyalg import (
    BiPoly,
    Point,
    PointDivisor,
    char_poly_eta,
    classical_adjoint,
    divisors_equal,
    intersect_curves,
    is_real_curve,
    rank_one_factor,
    tau_point,
)


def _random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


class TestClassicalAdjoint:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=10**6))
    def test_defining_identity(self, n, seed):
        m = _random_matrix(np.random.default_rng(seed), n)
        adj = classical_adjoint(m)
        det = np.linalg.det(m)
        assert np.allclose(adj @ m, det * np.eye(n), atol=1e-8 * max(abs(det), 1.0))
        assert np.allclose(m @ adj, det * np.eye(n), atol=1e-8 * max(abs(det), 1.0))

    def test_rank_one_at_corank_one(self, rng):
        # a corank-one matrix has a rank-one adjoint
        u = _random_matrix(rng, 3)
        m = u @ np.diag([2.0, 1.0, 0.0]) @ np.linalg.inv(u)
        adj = classical_adjoint(m)
        s = np.linalg.svd(adj, compute_uv=False)
        assert s[1] < 1e-10 * s[0]
        assert np.linalg.norm(adj @ m) < 1e-10


class TestRankOneFactor:
    def test_recovers_outer_product(self, rng):
        u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        a, b = rank_one_factor(np.outer(u, v))
        assert np.allclose(a @ b, np.outer(u, v), atol=1e-12)

    def test_rejects_rank_two(self):
        with pytest.raises(RankError):
            rank_one_factor(np.eye(2))

    def test_zero_matrix(self):
        a, b = rank_one_factor(np.zeros((2, 3)))
        assert np.linalg.norm(a) == 0.0 and np.linalg.norm(b) == 0.0


class TestBiPoly:
    def test_char_poly_matches_determinant(self, rng):
        T = [random_skew(3, rng) for _ in range(3)]
        coeffs = A_coeffs(*T)
        s = char_poly_eta(coeffs)
        assert s.eta_degree == 3 and s.is_monic()
        for _ in range(10):
            zeta = rng.standard_normal() + 1j * rng.standard_normal()
            eta = rng.standard_normal() + 1j * rng.standard_normal()
            a = coeffs[0] + zeta * coeffs[1] + zeta**2 * coeffs[2]
            want = np.linalg.det(eta * np.eye(3) - a)
            assert abs(s(zeta, eta) - want) < 1e-8 * max(abs(want), 1.0)

    def test_other_chart_transition(self, rng):
        T = [random_skew(2, rng) for _ in range(3)]
        s = char_poly_eta(A_coeffs(*T))
        st_ = s.other_chart()
        k = s.eta_degree
        for zeta in (0.7 + 0.1j, -1.3, 2.0j):
            eta = 0.4 - 0.2j
            lhs = st_(1.0 / zeta, eta / zeta**2)
            rhs = s(zeta, eta) / zeta ** (2 * k)
            assert abs(lhs - rhs) < 1e-9 * max(abs(rhs), 1.0)

    def test_other_chart_is_involution(self, rng):
        T = [random_skew(2, rng) for _ in range(3)]
        s = char_poly_eta(A_coeffs(*T))
        back = s.other_chart().other_chart()
        for a, b in zip(s.coeffs, back.coeffs):
            n = max(a.size, b.size)
            pa = np.zeros(n, complex); pa[:a.size] = a
            pb = np.zeros(n, complex); pb[:b.size] = b
            assert np.allclose(pa, pb, atol=1e-12)

    def test_reality_for_skew_hermitian_pencils(self, rng):
        T = [random_skew(3, rng) for _ in range(3)]
        s = char_poly_eta(A_coeffs(*T))
        assert is_real_curve(s, 1e-8)
        broken = BiPoly([c.copy() for c in s.coeffs])
        broken.coeffs[0] = broken.coeffs[0] + 0.1
        assert not is_real_curve(broken, 1e-8)

    def test_json_round_trip(self, rng):
        T = [random_skew(2, rng) for _ in range(3)]
        s = char_poly_eta(A_coeffs(*T))
        back = BiPoly.from_json(s.to_json())
        assert back.eta_degree == s.eta_degree
        assert abs(back(0.3, 0.5j) - s(0.3, 0.5j)) < 1e-12


class TestTau:
    def test_point_involution(self):
        p = Point(0.4 - 0.3j, 1.2 + 0.1j, mult=2, chart=0)
        q = tau_point(tau_point(p))
        assert q.chart == p.chart and q.mult == p.mult
        assert abs(q.zeta - p.zeta) < 1e-15
        assert abs(q.eta - p.eta) < 1e-15

    def test_pair_form_matches_point_form(self):
        zeta, eta = 0.4 - 0.3j, 1.2 + 0.1j
        zp, ep = tau_point((zeta, eta))
        q = tau_point(Point(zeta, eta)).to_chart(0)
        assert abs(q.zeta - zp) < 1e-12
        assert abs(q.eta - ep) < 1e-12


class TestIntersection:
    def test_two_lines_on_the_eta_fiber(self):
        # s0: eta = (zeta - 0.3)(zeta + 0.5), s1: eta = 0
        s0 = BiPoly([np.array([0.15, -0.2, -1.0]), np.array([1.0])])
        s1 = BiPoly([np.array([0.0]), np.array([1.0])])
        d = intersect_curves(s0, s1)
        assert d.total_multiplicity == 2
        zs = sorted(p.zeta.real for p in d)
        assert zs == pytest.approx([-0.5, 0.3], abs=1e-6)
        assert all(abs(p.eta) < 1e-6 for p in d)

    def test_double_point_multiplicity(self):
        # s0: eta = (zeta - 0.3)**2 meets eta = 0 with multiplicity 2
        s0 = BiPoly([np.array([-0.09, 0.6, -1.0]), np.array([1.0])])
        s1 = BiPoly([np.array([0.0]), np.array([1.0])])
        d = intersect_curves(s0, s1)
        assert d.total_multiplicity == 2
        assert len(d) == 1
        assert d.points[0].zeta == pytest.approx(0.3, abs=1e-4)

    def test_bezout_count_for_pencil_curves(self, rng):
        s0 = char_poly_eta(A_coeffs(*[random_skew(1, rng) for _ in range(3)]))
        s1 = char_poly_eta(A_coeffs(*[random_skew(2, rng) for _ in range(3)]))
        d = intersect_curves(s0, s1)
        assert d.total_multiplicity == 2 * 1 * 2


class TestDivisors:
    def test_multiset_equality(self):
        a = PointDivisor([Point(0.1, 0.2, 2), Point(0.5j, 1.0, 1)])
        b = PointDivisor([Point(0.5j, 1.0, 1), Point(0.1, 0.2, 1),
                          Point(0.1, 0.2, 1)])
        assert divisors_equal(a, b)
        assert not divisors_equal(a, PointDivisor([Point(0.1, 0.2, 3)]))

    def test_addition_concatenates(self):
        a = PointDivisor([Point(0.0, 0.0, 1)])
        b = PointDivisor([Point(1.0, 1.0, 2)])
        assert (a + b).total_multiplicity == 3
