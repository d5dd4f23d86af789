"""Spectral curves, the boundary determinant identity, divisor splitting."""

import numpy as np
import pytest

from caloronkit.builders import divisor_fixture_j0, k1j0_data
from caloronkit.errors import NonConservationError
from caloronkit.nahmdata import A_coeffs
from caloronkit.polyalg import divisors_equal, intersect_curves, is_real_curve
from caloronkit.spectral import (
    assemble_normal_form,
    companion,
    curves_of,
    det_identity_residual,
    extract_FG,
    split_divisor_j0,
    split_divisor_jpos,
    tau_of_divisor,
)


class TestCurves:
    def test_k1j0_curves(self, k1j0):
        pair = curves_of(k1j0)
        assert pair.s0.eta_degree == 1
        assert pair.s1.eta_degree == 1
        assert is_real_curve(pair.s0) and is_real_curve(pair.s1)
        # zero small side: s0 is the zero section eta = 0
        assert np.allclose(pair.s0.eta_poly_at(0.37 + 0.1j),
                           [0.0, 1.0], atol=1e-12)

    def test_j1_curves(self, j1data):
        pair = curves_of(j1data)
        assert pair.s0.eta_degree == 1
        assert pair.s1.eta_degree == 2
        assert is_real_curve(pair.s1, 1e-6)

    def test_drifting_data_rejected(self):
        data = k1j0_data()
        data.large.T1 = data.large.T1.copy()
        data.large.T1[20] += 0.05j
        with pytest.raises(NonConservationError):
            curves_of(data)


class TestNormalForm:
    def test_companion_characteristic_polynomial(self, rng):
        p = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        want = np.concatenate([[1.0], p])
        assert np.allclose(np.poly(companion(p)), want, atol=1e-12)

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_det_identity_exact_for_assembled_blocks(self, j, rng):
        k = 2
        A0 = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        F = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        G = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        p = rng.standard_normal(j) + 1j * rng.standard_normal(j)
        A1 = assemble_normal_form(A0, F, G, p)
        for _ in range(10):
            eta = rng.standard_normal() + 1j * rng.standard_normal()
            assert det_identity_residual(A1, A0, F, G, p, eta) < 1e-12


class TestBoundaryFactors:
    def test_extracted_factors_satisfy_det_identity(self, j1data, rng):
        factors = extract_FG(j1data)
        d = j1data
        a1c = A_coeffs(d.large.T1[-1], d.large.T2[-1], d.large.T3[-1])
        a0c = A_coeffs(d.small.T1[0], d.small.T2[0], d.small.T3[0])
        for _ in range(20):
            zeta = rng.standard_normal() + 1j * rng.standard_normal()
            eta = rng.standard_normal() + 1j * rng.standard_normal()
            A1 = a1c[0] + zeta * a1c[1] + zeta**2 * a1c[2]
            A0 = a0c[0] + zeta * a0c[1] + zeta**2 * a0c[2]
            r = det_identity_residual(A1, A0, factors.F_at(zeta),
                                      factors.G_at(zeta),
                                      factors.p_at(zeta), eta)
            assert r < 1e-8

    def test_factor_degrees(self, j1data):
        factors = extract_FG(j1data)
        assert factors.F.shape[1] == 1
        assert factors.G.shape[1] == 1
        assert len(factors.p) == 1


class TestDivisorSplitting:
    def test_j0_k1_split(self, k1j0):
        b = k1j0.boundary_plus
        small0 = A_coeffs(k1j0.small.T1[0], k1j0.small.T2[0], k1j0.small.T3[0])
        s0, s1, split = split_divisor_j0(small0, b.alpha0, b.alpha1)
        assert split.total.total_multiplicity == 2
        assert split.D.total_multiplicity == 1
        assert divisors_equal(tau_of_divisor(split.D), split.Dprime, 1e-6)
        assert divisors_equal(split.total, intersect_curves(s0, s1), 1e-6)

    def test_j0_k2_split(self):
        T1, T2, T3, a0, a1 = divisor_fixture_j0(k=2, seed=0)
        s0, s1, split = split_divisor_j0(A_coeffs(T1, T2, T3), a0, a1)
        assert split.total.total_multiplicity == 8
        assert split.D.total_multiplicity == 4
        assert divisors_equal(tau_of_divisor(split.D), split.Dprime, 1e-6)
        assert divisors_equal(split.total, intersect_curves(s0, s1), 1e-6)

    def test_jpos_split(self, j1data):
        factors = extract_FG(j1data)
        d = j1data
        small0 = A_coeffs(d.small.T1[0], d.small.T2[0], d.small.T3[0])
        large_end = A_coeffs(d.large.T1[-1], d.large.T2[-1], d.large.T3[-1])
        s0, s1, split = split_divisor_jpos(small0, large_end, factors)
        assert split.total.total_multiplicity == 4
        assert split.D.total_multiplicity == 2
        assert divisors_equal(tau_of_divisor(split.D), split.Dprime, 1e-6)
        assert divisors_equal(split.total, intersect_curves(s0, s1), 1e-6)

    def test_split_is_seed_stable(self):
        # the assignment must not depend on numerical jitter of the fixture
        for seed in (1, 2, 3):
            T1, T2, T3, a0, a1 = divisor_fixture_j0(k=2, seed=seed)
            _, _, split = split_divisor_j0(A_coeffs(T1, T2, T3), a0, a1)
            assert split.D.total_multiplicity == 4
            assert divisors_equal(tau_of_divisor(split.D), split.Dprime, 1e-6)
