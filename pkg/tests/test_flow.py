"""Interval integration, series starts at poles, and the circle re-flow."""

import numpy as np
import pytest

from caloronkit.builders import (
    k1j0_data,
    pole_data,
    random_skew,
    su2_residues,
)
from caloronkit.errors import (
    InvariantError,
    MatchingError,
    SingularityHitError,
)
from caloronkit.flow import (
    HAVE_COMPILED,
    FlowConfig,
    embed_residues,
    flow_circle,
    frobenius_start,
    integrate_interval,
    kernel,
    nahm_rhs,
)
from caloronkit.nahmdata import A_coeffs, validate
from caloronkit.polyalg import char_poly_eta


def _random_initial(d, rng, scale=0.4):
    zero = np.zeros((d, d), dtype=complex)
    return (zero,) + tuple(random_skew(d, rng, scale) for _ in range(3))


class TestRhs:
    def test_scalar_flow_is_stationary(self):
        out = nahm_rhs(*(np.array([[z]]) for z in (0.0, 1.0, 2j, -0.5)))
        assert all(np.linalg.norm(m) == 0.0 for m in out)

    def test_cyclic_structure(self, rng):
        T = [random_skew(3, rng) for _ in range(4)]
        d1, d2, d3 = nahm_rhs(*T)
        comm = lambda a, b: a @ b - b @ a
        assert np.allclose(d2, comm(T[3], T[1]) - comm(T[0], T[2]), atol=1e-12)
        assert np.allclose(d3, comm(T[1], T[2]) - comm(T[0], T[3]), atol=1e-12)

    def test_preserves_skew_hermiticity(self, rng):
        T = [random_skew(3, rng) for _ in range(4)]
        for m in nahm_rhs(*T):
            assert np.linalg.norm(m + m.conj().T) < 1e-12


class TestResidues:
    @pytest.mark.parametrize("j", [1, 2, 3, 5])
    def test_su2_relations(self, j):
        R = su2_residues(j)
        for i in range(3):
            a, b = R[(i + 1) % 3], R[(i + 2) % 3]
            assert np.linalg.norm(R[i] + a @ b - b @ a) < 1e-12
            assert np.linalg.norm(R[i] + R[i].conj().T) < 1e-12


class TestIntegration:
    def test_lax_conservation_quick(self, rng):
        init = _random_initial(2, rng)
        sol = integrate_interval(init, (0.5, 1.5),
                                 FlowConfig(steps_per_interval=500))
        c0 = char_poly_eta(A_coeffs(sol.T1[0], sol.T2[0], sol.T3[0]))
        c1 = char_poly_eta(A_coeffs(sol.T1[-1], sol.T2[-1], sol.T3[-1]))
        scale = max(max(np.max(np.abs(c)) for c in c0.coeffs), 1.0)
        drift = max(np.max(np.abs(a - b))
                    for a, b in zip(c0.coeffs, c1.coeffs))
        assert drift / scale < 1e-6

    @pytest.mark.skipif(not HAVE_COMPILED, reason="no compiled kernel built")
    def test_compiled_and_fallback_kernels_agree(self, rng):
        init = _random_initial(3, rng)
        a = integrate_interval(init, (0.0, 1.0), compiled=True)
        b = integrate_interval(init, (0.0, 1.0), compiled=False)
        assert np.allclose(a.T1, b.T1, atol=1e-12)
        assert np.allclose(a.T2, b.T2, atol=1e-12)
        assert np.allclose(a.T3, b.T3, atol=1e-12)
        assert kernel(True) is not kernel(False)

    def test_fourth_order_convergence(self, rng):
        init = _random_initial(2, rng, scale=0.4)
        ref = integrate_interval(init, (0.0, 1.0),
                                 FlowConfig(steps_per_interval=4096))
        errs = []
        for steps in (64, 128):
            sol = integrate_interval(init, (0.0, 1.0),
                                     FlowConfig(steps_per_interval=steps))
            errs.append(np.linalg.norm(sol.T1[-1] - ref.T1[-1]))
        order = np.log2(errs[0] / errs[1])
        assert order > 3.5

    def test_pole_blowup_detected(self):
        R = su2_residues(2)
        # T_i = -R_i / (1 - z) solves the flow and blows up at z = 1
        init = (np.zeros((2, 2)), -R[0], -R[1], -R[2])
        with pytest.raises(SingularityHitError) as exc:
            integrate_interval(init, (0.0, 2.0),
                               FlowConfig(steps_per_interval=2000))
        assert abs(exc.value.z - 1.0) < 0.05

    def test_interval_must_be_ordered(self, rng):
        with pytest.raises(InvariantError):
            integrate_interval(_random_initial(2, rng), (1.0, 0.5))


class TestFrobenius:
    def test_zero_seed_reproduces_pure_pole(self):
        pole = pole_data(1, 2)
        res = embed_residues(pole, 1)
        T = frobenius_start(pole, None, 0.1, k=1)
        for i in range(3):
            assert np.linalg.norm(T[i + 1] - res[i] / 0.1) < 1e-12

    def test_series_satisfies_flow_equations(self, rng):
        pole = pole_data(1, 2)
        seed = rng.standard_normal((3, 3, 3)) * 0.2
        eps, h = 0.2, 1e-3
        Tm = frobenius_start(pole, seed, eps - h, k=1)
        T0 = frobenius_start(pole, seed, eps, k=1)
        Tp = frobenius_start(pole, seed, eps + h, k=1)
        want = nahm_rhs(*T0)
        for i in range(3):
            num = (Tp[i + 1] - Tm[i + 1]) / (2 * h)
            # tolerance dominated by the finite-difference truncation of
            # the steep pole profile, not by the series itself
            assert np.linalg.norm(num - want[i]) < 2e-3

    def test_pure_pole_is_direction_independent(self):
        # with no seed the series truncates to R/zhat from either end
        pole = pole_data(1, 2)
        res = embed_residues(pole, 1)
        T = frobenius_start(pole, None, 0.05, k=1, direction=-1)
        for i in range(3):
            assert np.linalg.norm(T[i + 1] - res[i] / 0.05) < 1e-12


class TestFlowCircle:
    def test_k1j0_round_trip_preserves_data(self, k1j0):
        out = flow_circle(k1j0)
        assert validate(out).ok
        assert np.max(np.abs(out.large.T1 - k1j0.large.T1)) < 1e-9
        assert np.max(np.abs(out.small.T3 - k1j0.small.T3)) < 1e-9

    def test_j1_round_trip(self, j1data):
        out = flow_circle(j1data)
        assert validate(out).ok
        assert np.max(np.abs(out.large.T3 - j1data.large.T3)) < 1e-5

    def test_tampered_jump_rejected(self):
        data = k1j0_data()
        data.boundary_plus.alpha0 = data.boundary_plus.alpha0 * 2
        with pytest.raises(MatchingError):
            flow_circle(data)


class TestConfig:
    def test_rejects_bad_parameters(self):
        with pytest.raises(InvariantError):
            FlowConfig(steps_per_interval=4)
        with pytest.raises(InvariantError):
            FlowConfig(pole_offset=-1.0)
        with pytest.raises(InvariantError):
            FlowConfig(gauge="SOMETHING")
