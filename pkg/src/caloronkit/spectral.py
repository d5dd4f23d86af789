"""Spectral curves, the boundary determinant identity, and divisor splitting.

The characteristic polynomial of the quadratic pencil A(zeta, z) is
z-independent along each interval, producing two curves: s0 of eta-degree
k from the small interval, s1 of degree k+j from the large one.  Their
intersection splits into two halves D and D', cut out by the vanishing of
the two scalar factors of F . adj(eta - A0) . G at each corank-one point,
and exchanged by the antiholomorphic involution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegeneracyError,
    DimensionError,
    InconsistencyError,
    InvariantError,
    NonConservationError,
    NonGenericError,
)
from .nahmdata import A_coeffs, NahmData
from .polyalg import (
    BiPoly,
    Point,
    PointDivisor,
    char_poly_eta,
    classical_adjoint,
    intersect_curves,
    is_real_curve,
    rank_one_factor,
    tau_point,
)


@dataclass
class SpectralPair:
    s0: BiPoly
    s1: BiPoly

    def to_json(self):
        return {"s0": self.s0.to_json(), "s1": self.s1.to_json()}


@dataclass
class DivisorSplit:
    D: PointDivisor = field(default_factory=PointDivisor)
    Dprime: PointDivisor = field(default_factory=PointDivisor)

    @property
    def total(self):
        return self.D + self.Dprime

    def to_json(self):
        return {"D": self.D.to_json(), "Dprime": self.Dprime.to_json()}


def _curve_drift(sol, samples=5):
    """Max relative coefficient drift of the curve along an interval."""
    idx = np.linspace(0, sol.z.size - 1, samples).astype(int)
    curves = [char_poly_eta(A_coeffs(sol.T1[i], sol.T2[i], sol.T3[i]))
              for i in idx]
    base = curves[0]
    scale = max(max(np.max(np.abs(c)) for c in base.coeffs), 1.0)
    drift = 0.0
    for other in curves[1:]:
        if other.eta_degree != base.eta_degree:
            return np.inf, base
        for cb, co in zip(base.coeffs, other.coeffs):
            n = max(cb.size, co.size)
            a = np.zeros(n, complex); a[:cb.size] = cb
            b = np.zeros(n, complex); b[:co.size] = co
            drift = max(drift, float(np.max(np.abs(a - b))) / scale)
    return drift, curves[len(curves) // 2]


def curves_of(data: NahmData, tol=1e-6, check_real=True):
    """The two spectral curves, with z-independence asserted."""
    drift1, s1 = _curve_drift(data.large)
    drift0, s0 = _curve_drift(data.small)
    if max(drift0, drift1) > tol:
        raise NonConservationError(
            f"curve coefficients drift along the interval "
            f"(small {drift0:.3e}, large {drift1:.3e}, tol {tol:.1e})")
    for s, k in ((s0, data.profile.k), (s1, data.profile.k + data.profile.j)):
        if s.eta_degree != k or not s.is_monic(1e-8):
            raise InvariantError("curve degree/monicity violated")
        if check_real and not is_real_curve(s, max(tol, 1e-6)):
            raise InvariantError("curve fails the reality constraint")
    return SpectralPair(s0=s0, s1=s1)


# ---------------------------------------------------------------------------
# divisor splitting
# ---------------------------------------------------------------------------

def _chart_family(coeffs):
    a0, a1, a2 = coeffs
    return {0: (a0, a1, a2), 1: (a2, a1, a0)}


def _eval_family(fam, zeta):
    a0, a1, a2 = fam
    return a0 + zeta * a1 + zeta * zeta * a2


def _split(points, A0_charts, left_fun, right_fun, tol):
    """Assign intersection points to D / D' by the smaller scalar factor."""
    D, Dp = [], []
    assign_tol = max(np.sqrt(tol), 1e-5)
    # typical factor magnitudes on the unit circle, for scale-invariant tests
    ref = np.exp(2j * np.pi * np.arange(8) / 8)
    fscale = {c: max(max(float(np.linalg.norm(np.atleast_1d(left_fun(z, c))))
                         for z in ref), 1e-300) for c in (0, 1)}
    gscale = {c: max(max(float(np.linalg.norm(np.atleast_1d(right_fun(z, c))))
                         for z in ref), 1e-300) for c in (0, 1)}
    for p in points:
        M = p.eta * np.eye(A0_charts[0][0].shape[0]) \
            - _eval_family(A0_charts[p.chart], p.zeta)
        if M.shape[0] == 1:
            u = np.array([[1.0 + 0j]])
            v = np.array([[1.0 + 0j]])
        else:
            s = np.linalg.svd(M, compute_uv=False)
            if s.size > 1 and s[-2] < 1e-6 * max(s[0], 1.0):
                raise NonGenericError(
                    f"corank >= 2 at zeta={p.zeta:.4g}, eta={p.eta:.4g}")
            adj = classical_adjoint(M)
            u, v = rank_one_factor(adj, tol=1e-6)
        f = np.atleast_1d(left_fun(p.zeta, p.chart))
        g = np.atleast_1d(right_fun(p.zeta, p.chart))
        nu = float(np.linalg.norm(u)) or 1.0
        nv = float(np.linalg.norm(v)) or 1.0
        su = abs(f @ u[:, 0]) / (fscale[p.chart] * nu)
        sv = abs(v[0, :] @ g) / (nv * gscale[p.chart])
        if min(su, sv) > assign_tol:
            raise InconsistencyError(
                f"neither defining scalar vanishes at zeta={p.zeta:.4g}, "
                f"eta={p.eta:.4g} (|F.U|={su:.2e}, |V.G|={sv:.2e})")
        (D if su <= sv else Dp).append(Point(p.zeta, p.eta, p.mult, p.chart))
    return DivisorSplit(D=PointDivisor(D), Dprime=PointDivisor(Dp))


def split_divisor_j0(A_small_coeffs, alpha0, alpha1, tol=1e-9):
    """Split the curve intersection for rank-one jump data (j = 0).

    ``A_small_coeffs`` are the three zeta-coefficients of the small-side
    pencil at the boundary; the large-side pencil is its rank-one
    modification by (alpha0 + alpha1 zeta)(conj(alpha1) - conj(alpha0) zeta)^T.
    A point joins D when the row factor annihilates the left rank-one
    direction of the adjoint, D' when the column factor annihilates the
    right one.
    """
    a0c = [np.asarray(c, dtype=complex) for c in A_small_coeffs]
    alpha0 = np.asarray(alpha0, dtype=complex).ravel()
    alpha1 = np.asarray(alpha1, dtype=complex).ravel()
    if a0c[0].shape[0] != alpha0.size:
        raise DimensionError("jump vectors must match the matrix size")
    jump = (np.outer(alpha0, np.conj(alpha1)),
            np.outer(alpha1, np.conj(alpha1)) - np.outer(alpha0, np.conj(alpha0)),
            -np.outer(alpha1, np.conj(alpha0)))
    a1c = [a + d for a, d in zip(a0c, jump)]
    s0 = char_poly_eta(a0c)
    s1 = char_poly_eta(a1c)
    points = intersect_curves(s0, s1, tol=tol)

    def left(z, chart):   # row factor: x(zeta)
        if chart == 0:
            return np.conj(alpha1) - np.conj(alpha0) * z
        return -np.conj(alpha0) + np.conj(alpha1) * z

    def right(z, chart):  # column factor: w(zeta)
        if chart == 0:
            return alpha0 + alpha1 * z
        return alpha1 + alpha0 * z

    split = _split(points, _chart_family(a0c), left, right, tol)
    return s0, s1, split


# ---------------------------------------------------------------------------
# boundary normal form: F, G extraction and the determinant identity
# ---------------------------------------------------------------------------

def companion(p):
    """Companion matrix of eta**j + p[0] eta**(j-1) + ... + p[-1]."""
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    j = p.size
    C = np.zeros((j, j), dtype=complex)
    if j > 1:
        C[np.arange(1, j), np.arange(j - 1)] = 1.0
    C[:, -1] = -p[::-1]
    return C


def assemble_normal_form(A0, F, G, p):
    """The (k+j)-size boundary matrix with blocks A0, (0 G), (F; 0), C(p)."""
    A0 = np.asarray(A0, dtype=complex)
    F = np.atleast_1d(np.asarray(F, dtype=complex)).ravel()
    G = np.atleast_1d(np.asarray(G, dtype=complex)).ravel()
    p = np.atleast_1d(np.asarray(p, dtype=complex)).ravel()
    k, j = A0.shape[0], p.size
    out = np.zeros((k + j, k + j), dtype=complex)
    out[:k, :k] = A0
    out[:k, -1] = G
    out[k, :k] = F
    out[k:, k:] = companion(p)
    return out


def det_identity_residual(A1, A0, F, G, p, eta):
    """Relative defect of det(eta-A1) = det(eta-A0) p^(eta) - F adj(eta-A0) G."""
    A1 = np.asarray(A1, dtype=complex)
    A0 = np.asarray(A0, dtype=complex)
    k = A0.shape[0]
    j = A1.shape[0] - k
    M = eta * np.eye(k) - A0
    phat = eta**j + sum(np.atleast_1d(p)[i] * eta**(j - 1 - i) for i in range(j))
    lhs = np.linalg.det(eta * np.eye(k + j) - A1)
    rhs = np.linalg.det(M) * phat \
        - np.atleast_1d(F) @ classical_adjoint(M) @ np.atleast_1d(G)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return abs(lhs - rhs) / scale


@dataclass
class BoundaryFactors:
    """Polynomials (ascending zeta coefficients) of the boundary normal form."""

    F: np.ndarray            # (degF + 1, k) row coefficients
    G: np.ndarray            # (degG + 1, k) column coefficients
    p: list                  # j arrays, coefficients of p_1 .. p_j
    A0: tuple = None         # pencil coefficients of the top-left block

    def _padded(self, coeffs, degree):
        out = np.zeros((degree + 1,) + coeffs.shape[1:], dtype=complex)
        out[: coeffs.shape[0]] = coeffs
        return out

    def F_at(self, zeta, chart=0):
        # in the infinity chart the row block carries weight zeta_t^2
        c = self.F if chart == 0 else self._padded(self.F, 2)[::-1]
        return sum(ci * zeta**i for i, ci in enumerate(c))

    def G_at(self, zeta, chart=0):
        # the column block carries weight zeta_t^(2j) at infinity
        j = len(self.p)
        c = self.G if chart == 0 else self._padded(self.G, 2 * j)[::-1]
        return sum(ci * zeta**i for i, ci in enumerate(c))

    def p_at(self, zeta):
        return np.array([np.polyval(c[::-1], zeta) for c in self.p])


def _fit_poly(zs, vals, max_degree, tol=1e-8):
    """Least-squares polynomial fit with the smallest adequate degree."""
    vals = np.asarray(vals, dtype=complex)
    scale = max(np.max(np.abs(vals)), 1.0)
    for deg in range(max_degree + 1):
        V = np.vander(zs, deg + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
        resid = np.max(np.abs(V @ coef - vals))
        if resid < tol * scale:
            return coef
    return coef


def extract_FG(data: NahmData, zeta_samples=None, pattern_tol=1e-6):
    """Read the boundary factors F(zeta), G(zeta) of the large-side pencil.

    The large-side matrix nearest the +mu1 boundary is conjugated into the
    basis [iota | complement]; in that basis it must carry the block
    pattern (A0, last column G; first bottom row F; companion of p).  For
    j = 1 any matrix fits the pattern; for j >= 2 the off-pattern entries
    must vanish, else a DegeneracyError is raised.
    """
    prof = data.profile
    if prof.j < 1:
        raise DimensionError("boundary factors require j >= 1")
    k, j = prof.k, prof.j
    iota = data.boundary_plus.iota
    q, _ = np.linalg.qr(np.hstack([iota, np.eye(k + j)]))
    U = q[:, :k + j]
    # align the first k columns with iota's range
    U[:, :k] = iota
    if np.linalg.norm(U.conj().T @ U - np.eye(k + j)) > 1e-8:
        raise DegeneracyError("embedding does not extend to a unitary basis")

    if zeta_samples is None:
        m = 4 * (2 * k + 2 * j) + 1
        zeta_samples = np.exp(2j * np.pi * np.arange(m) / m)
    zeta_samples = np.asarray(zeta_samples, dtype=complex)

    T1, T2, T3 = (data.large.T1[-1], data.large.T2[-1], data.large.T3[-1])
    a0_, a1_, a2_ = A_coeffs(T1, T2, T3)
    Fs, Gs, ps = [], [], []
    for z in zeta_samples:
        A1 = a0_ + z * a1_ + z * z * a2_
        At = U.conj().T @ A1 @ U
        scale = max(np.linalg.norm(At), 1.0)
        comp = At[k:, k:]
        if j >= 2:
            # the pattern allows: A0 block, last column, first bottom row,
            # and a companion block (unit subdiagonal, free last column)
            pat = np.zeros_like(comp)
            pat[np.arange(1, j), np.arange(j - 1)] = 1.0
            pat[:, -1] = comp[:, -1]
            off = max(
                float(np.max(np.abs(At[:k, k:-1]))),
                float(np.max(np.abs(At[k + 1:, :k]))),
                float(np.max(np.abs(comp - pat))),
            )
            if off > pattern_tol * scale:
                raise DegeneracyError(
                    f"basis does not produce the boundary block pattern "
                    f"(off-pattern magnitude {off:.3e})")
        Fs.append(At[k, :k])
        Gs.append(At[:k, -1])
        ps.append(-comp[:, -1][::-1])

    max_deg = 2 * k + 2 * j
    Fc = np.stack([_fit_poly(zeta_samples, [f[i] for f in Fs], max_deg)
                   for i in range(k)], axis=-1)
    Gc = np.stack([_fit_poly(zeta_samples, [g[i] for g in Gs], max_deg)
                   for i in range(k)], axis=-1)
    pc = [_fit_poly(zeta_samples, [pv[i] for pv in ps], max_deg)
          for i in range(j)]
    return BoundaryFactors(F=Fc, G=Gc, p=pc, A0=A_coeffs(
        data.small.T1[0], data.small.T2[0], data.small.T3[0]))


def split_divisor_jpos(A0_coeffs, A1_coeffs, factors: BoundaryFactors,
                       tol=1e-9):
    """Split S0 ∩ S1 using the boundary factors (j > 0)."""
    a0c = [np.asarray(c, dtype=complex) for c in A0_coeffs]
    a1c = [np.asarray(c, dtype=complex) for c in A1_coeffs]
    s0 = char_poly_eta(a0c)
    s1 = char_poly_eta(a1c)
    points = intersect_curves(s0, s1, tol=tol)

    def left(z, chart):
        return factors.F_at(z, chart)

    def right(z, chart):
        return factors.G_at(z, chart)

    split = _split(points, _chart_family(a0c), left, right, tol)
    return s0, s1, split


def tau_of_divisor(d: PointDivisor):
    return PointDivisor([tau_point(p) for p in d])
