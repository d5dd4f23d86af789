"""Dense complex matrix helpers and bivariate polynomial algebra.

A ``BiPoly`` is a polynomial in ``eta`` whose coefficients are univariate
polynomials in ``zeta``:  ``P(zeta, eta) = sum_i c_i(zeta) * eta**i``.
Characteristic polynomials of quadratic matrix pencils live here, as do
their intersection divisors on the total space of O(2) over the sphere,
covered by two charts related by ``zeta_t = 1/zeta``, ``eta_t = eta/zeta**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CommonComponentError,
    DimensionError,
    InconsistencyError,
    RankError,
)

DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# matrix helpers
# ---------------------------------------------------------------------------

def _as_square(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError("matrix entries must be finite")
    return m


def classical_adjoint(m):
    """Transpose cofactor matrix, satisfying adj(m) @ m = det(m) * I.

    Computed from cofactors (minor determinants); robust for singular and
    corank-one input, where the result has rank <= 1.
    """
    m = _as_square(m)
    n = m.shape[0]
    if n == 0:
        raise DimensionError("adjoint of an empty matrix is undefined")
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    adj = np.empty((n, n), dtype=complex)
    rows = np.arange(n)
    for i in range(n):
        for j in range(n):
            minor = m[np.ix_(rows != i, rows != j)]
            # cofactor C_ij lands at adj[j, i] (transpose)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def rank_one_factor(m, tol=DEFAULT_TOL):
    """Factor a numerically rank-<=1 matrix as an outer product u @ v.

    ``u`` is the leading left singular direction scaled by the leading
    singular value; ``v`` the leading right singular direction (row).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    u_, s, vh = np.linalg.svd(m)
    if s[0] == 0.0:
        return (np.zeros((m.shape[0], 1), complex),
                np.zeros((1, m.shape[1]), complex))
    if len(s) > 1 and s[1] >= tol * s[0]:
        raise RankError(
            f"matrix has numerical rank >= 2 (sigma2/sigma1 = {s[1] / s[0]:.3e})",
            ratio=s[1] / s[0],
        )
    u = (u_[:, 0] * s[0]).reshape(-1, 1)
    v = vh[0, :].reshape(1, -1)
    return u, v


# ---------------------------------------------------------------------------
# BiPoly
# ---------------------------------------------------------------------------

def _trim(c, tol=0.0):
    c = np.atleast_1d(np.asarray(c, dtype=complex)).ravel()
    scale = np.max(np.abs(c)) if c.size else 0.0
    cut = tol * scale
    k = c.size - 1
    while k > 0 and abs(c[k]) <= cut:
        k -= 1
    return c[: k + 1].copy()


@dataclass
class BiPoly:
    """P(zeta, eta) = sum_i coeffs[i](zeta) * eta**i, ascending powers."""

    coeffs: list = field(default_factory=list)

    def __post_init__(self):
        self.coeffs = [_trim(c) for c in self.coeffs]

    @property
    def eta_degree(self):
        return len(self.coeffs) - 1

    def __call__(self, zeta, eta):
        zeta = np.asarray(zeta, dtype=complex)
        eta = np.asarray(eta, dtype=complex)
        out = np.zeros(np.broadcast(zeta, eta).shape, dtype=complex)
        for i in reversed(range(len(self.coeffs))):
            out = out * eta + np.polyval(self.coeffs[i][::-1], zeta)
        return out if out.shape else complex(out)

    def eta_poly_at(self, zeta):
        """Coefficients (ascending) of the univariate polynomial in eta."""
        return np.array(
            [np.polyval(c[::-1], zeta) for c in self.coeffs], dtype=complex
        )

    def is_monic(self, tol=DEFAULT_TOL):
        top = self.coeffs[-1]
        return top.size == 1 and abs(top[0] - 1.0) <= tol

    def other_chart(self):
        """The same curve in the chart zeta_t = 1/zeta, eta_t = eta/zeta**2.

        Valid for sections of O(2k) (monic of eta-degree k with the
        degree bound deg_zeta coeffs[k-i] <= 2i); each coefficient is
        zero-padded to its bound and reversed.
        """
        k = self.eta_degree
        new = []
        for i, c in enumerate(self.coeffs):
            bound = 2 * (k - i)
            if c.size - 1 > bound:
                raise DimensionError(
                    f"coefficient of eta^{i} exceeds the degree bound {bound}"
                )
            padded = np.zeros(bound + 1, dtype=complex)
            padded[: c.size] = c
            new.append(padded[::-1])
        return BiPoly(new)

    def to_json(self):
        return {
            "eta_degree": self.eta_degree,
            "coeffs": [[[float(z.real), float(z.imag)] for z in c]
                       for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj):
        coeffs = [np.array([complex(re, im) for re, im in c], dtype=complex)
                  for c in obj["coeffs"]]
        p = cls(coeffs)
        if p.eta_degree != obj["eta_degree"]:
            raise DimensionError("eta_degree does not match coefficient list")
        return p


def char_poly_eta(a_coeffs, samples=None):
    """det(eta*I - A(zeta)) for A(zeta) = A0 + A1*zeta + A2*zeta**2.

    Coefficients in zeta are recovered by evaluation at roots of unity
    followed by an inverse DFT, so the construction is dimension-agnostic.
    """
    a0, a1, a2 = (np.asarray(a, dtype=complex) for a in a_coeffs)
    if not (a0.shape == a1.shape == a2.shape) or a0.ndim != 2 \
            or a0.shape[0] != a0.shape[1]:
        raise DimensionError("need three equal square matrices")
    k = a0.shape[0]
    m = samples or (2 * k + 1)
    zs = np.exp(2j * np.pi * np.arange(m) / m)
    # values[i][sample] = coefficient of eta**i at that zeta
    values = np.empty((k + 1, m), dtype=complex)
    for idx, z in enumerate(zs):
        a = a0 + z * a1 + z * z * a2
        # np.poly returns descending coefficients of det(x*I - a)
        values[:, idx] = np.poly(a)[::-1]
    coeffs = []
    for i in range(k + 1):
        # forward DFT / m recovers a_n from samples at e^(2 pi i n / m)
        c = np.fft.fft(values[i]) / m
        bound = 2 * (k - i)
        c[bound + 1:] = 0.0
        scale = max(np.max(np.abs(c)), 1.0)
        c[np.abs(c) < 1e-12 * scale] = 0.0
        coeffs.append(c[: bound + 1])
    return BiPoly(coeffs)


def is_real_curve(s, tol=DEFAULT_TOL):
    """Check invariance under (zeta, eta) -> (-1/conj(zeta), -conj(eta)/conj(zeta)**2).

    On the coefficients of a monic eta-degree-k section of O(2k) this reads
    c_{k-i}(zeta) = (-1)**i zeta**(2i) conj(c_{k-i}(-1/conj(zeta))), i.e.
    a_n = (-1)**(i+n) conj(a_{2i-n}) with the coefficient padded to degree 2i.
    """
    if not s.is_monic(tol):
        return False
    k = s.eta_degree
    scale = max(max(np.max(np.abs(c)) for c in s.coeffs), 1.0)
    for i in range(1, k + 1):
        c = s.coeffs[k - i]
        bound = 2 * i
        if c.size - 1 > bound:
            return False
        a = np.zeros(bound + 1, dtype=complex)
        a[: c.size] = c
        for n in range(bound + 1):
            expect = (-1) ** (i + n) * np.conj(a[bound - n])
            if abs(a[n] - expect) > tol * scale:
                return False
    return True


# ---------------------------------------------------------------------------
# points and divisors
# ---------------------------------------------------------------------------

@dataclass
class Point:
    """A point of the curve total space with multiplicity.

    ``chart`` 0 stores (zeta, eta); chart 1 stores (1/zeta, eta/zeta**2).
    """

    zeta: complex
    eta: complex
    mult: int = 1
    chart: int = 0

    def to_chart(self, chart):
        if chart == self.chart:
            return Point(self.zeta, self.eta, self.mult, self.chart)
        if self.zeta == 0:
            raise DimensionError("point at the chart origin cannot change chart")
        z = 1.0 / self.zeta
        return Point(z, self.eta * z * z, self.mult, chart)

    def to_json(self):
        return {
            "zeta": [self.zeta.real, self.zeta.imag],
            "eta": [self.eta.real, self.eta.imag],
            "mult": self.mult,
            "chart": self.chart,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            complex(*obj["zeta"]), complex(*obj["eta"]),
            int(obj["mult"]), int(obj.get("chart", 0)),
        )


@dataclass
class PointDivisor:
    points: list = field(default_factory=list)

    @property
    def total_multiplicity(self):
        return sum(p.mult for p in self.points)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __add__(self, other):
        return PointDivisor(list(self.points) + list(other.points))

    def to_json(self):
        return [p.to_json() for p in self.points]

    @classmethod
    def from_json(cls, obj):
        return cls([Point.from_json(p) for p in obj])


def tau_point(p):
    """The antiholomorphic involution (zeta, eta) -> (-conj(eta)/conj(zeta)**2, ...).

    Accepts an (zeta, eta) pair in chart 0 (zeta != 0) or a Point (any
    chart; the involution swaps charts and negates-conjugates coordinates).
    """
    if isinstance(p, Point):
        return Point(-np.conj(p.zeta), -np.conj(p.eta), p.mult, 1 - p.chart)
    zeta, eta = p
    if zeta == 0:
        raise DimensionError("zeta = 0 maps to infinity; use the Point form")
    zb = np.conj(zeta)
    return (-1.0 / zb, -np.conj(eta) / (zb * zb))


def _same_point(p, q, tol):
    """Tolerance comparison, chart-aware."""
    try:
        q2 = q.to_chart(p.chart)
    except DimensionError:
        return False
    scale = 1.0 + abs(p.zeta) + abs(p.eta)
    return (abs(p.zeta - q2.zeta) < tol * scale
            and abs(p.eta - q2.eta) < tol * scale)


def divisors_equal(d0, d1, tol=1e-6):
    """Multiset equality of two divisors, within tolerance."""
    rem = [Point(p.zeta, p.eta, p.mult, p.chart) for p in d1.points]
    for p in d0.points:
        need = p.mult
        for q in rem:
            if q.mult > 0 and _same_point(p, q, tol):
                take = min(need, q.mult)
                q.mult -= take
                need -= take
                if need == 0:
                    break
        if need != 0:
            return False
    return all(q.mult == 0 for q in rem)


# ---------------------------------------------------------------------------
# intersection
# ---------------------------------------------------------------------------

def _resultant_samples(s0, s1, m, radius=1.0):
    """Res_eta(s0, s1) evaluated at m scaled roots of unity."""
    zs = radius * np.exp(2j * np.pi * np.arange(m) / m)
    vals = np.empty(m, dtype=complex)
    for idx, z in enumerate(zs):
        p0 = s0.eta_poly_at(z)
        p1 = s1.eta_poly_at(z)
        roots = np.roots(p0[::-1])
        vals[idx] = np.prod(np.polyval(p1[::-1], roots)) * p0[-1] ** (p1.size - 1)
    return zs, vals


def _cluster_roots(roots, radius):
    """Greedy clustering; returns (centroid, count) pairs."""
    used = np.zeros(len(roots), dtype=bool)
    clusters = []
    for i in range(len(roots)):
        if used[i]:
            continue
        members = [roots[i]]
        used[i] = True
        changed = True
        while changed:
            changed = False
            centroid = np.mean(members)
            for j in range(len(roots)):
                if not used[j] and abs(roots[j] - centroid) < radius:
                    members.append(roots[j])
                    used[j] = True
                    changed = True
        clusters.append((np.mean(members), len(members)))
    return clusters


def _chart_points(s0, s1, tol, cluster_radius, chart):
    k0, k1 = s0.eta_degree, s1.eta_degree
    deg_bound = 2 * k0 * k1
    m = deg_bound + 1
    _, vals = _resultant_samples(s0, s1, m)
    res = np.fft.fft(vals) / m
    scale = np.max(np.abs(res))
    if scale == 0 or scale < 1e3 * tol * max(
            1.0, *(np.max(np.abs(c)) for c in s0.coeffs),
            *(np.max(np.abs(c)) for c in s1.coeffs)) * 0:
        pass
    if scale == 0:
        raise CommonComponentError("resultant vanishes identically")
    res = _trim(res, 1e-10)
    if res.size == 1 and abs(res[0]) <= 1e-10 * scale:
        raise CommonComponentError("resultant vanishes identically")
    roots = np.roots(res[::-1]) if res.size > 1 else np.array([])
    points = []
    eta_tol = max(100 * tol, 1e-5)
    for zc, count in _cluster_roots(roots, cluster_radius):
        # match eta roots of the two slices at the cluster centroid
        e0 = np.roots(s0.eta_poly_at(zc)[::-1])
        e1 = np.roots(s1.eta_poly_at(zc)[::-1])
        common = []
        used1 = np.zeros(len(e1), dtype=bool)
        for a in e0:
            sc = 1.0 + abs(a)
            jbest, dbest = -1, np.inf
            for j, b in enumerate(e1):
                if not used1[j] and abs(a - b) < dbest:
                    jbest, dbest = j, abs(a - b)
            if jbest >= 0 and dbest < eta_tol * sc:
                used1[jbest] = True
                common.append(a)
        if not common:
            raise InconsistencyError(
                f"resultant root at zeta={zc} has no matching eta values"
            )
        groups = _cluster_roots(np.array(common), eta_tol)
        if len(groups) == 1:
            points.append(Point(zc, groups[0][0], count, chart))
        else:
            total = sum(g[1] for g in groups)
            for ec, n in groups:
                points.append(Point(zc, ec, max(1, round(count * n / total)),
                                    chart))
    return points


def intersect_curves(s0, s1, tol=DEFAULT_TOL, cluster_radius=None):
    """All common zeros with multiplicities, over both charts.

    The zeta-resultant (eliminating eta) is interpolated from samples, its
    roots clustered into multiplicities, and each root matched with common
    eta values.  The unit circle splits the two charts: chart 0 keeps
    |zeta| <= 1 + delta, chart 1 the strict complement.
    """
    if cluster_radius is None:
        cluster_radius = max(10 * tol, 3e-5)
    delta = cluster_radius
    pts0 = _chart_points(s0, s1, tol, cluster_radius, 0)
    pts1 = _chart_points(s0.other_chart(), s1.other_chart(), tol,
                         cluster_radius, 1)
    points = [p for p in pts0 if abs(p.zeta) <= 1 + delta]
    points += [p for p in pts1 if abs(p.zeta) < 1.0 / (1 + delta)]
    return PointDivisor(points)
