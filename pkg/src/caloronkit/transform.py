"""Inverse transform: boundary-value operator, cokernel frames, fields.

For each spacetime point the first-order operator
``i(d/dz + T0 - it + sum_j e_j (T_j - i x_j))`` is discretized by midpoint
collocation on both circle intervals.  Boundary coupling is either the
embedding matching of the small-side values into the large side (j > 0)
or, for j = 0, two extra scalar rows projecting the shared boundary values
onto the jump directions.  The operator has two more rows than columns
(2j more for j > 0); its cokernel provides the rank-2 frame from which the
connection, curvature, and asymptotic eigenvalues are assembled.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentError,
    RankAnomalyError,
    ResolutionError,
)
from .nahmdata import SPIN, NahmData, jump_u_vector

# Hodge-dual index pairs in coordinates (t, x1, x2, x3):
# F_{01} <-> F_{23}, F_{02} <-> F_{31}, F_{03} <-> F_{12}
PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))

MIN_NODES = 32


@dataclass
class SpacetimePoint:
    t: float
    x: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(3)
        self.t = float(self.t)

    def reduced(self, period):
        return SpacetimePoint(self.t % period, self.x.copy())

    def shifted(self, mu, h):
        """Offset by h along coordinate mu (0 = t, 1..3 = x)."""
        if mu == 0:
            return SpacetimePoint(self.t + h, self.x.copy())
        x = self.x.copy()
        x[mu - 1] += h
        return SpacetimePoint(self.t, x)

    @property
    def coords(self):
        return np.array([self.t, *self.x])


class DiracFamily:
    """Precomputed discretization, linear in (t, x) for fast re-assembly."""

    def __init__(self, data: NahmData, N: int):
        if N < MIN_NODES:
            raise ResolutionError(f"need at least {MIN_NODES} nodes per "
                                  f"interval, got {N}")
        self.data = data
        self.N = N
        prof = data.profile
        self.k, self.j = prof.k, prof.j
        self._assemble()

    # -- layout ----------------------------------------------------------

    def _assemble(self):
        data, N = self.data, self.N
        prof = data.profile
        k, j = self.k, self.j
        dL, dS = 2 * (k + j), 2 * k
        lenL = data.large.z[-1] - data.large.z[0]
        lenS = data.small.z[-1] - data.small.z[0]
        # near-equal step size on both intervals: the left-null vector then
        # samples the adjoint solution with a uniform weight, so Euclidean
        # norms of discrete frames approximate the continuum L^2 norm
        NS = max(MIN_NODES, int(round(N * lenS / lenL)))
        zL = np.linspace(data.large.z[0], data.large.z[-1], N + 1)
        zS = np.linspace(data.small.z[0], data.small.z[-1], NS + 1)
        hbar = 0.5 * (lenL / N + lenS / NS)

        if j == 0:
            cols = dL * (N + NS)
            rows = dL * (N + NS) + 2

            def col_large(i):
                return dL * i

            def col_small(i):
                if i == 0:
                    return col_large(N)
                if i == NS:
                    return col_large(0)
                return dL * (N + i)
        else:
            cols = dL * (N + 1) + dS * (NS + 1)
            rows = dL * N + dS * NS + 2 * dL

            def col_large(i):
                return dL * i

            def col_small(i):
                return dL * (N + 1) + dS * i

        D0 = np.zeros((rows, cols), dtype=complex)
        Gt = np.zeros((rows, cols), dtype=complex)
        Gx = [np.zeros((rows, cols), dtype=complex) for _ in range(3)]
        row_z = np.zeros(rows)

        def spin_id(d2):
            return np.eye(d2, dtype=complex)

        def fill_interval(sol, zs, d2, col_of, row0):
            nloc = d2 // 2
            half = 0.5 * spin_id(d2)
            e_half = [0.5 * np.kron(e, np.eye(nloc)) for e in SPIN]
            r = row0
            for i in range(len(zs) - 1):
                h = zs[i + 1] - zs[i]
                zm = 0.5 * (zs[i] + zs[i + 1])
                T0m, T1m, T2m, T3m = sol.at(zm)
                M = np.kron(np.eye(2), T0m)
                for e, T in zip(SPIN, (T1m, T2m, T3m)):
                    M += np.kron(e, T)
                ca, cb = col_of(i), col_of(i + 1)
                blk_a = 1j * (-np.eye(d2) / h + 0.5 * M)
                blk_b = 1j * (np.eye(d2) / h + 0.5 * M)
                D0[r:r + d2, ca:ca + d2] += blk_a
                D0[r:r + d2, cb:cb + d2] += blk_b
                Gt[r:r + d2, ca:ca + d2] += half
                Gt[r:r + d2, cb:cb + d2] += half
                for a in range(3):
                    Gx[a][r:r + d2, ca:ca + d2] += e_half[a]
                    Gx[a][r:r + d2, cb:cb + d2] += e_half[a]
                row_z[r:r + d2] = zm
                r += d2
            return r

        r = fill_interval(data.large, zL, dL, col_large, 0)
        r = fill_interval(data.small, zS, dS, col_small, r)

        if j == 0:
            # row scale 1/sqrt(h): the left-null component on this row then
            # carries the norm of the cokernel's delta part at +-mu1 with
            # the same relative weight as the bulk samples carry the L^2 norm
            u_plus = jump_u_vector(*data.boundary_plus.deltas())
            u_minus = jump_u_vector(*data.boundary_minus.deltas())
            for u, node_col, zb in ((u_plus, col_large(N), prof.mu1),
                                    (u_minus, col_large(0), -prof.mu1)):
                # the jump vector enters unnormalized: the delta part of a
                # cokernel element then carries weight |c| * |u|^2, matching
                # the endomorphism-valued jump it represents
                D0[r, node_col:node_col + dL] = u.conj() / np.sqrt(hbar)
                row_z[r] = zb
                r += 1
            self.pi_rows = (rows - 2, rows - 1)
        else:
            # pure constraints: scaled up so their left-null components (the
            # Lagrange-multiplier part, absent from the continuum cokernel)
            # carry vanishing weight as the resolution grows
            cscale = hbar ** -1.5
            for b, iL, iS, zb in ((data.boundary_plus, N, 0, prof.mu1),
                                  (data.boundary_minus, 0, NS, -prof.mu1)):
                emb = np.kron(np.eye(2), b.iota)
                cL, cS = col_large(iL), col_small(iS)
                D0[r:r + dL, cL:cL + dL] = cscale * np.eye(dL)
                D0[r:r + dL, cS:cS + dS] = -cscale * emb
                row_z[r:r + dL] = zb
                r += dL
            self.pi_rows = ()

        self.D0, self.Gt, self.Gx = D0, Gt, Gx
        self.row_z = row_z
        self.rows, self.cols = rows, cols
        self.expected_corank = rows - cols

    # -- evaluation ------------------------------------------------------

    def matrix(self, p: SpacetimePoint):
        out = self.D0 + p.t * self.Gt
        for a in range(3):
            out += p.x[a] * self.Gx[a]
        return out

    def row_phase(self, tau):
        """Diagonal phases exp(i tau z) over the output rows."""
        return np.exp(1j * tau * self.row_z)


def build_dirac(data: NahmData, p: SpacetimePoint, N: int, family=None):
    """Assembled operator at one spacetime point (see DiracFamily)."""
    fam = family if family is not None else DiracFamily(data, N)
    return DiracSystem(family=fam, point=p, matrix=fam.matrix(p))


@dataclass
class DiracSystem:
    family: DiracFamily
    point: SpacetimePoint
    matrix: np.ndarray


@dataclass
class CaloronFrame:
    psi: np.ndarray          # (rows, 2) orthonormal cokernel frame
    sigma_min: float
    sigma_max: float
    residual: float          # max |psi^dagger D| column norm
    c_plus: np.ndarray = None
    c_minus: np.ndarray = None

    @property
    def gap(self):
        return self.sigma_min / max(self.residual, 1e-300)


def row_spectrum(sys):
    """Ascending singular values of the operator seen from the row side.

    Unlike the plain SVD of a tall matrix, this includes the structural
    near-zero values carried by the cokernel directions (rows - cols of
    them for an injective operator).
    """
    mat = sys.matrix if isinstance(sys, DiracSystem) else sys
    rows, cols = mat.shape
    body = np.sqrt(np.clip(
        np.linalg.eigvalsh(mat.conj().T @ mat), 0.0, None))
    q = np.linalg.qr(mat, mode='complete')[0]
    tail = np.linalg.norm(q[:, cols:].conj().T @ mat, axis=1)
    return np.sort(np.concatenate([body, tail]))


def cokernel(sys, tol=1e-8):
    """Orthonormal rank-2 cokernel frame of the assembled operator.

    The operator must be injective (no singular value below tol relative);
    the structural left-null space has dimension rows - cols (2 for j <= 1,
    2j for j >= 2, where the two slowest-growing directions are kept).
    """
    if isinstance(sys, DiracSystem):
        mat, fam = sys.matrix, sys.family
    else:
        mat, fam = sys, None
    u, s, vh = np.linalg.svd(mat, full_matrices=True)
    rows, cols = mat.shape
    if rows <= cols:
        raise RankAnomalyError("operator has no structural cokernel",
                               singular_values=s)
    small = int(np.sum(s < tol * s[0]))
    if small > 0:
        raise RankAnomalyError(
            f"operator has a {small}-dimensional kernel "
            f"(sigma_min/sigma_max = {s[-1] / s[0]:.3e})",
            singular_values=s)
    psi = u[:, cols:]
    if psi.shape[1] > 2:
        # keep the two directions with least mass near the singular ends
        w = np.ones(rows)
        if fam is not None:
            zb = max(abs(fam.row_z[0]), 1e-9)
            w = 1.0 + 1.0 / np.maximum(np.minimum(
                np.abs(fam.row_z - fam.row_z.min()),
                np.abs(fam.row_z.max() - fam.row_z)), 0.05 * zb)
        G = psi.conj().T @ (w[:, None] * psi)
        vals, vecs = np.linalg.eigh(G)
        psi = psi @ vecs[:, :2]
        q, _ = np.linalg.qr(psi)
        psi = q
    resid = float(np.max(np.linalg.norm(psi.conj().T @ mat, axis=1)))
    c_plus = c_minus = None
    if fam is not None and fam.pi_rows:
        c_plus = psi[fam.pi_rows[0], :].copy()
        c_minus = psi[fam.pi_rows[1], :].copy()
    return CaloronFrame(psi=psi, sigma_min=float(s[-1]), sigma_max=float(s[0]),
                        residual=resid, c_plus=c_plus, c_minus=c_minus)


# ---------------------------------------------------------------------------
# frames in a common gauge, connection, curvature
# ---------------------------------------------------------------------------

def align_frame(psi, reference, tol=1e-8):
    """Rotate the frame so its overlap with the reference is hermitian PSD."""
    o = reference.conj().T @ psi
    uo, so, vho = np.linalg.svd(o)
    if so[-1] < tol * max(so[0], 1.0):
        raise AlignmentError(
            f"frame overlap with the reference is near-singular "
            f"(sigma ratio {so[-1] / max(so[0], 1e-300):.3e})")
    q = uo @ vho  # unitary polar factor of o
    return psi @ q.conj().T


def _anti_hermitian(m):
    return 0.5 * (m - m.conj().T)


def _su2_part(m):
    """Traceless anti-hermitian part over the last two axes."""
    a = 0.5 * (m - np.conj(np.swapaxes(m, -1, -2)))
    tr = np.trace(a, axis1=-2, axis2=-1)[..., None, None]
    return a - 0.5 * tr * np.eye(2)


def connection_at(data, p: SpacetimePoint, h, N, family=None, reference=None,
                  tol=1e-8):
    """Connection components (A_t, A_1, A_2, A_3) at one point.

    Central differences of the cokernel frame in a gauge aligned to
    ``reference`` (default: the frame at p itself, a radial-type gauge in
    which the components at p are small).  Returns the four 2x2
    anti-hermitian matrices and the max hermitian-residual diagnostic.
    """
    fam = family or DiracFamily(data, N)
    psi0 = cokernel(fam.matrix(p), tol).psi
    if reference is None:
        reference = psi0
    psi0 = align_frame(psi0, reference, tol)
    A = []
    herm = 0.0
    for mu in range(4):
        pp = cokernel(fam.matrix(p.shifted(mu, h)), tol).psi
        pm = cokernel(fam.matrix(p.shifted(mu, -h)), tol).psi
        pp = align_frame(pp, reference, tol)
        pm = align_frame(pm, reference, tol)
        raw = psi0.conj().T @ (pp - pm) / (2 * h)
        herm = max(herm, float(np.linalg.norm(raw + raw.conj().T) / 2))
        A.append(_su2_part(raw))
    return tuple(A), herm


@dataclass
class FieldGrid:
    axes: tuple               # four 1-d arrays: t, x1, x2, x3 values
    A: np.ndarray = None      # (nt, n1, n2, n3, 4, 2, 2) anti-hermitian
    F: np.ndarray = None      # (mt, m1, m2, m3, 6, 2, 2), PAIRS order
    period: float = None

    @property
    def spacings(self):
        return tuple(float(ax[1] - ax[0]) if len(ax) > 1 else 1.0
                     for ax in self.axes)

    def to_json(self):
        from .nahmdata import complex_to_pairs
        out = {"grid": {name: np.asarray(ax).tolist() for name, ax in
                        zip(("t", "x1", "x2", "x3"), self.axes)},
               "period": self.period}
        if self.A is not None:
            out["A"] = complex_to_pairs(self.A)
        if self.F is not None:
            out["F"] = complex_to_pairs(self.F)
        return out

    @classmethod
    def from_json(cls, obj):
        from .nahmdata import pairs_to_complex
        axes = tuple(np.asarray(obj["grid"][n], dtype=float)
                     for n in ("t", "x1", "x2", "x3"))
        A = pairs_to_complex(obj["A"]) if "A" in obj else None
        F = pairs_to_complex(obj["F"]) if "F" in obj else None
        return cls(axes=axes, A=A, F=F, period=obj.get("period"))


def _thread_count():
    env = os.environ.get("NAHM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(os.cpu_count() or 1, 8)


def frames_on_grid(data, axes, N, tol=1e-8, threads=None):
    """Cokernel frames at every grid node, in one shared canonical gauge.

    The gauge reference is the frame at the central node; every other
    frame is polar-aligned to it, giving a gauge smooth across the grid
    wherever the overlap stays nonsingular.
    """
    fam = DiracFamily(data, N)
    shape = tuple(len(ax) for ax in axes)
    pts = [SpacetimePoint(t, (x1, x2, x3))
           for t in axes[0] for x1 in axes[1]
           for x2 in axes[2] for x3 in axes[3]]
    center = ((shape[0] // 2) * shape[1] * shape[2] * shape[3]
              + (shape[1] // 2) * shape[2] * shape[3]
              + (shape[2] // 2) * shape[3] + shape[3] // 2)
    ref = cokernel(fam.matrix(pts[center]), tol).psi

    def solve(p):
        return align_frame(cokernel(fam.matrix(p), tol).psi, ref, tol)

    n_threads = threads if threads is not None else _thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as ex:
            frames = list(ex.map(solve, pts))
    else:
        frames = [solve(p) for p in pts]
    out = np.empty(shape + frames[0].shape, dtype=complex)
    out.reshape(len(pts), *frames[0].shape)[:] = np.stack(frames)
    return out, fam


def connection_grid(frames, axes):
    """Central-difference connection on the interior nodes of the grid."""
    if any(len(ax) < 3 for ax in axes):
        raise ResolutionError("need at least 3 nodes per axis")
    hs = [ax[1] - ax[0] for ax in axes]
    inner = frames[1:-1, 1:-1, 1:-1, 1:-1]
    shape = inner.shape[:4]
    A = np.empty(shape + (4, 2, 2), dtype=complex)
    sl = [slice(1, -1)] * 4
    for mu in range(4):
        up = list(sl); dn = list(sl)
        up[mu] = slice(2, None); dn[mu] = slice(0, -2)
        diff = (frames[tuple(up)] - frames[tuple(dn)]) / (2 * hs[mu])
        raw = np.einsum("...ri,...rj->...ij", inner.conj(), diff)
        A[..., mu, :, :] = _su2_part(raw)
    return A


def curvature_grid(grid: FieldGrid):
    """F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu] on interior nodes.

    Wraps periodically in t when the t-axis covers one full period.
    """
    if grid.A is None:
        raise ResolutionError("grid carries no connection")
    if any(len(ax) < 3 for ax in grid.axes):
        raise ResolutionError("need at least 3 nodes per axis")
    A = grid.A
    hs = grid.spacings
    t_ax = grid.axes[0]
    wrap_t = (grid.period is not None and len(t_ax) > 2 and
              abs((t_ax[-1] - t_ax[0]) + hs[0] - grid.period) < 1e-9)

    def d(comp, mu):
        # rolled edges on non-wrapping axes are trimmed below
        return (np.roll(comp, -1, axis=mu) - np.roll(comp, 1, axis=mu)) \
            / (2 * hs[mu])

    F = np.empty(A.shape[:4] + (6, 2, 2), dtype=complex)
    for idx, (mu, nu) in enumerate(PAIRS):
        Amu = A[..., mu, :, :]
        Anu = A[..., nu, :, :]
        F[..., idx, :, :] = (d(Anu, mu) - d(Amu, nu)
                             + Amu @ Anu - Anu @ Amu)
    # trim one node from every non-wrapping axis (rolled edges are invalid)
    sl = [slice(None)] * 4
    for mu in range(4):
        if mu == 0 and wrap_t:
            continue
        sl[mu] = slice(1, -1)
    Fint = F[tuple(sl)]
    new_axes = []
    for mu, ax in enumerate(grid.axes):
        if mu == 0 and wrap_t:
            new_axes.append(ax)
        else:
            new_axes.append(ax[1:-1])
    return FieldGrid(axes=tuple(new_axes), A=None, F=Fint, period=grid.period)


@dataclass
class SDReport:
    residual: float
    orientation: int
    zero_curvature: bool

    def to_json(self):
        return {"residual": self.residual, "orientation": self.orientation,
                "zero_curvature": self.zero_curvature}


def sd_residual(grid: FieldGrid, orientation=None):
    """|F - s * dual(F)| / |F| over the grid, with s auto-selected if None."""
    if grid.F is None:
        raise ResolutionError("grid carries no curvature")
    F = grid.F
    total = float(np.linalg.norm(F))
    if total < 1e-14:
        return SDReport(residual=0.0, orientation=int(orientation or 1),
                        zero_curvature=True)
    best = None
    for s in ((orientation,) if orientation else (1, -1)):
        diff = 0.0
        for i in range(3):
            diff += float(np.linalg.norm(F[..., i, :, :]
                                         - s * F[..., 3 + i, :, :])) ** 2
        # both members of each dual pair contribute to |F - s*F|
        res = np.sqrt(2 * diff) / total
        if best is None or res < best[0]:
            best = (res, s)
    return SDReport(residual=best[0], orientation=int(best[1]),
                    zero_curvature=False)


# ---------------------------------------------------------------------------
# asymptotics via the time-circle holonomy
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticsReport:
    lambdas: dict             # radius -> sorted |eigenangle|/period pair
    exponent: float = None    # fitted decay power of the j=0 correction
    slope: float = None       # fitted monopole-charge slope (j > 0)
    degenerate: bool = False

    def to_json(self):
        return {"lambdas": {str(r): list(map(float, v))
                            for r, v in self.lambdas.items()},
                "exponent": self.exponent, "slope": self.slope,
                "degenerate": self.degenerate}


def _holonomy_eigenangles(data, fam, x, n_t=16, tol=1e-8):
    """Eigenangles of the frame-bundle holonomy around the time circle."""
    period = data.profile.period
    ts = np.linspace(0.0, period, n_t, endpoint=False)
    frames = [cokernel(fam.matrix(SpacetimePoint(t, x)), tol).psi
              for t in ts]
    # closure: advancing t by one period multiplies sections by
    # exp(-2 pi i z / mu0) on the output rows
    phase = fam.row_phase(-2 * np.pi / data.profile.mu0).conj()
    closed = phase[:, None] * frames[0]
    # chained overlaps psi_0^* psi_1 psi_1^* psi_2 ...: the arbitrary bases
    # at interior steps cancel through the projectors psi_i psi_i^*
    hol = np.eye(2, dtype=complex)
    for i in range(n_t):
        nxt = frames[i + 1] if i + 1 < n_t else closed
        o = frames[i].conj().T @ nxt
        uo, _, vho = np.linalg.svd(o)
        hol = hol @ (uo @ vho)
    # the frame bundle is U(2); the caloron part is the traceless half, so
    # drop the overall determinant phase and keep the +-phi eigenangle pair
    ang = np.angle(np.linalg.eigvals(hol))
    sep = abs((ang[0] - ang[1] + np.pi) % (2 * np.pi) - np.pi)
    phi = 0.5 * sep
    return np.array([phi, phi]) / period


def asymptotics_check(data: NahmData, radii=(5.0, 10.0), N=128, n_t=16,
                      direction=(0.0, 0.0, 1.0), tol=1e-8):
    """Compare far-field time-component eigenvalues with the expected pair.

    At radius R the pair should approach ±(mu1 - j/(2R)); for j = 0 the
    deviation is fitted with a power of R (needs two radii); for j > 0 the
    slope of the 1/(2R) correction is estimated from two radii.
    """
    prof = data.profile
    nhat = np.asarray(direction, dtype=float)
    nhat = nhat / np.linalg.norm(nhat)
    fam = DiracFamily(data, N)
    lambdas = {}
    for R in radii:
        lam = _holonomy_eigenangles(data, fam, R * nhat, n_t=n_t, tol=tol)
        lambdas[R] = lam
    report = AsymptoticsReport(lambdas=lambdas)
    if prof.mu1 < 1e-9:
        report.degenerate = True
        return report
    rs = sorted(lambdas)
    if prof.j == 0 and len(rs) >= 2:
        devs = [max(np.max(np.abs(lambdas[r] - prof.mu1)), 1e-15) for r in rs]
        report.exponent = float(np.log(devs[-1] / devs[0])
                                / np.log(rs[-1] / rs[0]))
    elif prof.j > 0 and len(rs) >= 2:
        # lambda(R) ~ mu1 - j/(2R): slope from two radii
        l0 = np.mean(np.abs(lambdas[rs[0]]))
        l1 = np.mean(np.abs(lambdas[rs[-1]]))
        report.slope = float((l1 - l0) / (1.0 / (2 * rs[0])
                                          - 1.0 / (2 * rs[-1])))
    return report
