"""Integration of the matrix flow across intervals, with series starts.

The flow dT_i/dz = [T_{i+1}, T_{i+2}] - [T0, T_i] is integrated with a
fixed-step classical 4th-order scheme.  Regular singular interval ends
(simple poles with su(2) residues) are handled by a recursive power-series
start.  A compiled kernel is used when available, with a pure-numpy
fallback selected at import time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _flow_numpy
from .errors import (
    DimensionError,
    InvariantError,
    MatchingError,
    ResonanceError,
    SingularityHitError,
    StructureError,
)
from .nahmdata import (
    LARGE,
    SMALL,
    IntervalSolution,
    JumpData,
    NahmData,
    PoleData,
    jump_u_vector,
    validate,
)

try:
    from . import _flowkern
    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _flowkern = None
    HAVE_COMPILED = False

BLOWUP_NORM = 1e12

T0_ZERO = "T0_ZERO"
AS_GIVEN = "AS_GIVEN"


def kernel(compiled=None):
    """The active step kernel; pass compiled=False to force the fallback."""
    if compiled is None:
        compiled = HAVE_COMPILED
    if compiled and _flowkern is not None:
        return _flowkern.rk4_nahm
    return _flow_numpy.rk4_nahm


@dataclass
class FlowConfig:
    steps_per_interval: int = 2000
    pole_offset: float = None
    frobenius_order: int = 6
    gauge: str = T0_ZERO

    def __post_init__(self):
        if self.steps_per_interval < 16:
            raise InvariantError("steps_per_interval must be at least 16")
        if self.pole_offset is not None and self.pole_offset <= 0:
            raise InvariantError("pole_offset must be positive")
        if self.frobenius_order < 2:
            raise InvariantError("frobenius_order must be at least 2")
        if self.gauge not in (T0_ZERO, AS_GIVEN):
            raise InvariantError(f"unknown gauge {self.gauge!r}")

    def offset(self, mu1):
        return self.pole_offset if self.pole_offset is not None else 1e-3 * mu1


def nahm_rhs(T0, T1, T2, T3):
    """(dT1, dT2, dT3) with dT_i = [T_{i+1}, T_{i+2}] - [T0, T_i]."""
    mats = [np.asarray(t, dtype=complex) for t in (T0, T1, T2, T3)]
    shape = mats[0].shape
    if any(m.shape != shape for m in mats) or shape[0] != shape[1]:
        raise DimensionError("all four matrices must be square and equal-sized")
    T0, T = mats[0], mats[1:]
    out = []
    for i in range(3):
        a, b = T[(i + 1) % 3], T[(i + 2) % 3]
        out.append(a @ b - b @ a - (T0 @ T[i] - T[i] @ T0))
    return tuple(out)


def _check_blowup(samples, z_of):
    norms = np.linalg.norm(samples.reshape(samples.shape[0], -1), axis=1)
    bad = ~np.isfinite(norms) | (norms > BLOWUP_NORM)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise SingularityHitError(
            f"flow blew up at z = {z_of(idx):.6g}", z=z_of(idx)
        )


def integrate_interval(initial, interval, cfg: FlowConfig = None, which=SMALL,
                       compiled=None):
    """Integrate from the start of (a, b) and sample on a uniform grid."""
    cfg = cfg or FlowConfig()
    a, b = interval
    if not a < b:
        raise InvariantError("interval must satisfy a < b")
    T0, T1, T2, T3 = (np.asarray(t, dtype=complex) for t in initial)
    if cfg.gauge == T0_ZERO:
        T0 = np.zeros_like(T0)
    steps = cfg.steps_per_interval
    h = (b - a) / steps
    out = kernel(compiled)(T0, np.stack([T1, T2, T3]), h, steps)
    _check_blowup(out, lambda i: a + i * h)
    z = a + h * np.arange(steps + 1)
    t0 = np.broadcast_to(T0, (steps + 1,) + T0.shape).copy()
    return IntervalSolution(z=z, T0=t0, T1=out[:, 0], T2=out[:, 1],
                            T3=out[:, 2], which=which)


def integrate_on_grid(initial, z_grid, i_start, substeps=8, T0=None,
                      compiled=None):
    """Integrate both directions from grid node ``i_start``; sample at nodes.

    The grid must be uniform.  Returns (steps+1 == len(z_grid)) samples as
    an array of shape (n, 3, d, d).
    """
    z = np.asarray(z_grid, dtype=float)
    hs = np.diff(z)
    if z.size < 2 or np.max(np.abs(hs - hs[0])) > 1e-9 * abs(hs[0]):
        raise InvariantError("grid must be uniform for re-integration")
    h = hs[0]
    T = np.stack([np.asarray(t, dtype=complex) for t in initial])
    d = T.shape[-1]
    if T0 is None:
        T0 = np.zeros((d, d), dtype=complex)
    run = kernel(compiled)
    out = np.empty((z.size, 3, d, d), dtype=complex)
    out[i_start] = T
    m = max(1, int(substeps))
    if i_start < z.size - 1:
        fwd = run(T0, T, h / m, (z.size - 1 - i_start) * m)
        _check_blowup(fwd, lambda i: z[i_start] + i * h / m)
        out[i_start + 1:] = fwd[m::m]
    if i_start > 0:
        bwd = run(T0, T, -h / m, i_start * m)
        _check_blowup(bwd, lambda i: z[i_start] - i * h / m)
        out[:i_start] = bwd[m::m][::-1]
    return out


# ---------------------------------------------------------------------------
# series start at a simple-pole interval end
# ---------------------------------------------------------------------------

def _comm_op(R):
    d = R.shape[0]
    return np.kron(R, np.eye(d)) - np.kron(np.eye(d), R.T)


def _series_operator(res, n):
    """Linear map L_n acting on the stacked (C_1, C_2, C_3) coefficients."""
    d = res[0].shape[0]
    dim = d * d
    L = np.zeros((3 * dim, 3 * dim), dtype=complex)
    for i in range(3):
        L[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = n * np.eye(dim)
        ip1, ip2 = (i + 1) % 3, (i + 2) % 3
        # - [R_{i+1}, C_{i+2}]
        L[i * dim:(i + 1) * dim, ip2 * dim:(ip2 + 1) * dim] -= _comm_op(res[ip1])
        # - [C_{i+1}, R_{i+2}] = + [R_{i+2}, C_{i+1}]
        L[i * dim:(i + 1) * dim, ip1 * dim:(ip1 + 1) * dim] += _comm_op(res[ip2])
    return L


def embed_residues(pole: PoleData, k):
    """Residues of the full (k+j)-sized matrices: the lower-right j-block."""
    jdim = pole.R1.shape[0]
    d = k + jdim
    out = []
    for R in pole.residues:
        big = np.zeros((d, d), dtype=complex)
        big[k:, k:] = R
        out.append(big)
    return out


def frobenius_series(residues, seed, order, tol=1e-10):
    """Coefficients C_n of T_i = R_i/zhat + sum_n C_{i,n} zhat^n.

    ``residues`` is a list of three full-size matrices with
    [R_{i+1}, R_{i+2}] = -R_i; ``seed`` a (3, d, d) stack whose projection
    onto the order-0 solution space seeds the free parameters.  Orders with
    an inconsistent linear system raise ResonanceError.
    """
    res = [np.asarray(r, dtype=complex) for r in residues]
    d = res[0].shape[0]
    dim = d * d
    seed = np.asarray(seed, dtype=complex).reshape(3 * dim)
    coeffs = []
    for n in range(order + 1):
        L = _series_operator(res, n)
        q = np.zeros(3 * dim, dtype=complex)
        if n >= 1:
            # quadratic source: sum over a + b = n - 1 of [C_{i+1,a}, C_{i+2,b}]
            for i in range(3):
                acc = np.zeros((d, d), dtype=complex)
                for a in range(n):
                    b = n - 1 - a
                    ca = coeffs[a][(i + 1) % 3]
                    cb = coeffs[b][(i + 2) % 3]
                    acc += ca @ cb - cb @ ca
                q[i * dim:(i + 1) * dim] = acc.reshape(-1)
        u, s, vh = np.linalg.svd(L)
        smax = s[0] if s[0] > 0 else 1.0
        rank = int(np.sum(s > 1e-10 * smax))
        s_inv = np.zeros_like(s)
        s_inv[:rank] = 1.0 / s[:rank]
        x = vh.conj().T @ (s_inv * (u.conj().T @ q))
        resid = np.linalg.norm(L @ x - q)
        if resid > max(tol * max(np.linalg.norm(q), 1.0), 1e-9):
            raise ResonanceError(
                f"inconsistent series system at order {n} "
                f"(residual {resid:.3e})", order=n)
        if n == 0 and rank < 3 * dim:
            null = vh[rank:].conj().T
            x = x + null @ (null.conj().T @ seed)
        coeffs.append(x.reshape(3, d, d))
    return coeffs


def frobenius_start(pole, seed, eps, order=6, k=None, direction=1):
    """Evaluate the series solution at distance ``eps`` from the pole.

    ``pole`` is PoleData (residues embedded using ``k``) or a list of three
    full-size residue matrices.  ``direction=+1`` means zhat increases into
    the interval from its left end; ``direction=-1`` from its right end.
    Returns (T0, T1, T2, T3) at zhat = eps, with T0 = 0.
    """
    if isinstance(pole, PoleData):
        if k is None:
            raise DimensionError("k is required to embed PoleData residues")
        res = embed_residues(pole, k)
    else:
        res = [np.asarray(r, dtype=complex) for r in pole]
    s = 1.0 if direction >= 0 else -1.0
    res_hat = [s * r for r in res]
    if seed is None:
        seed = np.zeros((3,) + res[0].shape, dtype=complex)
    seed_hat = s * np.asarray(seed, dtype=complex)
    coeffs = frobenius_series(res_hat, seed_hat, order)
    T = np.stack(res_hat) / eps
    for n, C in enumerate(coeffs):
        T = T + C * eps**n
    T = s * T
    zero = np.zeros_like(T[0])
    return (zero, T[0], T[1], T[2])


# ---------------------------------------------------------------------------
# full-circle re-flow
# ---------------------------------------------------------------------------

def _align_phase(vec, ref):
    inner = np.vdot(ref, vec)
    if abs(inner) < 1e-14:
        return vec
    return vec * (np.conj(inner) / abs(inner))


def _rederive_jump(new_large, new_small, stored, boundary, k, tol):
    """Recover jump vectors from interval limits at one boundary."""
    if boundary == "plus":
        deltas = [new_small.at(new_small.z[0])[i] - new_large.at(new_large.z[-1])[i]
                  for i in (1, 2, 3)]
    else:
        deltas = [new_large.at(new_large.z[0])[i] - new_small.at(new_small.z[-1])[i]
                  for i in (1, 2, 3)]
    try:
        u = jump_u_vector(*deltas, tol=max(tol, 1e-9))
    except StructureError as exc:
        raise MatchingError(
            f"boundary_{boundary}: jump is not rank one ({exc})",
            diagnostics={"boundary": boundary, "reason": str(exc)},
        ) from exc
    stored_u = np.concatenate([stored.alpha0, -1j * stored.alpha1])
    u = _align_phase(u, stored_u)
    drift = float(np.linalg.norm(u - stored_u))
    return JumpData(alpha0=u[:k], alpha1=1j * u[k:]), drift


def flow_circle(data: NahmData, cfg: FlowConfig = None, tol=1e-8):
    """Re-integrate both intervals from mid-interval values.

    Boundary data is re-derived from the new interval limits (j = 0) or
    kept and re-checked (j > 0); the output must pass validation, else a
    MatchingError carries the per-check diagnostics.
    """
    cfg = cfg or FlowConfig()
    prof = data.profile
    new_intervals = {}
    for sol in (data.large, data.small):
        i_mid = sol.z.size // 2
        init = sol.at(sol.z[i_mid])
        T0 = None if cfg.gauge == T0_ZERO else init[0]
        substeps = max(1, round(cfg.steps_per_interval / max(sol.z.size - 1, 1)))
        samples = integrate_on_grid(init[1:], sol.z, i_mid, substeps=substeps,
                                    T0=T0)
        t0_arr = sol.T0 if cfg.gauge == AS_GIVEN else np.zeros_like(sol.T0)
        new_intervals[sol.which] = IntervalSolution(
            z=sol.z.copy(), T0=t0_arr.copy(), T1=samples[:, 0],
            T2=samples[:, 1], T3=samples[:, 2], which=sol.which)

    new_large, new_small = new_intervals[LARGE], new_intervals[SMALL]
    diagnostics = {}
    if prof.j == 0:
        bplus, drift_p = _rederive_jump(new_large, new_small,
                                        data.boundary_plus, "plus", prof.k, tol)
        bminus, drift_m = _rederive_jump(new_large, new_small,
                                         data.boundary_minus, "minus", prof.k, tol)
        diagnostics["jump_drift_plus"] = drift_p
        diagnostics["jump_drift_minus"] = drift_m
        jump_tol = max(1e-6, 1e3 * tol)
        if max(drift_p, drift_m) > jump_tol:
            raise MatchingError(
                f"jump vectors drifted by {max(drift_p, drift_m):.3e}",
                diagnostics=diagnostics)
    else:
        bplus, bminus = data.boundary_plus, data.boundary_minus
        eps = cfg.offset(prof.mu1)
        for name, b, end in (("plus", bplus, -1), ("minus", bminus, 0)):
            k = prof.k
            Tend = [new_large.T1[end], new_large.T2[end], new_large.T3[end]]
            zhat = (prof.mu1 - new_large.z[-1] if end == -1
                    else new_large.z[0] + prof.mu1)
            res = embed_residues(b, k)
            sgn = -1.0 if end == -1 else 1.0
            mism = max(
                float(np.linalg.norm((t * zhat - sgn * r)[k:, k:]))
                for t, r in zip(Tend, res))
            diagnostics[f"pole_residue_{name}"] = mism
            scale = max(1.0, max(np.linalg.norm(r) for r in res))
            if mism > max(1e3 * tol, 10 * np.sqrt(max(zhat, eps))) * scale:
                raise MatchingError(
                    f"boundary_{name}: residue mismatch {mism:.3e}",
                    diagnostics=diagnostics)

    out = NahmData(profile=prof, large=new_large, small=new_small,
                   boundary_plus=bplus, boundary_minus=bminus)
    report = validate(out, tol=max(tol, 1e-8))
    if not report.ok:
        for c in report.failed():
            diagnostics[c.name] = c.value
        raise MatchingError("re-flowed data failed validation",
                            diagnostics=diagnostics)
    return out
