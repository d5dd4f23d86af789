"""Containers and validators for rank-profiled Nahm data on the circle.

The circle of circumference ``mu0`` is split by the points ``±mu1`` into a
LARGE interval ``(-mu1, mu1)`` carrying ``(k+j) x (k+j)`` skew-hermitian
matrix functions ``T0..T3`` and a SMALL interval ``(mu1, mu0-mu1)``
carrying ``k x k`` ones.  At each boundary point the data carries either
pole residues forming an irreducible su(2) representation (``j > 0``) or a
pair of jump vectors inducing a rank-one discontinuity (``j = 0``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    InvariantError,
    SchemaError,
    StructureError,
)

LARGE = "large"
SMALL = "small"

# spinor algebra: e1*e2 = e3, e_i**2 = -1 (quaternionic convention)
E1 = np.array([[0, 1j], [1j, 0]])
E2 = np.array([[0, -1], [1, 0]], dtype=complex)
E3 = np.array([[1j, 0], [0, -1j]])
SPIN = (E1, E2, E3)


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def complex_to_pairs(a):
    """Nested lists with innermost [re, im] pairs, row-major."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def pairs_to_complex(obj):
    a = np.asarray(obj, dtype=float)
    if a.ndim < 1 or a.shape[-1] != 2:
        raise SchemaError("expected [re, im] pairs in the innermost axis")
    return a[..., 0] + 1j * a[..., 1]


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankProfile:
    k: int
    j: int
    mu0: float
    mu1: float

    def __post_init__(self):
        if self.k < 1 or self.j < 0:
            raise InvariantError(f"need k >= 1 and j >= 0, got k={self.k}, j={self.j}")
        if self.mu0 <= 0:
            raise InvariantError("mu0 must be positive")
        if not 0 < self.mu1 < self.mu0 - self.mu1:
            raise InvariantError(
                f"need 0 < mu1 < mu0 - mu1, got mu0={self.mu0}, mu1={self.mu1}"
            )

    @property
    def large_size(self):
        return self.k + self.j

    @property
    def small_size(self):
        return self.k

    @property
    def period(self):
        """Period of the transformed fields in the time direction."""
        return 2 * np.pi / self.mu0

    def interval(self, which):
        if which == LARGE:
            return (-self.mu1, self.mu1)
        return (self.mu1, self.mu0 - self.mu1)


@dataclass
class IntervalSolution:
    z: np.ndarray          # strictly increasing samples, shape (n,)
    T0: np.ndarray         # shape (n, d, d)
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    which: str = LARGE

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        for name in ("T0", "T1", "T2", "T3"):
            a = np.asarray(getattr(self, name), dtype=complex)
            setattr(self, name, a)
            if a.ndim != 3 or a.shape[0] != self.z.size or a.shape[1] != a.shape[2]:
                raise DimensionError(
                    f"{name} must have shape (len(z), d, d), got {a.shape}"
                )
        if self.z.size < 1 or np.any(np.diff(self.z) <= 0):
            raise InvariantError("z samples must be strictly increasing")

    @property
    def size(self):
        return self.T1.shape[1]

    @property
    def triples(self):
        return (self.T1, self.T2, self.T3)

    def at(self, z):
        """Linear interpolation of (T0, T1, T2, T3) at a point z."""
        zs = self.z
        if not zs[0] <= z <= zs[-1]:
            raise InvariantError(f"z={z} outside sampled range [{zs[0]}, {zs[-1]}]")
        i = min(np.searchsorted(zs, z, side="right"), zs.size - 1)
        lo = max(i - 1, 0)
        hi = min(lo + 1, zs.size - 1)
        if hi == lo:
            w = 0.0
        else:
            w = (z - zs[lo]) / (zs[hi] - zs[lo])
        return tuple(
            (1 - w) * a[lo] + w * a[hi] for a in (self.T0, self.T1, self.T2, self.T3)
        )

    def skew_defect(self):
        return max(
            float(np.max(np.abs(a + np.conj(np.swapaxes(a, 1, 2)))))
            for a in (self.T0, self.T1, self.T2, self.T3)
        )


@dataclass
class PoleData:
    """Boundary data for j > 0: residues and the small-side embedding."""

    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    iota: np.ndarray       # (k+j) x k isometry

    def __post_init__(self):
        for name in ("R1", "R2", "R3", "iota"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=complex))

    @property
    def residues(self):
        return (self.R1, self.R2, self.R3)

    @property
    def pi(self):
        """Left inverse of iota (adjoint of an isometry)."""
        return self.iota.conj().T

    def su2_defect(self):
        """Max norm of R_i + [R_{i+1}, R_{i+2}] over cyclic i."""
        r = self.residues
        return max(
            float(np.linalg.norm(r[i] + r[(i + 1) % 3] @ r[(i + 2) % 3]
                                 - r[(i + 2) % 3] @ r[(i + 1) % 3]))
            for i in range(3)
        )


@dataclass
class JumpData:
    """Boundary data for j = 0: the two jump vectors."""

    alpha0: np.ndarray
    alpha1: np.ndarray

    def __post_init__(self):
        self.alpha0 = np.asarray(self.alpha0, dtype=complex).ravel()
        self.alpha1 = np.asarray(self.alpha1, dtype=complex).ravel()
        if self.alpha0.shape != self.alpha1.shape:
            raise DimensionError("alpha0 and alpha1 must have the same length")

    def factors(self, zeta):
        """Column w and row x with jump(zeta) = w x^T."""
        w = self.alpha0 + self.alpha1 * zeta
        x = np.conj(self.alpha1) - np.conj(self.alpha0) * zeta
        return w, x

    def deltas(self):
        """Jump of (T1, T2, T3) across the boundary (increasing z)."""
        a0, a1 = self.alpha0, self.alpha1
        p = np.outer(a0, np.conj(a1))   # jump of T1 + i T2
        m = -np.outer(a1, np.conj(a0))  # jump of T1 - i T2
        d1 = (p + m) / 2
        d2 = (p - m) / (2j)
        d3 = 0.5j * (np.outer(a1, np.conj(a1)) - np.outer(a0, np.conj(a0)))
        return d1, d2, d3


@dataclass
class NahmData:
    profile: RankProfile
    large: IntervalSolution
    small: IntervalSolution
    boundary_plus: object      # PoleData or JumpData
    boundary_minus: object

    def __post_init__(self):
        if self.large.size != self.profile.large_size:
            raise DimensionError("large interval matrix size != k + j")
        if self.small.size != self.profile.small_size:
            raise DimensionError("small interval matrix size != k")
        want = JumpData if self.profile.j == 0 else PoleData
        for b in (self.boundary_plus, self.boundary_minus):
            if not isinstance(b, want):
                raise InvariantError(
                    f"j={self.profile.j} requires {want.__name__} boundary data"
                )

    # -- JSON -------------------------------------------------------------

    def to_json(self):
        def interval(s):
            return {
                "z": s.z.tolist(),
                "T0": complex_to_pairs(s.T0),
                "T1": complex_to_pairs(s.T1),
                "T2": complex_to_pairs(s.T2),
                "T3": complex_to_pairs(s.T3),
            }

        def boundary(b):
            if isinstance(b, PoleData):
                return {"pole": {
                    "R1": complex_to_pairs(b.R1),
                    "R2": complex_to_pairs(b.R2),
                    "R3": complex_to_pairs(b.R3),
                    "iota": complex_to_pairs(b.iota),
                }}
            return {"jump": {
                "alpha0": complex_to_pairs(b.alpha0),
                "alpha1": complex_to_pairs(b.alpha1),
            }}

        return {
            "mu0": self.profile.mu0,
            "mu1": self.profile.mu1,
            "k": self.profile.k,
            "j": self.profile.j,
            "large": interval(self.large),
            "small": interval(self.small),
            "boundary_plus": boundary(self.boundary_plus),
            "boundary_minus": boundary(self.boundary_minus),
        }

    @classmethod
    def from_json(cls, obj):
        try:
            profile = RankProfile(
                k=int(obj["k"]), j=int(obj["j"]),
                mu0=float(obj["mu0"]), mu1=float(obj["mu1"]),
            )
        except KeyError as exc:
            raise SchemaError(f"missing field {exc}", path=str(exc)) from exc

        def interval(d, which):
            try:
                return IntervalSolution(
                    z=np.asarray(d["z"], dtype=float),
                    T0=pairs_to_complex(d["T0"]),
                    T1=pairs_to_complex(d["T1"]),
                    T2=pairs_to_complex(d["T2"]),
                    T3=pairs_to_complex(d["T3"]),
                    which=which,
                )
            except KeyError as exc:
                raise SchemaError(f"{which}: missing field {exc}",
                                  path=f"{which}.{exc}") from exc

        def boundary(d, name):
            if "pole" in d:
                p = d["pole"]
                return PoleData(
                    R1=pairs_to_complex(p["R1"]), R2=pairs_to_complex(p["R2"]),
                    R3=pairs_to_complex(p["R3"]), iota=pairs_to_complex(p["iota"]),
                )
            if "jump" in d:
                jd = d["jump"]
                return JumpData(alpha0=pairs_to_complex(jd["alpha0"]),
                                alpha1=pairs_to_complex(jd["alpha1"]))
            raise SchemaError(f"{name} must contain 'pole' or 'jump'", path=name)

        return cls(
            profile=profile,
            large=interval(obj["large"], LARGE),
            small=interval(obj["small"], SMALL),
            boundary_plus=boundary(obj["boundary_plus"], "boundary_plus"),
            boundary_minus=boundary(obj["boundary_minus"], "boundary_minus"),
        )

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json(), f)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                obj = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read {path}: {exc}", path=str(path)) from exc
        return cls.from_json(obj)


# ---------------------------------------------------------------------------
# matrix families
# ---------------------------------------------------------------------------

def build_A(T1, T2, T3, zeta):
    """(T1 + i T2) - 2i T3 zeta + (T1 - i T2) zeta**2."""
    T1, T2, T3 = (np.asarray(t, dtype=complex) for t in (T1, T2, T3))
    if not (T1.shape == T2.shape == T3.shape) or T1.shape[-1] != T1.shape[-2]:
        raise DimensionError("T1, T2, T3 must be square matrices of equal size")
    return (T1 + 1j * T2) - 2j * T3 * zeta + (T1 - 1j * T2) * zeta**2


def build_Aplus(T1, T2, T3, zeta):
    """-i T3 + (T1 - i T2) zeta."""
    T1, T2, T3 = (np.asarray(t, dtype=complex) for t in (T1, T2, T3))
    if not (T1.shape == T2.shape == T3.shape) or T1.shape[-1] != T1.shape[-2]:
        raise DimensionError("T1, T2, T3 must be square matrices of equal size")
    return -1j * T3 + (T1 - 1j * T2) * zeta


def A_coeffs(T1, T2, T3):
    """Coefficients (A0, A1, A2) of the quadratic pencil in zeta."""
    return (T1 + 1j * T2, -2j * T3, T1 - 1j * T2)


# ---------------------------------------------------------------------------
# jump tensor algebra
# ---------------------------------------------------------------------------

def spin_tensor(M1, M2, M3):
    """Sum of kron(e_i, M_i); blocks indexed by the spinor factor."""
    return sum(np.kron(e, np.asarray(m, dtype=complex))
               for e, m in zip(SPIN, (M1, M2, M3)))


def jump_u_vector(deltaT1, deltaT2, deltaT3, tol=1e-9):
    """Vector u with (u u*)_0 = sum_i deltaT_i (x) e_i.

    ``( )_0`` removes the component proportional to the identity on the
    spinor factor.  The result is (alpha0, -i alpha1) for the jump induced
    by vectors (alpha0, alpha1), up to a global phase.  Raises
    StructureError when the tensor does not have this outer-product form.
    """
    d1, d2, d3 = (np.asarray(d, dtype=complex) for d in (deltaT1, deltaT2, deltaT3))
    k = d1.shape[0]
    M = spin_tensor(d1, d2, d3)
    M11 = M[:k, :k]
    M12 = M[:k, k:]
    scale = np.linalg.norm(M)
    if scale == 0:
        return np.zeros(2 * k, dtype=complex)
    if np.linalg.norm(M12) > tol * scale:
        u_, s, vh = np.linalg.svd(M12)
        if len(s) > 1 and s[1] > tol * s[0]:
            raise StructureError("off-diagonal spinor block has rank >= 2")
        a = u_[:, 0]
        # with u = (u1, u2): M11 = (u1 u1* - u2 u2*)/2 and M12 = u1 u2*,
        # so 2 tr(M11) = |u1|^2 - |u2|^2 and tr(M12 M12*) = |u1|^2 |u2|^2
        delta = 2.0 * float(np.real(np.trace(M11)))
        prod = float(np.sum(s * s))
        alpha = 0.5 * (delta + np.sqrt(delta * delta + 4.0 * prod))
        u1 = np.sqrt(alpha) * a
        u2 = M12.conj().T @ u1 / alpha
    else:
        # one spinor component vanishes; 2*M11 = ±(nonzero part) u u†
        w, v = np.linalg.eigh((M11 + M11.conj().T))
        idx = int(np.argmax(np.abs(w)))
        lam = w[idx]
        # M11 + M11^dagger = 2 M11 = ± u u^dagger, so |u|^2 = |lam| already
        vec = np.sqrt(abs(lam)) * v[:, idx]
        if lam > 0:
            u1, u2 = vec, np.zeros(k, dtype=complex)
        else:
            u1, u2 = np.zeros(k, dtype=complex), vec
    u = np.concatenate([u1, u2])
    outer = np.outer(u, u.conj())
    # remove the spinor-identity component
    tr_part = (outer[:k, :k] + outer[k:, k:]) / 2
    outer0 = outer.copy()
    outer0[:k, :k] -= tr_part
    outer0[k:, k:] -= tr_part
    if np.linalg.norm(outer0 - M) > max(tol * scale, 1e3 * tol):
        raise StructureError(
            "tensor is not of trace-free outer-product form "
            f"(residual {np.linalg.norm(outer0 - M):.3e})"
        )
    return u


# ---------------------------------------------------------------------------
# symmetry gauge fixing
# ---------------------------------------------------------------------------

def _takagi_unitary_symmetric(S):
    """U with S = U U^T for unitary symmetric S.

    Splits S into commuting real symmetric parts, diagonalizes them in a
    common orthogonal basis, and halves the resulting phases.
    """
    A = np.real(S)
    B = np.imag(S)
    rng = np.random.default_rng(0)
    for _ in range(8):
        mu = rng.standard_normal()
        _, O = np.linalg.eigh(A + mu * B)
        d = O.T @ S @ O
        if np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-8:
            phases = np.angle(np.diag(d))
            return O @ np.diag(np.exp(0.5j * phases))
    raise StructureError("could not factor the symmetric unitary gauge")


def symmetry_gauge(mats, tol=1e-9):
    """Unitary g making all g m g† complex symmetric, if one exists.

    Solves S m = m^T S for a unitary symmetric S, then factors S = U U^T
    and returns g = U^T.
    """
    mats = [np.asarray(m, dtype=complex) for m in mats]
    d = mats[0].shape[0]
    rows = []
    for m in mats:
        # vec(S m - m^T S) = (m^T kron I - I kron m^T) vec(S)
        rows.append(np.kron(m.T, np.eye(d)) - np.kron(np.eye(d), m.T))
    op = np.vstack(rows)
    _, s, vh = np.linalg.svd(op)
    S = vh[-1].conj().reshape(d, d)
    S = (S + S.T) / 2
    u_, sv, vh2 = np.linalg.svd(S)
    if sv[-1] < 1e-8 * sv[0]:
        raise StructureError("no invertible symmetric intertwiner found")
    S = u_ @ vh2  # unitary polar factor, still symmetric
    S = (S + S.T) / 2
    U = _takagi_unitary_symmetric(S)
    return U.T


@dataclass
class SymmetryReport:
    raw_defect: float
    gauged_defect: float
    flow_defect: float
    gauge: np.ndarray

    @property
    def defect(self):
        return self.gauged_defect


def symmetry_defect(data: NahmData, zeta_probe=0.37 + 0.21j):
    """Transposition defect of the data at z = 0, minimized over gauge.

    Reports the raw defect max_i |T_i(0) - T_i(0)^T|, the defect after the
    best unitary symmetrizing gauge, and the defect of A(zeta*, -z) =
    A(zeta*, z)^T along the sampled large interval.
    """
    T = data.large.at(0.0)
    mats = list(T)
    raw = max(float(np.linalg.norm(m - m.T)) for m in mats)
    try:
        g = symmetry_gauge(mats)
        gauged = max(
            float(np.linalg.norm(g @ m @ g.conj().T - (g @ m @ g.conj().T).T))
            for m in mats
        )
        if gauged > raw:
            g, gauged = np.eye(data.large.size, dtype=complex), raw
    except StructureError:
        g, gauged = np.eye(data.large.size, dtype=complex), raw

    flow = 0.0
    zs = data.large.z
    zmax = min(-zs[0], zs[-1])
    for z in np.linspace(0, zmax, 9):
        _, p1, p2, p3 = data.large.at(z)
        _, m1, m2, m3 = data.large.at(-z)
        Ap = g @ build_A(p1, p2, p3, zeta_probe) @ g.conj().T
        Am = g @ build_A(m1, m2, m3, zeta_probe) @ g.conj().T
        flow = max(flow, float(np.linalg.norm(Am - Ap.T)))
    return SymmetryReport(raw_defect=raw, gauged_defect=gauged,
                          flow_defect=flow, gauge=g)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def commutant_dimension(mats, tol=1e-8):
    """Dimension of {X : [m, X] = 0 for all m}."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    d = mats[0].shape[0]
    rows = [np.kron(np.eye(d), m) - np.kron(m.T, np.eye(d)) for m in mats]
    op = np.vstack(rows)
    s = np.linalg.svd(op, compute_uv=False)
    scale = max(s[0], 1.0)
    return int(np.sum(s < tol * scale))


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    note: str = ""

    def to_json(self):
        return {"name": self.name, "passed": bool(self.passed),
                "value": float(self.value), "threshold": float(self.threshold),
                "note": self.note}


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    def add(self, name, value, threshold, note="", invert=False):
        passed = value >= threshold if invert else value <= threshold
        self.checks.append(CheckResult(name, passed, float(value),
                                       float(threshold), note))

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def to_json(self):
        return {"ok": self.ok, "checks": [c.to_json() for c in self.checks]}


def _spread_samples(sol, count=5):
    idx = np.linspace(0, sol.z.size - 1, count).astype(int)
    return idx


def validate(data: NahmData, tol=1e-8):
    """Structural validation; returns a report with one entry per check."""
    rep = ValidationReport()
    prof = data.profile

    rep.add("skew_hermitian_large", data.large.skew_defect(), tol)
    rep.add("skew_hermitian_small", data.small.skew_defect(), tol)
    rep.add("rank_profile",
            abs(data.large.size - prof.large_size)
            + abs(data.small.size - prof.small_size), 0.5)

    # finite limits on the small side
    lim = max(float(np.linalg.norm(a)) for a in
              (data.small.T1[0], data.small.T1[-1], data.small.T2[0],
               data.small.T2[-1], data.small.T3[0], data.small.T3[-1]))
    rep.add("small_side_finite_limits", 0.0 if np.isfinite(lim) else 1.0, 0.5,
            note=f"max endpoint norm {lim:.3e}")

    if prof.j > 1:
        # off-diagonal block decay near each large-interval end
        k = prof.k
        target = (prof.j - 1) / 2 - 0.1
        fits = []
        for end in (0, 1):
            if end == 0:
                idx = np.arange(min(10, data.large.z.size))
                zhat = data.large.z[idx] + prof.mu1
            else:
                idx = np.arange(data.large.z.size - min(10, data.large.z.size),
                                data.large.z.size)
                zhat = prof.mu1 - data.large.z[idx]
            norms = []
            for i in idx:
                n = sum(np.linalg.norm(t[i][:k, k:]) + np.linalg.norm(t[i][k:, :k])
                        for t in data.large.triples)
                norms.append(n)
            norms = np.asarray(norms)
            if np.max(norms) < 1e-12:
                fits.append(np.inf)
                continue
            mask = norms > 1e-14
            p = np.polyfit(np.log(zhat[mask]), np.log(norms[mask]), 1)
            fits.append(p[0])
        rep.add("large_block_decay", min(fits), target, invert=True,
                note=f"fitted exponents {fits}")

    if prof.j > 0:
        for name, b in (("plus", data.boundary_plus),
                        ("minus", data.boundary_minus)):
            rep.add(f"residue_su2_{name}", b.su2_defect(), 1e3 * tol)
            rep.add(f"residue_irreducible_{name}",
                    commutant_dimension(b.residues), 1.5)
            rep.add(f"iota_isometry_{name}",
                    float(np.linalg.norm(b.pi @ b.iota - np.eye(prof.k))), 1e3 * tol)
    else:
        # rank-one jump consistency between the interval limits
        for name, b, dT in (
            ("plus", data.boundary_plus,
             [data.small.at(data.small.z[0])[i] - data.large.at(data.large.z[-1])[i]
              for i in (1, 2, 3)]),
            ("minus", data.boundary_minus,
             [data.large.at(data.large.z[0])[i] - data.small.at(data.small.z[-1])[i]
              for i in (1, 2, 3)]),
        ):
            want = b.deltas()
            mismatch = max(float(np.linalg.norm(got - w))
                           for got, w in zip(dT, want))
            scale = max(1.0, max(float(np.linalg.norm(w)) for w in want))
            rep.add(f"rank_one_jump_{name}", mismatch / scale, 1e3 * tol)

    sym = symmetry_defect(data)
    scale0 = max(1.0, max(float(np.linalg.norm(m)) for m in data.large.at(0.0)))
    rep.add("z0_symmetry", sym.gauged_defect / scale0, 1e4 * tol,
            note=f"raw defect {sym.raw_defect:.3e}")

    samples = []
    for i in _spread_samples(data.large):
        samples.extend([data.large.T1[i], data.large.T2[i], data.large.T3[i]])
    rep.add("irreducible", commutant_dimension(samples), 1.5,
            note="joint commutant dimension")
    return rep
