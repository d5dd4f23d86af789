"""Matrix description of the moduli: equations, genericity, generation.

A moduli point is a septuple (A, B, C, D, A', B', C') subject to three
matrix equations and four open genericity conditions, modulo GL(k) acting
by (gAg^-1, gBg^-1, gC, Dg^-1, A'g^-1, B'g^-1, C').  The composite matrix
M built from (B, C_1, B', C'_1) and the shift block carries the
large-interval spectrum, B the small-interval one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    GenerationError,
    SchemaError,
)
from .nahmdata import complex_to_pairs, pairs_to_complex


def shift_matrix(ell, eta):
    """The ell x (ell-1) matrix with -eta on the diagonal, 1 below it."""
    if ell < 1:
        raise DimensionError("ell must be at least 1")
    S = np.zeros((ell, ell - 1), dtype=complex)
    idx = np.arange(ell - 1)
    S[idx, idx] = -eta
    S[idx + 1, idx] = 1.0
    return S


def shift_square(j):
    """Square lower-shift: shift_matrix(j, 0) padded with a zero column."""
    S = np.zeros((j, j), dtype=complex)
    if j > 1:
        S[np.arange(1, j), np.arange(j - 1)] = 1.0
    return S


def _e_plus(j):
    e = np.zeros((1, j), dtype=complex)
    if j > 0:
        e[0, -1] = 1.0
    return e


@dataclass
class MonadData:
    A: np.ndarray    # k x k
    B: np.ndarray    # k x k
    C: np.ndarray    # k x 2
    D: np.ndarray    # 2 x k
    Ap: np.ndarray   # j x k
    Bp: np.ndarray   # 1 x k
    Cp: np.ndarray   # j x 2

    def __post_init__(self):
        for name in ("A", "B", "C", "D", "Ap", "Bp", "Cp"):
            setattr(self, name, np.atleast_2d(
                np.asarray(getattr(self, name), dtype=complex)))
        k = self.A.shape[0]
        j = self.Ap.shape[0]
        shapes = {"A": (k, k), "B": (k, k), "C": (k, 2), "D": (2, k),
                  "Ap": (j, k), "Bp": (1, k), "Cp": (j, 2)}
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise DimensionError(f"{name} has shape {got}, expected {want}")

    @property
    def k(self):
        return self.A.shape[0]

    @property
    def j(self):
        return self.Ap.shape[0]

    def to_json(self):
        return {"k": self.k, "j": self.j,
                **{name: complex_to_pairs(getattr(self, attr))
                   for name, attr in (("A", "A"), ("B", "B"), ("C", "C"),
                                      ("D", "D"), ("Aprime", "Ap"),
                                      ("Bprime", "Bp"), ("Cprime", "Cp"))}}

    @classmethod
    def from_json(cls, obj):
        try:
            k, j = int(obj["k"]), int(obj["j"])
            shapes = {"A": (k, k), "B": (k, k), "C": (k, 2), "D": (2, k),
                      "Ap": (j, k), "Bp": (1, k), "Cp": (j, 2)}
            fields = {}
            for name, attr in (("A", "A"), ("B", "B"), ("C", "C"),
                               ("D", "D"), ("Aprime", "Ap"),
                               ("Bprime", "Bp"), ("Cprime", "Cp")):
                raw = obj[name]
                if np.asarray(raw, dtype=object).size == 0:
                    # empty primed blocks serialize as bare nested lists
                    fields[attr] = np.zeros(shapes[attr], dtype=complex)
                else:
                    fields[attr] = pairs_to_complex(raw).reshape(shapes[attr])
        except KeyError as exc:
            raise SchemaError(f"missing field {exc}", path=str(exc)) from exc
        return cls(**fields)

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


def m_matrix(m: MonadData):
    """The (k+j) x (k+j) composite with B and the shifted primed block."""
    k, j = m.k, m.j
    e = _e_plus(j)
    out = np.zeros((k + j, k + j), dtype=complex)
    out[:k, :k] = m.B
    if j > 0:
        out[:k, k:] = -m.C[:, :1] @ e
        out[k:, :k][0] = m.Bp[0]
        out[k:, k:] = shift_square(j) - m.Cp[:, :1] @ e
    return out


def monad_residuals(m: MonadData):
    """Frobenius norms of the three defining equations' left-hand sides."""
    k, j = m.k, m.j
    r1 = float(np.linalg.norm(m.A @ m.B - m.B @ m.A + m.C @ m.D))
    if j == 0:
        return r1, 0.0, 0.0
    bp_pad = np.zeros((j, k), dtype=complex)
    bp_pad[0] = m.Bp[0]
    r2 = float(np.linalg.norm(
        bp_pad @ m.A + shift_square(j) @ m.Ap - m.Ap @ m.B - m.Cp @ m.D))
    r3 = float(np.linalg.norm(-_e_plus(j) @ m.Ap + m.D[:1]))
    return r1, r2, r3


def gl_action(g, m: MonadData):
    g = np.asarray(g, dtype=complex)
    gi = np.linalg.inv(g)
    return MonadData(A=g @ m.A @ gi, B=g @ m.B @ gi, C=g @ m.C,
                     D=m.D @ gi, Ap=m.Ap @ gi, Bp=m.Bp @ gi, Cp=m.Cp.copy())


# ---------------------------------------------------------------------------
# genericity
# ---------------------------------------------------------------------------

@dataclass
class GenericityReport:
    injective_columns: bool        # (A-y; B-x; D) injective for all x, y
    surjective_rows: bool          # (x-B, A-y, C) surjective for all x, y
    surjective_bordered: bool      # the bordered pencil surjective for all x
    krylov_isomorphism: bool       # the (k+j)-square column matrix invertible
    witnesses: dict = field(default_factory=dict)
    method: str = "EIGEN"

    @property
    def all_ok(self):
        return (self.injective_columns and self.surjective_rows
                and self.surjective_bordered and self.krylov_isomorphism)

    def booleans(self):
        return (self.injective_columns, self.surjective_rows,
                self.surjective_bordered, self.krylov_isomorphism)

    def to_json(self):
        return {
            "injective_columns": bool(self.injective_columns),
            "surjective_rows": bool(self.surjective_rows),
            "surjective_bordered": bool(self.surjective_bordered),
            "krylov_isomorphism": bool(self.krylov_isomorphism),
            "method": self.method,
        }


def _null_basis(M, tol):
    u, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * smax))
    return vh[rank:].conj().T


def _pencil_eigen_violation(B, A, D, tol):
    """Witness (x, y, v) with Bv = xv, Av = yv, Dv = 0, or None.

    x must be an eigenvalue of B; within each ker(B - x) ∩ ker(D) the
    vector must be a genuine eigenvector of A, found from the compressed
    eigenproblem and verified in the ambient space.
    """
    scaleA = max(np.linalg.norm(A), 1.0)
    for x in np.linalg.eigvals(B):
        W = _null_basis(np.vstack([B - x * np.eye(B.shape[0]), D]),
                        max(tol, 1e-9))
        if W.shape[1] == 0:
            continue
        Ac = W.conj().T @ A @ W
        vals, vecs = np.linalg.eig(Ac)
        for y, c in zip(vals, vecs.T):
            v = W @ c
            v = v / np.linalg.norm(v)
            if np.linalg.norm(A @ v - y * v) <= 1e-7 * scaleA:
                return complex(x), complex(y), v
    return None


def _bordered_pencil(m: MonadData):
    k, j = m.k, m.j
    rows, cols = k + j + 1, 2 * k + 2 + j
    P0 = np.zeros((rows, cols), dtype=complex)
    P1 = np.zeros((rows, cols), dtype=complex)
    P0[:k, :k] = -m.B
    P0[:k, k:2 * k] = m.A
    P0[:k, 2 * k:2 * k + 2] = m.C
    P1[:k, :k] = np.eye(k)
    if j > 0:
        P0[k:k + j, :k][0] = -m.Bp[0]
        P0[k:k + j, k:2 * k] = m.Ap
        P0[k:k + j, 2 * k:2 * k + 2] = m.Cp
        P0[k:k + j, 2 * k + 2:] = -shift_square(j)
        P1[k:k + j, 2 * k + 2:] = np.eye(j)
    P0[-1, 2 * k] = 1.0
    if j > 0:
        P0[-1, 2 * k + 2:] = -_e_plus(j)[0]
    return P0, P1


def krylov_matrix(m: MonadData):
    k, j = m.k, m.j
    cols = [np.vstack([m.A, m.Ap])]
    if j > 0:
        M = m_matrix(m)
        c2 = np.concatenate([m.C[:, 1], m.Cp[:, 1]]).reshape(-1, 1)
        v = c2
        for _ in range(j):
            cols.append(v)
            v = M @ v
    return np.hstack(cols)


def genericity_check(m: MonadData, tol=1e-8):
    """Decide the four open conditions by finite eigen reductions."""
    witnesses = {}
    method = "EIGEN"

    hit = _pencil_eigen_violation(m.B, m.A, m.D, tol)
    cond1 = hit is None
    if hit:
        witnesses["injective_columns"] = {"x": hit[0], "y": hit[1]}

    hit = _pencil_eigen_violation(m.B.T, m.A.T, m.C.T, tol)
    cond2 = hit is None
    if hit:
        witnesses["surjective_rows"] = {"x": hit[0], "y": hit[1]}

    P0, P1 = _bordered_pencil(m)
    rng = np.random.default_rng(12345)
    cond3 = True
    rows = P0.shape[0]
    found = False
    for _ in range(3):
        R = rng.standard_normal((P0.shape[1], rows)) \
            + 1j * rng.standard_normal((P0.shape[1], rows))
        a, b = P0 @ R, P1 @ R
        if np.all(np.abs(b) < 1e-14):
            found = True
            candidates = []
            break
        vals = scipy.linalg.eigvals(a, -b)
        if np.all(np.isfinite(vals)) or np.any(np.isfinite(vals)):
            candidates = [x for x in vals if np.isfinite(x)]
            found = True
            break
    if not found:
        method = "SAMPLED"
        candidates = list(rng.standard_normal(50) + 1j * rng.standard_normal(50))
    scale3 = max(np.linalg.norm(P0), 1.0)
    for x in candidates:
        s = np.linalg.svd(P0 + x * P1, compute_uv=False)
        if s[rows - 1] <= max(tol, 1e-9) * max(s[0], scale3):
            cond3 = False
            witnesses["surjective_bordered"] = {"x": complex(x)}
            break

    K = krylov_matrix(m)
    s = np.linalg.svd(K, compute_uv=False)
    cond4 = bool(s[-1] > max(tol, 1e-9) * max(s[0], 1.0))
    if not cond4:
        witnesses["krylov_isomorphism"] = {"sigma_min": float(s[-1])}

    return GenericityReport(cond1, cond2, cond3, cond4, witnesses, method)


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_generic(k, j, seed, retries=100, tol=1e-12):
    """A random moduli point satisfying equations and genericity.

    B is diagonal with distinct eigenvalues; the D columns are scaled
    orthogonal complements of the C rows (so CD has zero diagonal), the
    off-diagonal part of A cancels [A, B] + CD, and for j > 0 the primed
    matrices are solved row by row from the bottom.  Retries on genericity
    failure up to the budget.
    """
    rng = np.random.default_rng(seed)
    last = "no attempt made"
    for _ in range(retries):
        b = _crandn(rng, k)
        if k > 1 and np.min(np.abs(b[:, None] - b[None, :])
                            + np.eye(k)) < 0.2:
            last = "B eigenvalues too close"
            continue
        B = np.diag(b)
        C = _crandn(rng, k, 2)
        t = _crandn(rng, k)
        D = np.stack([-t * C[:, 1], t * C[:, 0]])
        CD = C @ D
        A = np.diag(_crandn(rng, k))
        for i in range(k):
            for l in range(k):
                if i != l:
                    A[i, l] = -CD[i, l] / (b[l] - b[i])
        if j > 0:
            if np.linalg.cond(A) > 1e8:
                last = "A ill-conditioned"
                continue
            Cp = _crandn(rng, j, 2)
            Ap = np.zeros((j, k), dtype=complex)
            Ap[j - 1] = D[0]
            for r in range(j - 1, 0, -1):
                Ap[r - 1] = Ap[r] @ B + Cp[r] @ D
            Bp = ((Ap[0] @ B + Cp[0] @ D) @ np.linalg.inv(A)).reshape(1, k)
        else:
            Ap = np.zeros((0, k), dtype=complex)
            Bp = np.zeros((1, k), dtype=complex)
            Cp = np.zeros((0, 2), dtype=complex)
        m = MonadData(A=A, B=B, C=C, D=D, Ap=Ap, Bp=Bp, Cp=Cp)
        res = monad_residuals(m)
        if max(res) > tol * max(1.0, np.linalg.norm(A) ** 2):
            last = f"equation residuals {res}"
            continue
        rep = genericity_check(m)
        if not rep.all_ok:
            last = "genericity failed: " + ", ".join(
                name for name, ok in zip(
                    ("injective_columns", "surjective_rows",
                     "surjective_bordered", "krylov_isomorphism"),
                    rep.booleans()) if not ok)
            continue
        if j > 0:
            # for j = 0 the composite matrix reduces to B itself
            specB, specM = spectral_fingerprint(m)
            if np.min(np.abs(specB[:, None] - specM[None, :])) < 1e-6:
                last = "spec(B) and spec(M) not disjoint"
                continue
        return m
    raise GenerationError(
        f"no generic point found in {retries} attempts", last_failure=last)


def spectral_fingerprint(m: MonadData):
    """Eigenvalue multisets of B and of the composite matrix M."""
    specB = np.sort_complex(np.linalg.eigvals(m.B))
    specM = np.sort_complex(np.linalg.eigvals(m_matrix(m)))
    return specB, specM
