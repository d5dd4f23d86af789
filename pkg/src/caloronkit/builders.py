"""Reference constructions: exact solutions and seeded random fixtures.

Everything here is deterministic given its arguments, so the same inputs
always produce bit-identical data for tests and CLI fixtures.
"""

from __future__ import annotations

import numpy as np

from .nahmdata import (
    LARGE,
    SMALL,
    IntervalSolution,
    JumpData,
    NahmData,
    PoleData,
    RankProfile,
)


def random_skew(d, rng, scale=1.0):
    """Random skew-hermitian d x d matrix."""
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (m - m.conj().T)


def spin_matrices(j):
    """Hermitian spin-(j-1)/2 generators S1, S2, S3 of dimension j.

    [S1, S2] = i S3 cyclically; S3 = diag(-s, ..., s) with s = (j-1)/2.
    """
    if j < 1:
        raise ValueError("dimension must be >= 1")
    s = (j - 1) / 2.0
    mvals = -s + np.arange(j)
    S3 = np.diag(mvals).astype(complex)
    # raising operator: <m+1| S+ |m> = sqrt(s(s+1) - m(m+1))
    Sp = np.zeros((j, j), dtype=complex)
    for i in range(j - 1):
        m = mvals[i]
        Sp[i + 1, i] = np.sqrt(s * (s + 1) - m * (m + 1))
    S1 = 0.5 * (Sp + Sp.conj().T)
    S2 = (Sp - Sp.conj().T) / (2j)
    return S1, S2, S3


def su2_residues(j):
    """Skew-hermitian residue triple with R_i = -[R_{i+1}, R_{i+2}]."""
    return tuple(1j * S for S in spin_matrices(j))


def standard_iota(k, j):
    """Embedding of the small side into the first k large components."""
    iota = np.zeros((k + j, k), dtype=complex)
    iota[:k, :k] = np.eye(k)
    return iota


def pole_data(k, j):
    """Standard boundary pole data for the given rank profile."""
    R1, R2, R3 = su2_residues(j)
    return PoleData(R1=R1, R2=R2, R3=R3, iota=standard_iota(k, j))


# ---------------------------------------------------------------------------
# j = 0 fixtures
# ---------------------------------------------------------------------------

def k1j0_data(mu0=2.0, mu1=0.5, n=41, a0=1.0, a1=0.6j):
    """Constant k=1, j=0 data: zero small side, rank-one jumps at both ends.

    The flow right-hand side vanishes for 1x1 matrices, so constants solve
    the equations exactly; the large-side constants are minus the jump at
    the plus boundary, which makes both boundary jumps consistent.
    """
    prof = RankProfile(k=1, j=0, mu0=mu0, mu1=mu1)
    plus = JumpData(alpha0=[a0], alpha1=[a1])
    minus = JumpData(alpha0=[np.conj(a1)], alpha1=[-np.conj(a0)])
    d1, d2, d3 = plus.deltas()

    def interval(a, b, mats, which):
        z = np.linspace(a, b, n)
        return IntervalSolution(
            z=z,
            T0=np.zeros((n, 1, 1)),
            T1=np.broadcast_to(mats[0], (n, 1, 1)).copy(),
            T2=np.broadcast_to(mats[1], (n, 1, 1)).copy(),
            T3=np.broadcast_to(mats[2], (n, 1, 1)).copy(),
            which=which,
        )

    zero = np.zeros((1, 1))
    large = interval(-mu1, mu1, (-d1, -d2, -d3), LARGE)
    small = interval(mu1, mu0 - mu1, (zero, zero, zero), SMALL)
    return NahmData(profile=prof, large=large, small=small,
                    boundary_plus=plus, boundary_minus=minus)


def divisor_fixture_j0(k=2, seed=0):
    """Generic skew-hermitian boundary constants plus a random rank-one jump.

    Returns (T1, T2, T3, alpha0, alpha1).  Skew-hermiticity alone makes
    both curves real; generic matrices keep the small-side curve
    irreducible so every intersection point has corank one.
    """
    rng = np.random.default_rng(seed)
    T = [random_skew(k, rng) for _ in range(3)]
    alpha0 = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    alpha1 = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return T[0], T[1], T[2], alpha0, alpha1


def reducible_j0_data(mu0=2.0, mu1=0.5, n=41):
    """Block-diagonal k=2, j=0 data with a decoupled zero component.

    The second component carries no potential and no jump, so at the
    spacetime origin the operator restricted to it is a plain periodic
    derivative with a constant section in its kernel; rank checks must
    reject this.
    """
    prof = RankProfile(k=2, j=0, mu0=mu0, mu1=mu1)
    plus = JumpData(alpha0=[1.0, 0.0], alpha1=[0.4j, 0.0])
    minus = JumpData(alpha0=[-0.4j, 0.0], alpha1=[-1.0, 0.0])
    d1, d2, d3 = plus.deltas()

    def interval(a, b, mats, which):
        z = np.linspace(a, b, n)
        return IntervalSolution(
            z=z,
            T0=np.zeros((n, 2, 2)),
            T1=np.broadcast_to(mats[0], (n, 2, 2)).copy(),
            T2=np.broadcast_to(mats[1], (n, 2, 2)).copy(),
            T3=np.broadcast_to(mats[2], (n, 2, 2)).copy(),
            which=which,
        )

    zero = np.zeros((2, 2))
    large = interval(-mu1, mu1, (-d1, -d2, -d3), LARGE)
    small = interval(mu1, mu0 - mu1, (zero, zero, zero), SMALL)
    return NahmData(profile=prof, large=large, small=small,
                    boundary_plus=plus, boundary_minus=minus)


# ---------------------------------------------------------------------------
# j = 1 exact solution
# ---------------------------------------------------------------------------

def exact_j1_data(m=0.8, mu0=2.0, mu1=0.5, n=801):
    """Closed-form k=1, j=1 data built from sec/tan profiles.

    On the large interval T_i = f_i(z) * (-i sigma_i / 2) with
    f1 = f2 = m sec(mz), f3 = m tan(mz); these profiles solve the reduced
    equations f1' = f2 f3 (cyclic, with the sign fixed by the -i/2
    normalization).  The small side is the scalar constant matching the
    (1,1) and (2,2) corner entries through the boundary embeddings.
    """
    if abs(m * mu1) >= np.pi / 2:
        raise ValueError("profile blows up inside the interval")
    prof = RankProfile(k=1, j=1, mu0=mu0, mu1=mu1)
    sigma = (np.array([[0, 1], [1, 0]], dtype=complex),
             np.array([[0, -1j], [1j, 0]]),
             np.array([[1, 0], [0, -1]], dtype=complex))
    zL = np.linspace(-mu1, mu1, n)
    f = [m / np.cos(m * zL), m / np.cos(m * zL), m * np.tan(m * zL)]
    TL = [np.einsum("n,ij->nij", fi, -0.5j * s) for fi, s in zip(f, sigma)]
    large = IntervalSolution(z=zL, T0=np.zeros((n, 2, 2)),
                             T1=TL[0], T2=TL[1], T3=TL[2], which=LARGE)
    c3 = -0.5j * m * np.tan(m * mu1)
    zS = np.linspace(mu1, mu0 - mu1, n)
    zero = np.zeros((n, 1, 1))
    small = IntervalSolution(z=zS, T0=zero.copy(), T1=zero.copy(),
                             T2=zero.copy(),
                             T3=np.full((n, 1, 1), c3), which=SMALL)
    Rz = np.zeros((1, 1), dtype=complex)
    e1 = np.array([[1.0], [0.0]], dtype=complex)
    e2 = np.array([[0.0], [1.0]], dtype=complex)
    plus = PoleData(R1=Rz, R2=Rz, R3=Rz, iota=e1)
    minus = PoleData(R1=Rz, R2=Rz, R3=Rz, iota=e2)
    return NahmData(profile=prof, large=large, small=small,
                    boundary_plus=plus, boundary_minus=minus)


# ---------------------------------------------------------------------------
# monad / curve fingerprint pair
# ---------------------------------------------------------------------------

def fingerprint_pair(k=2, j=1, seed=42):
    """Monad data plus constant matrix triples sharing its two spectra.

    Returns (monad, small_triple, large_triple): for each triple
    T1 + i T2 equals the matrix whose spectrum the monad predicts for the
    corresponding interval (B for the small one, the composite M for the
    large one), with T3 a seeded random skew-hermitian matrix.
    """
    from .moduli import m_matrix, random_generic

    m = random_generic(k, j, seed)
    rng = np.random.default_rng(seed + 1)

    def triple(beta, d):
        T1 = 0.5 * (beta - beta.conj().T)
        T2 = (beta + beta.conj().T) / (2j)
        T3 = random_skew(d, rng)
        return T1, T2, T3

    small = triple(m.B, k)
    large = triple(m_matrix(m), k + j)
    return m, small, large
