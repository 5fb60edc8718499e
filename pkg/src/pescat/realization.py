"""State-space realization algebra for proper rational matrix functions.

A proper rational matrix function F is carried as state-space data

    F(lam) = D + C (lam I - A)^{-1} B,

with A of order n (the state dimension; n = 0 means the constant function
D).  This module provides evaluation, inversion, minimality reduction,
McMillan degree, similarity recovery and a numerical contractivity test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImproperEntry, NotMonic, PoleProximity
from .matnum import fnorm, numeric_rank, to_complex

__all__ = [
    "RationalRealization",
    "evaluate",
    "invert",
    "is_controllable",
    "is_observable",
    "minimal_reduce",
    "mcmillan_degree",
    "similarity_between",
    "from_rational_entries",
    "contractive_on_real_line",
    "probe_grid",
    "max_pointwise_gap",
]

RANK_TOL = 1e-9
POLE_COND_CAP = 1e12


@dataclass
class RationalRealization:
    """State-space data (D, C, A, B) of a proper rational matrix function.

    Shapes: D is m2 x m1, C is m2 x n, A is n x n, B is n x m1.
    Values are treated as immutable after construction.
    """

    D: np.ndarray
    C: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.D = to_complex(self.D, "D")
        self.C = to_complex(self.C, "C")
        self.A = to_complex(self.A, "A")
        self.B = to_complex(self.B, "B")
        m2, m1 = self.D.shape
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.C.shape != (m2, n):
            raise ValueError(f"C must be {m2}x{n}, got {self.C.shape}")
        if self.B.shape != (n, m1):
            raise ValueError(f"B must be {n}x{m1}, got {self.B.shape}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def in_dim(self) -> int:
        return self.D.shape[1]

    @property
    def out_dim(self) -> int:
        return self.D.shape[0]

    def poles(self) -> np.ndarray:
        """Eigenvalues of A (poles for a minimal realization)."""
        return np.linalg.eigvals(self.A) if self.n else np.zeros(0, complex)

    def evaluate(self, lam: complex) -> np.ndarray:
        return evaluate(self, lam)


def evaluate(F: RationalRealization, lam: complex, pole_cond: float = POLE_COND_CAP) -> np.ndarray:
    """Evaluate F at lam; raises PoleProximity at or near a pole of A."""
    if F.n == 0:
        return F.D.copy()
    M = lam * np.eye(F.n) - F.A
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] == 0.0 or s[0] / s[-1] > pole_cond:
        raise PoleProximity(f"evaluation at lam={lam} is within pole proximity")
    return F.D + F.C @ np.linalg.solve(M, F.B)


def invert(F: RationalRealization) -> RationalRealization:
    """Pointwise inverse of a square F with D = I.

    The inverse has the same state dimension with state matrix A - B C.
    """
    m2, m1 = F.D.shape
    if m2 != m1:
        raise NotMonic("inversion requires a square function")
    if fnorm(F.D - np.eye(m1)) > 1e-12 * max(1.0, fnorm(F.D)):
        raise NotMonic("inversion requires D = I")
    return RationalRealization(D=np.eye(m1), C=-F.C, A=F.A - F.B @ F.C, B=F.B)


def _ctrb(A: np.ndarray, B: np.ndarray, scale: float | None = None) -> np.ndarray:
    """Controllability matrix [B, AB, ..., A^{n-1}B] with block scaling.

    Blocks are scaled by max(1, ||A||)^{-k}; this multiplies block columns
    by positive scalars, which changes neither the rank nor the range.
    """
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0), complex)
    if scale is None:
        scale = max(1.0, fnorm(A))
    blocks = [B]
    cur = B
    for _ in range(n - 1):
        cur = (A @ cur) / scale
        blocks.append(cur)
    return np.hstack(blocks)


def is_controllable(A, B, tol: float = RANK_TOL) -> bool:
    """Full-range test: rank [B, AB, ..., A^{n-1}B] equals n."""
    A = to_complex(A, "A")
    B = to_complex(B, "B")
    n = A.shape[0]
    if n == 0:
        return True
    return numeric_rank(_ctrb(A, B), tol) == n


def is_observable(C, A, tol: float = RANK_TOL) -> bool:
    """Dual full-range test on the pair (A*, C*)."""
    A = to_complex(A, "A")
    C = to_complex(C, "C")
    return is_controllable(A.conj().T, C.conj().T, tol)


def _controllable_part(A, B, C, tol):
    """Staircase reduction keeping the controllable states.

    Returns (A_r, B_r, C_r) with (A_r, B_r) controllable and the same
    transfer function D + C (lam I - A)^{-1} B.
    """
    n = A.shape[0]
    if n == 0:
        return A, B, C
    # rank cutoff against the system scale, not the (possibly pure-noise)
    # coupling block itself
    scale = max(1.0, fnorm(A), fnorm(B))
    Atot = A.copy()
    Ttot = np.eye(n, dtype=complex)
    k = 0
    W = B.copy()
    while k < n:
        if W.shape[1] == 0:
            break
        s = np.linalg.svd(W, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            break
        r = int(np.count_nonzero(s > tol * scale))
        if r == 0:
            break
        U, _, _ = np.linalg.svd(W)
        Ufull = np.eye(n, dtype=complex)
        Ufull[k:, k:] = U
        Atot = Ufull.conj().T @ Atot @ Ufull
        Ttot = Ttot @ Ufull
        k += r
        if k >= n:
            break
        W = Atot[k:, k - r : k]
    Bred = (Ttot.conj().T @ B)[:k, :]
    Ared = Atot[:k, :k]
    Cred = (C @ Ttot)[:, :k]
    return Ared, Bred, Cred


def minimal_reduce(F: RationalRealization, tol: float = RANK_TOL) -> RationalRealization:
    """Remove unreachable and unobservable states.

    Controllability staircase followed by the observability staircase on the
    dual; the output state dimension is the McMillan degree.
    """
    A, B, C = _controllable_part(F.A, F.B, F.C, tol)
    A2t, C2t, B2t = _controllable_part(A.conj().T, C.conj().T, B.conj().T, tol)
    return RationalRealization(
        D=F.D.copy(), C=C2t.conj().T, A=A2t.conj().T, B=B2t.conj().T
    )


def mcmillan_degree(F: RationalRealization, tol: float = RANK_TOL) -> int:
    """Minimal state dimension over all realizations of F."""
    return minimal_reduce(F, tol).n


def similarity_between(
    F1: RationalRealization, F2: RationalRealization, tol: float = 1e-8
) -> np.ndarray | None:
    """State-space similarity s with A2 = s A1 s^{-1}, B2 = s B1, C2 = C1 s^{-1}.

    Both realizations must be minimal with matching dimensions and D blocks.
    The candidate is solved from s K1 = K2 over the controllability matrices
    (full row rank under minimality) and then verified; returns None when no
    similarity exists.
    """
    if F1.n != F2.n or F1.D.shape != F2.D.shape:
        return None
    if fnorm(F1.D - F2.D) > tol * max(1.0, fnorm(F1.D)):
        return None
    n = F1.n
    if n == 0:
        return np.zeros((0, 0), complex)
    # the same block scaling on both sides keeps K2 = s K1 exact
    common = max(1.0, fnorm(F1.A), fnorm(F2.A))
    K1 = _ctrb(F1.A, F1.B, common)
    K2 = _ctrb(F2.A, F2.B, common)
    s = K2 @ np.linalg.pinv(K1)
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        return None
    scale_a = max(1.0, fnorm(F1.A), fnorm(F2.A))
    scale_b = max(1.0, fnorm(F1.B), fnorm(F2.B))
    scale_c = max(1.0, fnorm(F1.C), fnorm(F2.C))
    ok = (
        fnorm(s @ F1.A - F2.A @ s) <= tol * scale_a * max(1.0, fnorm(s))
        and fnorm(s @ F1.B - F2.B) <= tol * scale_b * max(1.0, fnorm(s))
        and fnorm(F2.C @ s - F1.C) <= tol * scale_c * max(1.0, fnorm(s))
    )
    return s if ok else None


def _trim(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
    nz = np.nonzero(np.abs(c) > 0)[0]
    if nz.size == 0:
        return np.zeros(1, complex)
    return c[nz[0] :]


def _scalar_realization(num: np.ndarray, den: np.ndarray):
    """Controller-canonical realization of num/den (degrees: num < den)."""
    k = den.size - 1
    a = den[1:]  # monic den: lam^k + a_0 lam^{k-1} + ... + a_{k-1}
    b = np.concatenate([np.zeros(k - num.size, complex), num])
    A = np.zeros((k, k), complex)
    for i in range(k - 1):
        A[i, i + 1] = 1.0
    A[k - 1, :] = -a[::-1]
    B = np.zeros((k, 1), complex)
    B[k - 1, 0] = 1.0
    C = b[::-1].reshape(1, k)
    return A, B, C


def from_rational_entries(entries, tol: float = RANK_TOL) -> RationalRealization:
    """Build a realization from a table of per-entry rational functions.

    ``entries[i][j]`` is a pair ``(num, den)`` of polynomial coefficient
    sequences, highest degree first.  Entries must be proper (the degree of
    the numerator may exceed the denominator degree only through a constant
    part); the result is lifted entrywise through companion forms and then
    minimally reduced.
    """
    m2 = len(entries)
    m1 = len(entries[0]) if m2 else 0
    D = np.zeros((m2, m1), complex)
    blocks = []  # (i, j, A, B, C)
    for i in range(m2):
        if len(entries[i]) != m1:
            raise ValueError("entries table must be rectangular")
        for j in range(m1):
            num, den = entries[i][j]
            num = _trim(num)
            den = _trim(den)
            if den.size == 1 and den[0] == 0:
                raise ImproperEntry(f"entry ({i},{j}) has zero denominator")
            den = den / den[0]
            if num.size > den.size:
                raise ImproperEntry(f"entry ({i},{j}) grows at infinity")
            if num.size == den.size:
                quot, rem = np.polydiv(num, den)
                D[i, j] = quot[0]
                num = _trim(rem)
            if den.size == 1:
                continue
            if np.all(num == 0):
                continue
            A, B, C = _scalar_realization(num, den)
            blocks.append((i, j, A, B, C))
    ntot = sum(b[2].shape[0] for b in blocks)
    A = np.zeros((ntot, ntot), complex)
    B = np.zeros((ntot, m1), complex)
    C = np.zeros((m2, ntot), complex)
    pos = 0
    for i, j, Ab, Bb, Cb in blocks:
        k = Ab.shape[0]
        A[pos : pos + k, pos : pos + k] = Ab
        B[pos : pos + k, j] = Bb[:, 0]
        C[i, pos : pos + k] = Cb[0, :]
        pos += k
    return minimal_reduce(RationalRealization(D=D, C=C, A=A, B=B), tol)


def contractive_on_real_line(
    F: RationalRealization, grid=None, tol: float = 1e-9
) -> bool:
    """Numerical contractivity certificate on the real axis.

    True iff the largest singular value stays at or below 1 + tol on the
    probe grid (default 2001 points on [-100, 100]) and A has no real
    eigenvalue; a real pole of a minimal realization contradicts boundedness
    on the axis. Requires D = 0 so that F vanishes at infinity.
    """
    if fnorm(F.D) > 1e-12 * max(1.0, fnorm(F.C) * fnorm(F.B)):
        raise ValueError("contractivity test requires D = 0")
    if F.n:
        eigs = F.poles()
        if np.any(np.abs(eigs.imag) < 1e-9 * max(1.0, fnorm(F.A))):
            return False
    if grid is None:
        grid = np.linspace(-100.0, 100.0, 2001)
    for lam in grid:
        val = evaluate(F, complex(lam))
        if val.size and np.linalg.norm(val, 2) > 1.0 + tol:
            return False
    return True


def probe_grid(
    poles=(), npts: int = 33, lo: float = -50.0, hi: float = 50.0, guard: float | None = None
) -> np.ndarray:
    """Chebyshev-spaced real probe points that keep clear of given poles.

    Points landing within the guard radius of a pole are nudged along the
    axis until clear.  Two rational functions of degree up to (npts-1)/2
    agreeing on the grid are identical, so grids of 2n+1 points or more
    separate degree-n functions.
    """
    poles = np.asarray(poles, dtype=complex).ravel()
    if guard is None:
        scale = float(np.max(np.abs(poles))) if poles.size else 1.0
        guard = 1e-3 * max(1.0, scale)
    k = np.arange(npts)
    pts = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * (2 * k + 1) / (2 * npts))
    pts = np.sort(pts)
    if poles.size:
        for idx in range(npts):
            bumps = 0
            while np.min(np.abs(pts[idx] - poles)) < guard:
                pts[idx] += 1.7 * guard
                bumps += 1
                if bumps > 50:  # pragma: no cover - dense pole pathologies
                    raise PoleProximity("could not place probe point away from poles")
    return pts


def max_pointwise_gap(F1: RationalRealization, F2: RationalRealization, grid) -> float:
    """Largest Frobenius-norm gap between two functions over a grid."""
    gap = 0.0
    for lam in grid:
        gap = max(gap, fnorm(evaluate(F1, complex(lam)) - evaluate(F2, complex(lam))))
    return gap
