"""Sign-indefinite algebraic Riccati equation solver.

Solves  i(XA - A*X) = C*C + X B B* X  for the Hermitian X whose closed-loop
matrix alpha = A + i B B* X has spectrum in the closed lower halfplane.  The
solution is read off an n-dimensional invariant subspace of the
characteristic state-space matrix

    K = [[A, B B*], [C*C, A*]]:

with basis [U1; U2] the solution is X = -i U2 U1^{-1}.  The subspace must
contain every eigenvalue of K with negative imaginary part; when K also has
real eigenvalues the remaining directions are completed from half-dimension
kernels of the real-eigenvalue clusters, falling back to an enumeration of
cluster-contiguous ordered-Schur prefixes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NotContractive, RealSpectrumUnresolved, SpectraOverlap
from .matnum import (
    SchurForm,
    fnorm,
    reorder_schur,
    schur as schur_decompose,
    solve_sylvester,
    to_complex,
)
from .realization import is_controllable, is_observable

__all__ = [
    "Definiteness",
    "RiccatiProblem",
    "RiccatiSolution",
    "RiccatiDiagnostics",
    "hamiltonian",
    "solve",
    "verify",
    "classify_definiteness",
]

EPS_RANK = 1e-10
U1_COND_CAP = 1e10
CANDIDATE_CAP = 64


class Definiteness(Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    INDEFINITE = "Indefinite"


@dataclass
class RiccatiProblem:
    """Data (A, B, C) of a minimal realization C (lam I - A)^{-1} B."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        self.A = to_complex(self.A, "A")
        self.B = to_complex(self.B, "B")
        self.C = to_complex(self.C, "C")
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError("A must be square")
        if self.B.shape[0] != n or self.C.shape[1] != n:
            raise ValueError("B, C must conform with A")
        if not is_controllable(self.A, self.B):
            raise ValueError("(A, B) is not controllable; realization not minimal")
        if not is_observable(self.C, self.A):
            raise ValueError("(C, A) is not observable; realization not minimal")

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass
class RiccatiSolution:
    """Hermitian solution with spectral-side condition satisfied.

    ``selected_spectrum`` lists the eigenvalues of K assigned to the
    invariant subspace (all strictly-stable ones plus the chosen real ones).
    ``hermitian_defect`` records the asymmetry of -i U2 U1^{-1} before the
    Hermitian averaging.
    """

    X: np.ndarray
    alpha: np.ndarray
    residual: float
    selected_spectrum: np.ndarray
    definiteness: Definiteness
    spectral_margin: float
    hermitian_defect: float


@dataclass
class RiccatiDiagnostics:
    residual: float
    residual_scale: float
    spectral_margin: float
    x_smallest_singular: float
    x_largest_singular: float
    definiteness: Definiteness
    hermitian_defect: float


def hamiltonian(p: RiccatiProblem) -> np.ndarray:
    """Characteristic state-space matrix [[A, BB*], [C*C, A*]]."""
    n = p.n
    K = np.zeros((2 * n, 2 * n), complex)
    K[:n, :n] = p.A
    K[:n, n:] = p.B @ p.B.conj().T
    K[n:, :n] = p.C.conj().T @ p.C
    K[n:, n:] = p.A.conj().T
    return K


def _closed_loop(p: RiccatiProblem, X: np.ndarray) -> np.ndarray:
    return p.A + 1j * (p.B @ (p.B.conj().T @ X))


def _riccati_residual(p: RiccatiProblem, X: np.ndarray) -> float:
    BBs = p.B @ p.B.conj().T
    res = 1j * (X @ p.A - p.A.conj().T @ X) - p.C.conj().T @ p.C - X @ BBs @ X
    return fnorm(res)


def classify_definiteness(X, tol: float = EPS_RANK) -> Definiteness:
    """Sign classification of a Hermitian matrix by its eigenvalues."""
    Xh = to_complex(X, "X")
    if Xh.shape[0] == 0:
        return Definiteness.POSITIVE_DEFINITE
    w = np.linalg.eigvalsh((Xh + Xh.conj().T) / 2.0)
    thr = tol * max(np.max(np.abs(w)), 1e-300)
    if np.all(w > thr):
        return Definiteness.POSITIVE_DEFINITE
    if np.all(w < -thr):
        return Definiteness.NEGATIVE_DEFINITE
    return Definiteness.INDEFINITE


def verify(p: RiccatiProblem, X, tol: float = 1e-9) -> RiccatiDiagnostics:
    """Diagnostics for a candidate Hermitian solution; never raises."""
    X = to_complex(X, "X")
    herm = fnorm(X - X.conj().T)
    residual = _riccati_residual(p, X)
    scale = (
        fnorm(X) ** 2 * fnorm(p.B) ** 2 + fnorm(p.C) ** 2 + fnorm(X) * fnorm(p.A)
    )
    alpha = _closed_loop(p, X)
    if p.n:
        margin = float(np.max(np.linalg.eigvals(alpha).imag))
        s = np.linalg.svd(X, compute_uv=False)
        smin, smax = float(s[-1]), float(s[0])
    else:
        margin, smin, smax = -np.inf, np.inf, np.inf
    return RiccatiDiagnostics(
        residual=residual,
        residual_scale=scale,
        spectral_margin=margin,
        x_smallest_singular=smin,
        x_largest_singular=smax,
        definiteness=classify_definiteness(X, tol=EPS_RANK),
        hermitian_defect=herm,
    )


def _cluster_real(values: np.ndarray, tol: float):
    """Group nearby values into clusters; returns lists of (center, size)."""
    order = np.argsort(values.real)
    clusters = []
    cur = [values[order[0]]]
    for idx in order[1:]:
        if abs(values[idx] - cur[-1]) <= tol:
            cur.append(values[idx])
        else:
            clusters.append(cur)
            cur = [values[idx]]
    clusters.append(cur)
    return [(complex(np.mean(c)), len(c)) for c in clusters]


def _null_basis(M: np.ndarray, dim: int) -> np.ndarray | None:
    """Orthonormal basis of the ``dim``-dimensional numerical null space."""
    _, s, vh = np.linalg.svd(M)
    if dim == 0:
        return np.zeros((M.shape[1], 0), complex)
    if s.size < dim:
        return None
    # the claimed null directions must be clearly separated from the rest
    if s.size > dim and s[-dim] > 1e-3 * s[0]:
        return None
    return vh[-dim:].conj().T


def _candidate_x(p: RiccatiProblem, U: np.ndarray):
    """X = -i U2 U1^{-1} from a subspace basis, or None when U1 is bad."""
    n = p.n
    U1, U2 = U[:n, :], U[n:, :]
    s = np.linalg.svd(U1, compute_uv=False)
    if s.size == 0 or s[-1] == 0.0 or s[0] / s[-1] > U1_COND_CAP:
        return None
    X = -1j * (U2 @ np.linalg.inv(U1))
    herm = fnorm(X - X.conj().T)
    return (X + X.conj().T) / 2.0, herm


def _newton_polish(p: RiccatiProblem, X: np.ndarray, rounds: int = 2) -> np.ndarray:
    """Quadratically refine a solution candidate.

    The linearization at X is the Sylvester map D -> D alpha - alpha* D with
    alpha the closed loop at X; each solvable step roughly squares the
    residual.  Steps are skipped when the Sylvester spectra touch (boundary
    spectrum), where the unpolished candidate is already the best available.
    """
    BBs = p.B @ p.B.conj().T
    CsC = p.C.conj().T @ p.C
    best = X
    best_res = _riccati_residual(p, X)
    for _ in range(rounds):
        alpha = _closed_loop(p, best)
        F = 1j * (best @ p.A - p.A.conj().T @ best) - CsC - best @ BBs @ best
        try:
            delta = solve_sylvester(alpha, alpha.conj().T, 1j * F)
        except SpectraOverlap:
            return best
        cand = best + (delta + delta.conj().T) / 2.0
        res = _riccati_residual(p, cand)
        if not np.isfinite(res) or res >= best_res:
            return best
        best, best_res = cand, res
    return best


def _acceptable(diag: RiccatiDiagnostics, tol: float, margin_tol: float) -> bool:
    return (
        diag.residual <= tol * max(diag.residual_scale, 1e-300)
        and diag.spectral_margin <= margin_tol
        and diag.x_smallest_singular > EPS_RANK * diag.x_largest_singular
    )


def solve(p: RiccatiProblem, tol: float = 1e-9) -> RiccatiSolution:
    """Solve for the Hermitian X with stable-side closed-loop spectrum.

    ``tol`` scales the residual acceptance bound.  Raises NotContractive
    when no eigenvalue selection yields a verifiable Hermitian solution
    (the input violates contractivity on the real axis) and
    RealSpectrumUnresolved when K has real eigenvalues but the bounded
    candidate enumeration finds no valid completion.
    """
    n = p.n
    if n == 0:
        return RiccatiSolution(
            X=np.zeros((0, 0), complex),
            alpha=np.zeros((0, 0), complex),
            residual=0.0,
            selected_spectrum=np.zeros(0, complex),
            definiteness=Definiteness.POSITIVE_DEFINITE,
            spectral_margin=-np.inf,
            hermitian_defect=0.0,
        )
    K = hamiltonian(p)
    normK = fnorm(K)
    eps_spec = 1e-9 * max(1.0, normK)
    margin_tol = max(eps_spec, 5e-8 * max(1.0, normK))
    form = schur_decompose(K)
    eigs = form.eigenvalues
    stable = eigs.imag < -eps_spec
    realish = np.abs(eigs.imag) <= eps_spec
    k = int(np.count_nonzero(stable))
    n_real = int(np.count_nonzero(realish))
    if k > n:
        raise NotContractive(
            f"{k} strictly stable eigenvalues exceed the subspace dimension {n}"
        )

    lead = reorder_schur(form, lambda z: z.imag < -eps_spec)
    need = n - k
    candidates: list[tuple[np.ndarray, np.ndarray]] = []  # (basis, spectrum)
    stable_spectrum = np.array(
        [z for z in lead.eigenvalues[:k]], dtype=complex
    )

    if need == 0:
        candidates.append((lead.Q[:, :n], stable_spectrum))
    else:
        if n_real == 0:
            raise NotContractive(
                "stable eigenvalue count is short and K has no real spectrum"
            )
        real_vals = eigs[realish]
        cluster_tol = 1e-6 * max(1.0, normK)
        clusters = _cluster_real(real_vals, cluster_tol)
        # primary: half-dimension kernels per cluster (half-chain selection)
        if all(size % 2 == 0 for _, size in clusters) and sum(
            size // 2 for _, size in clusters
        ) == need:
            cols = [lead.Q[:, :k]]
            spec = [stable_spectrum]
            ok = True
            for center, size in clusters:
                half = size // 2
                P = np.linalg.matrix_power(K - center * np.eye(2 * n), half)
                N = _null_basis(P, half)
                if N is None:
                    ok = False
                    break
                cols.append(N)
                spec.append(np.full(half, center, complex))
            if ok:
                candidates.append((np.hstack(cols), np.concatenate(spec)))
        # fallback: cluster-contiguous ordered-Schur prefixes
        centers = [c for c, _ in clusters]
        for perm in itertools.permutations(range(len(centers))):
            if len(candidates) >= CANDIDATE_CAP:
                break
            current: SchurForm = lead
            chosen: list[int] = []
            for ci in perm:
                chosen.append(ci)
                active = [centers[j] for j in chosen]

                def sel(z, active=active):
                    if z.imag < -eps_spec:
                        return True
                    return abs(z.imag) <= eps_spec and any(
                        abs(z - c) <= cluster_tol for c in active
                    )

                current = reorder_schur(current, sel)
            candidates.append((current.Q[:, :n], current.eigenvalues[:n].copy()))

    seen: list[np.ndarray] = []
    real_present = need > 0
    for U, spectrum in candidates:
        built = _candidate_x(p, U)
        if built is None:
            continue
        X, herm = built
        if any(fnorm(X - Xp) <= 1e-12 * max(1.0, fnorm(X)) for Xp in seen):
            continue
        seen.append(X)
        diag = verify(p, X, tol)
        if _acceptable(diag, tol, margin_tol):
            X = _newton_polish(p, X)
            diag = verify(p, X, tol)
            return RiccatiSolution(
                X=X,
                alpha=_closed_loop(p, X),
                residual=diag.residual,
                selected_spectrum=np.asarray(spectrum, complex),
                definiteness=diag.definiteness,
                spectral_margin=diag.spectral_margin,
                hermitian_defect=herm,
            )
    if real_present:
        raise RealSpectrumUnresolved(
            "no ordered-Schur completion over the real eigenvalues verified; "
            "a user-supplied X can still be checked through verify()"
        )
    raise NotContractive("no invariant-subspace candidate verified as Hermitian")
