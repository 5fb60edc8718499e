"""Dense complex linear-algebra kernel.

Decompositions, matrix equation solvers, matrix exponentials and
exponential integrals used by every other module.  Matrices are plain
``numpy.ndarray`` with dtype ``complex128``; everything here is pure and
safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NonConvergence, Singular, SpectraOverlap, SwapFailure

__all__ = [
    "SchurForm",
    "to_complex",
    "fnorm",
    "schur",
    "reorder_schur",
    "solve_sylvester",
    "mat_exp",
    "exp_integral",
    "solve_linear",
    "numeric_rank",
]


def to_complex(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex array and reject non-finite entries."""
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def fnorm(M) -> float:
    """Frobenius norm, 0.0 for empty matrices."""
    A = np.asarray(M)
    return float(np.linalg.norm(A)) if A.size else 0.0


def _require_square(A: np.ndarray, name: str) -> None:
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")


@dataclass
class SchurForm:
    """Unitary similarity M = Q T Q* with T upper triangular.

    The diagonal of T lists the eigenvalues of the source matrix.
    """

    Q: np.ndarray
    T: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.diag(self.T).copy()

    @property
    def n(self) -> int:
        return self.T.shape[0]


def schur(M) -> SchurForm:
    """Complex Schur decomposition M = Q T Q*.

    Raises NonConvergence if the underlying QR iteration fails, which
    signals pathological input.
    """
    A = to_complex(M, "M")
    _require_square(A, "M")
    n = A.shape[0]
    if n == 0:
        return SchurForm(Q=np.zeros((0, 0), complex), T=np.zeros((0, 0), complex))
    try:
        T, Q = sla.schur(A, output="complex")
    except sla.LinAlgError as exc:  # pragma: no cover - needs pathological input
        raise NonConvergence(f"Schur iteration did not converge: {exc}") from exc
    return SchurForm(Q=Q, T=np.triu(T))


def _swap_adjacent(T: np.ndarray, Q: np.ndarray, k: int) -> None:
    """Swap the eigenvalues at diagonal positions k and k+1 in place."""
    a = T[k, k]
    b = T[k, k + 1]
    d = T[k + 1, k + 1]
    # Unitary G whose first column is the eigenvector of [[a,b],[0,d]] for d.
    v = np.array([b, d - a], dtype=complex)
    nv = np.linalg.norm(v)
    scale = abs(a) + abs(b) + abs(d)
    if not np.isfinite(nv) or not np.isfinite(scale):
        raise SwapFailure(f"non-finite data in swap at position {k}")
    if nv <= np.finfo(float).eps * scale or nv == 0.0:
        # Coinciding eigenvalues: the swap is the identity.
        return
    u = v / nv
    G = np.array([[u[0], -np.conj(u[1])], [u[1], np.conj(u[0])]])
    rows = slice(k, k + 2)
    T[rows, k:] = G.conj().T @ T[rows, k:]
    T[: k + 2, rows] = T[: k + 2, rows] @ G
    Q[:, rows] = Q[:, rows] @ G
    T[k + 1, k] = 0.0


def reorder_schur(form: SchurForm, select) -> SchurForm:
    """Move eigenvalues satisfying ``select`` to the leading diagonal block.

    The reordering is a sequence of adjacent 2x2 unitary swaps, so the Schur
    invariants are preserved up to roundoff and the relative order within the
    selected (and unselected) groups is kept.
    """
    Q = form.Q.copy()
    T = form.T.copy()
    n = T.shape[0]
    flags = [bool(select(T[i, i])) for i in range(n)]
    target = 0
    for i in range(n):
        if not flags[i]:
            continue
        for k in range(i - 1, target - 1, -1):
            _swap_adjacent(T, Q, k)
            flags[k], flags[k + 1] = flags[k + 1], flags[k]
        target += 1
    return SchurForm(Q=Q, T=T)


def solve_sylvester(A, B, C, sep_tol: float | None = None) -> np.ndarray:
    """Solve A X - X B = C.

    A unique solution requires spectral separation between A and B;
    SpectraOverlap is raised when the minimal eigenvalue gap falls below
    ``sep_tol`` (default 1e-10 * (||A|| + ||B||)).
    """
    A = to_complex(A, "A")
    B = to_complex(B, "B")
    C = to_complex(C, "C")
    _require_square(A, "A")
    _require_square(B, "B")
    p, q = A.shape[0], B.shape[0]
    if C.shape != (p, q):
        raise ValueError(f"C must be {p}x{q}, got {C.shape}")
    if p == 0 or q == 0:
        return np.zeros((p, q), complex)
    if sep_tol is None:
        sep_tol = 1e-10 * (fnorm(A) + fnorm(B))
    ea = np.linalg.eigvals(A)
    eb = np.linalg.eigvals(B)
    sep = np.min(np.abs(ea[:, None] - eb[None, :]))
    if sep < sep_tol:
        raise SpectraOverlap(
            f"eigenvalue separation {sep:.3e} below tolerance {sep_tol:.3e}"
        )
    # scipy solves A X + X B = Q.
    return sla.solve_sylvester(A, -B, C)


def mat_exp(M) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a diagonal Pade core."""
    A = to_complex(M, "M")
    _require_square(A, "M")
    if A.shape[0] == 0:
        return np.zeros((0, 0), complex)
    if A.shape[0] == 1:
        return np.exp(A)
    return sla.expm(A)


def exp_integral(A1, B1, A2, x: float) -> np.ndarray:
    """Compute the convolution integral of exp(s*A1) B1 exp(s*A2) for s in [0, x].

    Uses the block-triangular exponential identity: the integral equals the
    top-right block of expm(x*[[A1, B1], [0, -A2]]) multiplied by expm(x*A2).
    Works uniformly for defective and real-spectrum generators.
    """
    A1 = to_complex(A1, "A1")
    B1 = to_complex(B1, "B1")
    A2 = to_complex(A2, "A2")
    _require_square(A1, "A1")
    _require_square(A2, "A2")
    p, q = A1.shape[0], A2.shape[0]
    if B1.shape != (p, q):
        raise ValueError(f"B1 must be {p}x{q}, got {B1.shape}")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0 or p == 0 or q == 0:
        return np.zeros((p, q), complex)
    blk = np.zeros((p + q, p + q), complex)
    blk[:p, :p] = A1
    blk[:p, p:] = B1
    blk[p:, p:] = -A2
    E = sla.expm(x * blk)
    return E[:p, p:] @ sla.expm(x * A2)


def solve_linear(M, RHS, rank_tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Solve M X = RHS and estimate the condition number from singular values.

    Raises Singular when the smallest singular value is at or below
    ``rank_tol`` times the largest.
    """
    A = to_complex(M, "M")
    R = to_complex(RHS, "RHS")
    _require_square(A, "M")
    n = A.shape[0]
    if R.shape[0] != n:
        raise ValueError(f"RHS must have {n} rows, got {R.shape[0]}")
    if n == 0:
        return np.zeros((0, R.shape[1]), complex), 1.0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= rank_tol * s[0]:
        raise Singular(f"matrix numerically singular (sv ratio {s[-1]:.3e}/{s[0]:.3e})")
    return np.linalg.solve(A, R), float(s[0] / s[-1])


def numeric_rank(M, tol: float) -> int:
    """Number of singular values exceeding ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = to_complex(M, "M")
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))
