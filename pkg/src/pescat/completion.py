"""Recovery of a j-unitary rational function from its reflection quotient.

For j = diag(I_{m1}, -I_{m2}) a rational W tending to I at infinity with
W(lam)* j W(lam) = j on the real axis is carried in the canonical form

    W(lam) = I + i j L0* S0^{-1} (lam I - alpha)^{-1} L0,
    alpha S0 - S0 alpha* = i L0 j L0*,      L0 = [gamma1, gamma],

and the quotient R = W21 W11^{-1} of its lower-left and upper-left blocks
determines W uniquely among functions of the same McMillan degree that are
regular in the upper halfplane.  This module recovers the parameter
matrices from R through the Riccati solver, rebuilds W, extracts R back,
and constructs the unitary completion of R of the same degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotAdmissible
from .matnum import fnorm, to_complex
from .realization import (
    RationalRealization,
    evaluate,
    is_controllable,
    max_pointwise_gap,
    probe_grid,
)
from .riccati import RiccatiProblem, solve as riccati_solve

__all__ = [
    "JSignature",
    "ParameterSet",
    "ParametrizedRealization",
    "JUnitarityReport",
    "theta_matrix",
    "parameters_from_reflection",
    "build_W",
    "extract_R_from_W",
    "unitary_completion",
    "check_j_unitarity",
]


@dataclass(frozen=True)
class JSignature:
    """The indefinite metric j = diag(I_{m1}, -I_{m2})."""

    m1: int
    m2: int

    @property
    def m(self) -> int:
        return self.m1 + self.m2

    @property
    def matrix(self) -> np.ndarray:
        d = np.ones(self.m)
        d[self.m1 :] = -1.0
        return np.diag(d).astype(complex)


@dataclass
class ParameterSet:
    """Admissible parameter matrices (alpha, S0, gamma1, gamma).

    Admissibility means: the Lyapunov-type identity
    alpha S0 - S0 alpha* = i (gamma1 gamma1* - gamma gamma*) holds, the
    spectrum of alpha lies in the closed lower halfplane, both pairs
    (alpha, gamma1) and (alpha, gamma) are full range, and S0 is Hermitian
    and invertible.
    """

    alpha: np.ndarray
    S0: np.ndarray
    gamma1: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.alpha = to_complex(self.alpha, "alpha")
        self.S0 = to_complex(self.S0, "S0")
        self.gamma1 = to_complex(self.gamma1, "gamma1")
        self.gamma = to_complex(self.gamma, "gamma")
        n = self.alpha.shape[0]
        if self.alpha.shape != (n, n) or self.S0.shape != (n, n):
            raise NotAdmissible("alpha and S0 must be square of equal order")
        if self.gamma1.shape[0] != n or self.gamma.shape[0] != n:
            raise NotAdmissible("gamma1 and gamma must have as many rows as alpha")

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def m1(self) -> int:
        return self.gamma1.shape[1]

    @property
    def m2(self) -> int:
        return self.gamma.shape[1]

    @property
    def signature(self) -> JSignature:
        return JSignature(self.m1, self.m2)

    @property
    def lambda0(self) -> np.ndarray:
        """The stacked input matrix [gamma1, gamma]."""
        return np.hstack([self.gamma1, self.gamma])

    def s0_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.S0)

    def identity_residual(self) -> float:
        lhs = self.alpha @ self.S0 - self.S0 @ self.alpha.conj().T
        rhs = 1j * (
            self.gamma1 @ self.gamma1.conj().T - self.gamma @ self.gamma.conj().T
        )
        return fnorm(lhs - rhs)

    def identity_scale(self) -> float:
        return max(
            1e-300,
            fnorm(self.alpha) * fnorm(self.S0)
            + fnorm(self.gamma1) ** 2
            + fnorm(self.gamma) ** 2,
        )

    def admissibility_failures(self, tol: float = 1e-9) -> list[str]:
        """Human-readable list of violated admissibility conditions."""
        bad = []
        if self.identity_residual() > tol * self.identity_scale():
            bad.append("parameter identity alpha S0 - S0 alpha* = i(g1 g1* - g g*)")
        if self.n:
            eps_spec = 1e-9 * max(1.0, fnorm(self.alpha))
            if np.max(np.linalg.eigvals(self.alpha).imag) > eps_spec:
                bad.append("spectrum of alpha must lie in the closed lower halfplane")
            if not is_controllable(self.alpha, self.gamma1, tol):
                bad.append("(alpha, gamma1) is not full range")
            if not is_controllable(self.alpha, self.gamma, tol):
                bad.append("(alpha, gamma) is not full range")
            if fnorm(self.S0 - self.S0.conj().T) > tol * max(1.0, fnorm(self.S0)):
                bad.append("S0 is not Hermitian")
            s = np.linalg.svd(self.S0, compute_uv=False)
            if s[0] == 0.0 or s[-1] <= 1e-10 * s[0]:
                bad.append("S0 is numerically singular")
        return bad

    def is_admissible(self, tol: float = 1e-9) -> bool:
        return not self.admissibility_failures(tol)

    def require_admissible(self, tol: float = 1e-9) -> None:
        bad = self.admissibility_failures(tol)
        if bad:
            raise NotAdmissible("; ".join(bad))


@dataclass
class ParametrizedRealization(RationalRealization):
    """Realization carrying the block parameter data it was built from."""

    params: ParameterSet = field(default=None)  # type: ignore[assignment]
    sig: JSignature = field(default=None)  # type: ignore[assignment]


@dataclass
class JUnitarityReport:
    """Largest defects of the metric and block identities over a real grid.

    The ``*_rel`` fields are normalized by 1 + ||W(lam)||_F^2, the natural
    scale of the quadratic identities near poles.
    """

    metric_defect: float
    block_defect: float
    metric_defect_rel: float
    block_defect_rel: float
    grid: np.ndarray


def theta_matrix(p: ParameterSet) -> np.ndarray:
    """State matrix theta = alpha - i gamma1 gamma1* S0^{-1}."""
    return p.alpha - 1j * (p.gamma1 @ (p.gamma1.conj().T @ p.s0_inverse()))


def parameters_from_reflection(R: RationalRealization, tol: float = 1e-9) -> ParameterSet:
    """Recover the parameter matrices of W from a reflection quotient R.

    R must be given by a minimal realization with D = 0 and be contractive
    on the real axis.  With X the stable-side Hermitian Riccati solution for
    (A, B, C), the parameters are alpha = A + i B B* X, S0 = X^{-1},
    gamma1 = B and gamma = -i S0 C*.
    """
    if fnorm(R.D) > 1e-12 * max(1.0, fnorm(R.C) * fnorm(R.B)):
        raise ValueError("reflection function must vanish at infinity (D = 0)")
    try:
        problem = RiccatiProblem(R.A, R.B, R.C)
    except ValueError as exc:
        raise NotAdmissible(f"reflection realization is not minimal: {exc}") from exc
    sol = riccati_solve(problem, tol)
    if sol.X.size:
        S0 = np.linalg.inv(sol.X)
        S0 = (S0 + S0.conj().T) / 2.0
    else:
        S0 = np.zeros((0, 0), complex)
    params = ParameterSet(
        alpha=sol.alpha,
        S0=S0,
        gamma1=R.B.copy(),
        gamma=-1j * (S0 @ R.C.conj().T),
    )
    params.require_admissible(max(tol, 1e-8))
    return params


def build_W(p: ParameterSet) -> ParametrizedRealization:
    """Canonical W(lam) = I + i j L0* S0^{-1} (lam I - alpha)^{-1} L0."""
    p.require_admissible()
    sig = p.signature
    L0 = p.lambda0
    Cblk = 1j * sig.matrix @ L0.conj().T @ p.s0_inverse()
    return ParametrizedRealization(
        D=np.eye(sig.m, dtype=complex),
        C=Cblk,
        A=p.alpha.copy(),
        B=L0,
        params=p,
        sig=sig,
    )


def extract_R_from_W(
    W: RationalRealization, sig: JSignature | None = None
) -> RationalRealization:
    """Lower-left-over-upper-left quotient W21 W11^{-1} as a realization.

    Requires block parameter data (as produced by build_W); the result is
    the degree-preserving realization with state matrix theta and it is
    verified pointwise against W21 W11^{-1} on a probe grid.
    """
    if not isinstance(W, ParametrizedRealization) or W.params is None:
        raise TypeError(
            "extract_R_from_W needs the block parameter data carried by build_W output"
        )
    p = W.params
    sig = sig or W.sig
    th = theta_matrix(p)
    R = RationalRealization(
        D=np.zeros((p.m2, p.m1), complex),
        C=-1j * (p.gamma.conj().T @ p.s0_inverse()),
        A=th,
        B=p.gamma1.copy(),
    )
    if p.n:
        pole_sets = np.concatenate([np.linalg.eigvals(p.alpha), np.linalg.eigvals(th)])
        grid = probe_grid(pole_sets, guard=1e-3 * max(1.0, fnorm(p.alpha)))
        gap = 0.0
        scale = 1.0
        m1 = sig.m1
        for lam in grid:
            val = evaluate(W, complex(lam))
            quotient = val[m1:, :m1] @ np.linalg.inv(val[:m1, :m1])
            direct = evaluate(R, complex(lam))
            gap = max(gap, fnorm(quotient - direct))
            scale = max(scale, fnorm(direct))
        if gap > 1e-9 * scale:
            raise ValueError(
                f"block data inconsistent with W: quotient gap {gap:.3e} on probe grid"
            )
    return R


def unitary_completion(p: ParameterSet) -> ParametrizedRealization:
    """Unitary-on-the-axis completion with R as its lower-left block.

    S(lam) = I - i L0* S0^{-1} (lam I - theta)^{-1} L0 has the same McMillan
    degree as R and satisfies S(lam)* S(lam) = I for real lam.
    """
    p.require_admissible()
    sig = p.signature
    L0 = p.lambda0
    return ParametrizedRealization(
        D=np.eye(sig.m, dtype=complex),
        C=-1j * (L0.conj().T @ p.s0_inverse()),
        A=theta_matrix(p),
        B=L0,
        params=p,
        sig=sig,
    )


def check_j_unitarity(
    W: RationalRealization, sig: JSignature, grid=None, pole_guard: float | None = None
) -> JUnitarityReport:
    """Largest defect of W* j W = j and of W11* W11 - W21* W21 = I on a grid."""
    if grid is None:
        grid = probe_grid(
            W.poles(),
            npts=101,
            lo=-10.0,
            hi=10.0,
            guard=pole_guard if pole_guard is not None else 1e-3 * max(1.0, fnorm(W.A)),
        )
    j = sig.matrix
    m1 = sig.m1
    metric = block = metric_rel = block_rel = 0.0
    for lam in grid:
        val = evaluate(W, complex(lam))
        scale = 1.0 + fnorm(val) ** 2
        dm = fnorm(val.conj().T @ j @ val - j)
        W11 = val[:m1, :m1]
        W21 = val[m1:, :m1]
        db = fnorm(W11.conj().T @ W11 - W21.conj().T @ W21 - np.eye(m1))
        metric = max(metric, dm)
        block = max(block, db)
        metric_rel = max(metric_rel, dm / scale)
        block_rel = max(block_rel, db / scale)
    return JUnitarityReport(
        metric_defect=metric,
        block_defect=block,
        metric_defect_rel=metric_rel,
        block_defect_rel=block_rel,
        grid=np.asarray(grid),
    )
