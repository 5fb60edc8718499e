"""Direct scattering for Dirac-type systems with pseudo-exponential potentials.

An admissible parameter set (alpha, S0, gamma1, gamma) determines the
potential

    v(x) = -2i gamma1* e^{i x alpha*} S(x)^{-1} e^{i x alpha} gamma,
    S(x) = S0 + integral_0^x L(t) L(t)* dt,
    L(x) = [e^{-i x alpha} gamma1,  e^{i x alpha} gamma],

of the first-order system  du/dx = i (lam j + j V(x)) u  on the semiaxis,
with j = diag(I_{m1}, -I_{m2}) and V = [[0, v], [v*, 0]].  All scattering
data of the system - the fundamental solution, the limit matrix kappa of
R(x)^{-1} = (e^{-i x alpha} S(x) e^{i x alpha*})^{-1}, the diagonal limit
factor chi and the four transmission/reflection coefficients - have
explicit realizations in the parameter matrices and are produced here.

When S0 is not positive definite S(x) crosses through singular matrices at
isolated points; the potential evaluator reports those points instead of
failing, and a scan-plus-bisection locator brackets the sign changes of
det S(x).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import completion as _completion
from .completion import JSignature, ParameterSet, theta_matrix
from .errors import LimitNotConverged, PoleProximity, SingularAt
from .matnum import exp_integral, fnorm, mat_exp, schur as schur_decompose, solve_sylvester
from .realization import RationalRealization, evaluate, minimal_reduce, probe_grid

__all__ = [
    "PotentialEvaluator",
    "KappaMode",
    "KappaR",
    "ScatteringCoefficients",
    "SingularityBracket",
    "lambda_profile",
    "accumulate_S",
    "q_profile",
    "potential_v",
    "potential_batch",
    "fundamental_w",
    "fundamental_u",
    "kappa_R",
    "chi",
    "chi_inverse",
    "scattering_coefficients",
    "special_solutions_YZ",
    "find_singularities",
]

SINGULARITY_COND_CAP = 1e12


def lambda_profile(p: ParameterSet, x: float) -> np.ndarray:
    """Input profile L(x) = [e^{-i x alpha} gamma1, e^{i x alpha} gamma]."""
    E_minus = mat_exp(-1j * x * p.alpha)
    E_plus = mat_exp(1j * x * p.alpha)
    return np.hstack([E_minus @ p.gamma1, E_plus @ p.gamma])


def accumulate_S(p: ParameterSet, x: float) -> np.ndarray:
    """S(x) = S0 + integral of L(t) L(t)* over [0, x]; Hermitian by construction."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    a = p.alpha
    G1 = exp_integral(-1j * a, p.gamma1 @ p.gamma1.conj().T, 1j * a.conj().T, x)
    G2 = exp_integral(1j * a, p.gamma @ p.gamma.conj().T, -1j * a.conj().T, x)
    S = p.S0 + G1 + G2
    return (S + S.conj().T) / 2.0


def q_profile(p: ParameterSet, x: float) -> np.ndarray:
    """Monotonicity diagnostic Q(x) = e^{i x alpha} S(x) e^{-i x alpha*}.

    Q is nondecreasing in the semidefinite order and tends to infinity.
    """
    E = mat_exp(1j * x * p.alpha)
    return E @ accumulate_S(p, x) @ E.conj().T


@dataclass
class PotentialEvaluator:
    """Evaluator of the potential and fundamental solution of one system.

    Immutable after construction apart from an internal value memo; the
    Schur form of alpha is cached for spectral queries.  ``singularity_threshold``
    caps the acceptable conditioning of S(x), measured as the smallest
    singular value against max(||S(x)||, ||L(x)||^2); past that cap
    evaluations report the point as singular (the honest answer in double
    precision).
    """

    params: ParameterSet
    singularity_threshold: float = SINGULARITY_COND_CAP
    admissibility_tol: float = 1e-9
    alpha_schur: object = field(init=False, repr=False)
    _v_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self.params.require_admissible(self.admissibility_tol)
        self.alpha_schur = schur_decompose(self.params.alpha)

    @property
    def signature(self) -> JSignature:
        return self.params.signature

    def alpha_eigenvalues(self) -> np.ndarray:
        return self.alpha_schur.eigenvalues


def _effective_cond(S: np.ndarray, profile_scale: float) -> float:
    """Invertibility measure of S(x) against the accumulation scale.

    The plain ratio of extreme singular values cannot see a scalar S(x)
    passing through zero; measuring the smallest singular value against
    max(||S||, ||L(x)||^2) tracks the size of the inverse sandwiched
    between the profile factors, which is what actually blows up.
    """
    s = np.linalg.svd(S, compute_uv=False)
    scale = max(float(s[0]), profile_scale)
    return np.inf if s[-1] == 0.0 else float(scale / s[-1])


def _s_with_cond(pe: PotentialEvaluator, x: float):
    S = accumulate_S(pe.params, x)
    if S.size == 0:
        return S, 1.0
    L = lambda_profile(pe.params, x)
    return S, _effective_cond(S, fnorm(L) ** 2)


def potential_v(pe: PotentialEvaluator, x: float):
    """Potential value v(x), or a SingularAt report when S(x) is singular.

    The report is returned, not raised: a singularity of a pseudo-exponential
    potential is a feature of the model, not a failure.
    """
    key = float(x)
    if key in pe._v_cache:
        return pe._v_cache[key]
    p = pe.params
    S, cond = _s_with_cond(pe, x)
    if cond > pe.singularity_threshold:
        out = SingularAt(x, cond)
    else:
        E = mat_exp(1j * x * p.alpha)
        E_star = mat_exp(1j * x * p.alpha.conj().T)
        core = np.linalg.solve(S, E @ p.gamma) if p.n else np.zeros((0, p.m2), complex)
        out = -2j * (p.gamma1.conj().T @ E_star @ core)
        if p.n == 0:
            out = np.zeros((p.m1, p.m2), complex)
    pe._v_cache[key] = out
    return out


def potential_batch(pe: PotentialEvaluator, xs) -> list:
    """Potential values on a uniformly spaced grid.

    Equivalent to calling ``potential_v`` point by point but computed with a
    running-exponential recurrence (one matrix-exponential set per stride
    instead of per point), accurate to machine precision on uniform grids.
    Entries are matrices or SingularAt reports, in the order of ``xs``.
    """
    xs = [float(x) for x in xs]
    if not xs:
        return []
    p = pe.params
    if p.n == 0:
        zero = np.zeros((p.m1, p.m2), complex)
        return [zero.copy() for _ in xs]
    order = np.argsort(xs)
    sorted_xs = [xs[i] for i in order]
    steps = np.diff(sorted_xs)
    if len(sorted_xs) > 1:
        d = float(steps[0])
        if d <= 0 or np.max(np.abs(steps - d)) > 1e-9 * max(1.0, abs(d)):
            return [potential_v(pe, x) for x in xs]
    else:
        d = 0.0
    a = p.alpha
    a_star = a.conj().T
    x0 = sorted_xs[0]
    E = mat_exp(1j * x0 * a)
    Em = mat_exp(-1j * x0 * a)
    Es = mat_exp(1j * x0 * a_star)
    Ems = mat_exp(-1j * x0 * a_star)
    G1 = exp_integral(-1j * a, p.gamma1 @ p.gamma1.conj().T, 1j * a_star, x0)
    G2 = exp_integral(1j * a, p.gamma @ p.gamma.conj().T, -1j * a_star, x0)
    if d > 0:
        dE = mat_exp(1j * d * a)
        dEm = mat_exp(-1j * d * a)
        dEs = mat_exp(1j * d * a_star)
        dEms = mat_exp(-1j * d * a_star)
        dG1 = exp_integral(-1j * a, p.gamma1 @ p.gamma1.conj().T, 1j * a_star, d)
        dG2 = exp_integral(1j * a, p.gamma @ p.gamma.conj().T, -1j * a_star, d)
    out_sorted = []
    for k, x in enumerate(sorted_xs):
        if k:
            G1 = G1 + Em @ dG1 @ Es
            G2 = G2 + E @ dG2 @ Ems
            E = E @ dE
            Em = Em @ dEm
            Es = Es @ dEs
            Ems = Ems @ dEms
        S = p.S0 + G1 + G2
        S = (S + S.conj().T) / 2.0
        prof = fnorm(Em @ p.gamma1) ** 2 + fnorm(E @ p.gamma) ** 2
        cond = _effective_cond(S, prof)
        if cond > pe.singularity_threshold:
            out_sorted.append(SingularAt(x, cond))
        else:
            out_sorted.append(-2j * (p.gamma1.conj().T @ Es @ np.linalg.solve(S, E @ p.gamma)))
    out = [None] * len(xs)
    for pos, idx in enumerate(order):
        out[idx] = out_sorted[pos]
    return out


def _resolvent_apply(alpha: np.ndarray, lam: complex, M: np.ndarray) -> np.ndarray:
    """(lam I - alpha)^{-1} M with pole-proximity guard."""
    n = alpha.shape[0]
    shift = lam * np.eye(n) - alpha
    s = np.linalg.svd(shift, compute_uv=False)
    if s[-1] == 0.0 or s[0] / s[-1] > 1e12:
        raise PoleProximity(f"lam={lam} is numerically at a pole of alpha")
    return np.linalg.solve(shift, M)


def fundamental_w(pe: PotentialEvaluator, x: float, lam: complex) -> np.ndarray:
    """w(x, lam) = I + i j L(x)* S(x)^{-1} (lam I - alpha)^{-1} L(x).

    The fundamental solution is u(x, lam) = w(x, lam) e^{i x lam j}; w stays
    defined by the same formula across potential singularities.
    """
    p = pe.params
    sig = p.signature
    m = sig.m
    if p.n == 0:
        return np.eye(m, dtype=complex)
    S, cond = _s_with_cond(pe, x)
    if cond > pe.singularity_threshold:
        raise SingularAt(x, cond)
    L = lambda_profile(p, x)
    core = _resolvent_apply(p.alpha, lam, L)
    return np.eye(m, dtype=complex) + 1j * sig.matrix @ L.conj().T @ np.linalg.solve(S, core)


def _phase(x: float, lam: complex, sig: JSignature) -> np.ndarray:
    """Diagonal free evolution e^{i x lam j}."""
    d = np.concatenate(
        [
            np.full(sig.m1, np.exp(1j * x * lam)),
            np.full(sig.m2, np.exp(-1j * x * lam)),
        ]
    )
    return np.diag(d)


def fundamental_u(pe: PotentialEvaluator, x: float, lam: complex) -> np.ndarray:
    """Fundamental solution u(x, lam) = w(x, lam) e^{i x lam j}."""
    return fundamental_w(pe, x, lam) @ _phase(x, lam, pe.signature)


class KappaMode(Enum):
    CLOSED_FORM = "ClosedForm"
    ZERO_REAL_SPECTRUM = "ZeroRealSpectrum"
    NUMERICAL_LIMIT = "NumericalLimit"


@dataclass
class KappaR:
    """Limit of R(x)^{-1} = (e^{-i x alpha} S(x) e^{i x alpha*})^{-1}.

    ``convergence_diagnostic`` carries the Riccati-identity residual for the
    closed-form mode and the relative Cauchy difference of the sampled limit
    otherwise.
    """

    value: np.ndarray
    mode: KappaMode
    convergence_diagnostic: float

    def identity_residual(self, p: ParameterSet) -> float:
        """Residual of kappa alpha - alpha* kappa + i kappa gamma gamma* kappa = 0."""
        k = self.value
        res = (
            k @ p.alpha
            - p.alpha.conj().T @ k
            + 1j * k @ p.gamma @ p.gamma.conj().T @ k
        )
        return fnorm(res)


def kappa_R(
    p: ParameterSet,
    sample_points=(10.0, 20.0, 40.0),
    limit_tol: float = 1e-5,
) -> KappaR:
    """Compute kappa by spectral dispatch on alpha.

    Strictly stable spectrum: kappa = Q^{-1} with Q the unique solution of
    alpha Q - Q alpha* = -i gamma gamma* (the integral of the decaying gamma
    profile).  Spectrum on the real axis: the profile grows and kappa = 0.
    Mixed spectrum: R(x)^{-1} is sampled at increasing x with an explicit
    Cauchy-difference diagnostic; LimitNotConverged is raised rather than
    returning a silently wrong limit.
    """
    p.require_admissible()
    n = p.n
    if n == 0:
        return KappaR(np.zeros((0, 0), complex), KappaMode.CLOSED_FORM, 0.0)
    eigs = np.linalg.eigvals(p.alpha)
    eps_spec = 1e-9 * max(1.0, fnorm(p.alpha))
    if np.all(eigs.imag < -eps_spec):
        Q = solve_sylvester(
            p.alpha, p.alpha.conj().T, -1j * p.gamma @ p.gamma.conj().T
        )
        value = np.linalg.inv(Q)
        value = (value + value.conj().T) / 2.0
        out = KappaR(value, KappaMode.CLOSED_FORM, 0.0)
        out.convergence_diagnostic = out.identity_residual(p)
        return out
    if np.all(np.abs(eigs.imag) <= eps_spec):
        return KappaR(np.zeros((n, n), complex), KappaMode.ZERO_REAL_SPECTRUM, 0.0)
    samples = []
    for x in sample_points:
        E_minus = mat_exp(-1j * x * p.alpha)
        E_star = mat_exp(1j * x * p.alpha.conj().T)
        Rx = E_minus @ accumulate_S(p, x) @ E_star
        samples.append(np.linalg.inv(Rx))
    diffs = [
        fnorm(samples[i + 1] - samples[i]) / max(1.0, fnorm(samples[-1]))
        for i in range(len(samples) - 1)
    ]
    diag = max(diffs)
    if diag > limit_tol:
        raise LimitNotConverged(
            f"R(x)^{{-1}} Cauchy difference {diag:.3e} exceeds {limit_tol:.1e} "
            f"at samples {sample_points}"
        )
    value = (samples[-1] + samples[-1].conj().T) / 2.0
    return KappaR(value, KappaMode.NUMERICAL_LIMIT, diag)


def chi(p: ParameterSet, kappa: KappaR) -> RationalRealization:
    """Limit factor chi(lam) = I - i gamma* kappa (lam I - alpha)^{-1} gamma."""
    return RationalRealization(
        D=np.eye(p.m2, dtype=complex),
        C=-1j * (p.gamma.conj().T @ kappa.value),
        A=p.alpha.copy(),
        B=p.gamma.copy(),
    )


def chi_inverse(p: ParameterSet, kappa: KappaR) -> RationalRealization:
    """chi(lam)^{-1} = I + i gamma* (lam I - alpha*)^{-1} kappa gamma."""
    return RationalRealization(
        D=np.eye(p.m2, dtype=complex),
        C=1j * p.gamma.conj().T,
        A=p.alpha.conj().T,
        B=kappa.value @ p.gamma,
    )


@dataclass
class ScatteringCoefficients:
    """Realizations of the four scattering coefficients of one system.

    The blocks assemble into the scattering matrix
    S(lam) = [[T_L, R_R], [R_L, T_R]], unitary for real lam, which factors
    as the unitary completion of R_L times diag(I, chi^{-1}).
    """

    T_L: RationalRealization
    R_L: RationalRealization
    T_R: RationalRealization
    R_R: RationalRealization
    kappa: KappaR
    chi: RationalRealization
    params: ParameterSet

    def s_matrix(self, lam: complex) -> np.ndarray:
        tl = evaluate(self.T_L, lam)
        rl = evaluate(self.R_L, lam)
        tr = evaluate(self.T_R, lam)
        rr = evaluate(self.R_R, lam)
        return np.block([[tl, rr], [rl, tr]])

    def _default_grid(self) -> np.ndarray:
        poles = np.concatenate(
            [self.T_L.poles(), self.R_R.poles(), self.chi.poles()]
        )
        return probe_grid(poles, npts=33, lo=-10.0, hi=10.0)

    def unitarity_defect(self, grid=None) -> float:
        """max over the grid of || S(lam)* S(lam) - I ||_F for real lam."""
        if grid is None:
            grid = self._default_grid()
        m = self.params.signature.m
        worst = 0.0
        for lam in grid:
            S = self.s_matrix(complex(lam))
            worst = max(worst, fnorm(S.conj().T @ S - np.eye(m)))
        return worst

    def factorization_defect(self, grid=None) -> float:
        """Defect of S(lam) = completion(lam) . diag(I, chi(lam)^{-1})."""
        if grid is None:
            grid = self._default_grid()
        comp = _completion.unitary_completion(self.params)
        chi_inv = chi_inverse(self.params, self.kappa)
        m1 = self.params.m1
        m2 = self.params.m2
        worst = 0.0
        for lam in grid:
            S = self.s_matrix(complex(lam))
            right = np.eye(m1 + m2, dtype=complex)
            right[m1:, m1:] = evaluate(chi_inv, complex(lam))
            worst = max(worst, fnorm(S - evaluate(comp, complex(lam)) @ right))
        return worst


def scattering_coefficients(
    p: ParameterSet, kappa: KappaR | None = None
) -> ScatteringCoefficients:
    """Explicit realizations of T_L, R_L, T_R, R_R.

    With theta = alpha - i gamma1 gamma1* S0^{-1} and kappa as above:

        T_L = I - i gamma1* S0^{-1} (lam I - theta)^{-1} gamma1
        R_L =   - i gamma*  S0^{-1} (lam I - theta)^{-1} gamma1
        T_R = I - i gamma*  S0^{-1} (lam I - theta)^{-1} (I - S0 kappa) gamma
        R_R =   - i gamma1* S0^{-1} (lam I - theta)^{-1} (I - S0 kappa) gamma
                - i gamma1* (lam I - alpha*)^{-1} kappa gamma

    R_R is assembled with stacked theta and alpha* dynamics and then
    minimally reduced.
    """
    p.require_admissible()
    if kappa is None:
        kappa = kappa_R(p)
    n, m1, m2 = p.n, p.m1, p.m2
    S0inv = p.s0_inverse()
    th = theta_matrix(p)
    g1s = p.gamma1.conj().T
    gs = p.gamma.conj().T
    damp = (np.eye(n, dtype=complex) - p.S0 @ kappa.value) @ p.gamma
    T_L = RationalRealization(
        D=np.eye(m1, dtype=complex), C=-1j * g1s @ S0inv, A=th, B=p.gamma1.copy()
    )
    R_L = RationalRealization(
        D=np.zeros((m2, m1), complex), C=-1j * gs @ S0inv, A=th, B=p.gamma1.copy()
    )
    T_R = RationalRealization(
        D=np.eye(m2, dtype=complex), C=-1j * gs @ S0inv, A=th, B=damp
    )
    A_rr = np.zeros((2 * n, 2 * n), complex)
    A_rr[:n, :n] = th
    A_rr[n:, n:] = p.alpha.conj().T
    B_rr = np.vstack([damp, kappa.value @ p.gamma])
    C_rr = np.hstack([-1j * g1s @ S0inv, -1j * g1s])
    R_R = minimal_reduce(
        RationalRealization(D=np.zeros((m1, m2), complex), C=C_rr, A=A_rr, B=B_rr)
    )
    return ScatteringCoefficients(
        T_L=T_L, R_L=R_L, T_R=T_R, R_R=R_R, kappa=kappa,
        chi=chi(p, kappa), params=p,
    )


def special_solutions_YZ(pe: PotentialEvaluator, x: float, lam: complex):
    """Solutions Y (free-wave asymptote at infinity) and Z (zero upper data at 0).

    Y(x) = w(x, lam) e^{i x lam j} [I; 0] and Z(x) = w(x, lam) e^{i x lam j}
    [Xi1; Xi2] with Xi1 = -i gamma1* (lam I - alpha*)^{-1} S0^{-1} gamma and
    Xi2 = I + i gamma* (lam I - alpha*)^{-1} S0^{-1} gamma, so that
    Z(0, lam) = [0; I].
    """
    p = pe.params
    sig = p.signature
    w = fundamental_w(pe, x, lam)
    ph = _phase(x, lam, sig)
    base = w @ ph
    Y = base[:, : sig.m1].copy()
    if p.n:
        core = _resolvent_apply(p.alpha.conj().T, lam, p.s0_inverse() @ p.gamma)
        Xi1 = -1j * p.gamma1.conj().T @ core
        Xi2 = np.eye(p.m2, dtype=complex) + 1j * p.gamma.conj().T @ core
    else:
        Xi1 = np.zeros((p.m1, p.m2), complex)
        Xi2 = np.eye(p.m2, dtype=complex)
    Z = base @ np.vstack([Xi1, Xi2])
    return Y, Z


@dataclass(frozen=True)
class SingularityBracket:
    """Sign change of det S(x) bracketed to the requested width."""

    x: float
    lo: float
    hi: float


def _det_sign(pe: PotentialEvaluator, x: float) -> int:
    """Sign of det S(x) via the parity of negative eigenvalues."""
    S = accumulate_S(pe.params, x)
    if S.size == 0:
        return 1
    w = np.linalg.eigvalsh(S)
    return -1 if np.count_nonzero(w < 0.0) % 2 else 1


def find_singularities(
    pe: PotentialEvaluator,
    x_max: float,
    step: float = 1e-2,
    refine_tol: float = 1e-8,
) -> list[SingularityBracket]:
    """Bracket the sign changes of det S(x) on [0, x_max].

    A scan with the given step finds sign changes; each is refined by
    bisection until the bracket width drops below ``refine_tol``.  Only
    odd-order crossings flip the sign of the determinant; tangential
    touches are not reported.
    """
    if pe.params.n == 0:
        return []
    out: list[SingularityBracket] = []
    xs = np.arange(0.0, x_max + step, step)
    signs = [_det_sign(pe, float(x)) for x in xs]
    for i in range(len(xs) - 1):
        if signs[i] == signs[i + 1]:
            continue
        lo, hi = float(xs[i]), float(xs[i + 1])
        s_lo = signs[i]
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            if _det_sign(pe, mid) == s_lo:
                lo = mid
            else:
                hi = mid
        out.append(SingularityBracket(x=0.5 * (lo + hi), lo=lo, hi=hi))
    return out
