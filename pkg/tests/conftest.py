import numpy as np
import pytest

from pescat import ParameterSet, RationalRealization, parameters_from_reflection
from pescat.realization import evaluate, is_controllable, is_observable


def _minimality_margin(A, B, C):
    """Smallest-over-largest singular value of the staircase matrices."""
    from pescat.realization import _ctrb

    sc = np.linalg.svd(_ctrb(A, B), compute_uv=False)
    so = np.linalg.svd(_ctrb(A.conj().T, C.conj().T), compute_uv=False)
    return min(sc[-1] / sc[0], so[-1] / so[0])


def random_contractive(rng, n, m1, m2, im_band=(-2.0, -0.3), sup=0.5):
    """Minimal realization of a strictly contractive function vanishing at infinity.

    Poles get imaginary parts inside ``im_band`` (strictly stable); C is scaled
    so the largest singular value over a dense real grid equals ``sup``.
    Nearly-degenerate draws (tiny minimality margin, where double precision
    cannot certify the tight identities) are rejected and redrawn.
    """
    while True:
        diag = rng.uniform(-3.0, 3.0, n) + 1j * rng.uniform(*im_band, n)
        V = np.eye(n) + 0.3 * (
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        )
        A = V @ np.diag(diag) @ np.linalg.inv(V)
        B = (rng.standard_normal((n, m1)) + 1j * rng.standard_normal((n, m1))) / max(1, n) ** 0.5
        C = (rng.standard_normal((m2, n)) + 1j * rng.standard_normal((m2, n))) / max(1, n) ** 0.5
        if not (is_controllable(A, B) and is_observable(C, A)):
            continue
        if _minimality_margin(np.asarray(A, complex), np.asarray(B, complex), np.asarray(C, complex)) < 1e-2:
            continue
        F = RationalRealization(D=np.zeros((m2, m1)), C=C, A=A, B=B)
        peak = max(
            np.linalg.norm(evaluate(F, complex(lam)), 2)
            for lam in np.linspace(-60.0, 60.0, 601)
        )
        if peak == 0.0:
            continue
        return RationalRealization(D=np.zeros((m2, m1)), C=C * (sup / peak), A=A, B=B)


def random_admissible(rng, n, m1, m2, im_band=(-2.0, -0.3), sup=0.5):
    """Admissible parameter set with strictly stable alpha."""
    return parameters_from_reflection(random_contractive(rng, n, m1, m2, im_band, sup))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def worked_params():
    """Scalar set with strictly stable alpha and closed-form scattering data."""
    return ParameterSet(alpha=[[-2j]], S0=[[1.0]], gamma1=[[1.0]], gamma=[[np.sqrt(5.0)]])


@pytest.fixture
def positon_params():
    """Scalar set with real alpha spectrum (slowly decaying potential)."""
    return ParameterSet(alpha=[[0.0]], S0=[[1.0]], gamma1=[[1.0]], gamma=[[-1j]])


@pytest.fixture
def singular_params():
    """Scalar set with indefinite S0: the potential blows up at an interior point."""
    s0 = -(2.0 - np.sqrt(3.0))
    return ParameterSet(
        alpha=[[-1j * np.sqrt(3.0) / 2.0]],
        S0=[[s0]],
        gamma1=[[2.0 ** -0.5]],
        gamma=[[-1j * s0 * 2.0 ** -0.5]],
    )


@pytest.fixture
def worked_reflection():
    """R(lam) = -i sqrt(5) / (lam + 3i)."""
    return RationalRealization(D=[[0.0]], C=[[-1j * np.sqrt(5.0)]], A=[[-3j]], B=[[1.0]])


@pytest.fixture
def positon_reflection():
    """R(lam) = 1 / (lam + i)."""
    return RationalRealization(D=[[0.0]], C=[[1.0]], A=[[-1j]], B=[[1.0]])


@pytest.fixture
def indefinite_reflection():
    """R(lam) = (1/2) / (lam - i); contractive on the axis, pole above it."""
    return RationalRealization(D=[[0.0]], C=[[2.0 ** -0.5]], A=[[1j]], B=[[2.0 ** -0.5]])
