import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from pescat.matnum import fnorm
from pescat.riccati import (
    Definiteness,
    RiccatiProblem,
    classify_definiteness,
    hamiltonian,
    solve,
    verify,
)
from conftest import random_admissible, random_contractive


def scalar_oracle(a, b, c):
    """Root of |b|^2 X^2 + 2 Im(a) X + |c|^2 = 0 with Im(a + i|b|^2 X) <= 0.

    Independent of the solver: plain quadratic formula plus the stable-root
    selection, valid whenever Im(a)^2 >= |b c|^2.
    """
    q = a.imag
    bb = abs(b) ** 2
    cc = abs(c) ** 2
    disc = q * q - bb * cc
    assert disc >= 0, "oracle outside contractive range"
    return (-q - np.sqrt(disc)) / bb


def random_scalar_problem(rng):
    """Scalar problem that is contractive on the axis with margin."""
    q = rng.uniform(0.3, 3.0) * rng.choice([-1.0, 1.0])
    a = rng.uniform(-3.0, 3.0) + 1j * q
    b = rng.uniform(0.2, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    cmax = 0.8 * abs(q) / abs(b)
    c = rng.uniform(0.1, 1.0) * cmax * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return a, b, c


def eig_match_gap(a, b):
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max() if len(a) else 0.0


class TestHamiltonian:
    def test_unit_scalar(self):
        K = hamiltonian(RiccatiProblem([[-1j]], [[1.0]], [[1.0]]))
        assert np.allclose(K, [[-1j, 1.0], [1.0, 1j]])

    def test_block_diagonal_without_coupling(self):
        # tiny coupling keeps the problem minimal; the blocks dominate
        K = hamiltonian(RiccatiProblem([[-1j]], [[1e-6]], [[1e-6]]))
        assert K[0, 0] == -1j and K[1, 1] == 1j
        assert abs(K[0, 1]) == pytest.approx(1e-12)

    def test_worked_scalar(self):
        K = hamiltonian(RiccatiProblem([[-3j]], [[1.0]], [[-1j * np.sqrt(5.0)]]))
        assert np.allclose(K, [[-3j, 1.0], [5.0, 3j]])


class TestSolveWorked:
    def test_double_root(self):
        sol = solve(RiccatiProblem([[-1j]], [[1.0]], [[1.0]]))
        assert abs(sol.X[0, 0] - 1.0) <= 1e-12
        assert abs(sol.alpha[0, 0]) <= 1e-12
        assert sol.definiteness is Definiteness.POSITIVE_DEFINITE

    def test_separated_roots(self):
        sol = solve(RiccatiProblem([[-3j]], [[1.0]], [[-1j * np.sqrt(5.0)]]))
        assert abs(sol.X[0, 0] - 1.0) <= 1e-12
        assert abs(sol.alpha[0, 0] + 2j) <= 1e-12

    def test_negative_definite_branch(self):
        sol = solve(RiccatiProblem([[1j]], [[2.0 ** -0.5]], [[2.0 ** -0.5]]))
        assert abs(sol.X[0, 0] - (-2.0 - np.sqrt(3.0))) <= 1e-12
        assert abs(sol.alpha[0, 0] + 1j * np.sqrt(3.0) / 2.0) <= 1e-12
        assert sol.definiteness is Definiteness.NEGATIVE_DEFINITE


class TestVerify:
    @pytest.mark.parametrize(
        "A,B,C",
        [
            ([[-1j]], [[1.0]], [[1.0]]),
            ([[-3j]], [[1.0]], [[-1j * np.sqrt(5.0)]]),
            ([[1j]], [[2.0 ** -0.5]], [[2.0 ** -0.5]]),
        ],
    )
    def test_solutions_verify(self, A, B, C):
        p = RiccatiProblem(A, B, C)
        sol = solve(p)
        diag = verify(p, sol.X)
        assert diag.residual <= 1e-12 * max(1.0, diag.residual_scale)

    def test_zero_candidate_fails(self):
        p = RiccatiProblem([[-1j]], [[1.0]], [[2.0]])
        diag = verify(p, [[0.0]])
        assert diag.residual == pytest.approx(4.0)  # ||C* C||

    def test_antistable_root_flagged(self):
        # second quadratic root solves the equation but breaks the side condition
        p = RiccatiProblem([[-3j]], [[1.0]], [[-1j * np.sqrt(5.0)]])
        diag = verify(p, [[5.0]])
        assert diag.residual <= 1e-12
        assert diag.spectral_margin == pytest.approx(2.0)


class TestClassify:
    def test_positive(self):
        assert classify_definiteness([[1.0]]) is Definiteness.POSITIVE_DEFINITE

    def test_negative(self):
        assert (
            classify_definiteness([[-2.0 - np.sqrt(3.0)]])
            is Definiteness.NEGATIVE_DEFINITE
        )

    def test_indefinite(self):
        assert classify_definiteness(np.diag([1.0, -1.0])) is Definiteness.INDEFINITE


class TestProperties:
    def test_scalar_oracle_equivalence(self, rng):
        for _ in range(50):
            a, b, c = random_scalar_problem(rng)
            sol = solve(RiccatiProblem([[a]], [[b]], [[c]]))
            assert abs(sol.X[0, 0] - scalar_oracle(a, b, c)) <= 1e-12

    def test_triangularization(self, rng):
        for _ in range(10):
            F = random_contractive(rng, rng.integers(1, 5), 2, 2)
            p = RiccatiProblem(F.A, F.B, F.C)
            sol = solve(p)
            n = p.n
            K = hamiltonian(p)
            T = np.eye(2 * n, dtype=complex)
            T[n:, :n] = 1j * sol.X
            Tinv = np.eye(2 * n, dtype=complex)
            Tinv[n:, :n] = -1j * sol.X
            KT = Tinv @ K @ T
            assert fnorm(KT[n:, :n]) <= 1e-9 * fnorm(K)
            assert fnorm(KT[:n, :n] - sol.alpha) <= 1e-10 * max(1.0, fnorm(sol.alpha))

    def test_spectrum_split(self, rng):
        for _ in range(10):
            F = random_contractive(rng, rng.integers(1, 5), 1, 2)
            p = RiccatiProblem(F.A, F.B, F.C)
            sol = solve(p)
            k_eigs = np.linalg.eigvals(hamiltonian(p))
            a_eigs = np.linalg.eigvals(sol.alpha)
            both = np.concatenate([a_eigs, a_eigs.conj()])
            assert eig_match_gap(k_eigs, both) <= 1e-7 * max(1.0, fnorm(hamiltonian(p)))

    def test_positivity_iff_stability(self, rng):
        # strictly stable poles with real-line contraction force X > 0
        for _ in range(5):
            F = random_contractive(rng, 3, 2, 1)
            sol = solve(RiccatiProblem(F.A, F.B, F.C))
            assert sol.definiteness is Definiteness.POSITIVE_DEFINITE
        # a pole in the upper halfplane breaks positivity
        sol = solve(RiccatiProblem([[1j]], [[2.0 ** -0.5]], [[2.0 ** -0.5]]))
        assert sol.definiteness is not Definiteness.POSITIVE_DEFINITE

    def test_admissible_roundtrip(self, rng):
        # S0^{-1} solves the equation attached to the reflection realization
        for _ in range(5):
            params = random_admissible(rng, rng.integers(1, 4), 2, 2)
            th = params.alpha - 1j * (
                params.gamma1 @ params.gamma1.conj().T @ params.s0_inverse()
            )
            p = RiccatiProblem(
                th, params.gamma1, -1j * params.gamma.conj().T @ params.s0_inverse()
            )
            diag = verify(p, params.s0_inverse())
            assert diag.residual <= 1e-9 * max(1.0, diag.residual_scale)
