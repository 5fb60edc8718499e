import numpy as np
import pytest
from scipy.optimize import brentq

from pescat.completion import ParameterSet
from pescat.dirac import PotentialEvaluator, find_singularities, potential_v, scattering_coefficients
from pescat.errors import NotContractive, SingularAt
from pescat.inverse import invert_from_reflection, roundtrip_check
from pescat.matnum import fnorm
from pescat.realization import RationalRealization, contractive_on_real_line, evaluate
from conftest import random_admissible, random_contractive
from test_dirac import singular_S, worked_v


class TestInvertFromReflection:
    def test_worked_chain(self, worked_reflection):
        res = invert_from_reflection(worked_reflection)
        assert res.reflection_residual <= 1e-10
        for x in (0.0, 0.5, 1.5):
            val = potential_v(res.evaluator, x)
            assert val[0, 0] == pytest.approx(worked_v(x), rel=1e-10)

    def test_positon_chain(self, positon_reflection):
        res = invert_from_reflection(positon_reflection)
        assert abs(res.params.alpha[0, 0]) <= 1e-9
        for x in (0.0, 1.0, 4.0):
            val = potential_v(res.evaluator, x)
            assert val[0, 0] == pytest.approx(-2.0 / (1.0 + 2.0 * x), rel=1e-10)

    def test_indefinite_chain_singular_potential(self, indefinite_reflection):
        res = invert_from_reflection(indefinite_reflection)
        assert np.linalg.eigvalsh(res.params.S0).max() < 0
        x_star = brentq(singular_S, 0.1, 3.0, xtol=1e-14)
        found = find_singularities(res.evaluator, 3.0)
        assert len(found) == 1 and abs(found[0].x - x_star) <= 1e-6
        ok = potential_v(res.evaluator, x_star + 1.0)
        assert not isinstance(ok, SingularAt) and np.all(np.isfinite(ok))

    def test_rejects_expansive_input(self):
        R = RationalRealization(D=[[0.0]], C=[[2.0]], A=[[-1j]], B=[[1.0]])
        with pytest.raises(NotContractive):
            invert_from_reflection(R)

    def test_reduces_non_minimal_input(self, positon_reflection):
        # pad with a cancelling mode; inversion must see degree 1
        A = np.diag([-1j, -5j])
        B = np.array([[1.0], [0.0]])
        C = np.array([[1.0, 1.0]])
        res = invert_from_reflection(RationalRealization(D=[[0.0]], C=C, A=A, B=B))
        assert res.params.n == 1


class TestRoundTrip:
    def test_worked_identity_similarity(self, worked_params):
        rep = roundtrip_check(worked_params)
        assert rep.passed
        assert fnorm(np.abs(rep.similarity) - np.eye(1)) <= 1e-8
        assert rep.potential_gap <= 1e-9

    def test_positon_full_loop(self, positon_params):
        rep = roundtrip_check(positon_params)
        assert rep.passed
        assert rep.potential_gap <= 1e-9

    def test_transformed_set_recovered(self, rng, worked_params):
        s = np.array([[0.6 + 0.8j]])
        p2 = ParameterSet(
            alpha=s @ worked_params.alpha @ np.linalg.inv(s),
            S0=s @ worked_params.S0 @ s.conj().T,
            gamma1=s @ worked_params.gamma1,
            gamma=s @ worked_params.gamma,
        )
        p2.require_admissible()
        rep = roundtrip_check(p2)
        assert rep.passed

    def test_random_sets(self, rng):
        for _ in range(3):
            p = random_admissible(rng, int(rng.integers(1, 4)), 2, 2)
            rep = roundtrip_check(p)
            assert rep.passed, (
                rep.s0_gap,
                rep.lambda0_gap,
                rep.alpha_gap,
                rep.potential_gap,
            )


class TestProperties:
    def test_potential_invariant_under_similarity(self, rng):
        p = random_admissible(rng, 3, 2, 2)
        n = p.n
        s = np.eye(n) + 0.3 * (
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        )
        p2 = ParameterSet(
            alpha=s @ p.alpha @ np.linalg.inv(s),
            S0=s @ p.S0 @ s.conj().T,
            gamma1=s @ p.gamma1,
            gamma=s @ p.gamma,
        )
        p2.require_admissible(1e-8)
        pe1, pe2 = PotentialEvaluator(p), PotentialEvaluator(p2)
        for x in np.linspace(0.0, 5.0, 11):
            v1 = potential_v(pe1, float(x))
            v2 = potential_v(pe2, float(x))
            assert fnorm(v1 - v2) <= 1e-9 * (1.0 + fnorm(v1))

    def test_generated_reflections_are_contractive(self, rng):
        for _ in range(5):
            p = random_admissible(rng, int(rng.integers(1, 4)), 2, 1)
            sc = scattering_coefficients(p)
            assert contractive_on_real_line(sc.R_L)
            # vanishing at infinity
            far = evaluate(sc.R_L, 1e6)
            assert fnorm(far) <= 1e-4

    def test_full_loop_potential_match(self, rng):
        # a narrow pole band keeps S(x) well conditioned over the whole grid
        for _ in range(3):
            p = random_admissible(rng, int(rng.integers(1, 4)), 2, 2, im_band=(-0.9, -0.3))
            sc = scattering_coefficients(p)
            res = invert_from_reflection(sc.R_L)
            pe1, pe2 = PotentialEvaluator(p), res.evaluator
            for x in np.linspace(0.0, 10.0, 26):
                v1 = potential_v(pe1, float(x))
                v2 = potential_v(pe2, float(x))
                assert fnorm(v1 - v2) <= 1e-7 * (1.0 + fnorm(v1))
