import math

import numpy as np
import pytest
from hypothesis import given

from symcone.algebra import Algebra, Element, in_unit_domain, random_domain_element
from symcone.dist import BetaParams, BetaRieszParams
from symcone.errors import BoundaryError, ConeDomainError, ParameterError, UnsupportedOperationError
from symcone.mulalg import MultiplicationRule
from symcone.transform import (
    TransformSpec,
    factorization_residuals,
    jacobian_analytic,
    jacobian_numeric,
    joint_uv_logpdf,
    law_logpdf,
    predicted_uv_params,
    psi,
    psi_batch,
    psi_inv,
)

from conftest import seeds

S1 = Algebra.sym(1)
S2 = Algebra.sym(2)
CASES = (1, 2, 3, 4)
CASE_PARAMS = {
    1: dict(p=(2.0, 3.0, 4.0)),
    2: dict(s1=(1.6, 1.7), s2=(1.8, 1.9), s3=(2.0, 2.1)),
    3: dict(p1=2.0, p3=4.0, s2=(1.8, 1.9)),
    4: dict(p1=2.0, p2=3.0, s3=(2.0, 2.1)),
}


def scalar(v):
    return Element(S1, [v])


def interior(alg, rng):
    return random_domain_element(alg, rng, 0.1, 0.9)


class TestSpec:
    def test_case_rules(self):
        names = [TransformSpec.for_case(c, S2).name for c in CASES]
        assert names == ["quad/quad", "tri/tri", "quad/tri", "tri/quad"]

    def test_invalid_case(self):
        with pytest.raises(ParameterError):
            TransformSpec.for_case(5, S2)

    def test_lorentz_triangular(self):
        with pytest.raises(UnsupportedOperationError):
            TransformSpec.for_case(2, Algebra.lorentz(3))


class TestPsi:
    def test_scalar_example(self):
        u, v = psi(TransformSpec.for_case(1, S1), scalar(0.5), scalar(0.5))
        assert u.coords[0] == pytest.approx(0.75)
        assert v.coords[0] == pytest.approx(2 / 3)

    def test_scalar_inverse_example(self):
        x, y = psi_inv(TransformSpec.for_case(1, S1), scalar(0.75), scalar(2 / 3))
        assert x.coords[0] == pytest.approx(0.5)
        assert y.coords[0] == pytest.approx(0.5)

    @pytest.mark.parametrize("case", CASES)
    @given(seed=seeds)
    def test_scalar_collapse(self, case, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.uniform(0.05, 0.95, 2)
        u, v = psi(TransformSpec.for_case(case, S1), scalar(x), scalar(y))
        assert u.coords[0] == pytest.approx(1 - x * y)
        assert v.coords[0] == pytest.approx((1 - x) / (1 - x * y))

    def test_boundary_limit(self):
        spec = TransformSpec.for_case(1, S1)
        x = 0.4
        values = []
        for eps in (1e-2, 1e-4, 1e-6, 1e-8):
            u, v = psi(spec, scalar(x), scalar(1 - eps))
            assert u.coords[0] == pytest.approx(1 - x + eps * x)
            values.append(v.coords[0])
        assert all(v < 1 for v in values)
        assert np.all(np.diff(values) > 0)
        assert values[-1] == pytest.approx(1.0, abs=1e-7)

    def test_inverse_diagonal_example(self):
        half = S2.identity() * 0.5
        x, y = psi_inv(TransformSpec.for_case(1, S2), half, half)
        np.testing.assert_allclose(x.matrix, 0.75 * np.eye(2), atol=1e-15)
        np.testing.assert_allclose(y.matrix, (2 / 3) * np.eye(2), atol=1e-15)

    @pytest.mark.parametrize("r", [1, 2, 3])
    @pytest.mark.parametrize("case", CASES)
    def test_round_trip(self, case, r):
        alg = Algebra.sym(r)
        spec = TransformSpec.for_case(case, alg)
        rng = np.random.default_rng(100 * case + r)
        for _ in range(1000 if r == 2 else 200):
            x, y = random_domain_element(alg, rng), random_domain_element(alg, rng)
            u, v = psi(spec, x, y)
            assert in_unit_domain(u, 0.0) and in_unit_domain(v, 0.0)
            x2, y2 = psi_inv(spec, u, v)
            assert (x2 - x).norm() <= 1e-9 and (y2 - y).norm() <= 1e-9
            u2, v2 = psi(spec, *psi_inv(spec, u, v))
            assert (u2 - u).norm() <= 1e-9 and (v2 - v).norm() <= 1e-9

    def test_lorentz_round_trip(self, rng):
        alg = Algebra.lorentz(4)
        spec = TransformSpec.for_case(1, alg)
        for _ in range(200):
            x, y = random_domain_element(alg, rng), random_domain_element(alg, rng)
            x2, y2 = psi_inv(spec, *psi(spec, x, y))
            assert (x2 - x).norm() <= 1e-9 and (y2 - y).norm() <= 1e-9

    @pytest.mark.parametrize("case", CASES)
    def test_batch_matches_elementwise(self, case, rng):
        spec = TransformSpec.for_case(case, Algebra.sym(3))
        xs = [random_domain_element(spec.algebra, rng) for _ in range(30)]
        ys = [random_domain_element(spec.algebra, rng) for _ in range(30)]
        uc, vc = psi_batch(spec, np.array([x.coords for x in xs]), np.array([y.coords for y in ys]))
        for k, (x, y) in enumerate(zip(xs, ys)):
            u, v = psi(spec, x, y)
            np.testing.assert_allclose(uc[k], u.coords, atol=1e-12)
            np.testing.assert_allclose(vc[k], v.coords, atol=1e-12)

    def test_off_domain(self):
        spec = TransformSpec.for_case(1, S2)
        with pytest.raises(ConeDomainError):
            psi(spec, S2.from_matrix(np.diag([0.5, 1.5])), S2.identity() * 0.5)
        with pytest.raises(ConeDomainError):
            psi_inv(spec, S2.identity() * 1.2, S2.identity() * 0.5)

    def test_boundary(self):
        spec = TransformSpec.for_case(1, S1)
        near_one = scalar(1 - 1e-12)
        with pytest.raises(BoundaryError):
            psi(spec, near_one, near_one)


class TestJacobian:
    def test_scalar_value(self):
        spec = TransformSpec.for_case(1, S1)
        # x = 1 - uv, y = (1 - u)/x;  |dx/du dy/dv - dx/dv dy/du| = u / (1 - uv)
        assert jacobian_analytic(spec, scalar(0.5), scalar(0.5)) == pytest.approx(2 / 3, rel=1e-14)
        assert abs(jacobian_numeric(spec, scalar(0.5), scalar(0.5), h=1e-5) - 2 / 3) <= 1e-7

    def test_vanishes_at_boundary(self):
        spec = TransformSpec.for_case(2, S2)
        v = S2.identity() * 0.5
        values = [jacobian_analytic(spec, S2.from_matrix(np.diag([d, 0.5])), v) for d in (1e-2, 1e-4, 1e-6)]
        assert values[0] > values[1] > values[2]
        assert values[-1] < 1e-8

    @pytest.mark.parametrize("r", [1, 2, 3])
    @pytest.mark.parametrize("case", CASES)
    def test_analytic_matches_numeric(self, case, r):
        alg = Algebra.sym(r)
        spec = TransformSpec.for_case(case, alg)
        rng = np.random.default_rng(7 * case + r)
        for _ in range(25):
            u, v = interior(alg, rng), interior(alg, rng)
            ja = jacobian_analytic(spec, u, v)
            assert jacobian_numeric(spec, u, v) == pytest.approx(ja, rel=1e-6)

    def test_lorentz(self, rng):
        spec = TransformSpec.for_case(1, Algebra.lorentz(3))
        u, v = interior(spec.algebra, rng), interior(spec.algebra, rng)
        assert jacobian_numeric(spec, u, v) == pytest.approx(jacobian_analytic(spec, u, v), rel=1e-6)

    def test_second_order(self):
        spec = TransformSpec.for_case(2, S2)
        u = S2.from_matrix([[0.5, 0.1], [0.1, 0.4]])
        v = S2.from_matrix([[0.6, -0.1], [-0.1, 0.3]])
        exact = jacobian_analytic(spec, u, v)
        err = [abs(jacobian_numeric(spec, u, v, h) - exact) for h in (4e-3, 2e-3)]
        assert 3.0 < err[0] / err[1] < 5.0

    def test_step_too_large(self):
        spec = TransformSpec.for_case(1, S1)
        with pytest.raises(BoundaryError):
            jacobian_numeric(spec, scalar(1e-6), scalar(0.5), h=1e-5)


class TestJointDensity:
    def test_uniform_scalar(self, rng):
        spec = TransformSpec.for_case(1, S1)
        f = law_logpdf(BetaParams(1, 1, S1))
        for _ in range(20):
            u, v = rng.uniform(0.05, 0.95, 2)
            got = joint_uv_logpdf(spec, f, f, scalar(u), scalar(v))
            assert got == pytest.approx(math.log(u / (1 - u * v)), rel=1e-12)

    def test_off_domain(self):
        spec = TransformSpec.for_case(1, S1)
        f = law_logpdf(BetaParams(1, 1, S1))
        assert joint_uv_logpdf(spec, f, f, scalar(1.2), scalar(0.5)) == -math.inf

    @pytest.mark.parametrize("case", CASES)
    def test_factorization(self, case, rng):
        spec = TransformSpec.for_case(case, S2)
        laws = predicted_uv_params(case, S2, **CASE_PARAMS[case])
        us = [interior(S2, rng) for _ in range(10)]
        vs = [interior(S2, rng) for _ in range(10)]
        res = factorization_residuals(spec, laws, us, vs)
        assert np.ptp(res) <= 1e-8
        assert abs(res.mean()) <= 1e-8

    def test_case1_against_beta_laws(self, rng):
        spec = TransformSpec.for_case(1, S2)
        fx, fy = law_logpdf(BetaParams(6, 3, S2)), law_logpdf(BetaParams(4, 2, S2))
        fu, fv = law_logpdf(BetaParams(5, 4, S2)), law_logpdf(BetaParams(3, 2, S2))
        for _ in range(50):
            u, v = interior(S2, rng), interior(S2, rng)
            assert joint_uv_logpdf(spec, fx, fy, u, v) == pytest.approx(fu(u) + fv(v), abs=1e-8)

    @pytest.mark.parametrize("r", [1, 3])
    @pytest.mark.parametrize("case", CASES)
    def test_factorization_other_ranks(self, case, r, rng):
        alg = Algebra.sym(r)
        params = dict(CASE_PARAMS[case])
        for key in ("s1", "s2", "s3"):
            if key in params:
                params[key] = np.linspace(params[key][0], params[key][1] + 0.5, r)
        laws = predicted_uv_params(case, alg, **params)
        us = [interior(alg, rng) for _ in range(5)]
        vs = [interior(alg, rng) for _ in range(5)]
        res = factorization_residuals(TransformSpec.for_case(case, alg), laws, us, vs)
        assert np.ptp(res) <= 1e-8 and abs(res.mean()) <= 1e-8

    def test_factorization_lorentz(self, rng):
        alg = Algebra.lorentz(5)
        laws = predicted_uv_params(1, alg, p=(2.5, 3.0, 4.0))
        us = [interior(alg, rng) for _ in range(5)]
        res = factorization_residuals(TransformSpec.for_case(1, alg), laws, us, us)
        assert np.ptp(res) <= 1e-8 and abs(res.mean()) <= 1e-8

    def test_mismatched_laws(self, rng):
        spec = TransformSpec.for_case(1, S2)
        laws = predicted_uv_params(1, S2, p=(2, 3, 4))
        from symcone.transform import PredictedLaws
        wrong = PredictedLaws(1, BetaParams(2, 2, S2), BetaParams(2, 2, S2), laws.law_u, laws.law_v)
        us = [interior(S2, rng) for _ in range(10)]
        vs = [interior(S2, rng) for _ in range(10)]
        assert np.ptp(factorization_residuals(spec, wrong, us, vs)) > 1e-3

    def test_constant_parameters_reduce_to_beta(self, rng):
        # case 2 with constant vectors predicts the beta laws of case 1
        spec = TransformSpec.for_case(2, S2)
        riesz = predicted_uv_params(2, S2, s1=(2, 2), s2=(3, 3), s3=(4, 4))
        beta = predicted_uv_params(1, S2, p=(2, 3, 4))
        for a, b in zip(riesz.as_dict().values(), beta.as_dict().values()):
            if isinstance(a, dict) and "s" in a:
                np.testing.assert_allclose(a["s"], [b["p"]] * 2)
                np.testing.assert_allclose(a["t"], [b["q"]] * 2)
        us = [interior(S2, rng) for _ in range(6)]
        vs = [interior(S2, rng) for _ in range(6)]
        assert np.ptp(factorization_residuals(spec, beta, us, vs)) <= 1e-8


class TestPredictedLaws:
    def test_case1(self):
        laws = predicted_uv_params(1, S2, p=(2, 3, 4))
        got = [(l.p, l.q) for l in (laws.law_x, laws.law_y, laws.law_u, laws.law_v)]
        assert got == [(6, 3), (4, 2), (5, 4), (3, 2)]

    def test_case1_scalars(self):
        laws = predicted_uv_params(1, S2, p1=2, p2=3, p3=4)
        assert (laws.law_u.p, laws.law_u.q) == (5, 4)

    def test_case2(self):
        laws = predicted_uv_params(2, S2, s1=(1.6, 1.7), s2=(1.8, 1.9), s3=(2.0, 2.1))
        np.testing.assert_allclose(laws.law_x.s, [3.6, 3.8])
        np.testing.assert_allclose(laws.law_x.t, [1.8, 1.9])
        np.testing.assert_allclose(laws.law_y.s, [2.0, 2.1])
        np.testing.assert_allclose(laws.law_y.t, [1.6, 1.7])
        np.testing.assert_allclose(laws.law_u.s, [3.4, 3.6])
        np.testing.assert_allclose(laws.law_u.t, [2.0, 2.1])
        np.testing.assert_allclose(laws.law_v.s, [1.8, 1.9])
        np.testing.assert_allclose(laws.law_v.t, [1.6, 1.7])

    def test_case3(self):
        laws = predicted_uv_params(3, S2, p1=2, p3=4, s2=(1.8, 1.9))
        np.testing.assert_allclose(laws.law_x.s, [6, 6])
        np.testing.assert_allclose(laws.law_x.t, [1.8, 1.9])
        assert isinstance(laws.law_y, BetaParams) and (laws.law_y.p, laws.law_y.q) == (4, 2)
        np.testing.assert_allclose(laws.law_u.s, [3.8, 3.9])
        np.testing.assert_allclose(laws.law_v.t, [2, 2])

    def test_case4(self):
        laws = predicted_uv_params(4, S2, p1=2, p2=3, s3=(2.0, 2.1))
        assert isinstance(laws.law_v, BetaParams) and (laws.law_v.p, laws.law_v.q) == (3, 2)
        np.testing.assert_allclose(laws.law_x.s, [4.0, 4.1])
        np.testing.assert_allclose(laws.law_u.t, [2.0, 2.1])

    def test_constraint_violation(self):
        with pytest.raises(ParameterError, match="s1"):
            predicted_uv_params(2, S2, s1=(1.6, 0.2), s2=(1, 1), s3=(1, 1))
        with pytest.raises(ParameterError):
            predicted_uv_params(1, S2, p=(0.2, 3, 4))
        with pytest.raises(ParameterError, match="missing"):
            predicted_uv_params(3, S2, p1=2, s2=(1, 1))
