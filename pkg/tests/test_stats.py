import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy import stats as sps

from symcone.algebra import Algebra
from symcone.dist import BetaParams, BetaRieszParams, draw
from symcone.errors import DimensionError, ParameterError, UnsupportedOperationError
from symcone.stats import (
    Scenario,
    default_scenario,
    distance_covariance_test,
    functionals,
    k_invariance_witness,
    ks_2sample,
    ks_test,
    strip_timing,
    verify_direct,
    verify_k_invariance,
)
from symcone.transform import TransformSpec, predicted_uv_params, psi_batch

from conftest import seeds

S2 = Algebra.sym(2)
FAST = dict(n=1500, n_ref=20000, dcov_n=500, n_perms=200)


class TestDistanceCovariance:
    def test_dependent(self, rng):
        a = rng.normal(size=500)
        stat, p = distance_covariance_test(a, a, 500, np.random.default_rng(1))
        assert stat > 0 and p < 0.01
        assert p == pytest.approx(1 / 501)

    def test_independent(self, rng):
        a, b = rng.normal(size=(500, 2)), rng.normal(size=(500, 3))
        _, p = distance_covariance_test(a, b, 500, np.random.default_rng(2))
        assert p > 0.01

    def test_constant(self, rng):
        stat, p = distance_covariance_test(rng.normal(size=200), np.ones(200), 100, rng)
        assert stat == 0.0 and p == 1.0

    def test_size_mismatch(self, rng):
        with pytest.raises(DimensionError):
            distance_covariance_test(rng.normal(size=200), rng.normal(size=199))

    def test_too_small(self, rng):
        with pytest.raises(ValueError):
            distance_covariance_test(rng.normal(size=50), rng.normal(size=50))

    def test_statistic_oracle(self, rng):
        # direct double sum: mean_jk a_jk b_jk - 2 mean_j(a_j. b_j.) + a.. b..
        a, b = rng.normal(size=(120, 2)), rng.normal(size=120) + rng.normal(size=(120, 2))[:, 0]
        da = np.linalg.norm(a[:, None] - a[None], axis=-1)
        db = np.abs(b[:, None] - b[None])
        expected = (da * db).mean() - 2 * (da.mean(1) * db.mean(1)).mean() + da.mean() * db.mean()
        stat, _ = distance_covariance_test(a, b, 10, rng)
        assert stat == pytest.approx(expected, rel=1e-12)

    def test_threads_do_not_change_result(self, rng):
        a = rng.normal(size=300)
        b = a ** 2 + rng.normal(size=300)
        one = distance_covariance_test(a, b, 200, np.random.default_rng(5), max_workers=1)
        four = distance_covariance_test(a, b, 200, np.random.default_rng(5), max_workers=4)
        assert one == four

    def test_null_calibration(self):
        rejections = 0
        for seed in range(100):
            g = np.random.default_rng(seed)
            _, p = distance_covariance_test(g.normal(size=100), g.normal(size=(100, 2)), 100, g)
            rejections += p < 0.05
        assert 0.01 <= rejections / 100 <= 0.12


class TestKS:
    def test_uniform(self, rng):
        d, p = ks_test(rng.uniform(size=10000), lambda x: x)
        assert d < 0.02 and p > 0.01

    def test_shifted(self, rng):
        d, p = ks_test(rng.uniform(size=2000) * 0.9 + 0.1, lambda x: x)
        assert p < 0.01

    def test_matches_scipy(self, rng):
        x = rng.beta(2, 3, 500)
        ref = sps.kstest(x, sps.beta(2, 3).cdf, method="asymp")
        d, p = ks_test(x, sps.beta(2, 3).cdf)
        assert d == pytest.approx(ref.statistic, rel=1e-12)
        assert p == pytest.approx(ref.pvalue, rel=1e-8)

    def test_invalid_cdf(self, rng):
        x = rng.uniform(size=100)
        with pytest.raises(ValueError):
            ks_test(x, lambda t: 2 * t)
        with pytest.raises(ValueError):
            ks_test(x, lambda t: 1 - t)
        with pytest.raises(ValueError):
            ks_test(x[:20], lambda t: t)

    def test_two_sample(self, rng):
        _, p_same = ks_2sample(rng.normal(size=2000), rng.normal(size=2000))
        _, p_diff = ks_2sample(rng.normal(size=2000), rng.normal(0.3, size=2000))
        assert p_same > 0.01 and p_diff < 0.01


class TestFunctionals:
    def test_values(self):
        coords = np.array([[0.5, 0.2 * math.sqrt(2), 0.3]])
        f = functionals(S2, coords)
        assert f["det"][0] == pytest.approx(0.5 * 0.3 - 0.04)
        assert f["trace"][0] == pytest.approx(0.8)
        assert f["delta1"][0] == pytest.approx(0.5)


class TestScenario:
    def test_validation(self):
        with pytest.raises(ParameterError):
            Scenario(case=5, params={})
        with pytest.raises(ParameterError):
            default_scenario(1, control="bogus")
        with pytest.raises(ParameterError):
            default_scenario(1, alpha=1.5)

    def test_dcov_n_capped(self):
        assert default_scenario(1, n=300).dcov_n == 300


class TestVerifyDirect:
    @pytest.mark.parametrize("case", [1, 2, 3, 4])
    def test_cases_pass(self, case):
        report = verify_direct(default_scenario(case, **FAST))
        assert report.passed, [t for t in report.tests if not t.passed]
        assert report.test("factorization_spread").statistic <= 1e-8

    def test_rank_one(self):
        # at r = 1 the predicted laws are scalar betas with closed-form cdfs
        alg = Algebra.sym(1)
        laws = predicted_uv_params(1, alg, p=(2, 3, 4))
        sx, sy = np.random.SeedSequence(11).spawn(2)
        uc, vc = psi_batch(TransformSpec.for_case(1, alg), draw(laws.law_x, 20000, sx).coords,
                           draw(laws.law_y, 20000, sy).coords)
        assert ks_test(uc[:, 0], sps.beta(5, 4).cdf)[1] > 0.01
        assert ks_test(vc[:, 0], sps.beta(3, 2).cdf)[1] > 0.01
        report = verify_direct(Scenario(case=1, params={"p": (2.0, 3.0, 4.0)}, rank=1, **FAST))
        assert report.test("factorization_spread").passed
        assert report.test("independence_dcov").passed

    def test_rank_three(self):
        sc = Scenario(case=2, params={"s1": (2, 2.1, 2.2), "s2": (2.3, 2.2, 2.1), "s3": (2, 2.5, 3)},
                      rank=3, **FAST)
        assert verify_direct(sc).passed

    def test_v_of_u_control(self):
        report = verify_direct(default_scenario(1, control="v-of-u", **FAST))
        assert not report.passed
        assert report.test("independence_dcov").p_value < 0.01

    def test_reuse_x_control(self):
        report = verify_direct(default_scenario(1, control="reuse-x", n=2000, dcov_n=2000,
                                                n_perms=200, n_ref=20000))
        assert report.test("independence_dcov").p_value < 0.01

    def test_mismatch_control(self):
        report = verify_direct(default_scenario(1, control="mismatch", **FAST))
        assert not report.passed
        assert report.test("factorization_spread").statistic > 1e-3

    def test_null_calibration(self):
        # dcov on transformed pairs at small n; U and V are independent, so rejections are ~5%
        spec = TransformSpec.for_case(1, S2)
        laws = predicted_uv_params(1, S2, p=(2, 3, 4))
        rejections = 0
        for seed in range(100):
            sx, sy, sp = np.random.SeedSequence(seed).spawn(3)
            uc, vc = psi_batch(spec, draw(laws.law_x, 120, sx).coords, draw(laws.law_y, 120, sy).coords)
            _, p = distance_covariance_test(uc, vc, 100, np.random.default_rng(sp))
            rejections += p < 0.05
        assert 0.01 <= rejections / 100 <= 0.12

    def test_report_json(self):
        report = verify_direct(default_scenario(3, **FAST))
        data = json.loads(report.to_json())
        assert data["pass"] is True
        assert data["scenario"]["rules"] == "quad/tri"
        assert "timing" in data
        assert "timing" not in json.loads(strip_timing(report.to_json()))
        assert {t["name"] for t in data["tests"]} >= {"independence_dcov", "ks_U_det", "ks_V_delta1"}

    def test_reproducible_across_shards_and_threads(self):
        base = verify_direct(default_scenario(2, n=600, n_ref=3000, dcov_n=300, n_perms=50, shards=3))
        again = verify_direct(default_scenario(2, n=600, n_ref=3000, dcov_n=300, n_perms=50, shards=3),
                              max_workers=3)
        assert strip_timing(base.to_json()) == strip_timing(again.to_json())

    def test_seed_changes_report(self):
        a = verify_direct(default_scenario(1, n=400, n_ref=2000, dcov_n=200, n_perms=50, seed=1))
        b = verify_direct(default_scenario(1, n=400, n_ref=2000, dcov_n=200, n_perms=50, seed=2))
        assert strip_timing(a.to_json()) != strip_timing(b.to_json())


class TestKInvariance:
    def test_beta_invariant(self):
        report = verify_k_invariance(BetaParams(3, 3, S2), n=4000, seed=0)
        assert report.passed
        assert report.test("logpdf_invariance").statistic <= 1e-10

    def test_beta_rank_three(self):
        report = verify_k_invariance(BetaParams(2.5, 3, Algebra.sym(3)), n=2000, seed=3)
        assert report.test("logpdf_invariance").statistic <= 1e-10

    def test_constant_riesz_invariant(self):
        report = verify_k_invariance(BetaRieszParams([2.5, 2.5], [2, 2], S2), n=2000, seed=1)
        assert report.test("logpdf_invariance").statistic <= 1e-10

    def test_riesz_not_invariant(self):
        report = verify_k_invariance(BetaRieszParams([3, 1.5], [2, 2], S2), n=4000, seed=0)
        assert report.test("logpdf_invariance").statistic > 1e-3
        assert report.test("ks_rotated_delta1").p_value < 0.01

    def test_witness(self):
        w = k_invariance_witness()
        assert w["residual"] > 1e-3
        assert w["residual"] == pytest.approx(1.5 * math.log(0.5 / 0.3), rel=1e-12)
        np.testing.assert_allclose(w["residual"], 0.766238, atol=1e-6)

    def test_lorentz_unsupported(self):
        with pytest.raises(UnsupportedOperationError):
            verify_k_invariance(BetaParams(3, 3, Algebra.lorentz(3)))

    @settings(max_examples=10)
    @given(seed=seeds)
    def test_beta_residual_property(self, seed):
        from symcone.algebra import random_domain_element
        from symcone.mulalg import OrthogonalAutomorphism
        from symcone.stats import k_invariance_residual
        g = np.random.default_rng(seed)
        x = random_domain_element(S2, g)
        k = OrthogonalAutomorphism.random(S2, g)
        assert k_invariance_residual(BetaParams(2.2, 3.7, S2), x, k) <= 1e-10
