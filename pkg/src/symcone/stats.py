"""Statistical verification harness.

Independence of ``(U, V)`` is tested with a permutation distance-covariance
test; marginal laws are tested with Kolmogorov-Smirnov statistics of the
functionals ``det``, ``trace`` and ``Delta_1`` against a large reference
sample drawn from the predicted law.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Callable

import numpy as np
from scipy import special
from scipy import stats as sps

from .algebra import (
    Algebra,
    Element,
    Kind,
    batch_eigenvalues,
    batch_log_minors,
    coords_to_sym,
    element_from_spectrum,
    random_orthogonal,
    sym_to_coords,
)
from .dist import BetaParams, BetaRieszParams, draw, logpdf_coords
from .errors import DimensionError, ParameterError, UnsupportedOperationError
from .mulalg import OrthogonalAutomorphism
from .transform import PredictedLaws, TransformSpec, factorization_residuals, predicted_uv_params, psi_batch

CONTROLS = ("v-of-u", "reuse-x", "mismatch")


# -- tests --------------------------------------------------------------------------


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _centered_distances(a: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - a[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return d - d.mean(axis=0)[None, :] - d.mean(axis=1)[:, None] + d.mean()


def distance_covariance_test(a, b, n_perms: int = 500, rng: np.random.Generator | None = None,
                             max_workers: int | None = None) -> tuple[float, float]:
    """Squared sample distance covariance and its permutation p-value.

    The statistic is the V-statistic ``mean(A * B)`` of the double-centred
    distance matrices; the p-value is ``(1 + #{perm >= obs}) / (1 + n_perms)``.
    Permutations are drawn up front, so the result does not depend on
    ``max_workers``.
    """
    a, b = _as_2d(a), _as_2d(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"sample sizes differ: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    if n < 100:
        raise ValueError(f"distance covariance test needs at least 100 samples, got {n}")
    rng = rng if rng is not None else np.random.default_rng()
    A, B = _centered_distances(a), _centered_distances(b)
    stat = float(np.mean(A * B))
    perms = [rng.permutation(n) for _ in range(n_perms)]
    # permuting both indices of B is the same as relabelling the b sample
    tol = 1e-12 * max(abs(stat), 1e-300)

    def count(chunk):
        return sum(1 for p in chunk if float(np.mean(A * B[np.ix_(p, p)])) >= stat - tol)

    workers = max(1, max_workers or 1)
    chunks = [perms[k::workers] for k in range(workers)]
    if workers == 1:
        exceed = count(perms)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            exceed = sum(pool.map(count, chunks))
    return stat, (1.0 + exceed) / (1.0 + n_perms)


def ks_test(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov statistic with the asymptotic p-value."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < 50:
        raise ValueError(f"KS test needs at least 50 samples, got {n}")
    f = np.asarray(cdf(x), dtype=float)
    if f.shape != x.shape or np.any(~np.isfinite(f)) or np.any(f < 0) or np.any(f > 1):
        raise ValueError("cdf must return values in [0, 1]")
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("cdf must be nondecreasing")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    return d, float(special.kolmogorov(math.sqrt(n) * d))


def ks_2sample(a, b) -> tuple[float, float]:
    res = sps.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(res.statistic), float(res.pvalue)


def functionals(algebra: Algebra, coords: np.ndarray) -> dict[str, np.ndarray]:
    """``det``, ``trace`` and ``Delta_1`` (canonical frame) of each row."""
    lam = batch_eigenvalues(algebra, coords)
    return {
        "det": np.prod(lam, axis=1),
        "trace": np.sum(lam, axis=1),
        "delta1": np.exp(batch_log_minors(algebra, coords)[:, 0]),
    }


# -- reports ----------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    statistic: float
    p_value: float | None
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "statistic": float(self.statistic),
                "p_value": None if self.p_value is None else float(self.p_value),
                "pass": bool(self.passed)}


@dataclass
class VerificationReport:
    scenario: dict
    tests: list
    environment: dict
    diagnostics: dict = field(default_factory=dict)
    runtime_s: float = 0.0
    timestamp: str = ""

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tests)

    def test(self, name: str) -> CheckResult:
        for t in self.tests:
            if t.name == name:
                return t
        raise KeyError(name)

    def as_dict(self, timing: bool = True) -> dict:
        out = {
            "scenario": self.scenario,
            "tests": [t.as_dict() for t in self.tests],
            "environment": self.environment,
            "diagnostics": self.diagnostics,
            "pass": self.passed,
        }
        if timing:
            out["timing"] = {"runtime_s": self.runtime_s, "timestamp": self.timestamp}
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.as_dict(timing), indent=2, sort_keys=True) + "\n"


def strip_timing(text: str) -> str:
    """Canonical JSON of a serialized report without its ``timing`` block."""
    data = json.loads(text)
    data.pop("timing", None)
    return json.dumps(data, indent=2, sort_keys=True)


def _environment(seed, shards) -> dict:
    from . import __version__
    return {"seed": seed, "shards": shards, "version": __version__, "numpy": np.__version__}


def _stamp(report: VerificationReport, t0: float) -> VerificationReport:
    report.runtime_s = round(time.perf_counter() - t0, 3)
    report.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return report


# -- direct verification pipeline -------------------------------------------------------------


@dataclass
class Scenario:
    """Configuration of one end-to-end run of :func:`verify_direct`.

    ``params`` holds the keyword arguments of :func:`predicted_uv_params`
    for the chosen ``case``.  The independence test runs on the first
    ``dcov_n`` of the ``n`` transformed pairs.
    """

    case: int
    params: dict
    rank: int = 2
    n: int = 5000
    seed: int = 7
    alpha: float = 0.01
    n_perms: int = 500
    dcov_n: int = 1000
    n_ref: int = 100_000
    grid: int = 10
    shards: int = 1
    control: str | None = None

    def __post_init__(self):
        if self.case not in (1, 2, 3, 4):
            raise ParameterError(f"case must be 1, 2, 3 or 4, got {self.case}")
        if self.rank < 1:
            raise ParameterError("rank must be positive")
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie in (0, 1)")
        if self.n < 100 or self.n_ref < 100:
            raise ParameterError("n and n_ref must be at least 100")
        if self.shards < 1:
            raise ParameterError("shards must be positive")
        if self.control is not None and self.control not in CONTROLS:
            raise ParameterError(f"control must be one of {CONTROLS}")
        self.params = {k: (np.asarray(v, dtype=float).tolist() if np.ndim(v) else float(v))
                       for k, v in self.params.items()}
        self.dcov_n = min(self.dcov_n, self.n)

    @property
    def algebra(self) -> Algebra:
        return Algebra.sym(self.rank)

    def laws(self) -> PredictedLaws:
        return predicted_uv_params(self.case, self.algebra, **self.params)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["algebra"] = {"kind": "sym", "rank": self.rank}
        d["rules"] = TransformSpec.for_case(self.case, self.algebra).name
        del d["rank"]
        return d


DEFAULT_CASE_PARAMS = {
    1: {"p": (2.0, 3.0, 4.0)},
    2: {"s1": (1.6, 1.7), "s2": (1.8, 1.9), "s3": (2.0, 2.1)},
    3: {"p1": 2.0, "p3": 4.0, "s2": (1.8, 1.9)},
    4: {"p1": 2.0, "p2": 3.0, "s3": (2.0, 2.1)},
}


def default_scenario(case: int, **overrides) -> Scenario:
    """Scenario with the reference parameters of ``case`` at rank 2."""
    return Scenario(case=case, params=dict(DEFAULT_CASE_PARAMS[case]), **overrides)


def _interior_grid(algebra: Algebra, k: int, rng: np.random.Generator) -> list[Element]:
    return [element_from_spectrum(algebra, rng.uniform(0.1, 0.9, algebra.rank), rng) for _ in range(k)]


def _jordan_square(algebra: Algebra, coords: np.ndarray) -> np.ndarray:
    m = coords_to_sym(coords, algebra.rank)
    return sym_to_coords(m @ m)


def verify_direct(scenario: Scenario, max_workers: int | None = None) -> VerificationReport:
    """Sample ``(X, Y)``, map through psi and test the predicted structure of ``(U, V)``.

    Tests: distance-covariance independence of the U and V coordinates;
    two-sample KS of det, trace and Delta_1 of U and of V against
    ``n_ref`` exact draws of the predicted laws; spread and mean of the
    log-density factorisation residual on a ``grid x grid`` set of interior
    ``(u, v)`` pairs.  Controls: ``v-of-u`` replaces V by U^2,
    ``reuse-x`` feeds ``(X, X)``, ``mismatch`` feeds independent B(2, 2)
    inputs.
    """
    t0 = time.perf_counter()
    alg = scenario.algebra
    spec = TransformSpec.for_case(scenario.case, alg)
    laws = scenario.laws()
    law_x, law_y = laws.law_x, laws.law_y
    if scenario.control == "mismatch":
        law_x = law_y = BetaParams(2.0, 2.0, alg)
    seq_x, seq_y, seq_ru, seq_rv, seq_perm, seq_grid = np.random.SeedSequence(scenario.seed).spawn(6)
    sh, mw = scenario.shards, max_workers
    xs = draw(law_x, scenario.n, seq_x, sh, mw)
    ys = xs if scenario.control == "reuse-x" else draw(law_y, scenario.n, seq_y, sh, mw)
    uc, vc = psi_batch(spec, xs.coords, ys.coords)
    if scenario.control == "v-of-u":
        vc = _jordan_square(alg, uc)

    tests = []
    alpha = scenario.alpha
    m = scenario.dcov_n
    stat, p = distance_covariance_test(uc[:m], vc[:m], scenario.n_perms,
                                       np.random.default_rng(seq_perm), max_workers)
    tests.append(CheckResult("independence_dcov", stat, p, p > alpha))

    ref_u = draw(laws.law_u, scenario.n_ref, seq_ru, sh, mw)
    ref_v = draw(laws.law_v, scenario.n_ref, seq_rv, sh, mw)
    for label, sample, ref in (("U", uc, ref_u.coords), ("V", vc, ref_v.coords)):
        fs, fr = functionals(alg, sample), functionals(alg, ref)
        for key in ("det", "trace", "delta1"):
            d, pk = ks_2sample(fs[key], fr[key])
            tests.append(CheckResult(f"ks_{label}_{key}", d, pk, pk > alpha))

    grid_rng = np.random.default_rng(seq_grid)
    us = _interior_grid(alg, scenario.grid, grid_rng)
    vs = _interior_grid(alg, scenario.grid, grid_rng)
    input_laws = PredictedLaws(laws.case, law_x, law_y, laws.law_u, laws.law_v)
    resid = factorization_residuals(spec, input_laws, us, vs)
    spread = float(np.max(resid) - np.min(resid))
    mean = float(np.mean(resid))
    tests.append(CheckResult("factorization_spread", spread, None, spread <= 1e-8))
    tests.append(CheckResult("factorization_mean", abs(mean), None, abs(mean) <= 1e-8))

    diagnostics = {
        "laws": laws.as_dict(),
        "resampled": xs.diagnostics["resampled"] + ys.diagnostics["resampled"],
        "factorization_mean": mean,
        "factorization_spread": spread,
    }
    report = VerificationReport(scenario.as_dict(), tests, _environment(scenario.seed, sh), diagnostics)
    return _stamp(report, t0)


# -- K-invariance ------------------------------------------------------------------------------


def k_invariance_residual(params, x: Element, k: OrthogonalAutomorphism) -> float:
    """``|log f(kx) - log f(x)|``."""
    lp = logpdf_coords(params, np.stack([x.coords, k(x).coords]))
    return float(abs(lp[1] - lp[0]))


def k_invariance_witness() -> dict:
    """A fixed rank-2 point where a beta-Riesz density with non-constant ``s`` is not K-invariant.

    ``s = (3, 1.5)``, ``t = (2, 2)``, ``x = [[0.5, 0.2], [0.2, 0.3]]`` and
    ``k`` the rotation by 90 degrees, which swaps the diagonal entries of
    ``x``.  Only the ``Delta_1`` term changes, so the residual equals
    ``1.5 * log(0.5 / 0.3)``.
    """
    alg = Algebra.sym(2)
    params = BetaRieszParams([3.0, 1.5], [2.0, 2.0], alg)
    x = alg.from_matrix([[0.5, 0.2], [0.2, 0.3]])
    k = OrthogonalAutomorphism(alg, np.array([[0.0, -1.0], [1.0, 0.0]]))
    return {
        "params": params.as_dict(),
        "x": x.matrix.tolist(),
        "k": k.matrix.tolist(),
        "residual": k_invariance_residual(params, x, k),
        "expected": 1.5 * math.log(0.5 / 0.3),
    }


def verify_k_invariance(params, n: int = 4000, seed: int = 0, n_rotations: int = 100,
                        alpha: float = 0.01, shards: int = 1,
                        max_workers: int | None = None) -> VerificationReport:
    """Deterministic and sampled checks that a law on D is invariant under K.

    The deterministic test evaluates ``|log f(kx) - log f(x)|`` for
    ``n_rotations`` random ``(k, x)`` (tolerance 1e-10).  The sampled tests
    compare det and Delta_1 between one half of an exact sample and the
    other half rotated by independent random ``k``.
    """
    t0 = time.perf_counter()
    alg = params.algebra
    if alg.kind is not Kind.SYM:
        raise UnsupportedOperationError("sampled K-invariance checks need an exact sampler (sym only)")
    seq_det, seq_draw, seq_rot = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(seq_det)
    worst = 0.0
    for _ in range(n_rotations):
        x = element_from_spectrum(alg, rng.uniform(0.05, 0.95, alg.rank), rng)
        k = OrthogonalAutomorphism.random(alg, rng)
        worst = max(worst, k_invariance_residual(params, x, k))
    tests = [CheckResult("logpdf_invariance", worst, None, worst <= 1e-10)]

    sample = draw(params, n, seq_draw, shards, max_workers).coords
    half = n // 2
    first, second = sample[:half], sample[half:2 * half]
    rot_rng = np.random.default_rng(seq_rot)
    qs = np.stack([random_orthogonal(alg.rank, rot_rng) for _ in range(half)])
    rotated = sym_to_coords(qs @ coords_to_sym(second, alg.rank) @ np.swapaxes(qs, -1, -2))
    f1, f2 = functionals(alg, first), functionals(alg, rotated)
    for key in ("det", "delta1"):
        d, p = ks_2sample(f1[key], f2[key])
        tests.append(CheckResult(f"ks_rotated_{key}", d, p, p > alpha))
    scenario = {"params": params.as_dict(), "algebra": {"kind": "sym", "rank": alg.rank},
                "n": n, "n_rotations": n_rotations, "alpha": alpha, "mode": "k-invariance"}
    report = VerificationReport(scenario, tests, _environment(seed, shards), {"max_logpdf_residual": worst})
    return _stamp(report, t0)
