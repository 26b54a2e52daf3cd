"""Beta and beta-Riesz distributions on the unit domain D.

Densities are taken with respect to Lebesgue measure of the trace inner
product ``tr(xy)``.  For sym algebras this is the Lebesgue measure of the
canonical coordinates; for the Lorentz algebra ``tr(xy) = 2 <x, y>`` and
the log-density in canonical coordinates picks up ``(dim/2) log 2``.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .algebra import (
    Algebra,
    Element,
    JordanFrame,
    Kind,
    batch_eigenvalues,
    batch_log_minors,
    coords_to_sym,
    sym_to_coords,
    unit_domain_mask,
)
from .errors import DiagnosticError, ParameterError, UnsupportedOperationError

# every emitted sample satisfies in_unit_domain(x, DOMAIN_TOL)
DOMAIN_TOL = 1e-12


def _check_riesz_vector(s, algebra: Algebra, name: str) -> np.ndarray:
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape != (algebra.rank,):
        raise ParameterError(f"{name} must have length {algebra.rank}, got {s.size}")
    bounds = np.arange(algebra.rank) * algebra.d / 2.0
    for j, (sj, bj) in enumerate(zip(s, bounds)):
        if not (math.isfinite(sj) and sj > bj):
            raise ParameterError(f"{name}[{j + 1}] = {sj:g} must exceed {bj:g}", index=j)
    s.setflags(write=False)
    return s


@dataclass(frozen=True, eq=False)
class BetaRieszParams:
    s: np.ndarray
    t: np.ndarray
    algebra: Algebra
    frame: JordanFrame | None = None

    def __post_init__(self):
        object.__setattr__(self, "s", _check_riesz_vector(self.s, self.algebra, "s"))
        object.__setattr__(self, "t", _check_riesz_vector(self.t, self.algebra, "t"))

    @property
    def family(self) -> str:
        return "beta-riesz"

    def as_dict(self) -> dict:
        return {"family": self.family, "s": self.s.tolist(), "t": self.t.tolist()}


@dataclass(frozen=True)
class BetaParams:
    p: float
    q: float
    algebra: Algebra

    def __post_init__(self):
        bound = self.algebra.n_over_r - 1.0
        for name, val in (("p", self.p), ("q", self.q)):
            if not (math.isfinite(val) and val > bound):
                raise ParameterError(f"{name} = {val:g} must exceed dim/r - 1 = {bound:g}")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))

    @property
    def family(self) -> str:
        return "beta"

    def as_riesz(self, frame: JordanFrame | None = None) -> BetaRieszParams:
        r = self.algebra.rank
        return BetaRieszParams(np.full(r, self.p), np.full(r, self.q), self.algebra, frame)

    def as_dict(self) -> dict:
        return {"family": self.family, "p": self.p, "q": self.q}


def params_from_dict(data: dict, algebra: Algebra):
    if data["family"] == "beta":
        return BetaParams(data["p"], data["q"], algebra)
    if data["family"] == "beta-riesz":
        return BetaRieszParams(data["s"], data["t"], algebra)
    raise ParameterError(f"unknown family {data['family']!r}")


# -- normalising constants -----------------------------------------------------------


def cone_log_gamma(s, algebra: Algebra) -> float:
    """``log Gamma_V(s) = (dim-r)/2 log(2 pi) + sum_j log Gamma(s_j - (j-1)d/2)``."""
    s = np.asarray(s, dtype=float).reshape(-1)
    if np.ndim(s) == 0 or s.size == 1 and algebra.rank > 1:
        s = np.full(algebra.rank, float(s.reshape(-1)[0]))
    s = _check_riesz_vector(s, algebra, "s")
    shifted = s - np.arange(algebra.rank) * algebra.d / 2.0
    return float(0.5 * (algebra.dim - algebra.rank) * math.log(2 * math.pi) + np.sum(gammaln(shifted)))


def log_beta_normalizer(params) -> float:
    """``log B_V(s, t) = log Gamma_V(s) + log Gamma_V(t) - log Gamma_V(s + t)``."""
    if isinstance(params, BetaParams):
        params = params.as_riesz()
    alg = params.algebra
    return cone_log_gamma(params.s, alg) + cone_log_gamma(params.t, alg) - cone_log_gamma(params.s + params.t, alg)


def _measure_shift(algebra: Algebra) -> float:
    return 0.5 * algebra.dim * math.log(algebra.trace_form_scale)


# -- densities ---------------------------------------------------------------------------


def _minor_weights(s: np.ndarray) -> np.ndarray:
    return s - np.append(s[1:], 0.0)


def logpdf_coords(params, coords: np.ndarray) -> np.ndarray:
    """Vectorised log-density on an ``(m, dim)`` array; ``-inf`` off D."""
    alg = params.algebra
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    out = np.full(coords.shape[0], -np.inf)
    lam = batch_eigenvalues(alg, coords)
    inside = (lam[:, -1] > 0) & (lam[:, 0] < 1)
    if not np.any(inside):
        return out
    nr = alg.n_over_r
    const = _measure_shift(alg) - log_beta_normalizer(params)
    if isinstance(params, BetaParams):
        lam = lam[inside]
        out[inside] = (const + (params.p - nr) * np.sum(np.log(lam), axis=1)
                       + (params.q - nr) * np.sum(np.log1p(-lam), axis=1))
        return out
    xin = coords[inside]
    e = alg.identity().coords
    lx = batch_log_minors(alg, xin, params.frame)
    ly = batch_log_minors(alg, e - xin, params.frame)
    out[inside] = const + lx @ _minor_weights(params.s - nr) + ly @ _minor_weights(params.t - nr)
    return out


def beta_riesz_logpdf(x: Element, params: BetaRieszParams) -> float:
    return float(logpdf_coords(params, x.coords[None])[0])


def beta_logpdf(x: Element, params: BetaParams) -> float:
    return float(logpdf_coords(params, x.coords[None])[0])


def coords_logpdf(params) -> Callable[[np.ndarray], np.ndarray]:
    """The vectorised log-density of ``params`` as a standalone callable."""
    return lambda coords: logpdf_coords(params, coords)


def as_coords_logpdf(fn: Callable[[Element], float], algebra: Algebra) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap an element-level log-density for routines that work on coordinate arrays."""
    def batched(coords):
        coords = np.atleast_2d(coords)
        return np.array([fn(Element(algebra, c)) for c in coords])
    return batched


# -- sample containers -----------------------------------------------------------------


@dataclass
class SampleBatch:
    algebra: Algebra
    coords: np.ndarray
    kind: str
    params: object = None
    seed: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return self.coords.shape[0]

    @property
    def elements(self) -> list[Element]:
        return [Element(self.algebra, c) for c in self.coords]

    @property
    def matrices(self) -> np.ndarray:
        if self.algebra.kind is not Kind.SYM:
            raise UnsupportedOperationError("matrix form exists only for sym algebras")
        return coords_to_sym(self.coords, self.algebra.rank)

    def metadata(self) -> dict:
        return {
            "algebra": {"kind": self.algebra.kind.value, "rank": self.algebra.rank, "dim": self.algebra.dim},
            "params": None if self.params is None else self.params.as_dict(),
            "seed": self.seed,
            "sampler": self.kind,
            "n": len(self),
            "diagnostics": self.diagnostics,
        }

    def to_csv(self, path) -> Path:
        """Write the samples as CSV plus a ``.meta.json`` sidecar; returns the sidecar path."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.algebra.coord_names())
            for row in self.coords:
                writer.writerow([repr(float(v)) for v in row])
        meta = path.with_suffix(".meta.json")
        meta.write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n")
        return meta


def read_csv(path, algebra: Algebra) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header != algebra.coord_names():
        raise ValueError(f"CSV header {header} does not match {algebra}")
    return np.array(body, dtype=float).reshape(-1, algebra.dim)


# -- exact samplers (sym only) --------------------------------------------------------------


def _require_sym(algebra: Algebra):
    if algebra.kind is not Kind.SYM:
        raise UnsupportedOperationError("exact samplers are implemented for sym algebras only")


def _riesz_matrices(s: np.ndarray, r: int, rng: np.random.Generator, size: int) -> np.ndarray:
    # Bartlett: C_ii^2 ~ Gamma(s_i - (i-1)/2, 1), C_ij ~ N(0, 1/2) below the diagonal
    shapes = s - np.arange(r) / 2.0
    c = np.zeros((size, r, r))
    idx = np.arange(r)
    c[:, idx, idx] = np.sqrt(rng.gamma(shapes, 1.0, size=(size, r)))
    il, jl = np.tril_indices(r, -1)
    if il.size:
        c[:, il, jl] = rng.standard_normal((size, il.size)) * math.sqrt(0.5)
    return c @ np.swapaxes(c, -1, -2)


def sample_riesz_bartlett(s, algebra: Algebra, rng: np.random.Generator, size: int | None = None):
    """Riesz law with density proportional to ``Delta_{s-dim/r}(x) exp(-tr x)``.

    Internal building block of the quotient samplers.  Returns an Element,
    or an ``(size, dim)`` coordinate array when ``size`` is given.  With
    constant ``s = p`` this is the Wishart law with mean ``p e``.
    """
    _require_sym(algebra)
    s = _check_riesz_vector(s, algebra, "s")
    mats = _riesz_matrices(s, algebra.rank, rng, 1 if size is None else size)
    coords = sym_to_coords(mats)
    return Element(algebra, coords[0]) if size is None else coords


def _quotient_batch(params, rng: np.random.Generator, size: int) -> tuple[np.ndarray, int]:
    alg = params.algebra
    r = alg.rank
    if isinstance(params, BetaParams):
        s, t, q = np.full(r, params.p), np.full(r, params.q), None
    else:
        s, t = params.s, params.t
        frame = params.frame
        q = None if frame is None or frame.is_canonical else frame.basis
    out = np.empty((size, r, r))
    todo = np.arange(size)
    redraws = 0
    while todo.size:
        a = _riesz_matrices(s, r, rng, todo.size)
        b = _riesz_matrices(t, r, rng, todo.size)
        total = a + b
        ok = np.linalg.eigvalsh(total)[:, 0] > 1e-12
        if isinstance(params, BetaParams):
            lam, vecs = np.linalg.eigh(total[ok])
            root = np.einsum("...ij,...j,...kj->...ik", vecs, lam ** -0.5, vecs)
            x = root @ a[ok] @ root
        else:
            # frame-relative laws are rotations of the canonical ones
            chol_inv = np.linalg.inv(np.linalg.cholesky(total[ok]))
            x = chol_inv @ a[ok] @ np.swapaxes(chol_inv, -1, -2)
            if q is not None:
                x = q @ x @ q.T
        x = 0.5 * (x + np.swapaxes(x, -1, -2))
        good = np.zeros(todo.size, dtype=bool)
        good[ok] = unit_domain_mask(alg, sym_to_coords(x), DOMAIN_TOL)
        filled = np.flatnonzero(ok)[good[ok]]
        out[todo[filled]] = x[good[ok]]
        redraws += int(np.count_nonzero(~good))
        todo = todo[~good]
    return sym_to_coords(out), redraws


def _sample(params, rng, size, kind):
    _require_sym(params.algebra)
    coords, redraws = _quotient_batch(params, rng, 1 if size is None else size)
    if size is None:
        return Element(params.algebra, coords[0])
    return SampleBatch(params.algebra, coords, "exact", params, None,
                       {"resampled": redraws, "construction": kind})


def sample_beta(params: BetaParams, rng: np.random.Generator, size: int | None = None):
    """Beta law as ``P((A+B)^{-1/2}) A`` for independent Wishart ``A``, ``B``."""
    return _sample(params, rng, size, "quadratic quotient")


def sample_beta_riesz(params: BetaRieszParams, rng: np.random.Generator, size: int | None = None):
    """Beta-Riesz law as ``t_{A+B}^{-1} A`` for independent Riesz ``A``, ``B``."""
    return _sample(params, rng, size, "triangular quotient")


def draw(params, n: int, seed, shards: int = 1, max_workers: int | None = None) -> SampleBatch:
    """``n`` exact samples split over ``shards`` independent RNG streams.

    ``seed`` is an integer or a ``SeedSequence``.  The output depends on
    ``(seed, shards)`` only, never on ``max_workers``.
    """
    sampler = sample_beta if isinstance(params, BetaParams) else sample_beta_riesz
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seqs = root.spawn(shards)
    sizes = [n // shards + (1 if k < n % shards else 0) for k in range(shards)]

    def run(k):
        return sampler(params, np.random.default_rng(seqs[k]), sizes[k])

    if shards == 1 or max_workers == 1:
        parts = [run(k) for k in range(shards)]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            parts = list(pool.map(run, range(shards)))
    coords = np.concatenate([p.coords for p in parts])
    diag = {"resampled": sum(p.diagnostics["resampled"] for p in parts), "shards": shards,
            "construction": parts[0].diagnostics["construction"]}
    meta_seed = int(seed) if isinstance(seed, (int, np.integer)) else None
    return SampleBatch(params.algebra, coords, "exact", params, meta_seed, diag)


# -- Metropolis reference sampler ---------------------------------------------------------------


def default_proposal_scale(algebra: Algebra) -> float:
    return 0.05 * math.sqrt(2.0 / algebra.dim)


def sample_mh(logpdf: Callable[[np.ndarray], np.ndarray], init: Element, steps: int,
              proposal_scale: float | None = None, rng: np.random.Generator | None = None, *,
              burn_in: int = 10_000, thin: int = 10, chains: int = 1, window: int = 1000,
              params=None, seed: int | None = None) -> SampleBatch:
    """Random-walk Metropolis over canonical coordinates, restricted to D.

    ``logpdf`` maps an ``(m, dim)`` coordinate array to ``m`` log-densities
    (see :func:`coords_logpdf` and :func:`as_coords_logpdf`).  ``chains``
    independent chains start at ``init`` and advance together; each runs
    ``burn_in + steps`` iterations and keeps every ``thin``-th state after
    burn-in.  Proposals leaving D are rejected.
    """
    alg = init.algebra
    rng = rng if rng is not None else np.random.default_rng(seed)
    scale = default_proposal_scale(alg) if proposal_scale is None else float(proposal_scale)
    state = np.tile(init.coords, (chains, 1))
    lp = np.asarray(logpdf(state), dtype=float)
    if not np.all(np.isfinite(lp)):
        raise ValueError("logpdf must be finite at the initial state")
    kept = []
    accepted = 0
    in_window = 0
    total = burn_in + steps
    for it in range(1, total + 1):
        prop = state + scale * rng.standard_normal(state.shape)
        log_u = np.log(rng.uniform(size=chains))
        ok = unit_domain_mask(alg, prop, DOMAIN_TOL)
        lp_prop = np.full(chains, -np.inf)
        if np.any(ok):
            lp_prop[ok] = logpdf(prop[ok])
        move = log_u < lp_prop - lp
        state[move] = prop[move]
        lp[move] = lp_prop[move]
        n_move = int(np.count_nonzero(move))
        accepted += n_move
        in_window += n_move
        if it % window == 0:
            if in_window == 0:
                raise DiagnosticError(
                    f"no proposal accepted in {window} iterations; try a smaller proposal_scale"
                )
            in_window = 0
        if it > burn_in and (it - burn_in) % thin == 0:
            kept.append(state.copy())
    coords = np.stack(kept, axis=1).reshape(-1, alg.dim) if kept else np.empty((0, alg.dim))
    diag = {
        "acceptance_rate": accepted / (total * chains),
        "proposal_scale": scale,
        "burn_in": burn_in,
        "thin": thin,
        "chains": chains,
        "steps": steps,
    }
    return SampleBatch(alg, coords, "mcmc", params, seed, diag)


# -- quadrature oracle ----------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizationResult:
    value: float
    error: float
    nodes: int


def _gl(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def quadrature_nodes(algebra: Algebra, nodes: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Product Gauss-Legendre rule on D for the 3-dimensional algebras.

    Returns ``(coords, weights)`` such that ``sum(weights * f(coords))``
    approximates the integral of ``f`` over D in canonical coordinates.
    Supported: sym rank 2 and Lorentz dimension 3.
    """
    if algebra.kind is Kind.SYM and algebra.rank == 2:
        # D = {0<a,c<1, b^2 < min(ac, (1-a)(1-c))}, b = m*tau, canonical z = sqrt(2) b
        g, wg = _gl(nodes, 0.0, 1.0)
        tau, wt = _gl(nodes, -1.0, 1.0)
        a, c, t = np.meshgrid(g, g, tau, indexing="ij")
        wa, wc, wtt = np.meshgrid(wg, wg, wt, indexing="ij")
        m = np.sqrt(np.minimum(a * c, (1 - a) * (1 - c)))
        coords = np.column_stack([a.ravel(), (math.sqrt(2.0) * m * t).ravel(), c.ravel()])
        weights = (wa * wc * wtt * math.sqrt(2.0) * m).ravel()
        return coords, weights
    if algebra.kind is Kind.LORENTZ and algebra.dim == 3:
        # D = {|xbar| < min(x0, 1-x0)}; polar coordinates, split at x0 = 1/2
        parts_c, parts_w = [], []
        rho_t, w_rho = _gl(nodes, 0.0, 1.0)
        theta = 2 * math.pi * np.arange(2 * nodes) / (2 * nodes)
        w_theta = np.full(theta.size, 2 * math.pi / theta.size)
        for lo, hi in ((0.0, 0.5), (0.5, 1.0)):
            x0, w0 = _gl(nodes, lo, hi)
            X0, RT, TH = np.meshgrid(x0, rho_t, theta, indexing="ij")
            W0, WR, WT = np.meshgrid(w0, w_rho, w_theta, indexing="ij")
            m = np.minimum(X0, 1 - X0)
            rho = m * RT
            parts_c.append(np.column_stack([X0.ravel(), (rho * np.cos(TH)).ravel(), (rho * np.sin(TH)).ravel()]))
            parts_w.append((W0 * WR * WT * rho * m).ravel())
        return np.concatenate(parts_c), np.concatenate(parts_w)
    raise UnsupportedOperationError("quadrature is implemented for sym(r=2) and lorentz(dim=3)")


def numeric_normalization(logpdf: Callable[[np.ndarray], np.ndarray], algebra: Algebra,
                          nodes: int = 64, chunk: int = 200_000) -> NormalizationResult:
    """Integral of ``exp(logpdf)`` over D; ``error`` compares against half the nodes."""

    def integrate(n):
        coords, weights = quadrature_nodes(algebra, n)
        total = 0.0
        for lo in range(0, coords.shape[0], chunk):
            vals = np.exp(np.asarray(logpdf(coords[lo:lo + chunk]), dtype=float))
            total += float(weights[lo:lo + chunk] @ vals)
        return total

    fine = integrate(nodes)
    coarse = integrate(max(nodes // 2, 2))
    return NormalizationResult(fine, abs(fine - coarse), nodes)
