"""The transformation psi(x, y) = (u, v) and the laws it carries.

Given two multiplication algorithms ``w`` and ``wt`` (with division
algorithms ``g`` and ``gt``)::

    u = e - w(x) y,        v = gt(u) (e - x)
    x = e - wt(u) v,       y = g(x) (e - u)

For independent beta or beta-Riesz ``X``, ``Y`` with matched parameters the
outputs ``U``, ``V`` are independent; :func:`predicted_uv_params` records
the four laws for each pair of main algorithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    Algebra,
    Element,
    JordanFrame,
    Kind,
    coords_to_sym,
    determinant,
    eigenvalues,
    sym_to_coords,
    batch_eigenvalues,
)
from .dist import BetaParams, BetaRieszParams, _check_riesz_vector, logpdf_coords
from .errors import BoundaryError, ConeDomainError, ParameterError, UnsupportedOperationError
from .mulalg import (
    MultiplicationRule,
    congruence_factors,
    div_operator,
    inverse_congruence_factors,
    mul_operator,
)

# every intermediate element must keep its eigenvalues this far inside D
BOUNDARY_MARGIN = 1e-10

_CASE_RULES = {1: ("quad", "quad"), 2: ("tri", "tri"), 3: ("quad", "tri"), 4: ("tri", "quad")}


@dataclass(frozen=True)
class TransformSpec:
    w_rule: MultiplicationRule
    wt_rule: MultiplicationRule
    algebra: Algebra
    frame: JordanFrame | None = None

    def __post_init__(self):
        for rule in (self.w_rule, self.wt_rule):
            if not rule.supports(self.algebra):
                raise UnsupportedOperationError(f"rule {rule.name} is not available on {self.algebra}")

    @classmethod
    def for_case(cls, case: int, algebra: Algebra) -> "TransformSpec":
        """Rule pair (w, wt) of case 1-4: quad/quad, tri/tri, quad/tri, tri/quad."""
        if case not in _CASE_RULES:
            raise ParameterError(f"case must be 1, 2, 3 or 4, got {case}")
        w, wt = _CASE_RULES[case]
        return cls(MultiplicationRule.parse(w), MultiplicationRule.parse(wt), algebra)

    @property
    def name(self) -> str:
        return f"{self.w_rule.name}/{self.wt_rule.name}"

    def _frame(self):
        return self.frame or JordanFrame.canonical(self.algebra)

    def w(self, x: Element):
        return mul_operator(self.w_rule, x)

    def g(self, x: Element):
        return div_operator(self.w_rule, x)

    def wt(self, u: Element):
        return mul_operator(self.wt_rule, u)

    def gt(self, u: Element):
        return div_operator(self.wt_rule, u)


def _margin(x: Element) -> float:
    lam = eigenvalues(x)
    return float(min(lam[-1], 1.0 - lam[0]))


def _require_domain(name: str, x: Element):
    if _margin(x) <= 0.0:
        raise ConeDomainError(f"{name} is not in the unit domain D")


def _require_margin(name: str, x: Element, margin: float = BOUNDARY_MARGIN):
    m = _margin(x)
    if m <= margin:
        raise BoundaryError(f"{name} lies within {margin:g} of the boundary of D (margin {m:.3g})")


def psi(spec: TransformSpec, x: Element, y: Element) -> tuple[Element, Element]:
    """``(u, v) = (e - w(x)y, gt(u)(e - x))``."""
    _require_domain("x", x)
    _require_domain("y", y)
    e = spec.algebra.identity()
    u = e - spec.w(x)(y)
    _require_margin("u", u)
    v = spec.gt(u)(e - x)
    _require_margin("v", v)
    return u, v


def psi_inv(spec: TransformSpec, u: Element, v: Element) -> tuple[Element, Element]:
    """``(x, y) = (e - wt(u)v, g(x)(e - u))``."""
    _require_domain("u", u)
    _require_domain("v", v)
    e = spec.algebra.identity()
    x = e - spec.wt(u)(v)
    _require_margin("x", x)
    y = spec.g(x)(e - u)
    _require_margin("y", y)
    return x, y


def psi_batch(spec: TransformSpec, xc: np.ndarray, yc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """:func:`psi` applied row-wise to ``(m, dim)`` coordinate arrays."""
    alg = spec.algebra
    xc = np.atleast_2d(xc)
    yc = np.atleast_2d(yc)
    if alg.kind is not Kind.SYM:
        pairs = [psi(spec, Element(alg, a), Element(alg, b)) for a, b in zip(xc, yc)]
        return (np.array([p[0].coords for p in pairs]).reshape(-1, alg.dim),
                np.array([p[1].coords for p in pairs]).reshape(-1, alg.dim))
    r = alg.rank
    eye = np.eye(r)
    xm, ym = coords_to_sym(xc, r), coords_to_sym(yc, r)
    for name, c in (("x", xc), ("y", yc)):
        lam = batch_eigenvalues(alg, c)
        if np.any(np.minimum(lam[:, -1], 1.0 - lam[:, 0]) <= 0):
            raise ConeDomainError(f"some rows of {name} are not in D")
    a = congruence_factors(spec.w_rule, xm, spec.w_rule.frame_for(alg))
    um = eye - a @ ym @ np.swapaxes(a, -1, -2)
    uc = sym_to_coords(um)
    _batch_margin("u", alg, uc)
    b = inverse_congruence_factors(spec.wt_rule, um, spec.wt_rule.frame_for(alg))
    vc = sym_to_coords(b @ (eye - xm) @ np.swapaxes(b, -1, -2))
    _batch_margin("v", alg, vc)
    return uc, vc


def _batch_margin(name, alg, coords):
    lam = batch_eigenvalues(alg, coords)
    m = np.minimum(lam[:, -1], 1.0 - lam[:, 0])
    bad = np.count_nonzero(m <= BOUNDARY_MARGIN)
    if bad:
        raise BoundaryError(f"{bad} rows of {name} lie within {BOUNDARY_MARGIN:g} of the boundary of D")


# -- Jacobians -------------------------------------------------------------------------


def log_jacobian_analytic(spec: TransformSpec, u: Element, v: Element) -> float:
    _require_domain("u", u)
    _require_domain("v", v)
    x = spec.algebra.identity() - spec.wt(u)(v)
    du, dx = determinant(u), determinant(x)
    if dx <= 0:
        raise BoundaryError("e - wt(u)v left the cone")
    return spec.algebra.n_over_r * (math.log(du) - math.log(dx))


def jacobian_analytic(spec: TransformSpec, u: Element, v: Element) -> float:
    """``|det D psi^{-1}(u, v)| = (det u / det(e - wt(u)v))^{dim/r}``."""
    return math.exp(log_jacobian_analytic(spec, u, v))


def _psi_inv_flat(spec: TransformSpec, z: np.ndarray) -> np.ndarray:
    n = spec.algebra.dim
    alg = spec.algebra
    e = alg.identity()
    u, v = Element(alg, z[:n]), Element(alg, z[n:])
    x = e - spec.wt(u)(v)
    y = spec.g(x)(e - u)
    return np.concatenate([x.coords, y.coords])


def jacobian_numeric(spec: TransformSpec, u: Element, v: Element, h: float = 1e-5) -> float:
    """|det| of the central-difference Jacobian of ``psi_inv`` at ``(u, v)``.

    The step is ``h * max(1, |(u, v)|)``.
    """
    z0 = np.concatenate([u.coords, v.coords])
    step = h * max(1.0, float(np.linalg.norm(z0)))
    for name, el in (("u", u), ("v", v)):
        if _margin(el) <= 2.0 * step:
            raise BoundaryError(f"{name} is within the finite-difference step {step:g} of the boundary")
    m = z0.size
    jac = np.empty((m, m))
    for k in range(m):
        dz = np.zeros(m)
        dz[k] = step
        jac[:, k] = (_psi_inv_flat(spec, z0 + dz) - _psi_inv_flat(spec, z0 - dz)) / (2.0 * step)
    return float(abs(np.linalg.det(jac)))


# -- densities of (U, V) -------------------------------------------------------------------


def joint_uv_logpdf(spec: TransformSpec, logf_x: Callable[[Element], float],
                    logf_y: Callable[[Element], float], u: Element, v: Element) -> float:
    """Log-density of ``(U, V) = psi(X, Y)`` for independent ``X``, ``Y``.

    ``f_X(x) f_Y(g(x)(e-u)) (det u / det x)^{dim/r}`` with ``x = e - wt(u)v``;
    ``-inf`` whenever an argument leaves D.
    """
    if _margin(u) <= 0 or _margin(v) <= 0:
        return -math.inf
    e = spec.algebra.identity()
    x = e - spec.wt(u)(v)
    if _margin(x) <= 0:
        return -math.inf
    y = spec.g(x)(e - u)
    if _margin(y) <= 0:
        return -math.inf
    nr = spec.algebra.n_over_r
    return float(logf_x(x) + logf_y(y) + nr * (math.log(determinant(u)) - math.log(determinant(x))))


def law_logpdf(params) -> Callable[[Element], float]:
    """Element-level log-density of a beta or beta-Riesz law."""
    return lambda x: float(logpdf_coords(params, x.coords[None])[0])


# -- predicted laws ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PredictedLaws:
    case: int
    law_x: object
    law_y: object
    law_u: object
    law_v: object

    def as_dict(self) -> dict:
        return {
            "case": self.case,
            "X": self.law_x.as_dict(),
            "Y": self.law_y.as_dict(),
            "U": self.law_u.as_dict(),
            "V": self.law_v.as_dict(),
        }


def _scalar(name, value) -> float:
    if value is None:
        raise ParameterError(f"missing parameter {name}")
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.size != 1:
        raise ParameterError(f"{name} must be a scalar")
    return float(arr[0])


def _vector(name, value, algebra: Algebra) -> np.ndarray:
    if value is None:
        raise ParameterError(f"missing parameter {name}")
    arr = np.asarray(value, dtype=float).reshape(-1)
    return np.array(_check_riesz_vector(arr, algebra, name))


def predicted_uv_params(case: int, algebra: Algebra, *, p=None, p1=None, p2=None, p3=None,
                        s1=None, s2=None, s3=None) -> PredictedLaws:
    """Laws of X, Y, U, V for the rule pairs of cases 1-4.

    Case 1 takes ``p = (p1, p2, p3)`` (or the three scalars), case 2 the
    vectors ``s1, s2, s3``, case 3 ``p1, p3, s2`` and case 4 ``p1, p2, s3``.
    """
    one = np.ones(algebra.rank)

    def br(s, t):
        return BetaRieszParams(s, t, algebra)

    if case == 1:
        if p is not None:
            vals = np.asarray(p, dtype=float).reshape(-1)
            if vals.size != 3:
                raise ParameterError("case 1 needs p = (p1, p2, p3)")
            p1, p2, p3 = vals
        p1, p2, p3 = (_scalar(n, v) for n, v in (("p1", p1), ("p2", p2), ("p3", p3)))
        return PredictedLaws(1, BetaParams(p1 + p3, p2, algebra), BetaParams(p3, p1, algebra),
                             BetaParams(p1 + p2, p3, algebra), BetaParams(p2, p1, algebra))
    if case == 2:
        s1, s2, s3 = (_vector(n, v, algebra) for n, v in (("s1", s1), ("s2", s2), ("s3", s3)))
        return PredictedLaws(2, br(s1 + s3, s2), br(s3, s1), br(s1 + s2, s3), br(s2, s1))
    if case == 3:
        p1, p3 = _scalar("p1", p1), _scalar("p3", p3)
        s2 = _vector("s2", s2, algebra)
        return PredictedLaws(3, br((p1 + p3) * one, s2), BetaParams(p3, p1, algebra),
                             br(p1 * one + s2, p3 * one), br(s2, p1 * one))
    if case == 4:
        p1, p2 = _scalar("p1", p1), _scalar("p2", p2)
        s3 = _vector("s3", s3, algebra)
        return PredictedLaws(4, br(p1 * one + s3, p2 * one), br(s3, p1 * one),
                             br((p1 + p2) * one, s3), BetaParams(p2, p1, algebra))
    raise ParameterError(f"case must be 1, 2, 3 or 4, got {case}")


def factorization_residuals(spec: TransformSpec, laws: PredictedLaws, us, vs) -> np.ndarray:
    """``log f_(U,V)(u, v) - log f_U(u) - log f_V(v)`` over all pairs ``(u, v)``."""
    fx, fy = law_logpdf(laws.law_x), law_logpdf(laws.law_y)
    fu, fv = law_logpdf(laws.law_u), law_logpdf(laws.law_v)
    out = np.empty((len(us), len(vs)))
    for i, u in enumerate(us):
        lu = fu(u)
        for j, v in enumerate(vs):
            out[i, j] = joint_uv_logpdf(spec, fx, fy, u, v) - lu - fv(v)
    return out
