"""Euclidean Jordan algebras of the real symmetric cone and the Lorentz cone.

Elements are stored in canonical coordinates that are orthonormal for the
algebra's inner product:

* ``sym`` (r x r real symmetric matrices): upper triangle in row-major order,
  ``(1,1), (1,2), ..., (1,r), (2,2), ..., (r,r)``, with off-diagonal entries
  multiplied by ``sqrt(2)`` so that ``Trace(x . y)`` is the dot product of
  the coordinate vectors.
* ``lorentz`` (R^{n+1}): the plain vector ``(x_0, ..., x_n)``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConeDomainError,
    DimensionError,
    SingularityError,
    UnsupportedOperationError,
)

SQRT2 = math.sqrt(2.0)
DEFAULT_TOL = 1e-9


class Kind(enum.Enum):
    SYM = "sym"
    LORENTZ = "lorentz"


@dataclass(frozen=True)
class Algebra:
    """Descriptor of a simple Euclidean Jordan algebra.

    Use :meth:`sym` or :meth:`lorentz` rather than the raw constructor.
    """

    kind: Kind
    rank: int
    dim: int
    d: int

    def __post_init__(self):
        if self.rank < 1 or self.dim < 1 or self.d < 0:
            raise DimensionError(f"invalid algebra descriptor {self!r}")
        if self.dim != self.rank + self.d * self.rank * (self.rank - 1) // 2:
            raise DimensionError("dim must equal r + d r(r-1)/2")
        if self.kind is Kind.LORENTZ and (self.rank != 2 or self.dim < 3):
            raise DimensionError("the Lorentz algebra has rank 2 and dimension >= 3")

    @classmethod
    def sym(cls, rank: int) -> "Algebra":
        if int(rank) != rank or rank < 1:
            raise DimensionError(f"rank must be a positive integer, got {rank!r}")
        rank = int(rank)
        return cls(Kind.SYM, rank, rank * (rank + 1) // 2, 1)

    @classmethod
    def lorentz(cls, dim: int) -> "Algebra":
        """Lorentz algebra on R^dim (``dim = n + 1 >= 3``)."""
        if int(dim) != dim or dim < 3:
            raise DimensionError(f"Lorentz dimension must be an integer >= 3, got {dim!r}")
        dim = int(dim)
        return cls(Kind.LORENTZ, 2, dim, dim - 2)

    @property
    def n_over_r(self) -> float:
        """``dim V / r``, the exponent appearing throughout the density formulas."""
        return self.dim / self.rank

    @property
    def trace_form_scale(self) -> float:
        """Factor c with ``tr(xy) = c * <x, y>`` in canonical coordinates."""
        return 1.0 if self.kind is Kind.SYM else 2.0

    def __str__(self):
        if self.kind is Kind.SYM:
            return f"sym(r={self.rank})"
        return f"lorentz(dim={self.dim})"

    def element(self, coords) -> "Element":
        return Element(self, coords)

    def identity(self) -> "Element":
        if self.kind is Kind.SYM:
            return self.from_matrix(np.eye(self.rank))
        c = np.zeros(self.dim)
        c[0] = 1.0
        return Element(self, c)

    def zero(self) -> "Element":
        return Element(self, np.zeros(self.dim))

    def from_matrix(self, m) -> "Element":
        if self.kind is not Kind.SYM:
            raise UnsupportedOperationError("matrix form exists only for sym algebras")
        m = np.asarray(m, dtype=float)
        if m.shape != (self.rank, self.rank):
            raise DimensionError(f"expected a {self.rank}x{self.rank} matrix, got {m.shape}")
        return Element(self, sym_to_coords(0.5 * (m + m.T)))

    def basis(self) -> list["Element"]:
        eye = np.eye(self.dim)
        return [Element(self, eye[k]) for k in range(self.dim)]

    def canonical_frame(self) -> "JordanFrame":
        return JordanFrame.canonical(self)

    def coord_names(self) -> list[str]:
        if self.kind is Kind.SYM:
            iu, ju = np.triu_indices(self.rank)
            return [f"x{i + 1}{j + 1}" for i, j in zip(iu, ju)]
        return [f"x{i}" for i in range(self.dim)]


# -- symmetric-matrix coordinate maps (vectorised over leading axes) ---------


@functools.lru_cache(maxsize=None)
def _triu(r: int):
    iu, ju = np.triu_indices(r)
    scale = np.where(iu == ju, 1.0, SQRT2)
    return iu, ju, scale


def sym_to_coords(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    iu, ju, scale = _triu(m.shape[-1])
    return m[..., iu, ju] * scale


def coords_to_sym(c: np.ndarray, r: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    iu, ju, scale = _triu(r)
    m = np.zeros(c.shape[:-1] + (r, r))
    vals = c / scale
    m[..., iu, ju] = vals
    m[..., ju, iu] = vals
    return m


@dataclass(frozen=True, eq=False)
class Element:
    """A point of the ambient Jordan algebra, in canonical coordinates."""

    algebra: Algebra
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape != (self.algebra.dim,):
            raise DimensionError(
                f"{self.algebra} needs {self.algebra.dim} coordinates, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __repr__(self):
        return f"Element({self.algebra}, {np.array2string(self.coords, precision=6)})"

    @property
    def matrix(self) -> np.ndarray:
        if self.algebra.kind is not Kind.SYM:
            raise UnsupportedOperationError("matrix form exists only for sym algebras")
        return coords_to_sym(self.coords, self.algebra.rank)

    def _check(self, other: "Element"):
        if not isinstance(other, Element):
            return NotImplemented
        if other.algebra != self.algebra:
            raise DimensionError(f"algebra mismatch: {self.algebra} vs {other.algebra}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.coords + other.coords)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.coords - other.coords)

    def __neg__(self):
        return Element(self.algebra, -self.coords)

    def __mul__(self, scalar):
        if isinstance(scalar, Element):
            return NotImplemented
        return Element(self.algebra, self.coords * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Element(self.algebra, self.coords / float(scalar))

    def inner(self, other: "Element") -> float:
        self._check(other)
        return float(self.coords @ other.coords)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def allclose(self, other: "Element", rtol=1e-10, atol=1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coords, other.coords, rtol=rtol, atol=atol))


def _same(x: Element, y: Element):
    if x.algebra != y.algebra:
        raise DimensionError(f"algebra mismatch: {x.algebra} vs {y.algebra}")


# -- products and operators ----------------------------------------------------


def jordan_product(x: Element, y: Element) -> Element:
    _same(x, y)
    alg = x.algebra
    if alg.kind is Kind.SYM:
        a, b = x.matrix, y.matrix
        return alg.from_matrix(0.5 * (a @ b + b @ a))
    xc, yc = x.coords, y.coords
    out = np.empty(alg.dim)
    out[0] = xc @ yc
    out[1:] = xc[0] * yc[1:] + yc[0] * xc[1:]
    return Element(alg, out)


def square(x: Element) -> Element:
    return jordan_product(x, x)


@functools.lru_cache(maxsize=None)
def _sym_basis(r: int) -> np.ndarray:
    b = coords_to_sym(np.eye(r * (r + 1) // 2), r)
    b.setflags(write=False)
    return b


def lmap_matrix(x: Element) -> np.ndarray:
    """Matrix of ``L(x): y -> xy`` in the canonical orthonormal basis."""
    alg = x.algebra
    if alg.kind is Kind.SYM:
        a = x.matrix
        b = _sym_basis(alg.rank)
        return sym_to_coords(0.5 * (a @ b + b @ a)).T
    c = x.coords
    m = c[0] * np.eye(alg.dim)
    m[0, 1:] = c[1:]
    m[1:, 0] = c[1:]
    return m


def quad_rep_matrix(x: Element) -> np.ndarray:
    """Matrix of the quadratic representation ``P(x) = 2 L(x)^2 - L(x^2)``."""
    lx = lmap_matrix(x)
    return 2.0 * lx @ lx - lmap_matrix(square(x))


def quad_rep_apply(x: Element, y: Element) -> Element:
    _same(x, y)
    return 2.0 * jordan_product(x, jordan_product(x, y)) - jordan_product(square(x), y)


class Operator:
    """A linear endomorphism of the ambient space.

    Operators built from a multiplication algorithm on a sym algebra carry a
    congruence factor ``A`` (the operator is ``y -> A y A^T``); the ambient
    matrix is then derived lazily and is used only for ``Det`` and generic
    composition.
    """

    __slots__ = ("algebra", "_matrix", "congruence")

    def __init__(self, algebra: Algebra, matrix=None, congruence=None):
        if matrix is None and congruence is None:
            raise ValueError("need an ambient matrix or a congruence factor")
        self.algebra = algebra
        self.congruence = None if congruence is None else np.asarray(congruence, dtype=float)
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        if self._matrix is not None and self._matrix.shape != (algebra.dim, algebra.dim):
            raise DimensionError(f"operator matrix must be {algebra.dim}x{algebra.dim}")

    @classmethod
    def identity(cls, algebra: Algebra) -> "Operator":
        if algebra.kind is Kind.SYM:
            return cls(algebra, congruence=np.eye(algebra.rank))
        return cls(algebra, matrix=np.eye(algebra.dim))

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            r = self.algebra.rank
            a = self.congruence
            basis = _sym_basis(r)
            self._matrix = sym_to_coords(a @ basis @ a.T).T
        return self._matrix

    def __call__(self, x: Element) -> Element:
        if x.algebra != self.algebra:
            raise DimensionError(f"algebra mismatch: {x.algebra} vs {self.algebra}")
        if self.congruence is not None:
            a = self.congruence
            return Element(self.algebra, sym_to_coords(a @ x.matrix @ a.T))
        return Element(self.algebra, self.matrix @ x.coords)

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.algebra != self.algebra:
            raise DimensionError("cannot compose operators on different algebras")
        if self.congruence is not None and other.congruence is not None:
            return Operator(self.algebra, congruence=self.congruence @ other.congruence)
        return Operator(self.algebra, matrix=self.matrix @ other.matrix)

    def inverse(self) -> "Operator":
        if self.congruence is not None:
            return Operator(self.algebra, congruence=np.linalg.inv(self.congruence))
        return Operator(self.algebra, matrix=np.linalg.inv(self.matrix))

    def det(self) -> float:
        return operator_det(self)


def operator_det(g) -> float:
    """Determinant of an endomorphism of the ambient space."""
    m = g.matrix if isinstance(g, Operator) else np.asarray(g, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"operator matrix must be square, got {m.shape}")
    return float(np.linalg.det(m))


# -- spectral calculus ---------------------------------------------------------


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    idempotents: tuple

    def reconstruct(self) -> Element:
        alg = self.idempotents[0].algebra
        out = alg.zero()
        for lam, c in zip(self.eigenvalues, self.idempotents):
            out = out + lam * c
        return out


def _lorentz_split(x: Element):
    xbar = x.coords[1:]
    nrm = float(np.linalg.norm(xbar))
    if nrm == 0.0:
        u = np.zeros(x.algebra.dim - 1)
        u[0] = 1.0
    else:
        u = xbar / nrm
    return x.coords[0], nrm, u


def eigenvalues(x: Element) -> np.ndarray:
    """Eigenvalues in descending order."""
    if x.algebra.kind is Kind.SYM:
        return np.linalg.eigvalsh(x.matrix)[::-1]
    x0, nrm, _ = _lorentz_split(x)
    return np.array([x0 + nrm, x0 - nrm])


def spectral_decomposition(x: Element) -> SpectralDecomposition:
    alg = x.algebra
    if alg.kind is Kind.SYM:
        lam, vecs = np.linalg.eigh(x.matrix)
        lam, vecs = lam[::-1], vecs[:, ::-1]
        cs = tuple(alg.from_matrix(np.outer(v, v)) for v in vecs.T)
        return SpectralDecomposition(lam, cs)
    x0, nrm, u = _lorentz_split(x)
    c1 = Element(alg, 0.5 * np.concatenate([[1.0], u]))
    c2 = Element(alg, 0.5 * np.concatenate([[1.0], -u]))
    return SpectralDecomposition(np.array([x0 + nrm, x0 - nrm]), (c1, c2))


def _spectral_map(x: Element, fn) -> Element:
    if x.algebra.kind is Kind.SYM:
        lam, vecs = np.linalg.eigh(x.matrix)
        return x.algebra.from_matrix((vecs * fn(lam)) @ vecs.T)
    sd = spectral_decomposition(x)
    return _recombine(fn(sd.eigenvalues), sd.idempotents)


def _recombine(values, idempotents) -> Element:
    out = idempotents[0].algebra.zero()
    for lam, c in zip(values, idempotents):
        out = out + float(lam) * c
    return out


def determinant(x: Element) -> float:
    if x.algebra.kind is Kind.SYM:
        return float(np.linalg.det(x.matrix))
    c = x.coords
    return float(c[0] ** 2 - c[1:] @ c[1:])


def trace(x: Element) -> float:
    if x.algebra.kind is Kind.SYM:
        return float(np.trace(x.matrix))
    return float(2.0 * x.coords[0])


def inverse(x: Element, tol: float = 1e-14) -> Element:
    lam = eigenvalues(x)
    m = float(np.min(np.abs(lam)))
    if m <= tol * max(1.0, float(np.max(np.abs(lam)))):
        raise SingularityError(f"element is singular (min |eigenvalue| = {m:.3g})", m)
    if x.algebra.kind is Kind.SYM:
        return x.algebra.from_matrix(np.linalg.inv(x.matrix))
    c = x.coords
    return Element(x.algebra, np.concatenate([[c[0]], -c[1:]]) / determinant(x))


def power(x: Element, alpha: float, tol: float = DEFAULT_TOL) -> Element:
    """``x^alpha`` for ``x`` in the open cone, through the spectral decomposition."""
    lam = eigenvalues(x)
    if lam[-1] <= tol:
        raise ConeDomainError(f"power needs a cone element (min eigenvalue {lam[-1]:.3g})")
    if alpha == 0:
        return x.algebra.identity()
    if alpha == 1:
        return x
    return _spectral_map(x, lambda v: v ** alpha)


def sqrt_psd(x: Element, tol: float = DEFAULT_TOL) -> Element:
    return power(x, 0.5, tol)


def in_cone(x: Element, tol: float = DEFAULT_TOL) -> bool:
    return bool(eigenvalues(x)[-1] > tol)


def in_unit_domain(x: Element, tol: float = DEFAULT_TOL) -> bool:
    return in_cone(x, tol) and in_cone(x.algebra.identity() - x, tol)


# -- Jordan frames, minors and generalized powers ------------------------------


@dataclass(frozen=True, eq=False)
class JordanFrame:
    """A Jordan frame ``c_1, ..., c_r``.

    For sym algebras the frame is ``c_k = q_k q_k^T`` for the columns of an
    orthogonal matrix ``basis``; the canonical frame (``basis = I``) gives
    the diagonal unit matrices.  For the Lorentz algebra ``basis`` is a unit
    spatial vector ``u`` and ``c_{1,2} = (1, +-u)/2``.
    """

    algebra: Algebra
    basis: np.ndarray = field(repr=False)

    @classmethod
    def canonical(cls, algebra: Algebra) -> "JordanFrame":
        if algebra.kind is Kind.SYM:
            return cls(algebra, np.eye(algebra.rank))
        u = np.zeros(algebra.dim - 1)
        u[0] = 1.0
        return cls(algebra, u)

    @property
    def is_canonical(self) -> bool:
        return bool(np.array_equal(self.basis, JordanFrame.canonical(self.algebra).basis))

    @property
    def idempotents(self) -> tuple:
        alg = self.algebra
        if alg.kind is Kind.SYM:
            return tuple(alg.from_matrix(np.outer(q, q)) for q in self.basis.T)
        u = self.basis
        return (
            Element(alg, 0.5 * np.concatenate([[1.0], u])),
            Element(alg, 0.5 * np.concatenate([[1.0], -u])),
        )

    def rotate(self, x: Element) -> np.ndarray:
        """Matrix of ``x`` expressed in the frame basis (``Q^T x Q``)."""
        q = self.basis
        return q.T @ x.matrix @ q


def _frame(x: Element, frame: JordanFrame | None) -> JordanFrame:
    if frame is None:
        return JordanFrame.canonical(x.algebra)
    if frame.algebra != x.algebra:
        raise DimensionError("frame belongs to a different algebra")
    return frame


def principal_minors(x: Element, frame: JordanFrame | None = None) -> np.ndarray:
    """``(Delta_1(x), ..., Delta_r(x))`` with respect to ``frame``."""
    frame = _frame(x, frame)
    if x.algebra.kind is Kind.SYM:
        m = frame.rotate(x)
        return np.array([np.linalg.det(m[:k, :k]) for k in range(1, x.algebra.rank + 1)])
    c = x.coords
    return np.array([c[0] + frame.basis @ c[1:], determinant(x)])


def log_principal_minors(x: Element, frame: JordanFrame | None = None) -> np.ndarray:
    minors = principal_minors(x, frame)
    if np.any(minors <= 0):
        k = int(np.argmax(minors <= 0))
        raise ConeDomainError(f"principal minor {k + 1} is not positive ({minors[k]:.3g})")
    return np.log(minors)


def _minor_exponents(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return s - np.append(s[1:], 0.0)


def log_generalized_power(x: Element, s: Sequence[float], frame: JordanFrame | None = None) -> float:
    s = np.asarray(s, dtype=float)
    if s.shape != (x.algebra.rank,):
        raise DimensionError(f"s must have length {x.algebra.rank}")
    return float(_minor_exponents(s) @ log_principal_minors(x, frame))


def generalized_power(x: Element, s: Sequence[float], frame: JordanFrame | None = None) -> float:
    """``Delta_s(x) = Delta_1^{s_1-s_2} ... Delta_r^{s_r}``, evaluated in log space."""
    return math.exp(log_generalized_power(x, s, frame))


def frobenius_apply(i: int, z_coeffs: Sequence[float], x: Element,
                    frame: JordanFrame | None = None) -> Element:
    """Apply the Frobenius transformation ``tau_{c_i}(z)`` to ``x``.

    ``i`` is one-based (``1 <= i < r``) and ``z_coeffs`` holds the ``r - i``
    entries placed below the i-th diagonal one of the Frobenius matrix
    ``F``; the result is ``F x F^T`` (in the frame basis).
    """
    alg = x.algebra
    if alg.kind is not Kind.SYM:
        raise UnsupportedOperationError("Frobenius transformations are implemented for sym only")
    frame = _frame(x, frame)
    r = alg.rank
    if not 1 <= i < r:
        raise DimensionError(f"frame index must satisfy 1 <= i < {r}")
    z = np.asarray(z_coeffs, dtype=float)
    if z.shape != (r - i,):
        raise DimensionError(f"expected {r - i} Frobenius coefficients")
    f = frobenius_matrix(r, i, z)
    q = frame.basis
    g = q @ f @ q.T
    return alg.from_matrix(g @ x.matrix @ g.T)


def frobenius_matrix(r: int, i: int, z) -> np.ndarray:
    """``F_i(z) = I + sum_{j>i} z_j mu_ji`` with one-based ``i``."""
    f = np.eye(r)
    f[i:, i - 1] = z
    return f


# -- random elements -------------------------------------------------------------


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def element_from_spectrum(algebra: Algebra, lam, rng: np.random.Generator) -> Element:
    """Element with prescribed eigenvalues and a random (Haar) frame."""
    lam = np.asarray(lam, dtype=float)
    if algebra.kind is Kind.SYM:
        q = random_orthogonal(algebra.rank, rng)
        return algebra.from_matrix((q * lam) @ q.T)
    u = rng.standard_normal(algebra.dim - 1)
    u /= np.linalg.norm(u)
    return Element(algebra, np.concatenate([[0.5 * (lam[0] + lam[1])], 0.5 * (lam[0] - lam[1]) * u]))


def random_element(algebra: Algebra, rng: np.random.Generator) -> Element:
    return Element(algebra, rng.standard_normal(algebra.dim))


def random_cone_element(algebra: Algebra, rng: np.random.Generator,
                        low: float = 0.1, high: float = 10.0) -> Element:
    """Cone element with eigenvalues log-uniform on ``[low, high]``."""
    lam = np.exp(rng.uniform(math.log(low), math.log(high), algebra.rank))
    return element_from_spectrum(algebra, lam, rng)


def random_domain_element(algebra: Algebra, rng: np.random.Generator,
                          low: float = 0.05, high: float = 0.95) -> Element:
    """Element of the unit domain ``D`` with eigenvalues uniform on ``[low, high]``."""
    return element_from_spectrum(algebra, rng.uniform(low, high, algebra.rank), rng)


# -- property suite ---------------------------------------------------------------


@dataclass
class AlgebraReport:
    algebra: str
    n_samples: int
    seed: int
    residuals: dict
    tolerances: dict

    @property
    def passed(self) -> bool:
        return all(self.residuals[k] <= self.tolerances[k] for k in self.residuals)

    def as_dict(self) -> dict:
        return {
            "algebra": self.algebra,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "residuals": dict(self.residuals),
            "tolerances": dict(self.tolerances),
            "passed": self.passed,
        }


def check_algebra(algebra: Algebra, n_samples: int = 1000, seed: int = 0) -> AlgebraReport:
    """Randomised check of the Jordan algebra axioms and derived identities.

    Multilinear residuals are divided by the product of the factor norms so
    that every entry is a relative error.
    """
    rng = np.random.default_rng(seed)
    e = algebra.identity()
    res = dict.fromkeys(
        ["commutativity", "neutral", "jordan_identity", "associative_inner",
         "quad_rep_formula", "quad_rep_inverse", "spectral_reconstruction",
         "det_power_identity", "det_operator"], 0.0)

    def upd(key, value):
        res[key] = max(res[key], float(value))

    for _ in range(n_samples):
        x, y, z = (random_element(algebra, rng) for _ in range(3))
        nx, ny, nz = x.norm(), y.norm(), z.norm()
        xy = jordan_product(x, y)
        upd("commutativity", (xy - jordan_product(y, x)).norm() / (nx * ny))
        upd("neutral", (jordan_product(x, e) - x).norm() / nx)
        x2 = square(x)
        lhs = jordan_product(x, jordan_product(x2, y))
        rhs = jordan_product(x2, xy)
        upd("jordan_identity", (lhs - rhs).norm() / (nx ** 3 * ny))
        upd("associative_inner",
            abs(x.inner(jordan_product(y, z)) - xy.inner(z)) / (nx * ny * nz))
        lx = lmap_matrix(x)
        pform = 2.0 * lx @ lx - lmap_matrix(x2)
        if algebra.kind is Kind.SYM:
            # independent route: P(x)y = x . y . x
            xm = x.matrix
            direct = sym_to_coords(xm @ _sym_basis(algebra.rank) @ xm).T
        else:
            direct = np.column_stack([quad_rep_apply(x, b).coords for b in algebra.basis()])
        upd("quad_rep_formula", np.max(np.abs(pform - direct)) / nx ** 2)
        sd = spectral_decomposition(x)
        upd("spectral_reconstruction", (sd.reconstruct() - x).norm() / nx)

        c = random_cone_element(algebra, rng, 0.2, 5.0)
        pc = quad_rep_matrix(c)
        pci = quad_rep_matrix(inverse(c))
        upd("quad_rep_inverse", np.max(np.abs(np.linalg.inv(pc) - pci)) / np.max(np.abs(pci)))
        p = rng.uniform(-2.0, 2.0)
        dc = determinant(c)
        upd("det_power_identity",
            abs(generalized_power(c, np.full(algebra.rank, p)) - dc ** p) / dc ** p)
        g = quad_rep_matrix(sqrt_psd(c))
        w = random_cone_element(algebra, rng, 0.2, 5.0)
        gw = Element(algebra, g @ w.coords)
        target = abs(operator_det(g)) ** (algebra.rank / algebra.dim) * determinant(w)
        upd("det_operator", abs(determinant(gw) - target) / abs(target))

    tol = {k: 1e-10 for k in res}
    tol["quad_rep_inverse"] = 1e-8
    tol["det_operator"] = 1e-8
    return AlgebraReport(str(algebra), n_samples, seed, res, tol)


# -- batched helpers on (m, dim) coordinate arrays --------------------------------


def batch_eigenvalues(algebra: Algebra, coords: np.ndarray) -> np.ndarray:
    """Eigenvalues (descending) of each row of ``coords``."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if algebra.kind is Kind.SYM:
        return np.linalg.eigvalsh(coords_to_sym(coords, algebra.rank))[:, ::-1]
    nrm = np.linalg.norm(coords[:, 1:], axis=1)
    return np.column_stack([coords[:, 0] + nrm, coords[:, 0] - nrm])


def unit_domain_mask(algebra: Algebra, coords: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Boolean mask of rows lying in ``D = {x : x > 0, e - x > 0}``."""
    lam = batch_eigenvalues(algebra, coords)
    return (lam[:, -1] > tol) & (1.0 - lam[:, 0] > tol)


def batch_log_minors(algebra: Algebra, coords: np.ndarray,
                     frame: JordanFrame | None = None) -> np.ndarray:
    """``log Delta_k`` for each row; rows must lie in the open cone."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    frame = frame or JordanFrame.canonical(algebra)
    if algebra.kind is Kind.SYM:
        m = coords_to_sym(coords, algebra.rank)
        if not frame.is_canonical:
            q = frame.basis
            m = q.T @ m @ q
        chol = np.linalg.cholesky(m)
        return 2.0 * np.cumsum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    d1 = coords[:, 0] + coords[:, 1:] @ frame.basis
    d2 = coords[:, 0] ** 2 - np.sum(coords[:, 1:] ** 2, axis=1)
    return np.log(np.column_stack([d1, d2]))
