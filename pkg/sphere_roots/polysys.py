"""Random homogeneous Gaussian polynomial systems on the unit sphere.

Each polynomial is stored as a dense vector of *scaled* coefficients over
the colex enumeration of its degree-p exponent tuples, so that

    F(x) = sum_k coeffs[k] * x**k.

Sampling follows the Kostlan ensemble: the scaled coefficient of x**k is
sqrt(p! / (k_1! ... k_d!)) times an independent standard normal.

Derivatives never use numerical differentiation. The basis for degree p
knows, for every exponent tuple k' of degree p-1 and every variable j, the
position of k' + e_j; differentiating a coefficient vector is then a gather
followed by a multiply, and evaluating all monomials of degree p reuses the
degree p-1 values (one multiply per monomial).
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from sphere_roots.params import RNG_ALGORITHM, SCHEMA_VERSION

MAX_COEFFICIENTS = 50_000_000
_INT64_MAX = int(np.iinfo(np.int64).max)


@dataclass(frozen=True)
class MultiIndex:
    """Exponent tuple (k_1, ..., k_d) of a monomial."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if len(self.exponents) < 1:
            raise ValueError("multi-index needs at least one variable")
        if any(k < 0 for k in self.exponents):
            raise ValueError(f"negative exponent in {self.exponents}")

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def d(self) -> int:
        return len(self.exponents)

    def multinomial(self) -> int:
        out = math.factorial(self.degree)
        for k in self.exponents:
            out //= math.factorial(k)
        return out


class MonomialBasis:
    """Colex enumeration of the degree-p monomials in d variables."""

    def __init__(self, d: int, degree: int):
        self.d = d
        self.degree = degree
        tuples = []
        for combo in itertools.combinations_with_replacement(range(d), degree):
            k = [0] * d
            for j in combo:
                k[j] += 1
            tuples.append(tuple(k))
        tuples.sort(key=lambda k: k[::-1])
        self.index: dict[tuple[int, ...], int] = {k: i for i, k in enumerate(tuples)}
        self.exponents = np.array(tuples, dtype=np.int64).reshape(len(tuples), d)
        self.exponents.flags.writeable = False

    def __len__(self) -> int:
        return len(self.index)

    @cached_property
    def weights(self) -> np.ndarray:
        """sqrt of the multinomial coefficient of every monomial."""
        w = np.array(
            [math.sqrt(MultiIndex(k).multinomial()) for k in self.index],
            dtype=np.float64,
        )
        w.flags.writeable = False
        return w

    @cached_property
    def parents(self) -> tuple[np.ndarray, np.ndarray]:
        """(parent index in degree p-1, variable) so that x**k = x_j * x**parent."""
        if self.degree == 0:
            raise ValueError("degree-0 basis has no parents")
        lower = monomial_basis(self.d, self.degree - 1)
        parent = np.empty(len(self), dtype=np.int64)
        var = np.empty(len(self), dtype=np.int64)
        for i, k in enumerate(self.index):
            j = next(t for t, e in enumerate(k) if e > 0)
            reduced = list(k)
            reduced[j] -= 1
            parent[i] = lower.index[tuple(reduced)]
            var[i] = j
        return parent, var

    @cached_property
    def raise_map(self) -> tuple[np.ndarray, np.ndarray]:
        """(index, factor), both d x m_{p-1}: position of k' + e_j and k'_j + 1."""
        if self.degree == 0:
            raise ValueError("degree-0 basis cannot be differentiated")
        lower = monomial_basis(self.d, self.degree - 1)
        idx = np.empty((self.d, len(lower)), dtype=np.int64)
        fac = np.empty((self.d, len(lower)), dtype=np.float64)
        for col, k in enumerate(lower.index):
            for j in range(self.d):
                raised = list(k)
                raised[j] += 1
                idx[j, col] = self.index[tuple(raised)]
                fac[j, col] = k[j] + 1
        return idx, fac

    @cached_property
    def second_map(self) -> tuple[np.ndarray, np.ndarray]:
        """(index, factor), both d x d x m_{p-2}, for second partials."""
        if self.degree < 2:
            raise ValueError("second partials need degree >= 2")
        idx_p, fac_p = self.raise_map
        idx_q, fac_q = monomial_basis(self.d, self.degree - 1).raise_map
        idx = idx_p[:, idx_q]
        fac = fac_p[:, idx_q] * fac_q[np.newaxis, :, :]
        return idx, fac


@lru_cache(maxsize=None)
def monomial_basis(d: int, degree: int) -> MonomialBasis:
    if d < 1 or degree < 0:
        raise ValueError(f"invalid basis request d={d}, degree={degree}")
    return MonomialBasis(d, degree)


def monomial_values(d: int, degree: int, x: np.ndarray) -> list[np.ndarray]:
    """Values of every monomial of degree 0..degree at x.

    x has shape (d,) or (d, npts); entry q of the result has shape
    (m_q,) or (m_q, npts).
    """
    values = [np.ones((1,) + x.shape[1:], dtype=np.float64)]
    for q in range(1, degree + 1):
        parent, var = monomial_basis(d, q).parents
        values.append(x[var] * values[q - 1][parent])
    return values


def total_coefficients(d: int, degrees: Sequence[int]) -> int:
    """N = sum_i C(d + p_i - 1, p_i), rejected beyond platform limits."""
    total = sum(math.comb(d + p - 1, p) for p in degrees)
    if total > _INT64_MAX:
        raise ValueError(f"coefficient count {total} overflows 64-bit integers")
    return total


@dataclass(frozen=True, eq=False)
class HomogeneousPoly:
    """A single homogeneous polynomial with scaled coefficients in colex order."""

    d: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.degree < 2:
            raise ValueError(f"degree must be >= 2, got {self.degree}")
        coeffs = np.array(self.coeffs, dtype=np.float64)
        expected = math.comb(self.d + self.degree - 1, self.degree)
        if coeffs.shape != (expected,):
            raise ValueError(
                f"degree-{self.degree} polynomial in {self.d} variables needs "
                f"{expected} coefficients, got shape {coeffs.shape}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_terms(cls, d: int, terms: Mapping[Sequence[int], float]) -> HomogeneousPoly:
        """Sparse constructor from {exponent tuple: scaled coefficient}."""
        if not terms:
            raise ValueError("at least one term is needed to fix the degree")
        degrees = {sum(k) for k in terms}
        if len(degrees) != 1:
            raise ValueError(f"terms mix degrees {sorted(degrees)}")
        degree = degrees.pop()
        if degree < 2:
            raise ValueError(f"degree must be >= 2, got {degree}")
        basis = monomial_basis(d, degree)
        coeffs = np.zeros(len(basis))
        for k, c in terms.items():
            k = tuple(int(e) for e in k)
            if len(k) != d:
                raise ValueError(f"exponent tuple {k} does not have {d} entries")
            coeffs[basis.index[k]] += c
        return cls(d, degree, coeffs)

    def terms(self) -> dict[tuple[int, ...], float]:
        basis = monomial_basis(self.d, self.degree)
        return {k: float(self.coeffs[i]) for k, i in basis.index.items() if self.coeffs[i] != 0.0}


@dataclass(frozen=True, eq=False)
class _DegreeGroup:
    d: int
    degree: int
    rows: np.ndarray
    coeffs: np.ndarray

    @cached_property
    def derivative_coeffs(self) -> np.ndarray:
        """Coefficients of every first partial, (rows * d) x m_{p-1}.

        Row r * d + j holds dF_r/dx_j over the degree p-1 basis.
        """
        idx, fac = monomial_basis(self.d, self.degree).raise_map
        out = (self.coeffs[:, idx] * fac).reshape(len(self.rows) * self.d, idx.shape[1])
        out.flags.writeable = False
        return out


@dataclass(frozen=True, eq=False)
class PolynomialSystem:
    """F = (F_1, ..., F_n), immutable and safe to share between threads."""

    polys: tuple[HomogeneousPoly, ...]

    def __post_init__(self):
        polys = tuple(self.polys)
        if not polys:
            raise ValueError("a system needs at least one polynomial")
        dims = {f.d for f in polys}
        if len(dims) != 1:
            raise ValueError(f"polynomials disagree on d: {sorted(dims)}")
        object.__setattr__(self, "polys", polys)
        total_coefficients(polys[0].d, [f.degree for f in polys])

    @property
    def d(self) -> int:
        return self.polys[0].d

    @property
    def n(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(f.degree for f in self.polys)

    @property
    def p_max(self) -> int:
        return max(self.degrees)

    @property
    def N(self) -> int:
        return total_coefficients(self.d, self.degrees)

    @cached_property
    def groups(self) -> tuple[_DegreeGroup, ...]:
        out = []
        for p in sorted(set(self.degrees)):
            rows = np.array([i for i, f in enumerate(self.polys) if f.degree == p])
            coeffs = np.stack([self.polys[i].coeffs for i in rows])
            coeffs.flags.writeable = False
            out.append(_DegreeGroup(self.d, p, rows, coeffs))
        return tuple(out)


@dataclass(frozen=True)
class GenerationRecord:
    """Everything needed to regenerate a sampled system."""

    d: int
    degrees: tuple[int, ...]
    seed: int
    rng: str = RNG_ALGORITHM

    def regenerate(self) -> PolynomialSystem:
        if self.rng != RNG_ALGORITHM:
            raise ValueError(f"unsupported rng {self.rng!r}, expected {RNG_ALGORITHM!r}")
        return sample_system(self.d, self.degrees, self.seed)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "generation",
            "d": self.d,
            "degrees": list(self.degrees),
            "seed": self.seed,
            "rng": self.rng,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> GenerationRecord:
        return cls(int(doc["d"]), tuple(int(p) for p in doc["degrees"]), int(doc["seed"]), doc.get("rng", RNG_ALGORITHM))


def sample_system(
    d: int,
    degrees: Sequence[int],
    seed: int | np.random.Generator,
) -> PolynomialSystem:
    """Draw a Kostlan system; identical seeds give identical systems."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    degrees = tuple(int(p) for p in degrees)
    if not degrees:
        raise ValueError("degrees must be non-empty")
    if min(degrees) < 2:
        raise ValueError(f"every degree must be >= 2, got {list(degrees)}")
    if total_coefficients(d, degrees) > MAX_COEFFICIENTS:
        raise ValueError(f"system with d={d}, degrees={list(degrees)} is too large to store")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    polys = []
    for p in degrees:
        basis = monomial_basis(d, p)
        polys.append(HomogeneousPoly(d, p, basis.weights * rng.standard_normal(len(basis))))
    return PolynomialSystem(tuple(polys))


def sample_field_values(
    d: int,
    degree: int,
    points: np.ndarray,
    samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Values of `samples` fresh single-polynomial draws at fixed points.

    Same law as `sample_system(d, [degree], ...)` evaluated point by point,
    vectorized over draws. Returns shape (samples, npts).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != d:
        raise ValueError(f"points must have {d} columns, got {points.shape}")
    basis = monomial_basis(d, degree)
    mono = monomial_values(d, degree, points.T)[degree]
    gauss = rng.standard_normal((samples, len(basis)))
    return gauss @ (basis.weights[:, np.newaxis] * mono)


def _as_point(sys: PolynomialSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (sys.d,):
        raise ValueError(f"expected a point of shape ({sys.d},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    return x


def evaluate(sys: PolynomialSystem, x) -> np.ndarray:
    """F(x) as an n-vector."""
    x = _as_point(sys, x)
    mono = monomial_values(sys.d, sys.p_max, x)
    out = np.empty(sys.n)
    for g in sys.groups:
        out[g.rows] = g.coeffs @ mono[g.degree]
    return out


def evaluate_many(sys: PolynomialSystem, points) -> np.ndarray:
    """F at every row of `points` (npts x d); returns npts x n."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != sys.d:
        raise ValueError(f"points must have {sys.d} columns, got {points.shape}")
    mono = monomial_values(sys.d, sys.p_max, points.T)
    out = np.empty((points.shape[0], sys.n))
    for g in sys.groups:
        out[:, g.rows] = (g.coeffs @ mono[g.degree]).T
    return out


def _jacobian(sys: PolynomialSystem, mono: list[np.ndarray]) -> np.ndarray:
    jac = np.empty((sys.n, sys.d))
    for g in sys.groups:
        jac[g.rows] = (g.derivative_coeffs @ mono[g.degree - 1]).reshape(len(g.rows), sys.d)
    return jac


def _weighted_hessian(d: int, degree: int, coeffs: np.ndarray, mono: list[np.ndarray]) -> np.ndarray:
    idx, fac = monomial_basis(d, degree).second_map
    return (coeffs[idx] * fac) @ mono[degree - 2]


def jacobian(sys: PolynomialSystem, x) -> np.ndarray:
    """DF(x), n x d."""
    x = _as_point(sys, x)
    return _jacobian(sys, monomial_values(sys.d, sys.p_max, x))


def poly_hessian(sys: PolynomialSystem, i: int, x) -> np.ndarray:
    """Second partials of F_i at x."""
    if not 0 <= i < sys.n:
        raise ValueError(f"polynomial index {i} out of range for n={sys.n}")
    x = _as_point(sys, x)
    f = sys.polys[i]
    mono = monomial_values(sys.d, f.degree, x)
    return _weighted_hessian(sys.d, f.degree, f.coeffs, mono)


def energy(sys: PolynomialSystem, x) -> float:
    """H(x) = |F(x)|^2 / 2."""
    f = evaluate(sys, x)
    return 0.5 * float(f @ f)


def energy_gradient(sys: PolynomialSystem, x) -> np.ndarray:
    x = _as_point(sys, x)
    mono = monomial_values(sys.d, sys.p_max, x)
    f = np.empty(sys.n)
    for g in sys.groups:
        f[g.rows] = g.coeffs @ mono[g.degree]
    return _jacobian(sys, mono).T @ f


def energy_hessian(sys: PolynomialSystem, x) -> np.ndarray:
    """sum_l F_l Hess(F_l) + DF^T DF."""
    x = _as_point(sys, x)
    mono = monomial_values(sys.d, sys.p_max, x)
    hess = np.zeros((sys.d, sys.d))
    for g in sys.groups:
        f = g.coeffs @ mono[g.degree]
        hess += _weighted_hessian(sys.d, g.degree, f @ g.coeffs, mono)
    jac = _jacobian(sys, mono)
    hess += jac.T @ jac
    return 0.5 * (hess + hess.T)


def tangent_basis(x) -> np.ndarray:
    """Columns 2..d of the Householder reflector that maps e_1 to x."""
    x = np.asarray(x, dtype=np.float64)
    norm = float(np.linalg.norm(x))
    if x.ndim != 1 or norm == 0.0 or not math.isfinite(norm):
        raise ValueError("tangent basis needs a finite non-zero vector")
    x = x / norm
    d = x.shape[0]
    tail = float(x[1:] @ x[1:])
    w = -x.copy()
    # 1 - x_1 without cancellation when x_1 is close to 1
    w[0] = tail / (1.0 + x[0]) if x[0] > 0 else 1.0 - x[0]
    ww = float(w @ w)
    if ww == 0.0:
        return np.eye(d)[:, 1:]
    reflector = np.eye(d) - (2.0 / ww) * np.outer(w, w)
    return reflector[:, 1:]


def restricted_hessian(sys: PolynomialSystem, x) -> np.ndarray:
    """U_x^T Hess(H)(x) U_x."""
    u = tangent_basis(x)
    r = u.T @ energy_hessian(sys, x) @ u
    return 0.5 * (r + r.T)


def system_to_dict(sys: PolynomialSystem) -> dict:
    polys = []
    for f in sys.polys:
        basis = monomial_basis(sys.d, f.degree)
        polys.append([[list(k), float(f.coeffs[i])] for k, i in basis.index.items()])
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "system",
        "d": sys.d,
        "degrees": list(sys.degrees),
        "polys": polys,
    }


def system_from_dict(doc: Mapping) -> PolynomialSystem:
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version}")
    d = int(doc["d"])
    degrees = [int(p) for p in doc["degrees"]]
    if len(degrees) != len(doc["polys"]):
        raise ValueError("degrees and polys disagree in length")
    polys = []
    for p, terms in zip(degrees, doc["polys"]):
        f = HomogeneousPoly.from_terms(d, {tuple(k): float(c) for k, c in terms}) if terms else None
        if f is None or f.degree != p:
            raise ValueError(f"polynomial terms do not match declared degree {p}")
        polys.append(f)
    return PolynomialSystem(tuple(polys))
