"""Matrix-valued Herglotz functions as a small tree of model nodes.

A node evaluates to an n x n matrix with PSD imaginary part anywhere off the
real axis. Lower half-plane values are produced by per-node formulas derived
from the reflection symmetry F(conj z) = F(z)*, which gives symmetry_check an
independent arithmetic path to compare against. Boundary values on the real
axis come from a geometric y-shrink iteration; non-convergence there is data
(reported, never raised).
"""
from __future__ import annotations

import abc
import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._parallel import parallel_map
from .errors import (
    IllConditionedTransformError,
    NotStrictError,
    NumericalError,
    PoleError,
    ValidationError,
)
from .intervals import IntervalSet
from .linalg import (
    DEFAULT_RANK_TOL,
    HermitianMatrix,
    as_complex_matrix,
    fro_norm,
    hermitian_from_json,
    im_part,
    matrix_from_json,
    matrix_function,
    matrix_to_json,
    min_eigenvalue,
    op_norm,
    rank_eps,
    re_part,
)
from .measures import OperatorMeasure, measure_from_json, measure_to_json

DEFAULT_EXCL_EPS = 1e-6
CONDITION_TOL = 1e-12
SMALL_Z_SWITCH = 1e-3


@dataclass(frozen=True)
class LimitConfig:
    """Geometric schedule y0 * ratio^k for boundary-limit iterations."""

    y0: float = 1e-2
    ratio: float = 0.5
    limit_tol: float = 1e-7
    max_steps: int = 40

    def __post_init__(self):
        if not (isinstance(self.y0, float) and math.isfinite(self.y0) and self.y0 > 0):
            raise ValidationError(f"y0 must be a positive float, got {self.y0!r}")
        if not (isinstance(self.ratio, float) and 0.0 < self.ratio < 1.0):
            raise ValidationError(f"ratio must lie in (0, 1), got {self.ratio!r}")
        if not (isinstance(self.limit_tol, float) and self.limit_tol > 0):
            raise ValidationError(f"limit_tol must be positive, got {self.limit_tol!r}")
        if not isinstance(self.max_steps, int) or isinstance(self.max_steps, bool) or self.max_steps < 1:
            raise ValidationError(f"max_steps must be a positive integer, got {self.max_steps!r}")


DEFAULT_LIMIT = LimitConfig()


def _require_psd_matrix(h: HermitianMatrix, what: str, tol: float = 1e-10) -> HermitianMatrix:
    if h.dim and min_eigenvalue(h) < -tol:
        raise ValidationError(f"{what} must be PSD within {tol:.1e} (min eigenvalue {min_eigenvalue(h):.3e})")
    return h


def _as_hermitian(m, what: str) -> HermitianMatrix:
    return m if isinstance(m, HermitianMatrix) else HermitianMatrix(m)


class NevanlinnaFunction(abc.ABC):
    """Base node: evaluation on both half planes plus declared singular points."""

    @property
    @abc.abstractmethod
    def dim(self) -> int: ...

    @abc.abstractmethod
    def _eval_upper(self, z: complex) -> np.ndarray: ...

    @abc.abstractmethod
    def _eval_lower(self, z: complex) -> np.ndarray: ...

    @abc.abstractmethod
    def singular_points(self) -> tuple[float, ...]: ...

    @abc.abstractmethod
    def _to_json(self) -> dict: ...

    def __call__(self, z: complex) -> np.ndarray:
        return evaluate(self, z)


def _eigs(t: HermitianMatrix) -> tuple[float, ...]:
    return tuple(sorted({float(v) for v in t.decomposition.eigenvalues}))


class _DiagonalModel(NevanlinnaFunction):
    """Shared machinery for models that are scalar functions of one operator T."""

    __slots__ = ("_t",)

    def __init__(self, t):
        self._t = _require_psd_matrix(_as_hermitian(t, "T"), f"{type(self).__name__} coefficient T")

    @property
    def coefficient(self) -> HermitianMatrix:
        return self._t

    @property
    def dim(self) -> int:
        return self._t.dim

    def singular_points(self) -> tuple[float, ...]:
        return _eigs(self._t)

    def _eval_upper(self, z: complex) -> np.ndarray:
        return matrix_function(self._t, lambda lam: self._scalar_upper(z, lam))

    def _eval_lower(self, z: complex) -> np.ndarray:
        return matrix_function(self._t, lambda lam: self._scalar_lower(z, lam))

    def _scalar_upper(self, z: complex, lam: float) -> complex:
        raise NotImplementedError

    def _scalar_lower(self, z: complex, lam: float) -> complex:
        raise NotImplementedError


class SqrtModel(_DiagonalModel):
    """i sqrt(z - T): the half-line second-order model with the hard wall at 0."""

    def _scalar_upper(self, z: complex, lam: float) -> complex:
        return 1j * cmath.sqrt(z - lam)

    def _scalar_lower(self, z: complex, lam: float) -> complex:
        return -1j * cmath.sqrt(z - lam)

    def _to_json(self) -> dict:
        return {"node": "sqrt", "T": matrix_to_json(self._t.mat)}


class RegularizedSqrtModel(_DiagonalModel):
    """The sqrt model renormalized so that the value at i is exactly i."""

    def _scalar_upper(self, z: complex, lam: float) -> complex:
        shift = cmath.sqrt(1j - lam)
        return (1j * cmath.sqrt(z - lam) + shift.imag) / shift.real

    def _scalar_lower(self, z: complex, lam: float) -> complex:
        shift = cmath.sqrt(1j - lam)
        return (-1j * cmath.sqrt(z - lam) + shift.imag) / shift.real

    def _to_json(self) -> dict:
        return {"node": "reg_sqrt", "T": matrix_to_json(self._t.mat)}


class KreinModelSL(_DiagonalModel):
    """(i sqrt(z - T) - sqrt(T)) / z: the soft-wall extension of the same model.

    Diverges at z = 0 for every PSD T, so 0 is always a declared singular
    point; for |z| below a switch the algebraically equal division-free form
    -(sqrt(T) + i sqrt(z - T))^{-1} is used eigenvalue by eigenvalue.
    """

    def singular_points(self) -> tuple[float, ...]:
        return tuple(sorted({0.0} | set(_eigs(self._t))))

    def _scalar_upper(self, z: complex, lam: float) -> complex:
        root = math.sqrt(max(lam, 0.0))
        if abs(z) < SMALL_Z_SWITCH:
            return -1.0 / (root + 1j * cmath.sqrt(z - lam))
        return (1j * cmath.sqrt(z - lam) - root) / z

    def _scalar_lower(self, z: complex, lam: float) -> complex:
        root = math.sqrt(max(lam, 0.0))
        if abs(z) < SMALL_Z_SWITCH:
            return -1.0 / (root - 1j * cmath.sqrt(z - lam))
        return (-1j * cmath.sqrt(z - lam) - root) / z

    def _to_json(self) -> dict:
        return {"node": "krein_sl", "T": matrix_to_json(self._t.mat)}


class NeumannModelSL(_DiagonalModel):
    """i (z - T)^{-1/2}: the free-endpoint extension of the same model."""

    def _scalar_upper(self, z: complex, lam: float) -> complex:
        return 1j / cmath.sqrt(z - lam)

    def _scalar_lower(self, z: complex, lam: float) -> complex:
        return -1j / cmath.sqrt(z - lam)

    def _to_json(self) -> dict:
        return {"node": "neumann_sl", "T": matrix_to_json(self._t.mat)}


class IntegralModel(NevanlinnaFunction):
    """C0 + C1 z plus the compensated Cauchy transform of an operator measure."""

    __slots__ = ("_c0", "_c1", "_measure")

    def __init__(self, c0, c1, measure: OperatorMeasure):
        self._c0 = _as_hermitian(c0, "C0")
        self._c1 = _require_psd_matrix(_as_hermitian(c1, "C1"), "linear coefficient C1")
        if not isinstance(measure, OperatorMeasure):
            raise ValidationError("IntegralModel needs an OperatorMeasure")
        self._measure = measure
        if not (self._c0.dim == self._c1.dim == measure.dim):
            raise ValidationError(
                f"dimension mismatch: C0 {self._c0.dim}, C1 {self._c1.dim}, measure {measure.dim}"
            )

    @property
    def dim(self) -> int:
        return self._c0.dim

    @property
    def measure(self) -> OperatorMeasure:
        return self._measure

    @property
    def constant(self) -> HermitianMatrix:
        return self._c0

    @property
    def slope(self) -> HermitianMatrix:
        return self._c1

    def strictness_generator(self) -> np.ndarray:
        """C1 plus the total mass: Im F(z)/Im z is bounded below by a multiple
        of this on compact sets, so its kernel is the flat subspace."""
        return self._c1.mat + self._measure.total()

    def _value(self, z: complex) -> np.ndarray:
        out = self._c0.mat + z * self._c1.mat
        for t, w in self._measure.atoms:
            out = out + (1.0 / (t - z) - t / (1.0 + t * t)) * w.mat
        for a, b, d in self._measure.ac_pieces:
            # the path t - z stays on one side of the log cut for Im z != 0
            coef = cmath.log(b - z) - cmath.log(a - z) - 0.5 * math.log((1.0 + b * b) / (1.0 + a * a))
            out = out + coef * d.mat
        return out

    def _eval_upper(self, z: complex) -> np.ndarray:
        return self._value(z)

    def _eval_lower(self, z: complex) -> np.ndarray:
        return self._value(z)

    def singular_points(self) -> tuple[float, ...]:
        return tuple(sorted({t for t, _ in self._measure.atoms}))

    def _to_json(self) -> dict:
        return {
            "node": "integral",
            "C0": matrix_to_json(self._c0.mat),
            "C1": matrix_to_json(self._c1.mat),
            "measure": measure_to_json(self._measure),
        }


class KreinTransform(NevanlinnaFunction):
    """(B - F(z))^{-1} for a Hermitian parameter B."""

    __slots__ = ("_b", "_inner")

    def __init__(self, b, inner: NevanlinnaFunction):
        self._b = _as_hermitian(b, "B")
        if not isinstance(inner, NevanlinnaFunction):
            raise ValidationError("KreinTransform needs a NevanlinnaFunction inner node")
        self._inner = inner
        if self._b.dim != inner.dim:
            raise ValidationError(f"B has dim {self._b.dim}, inner function has dim {inner.dim}")
        if isinstance(inner, IntegralModel) and inner.dim:
            gen = HermitianMatrix(inner.strictness_generator(), hermiticity_tol=1e-10)
            if rank_eps(gen.mat, CONDITION_TOL) < inner.dim:
                raise NotStrictError(
                    "inner integral representation has a flat direction "
                    "(kernel of C1 plus total mass), so B - F(z) cannot be inverted stably"
                )

    @property
    def parameter(self) -> HermitianMatrix:
        return self._b

    @property
    def inner(self) -> NevanlinnaFunction:
        return self._inner

    @property
    def dim(self) -> int:
        return self._inner.dim

    def _invert(self, value: np.ndarray, z: complex) -> np.ndarray:
        a = self._b.mat - value
        if a.shape[0] == 0:
            return a
        s = np.linalg.svd(a, compute_uv=False)
        if s[0] == 0.0 or s[-1] <= CONDITION_TOL * s[0]:
            raise IllConditionedTransformError(
                f"B - F(z) is singular beyond the conditioning threshold at z = {z}"
            )
        return np.linalg.inv(a)

    def _eval_upper(self, z: complex) -> np.ndarray:
        return self._invert(self._inner._eval_upper(z), z)

    def _eval_lower(self, z: complex) -> np.ndarray:
        return self._invert(self._inner._eval_lower(z), z)

    def singular_points(self) -> tuple[float, ...]:
        return self._inner.singular_points()

    def _to_json(self) -> dict:
        return {"node": "krein", "B": matrix_to_json(self._b.mat), "inner": self._inner._to_json()}


class Conjugation(NevanlinnaFunction):
    """R* F(z) R + R0 for invertible R and Hermitian R0."""

    __slots__ = ("_r", "_r0", "_inner")

    def __init__(self, r, r0, inner: NevanlinnaFunction):
        self._r = as_complex_matrix(r, name="R")
        self._r0 = _as_hermitian(r0, "R0")
        if not isinstance(inner, NevanlinnaFunction):
            raise ValidationError("Conjugation needs a NevanlinnaFunction inner node")
        self._inner = inner
        n = inner.dim
        if self._r.shape != (n, n):
            raise ValidationError(f"R must be {n} x {n}, got {self._r.shape}")
        if self._r0.dim != n:
            raise ValidationError(f"R0 must have dim {n}, got {self._r0.dim}")
        if n and rank_eps(self._r, CONDITION_TOL) < n:
            raise ValidationError("R is singular (rank_eps below full at 1e-12)")

    @property
    def dim(self) -> int:
        return self._inner.dim

    def _apply(self, value: np.ndarray) -> np.ndarray:
        return self._r.conj().T @ value @ self._r + self._r0.mat

    def _eval_upper(self, z: complex) -> np.ndarray:
        return self._apply(self._inner._eval_upper(z))

    def _eval_lower(self, z: complex) -> np.ndarray:
        return self._apply(self._inner._eval_lower(z))

    def singular_points(self) -> tuple[float, ...]:
        return self._inner.singular_points()

    def _to_json(self) -> dict:
        return {
            "node": "conj",
            "R": matrix_to_json(self._r),
            "R0": matrix_to_json(self._r0.mat),
            "inner": self._inner._to_json(),
        }


class Sandwich(NevanlinnaFunction):
    """D* F(z) D for an injective (possibly rectangular) D."""

    __slots__ = ("_d", "_inner")

    def __init__(self, d, inner: NevanlinnaFunction):
        self._d = as_complex_matrix(d, name="D")
        if not isinstance(inner, NevanlinnaFunction):
            raise ValidationError("Sandwich needs a NevanlinnaFunction inner node")
        self._inner = inner
        n, m = self._d.shape
        if n != inner.dim:
            raise ValidationError(f"D has {n} rows, inner function has dim {inner.dim}")
        if m and rank_eps(self._d, CONDITION_TOL) < m:
            raise ValidationError("D has a nontrivial kernel (rank_eps below column count at 1e-12)")

    @property
    def dim(self) -> int:
        return self._d.shape[1]

    def _eval_upper(self, z: complex) -> np.ndarray:
        return self._d.conj().T @ self._inner._eval_upper(z) @ self._d

    def _eval_lower(self, z: complex) -> np.ndarray:
        return self._d.conj().T @ self._inner._eval_lower(z) @ self._d

    def singular_points(self) -> tuple[float, ...]:
        return self._inner.singular_points()

    def _to_json(self) -> dict:
        return {"node": "sandwich", "D": matrix_to_json(self._d), "inner": self._inner._to_json()}


class DirectSum(NevanlinnaFunction):
    """Block-diagonal join of finitely many nodes."""

    __slots__ = ("_terms", "_offsets")

    def __init__(self, terms: Iterable[NevanlinnaFunction]):
        terms = tuple(terms)
        if not terms:
            raise ValidationError("DirectSum needs at least one term")
        for k, t in enumerate(terms):
            if not isinstance(t, NevanlinnaFunction):
                raise ValidationError(f"DirectSum term {k} is not a NevanlinnaFunction")
        self._terms = terms
        offsets = [0]
        for t in terms:
            offsets.append(offsets[-1] + t.dim)
        self._offsets = tuple(offsets)

    @property
    def terms(self) -> tuple[NevanlinnaFunction, ...]:
        return self._terms

    @property
    def dim(self) -> int:
        return self._offsets[-1]

    def _assemble(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        n = self.dim
        out = np.zeros((n, n), dtype=np.complex128)
        for t, a, b in zip(blocks, self._offsets, self._offsets[1:]):
            out[a:b, a:b] = t
        return out

    def _eval_upper(self, z: complex) -> np.ndarray:
        return self._assemble([t._eval_upper(z) for t in self._terms])

    def _eval_lower(self, z: complex) -> np.ndarray:
        return self._assemble([t._eval_lower(z) for t in self._terms])

    def singular_points(self) -> tuple[float, ...]:
        pts: set[float] = set()
        for t in self._terms:
            pts |= set(t.singular_points())
        return tuple(sorted(pts))

    def _to_json(self) -> dict:
        return {"node": "sum", "terms": [t._to_json() for t in self._terms]}


def evaluate(f: NevanlinnaFunction, z: complex) -> np.ndarray:
    """Value of the function at z with Im z != 0.

    Lower half-plane values realize the reflection symmetry F(conj z) = F(z)*
    through per-node formulas rather than by transposing the upper value.
    """
    if not isinstance(f, NevanlinnaFunction):
        raise ValidationError("evaluate needs a NevanlinnaFunction")
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError(f"z must be finite, got {z!r}")
    if isinstance(f, KreinModelSL) and z == 0:
        raise PoleError("the soft-wall model has a pole at z = 0")
    if z.imag == 0.0:
        raise ValidationError(f"evaluation needs Im z != 0, got z = {z!r}; use boundary_limit for real points")
    return f._eval_upper(z) if z.imag > 0 else f._eval_lower(z)


def symmetry_check(f: NevanlinnaFunction, z: complex) -> float:
    """Residual of the reflection symmetry, || F(z) - F(conj z)* ||."""
    z = complex(z)
    upper = evaluate(f, z)
    mirrored = evaluate(f, z.conjugate())
    return fro_norm(upper - mirrored.conj().T)


def herglotz_margin(f: NevanlinnaFunction, z: complex) -> float:
    """Smallest eigenvalue of Im F(z); nonnegative up to rounding for Im z > 0."""
    v = evaluate(f, z)
    if v.shape[0] == 0:
        return math.inf
    return min_eigenvalue(HermitianMatrix(im_part(v)))


def singular_points(f: NevanlinnaFunction) -> tuple[float, ...]:
    return f.singular_points()


@dataclass(frozen=True, eq=False)
class BoundaryLimit:
    """Outcome of one boundary-value iteration at a real point."""

    t: float
    value: np.ndarray
    converged: bool
    last_delta: float
    y_used: tuple[float, ...]


def boundary_limit(f: NevanlinnaFunction, t: float, config: LimitConfig = DEFAULT_LIMIT) -> BoundaryLimit:
    """Follow F(t + i y) down the geometric schedule and extrapolate to y = 0.

    Each pair of consecutive samples is combined into the linear-in-y
    extrapolant (F_k - ratio * F_{k-1}) / (1 - ratio), which removes the O(y)
    term exactly; iteration stops once two consecutive extrapolants agree to
    limit_tol relative precision. Non-convergence (pole, branch point,
    exhausted budget, unstable transform) is reported in the result, never
    raised.
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError(f"boundary point must be finite, got {t!r}")
    prev_sample: np.ndarray | None = None
    prev_extrap: np.ndarray | None = None
    best: np.ndarray | None = None
    last_delta = math.inf
    y_used: list[float] = []
    y = config.y0
    for _ in range(config.max_steps):
        try:
            cur = evaluate(f, complex(t, y))
        except NumericalError:
            break
        y_used.append(y)
        if prev_sample is not None:
            extrap = (cur - config.ratio * prev_sample) / (1.0 - config.ratio)
            best = extrap
            if prev_extrap is not None:
                last_delta = fro_norm(extrap - prev_extrap)
                if last_delta <= config.limit_tol * (1.0 + fro_norm(extrap)):
                    return BoundaryLimit(t, extrap, True, last_delta, tuple(y_used))
            prev_extrap = extrap
        prev_sample = cur
        y *= config.ratio
    if best is None:
        best = prev_sample
    if best is None:
        best = np.full((f.dim, f.dim), complex(math.nan, math.nan))
    return BoundaryLimit(t, best, False, last_delta, tuple(y_used))


@dataclass(frozen=True, eq=False)
class MultiplicityProfile:
    """rank Im F(t + i0) per grid point; -1 marks non-converged or excluded."""

    grid: np.ndarray
    d: np.ndarray
    excluded: tuple[int, ...]

    @property
    def converged(self) -> np.ndarray:
        return self.d >= 0

    def to_json(self) -> dict:
        return {
            "grid": [float(t) for t in self.grid],
            "d": [int(v) for v in self.d],
            "excluded": list(self.excluded),
        }


def _check_grid(grid, what: str = "grid") -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise ValidationError(f"{what} must be a nonempty 1-d array")
    if not np.all(np.isfinite(g)):
        raise ValidationError(f"{what} must be finite")
    if np.any(np.diff(g) <= 0):
        raise ValidationError(f"{what} must be strictly ascending")
    return g


def _boundary_rank(value: np.ndarray, rank_tol: float, last_delta: float) -> int:
    """Eigenvalue count of Im(value) above rank_tol relative to the size of
    the boundary value, floored at rank_tol itself and at the achieved
    extrapolation accuracy: an imaginary part below the limit's own final
    step is indistinguishable from residue and must read as rank zero."""
    if value.shape[0] == 0:
        return 0
    lam = HermitianMatrix(im_part(value)).decomposition.eigenvalues
    threshold = max(rank_tol * max(1.0, op_norm(value)), last_delta)
    return int(np.count_nonzero(np.abs(lam) > threshold))


def multiplicity_profile(
    f: NevanlinnaFunction,
    grid,
    config: LimitConfig = DEFAULT_LIMIT,
    rank_tol: float = DEFAULT_RANK_TOL,
    excl_eps: float = DEFAULT_EXCL_EPS,
) -> MultiplicityProfile:
    """Boundary multiplicity d(t) on a grid, skipping declared singular points."""
    g = _check_grid(grid)
    if not (isinstance(rank_tol, float) and 0.0 < rank_tol < 1.0):
        raise ValidationError(f"rank_tol must lie in (0, 1), got {rank_tol!r}")
    if not (isinstance(excl_eps, float) and excl_eps > 0):
        raise ValidationError(f"excl_eps must be a positive float, got {excl_eps!r}")
    sing = f.singular_points()
    excluded = tuple(
        i for i, t in enumerate(g) if any(abs(t - s) <= excl_eps for s in sing)
    )
    skip = set(excluded)

    def at(i: int) -> int:
        if i in skip:
            return -1
        bl = boundary_limit(f, float(g[i]), config=config)
        if not bl.converged:
            return -1
        return _boundary_rank(bl.value, rank_tol, bl.last_delta)

    d = parallel_map(at, range(g.size))
    return MultiplicityProfile(grid=g.copy(), d=np.asarray(d, dtype=np.int64), excluded=excluded)


def ac_spectrum(
    f: NevanlinnaFunction,
    window: tuple[float, float],
    grid_points: int = 201,
    config: LimitConfig = DEFAULT_LIMIT,
    rank_tol: float = DEFAULT_RANK_TOL,
    excl_eps: float = DEFAULT_EXCL_EPS,
) -> IntervalSet:
    """Closure of the set where d > 0, scanned on a uniform grid and clipped
    to the window. Support cells are one full grid step wide on each side so
    an isolated excluded point cannot split a band."""
    a, b = (float(window[0]), float(window[1]))
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValidationError(f"window must be a finite pair a < b, got {window!r}")
    if not isinstance(grid_points, int) or isinstance(grid_points, bool) or grid_points < 2:
        raise ValidationError(f"grid_points must be an integer >= 2, got {grid_points!r}")
    g = np.linspace(a, b, grid_points)
    h = (b - a) / (grid_points - 1)
    prof = multiplicity_profile(f, g, config=config, rank_tol=rank_tol, excl_eps=excl_eps)
    return support_set(prof, h).intersect(IntervalSet.closed(a, b))


def support_set(profile: MultiplicityProfile, h: float) -> IntervalSet:
    """Union of the cells [t - h, t + h] over grid points with d > 0.

    Cells over supporting indices i and i + 2 touch at the midpoint in exact
    arithmetic, so runs are stitched by index gap rather than by comparing
    rounded endpoints; a lone excluded point cannot split a band this way.
    """
    if not (isinstance(h, float) and math.isfinite(h) and h > 0):
        raise ValidationError(f"cell half-width must be a positive float, got {h!r}")
    g = profile.grid
    support = [i for i in range(g.size) if profile.d[i] > 0]
    pieces = []
    k = 0
    while k < len(support):
        j = k
        while j + 1 < len(support) and support[j + 1] - support[j] <= 2:
            j += 1
        pieces.append((float(g[support[k]]) - h, float(g[support[j]]) + h, True, True))
        k = j + 1
    return IntervalSet(pieces)


@dataclass(frozen=True, eq=False)
class StieltjesInversion:
    """Piecewise-constant density estimate; omitted lists non-converged cells."""

    measure: OperatorMeasure
    omitted: tuple[int, ...]
    grid: np.ndarray


def stieltjes_invert(
    f: NevanlinnaFunction,
    grid,
    config: LimitConfig = DEFAULT_LIMIT,
) -> StieltjesInversion:
    """Density Im F(t + i0) / pi per grid cell, evaluated at cell midpoints.

    grid holds the cell edges; cell k is [grid[k], grid[k+1]). Cells whose
    midpoint limit does not converge are flagged in omitted and left out of
    the measure.
    """
    edges = _check_grid(grid, what="cell-edge grid")
    if edges.size < 2:
        raise ValidationError("need at least two cell edges")
    mids = 0.5 * (edges[:-1] + edges[1:])
    limits = parallel_map(lambda m: boundary_limit(f, float(m), config=config), mids)
    pieces = []
    omitted = []
    for k, bl in enumerate(limits):
        if bl.converged:
            pieces.append((float(edges[k]), float(edges[k + 1]), im_part(bl.value) / math.pi))
        else:
            omitted.append(k)
    return StieltjesInversion(
        measure=OperatorMeasure(f.dim, ac_pieces=pieces),
        omitted=tuple(omitted),
        grid=edges.copy(),
    )


def _check_ys(ys) -> list[float]:
    vals = [float(y) for y in ys]
    if not vals:
        raise ValidationError("need at least one sample height y")
    for y in vals:
        if not (0.0 < y <= 1.0):
            raise ValidationError(f"sample heights must lie in (0, 1], got {y!r}")
    return vals


def max_normal(f: NevanlinnaFunction, t: float, ys) -> float:
    """Largest operator norm of F(t + i y) over the supplied heights.

    A sampled stand-in for the sup over 0 < y <= 1 (a lower bound of it)."""
    vals = _check_ys(ys)
    return max(op_norm(evaluate(f, complex(t, y))) for y in vals)


def _strict_inverse_root_at_i(f: NevanlinnaFunction) -> tuple[np.ndarray, np.ndarray]:
    fi = evaluate(f, 1j)
    w = HermitianMatrix(im_part(fi))
    evs = w.decomposition.eigenvalues
    if evs.size:
        top = float(np.max(np.abs(evs)))
        if float(evs[0]) <= CONDITION_TOL * max(1.0, top):
            raise NotStrictError(
                f"Im F(i) is singular beyond tolerance (min eigenvalue {float(evs[0]):.3e})"
            )
    s = matrix_function(w, lambda lam: 1.0 / math.sqrt(lam)) if evs.size else w.mat
    return s, re_part(fi)


def invariant_max_normal(f: NevanlinnaFunction, t: float, ys) -> float:
    """max_normal after the congruence that sends F(i) to i; invariant under
    invertible-congruence-plus-Hermitian-shift changes of the function."""
    vals = _check_ys(ys)
    s, q = _strict_inverse_root_at_i(f)
    return max(op_norm(s @ (evaluate(f, complex(t, y)) - q) @ s) for y in vals)


def sandwich(f: NevanlinnaFunction, d) -> Sandwich:
    """Congruence by a square invertible D (trivial kernel and cokernel)."""
    dm = as_complex_matrix(d, name="D")
    if dm.shape[0] != dm.shape[1]:
        raise ValidationError(f"sandwich needs a square D, got shape {dm.shape}")
    n = dm.shape[0]
    if n and rank_eps(dm, CONDITION_TOL) < n:
        raise ValidationError("sandwich needs an invertible D (rank_eps below full at 1e-12)")
    return Sandwich(dm, f)


def node_to_json(f: NevanlinnaFunction) -> dict:
    if not isinstance(f, NevanlinnaFunction):
        raise ValidationError("node_to_json needs a NevanlinnaFunction")
    return f._to_json()


def _expect_keys(obj: dict, keys: set[str], what: str) -> None:
    if set(obj) != keys:
        raise ValidationError(f"{what} must have exactly the keys {sorted(keys)}, got {sorted(obj)}")


def node_from_json(obj) -> NevanlinnaFunction:
    if not isinstance(obj, dict) or "node" not in obj:
        raise ValidationError('model JSON must be an object with a "node" key')
    kind = obj["node"]
    if kind == "sqrt":
        _expect_keys(obj, {"node", "T"}, "sqrt node")
        return SqrtModel(hermitian_from_json(obj["T"], name="T"))
    if kind == "reg_sqrt":
        _expect_keys(obj, {"node", "T"}, "reg_sqrt node")
        return RegularizedSqrtModel(hermitian_from_json(obj["T"], name="T"))
    if kind == "krein_sl":
        _expect_keys(obj, {"node", "T"}, "krein_sl node")
        return KreinModelSL(hermitian_from_json(obj["T"], name="T"))
    if kind == "neumann_sl":
        _expect_keys(obj, {"node", "T"}, "neumann_sl node")
        return NeumannModelSL(hermitian_from_json(obj["T"], name="T"))
    if kind == "integral":
        _expect_keys(obj, {"node", "C0", "C1", "measure"}, "integral node")
        return IntegralModel(
            hermitian_from_json(obj["C0"], name="C0"),
            hermitian_from_json(obj["C1"], name="C1"),
            measure_from_json(obj["measure"]),
        )
    if kind == "krein":
        _expect_keys(obj, {"node", "B", "inner"}, "krein node")
        return KreinTransform(hermitian_from_json(obj["B"], name="B"), node_from_json(obj["inner"]))
    if kind == "conj":
        _expect_keys(obj, {"node", "R", "R0", "inner"}, "conj node")
        return Conjugation(
            matrix_from_json(obj["R"], name="R"),
            hermitian_from_json(obj["R0"], name="R0"),
            node_from_json(obj["inner"]),
        )
    if kind == "sandwich":
        _expect_keys(obj, {"node", "D", "inner"}, "sandwich node")
        return Sandwich(matrix_from_json(obj["D"], name="D"), node_from_json(obj["inner"]))
    if kind == "sum":
        _expect_keys(obj, {"node", "terms"}, "sum node")
        terms = obj["terms"]
        if not isinstance(terms, list):
            raise ValidationError('"terms" must be a list of nodes')
        return DirectSum(tuple(node_from_json(t) for t in terms))
    raise ValidationError(f"unknown node kind {kind!r}")
