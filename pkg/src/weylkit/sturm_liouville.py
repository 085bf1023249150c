"""Closed-form boundary objects for -d^2/dx^2 + T on the half line.

T is a Hermitian PSD matrix acting on the boundary space. Every quantity here
is a scalar function of T applied through the eigendecomposition: the four
Weyl functions (hard wall, renormalized, soft wall, free endpoint), the
deficiency-space Gram identity, the soft-wall boundary parameter, and the
spectral profile of the hard-wall extension.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .intervals import IntervalSet
from .linalg import (
    DEFAULT_RANK_TOL,
    HermitianMatrix,
    fro_norm,
    matrix_function,
    min_eigenvalue,
)
from .nevanlinna import (
    DEFAULT_EXCL_EPS,
    DEFAULT_LIMIT,
    KreinModelSL,
    LimitConfig,
    MultiplicityProfile,
    NeumannModelSL,
    NevanlinnaFunction,
    RegularizedSqrtModel,
    SqrtModel,
    evaluate,
    invariant_max_normal,
    multiplicity_profile,
    support_set,
)

PSD_TOL = 1e-10


class SLModel:
    """The coefficient T with its spectral bottom t0 = min eigenvalue."""

    __slots__ = ("_t", "_t0")

    def __init__(self, t):
        t = t if isinstance(t, HermitianMatrix) else HermitianMatrix(t)
        if t.dim == 0:
            raise ValidationError("T must have positive dimension")
        bottom = min_eigenvalue(t)
        if bottom < -PSD_TOL:
            raise ValidationError(f"T must be PSD within {PSD_TOL:.1e} (min eigenvalue {bottom:.3e})")
        self._t = t
        self._t0 = bottom

    @property
    def t(self) -> HermitianMatrix:
        return self._t

    @property
    def t0(self) -> float:
        return self._t0

    @property
    def dim(self) -> int:
        return self._t.dim

    def __repr__(self) -> str:
        return f"SLModel(dim={self.dim}, t0={self._t0!r})"


def weyl(m: SLModel) -> SqrtModel:
    """i sqrt(z - T): the hard-wall (Dirichlet-type) Weyl function."""
    return SqrtModel(m.t)


def regularized_weyl(m: SLModel) -> RegularizedSqrtModel:
    """The hard-wall function renormalized to take the value i at i."""
    return RegularizedSqrtModel(m.t)


def krein_weyl(m: SLModel) -> KreinModelSL:
    """(i sqrt(z - T) - sqrt(T)) / z: the soft-wall extension's function."""
    return KreinModelSL(m.t)


def neumann_weyl(m: SLModel) -> NeumannModelSL:
    """i (z - T)^{-1/2}: the free-endpoint extension's function."""
    return NeumannModelSL(m.t)


def gamma_gram(m: SLModel, z: complex, zeta: complex) -> tuple[np.ndarray, float]:
    """Gram matrix of the deficiency fields at (zeta, z) and the residual of
    the difference identity M(z) - M(zeta)* = (z - conj(zeta)) * Gram."""
    z = complex(z)
    zeta = complex(zeta)
    if z.imag <= 0 or zeta.imag <= 0:
        raise ValidationError(f"both points must lie in the upper half plane, got {z!r}, {zeta!r}")
    gram = matrix_function(
        m.t, lambda lam: 1j / (cmath.sqrt(z - lam) - cmath.sqrt(zeta - lam).conjugate())
    )
    f = weyl(m)
    lhs = evaluate(f, z) - evaluate(f, zeta).conj().T
    residual = fro_norm(lhs - (z - zeta.conjugate()) * gram)
    return gram, residual


def krein_parameter(m: SLModel) -> HermitianMatrix:
    """Boundary parameter selecting the soft-wall extension in the
    renormalized triplet: (sqrt(2T) + S)^{-1} S^{-1} with S = (T + sqrt(1 + T^2))^{1/2}."""

    def scalar(lam: float) -> float:
        lam = max(lam, 0.0)
        s = math.sqrt(lam + math.sqrt(1.0 + lam * lam))
        return 1.0 / ((math.sqrt(2.0 * lam) + s) * s)

    return HermitianMatrix(matrix_function(m.t, scalar))


def re_im_sqrt_shift(m: SLModel) -> tuple[HermitianMatrix, HermitianMatrix]:
    """Closed forms 2^{-1/2} (T + sqrt(1 + T^2))^{-+1/2} for the real and
    imaginary parts of sqrt(i - T)."""

    def base(lam: float) -> float:
        return max(lam, 0.0) + math.sqrt(1.0 + lam * lam)

    re = matrix_function(m.t, lambda lam: 2.0 ** -0.5 * base(lam) ** -0.5)
    im = matrix_function(m.t, lambda lam: 2.0 ** -0.5 * base(lam) ** 0.5)
    return HermitianMatrix(re), HermitianMatrix(im)


@dataclass(frozen=True)
class NormalBoundReport:
    """Sampled maximal-normal values against the bound 2 (1 + t^2)^{1/4}."""

    entries: tuple[tuple[float, float, float], ...]
    max_violation: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "entries": [
                {"t": t, "sample": sample, "bound": bound}
                for t, sample, bound in self.entries
            ],
            "max_violation": self.max_violation,
            "passed": self.passed,
        }


def normal_bound_check(m: SLModel, grid, ys) -> NormalBoundReport:
    """Sample the renormalized maximal normal function of the hard-wall model
    on a grid and compare each sample with the bound 2 (1 + t^2)^{1/4}.

    The bound is a small-potential estimate: near an eigenvalue lam of T the
    samples approach lam + sqrt(1 + lam^2), so it holds when the spectrum
    lies well inside [0, 1) and larger eigenvalues show up as violations in
    the report rather than as errors."""
    points = [float(t) for t in grid]
    if not points:
        raise ValidationError("need at least one grid point")
    for t in points:
        if not math.isfinite(t):
            raise ValidationError(f"grid points must be finite, got {t!r}")
    f = weyl(m)
    entries = []
    for t in points:
        sample = invariant_max_normal(f, t, ys)
        bound = 2.0 * (1.0 + t * t) ** 0.25
        entries.append((t, sample, bound))
    max_violation = max(sample - bound for _, sample, bound in entries)
    return NormalBoundReport(
        entries=tuple(entries), max_violation=max_violation, passed=max_violation <= 0.0
    )


def friedrichs_profile(
    m: SLModel,
    window: tuple[float, float],
    grid_points: int = 201,
    config: LimitConfig = DEFAULT_LIMIT,
    rank_tol: float = DEFAULT_RANK_TOL,
    excl_eps: float = DEFAULT_EXCL_EPS,
) -> tuple[IntervalSet, MultiplicityProfile]:
    """Spectral support and multiplicity profile of the hard-wall extension
    on a window, from a single grid scan."""
    a, b = (float(window[0]), float(window[1]))
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValidationError(f"window must be a finite pair a < b, got {window!r}")
    if not isinstance(grid_points, int) or isinstance(grid_points, bool) or grid_points < 2:
        raise ValidationError(f"grid_points must be an integer >= 2, got {grid_points!r}")
    f = weyl(m)
    grid = np.linspace(a, b, grid_points)
    h = (b - a) / (grid_points - 1)
    prof = multiplicity_profile(f, grid, config=config, rank_tol=rank_tol, excl_eps=excl_eps)
    spectrum = support_set(prof, h).intersect(IntervalSet.closed(a, b))
    return spectrum, prof
