"""Extension calculus on Herglotz functions.

Extensions of a symmetric operator are parameterized by Hermitian matrices B
(through the resolvent-difference transform (B - F(z))^{-1}) or, more
generally, by self-adjoint relations that split into an operator part on a
subspace and a purely multivalued remainder. This module provides those
parameter transforms, the renormalization that moves F(i) to i, direct sums
with per-summand renormalization, compression onto the operator part, and the
grid-profile comparison that classifies two extensions by their boundary
multiplicity functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotStrictError, ValidationError
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
    re_part,
)
from .nevanlinna import (
    DEFAULT_EXCL_EPS,
    DEFAULT_LIMIT,
    Conjugation,
    DirectSum,
    KreinTransform,
    LimitConfig,
    NevanlinnaFunction,
    Sandwich,
    evaluate,
    multiplicity_profile,
)

ORTHONORMALITY_TOL = 1e-10
STRICTNESS_TOL = 1e-12

VERDICTS = (
    "equivalent",
    "first-subordinate",
    "second-subordinate",
    "incomparable",
    "inconclusive",
)


class SelfAdjointRelation:
    """Boundary parameter split as an operator acting on a subspace.

    op_basis holds orthonormal columns spanning the operator-part subspace;
    b_op is the Hermitian operator in those coordinates. The orthogonal
    complement carries the purely multivalued part implicitly. op_dim == 0
    (trivial) parameterizes the reference extension itself, op_dim == dim the
    plain operator case.
    """

    __slots__ = ("_dim", "_op_basis", "_b_op")

    def __init__(self, dim: int, op_basis, b_op):
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise ValidationError(f"dim must be a positive integer, got {dim!r}")
        basis = as_complex_matrix(op_basis, name="op_basis")
        if basis.ndim != 2 or basis.shape[0] != dim:
            raise ValidationError(f"op_basis must have {dim} rows, got shape {basis.shape}")
        k = basis.shape[1]
        if k > dim:
            raise ValidationError(f"op_basis has more columns ({k}) than dim ({dim})")
        residual = fro_norm(basis.conj().T @ basis - np.eye(k))
        if residual > ORTHONORMALITY_TOL:
            raise ValidationError(
                f"op_basis columns must be orthonormal (residual {residual:.3e} > {ORTHONORMALITY_TOL:.1e})"
            )
        b = b_op if isinstance(b_op, HermitianMatrix) else HermitianMatrix(b_op)
        if b.dim != k:
            raise ValidationError(f"B_op must be {k} x {k}, got dim {b.dim}")
        self._dim = dim
        self._op_basis = basis
        self._op_basis.setflags(write=False)
        self._b_op = b

    @classmethod
    def from_operator(cls, b) -> "SelfAdjointRelation":
        b = b if isinstance(b, HermitianMatrix) else HermitianMatrix(b)
        return cls(b.dim, np.eye(b.dim), b)

    @classmethod
    def trivial(cls, dim: int) -> "SelfAdjointRelation":
        return cls(dim, np.zeros((dim, 0)), HermitianMatrix(np.zeros((0, 0))))

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def op_dim(self) -> int:
        return self._op_basis.shape[1]

    @property
    def op_basis(self) -> np.ndarray:
        return self._op_basis

    @property
    def b_op(self) -> HermitianMatrix:
        return self._b_op

    @property
    def is_trivial(self) -> bool:
        return self.op_dim == 0

    def __repr__(self) -> str:
        return f"SelfAdjointRelation(dim={self._dim}, op_dim={self.op_dim})"


def relation_to_json(theta: SelfAdjointRelation) -> dict:
    return {
        "dim": theta.dim,
        "op_basis": matrix_to_json(theta.op_basis),
        "B_op": matrix_to_json(theta.b_op.mat),
    }


def relation_from_json(obj) -> SelfAdjointRelation:
    if not isinstance(obj, dict):
        raise ValidationError("relation JSON must be an object")
    if set(obj) != {"dim", "op_basis", "B_op"}:
        raise ValidationError(
            f"relation JSON must have exactly the keys ['B_op', 'dim', 'op_basis'], got {sorted(obj)}"
        )
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ValidationError(f'"dim" must be an integer, got {dim!r}')
    return SelfAdjointRelation(
        dim,
        matrix_from_json(obj["op_basis"], name="op_basis"),
        hermitian_from_json(obj["B_op"], name="B_op"),
    )


def krein_transform(f: NevanlinnaFunction, b) -> KreinTransform:
    """The function (B - F(z))^{-1} of the extension parameterized by B."""
    return KreinTransform(b, f)


def conjugate(f: NevanlinnaFunction, r, r0) -> Conjugation:
    """Coordinate change R* F(z) R + R0 with invertible R, Hermitian R0."""
    return Conjugation(r, r0, f)


def _strict_imag_at_i(f: NevanlinnaFunction) -> tuple[HermitianMatrix, HermitianMatrix]:
    """Im F(i) and Re F(i), with the strictness guard on the former."""
    fi = evaluate(f, 1j)
    w = HermitianMatrix(im_part(fi))
    evs = w.decomposition.eigenvalues
    if evs.size:
        top = float(np.max(np.abs(evs)))
        if float(evs[0]) <= STRICTNESS_TOL * max(1.0, top):
            raise NotStrictError(
                f"Im F(i) is singular beyond tolerance (min eigenvalue {float(evs[0]):.3e})"
            )
    return w, HermitianMatrix(re_part(fi))


def regularize(f: NevanlinnaFunction) -> tuple[NevanlinnaFunction, np.ndarray, HermitianMatrix]:
    """Renormalize so the value at i is exactly i.

    Returns (F_tilde, R, Q) with Q = Re F(i), R = (Im F(i))^{1/2}, and
    F_tilde = R^{-1} (F - Q) R^{-1}, built as a Conjugation node.
    """
    w, q = _strict_imag_at_i(f)
    r = matrix_function(w, math.sqrt)
    r_inv = matrix_function(w, lambda lam: 1.0 / math.sqrt(lam))
    shift = HermitianMatrix(-(r_inv @ q.mat @ r_inv))
    return Conjugation(r_inv, shift, f), r, q


def direct_sum(terms, auto_regularize: bool = False) -> NevanlinnaFunction:
    """Block-diagonal join; with auto_regularize each summand is renormalized
    to value i at i first, so the sum satisfies F(i) = iI."""
    terms = tuple(terms)
    if auto_regularize:
        terms = tuple(regularize(t)[0] for t in terms)
    return DirectSum(terms)


def relation_project(theta: SelfAdjointRelation, f: NevanlinnaFunction) -> NevanlinnaFunction:
    """Compression of F onto the operator-part subspace of the relation."""
    if not isinstance(theta, SelfAdjointRelation):
        raise ValidationError("relation_project needs a SelfAdjointRelation")
    if theta.dim != f.dim:
        raise ValidationError(f"relation dim {theta.dim} does not match function dim {f.dim}")
    return Sandwich(theta.op_basis, f)


def _side_function(f: NevanlinnaFunction, side) -> NevanlinnaFunction:
    """The Weyl function whose boundary multiplicity governs one comparison side.

    None picks the reference extension (F itself); a Hermitian B picks the
    transform (B - F)^{-1}; a relation compresses first, and its trivial case
    is the reference extension again (the purely multivalued relation is the
    reference boundary condition).
    """
    if side is None:
        return f
    if isinstance(side, SelfAdjointRelation):
        if side.dim != f.dim:
            raise ValidationError(f"relation dim {side.dim} does not match function dim {f.dim}")
        if side.is_trivial:
            return f
        return KreinTransform(side.b_op, Sandwich(side.op_basis, f))
    return KreinTransform(side, f)


@dataclass(frozen=True, eq=False)
class ComparisonVerdict:
    """Outcome of a profile comparison; d entries are -1 where excluded or
    not converged, and the verdict reads only non-excluded points."""

    relation: str
    grid: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    excluded: tuple[int, ...]
    config: dict

    def to_json(self) -> dict:
        return {
            "verdict": self.relation,
            "grid": [float(t) for t in self.grid],
            "d1": [int(v) for v in self.d1],
            "d2": [int(v) for v in self.d2],
            "excluded": list(self.excluded),
            "config": dict(self.config),
        }


def compare_extensions(
    f: NevanlinnaFunction,
    side1,
    side2,
    window: tuple[float, float],
    grid_points: int = 201,
    config: LimitConfig = DEFAULT_LIMIT,
    rank_tol: float = DEFAULT_RANK_TOL,
    excl_eps: float = DEFAULT_EXCL_EPS,
) -> ComparisonVerdict:
    """Classify two extensions of the same symmetric operator on a window.

    Each side is None (reference extension), a Hermitian parameter, or a
    SelfAdjointRelation. Both boundary-multiplicity profiles are scanned on a
    shared uniform grid; points within excl_eps of either side's declared
    singular set are excluded. The verdict is inconclusive exactly when some
    non-excluded point failed to converge on either side; otherwise it states
    whether d1 and d2 agree, are ordered, or cross.
    """
    a, b = (float(window[0]), float(window[1]))
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValidationError(f"window must be a finite pair a < b, got {window!r}")
    if not isinstance(grid_points, int) or isinstance(grid_points, bool) or grid_points < 2:
        raise ValidationError(f"grid_points must be an integer >= 2, got {grid_points!r}")
    _strict_imag_at_i(f)
    m1 = _side_function(f, side1)
    m2 = _side_function(f, side2)
    grid = np.linspace(a, b, grid_points)
    p1 = multiplicity_profile(m1, grid, config=config, rank_tol=rank_tol, excl_eps=excl_eps)
    p2 = multiplicity_profile(m2, grid, config=config, rank_tol=rank_tol, excl_eps=excl_eps)
    excluded = tuple(sorted(set(p1.excluded) | set(p2.excluded)))
    d1 = p1.d.copy()
    d2 = p2.d.copy()
    for i in excluded:
        d1[i] = -1
        d2[i] = -1
    required = [i for i in range(grid_points) if i not in set(excluded)]
    if any(d1[i] < 0 or d2[i] < 0 for i in required):
        relation = "inconclusive"
    elif all(d1[i] == d2[i] for i in required):
        relation = "equivalent"
    elif all(d1[i] <= d2[i] for i in required):
        relation = "first-subordinate"
    elif all(d2[i] <= d1[i] for i in required):
        relation = "second-subordinate"
    else:
        relation = "incomparable"
    cfg = {
        "y0": config.y0,
        "ratio": config.ratio,
        "limit_tol": config.limit_tol,
        "max_steps": config.max_steps,
        "rank_tol": rank_tol,
        "excl_eps": excl_eps,
        "grid_points": grid_points,
    }
    return ComparisonVerdict(
        relation=relation, grid=grid, d1=d1, d2=d2, excluded=excluded, config=cfg
    )
