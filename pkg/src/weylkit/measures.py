"""Operator-valued measures with atoms and piecewise-constant densities.

A measure is the pair (point part, absolutely continuous part): finitely many
atoms with PSD weight matrices plus finitely many half-open pieces [a, b)
carrying constant PSD density matrices. Multiplicity functions, supports, and
the subordination order are computed exactly from this structure.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .intervals import IntervalSet
from .linalg import (
    DEFAULT_RANK_TOL,
    HermitianMatrix,
    hermitian_from_json,
    matrix_to_json,
    min_eigenvalue,
    rank_eps,
)

DEFAULT_PSD_TOL = 1e-10


def _as_weight(w, dim: int, psd_tol: float, what: str) -> HermitianMatrix:
    h = w if isinstance(w, HermitianMatrix) else HermitianMatrix(w)
    if h.dim != dim:
        raise ValidationError(f"{what} has dim {h.dim}, expected {dim}")
    if h.dim and min_eigenvalue(h) < -psd_tol:
        raise ValidationError(f"{what} is not PSD within {psd_tol:.1e} (min eigenvalue {min_eigenvalue(h):.3e})")
    return h


class OperatorMeasure:
    """Finite PSD atoms plus piecewise-constant PSD densities on [a, b) pieces."""

    __slots__ = ("_dim", "_atoms", "_pieces")

    def __init__(self, dim: int, atoms: Iterable = (), ac_pieces: Iterable = (), psd_tol: float = DEFAULT_PSD_TOL):
        if not isinstance(dim, int) or dim < 0:
            raise ValidationError(f"measure dim must be a nonnegative integer, got {dim!r}")
        self._dim = dim

        parsed_atoms = []
        for entry in atoms:
            try:
                t, w = entry
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"atom must be a (position, weight) pair: {entry!r}") from exc
            t = float(t)
            if not math.isfinite(t):
                raise ValidationError(f"atom position must be finite, got {t!r}")
            parsed_atoms.append((t, _as_weight(w, dim, psd_tol, f"atom weight at t={t}")))
        parsed_atoms.sort(key=lambda p: p[0])
        for (t1, _), (t2, _) in zip(parsed_atoms, parsed_atoms[1:]):
            if t1 == t2:
                raise ValidationError(f"duplicate atom position {t1}")
        self._atoms = tuple(parsed_atoms)

        parsed_pieces = []
        for entry in ac_pieces:
            try:
                a, b, d = entry
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"ac piece must be (a, b, density): {entry!r}") from exc
            a = float(a)
            b = float(b)
            if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
                raise ValidationError(f"ac piece needs finite a < b, got [{a}, {b})")
            parsed_pieces.append((a, b, _as_weight(d, dim, psd_tol, f"density on [{a}, {b})")))
        parsed_pieces.sort(key=lambda p: (p[0], p[1]))
        for (_, b1, _), (a2, _, _) in zip(parsed_pieces, parsed_pieces[1:]):
            if a2 < b1:
                raise ValidationError(f"ac pieces overlap at {a2}")
        self._pieces = tuple(parsed_pieces)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def atoms(self) -> tuple[tuple[float, HermitianMatrix], ...]:
        return self._atoms

    @property
    def ac_pieces(self) -> tuple[tuple[float, float, HermitianMatrix], ...]:
        return self._pieces

    def total(self) -> np.ndarray:
        """Total mass: sum of atom weights plus length-weighted densities."""
        out = np.zeros((self._dim, self._dim), dtype=np.complex128)
        for _, w in self._atoms:
            out = out + w.mat
        for a, b, d in self._pieces:
            out = out + (b - a) * d.mat
        return out

    def __repr__(self) -> str:
        return f"OperatorMeasure(dim={self._dim}, atoms={len(self._atoms)}, ac_pieces={len(self._pieces)})"


def evaluate_measure(m: OperatorMeasure, delta: IntervalSet) -> HermitianMatrix:
    """Measure of a set: atoms by exact membership, densities by overlap length."""
    out = np.zeros((m.dim, m.dim), dtype=np.complex128)
    for t, w in m.atoms:
        if delta.contains(t):
            out = out + w.mat
    for a, b, d in m.ac_pieces:
        length = delta.intersect(IntervalSet.interval(a, b, True, False)).measure()
        if length:
            out = out + length * d.mat
    return HermitianMatrix(out, hermiticity_tol=1e-10)


def lebesgue_decompose(m: OperatorMeasure) -> tuple[OperatorMeasure, OperatorMeasure]:
    """Split into (absolutely continuous part, point part)."""
    ac = OperatorMeasure(m.dim, atoms=(), ac_pieces=m.ac_pieces)
    pp = OperatorMeasure(m.dim, atoms=m.atoms, ac_pieces=())
    return ac, pp


class MultiplicityFunctionTable:
    """Integer-valued step function: values[k] on [breakpoints[k], breakpoints[k+1]), 0 outside."""

    __slots__ = ("_breaks", "_values")

    def __init__(self, breakpoints: Sequence[float], values: Sequence[int]):
        breaks = [float(b) for b in breakpoints]
        vals = list(values)
        if any(math.isnan(b) or math.isinf(b) for b in breaks):
            raise ValidationError("breakpoints must be finite")
        if any(b1 >= b2 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValidationError("breakpoints must be strictly ascending")
        if breaks and len(vals) != len(breaks) - 1:
            raise ValidationError(f"need {len(breaks) - 1} values for {len(breaks)} breakpoints, got {len(vals)}")
        if not breaks and vals:
            raise ValidationError("values given without breakpoints")
        for v in vals:
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
                raise ValidationError(f"multiplicity values must be nonnegative integers, got {v!r}")
        vals = [int(v) for v in vals]

        # canonical form: merge equal neighbours, strip zero-valued ends
        merged_b: list[float] = []
        merged_v: list[int] = []
        for k, v in enumerate(vals):
            if merged_v and merged_v[-1] == v:
                continue
            merged_b.append(breaks[k])
            merged_v.append(v)
        if vals:
            merged_b.append(breaks[-1])
        while merged_v and merged_v[0] == 0:
            merged_v.pop(0)
            merged_b.pop(0)
        while merged_v and merged_v[-1] == 0:
            merged_v.pop()
            merged_b.pop()
        if not merged_v:
            merged_b = []
        self._breaks = tuple(merged_b)
        self._values = tuple(merged_v)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self._breaks

    @property
    def values(self) -> tuple[int, ...]:
        return self._values

    def value_at(self, t: float) -> int:
        if not self._breaks or t < self._breaks[0] or t >= self._breaks[-1]:
            return 0
        k = bisect.bisect_right(self._breaks, t) - 1
        return self._values[k]

    def pieces(self) -> tuple[tuple[float, float, int], ...]:
        return tuple((a, b, v) for a, b, v in zip(self._breaks, self._breaks[1:], self._values))

    def _merged_grid(self, other: "MultiplicityFunctionTable") -> list[float]:
        return sorted(set(self._breaks) | set(other._breaks))

    def le(self, other: "MultiplicityFunctionTable") -> bool:
        """Pointwise <= almost everywhere (checked piece by piece, exactly)."""
        grid = self._merged_grid(other)
        return all(self.value_at(a) <= other.value_at(a) for a in grid[:-1])

    def __add__(self, other: "MultiplicityFunctionTable") -> "MultiplicityFunctionTable":
        grid = self._merged_grid(other)
        if not grid:
            return MultiplicityFunctionTable((), ())
        vals = [self.value_at(a) + other.value_at(a) for a in grid[:-1]]
        return MultiplicityFunctionTable(grid, vals)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiplicityFunctionTable)
            and self._breaks == other._breaks
            and self._values == other._values
        )

    def __hash__(self) -> int:
        return hash((self._breaks, self._values))

    def __repr__(self) -> str:
        return f"MultiplicityFunctionTable({self._breaks!r}, {self._values!r})"

    def to_json(self) -> dict:
        return {"breakpoints": list(self._breaks), "values": list(self._values)}


def ac_multiplicity(m: OperatorMeasure, tol: float = DEFAULT_RANK_TOL) -> MultiplicityFunctionTable:
    """Rank of the density on each piece, as a canonical step function."""
    if not m.ac_pieces:
        return MultiplicityFunctionTable((), ())
    breaks: list[float] = []
    vals: list[int] = []
    for a, b, d in m.ac_pieces:
        if breaks and a > breaks[-1]:
            vals.append(0)
            breaks.append(a)
        elif not breaks:
            breaks.append(a)
        vals.append(rank_eps(d.mat, tol))
        breaks.append(b)
    return MultiplicityFunctionTable(breaks, vals)


def ac_support(m: OperatorMeasure, tol: float = DEFAULT_RANK_TOL) -> IntervalSet:
    """Union of pieces whose density has positive rank."""
    return IntervalSet.from_pieces(
        [(a, b, True, False) for a, b, d in m.ac_pieces if rank_eps(d.mat, tol) > 0]
    )


def _atom_positions(m: OperatorMeasure, tol: float) -> set[float]:
    return {t for t, w in m.atoms if w.dim and rank_eps(w.mat, tol) > 0}


def is_subordinate(m1: OperatorMeasure, m2: OperatorMeasure, tol: float = DEFAULT_RANK_TOL) -> bool:
    """Support containment: every atom of m1 sits on an atom of m2, and the
    ac support of m1 is inside that of m2 up to a Lebesgue-null set."""
    if not _atom_positions(m1, tol) <= _atom_positions(m2, tol):
        return False
    leftover = ac_support(m1, tol).subtract(ac_support(m2, tol))
    return leftover.measure() == 0.0


def spectrally_subordinate(m1: OperatorMeasure, m2: OperatorMeasure, tol: float = DEFAULT_RANK_TOL) -> bool:
    """Subordinate with almost-everywhere multiplicity dominance on the ac part."""
    if not is_subordinate(m1, m2, tol):
        return False
    return ac_multiplicity(m1, tol).le(ac_multiplicity(m2, tol))


def spectrally_equivalent(m1: OperatorMeasure, m2: OperatorMeasure, tol: float = DEFAULT_RANK_TOL) -> bool:
    return spectrally_subordinate(m1, m2, tol) and spectrally_subordinate(m2, m1, tol)


def measure_to_json(m: OperatorMeasure) -> dict:
    return {
        "dim": m.dim,
        "atoms": [{"t": t, "weight": matrix_to_json(w.mat)} for t, w in m.atoms],
        "ac": [{"a": a, "b": b, "density": matrix_to_json(d.mat)} for a, b, d in m.ac_pieces],
    }


def measure_from_json(obj) -> OperatorMeasure:
    if not isinstance(obj, dict):
        raise ValidationError("measure JSON must be an object")
    extra = set(obj) - {"dim", "atoms", "ac"}
    if extra:
        raise ValidationError(f"unknown keys in measure: {sorted(extra)}")
    dim = obj.get("dim")
    if not isinstance(dim, int):
        raise ValidationError('measure needs an integer "dim"')
    atoms = []
    for k, row in enumerate(obj.get("atoms", [])):
        if not isinstance(row, dict) or set(row) != {"t", "weight"}:
            raise ValidationError(f'atom {k} must have exactly the keys "t" and "weight"')
        if not isinstance(row["t"], (int, float)) or isinstance(row["t"], bool):
            raise ValidationError(f"atom {k} position must be a number")
        atoms.append((float(row["t"]), hermitian_from_json(row["weight"], name=f"atom {k} weight")))
    pieces = []
    for k, row in enumerate(obj.get("ac", [])):
        if not isinstance(row, dict) or set(row) != {"a", "b", "density"}:
            raise ValidationError(f'ac piece {k} must have exactly the keys "a", "b", "density"')
        for key in ("a", "b"):
            if not isinstance(row[key], (int, float)) or isinstance(row[key], bool):
                raise ValidationError(f"ac piece {k} endpoint {key} must be a number")
        pieces.append((float(row["a"]), float(row["b"]), hermitian_from_json(row["density"], name=f"density {k}")))
    return OperatorMeasure(dim, atoms=atoms, ac_pieces=pieces)
