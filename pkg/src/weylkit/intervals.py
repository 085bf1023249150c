"""Finite unions of real intervals with exact endpoint algebra.

All set operations are decided by endpoint comparisons alone (no midpoint
sampling, no tolerances), so identities like inclusion-exclusion of the
Lebesgue measure and the essential-support closure lemmas hold exactly in
this representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError

Piece = tuple[float, float, bool, bool]


def _validate_piece(raw) -> Piece | None:
    try:
        a, b, cl, cr = raw
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"interval piece must be (a, b, closed_left, closed_right): {raw!r}") from exc
    a = float(a)
    b = float(b)
    cl = bool(cl)
    cr = bool(cr)
    if math.isnan(a) or math.isnan(b):
        raise ValidationError("interval endpoints must not be NaN")
    if a > b:
        raise ValidationError(f"interval endpoints out of order: a={a!r} > b={b!r}")
    if math.isinf(a):
        cl = False
    if math.isinf(b):
        cr = False
    if a == b:
        if math.isinf(a):
            return None
        if not (cl and cr):
            return None
        return (a, b, True, True)
    return (a, b, cl, cr)


def _point_in(pieces: Sequence[Piece], x: float) -> bool:
    for a, b, cl, cr in pieces:
        if (a < x < b) or (x == a and cl) or (x == b and cr):
            return True
    return False


def _gap_in(pieces: Sequence[Piece], u: float, w: float) -> bool:
    # (u, w) is an open region whose interior contains no endpoint of any
    # piece, so a piece overlaps it iff the piece spans it entirely.
    for a, b, _, _ in pieces:
        if a <= u and w <= b:
            return True
    return False


def _combine(piece_lists: Sequence[Sequence[Piece]], keep) -> tuple[Piece, ...]:
    vals = sorted({v for pieces in piece_lists for p in pieces for v in (p[0], p[1]) if math.isfinite(v)})
    regions: list[tuple[str, float, float]] = []
    if vals:
        regions.append(("gap", -math.inf, vals[0]))
        for i, v in enumerate(vals):
            regions.append(("point", v, v))
            nxt = vals[i + 1] if i + 1 < len(vals) else math.inf
            regions.append(("gap", v, nxt))
    else:
        regions.append(("gap", -math.inf, math.inf))

    selected: list[bool] = []
    for kind, u, w in regions:
        if kind == "point":
            flags = tuple(_point_in(pieces, u) for pieces in piece_lists)
        else:
            flags = tuple(_gap_in(pieces, u, w) for pieces in piece_lists)
        selected.append(bool(keep(flags)))

    out: list[Piece] = []
    i = 0
    while i < len(regions):
        if not selected[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(regions) and selected[j + 1]:
            j += 1
        k0, u0, _ = regions[i]
        k1, _, w1 = regions[j]
        a = u0
        cl = k0 == "point"
        b = w1 if k1 == "gap" else regions[j][1]
        cr = k1 == "point"
        piece = _validate_piece((a, b, cl, cr))
        if piece is not None:
            out.append(piece)
        i = j + 1
    return tuple(out)


class IntervalSet:
    """Canonical finite union of disjoint maximal intervals."""

    __slots__ = ("_pieces",)

    def __init__(self, pieces: Iterable = ()):
        cleaned = [p for p in (map(_validate_piece, pieces)) if p is not None]
        self._pieces = _combine([cleaned], lambda flags: flags[0]) if cleaned else ()

    @classmethod
    def from_pieces(cls, pieces: Iterable) -> "IntervalSet":
        return cls(pieces)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def point(cls, x: float) -> "IntervalSet":
        return cls([(x, x, True, True)])

    @classmethod
    def closed(cls, a: float, b: float) -> "IntervalSet":
        return cls([(a, b, True, True)])

    @classmethod
    def open(cls, a: float, b: float) -> "IntervalSet":
        return cls([(a, b, False, False)])

    @classmethod
    def interval(cls, a: float, b: float, closed_left: bool, closed_right: bool) -> "IntervalSet":
        return cls([(a, b, closed_left, closed_right)])

    @classmethod
    def real_line(cls) -> "IntervalSet":
        return cls([(-math.inf, math.inf, False, False)])

    @property
    def pieces(self) -> tuple[Piece, ...]:
        return self._pieces

    @property
    def is_empty(self) -> bool:
        return not self._pieces

    def contains(self, x: float) -> bool:
        return _point_in(self._pieces, float(x))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return _wrap(_combine([self._pieces, other._pieces], lambda f: f[0] or f[1]))

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        return _wrap(_combine([self._pieces, other._pieces], lambda f: f[0] and f[1]))

    def subtract(self, other: "IntervalSet") -> "IntervalSet":
        return _wrap(_combine([self._pieces, other._pieces], lambda f: f[0] and not f[1]))

    def measure(self) -> float:
        return math.fsum(b - a for a, b, _, _ in self._pieces if b > a)

    def closure(self) -> "IntervalSet":
        closed = [(a, b, math.isfinite(a), math.isfinite(b)) for a, b, _, _ in self._pieces]
        return IntervalSet(closed)

    def closure_ac(self) -> "IntervalSet":
        """Essential support closure: drop isolated points, close what has length."""
        fat = [(a, b, math.isfinite(a), math.isfinite(b)) for a, b, _, _ in self._pieces if b > a]
        return IntervalSet(fat)

    def to_json(self) -> dict:
        def enc(v: float) -> float | str:
            if v == math.inf:
                return "inf"
            if v == -math.inf:
                return "-inf"
            return v

        return {"intervals": [{"a": enc(a), "b": enc(b), "cl": cl, "cr": cr} for a, b, cl, cr in self._pieces]}

    @classmethod
    def from_json(cls, obj) -> "IntervalSet":
        if not isinstance(obj, dict) or set(obj) != {"intervals"}:
            raise ValidationError('interval set JSON must be {"intervals": [...]}')
        rows = obj["intervals"]
        if not isinstance(rows, list):
            raise ValidationError('"intervals" must be a list')

        def dec(v, where: str) -> float:
            if v == "inf":
                return math.inf
            if v == "-inf":
                return -math.inf
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                return float(v)
            raise ValidationError(f"bad interval endpoint {v!r} in {where}")

        pieces = []
        for k, row in enumerate(rows):
            if not isinstance(row, dict) or set(row) != {"a", "b", "cl", "cr"}:
                raise ValidationError(f"interval {k} must have exactly the keys a, b, cl, cr")
            if not isinstance(row["cl"], bool) or not isinstance(row["cr"], bool):
                raise ValidationError(f"interval {k} closure flags must be booleans")
            pieces.append((dec(row["a"], f"interval {k}"), dec(row["b"], f"interval {k}"), row["cl"], row["cr"]))
        return cls(pieces)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self._pieces == other._pieces

    def __hash__(self) -> int:
        return hash(self._pieces)

    def __repr__(self) -> str:
        if not self._pieces:
            return "IntervalSet(empty)"
        parts = []
        for a, b, cl, cr in self._pieces:
            parts.append(f"{'[' if cl else '('}{a}, {b}{']' if cr else ')'}")
        return "IntervalSet(" + " u ".join(parts) + ")"


def _wrap(pieces: tuple[Piece, ...]) -> IntervalSet:
    s = IntervalSet.__new__(IntervalSet)
    s._pieces = pieces
    return s


@dataclass(frozen=True)
class AcLemmaReport:
    """Outcome of the two essential-support closure identities."""

    leftover_measure: float
    support_lemma_ok: bool
    lhs: IntervalSet
    rhs: IntervalSet
    union_closure_equal: bool
    passed: bool


def verify_ac_lemmas(a: IntervalSet, parts: Sequence[IntervalSet] | None = None) -> AcLemmaReport:
    """Check both closure identities exactly.

    First: the part of a outside closure_ac(a) is Lebesgue-null. Second: the
    essential closure of the union of the parts equals the topological closure
    of the union of the parts' essential closures. parts defaults to the
    components of a.
    """
    if parts is None:
        parts = [_wrap((p,)) for p in a.pieces]
    leftover = a.subtract(a.closure_ac())
    leftover_measure = leftover.measure()
    support_ok = leftover_measure == 0.0

    whole = IntervalSet.empty()
    cl_union = IntervalSet.empty()
    for p in parts:
        whole = whole.union(p)
        cl_union = cl_union.union(p.closure_ac())
    lhs = whole.closure_ac()
    rhs = cl_union.closure()
    equal = lhs == rhs
    return AcLemmaReport(leftover_measure, support_ok, lhs, rhs, equal, support_ok and equal)
