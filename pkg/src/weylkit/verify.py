"""Cross-module invariant suites bundled into one deterministic run.

A bundle names the models, the checks, the sample count, and the RNG seed;
every random draw flows from that seed, so a bundle always produces the same
report bytes. The optional branch-flip injection swaps each model's two
half-plane formulas, a wrong-branch negative control that the positivity
check must catch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from weylkit.errors import NumericalError, ValidationError
from weylkit.intervals import IntervalSet, verify_ac_lemmas
from weylkit.linalg import HermitianMatrix, fro_norm
from weylkit.measures import OperatorMeasure, evaluate_measure
from weylkit.nevanlinna import (
    Conjugation,
    DirectSum,
    IntegralModel,
    KreinModelSL,
    KreinTransform,
    NevanlinnaFunction,
    NeumannModelSL,
    RegularizedSqrtModel,
    Sandwich,
    SqrtModel,
    evaluate,
    herglotz_margin,
    node_from_json,
    symmetry_check,
)
from weylkit.transforms import regularize

CHECKS = (
    "herglotz",
    "symmetry",
    "krein_roundtrip",
    "regularize_idempotent",
    "measure_additivity",
    "ac_lemmas",
)

HERGLOTZ_TOL = 1e-10
SYMMETRY_TOL = 1e-10
ROUNDTRIP_TOL = 1e-10
IDEMPOTENT_TOL = 1e-8
ADDITIVITY_TOL = 1e-12


def _builtin_models() -> dict[str, NevanlinnaFunction]:
    diag = HermitianMatrix.diagonal
    base3 = SqrtModel(diag([0.0, 1.0, 4.0]))
    atom = HermitianMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    density = HermitianMatrix(0.3 * np.eye(2))
    measure = OperatorMeasure(2, atoms=[(0.0, atom)], ac_pieces=[(0.0, 2.0, density)])
    return {
        "sqrt": base3,
        "reg_sqrt": RegularizedSqrtModel(diag([0.0, 1.0, 4.0])),
        "krein_sl": KreinModelSL(diag([1.0, 4.0])),
        "neumann_sl": NeumannModelSL(diag([1.0, 4.0])),
        "integral": IntegralModel(diag([0.5, -0.5]), diag([1.0, 0.25]), measure),
        "krein": KreinTransform(diag([1.0, -1.0]), SqrtModel(diag([0.0, 1.0]))),
        "conj": Conjugation(
            np.array([[1.0, 1.0], [0.0, 1.0]]),
            diag([1.0, 0.0]),
            SqrtModel(diag([0.0, 3.0])),
        ),
        "sandwich": Sandwich(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]]), base3),
        "sum": DirectSum((SqrtModel(diag([0.0])), KreinModelSL(diag([2.0])))),
    }


class _BranchFlipped(NevanlinnaFunction):
    """Wrong-branch wrapper: uses each half-plane's formula on the other."""

    __slots__ = ("_inner",)

    def __init__(self, inner: NevanlinnaFunction):
        self._inner = inner

    @property
    def dim(self) -> int:
        return self._inner.dim

    def _eval_upper(self, z: complex) -> np.ndarray:
        return self._inner._eval_lower(z)

    def _eval_lower(self, z: complex) -> np.ndarray:
        return self._inner._eval_upper(z)

    def singular_points(self) -> tuple[float, ...]:
        return self._inner.singular_points()

    def _to_json(self) -> dict:
        raise ValidationError("branch-flipped models are not serializable")


@dataclass(frozen=True, eq=False)
class CheckResult:
    check: str
    passed: bool
    residual: float
    cases: int
    note: str = ""

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "residual": self.residual,
            "cases": self.cases,
            "note": self.note,
        }


@dataclass(frozen=True, eq=False)
class VerifyReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"checks": [c.to_json() for c in self.checks], "passed": self.passed}


def builtin_model_names() -> list[str]:
    return list(_builtin_models())


def default_bundle() -> dict:
    return {
        "seed": 7,
        "samples": 200,
        "models": builtin_model_names(),
        "checks": list(CHECKS),
        "inject": None,
    }


def _resolve_models(spec) -> list[tuple[str, NevanlinnaFunction]]:
    registry = _builtin_models()
    if spec is None:
        return list(registry.items())
    if not isinstance(spec, list):
        raise ValidationError("bundle models must be a list of names or nodes")
    out = []
    for k, entry in enumerate(spec):
        if isinstance(entry, str):
            if entry not in registry:
                raise ValidationError(f"unknown builtin model {entry!r}; choose from {sorted(registry)}")
            out.append((entry, registry[entry]))
        elif isinstance(entry, dict):
            out.append((f"node[{k}]", node_from_json(entry)))
        else:
            raise ValidationError(f"bundle model {k} must be a name or a node object")
    return out


def _resolve_checks(spec) -> list[str]:
    if spec is None:
        return list(CHECKS)
    if not isinstance(spec, list):
        raise ValidationError("bundle checks must be a list of check names")
    for name in spec:
        if name not in CHECKS:
            raise ValidationError(f"unknown check {name!r}; choose from {list(CHECKS)}")
    return list(spec)


def _sample_z(rng: np.random.Generator) -> complex:
    return complex(rng.uniform(-6.0, 6.0), 10.0 ** rng.uniform(-2.0, 0.5))


def _check_herglotz(models, rng, samples) -> CheckResult:
    worst = 0.0
    for _, f in models:
        for _ in range(samples):
            margin = herglotz_margin(f, _sample_z(rng))
            worst = max(worst, -min(margin, 0.0))
    return CheckResult("herglotz", worst <= HERGLOTZ_TOL, worst, len(models) * samples)


def _check_symmetry(models, rng, samples) -> CheckResult:
    worst = 0.0
    for _, f in models:
        for _ in range(samples):
            worst = max(worst, symmetry_check(f, _sample_z(rng)))
    return CheckResult("symmetry", worst <= SYMMETRY_TOL, worst, len(models) * samples)


def _check_krein_roundtrip(models, rng, samples) -> CheckResult:
    worst = 0.0
    cases = 0
    for _, f in models:
        b = HermitianMatrix.diagonal([(1.0 + k) * (-1.0) ** k for k in range(f.dim)])
        mb = KreinTransform(b, f)
        for _ in range(samples):
            z = _sample_z(rng)
            lhs = b.mat - evaluate(f, z)
            prod = lhs @ evaluate(mb, z)
            scale = 1.0 + fro_norm(lhs) * fro_norm(evaluate(mb, z))
            worst = max(worst, fro_norm(prod - np.eye(f.dim)) / scale)
            cases += 1
    return CheckResult("krein_roundtrip", worst <= ROUNDTRIP_TOL, worst, cases)


def _check_regularize_idempotent(models) -> CheckResult:
    worst = 0.0
    for _, f in models:
        reg, _, _ = regularize(f)
        _, r2, q2 = regularize(reg)
        worst = max(worst, fro_norm(r2 - np.eye(f.dim)), fro_norm(q2.mat))
    return CheckResult("regularize_idempotent", worst <= IDEMPOTENT_TOL, worst, len(models))


def _random_measure(rng: np.random.Generator) -> OperatorMeasure:
    dim = int(rng.integers(1, 4))

    def psd() -> HermitianMatrix:
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return HermitianMatrix(a @ a.conj().T)

    atoms = [(float(rng.uniform(-5.0, 5.0)) + 0.01 * k, psd()) for k in range(int(rng.integers(0, 3)))]
    pieces = []
    edge = float(rng.uniform(-5.0, 0.0))
    for _ in range(int(rng.integers(1, 4))):
        width = float(rng.uniform(0.1, 2.0))
        pieces.append((edge, edge + width, psd()))
        edge += width + float(rng.uniform(0.0, 1.0))
    return OperatorMeasure(dim, atoms=atoms, ac_pieces=pieces)


def _check_measure_additivity(rng, samples) -> CheckResult:
    worst = 0.0
    for _ in range(samples):
        m = _random_measure(rng)
        cut = float(rng.uniform(-6.0, 6.0))
        left = IntervalSet([(-10.0, cut, True, False)])
        right = IntervalSet([(cut, 10.0, True, True)])
        whole = IntervalSet.closed(-10.0, 10.0)
        total = evaluate_measure(m, whole).mat
        split = evaluate_measure(m, left).mat + evaluate_measure(m, right).mat
        worst = max(worst, fro_norm(total - split))
    return CheckResult("measure_additivity", worst <= ADDITIVITY_TOL, worst, samples)


def _random_interval_family(rng: np.random.Generator) -> list[IntervalSet]:
    parts = []
    for _ in range(int(rng.integers(1, 21))):
        a = float(rng.uniform(-10.0, 10.0))
        kind = int(rng.integers(0, 4))
        if kind == 0:
            parts.append(IntervalSet.point(a))
        else:
            b = a + float(rng.uniform(0.0, 3.0))
            cl, cr = bool(rng.integers(0, 2)), bool(rng.integers(0, 2))
            parts.append(IntervalSet([(a, b, cl or a == b, cr or a == b)]))
    return parts


def _check_ac_lemmas(rng, samples) -> CheckResult:
    worst = 0.0
    ok = True
    for _ in range(samples):
        parts = _random_interval_family(rng)
        whole = IntervalSet.empty()
        for p in parts:
            whole = whole.union(p)
        report = verify_ac_lemmas(whole, parts)
        worst = max(worst, report.leftover_measure)
        ok = ok and report.passed
    return CheckResult("ac_lemmas", ok and worst == 0.0, worst, samples)


def verify_suite(bundle: dict | None = None) -> VerifyReport:
    """Run the requested invariant checks and aggregate pass/fail with the
    worst residual per check."""
    bundle = dict(bundle or default_bundle())
    extra = set(bundle) - {"seed", "samples", "models", "checks", "inject"}
    if extra:
        raise ValidationError(f"unknown keys in bundle: {sorted(extra)}")
    seed = bundle.get("seed", 7)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError(f"bundle seed must be a non-negative integer, got {seed!r}")
    samples = bundle.get("samples", 200)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1:
        raise ValidationError(f"bundle samples must be a positive integer, got {samples!r}")
    inject = bundle.get("inject")
    if inject not in (None, "branch-flip"):
        raise ValidationError(f'bundle inject must be null or "branch-flip", got {inject!r}')

    models = _resolve_models(bundle.get("models"))
    checks = _resolve_checks(bundle.get("checks"))
    if inject == "branch-flip":
        models = [(name, _BranchFlipped(f)) for name, f in models]

    rng = np.random.default_rng(seed)
    results = []
    for name in checks:
        try:
            if name == "herglotz":
                results.append(_check_herglotz(models, rng, samples))
            elif name == "symmetry":
                results.append(_check_symmetry(models, rng, samples))
            elif name == "krein_roundtrip":
                results.append(_check_krein_roundtrip(models, rng, samples))
            elif name == "regularize_idempotent":
                results.append(_check_regularize_idempotent(models))
            elif name == "measure_additivity":
                results.append(_check_measure_additivity(rng, samples))
            elif name == "ac_lemmas":
                results.append(_check_ac_lemmas(rng, samples))
        except NumericalError as exc:
            results.append(CheckResult(name, False, math.inf, 0, note=f"check raised: {exc}"))
    return VerifyReport(checks=tuple(results))
