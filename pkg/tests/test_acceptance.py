"""Acceptance gate: every advertised guarantee of the package, each pinned at
its stated tolerance and reported as one CRITERION line."""
from __future__ import annotations

import json
import math
import time

import numpy as np

from conftest import random_hermitian, random_psd, random_unitary
from weylkit.intervals import IntervalSet, verify_ac_lemmas
from weylkit.linalg import HermitianMatrix, fro_norm
from weylkit.measures import OperatorMeasure
from weylkit.nevanlinna import (
    IntegralModel,
    KreinModelSL,
    LimitConfig,
    NeumannModelSL,
    RegularizedSqrtModel,
    SqrtModel,
    evaluate,
    multiplicity_profile,
    stieltjes_invert,
)
from weylkit.report import render_report, run
from weylkit.scene import parse_scene
from weylkit.sturm_liouville import (
    SLModel,
    friedrichs_profile,
    gamma_gram,
    krein_parameter,
    krein_weyl,
    normal_bound_check,
    re_im_sqrt_shift,
    regularized_weyl,
    weyl,
)
from weylkit.transforms import (
    SelfAdjointRelation,
    compare_extensions,
    direct_sum,
    krein_transform,
    regularize,
)
from weylkit.verify import verify_suite


def H(*vals: float) -> HermitianMatrix:
    return HermitianMatrix.diagonal(list(vals))


def _report(k: int, ok: bool, detail: str) -> None:
    print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {k}: {detail}"


def test_criterion_01_friedrichs_spectrum():
    start = time.monotonic()
    rng = np.random.default_rng(101)
    mats = [np.diag([1.0, 4.0]).astype(complex)]
    for _ in range(10):
        mats.append(random_psd(rng, int(rng.integers(1, 9)), scale=2.0))
    ok = True
    for t_mat in mats:
        lams = np.linalg.eigvalsh(t_mat)
        t0 = float(lams[0])
        a, b = t0 - 1.0, t0 + 10.0
        h = (b - a) / 200
        spectrum, prof = friedrichs_profile(SLModel(HermitianMatrix(t_mat)), (a, b))
        pieces = spectrum.pieces
        ok = ok and len(pieces) == 1
        if pieces:
            lo, hi, cl, cr = pieces[0]
            ok = ok and abs(lo - t0) <= h + 1e-12 and hi == b and cl and cr
        skip = set(prof.excluded)
        for i, t in enumerate(prof.grid):
            if i in skip:
                continue
            ok = ok and prof.d[i] == int(np.sum(lams < t))
    elapsed = time.monotonic() - start
    _report(1, ok and elapsed < 10.0, f"11 models, integer-exact d, {elapsed:.2f}s")


def test_criterion_02_deficiency_gram_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(50):
        m = SLModel(HermitianMatrix(random_psd(rng, int(rng.integers(1, 9)), scale=2.0)))
        z = complex(rng.uniform(-5, 5), 10.0 ** rng.uniform(-1.5, 0.5))
        zeta = complex(rng.uniform(-5, 5), 10.0 ** rng.uniform(-1.5, 0.5))
        _, residual = gamma_gram(m, z, zeta)
        worst = max(worst, residual)
    _report(2, worst <= 1e-10, f"50 triples, worst difference-identity residual {worst:.3e}")


def test_criterion_03_closed_form_cross_checks():
    rng = np.random.default_rng(103)
    mats = [np.diag([1.0, 4.0]).astype(complex), np.zeros((2, 2), dtype=complex)]
    mats += [random_psd(rng, int(rng.integers(1, 7)), scale=2.0) for _ in range(3)]

    worst_parts = 0.0
    for t_mat in mats:
        vals, vecs = np.linalg.eigh(t_mat)
        root = vecs @ np.diag(np.sqrt(1j - vals)) @ vecs.conj().T
        re_c, im_c = re_im_sqrt_shift(SLModel(HermitianMatrix(t_mat)))
        worst_parts = max(
            worst_parts,
            fro_norm(re_c.mat - 0.5 * (root + root.conj().T)),
            fro_norm(im_c.mat - (root - root.conj().T) / 2j),
        )

    worst_reg = 0.0
    for t_mat in mats:
        m = SLModel(HermitianMatrix(t_mat))
        direct = regularized_weyl(m)
        built, _, _ = regularize(weyl(m))
        for _ in range(20):
            z = complex(rng.uniform(-5, 5), 10.0 ** rng.uniform(-1.5, 0.5))
            worst_reg = max(worst_reg, fro_norm(evaluate(built, z) - evaluate(direct, z)))

    profiles_ok = True
    usable_total = 0
    for t_mat in [np.diag([1.0, 4.0]).astype(complex), np.diag([0.0, 2.0, 5.0]).astype(complex),
                  random_psd(rng, 3, scale=2.0)]:
        m = SLModel(HermitianMatrix(t_mat))
        t0 = float(np.linalg.eigvalsh(t_mat)[0])
        grid = np.linspace(t0 + 0.25, t0 + 10.0, 40)
        via = multiplicity_profile(krein_transform(regularized_weyl(m), krein_parameter(m)), grid)
        direct = multiplicity_profile(krein_weyl(m), grid)
        skip = set(via.excluded) | set(direct.excluded)
        usable = [i for i in range(grid.size) if i not in skip and via.d[i] >= 0 and direct.d[i] >= 0]
        usable_total += len(usable)
        profiles_ok = profiles_ok and len(usable) >= 30
        profiles_ok = profiles_ok and all(via.d[i] == direct.d[i] for i in usable)

    ok = worst_parts <= 1e-10 and worst_reg <= 1e-9 and profiles_ok
    _report(3, ok, f"parts {worst_parts:.3e}, renormalized {worst_reg:.3e}, "
                   f"soft-wall profile agreement on {usable_total} points")


def test_criterion_04_extension_comparison():
    rng = np.random.default_rng(104)
    ok = True
    inconclusive = 0
    for _ in range(10):
        dim = int(rng.integers(2, 6))
        f = SqrtModel(HermitianMatrix(random_psd(rng, dim, scale=2.0)))
        t0 = min(f.singular_points())
        window = (t0 - 1.0, t0 + 10.0)
        b = HermitianMatrix(random_hermitian(rng, dim))
        v1 = compare_extensions(f, None, b, window, grid_points=101)
        ok = ok and v1.relation == "equivalent"
        inconclusive += v1.relation == "inconclusive"

        k = int(rng.integers(1, dim))
        theta = SelfAdjointRelation(dim, random_unitary(rng, dim)[:, :k],
                                    HermitianMatrix(random_hermitian(rng, k)))
        v2 = compare_extensions(f, None, theta, window, grid_points=101)
        ok = ok and v2.relation in ("equivalent", "first-subordinate",
                                    "second-subordinate", "incomparable")
        inconclusive += v2.relation == "inconclusive"
    _report(4, ok and inconclusive == 0,
            f"10 operator pairs equivalent, relation verdicts computed, {inconclusive} inconclusive")


def test_criterion_05_normal_function_bound():
    report = normal_bound_check(SLModel(H(0.0)), np.linspace(-12.0, 12.0, 50), [1.0, 0.1, 0.01])
    _report(5, report.passed and report.max_violation <= 0.0,
            f"50 grid points, 3 heights, max violation {report.max_violation:.4f}")


def test_criterion_06_stieltjes_round_trip():
    flat = OperatorMeasure(1, ac_pieces=[(0.0, 2.0, np.array([[0.5]]))])
    stepped = OperatorMeasure(
        2,
        atoms=[(5.0, np.diag([1.0, 0.0]))],
        ac_pieces=[(0.0, 1.0, np.diag([1.0, 0.25])),
                   (1.0, 2.0, np.array([[0.3, 0.1], [0.1, 0.3]]))],
    )
    models = [
        IntegralModel(np.zeros((1, 1)), np.zeros((1, 1)), flat),
        IntegralModel(np.diag([0.5, -0.5]), np.zeros((2, 2)), stepped),
    ]
    def density_at(measure: OperatorMeasure, t: float) -> np.ndarray:
        for a, b, w in measure.ac_pieces:
            if a <= t < b:
                return w.mat
        return np.zeros((measure.dim, measure.dim), dtype=complex)

    config = LimitConfig(y0=1e-3)
    edges = np.linspace(0.0, 2.0, 201)
    ok = True
    worst = 0.0
    for f in models:
        inv = stieltjes_invert(f, edges, config=config)
        ok = ok and inv.omitted == ()
        num = den = 0.0
        for a, b, w in inv.measure.ac_pieces:
            true = density_at(f.measure, 0.5 * (a + b))
            num += fro_norm(w.mat - true) * (b - a)
            den += fro_norm(true) * (b - a)
        rel = num / den
        worst = max(worst, rel)
        ok = ok and rel < 1e-2
    _report(6, ok, f"cell width 0.01, worst relative L1 error {worst:.3e}")


def test_criterion_07_direct_sum_laws():
    terms = [
        SqrtModel(H(0.0)),
        SqrtModel(H(1.0, 4.0)),
        KreinModelSL(H(2.0)),
        KreinModelSL(H(1.0, 3.0)),
        NeumannModelSL(H(0.5)),
        RegularizedSqrtModel(H(0.0, 2.0)),
        SqrtModel(H(5.0)),
        NeumannModelSL(H(2.5, 6.0)),
    ]
    fsum = direct_sum(terms, auto_regularize=True)
    at_i = fro_norm(evaluate(fsum, 1j) - 1j * np.eye(fsum.dim))

    grid = np.linspace(-1.0, 7.0, 33)
    total = multiplicity_profile(fsum, grid)
    parts = [multiplicity_profile(t, grid) for t in terms]
    skip = set(total.excluded)
    for p in parts:
        skip |= set(p.excluded)
    additive = True
    usable = 0
    for i in range(grid.size):
        if i in skip or total.d[i] < 0 or any(p.d[i] < 0 for p in parts):
            continue
        usable += 1
        additive = additive and total.d[i] == sum(int(p.d[i]) for p in parts)
    ok = at_i <= 1e-9 and additive and usable >= 20
    _report(7, ok, f"8 summands, |F(i)-iI| = {at_i:.3e}, d additive on {usable} points")


def test_criterion_08_ac_closure_lemmas():
    rng = np.random.default_rng(108)
    ok = True
    worst = 0.0
    for _ in range(500):
        parts = []
        for _k in range(int(rng.integers(1, 21))):
            a = float(rng.uniform(-10.0, 10.0))
            if rng.integers(0, 4) == 0:
                parts.append(IntervalSet.point(a))
            else:
                b = a + float(rng.uniform(0.0, 3.0))
                cl, cr = bool(rng.integers(0, 2)), bool(rng.integers(0, 2))
                parts.append(IntervalSet([(a, b, cl or a == b, cr or a == b)]))
        whole = IntervalSet.empty()
        for p in parts:
            whole = whole.union(p)
        rep = verify_ac_lemmas(whole, parts)
        worst = max(worst, rep.leftover_measure)
        ok = ok and rep.passed and rep.leftover_measure == 0.0
    _report(8, ok, f"500 families, worst leftover measure {worst!r}")


def test_criterion_09_herglotz_symmetry_suite():
    report = verify_suite({"seed": 7, "samples": 200, "models": None,
                           "checks": ["herglotz", "symmetry"], "inject": None})
    residuals = {c.check: c.residual for c in report.checks}
    ok = report.passed and all(r <= 1e-10 for r in residuals.values())
    _report(9, ok, f"all model nodes, 200 points each, residuals {residuals}")


_CORPUS = [
    {"task": "spectrum",
     "model": {"node": "sl", "T": {"dim": 2, "entries": [1, 0, 0, 4]}, "extension": "friedrichs"},
     "params": {"window": [0, 6], "grid_points": 41},
     "output": {"format": "csv"}},
    {"task": "invert",
     "model": {"node": "integral",
               "measure": {"dim": 1, "atoms": [],
                           "ac": [{"a": 0, "b": 2, "density": {"dim": 1, "entries": [0.5]}}]},
               "C0": {"dim": 1, "entries": [0]}, "C1": {"dim": 1, "entries": [0]}},
     "params": {"window": [0, 2], "cells": 20, "y0": 1e-3},
     "output": {"format": "json"}},
    {"task": "compare",
     "model": {"node": "sqrt", "T": {"dim": 2, "entries": [1, 0, 0, 4]}},
     "params": {"window": [0, 10], "grid_points": 31,
                "side2": {"B": {"dim": 2, "entries": [1, 0, 0, 1]}}},
     "output": {"format": "csv"}},
    {"task": "verify", "params": {"samples": 25}, "output": {"format": "json"}},
    {"task": "acset",
     "params": {"set": {"intervals": [{"a": 0, "b": 1, "cl": False, "cr": False},
                                      {"a": 1, "b": 2, "cl": False, "cr": False}]}},
     "output": {"format": "csv"}},
]


def test_criterion_10_determinism(monkeypatch):
    def render_all():
        out = []
        for scene in _CORPUS:
            parsed = parse_scene(json.loads(json.dumps(scene)))
            out.append(render_report(run(parsed), parsed.output_format).encode("utf-8"))
        return out

    runs = []
    for threads in (None, "1", "4", None):
        if threads is None:
            monkeypatch.delenv("WEYLKIT_THREADS", raising=False)
        else:
            monkeypatch.setenv("WEYLKIT_THREADS", threads)
        runs.append(render_all())
    ok = all(r == runs[0] for r in runs[1:])
    _report(10, ok, f"{len(_CORPUS)} scenes byte-identical over 4 runs and 3 thread settings")
