"""Report building and rendering.

run() executes a validated scene and returns a Report; render_report() turns
it into JSON or CSV text. Rendering is byte-reproducible: fixed key order,
shortest round-trip decimals for floats, warnings always listed, and nothing
environment-dependent (no paths, no thread counts, no timestamps). JSON
renders non-finite floats as null; CSV renders them as nan/inf.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from weylkit._version import __version__
from weylkit.errors import ValidationError
from weylkit.intervals import IntervalSet, verify_ac_lemmas
from weylkit.linalg import matrix_to_json
from weylkit.measures import measure_to_json
from weylkit.nevanlinna import (
    boundary_limit,
    evaluate,
    multiplicity_profile,
    stieltjes_invert,
    support_set,
)
from weylkit.scene import Scene
from weylkit.transforms import compare_extensions
from weylkit.verify import CHECKS, builtin_model_names, verify_suite


@dataclass(frozen=True, eq=False)
class Report:
    """Task echo, resolved configuration, result payload, warnings, version."""

    task: str
    config: dict
    result: dict
    warnings: tuple[str, ...]
    version: str = __version__

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "version": self.version,
            "config": self.config,
            "warnings": list(self.warnings),
            "result": self.result,
        }


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_bool(b) -> str:
    return "true" if b else "false"


def _limit_config_echo(config) -> dict:
    return {
        "y0": config.y0,
        "ratio": config.ratio,
        "limit_tol": config.limit_tol,
        "max_steps": config.max_steps,
    }


def _kernel_warnings(scene: Scene) -> list[str]:
    if scene.sl is None or scene.sl_extension != "krein":
        return []
    eigs = scene.sl.t.decomposition.eigenvalues
    kdim = int(np.count_nonzero(np.abs(eigs) <= 1e-10))
    if kdim == 0:
        return []
    return [
        f"krein extension kernel: dim {kdim} pure-point mass at t=0, "
        "flagged only and not part of the ac measure"
    ]


def _scan_warnings(grid, d, excluded, excl_eps) -> list[str]:
    excluded_set = set(excluded)
    out = [
        f"excluded: t={_fmt(grid[i])} within excl_eps={_fmt(excl_eps)} of a declared singular point"
        for i in excluded
    ]
    out += [
        f"non-convergence: t={_fmt(grid[i])}, d reported as -1"
        for i in range(len(grid))
        if d[i] < 0 and i not in excluded_set
    ]
    return out


def _run_eval(scene: Scene):
    z = scene.params["z"]
    value = evaluate(scene.model, z)
    config = {"z": [z.real, z.imag]}
    result = {"dim": scene.model.dim, "value": matrix_to_json(value)}
    return config, result, _kernel_warnings(scene)


def _run_limit(scene: Scene):
    t = scene.params["t"]
    cfg = scene.params["config"]
    bl = boundary_limit(scene.model, t, config=cfg)
    config = {"t": t, **_limit_config_echo(cfg)}
    result = {
        "value": matrix_to_json(bl.value),
        "converged": bl.converged,
        "last_delta": bl.last_delta,
        "y_used": [float(y) for y in bl.y_used],
    }
    warnings = _kernel_warnings(scene)
    if not bl.converged:
        warnings.append(f"non-convergence: boundary limit at t={_fmt(t)} did not settle")
    return config, result, warnings


def _scan_config(scene: Scene) -> dict:
    p = scene.params
    a, b = p["window"]
    return {
        "window": [a, b],
        "grid_points": p["grid_points"],
        **_limit_config_echo(p["config"]),
        "rank_tol": p["rank_tol"],
        "excl_eps": p["excl_eps"],
    }


def _profile_payload(prof) -> dict:
    return {
        "grid": [float(t) for t in prof.grid],
        "d": [int(v) for v in prof.d],
        "converged": [bool(v) for v in prof.converged],
        "excluded": list(prof.excluded),
    }


def _run_multiplicity(scene: Scene):
    p = scene.params
    a, b = p["window"]
    grid = np.linspace(a, b, p["grid_points"])
    prof = multiplicity_profile(
        scene.model, grid, config=p["config"], rank_tol=p["rank_tol"], excl_eps=p["excl_eps"]
    )
    warnings = _kernel_warnings(scene) + _scan_warnings(prof.grid, prof.d, prof.excluded, p["excl_eps"])
    return _scan_config(scene), _profile_payload(prof), warnings


def _run_spectrum(scene: Scene):
    p = scene.params
    a, b = p["window"]
    grid = np.linspace(a, b, p["grid_points"])
    h = (b - a) / (p["grid_points"] - 1)
    prof = multiplicity_profile(
        scene.model, grid, config=p["config"], rank_tol=p["rank_tol"], excl_eps=p["excl_eps"]
    )
    spectrum = support_set(prof, h).intersect(IntervalSet.closed(a, b))
    result = {"spectrum": spectrum.to_json(), **_profile_payload(prof)}
    warnings = _kernel_warnings(scene) + _scan_warnings(prof.grid, prof.d, prof.excluded, p["excl_eps"])
    return _scan_config(scene), result, warnings


def _run_invert(scene: Scene):
    p = scene.params
    a, b = p["window"]
    cells = p["cells"]
    edges = np.linspace(a, b, cells + 1)
    inv = stieltjes_invert(scene.model, edges, config=p["config"])
    mids = 0.5 * (edges[:-1] + edges[1:])
    config = {"window": [a, b], "cells": cells, **_limit_config_echo(p["config"])}
    result = {
        "edges": [float(e) for e in edges],
        "omitted": list(inv.omitted),
        "measure": measure_to_json(inv.measure),
    }
    warnings = _kernel_warnings(scene)
    warnings += [
        f"omitted cell {k}: boundary limit did not converge at t={_fmt(mids[k])}"
        for k in inv.omitted
    ]
    return config, result, warnings


def _run_compare(scene: Scene):
    p = scene.params
    verdict = compare_extensions(
        scene.model,
        p["side1"],
        p["side2"],
        p["window"],
        grid_points=p["grid_points"],
        config=p["config"],
        rank_tol=p["rank_tol"],
        excl_eps=p["excl_eps"],
    )
    warnings = _kernel_warnings(scene)
    warnings += [
        f"excluded: t={_fmt(verdict.grid[i])} within excl_eps={_fmt(p['excl_eps'])} of a declared singular point"
        for i in verdict.excluded
    ]
    excluded_set = set(verdict.excluded)
    warnings += [
        f"non-convergence: t={_fmt(verdict.grid[i])} on side {side}"
        for side, d in (("1", verdict.d1), ("2", verdict.d2))
        for i in range(len(verdict.grid))
        if d[i] < 0 and i not in excluded_set
    ]
    return _scan_config(scene), verdict.to_json(), warnings


def _run_verify(scene: Scene):
    p = scene.params
    bundle = {"seed": p["seed"], "samples": p["samples"]}
    if p["models"] is not None:
        bundle["models"] = p["models"]
    if p["checks"] is not None:
        bundle["checks"] = p["checks"]
    if p["inject"] is not None:
        bundle["inject"] = p["inject"]
    rep = verify_suite(bundle)
    config = {
        "seed": p["seed"],
        "samples": p["samples"],
        "models": p["models"] if p["models"] is not None else builtin_model_names(),
        "checks": p["checks"] if p["checks"] is not None else list(CHECKS),
        "inject": p["inject"],
    }
    warnings = [
        f"check failed: {c.check} (residual {_fmt(c.residual)})" for c in rep.checks if not c.passed
    ]
    return config, rep.to_json(), warnings


def _run_acset(scene: Scene):
    a = scene.params["set"]
    parts = scene.params["parts"]
    lemmas = verify_ac_lemmas(a, parts)
    config = {"parts": len(parts) if parts is not None else None}
    result = {
        "input": a.to_json(),
        "closure_ac": a.closure_ac().to_json(),
        "measure": a.measure(),
        "lemmas": {
            "leftover_measure": lemmas.leftover_measure,
            "support_lemma_ok": lemmas.support_lemma_ok,
            "union_closure_equal": lemmas.union_closure_equal,
            "passed": lemmas.passed,
            "lhs": lemmas.lhs.to_json(),
            "rhs": lemmas.rhs.to_json(),
        },
    }
    warnings = [] if lemmas.passed else ["ac-closure lemma check failed"]
    return config, result, warnings


_HANDLERS = {
    "eval": _run_eval,
    "limit": _run_limit,
    "spectrum": _run_spectrum,
    "multiplicity": _run_multiplicity,
    "invert": _run_invert,
    "compare": _run_compare,
    "verify": _run_verify,
    "acset": _run_acset,
}


def run(scene: Scene) -> Report:
    """Execute a validated scene and assemble its report."""
    config, result, warnings = _HANDLERS[scene.task](scene)
    return Report(task=scene.task, config=config, result=result, warnings=tuple(warnings))


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def render_json(report: Report) -> str:
    return json.dumps(_sanitize(report.to_json()), indent=2) + "\n"


def _csv_quote(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _interval_text(piece) -> str:
    a, b, cl, cr = piece["a"], piece["b"], piece["cl"], piece["cr"]

    def end(v):
        return v if isinstance(v, str) else _fmt(v)

    return ("[" if cl else "(") + end(a) + ", " + end(b) + ("]" if cr else ")")


def _head_lines(report: Report) -> list[str]:
    lines = [f"# task: {report.task}", f"# version: {report.version}"]
    lines.append("# config: " + json.dumps(_sanitize(report.config)))
    lines += [f"# warning: {w}" for w in report.warnings]
    return lines


def _value_rows(value_json: dict) -> list[str]:
    if "dim" in value_json:
        rows = cols = value_json["dim"]
    else:
        rows, cols = value_json["rows"], value_json["cols"]
    lines = ["row,col,re,im"]
    for k, (re, im) in enumerate(value_json["entries"]):
        lines.append(f"{k // cols},{k % cols},{_fmt(re)},{_fmt(im)}")
    return lines


def _profile_rows(result: dict, d_key: str = "d") -> list[str]:
    excluded = set(result["excluded"])
    lines = ["t,d,converged,excluded"]
    for i, t in enumerate(result["grid"]):
        lines.append(
            f"{_fmt(t)},{result[d_key][i]},{_fmt_bool(result['converged'][i])},{_fmt_bool(i in excluded)}"
        )
    return lines


def render_csv(report: Report) -> str:
    lines = _head_lines(report)
    task = report.task
    r = report.result
    if task == "eval":
        lines += _value_rows(r["value"])
    elif task == "limit":
        lines.append(f"# converged: {_fmt_bool(r['converged'])}")
        lines.append(f"# last_delta: {_fmt(r['last_delta'])}")
        lines += _value_rows(r["value"])
    elif task == "multiplicity":
        lines += _profile_rows(r)
    elif task == "spectrum":
        lines += [f"# interval: {_interval_text(p)}" for p in r["spectrum"]["intervals"]]
        lines += _profile_rows(r)
    elif task == "invert":
        dim = r["measure"]["dim"]
        header = ["t"]
        for i in range(dim):
            for j in range(dim):
                header += [f"m{i}{j}_re", f"m{i}{j}_im"]
        lines.append(",".join(header))
        for piece in r["measure"]["ac"]:
            t = 0.5 * (piece["a"] + piece["b"])
            cells = [_fmt(t)]
            for re, im in piece["density"]["entries"]:
                cells += [_fmt(re), _fmt(im)]
            lines.append(",".join(cells))
    elif task == "compare":
        lines.append(f"# verdict: {r['verdict']}")
        excluded = set(r["excluded"])
        lines.append("t,d1,d2,excluded")
        for i, t in enumerate(r["grid"]):
            lines.append(f"{_fmt(t)},{r['d1'][i]},{r['d2'][i]},{_fmt_bool(i in excluded)}")
    elif task == "verify":
        lines.append("check,passed,residual,cases,note")
        for c in r["checks"]:
            lines.append(
                f"{c['check']},{_fmt_bool(c['passed'])},{_fmt(c['residual'])},{c['cases']},{_csv_quote(c['note'])}"
            )
    elif task == "acset":
        lines.append(f"# measure: {_fmt(r['measure'])}")
        lines.append(f"# lemmas_passed: {_fmt_bool(r['lemmas']['passed'])}")
        lines.append("a,b,closed_left,closed_right")
        for p in r["closure_ac"]["intervals"]:
            a = p["a"] if isinstance(p["a"], str) else _fmt(p["a"])
            b = p["b"] if isinstance(p["b"], str) else _fmt(p["b"])
            lines.append(f"{a},{b},{_fmt_bool(p['cl'])},{_fmt_bool(p['cr'])}")
    else:
        raise ValidationError(f"no CSV layout for task {task!r}")
    return "\n".join(lines) + "\n"


def render_report(report: Report, fmt: str) -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    raise ValidationError(f"unknown report format {fmt!r}")
