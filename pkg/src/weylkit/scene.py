"""Scene files: one JSON object naming a model, a task, its parameters, and
where the report goes.

The schema is strict: unknown keys are rejected at every level, and every
diagnostic carries the offending field path (or the line/column for JSON
syntax errors) so a bad file fails before any computation starts.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from weylkit.errors import ValidationError
from weylkit.intervals import IntervalSet
from weylkit.linalg import DEFAULT_RANK_TOL, hermitian_from_json, matrix_from_json
from weylkit.nevanlinna import (
    DEFAULT_EXCL_EPS,
    LimitConfig,
    NevanlinnaFunction,
    node_from_json,
)
from weylkit.sturm_liouville import (
    SLModel,
    krein_weyl,
    neumann_weyl,
    regularized_weyl,
    weyl,
)
from weylkit.transforms import SelfAdjointRelation, relation_from_json

TASKS = ("eval", "limit", "spectrum", "multiplicity", "invert", "compare", "verify", "acset")
FORMATS = ("json", "csv")
SL_EXTENSIONS = ("friedrichs", "krein", "neumann", "regularized")

DEFAULT_GRID_POINTS = 201
DEFAULT_CELLS = 200
DEFAULT_VERIFY_SEED = 7
DEFAULT_VERIFY_SAMPLES = 200

_LIMIT_KEYS = ("y0", "ratio", "limit_tol", "max_steps")
_SCAN_KEYS = _LIMIT_KEYS + ("rank_tol", "excl_eps")

_PARAM_KEYS = {
    "eval": {"z"},
    "limit": {"t", *_LIMIT_KEYS},
    "spectrum": {"window", "grid_points", *_SCAN_KEYS},
    "multiplicity": {"window", "grid_points", *_SCAN_KEYS},
    "invert": {"window", "cells", *_LIMIT_KEYS},
    "compare": {"window", "grid_points", "side1", "side2", *_SCAN_KEYS},
    "verify": {"seed", "samples", "models", "checks", "inject"},
    "acset": {"set", "parts"},
}


@dataclass(frozen=True, eq=False)
class Scene:
    """A validated scene: parsed model, resolved parameters, output target."""

    task: str
    model: NevanlinnaFunction | None
    sl: SLModel | None
    sl_extension: str | None
    params: dict
    output_path: str | None
    output_format: str
    plot_path: str | None


def _require_object(obj: Any, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where} must be a JSON object, got {type(obj).__name__}")
    return obj


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ValidationError(f"unknown keys in {where}: {extra}")


def _finite_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(f"{where} must be finite, got {value!r}")
    return v


def _positive_int(value: Any, where: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{where} must be >= {minimum}, got {value}")
    return value


def _window(value: Any, where: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ValidationError(f"{where} must be a two-element array [a, b]")
    a = _finite_number(value[0], f"{where}[0]")
    b = _finite_number(value[1], f"{where}[1]")
    if not a < b:
        raise ValidationError(f"{where} must satisfy a < b, got [{a}, {b}]")
    return a, b


def _complex_pair(value: Any, where: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise ValidationError(f"{where} must be a two-element array [re, im]")
    return complex(_finite_number(value[0], f"{where}[0]"), _finite_number(value[1], f"{where}[1]"))


def limit_config_from(params: dict, where: str = "params") -> LimitConfig:
    """LimitConfig with scene overrides applied on top of the defaults."""
    kwargs = {}
    for key in ("y0", "ratio", "limit_tol"):
        if key in params:
            kwargs[key] = _finite_number(params[key], f"{where}.{key}")
    if "max_steps" in params:
        kwargs["max_steps"] = _positive_int(params["max_steps"], f"{where}.max_steps")
    try:
        return LimitConfig(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def scan_settings(params: dict, where: str = "params") -> dict:
    """Resolved scan parameters (window required) for grid-based tasks."""
    window = _window(params.get("window"), f"{where}.window")
    grid_points = _positive_int(params.get("grid_points", DEFAULT_GRID_POINTS), f"{where}.grid_points", minimum=2)
    rank_tol = _finite_number(params.get("rank_tol", DEFAULT_RANK_TOL), f"{where}.rank_tol")
    excl_eps = _finite_number(params.get("excl_eps", DEFAULT_EXCL_EPS), f"{where}.excl_eps")
    return {
        "window": window,
        "grid_points": grid_points,
        "config": limit_config_from(params, where),
        "rank_tol": rank_tol,
        "excl_eps": excl_eps,
    }


def model_from_json(obj: Any) -> tuple[NevanlinnaFunction, SLModel | None, str | None]:
    """Parse a model node; the half-line Schrodinger node resolves to one of
    its four extension Weyl functions and keeps the underlying model."""
    obj = _require_object(obj, "model")
    if obj.get("node") == "sl":
        _reject_unknown(obj, {"node", "T", "extension"}, "sl node")
        if "T" not in obj:
            raise ValidationError('sl node needs a "T" matrix')
        m = SLModel(hermitian_from_json(obj["T"], name="model.T"))
        extension = obj.get("extension", "friedrichs")
        if extension not in SL_EXTENSIONS:
            raise ValidationError(f"model.extension must be one of {list(SL_EXTENSIONS)}, got {extension!r}")
        builder = {
            "friedrichs": weyl,
            "krein": krein_weyl,
            "neumann": neumann_weyl,
            "regularized": regularized_weyl,
        }[extension]
        return builder(m), m, extension
    return node_from_json(obj), None, None


def side_from_json(obj: Any, where: str):
    """A comparison side: null for the reference extension, {"B": matrix} for
    a boundary parameter, {"relation": {...}} for a linear relation."""
    if obj is None:
        return None
    obj = _require_object(obj, where)
    if "B" in obj:
        _reject_unknown(obj, {"B"}, where)
        return hermitian_from_json(obj["B"], name=f"{where}.B")
    if "relation" in obj:
        _reject_unknown(obj, {"relation"}, where)
        try:
            return relation_from_json(obj["relation"])
        except ValidationError as exc:
            raise ValidationError(f"{where}.relation: {exc}") from exc
    raise ValidationError(f'{where} must be null or contain exactly one of "B" or "relation"')


def _validate_params(task: str, params: dict) -> dict:
    _reject_unknown(params, _PARAM_KEYS[task], "params")
    resolved: dict = {}
    if task == "eval":
        if "z" not in params:
            raise ValidationError('eval needs params.z = [re, im]')
        resolved["z"] = _complex_pair(params["z"], "params.z")
    elif task == "limit":
        if "t" not in params:
            raise ValidationError("limit needs params.t")
        resolved["t"] = _finite_number(params["t"], "params.t")
        resolved["config"] = limit_config_from(params)
    elif task in ("spectrum", "multiplicity"):
        resolved.update(scan_settings(params))
    elif task == "invert":
        resolved["window"] = _window(params.get("window"), "params.window")
        resolved["cells"] = _positive_int(params.get("cells", DEFAULT_CELLS), "params.cells")
        resolved["config"] = limit_config_from(params)
    elif task == "compare":
        resolved.update(scan_settings(params))
        resolved["side1"] = side_from_json(params.get("side1"), "params.side1")
        resolved["side2"] = side_from_json(params.get("side2"), "params.side2")
    elif task == "verify":
        resolved["seed"] = _positive_int(params.get("seed", DEFAULT_VERIFY_SEED), "params.seed", minimum=0)
        resolved["samples"] = _positive_int(params.get("samples", DEFAULT_VERIFY_SAMPLES), "params.samples")
        resolved["models"] = params.get("models")
        resolved["checks"] = params.get("checks")
        inject = params.get("inject")
        if inject is not None and inject != "branch-flip":
            raise ValidationError(f'params.inject must be null or "branch-flip", got {inject!r}')
        resolved["inject"] = inject
    elif task == "acset":
        if "set" not in params:
            raise ValidationError("acset needs params.set")
        try:
            resolved["set"] = IntervalSet.from_json(params["set"])
        except ValidationError as exc:
            raise ValidationError(f"params.set: {exc}") from exc
        parts = params.get("parts")
        if parts is not None:
            if not isinstance(parts, list):
                raise ValidationError("params.parts must be a list of interval sets")
            out = []
            for k, p in enumerate(parts):
                try:
                    out.append(IntervalSet.from_json(p))
                except ValidationError as exc:
                    raise ValidationError(f"params.parts[{k}]: {exc}") from exc
            resolved["parts"] = out
        else:
            resolved["parts"] = None
    return resolved


def parse_scene(obj: Any) -> Scene:
    """Validate a decoded scene object and resolve every default."""
    obj = _require_object(obj, "scene")
    _reject_unknown(obj, {"task", "model", "params", "output"}, "scene")
    task = obj.get("task")
    if task not in TASKS:
        raise ValidationError(f"task must be one of {list(TASKS)}, got {task!r}")

    model = sl = sl_extension = None
    if task in ("verify", "acset"):
        if "model" in obj:
            raise ValidationError(f"task {task} takes no model")
    else:
        if "model" not in obj:
            raise ValidationError(f"task {task} needs a model")
        model, sl, sl_extension = model_from_json(obj["model"])

    params = _require_object(obj.get("params", {}), "params")
    resolved = _validate_params(task, params)

    output = _require_object(obj.get("output", {}), "output")
    _reject_unknown(output, {"path", "format", "plot"}, "output")
    fmt = output.get("format", "json")
    if fmt not in FORMATS:
        raise ValidationError(f"output.format must be one of {list(FORMATS)}, got {fmt!r}")
    path = output.get("path")
    if path is not None and not isinstance(path, str):
        raise ValidationError("output.path must be a string")
    plot = output.get("plot")
    if plot is not None and not isinstance(plot, str):
        raise ValidationError("output.plot must be a string")

    return Scene(
        task=task,
        model=model,
        sl=sl,
        sl_extension=sl_extension,
        params=resolved,
        output_path=path,
        output_format=fmt,
        plot_path=plot,
    )


def decode_scene_text(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scene is not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc


def load_raw(path: str) -> Any:
    """Decoded but unvalidated scene object, for flag overrides before parsing."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read scene file {path!r}: {exc.strerror or exc}") from exc
    return decode_scene_text(text)


def parse_scene_text(text: str) -> Scene:
    return parse_scene(decode_scene_text(text))


def load_scene(path: str) -> Scene:
    return parse_scene(load_raw(path))
