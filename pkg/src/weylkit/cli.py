"""Command-line surface: one subcommand per task, scene files as input.

Flags override the matching scene parameters; the report goes to the scene's
output path, the --output flag, or stdout. Exit codes: 0 success, 2 for
validation/schema problems, 3 for numerical failures (including a failed
verification run).
"""
from __future__ import annotations

import argparse
import sys

from weylkit._version import __version__
from weylkit.errors import NumericalError, ValidationError
from weylkit.report import Report, render_report, run
from weylkit.scene import Scene, TASKS, load_raw, parse_scene

_TASK_HELP = {
    "eval": "evaluate the model at one complex point",
    "limit": "boundary value at t on the real line",
    "spectrum": "ac spectrum and multiplicity profile on a window",
    "multiplicity": "multiplicity profile d(t) on a window",
    "invert": "recover the spectral density on a window of cells",
    "compare": "classify two extensions on a window",
    "verify": "run the invariant check bundle",
    "acset": "interval-set closure and lemma checks",
}

_FLOAT_FLAGS = {
    "eval": (),
    "limit": ("y0", "ratio", "limit_tol"),
    "spectrum": ("y0", "ratio", "limit_tol", "rank_tol", "excl_eps"),
    "multiplicity": ("y0", "ratio", "limit_tol", "rank_tol", "excl_eps"),
    "invert": ("y0", "ratio", "limit_tol"),
    "compare": ("y0", "ratio", "limit_tol", "rank_tol", "excl_eps"),
    "verify": (),
    "acset": (),
}

_INT_FLAGS = {
    "eval": (),
    "limit": ("max_steps",),
    "spectrum": ("grid_points", "max_steps"),
    "multiplicity": ("grid_points", "max_steps"),
    "invert": ("cells", "max_steps"),
    "compare": ("grid_points", "max_steps"),
    "verify": ("seed", "samples"),
    "acset": (),
}

_WINDOW_TASKS = ("spectrum", "multiplicity", "invert", "compare")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weylkit",
        description="matrix Herglotz function reports: boundary values, spectra, extension comparison",
    )
    parser.add_argument("--version", action="version", version=f"weylkit {__version__}")
    sub = parser.add_subparsers(dest="task", required=True, metavar="task")
    for task in TASKS:
        p = sub.add_parser(task, help=_TASK_HELP[task])
        p.add_argument("--scene", help="scene file (JSON)" + ("" if task == "verify" else ", required"))
        p.add_argument("--output", help="report path (default: scene output.path, else stdout)")
        p.add_argument("--format", choices=("json", "csv"), help="report format (default: scene, else json)")
        p.add_argument("--plot", help="also render a figure to this path")
        if task == "eval":
            p.add_argument("--z", nargs=2, type=float, metavar=("RE", "IM"), help="evaluation point")
        if task == "limit":
            p.add_argument("--t", type=float, help="real boundary point")
        if task in _WINDOW_TASKS:
            p.add_argument("--window", nargs=2, type=float, metavar=("A", "B"), help="scan window")
        for name in _FLOAT_FLAGS[task]:
            p.add_argument(f"--{name.replace('_', '-')}", type=float, dest=name)
        for name in _INT_FLAGS[task]:
            p.add_argument(f"--{name.replace('_', '-')}", type=int, dest=name)
        if task == "verify":
            p.add_argument("--inject", choices=("branch-flip",), help="negative-control injection")
    return parser


def _scene_from_args(args: argparse.Namespace) -> Scene:
    if args.scene is not None:
        raw = load_raw(args.scene)
        if isinstance(raw, dict) and "task" not in raw:
            raw["task"] = args.task
        if isinstance(raw, dict) and raw.get("task") != args.task:
            raise ValidationError(
                f"scene task {raw.get('task')!r} does not match subcommand {args.task!r}"
            )
    elif args.task == "verify":
        raw = {"task": "verify"}
    else:
        raise ValidationError(f"task {args.task} needs --scene")

    if not isinstance(raw, dict):
        raise ValidationError("scene must be a JSON object")
    params = raw.setdefault("params", {})
    if isinstance(params, dict):
        if getattr(args, "z", None) is not None:
            params["z"] = [args.z[0], args.z[1]]
        if getattr(args, "t", None) is not None:
            params["t"] = args.t
        if getattr(args, "window", None) is not None:
            params["window"] = [args.window[0], args.window[1]]
        for name in _FLOAT_FLAGS[args.task] + _INT_FLAGS[args.task]:
            value = getattr(args, name, None)
            if value is not None:
                params[name] = value
        if getattr(args, "inject", None) is not None:
            params["inject"] = args.inject
    output = raw.setdefault("output", {})
    if isinstance(output, dict):
        if args.output is not None:
            output["path"] = args.output
        if args.format is not None:
            output["format"] = args.format
        if args.plot is not None:
            output["plot"] = args.plot
    return parse_scene(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scene = _scene_from_args(args)
        report = run(scene)
        text = render_report(report, scene.output_format)
        if scene.output_path is None:
            sys.stdout.write(text)
        else:
            with open(scene.output_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        if scene.plot_path is not None:
            from weylkit.plotting import render_plot

            render_plot(report, scene.plot_path)
    except ValidationError as exc:
        print(f"weylkit: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"weylkit: numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"weylkit: error: cannot write output: {exc}", file=sys.stderr)
        return 2
    if scene.task == "verify" and not report.result["passed"]:
        print("weylkit: verification failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
