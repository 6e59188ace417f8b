"""Command-line front end.

Subcommands::

    hpz run --model M.json --out DIR [--steps N] [--seed S] [--grid-res R]
            [--samples P] [--emit csv|svg|both] [--check-containment K]
    hpz demo --fixture example1|pwna --out DIR [...]
    hpz ops-check [--trials T] [--seed S] [--grid-res R]

Errors are reported as one JSON object on stderr and a distinct exit code
per error class.
"""

import argparse
import json
import os
import sys
import time
from importlib import resources

from hpz.errors import ContainmentFailure, HPZError, OpsCheckFailure, OutputError
from hpz.fixtures import example1
from hpz.modelio import parse_model
from hpz.opscheck import OPERATIONS, format_table, run_suite
from hpz.reach import check_containment, reach
from hpz.sampling import DEFAULT_GRID_RES, DEFAULT_MAX_POINTS, sample
from hpz.svg import write_svg


def bundled_model_path():
    """Path of the bundled piecewise quadratic example model."""
    return str(resources.files("hpz") / "data" / "pwna.json")


def _outdir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as err:
        raise OutputError(f"{path}: {err.strerror}") from err
    return path


def _write_text(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as err:
        raise OutputError(f"{path}: {err.strerror}") from err


def cloud_csv(cloud, step):
    """CSV text of a cloud: ``step, x1..xn, leaf`` with round-trip precision."""
    n = cloud.points.shape[1]
    lines = [",".join(["step"] + [f"x{i + 1}" for i in range(n)] + ["leaf"])]
    for p, leaf in zip(cloud.points, cloud.leaf):
        lines.append(",".join([str(step)] + [format(float(v), ".17g") for v in p] + [str(int(leaf))]))
    return "\n".join(lines) + "\n"


def _guard_lines(model):
    if model.state_dim != 2:
        return []
    return [(l, r) for mode in model.modes for l, r in zip(mode.guard.L, mode.guard.rho)]


def _emit_flags(emit):
    return emit in ("csv", "both"), emit in ("svg", "both")


def _svg(path, layers, title, lines=()):
    try:
        write_svg(path, layers, title, lines)
    except OSError as err:
        raise OutputError(f"{path}: {err.strerror}") from err


def run_model(model, out, steps=None, seed=None, grid_res=None, samples=None, emit="csv", check=0):
    """Run reachability on ``model`` and write all artifacts under ``out``.

    Returns the diagnostics document that is also written to
    ``diagnostics.json``.
    """
    out = _outdir(out)
    csv, svg = _emit_flags(emit)
    t0 = time.perf_counter()
    result = reach(model, steps, grid_res, samples, seed)
    total = time.perf_counter() - t0
    lines = _guard_lines(model)
    for k, cloud in enumerate(result.clouds):
        if csv:
            _write_text(os.path.join(out, f"step_{k}.csv"), cloud_csv(cloud, k))
        if svg and model.state_dim == 2:
            _svg(os.path.join(out, f"step_{k}.svg"), [(f"R_{k}", cloud.points)], f"step {k}", lines)
    if svg and model.state_dim == 2:
        layers = [(f"R_{k}", c.points) for k, c in enumerate(result.clouds)]
        _svg(os.path.join(out, "overlay.svg"), layers, "reachable sets", lines)
    doc = {"steps": result.diagnostics, "total_time": total}
    if check:
        s = model.sampling or {}
        rep = check_containment(model, result, check, s.get("seed", 0) if seed is None else seed)
        cdoc = {
            "trajectories": rep.trajectories,
            "steps": rep.steps,
            "passed": rep.passed,
            "misses": [list(m) for m in rep.misses],
            "worst_residual": rep.worst_residual,
        }
        _write_text(os.path.join(out, "containment.json"), json.dumps(cdoc, indent=2) + "\n")
        doc["containment"] = {k: cdoc[k] for k in ("trajectories", "passed", "worst_residual")}
    _write_text(os.path.join(out, "diagnostics.json"), json.dumps(doc, indent=2) + "\n")
    if check and not rep.passed:
        raise ContainmentFailure(f"{len(rep.misses)} trajectory steps fell outside the reachable sets")
    return doc


def demo_example1(out, grid_res=None, samples=None, seed=0, emit="both"):
    """Clouds of the four reference sets (CPZ, HZ and the two HPZs)."""
    out = _outdir(out)
    csv, svg = _emit_flags(emit)
    summary = {}
    for name, Z in example1().items():
        cloud = sample(Z, grid_res or DEFAULT_GRID_RES, samples or DEFAULT_MAX_POINTS, seed)
        summary[name] = {"points": len(cloud), "nonempty_leaves": len(set(cloud.leaf.tolist()))}
        if csv:
            _write_text(os.path.join(out, f"{name}.csv"), cloud_csv(cloud, 0))
        if svg:
            _svg(os.path.join(out, f"{name}.svg"), [(name, cloud.points)], name)
    _write_text(os.path.join(out, "summary.json"), json.dumps(summary, indent=2) + "\n")
    return summary


def _cmd_run(args):
    model = parse_model(args.model)
    run_model(model, args.out, args.steps, args.seed, args.grid_res, args.samples, args.emit, args.check_containment)
    return 0


def _cmd_demo(args):
    if args.fixture == "example1":
        demo_example1(args.out, args.grid_res, args.samples, args.seed or 0, args.emit or "both")
    else:
        model = parse_model(bundled_model_path())
        run_model(
            model, args.out, args.steps, args.seed, args.grid_res, args.samples, args.emit or "both",
            args.check_containment,
        )
    return 0


def _cmd_ops_check(args):
    ops = args.ops.split(",") if args.ops else OPERATIONS
    reports = run_suite(args.trials, args.seed, args.grid_res, ops)
    print(format_table(reports))
    failed = [r.op for r in reports if not r.passed]
    if failed:
        raise OpsCheckFailure(f"failing operations: {', '.join(failed)}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hpz", description="Hybrid polynomial zonotope reachability")
    sub = p.add_subparsers(dest="command", required=True)

    def sampling_flags(q, emit_default):
        q.add_argument("--out", required=True, help="output directory")
        q.add_argument("--steps", type=int, help="override the model horizon")
        q.add_argument("--seed", type=int)
        q.add_argument("--grid-res", type=int, help="grid points per factor")
        q.add_argument("--samples", type=int, help="maximum grid points per leaf")
        q.add_argument("--emit", choices=("csv", "svg", "both"), default=emit_default)
        q.add_argument("--check-containment", type=int, default=0, metavar="K", help="simulate K trajectories")

    r = sub.add_parser("run", help="reachability for a model file")
    r.add_argument("--model", required=True)
    sampling_flags(r, "csv")
    r.set_defaults(func=_cmd_run)

    d = sub.add_parser("demo", help="bundled fixtures")
    d.add_argument("--fixture", choices=("example1", "pwna"), required=True)
    sampling_flags(d, None)
    d.set_defaults(func=_cmd_demo)

    o = sub.add_parser("ops-check", help="randomized operation suite against the oracle")
    o.add_argument("--trials", type=int, default=50)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--grid-res", type=int, default=3)
    o.add_argument("--ops", help="comma-separated subset of " + ",".join(OPERATIONS))
    o.set_defaults(func=_cmd_ops_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HPZError as err:
        doc = {"error": type(err).__name__, "message": str(err), "exit_code": err.exit_code}
        print(json.dumps(doc), file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
