"""Command-line entry point: ``anisocap <subcommand> [options]``.

Exit codes: 0 success, 1 a verification suite failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import lab
from .capacity import MODES, CapacityProblem, capacity_oracle, capacity_solve
from .config import ConfigError, RunConfig
from .geometry import STOCK_BODIES, MomentBody, Polygon, anisotropic_perimeter, load_body
from .grid import Grid, GridFunction, GridSet, ball, box, indicator, save, tent
from .kernel import KernelModel
from .perimeter import frac_perimeter, isoperimetric_ratio_rhs, limit_alpha0, limit_alpha1, seminorm_with_bound
from .report import ReportError, _canon, _fmt, emit_report, to_json

DEFAULT_LIMIT_ALPHAS = {"0": [0.1, 0.05, 0.025], "1": [0.8, 0.9, 0.95]}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p, alpha=True):
    p.add_argument("--config", help="JSON run configuration; explicit flags take precedence")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--body", help="stock body name or body JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="also write the JSON result to this path")
    if alpha:
        p.add_argument("--alpha", type=float)
    p.add_argument("--near-radius", type=int, dest="near_radius")
    p.add_argument("--subdiv", type=int)
    p.add_argument("--trunc-radius", type=float, dest="trunc_radius")


def _alpha_list(text):
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="anisocap", description="Anisotropic fractional perimeters and capacities on grids.")
    sub = ap.add_subparsers(dest="subcommand", parser_class=_Parser, required=True)

    p = sub.add_parser("perimeter", help="fractional perimeter of a set (or seminorm of a function)")
    _common(p)
    p.add_argument("--set", required=True, help="set/function JSON file or stock set name")
    p.add_argument("--limit", choices=["0", "1"], help="extrapolate alpha -> 0 or alpha -> 1 instead")
    p.add_argument("--alpha-list", type=_alpha_list, dest="alpha_list")

    p = sub.add_parser("limits", help="both alpha limits of the perimeter of a set")
    _common(p, alpha=False)
    p.add_argument("--set", required=True)
    p.add_argument("--limit", choices=["0", "1", "both"], default="both")
    p.add_argument("--alpha-list", type=_alpha_list, dest="alpha_list")

    p = sub.add_parser("capacity", help="capacity of a condenser by minimum cut")
    _common(p)
    p.add_argument("--set", required=True, help="condenser set JSON file or stock set name")
    p.add_argument("--mode", choices=MODES + ("first-order",), default="fractional")
    p.add_argument("--oracle", action="store_true", help="cross-check with the linear-programming oracle")
    p.add_argument("--pad", type=int)

    p = sub.add_parser("verify", help="run the inequality suites")
    _common(p, alpha=False)
    p.add_argument("--suite", action="append", choices=lab.SUITES, help="repeatable; default all")
    p.add_argument("--alpha-list", type=_alpha_list, dest="alpha_list")
    p.add_argument("--beta-list", type=_alpha_list, dest="beta_list")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--csv", help="write one CSV row per instance to this path")
    p.add_argument("--timing", action="store_true", help="include wall times in the JSON report")

    p = sub.add_parser("bodies", help="list or describe convex bodies")
    p.add_argument("--name", help="stock body name or body JSON file")
    p.add_argument("--info", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("generate", help="write a set or function file")
    p.add_argument("kind", choices=["ball", "box", "tent", "indicator"])
    p.add_argument("--body", default="square")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--lo", type=float, default=-1.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--height", type=float, default=1.0)
    p.add_argument("--levels", type=int)
    p.add_argument("--extent", type=int, default=128)
    p.add_argument("--half-width", type=float, default=2.0, dest="half_width")
    p.add_argument("--output", required=True)
    return ap


# ----------------------------------------------------------------------
# helpers

def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    d = cfg.to_dict()
    d["subcommand"] = args.subcommand
    for key in ("body", "seed", "output", "near_radius", "subdiv", "trunc_radius", "tolerance", "set", "pad"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    if getattr(args, "alpha", None) is not None:
        d["alphas"] = [args.alpha]
    if getattr(args, "alpha_list", None):
        d["alphas"] = args.alpha_list
    if getattr(args, "beta_list", None):
        d["betas"] = args.beta_list
    if getattr(args, "suite", None):
        d["suites"] = args.suite
    return RunConfig.from_dict(d)


def _model(cfg: RunConfig, K, alpha=None):
    a = alpha if alpha is not None else (cfg.alphas[0] if cfg.alphas else 0.5)
    return KernelModel(K, a, near_radius=cfg.near_radius, subdiv=cfg.subdiv, trunc_radius=cfg.trunc_radius)


def _model_kw(cfg: RunConfig):
    return dict(near_radius=cfg.near_radius, subdiv=cfg.subdiv, trunc_radius=cfg.trunc_radius)


def _load_object(spec, cfg: RunConfig, K):
    """A GridSet or GridFunction from a file, or a stock set on the default grid."""
    path = Path(spec)
    if path.exists():
        d = json.loads(path.read_text())
        return GridFunction.from_dict(d) if "values" in d else GridSet.from_dict(d)
    grid = Grid.covering(K.dim, cfg.extent, cfg.half_width)
    sets = lab.stock_sets(grid, K)
    if spec in sets:
        return sets[spec]
    raise UsageError(f"--set: {spec!r} is neither a readable file nor a stock set ({', '.join(sets)})")


def _emit(result: dict, args, cfg: RunConfig, out):
    result = _canon(result)
    if args.json:
        out.write(to_json(result))
    else:
        _table(result, out)
    if cfg.output:
        emit_report(result, cfg.output, "json")


def _table(d: dict, out, indent=""):
    width = max((len(k) for k in d), default=0)
    for k in sorted(d):
        v = d[k]
        if isinstance(v, dict):
            out.write(f"{indent}{k}:\n")
            _table(v, out, indent + "  ")
        elif isinstance(v, list) and len(v) > 8:
            out.write(f"{indent}{k:<{width}}  [{len(v)} entries]\n")
        elif isinstance(v, list):
            out.write(f"{indent}{k:<{width}}  {', '.join(_fmt(x) for x in v)}\n")
        else:
            out.write(f"{indent}{k:<{width}}  {_fmt(v)}\n")


# ----------------------------------------------------------------------
# subcommands

def cmd_perimeter(args, cfg, out):
    K = load_body(cfg.body)
    obj = _load_object(args.set, cfg, K)
    if args.limit is not None:
        alphas = args.alpha_list or DEFAULT_LIMIT_ALPHAS[args.limit]
        if isinstance(obj, GridFunction):
            raise UsageError("--limit needs a set, not a function")
        fn = limit_alpha0 if args.limit == "0" else limit_alpha1
        res = fn(obj, K, alphas, **_model_kw(cfg)).to_dict()
        res.update(limit=args.limit, body=K.label, set_label=obj.label)
    else:
        model = _model(cfg, K)
        if isinstance(obj, GridFunction):
            value, bound = seminorm_with_bound(obj, model)
            res = dict(value=value, truncation_bound=bound, alpha=model.alpha, body=K.label, function_label=obj.label)
        else:
            res = frac_perimeter(obj, model).to_dict()
            if not obj.empty:
                rhs = isoperimetric_ratio_rhs(model.volume_K, K.dim, model.alpha, obj.volume)
                res["isoperimetric_deficit"] = res["value"] / rhs - 1.0
    _emit(res, args, cfg, out)
    return 0


def cmd_limits(args, cfg, out):
    K = load_body(cfg.body)
    E = _load_object(args.set, cfg, K)
    if isinstance(E, GridFunction):
        raise UsageError("limits needs a set, not a function")
    which = ["0", "1"] if args.limit == "both" else [args.limit]
    res = {}
    for w in which:
        alphas = args.alpha_list if args.alpha_list and len(which) == 1 else DEFAULT_LIMIT_ALPHAS[w]
        fn = limit_alpha0 if w == "0" else limit_alpha1
        res[f"alpha_to_{w}"] = fn(E, K, alphas, **_model_kw(cfg)).to_dict()
    res.update(body=K.label, set_label=E.label)
    _emit(res, args, cfg, out)
    return 0


def cmd_capacity(args, cfg, out):
    K = load_body(cfg.body)
    L = _load_object(args.set, cfg, K)
    if isinstance(L, GridFunction):
        raise UsageError("capacity needs a condenser set, not a function")
    model = _model(cfg, K)
    mode = args.mode.replace("-", "_")
    prob = CapacityProblem(L, model, mode=mode, pad=cfg.pad)
    r = capacity_solve(prob)
    if mode == "first_order":
        res = dict(value=r.value, volume_bound=r.volume_bound, polar_variant=r.polar_variant,
                   volume_Z1K=r.volume_Z1K)
    else:
        res = r.to_dict()
        if not L.empty:
            n, a = K.dim, model.alpha
            rhs = 2 * n * model.volume_K ** ((n + a) / n) * L.volume ** ((n - a) / n)
            res["bounds"] = {"iso_deficit": a * r.value / rhs - 1.0,
                             "gamma_lower": n / a * model.volume_K ** ((n + a) / n)}
        if args.oracle:
            res["oracle_value"] = float(capacity_oracle(prob))
            res["oracle_rel_diff"] = abs(res["oracle_value"] - r.value) / max(abs(r.value), 1e-300)
    res.update(alpha=model.alpha, body=K.label, set_label=L.label, mode=mode)
    _emit(res, args, cfg, out)
    return 0


def cmd_verify(args, cfg, out):
    err = sys.stderr

    def progress(rep):
        if not args.json:
            err.write(f"{rep.name:<12} {'pass' if rep.passed else 'FAIL'}  {len(rep.instances)} instances  "
                      f"{rep.wall_time:.1f} s\n")

    t0 = time.perf_counter()
    agg = lab.run_all(cfg, progress=progress)
    if args.json:
        out.write(to_json(agg, timing=args.timing))
    else:
        out.write(f"{'suite':<12} {'status':<6} {'n':>4} {'failed':>6}  worst margin\n")
        for name in sorted(agg.suites):
            rep = agg.suites[name]
            failed = sum(not i.passed for i in rep.instances)
            worst = min(rep.instances, key=lambda i: i.margin + i.tolerance, default=None)
            desc = f"{_fmt(worst.margin)} ({worst.case})" if worst else "-"
            out.write(f"{name:<12} {'pass' if rep.passed else 'FAIL':<6} {len(rep.instances):>4} {failed:>6}  {desc}\n")
        out.write(f"overall: {'pass' if agg.passed else 'FAIL'} ({time.perf_counter() - t0:.1f} s)\n")
    if cfg.output:
        emit_report(agg, cfg.output, "json", timing=args.timing)
    if args.csv:
        emit_report(agg, args.csv, "csv")
    return 0 if agg.passed else 1


def _body_info(K):
    d = {"label": K.label, "dim": K.dim, "volume": float(K.volume()), "vertices": K.vertices.tolist(),
         "polar_volume": float(K.polar().volume())}
    if K.dim == 2:
        Z = MomentBody(K)
        d["moment_body_volume"] = float(Z.volume())
        d["moment_perimeter_of_K"] = float(anisotropic_perimeter(Polygon.from_body(K), Z))
    return d


def cmd_bodies(args, out):
    if not args.name:
        names = sorted(STOCK_BODIES)
        if args.json:
            out.write(to_json({"bodies": names}))
        else:
            out.write("\n".join(names) + "\n")
        return 0
    K = load_body(args.name)
    d = _canon(_body_info(K) if args.info else {"label": K.label, "dim": K.dim, "volume": float(K.volume())})
    if args.json:
        out.write(to_json(d))
    else:
        verts = d.pop("vertices", None)
        _table(d, out)
        if verts is not None:
            out.write("vertices\n")
            for v in verts:
                out.write("  " + "  ".join(_fmt(x) for x in v) + "\n")
    return 0


def cmd_generate(args, out):
    K = load_body(args.body)
    grid = Grid.covering(K.dim, args.extent, args.half_width)
    if args.kind == "ball":
        obj = ball(grid, K, args.radius)
    elif args.kind == "box":
        obj = box(grid, args.lo, args.hi)
    elif args.kind == "tent":
        obj = tent(grid, args.radius, body=K, levels=args.levels, height=args.height)
    else:
        obj = indicator(ball(grid, K, args.radius), args.height)
    save(obj, args.output)
    out.write(f"wrote {args.kind} to {args.output}\n")
    return 0


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.subcommand == "bodies":
            return cmd_bodies(args, out)
        if args.subcommand == "generate":
            return cmd_generate(args, out)
        cfg = _config(args)
        return {"perimeter": cmd_perimeter, "limits": cmd_limits, "capacity": cmd_capacity,
                "verify": cmd_verify}[args.subcommand](args, cfg, out)
    except (UsageError, ConfigError, ReportError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
