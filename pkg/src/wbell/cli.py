"""Command-line front end: ``wbell <command> [flags]``.

Every command prints one report to stdout.  JSON reports have the top-level
keys ``command``, ``params``, ``results``, ``seed`` and ``version``; floats are
written with 17 significant digits so they round-trip exactly.

Exit codes: 0 success, 1 usage error, 2 computational failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .experiment import estimate_ch, noise_sweep, simulate_experiment
from .inequalities import (
    CIRELSON_BOUND,
    LHV_CHSH_BOUND,
    ChshSpec,
    ch_lhv_status,
    ch_value,
    chsh_report,
    chsh_value,
    lhv_enumerate_ch,
    lhv_enumerate_chsh,
    lhv_enumerate_w_selection,
    map_chsh_bound_to_ch,
    tsirelson_max,
)
from .optimize import EvaluationModel, probe_paper_angles
from .qmath import ConvergenceError
from .scenario import make_ghz_state, make_w_state, white_noise
from .selection import (
    SelectionRule,
    ch_setup_distributions,
    ch_terms,
    counterfactual_correlations,
    epr_certainty_checks,
    membership_is_local,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- emitters

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ArithmeticError(f"non-finite value {x!r} in report")
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)) and any(isinstance(v, (dict, list, tuple)) for v in obj):
        for idx, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{idx}]")
    else:
        yield prefix, obj


def _text_value(v) -> str:
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_text_value(x) for x in v) + "]"
    if v is None:
        return "-"
    return str(v).lower() if isinstance(v, bool) else str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report) + "\n"
    if fmt == "text":
        lines = [f"{key}: {_text_value(val)}" for key, val in _flatten(report)]
        return "\n".join(lines) + "\n"
    raise UsageError(f"output format {fmt!r} is not available for this command")


def _report(command: str, params: dict, results: dict, seed=None) -> dict:
    return {"command": command, "params": params, "results": results, "seed": seed, "version": __version__}


def _outcome_key(o) -> str:
    return ",".join(str(v) for v in o)


def _signlinear(v) -> dict:
    return {"c0": v.c0, "c1": v.c1, "at_xk_plus": v.at(1), "at_xk_minus": v.at(-1)}


# ---------------------------------------------------------------- commands

def _check_noise(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise UsageError(f"--noise must lie in [0, 1], got {p}")


def cmd_exact(args) -> dict:
    _check_noise(args.noise)
    base = make_w_state() if args.state == "w" else make_ghz_state()
    state = white_noise(base, args.noise) if args.noise > 0 else base
    dists = ch_setup_distributions(state)
    terms = ch_terms(dists)

    results: dict = {
        "state": args.state,
        "noise": args.noise,
        "distributions": {label: {_outcome_key(o): p for o, p in d.items()} for label, d in dists.items()},
    }
    try:
        corr = counterfactual_correlations(state)
    except ValueError as exc:
        results["counterfactual_correlations"] = None
        results["chsh_value"] = None
        results["chsh_report"] = None
        results["counterfactual_note"] = str(exc)
    else:
        value = chsh_value(corr["ZZ"], corr["ZX"], corr["XZ"], corr["XX"], ChshSpec.w_selection())
        results["counterfactual_correlations"] = {k: _signlinear(v) for k, v in corr.items()}
        results["chsh_value"] = _signlinear(value)
        results["chsh_report"] = chsh_report(value).as_dict()

    mid = terms["middle_bound"]
    probs = [terms["p_zz"], mid, mid, terms["p_xx"]]
    ch = ch_value(*probs)
    results.update({
        "ch_probabilities": {"p_zz": probs[0], "p_zx_bound": probs[1], "p_xz_bound": probs[2], "p_xx": probs[3]},
        "ch_value": ch,
        "ch_value_lhv_status": ch_lhv_status(ch),
        "ch_lower": terms["ch_lower"],
        "lhv_chsh_bound": LHV_CHSH_BOUND,
        "cirelson_bound": CIRELSON_BOUND,
        "lhv_ch_bound": map_chsh_bound_to_ch(LHV_CHSH_BOUND),
        "cirelson_ch_bound": map_chsh_bound_to_ch(CIRELSON_BOUND),
        "certainty_checks": epr_certainty_checks(state).as_dict(),
        "membership_is_local": {rule.value: membership_is_local(rule) for rule in SelectionRule},
    })
    return _report("exact", {"state": args.state, "noise": args.noise}, results)


def cmd_lhv(args) -> dict:
    if args.scenario == "chsh":
        e = lhv_enumerate_chsh()
        results = {
            "maximum": e.maximum,
            "cases": e.cases,
            "per_mn": [{"m": m, "n": n, "max": e.per_mn_max[(m, n)], "attaining": e.per_mn_attaining[(m, n)]}
                       for (m, n) in e.per_mn_max],
        }
    elif args.scenario == "ch":
        e = lhv_enumerate_ch()
        results = {"minimum": e.minimum, "maximum": e.maximum, "attaining_min": e.attaining_min,
                   "attaining_max": e.attaining_max, "cases": e.cases}
    else:
        e = lhv_enumerate_w_selection()
        results = {"maximum": e.maximum, "attaining": e.attaining, "cases": e.cases}
    return _report("lhv", {"scenario": args.scenario}, results)


def cmd_tsirelson(args) -> dict:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    r = tsirelson_max(args.samples, args.seed, refine=not args.no_refine, product_states=args.product_states)
    results = {
        "sampled_max": r.sampled_max,
        "sampled_exceed_count": r.sampled_exceed_count,
        "refined_max": r.refined_max,
        "refined_angles": list(r.refined_angles),
        "refined_signs": list(r.refined_signs),
        "cirelson_bound": r.bound,
        "within_bound": r.within_bound,
    }
    params = {"samples": args.samples, "seed": args.seed, "refine": not args.no_refine,
              "product_states": args.product_states}
    return _report("tsirelson", params, results, seed=args.seed)


_MODELS = {"sym": [EvaluationModel.SYM_OPERATOR], "cond": [EvaluationModel.COND_PRODUCT],
           "both": [EvaluationModel.SYM_OPERATOR, EvaluationModel.COND_PRODUCT]}


def cmd_optimize(args) -> dict:
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    reports = [probe_paper_angles(m, grid=args.grid, refine_tol=args.tol, seed=args.seed).as_dict()
               for m in _MODELS[args.model]]
    params = {"model": args.model, "grid": args.grid, "tol": args.tol, "seed": args.seed}
    return _report("optimize", params, {"probes": reports}, seed=args.seed)


def cmd_simulate(args) -> dict:
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    _check_noise(args.noise)
    state = white_noise(make_w_state(), args.noise) if args.noise > 0 else make_w_state()
    tables = simulate_experiment(state, args.shots, args.seed)
    est = estimate_ch(tables)
    cirelson_ch = map_chsh_bound_to_ch(CIRELSON_BOUND)
    results = {
        "estimate": est.value,
        "sigma": est.sigma,
        "ci95": list(est.ci95),
        "ci95_excludes_cirelson_ch_bound": not est.contains(cirelson_ch),
        "ci95_excludes_lhv_ch_bound": not est.contains(0.0),
        "terms": dict(est.terms),
        "ch_lower": ch_terms(ch_setup_distributions(state))["ch_lower"],
        "cirelson_ch_bound": cirelson_ch,
        "counts": {label: {_outcome_key(o): c for o, c in t.counts.items()} for label, t in tables.items()},
    }
    params = {"shots": args.shots, "seed": args.seed, "noise": args.noise}
    return _report("simulate", params, results, seed=args.seed)


def cmd_sweep(args) -> dict:
    p_from, p_to = getattr(args, "from"), args.to
    if not 0.0 <= p_from <= p_to <= 1.0:
        raise UsageError("need 0 <= --from <= --to <= 1")
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    rows = noise_sweep(p_from, p_to, args.steps, mode=args.mode, shots=args.shots, seed=args.seed)
    params = {"from": p_from, "to": p_to, "steps": args.steps, "mode": args.mode}
    seed = None
    if args.mode == "sampled":
        params.update(shots=args.shots, seed=args.seed)
        seed = args.seed
    results = {"rows": [{"p": r.p, "ch_lower_exact": r.ch_lower_exact, "estimate": r.estimate, "sigma": r.sigma}
                        for r in rows]}
    return _report("sweep", params, results, seed=seed)


def sweep_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "ch_lower_exact", "estimate", "sigma"])
    for row in report["results"]["rows"]:
        writer.writerow(["" if row[k] is None else _fmt_float(row[k])
                         for k in ("p", "ch_lower_exact", "estimate", "sigma")])
    return buf.getvalue()


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wbell", description="W-state subensemble Bell-inequality calculator.",
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=f"wbell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, helptext, formats=("json", "text")):
        p = sub.add_parser(name, help=helptext, description=helptext,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--output", choices=formats, default=formats[0], help="report format")
        return p

    p = add("exact", "exact W/GHZ distributions, counterfactual CHSH value and CH chain")
    p.add_argument("--state", choices=("w", "ghz"), default="w")
    p.add_argument("--noise", type=float, default=0.0, help="white-noise weight p in [0, 1]")
    p.set_defaults(func=cmd_exact)

    p = add("lhv", "exhaustive deterministic-strategy bounds")
    p.add_argument("--scenario", choices=("chsh", "ch", "w-selection"), default="chsh")
    p.set_defaults(func=cmd_lhv)

    p = add("tsirelson", "sampled and refined maximum of the two-qubit CHSH value")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--no-refine", action="store_true", help="skip local refinement")
    p.add_argument("--product-states", action="store_true", help="sample product states only")
    p.set_defaults(func=cmd_tsirelson)

    p = add("optimize", "constrained A=B, a=b maximization for the W subensemble")
    p.add_argument("--model", choices=tuple(_MODELS), default="both")
    p.add_argument("--grid", type=int, default=200, help="grid points per axis")
    p.add_argument("--tol", type=float, default=1e-6, help="refinement parameter tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_optimize)

    p = add("simulate", "Monte Carlo five-setup experiment and CH estimate")
    p.add_argument("--shots", type=int, default=100_000, help="shots per setup")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--noise", type=float, default=0.0, help="white-noise weight p in [0, 1]")
    p.set_defaults(func=cmd_simulate)

    p = add("sweep", "CH lower bound along a white-noise grid", formats=("csv", "json", "text"))
    p.add_argument("--from", type=float, default=0.0)
    p.add_argument("--to", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--shots", type=int, default=100_000, help="shots per setup (sampled mode)")
    p.add_argument("--seed", type=int, default=0, help="base seed; point i uses seed + i")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.func(args)
        if args.command == "sweep" and args.output == "csv":
            out = sweep_csv(report)
        else:
            out = render(report, args.output)
    except UsageError as exc:
        print(f"wbell {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, ArithmeticError, ValueError) as exc:
        print(f"wbell {args.command}: computation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
