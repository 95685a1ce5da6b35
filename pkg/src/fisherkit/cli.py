"""Command-line front end: one subcommand per computation, JSON on stdout.

Exit status is 0 on success, 2 on usage errors and 1 when a computation
fails (the message goes to stderr).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import bayes, coding, figures, fisher, frequentist, geometry, mdl, montecarlo
from .models import (CountVector, ParametricModel, UnknownModelError, bent_coin_map,
                     builtin_model, sufficient_counts)
from .quadrature import QuadratureError


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return obj


def emit(obj) -> None:
    sys.stdout.write(json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n")


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_model(args) -> ParametricModel:
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k] = _parse_value(v)
    try:
        return builtin_model(args.model, **params)
    except UnknownModelError as exc:
        raise UsageError(str(exc)) from None


def load_data(args, model: ParametricModel):
    """Inline --counts or raw outcomes from --data-file.

    For two-outcome models the inline counts read "successes failures".
    """
    if getattr(args, "counts", None) is not None:
        c = list(args.counts)
        if not model.is_finite:
            raise UsageError(f"{model.name} has continuous outcomes; use --data-file")
        if len(c) != model.outcomes.size:
            raise UsageError(f"{model.name} needs {model.outcomes.size} counts, got {len(c)}")
        if model.outcomes.size == 2:
            c = c[::-1]
        return CountVector(tuple(c))
    if getattr(args, "data_file", None):
        with open(args.data_file, encoding="utf-8") as fh:
            tokens = fh.read().split()
        if model.is_finite:
            return sufficient_counts(model, [_parse_value(t) for t in tokens])
        return np.array([float(t) for t in tokens])
    raise UsageError("data required: give --counts or --data-file")


def _add_model(p, required=True):
    p.add_argument("--model", required=required, help="builtin model identifier")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="model parameter, e.g. n=10 or b=1.0 (repeatable)")


def _add_data(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--counts", type=int, nargs="+", help="outcome counts")
    g.add_argument("--data-file", help="whitespace-separated raw outcomes")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_fisher(args):
    model = load_model(args)
    t = model.check(args.theta)
    if args.method == "hessian":
        info = fisher.fisher_hessian_form(model, t)
    elif args.method in ("analytic", "numeric"):
        info = fisher.fisher_score_form(model, t, args.method)
    else:
        info = fisher.fisher_information(model, t)
    if args.n > 1:
        info = info * args.n
    return {"model": model.spec, "theta": t, "n": args.n, "information": info.to_json()}


def cmd_ci(args):
    model = load_model(args)
    data = load_data(args, model)
    ci = frequentist.confidence_interval(model, data, args.level)
    return {"model": model.spec, "mle": frequentist.mle(model, data), **ci.to_json(),
            "lower_2dp": round(ci.lower, 2), "upper_2dp": round(ci.upper, 2)}


def cmd_test(args):
    model = load_model(args)
    data = load_data(args, model)
    return {"model": model.spec,
            **frequentist.null_test(model, data, args.theta0, args.alpha).to_json()}


def cmd_predict(args):
    model = load_model(args)
    return {"model": model.spec,
            **frequentist.prediction_interval(model, args.theta, args.n, args.level).to_json()}


def cmd_design(args):
    model = load_model(args)
    variance = None
    if args.estimator != "mle":
        rows = {r.estimator: r for r in frequentist.estimator_comparison(model)}
        if args.estimator not in rows:
            raise ValueError(f"no {args.estimator} row for {model.name}")
        variance = rows[args.estimator].asymptotic_variance
    n = frequentist.design_sample_size(model, args.halfwidth, args.coverage,
                                       theta=args.theta, worst_case=args.worst_case,
                                       variance=variance)
    return {"model": model.spec, "halfwidth": args.halfwidth, "coverage": args.coverage,
            "estimator": args.estimator, "n": n}


def _interval_report(dist, args):
    out = {}
    if args.interval:
        out["interval"] = bayes.interval_probability(dist, args.interval).to_json()
    if args.quantile is not None:
        out["quantile"] = {"q": args.quantile, "value": bayes.quantile(dist, args.quantile)}
    if args.csv:
        figures.write_csv(args.csv, ("node", "density"), dist.to_rows())
        out["csv"] = args.csv
    return out


def cmd_jeffreys(args):
    model = load_model(args)
    dist = bayes.jeffreys_prior(model, args.grid)
    return {"model": model.spec, "normalizer": dist.normalizer, "grid": args.grid,
            **_interval_report(dist, args)}


def cmd_posterior(args):
    model = load_model(args)
    data = load_data(args, model)
    domain = (model.lower[0], model.upper[0])
    if args.prior == "uniform":
        prior = bayes.uniform_prior(domain, args.grid)
    else:
        prior = bayes.jeffreys_prior(model, args.grid)
    post = bayes.grid_posterior(prior, model, data)
    if args.to_theta:
        if model.name != "bent-coin":
            raise UsageError("--to-theta applies to the bent-coin model only")
        m = bent_coin_map()
        prior, post = bayes.pushforward(prior, m), bayes.pushforward(post, m)
    out = {"model": model.spec, "prior": args.prior, "grid": args.grid,
           "counts": data.to_json(), "mapped_to_theta": args.to_theta}
    if args.interval:
        out["prior_interval"] = bayes.interval_probability(prior, args.interval).to_json()
    out.update(_interval_report(post, args))
    return out


def cmd_geometry(args):
    if args.action == "embed":
        if args.probs:
            pt = geometry.embed(args.probs)
        else:
            model = load_model(args)
            pt = geometry.embed_model(model, args.theta)
        return {"coords": pt.coords, "coords_2dp": [round(float(c), 2) for c in pt.coords]}
    model = load_model(args)
    if args.action == "volume":
        return {"model": model.spec, "volume": geometry.model_volume(model)}
    if args.action == "arclength":
        a, b = args.bounds if args.bounds else (model.lower[0], model.upper[0])
        return {"model": model.spec, "bounds": [a, b], "arclength": geometry.arc_length(model, a, b)}
    if args.action == "tangent":
        tv = geometry.tangent(model, args.theta, args.dtheta)
        return {"model": model.spec, "theta": args.theta, **tv.to_json(),
                "sqrt_information": math.sqrt(fisher.fisher_information(model, args.theta).scalar),
                "tangent_length": geometry.tangent_length(model, args.theta, args.dtheta)}
    if args.action == "curve":
        c = geometry.model_curve(model, args.resolution)
        header = ("param",) + tuple(f"m_{l}" for l in model.outcomes.labels)
        if args.csv:
            figures.write_csv(args.csv, header, c.tolist())
        return {"model": model.spec, "points": len(c), "csv": args.csv}
    raise UsageError(f"unknown geometry action {args.action}")


def _models_from(names):
    try:
        return [builtin_model(n) for n in names]
    except UnknownModelError as exc:
        raise UsageError(str(exc)) from None


def cmd_mdl(args):
    models = _models_from(args.models)
    if args.action == "compare":
        if args.counts is None:
            raise UsageError("mdl compare needs --counts")
        data = CountVector(tuple(args.counts))
        return {"counts": data.to_json(),
                **mdl.select(models, data, args.criterion, args.tie_tolerance).to_json()}
    if args.action == "nml":
        out = [mdl.nml_exact(m, args.n).to_json() for m in models]
        if args.counts is not None:
            data = CountVector(tuple(args.counts))
            for rec, m in zip(out, models):
                rec["description_length"] = mdl.description_length(m, data)
                rec["fia"] = mdl.fia(m, data).total
        return {"n": args.n, "models": out}
    if args.action == "noncurve":
        if len(models) != 2:
            raise UsageError("noncurve needs exactly two models")
        curve = mdl.non_decision_curve(models[0], models[1], args.n, args.resolution)
        if args.csv:
            figures.write_csv(args.csv, ("p_L", "p_M", "p_R"), curve.to_rows())
        return {"n": args.n, "resolution": args.resolution, "points": len(curve.points),
                "diagnostic": curve.diagnostic, "csv": args.csv}
    raise UsageError(f"unknown mdl action {args.action}")


def cmd_coding(args):
    base = "e" if args.base == "e" else 2
    a = args.action
    if a == "kraft":
        total, ok = coding.kraft_check(args.lengths, args.alphabet)
        return {"lengths": args.lengths, "sum": total, "ok": ok}
    if a == "entropy":
        return {"entropy": coding.entropy(args.p, base), "base": args.base}
    if a == "lengths":
        return {"lengths": list(coding.shannon_fano_lengths(args.p).lengths)}
    if a in ("cross", "kl"):
        if args.q is None:
            raise UsageError(f"coding {a} needs --q")
        fn = coding.cross_entropy if a == "cross" else coding.kl_divergence
        v = fn(args.p, args.q, base)
        return {a: v, f"{a}_2dp": round(v, 2) if math.isfinite(v) else v, "base": args.base}
    if a == "logloss":
        model = load_model(args)
        data = load_data(args, model)
        return {"model": model.spec, "log_loss": coding.log_loss(model, data, args.theta)}
    if a == "encode":
        bits = coding.encode_example(args.sequence)
        return {"sequence": args.sequence, "bits": bits, "length": len(bits)}
    raise UsageError(f"unknown coding action {a}")


def cmd_simulate(args):
    model = load_model(args)
    cfg = montecarlo.SimConfig(model, tuple(args.theta), args.n, args.k, args.seed)
    if args.coverage is not None:
        summary = montecarlo.coverage_experiment(cfg, args.coverage)
    else:
        summary = montecarlo.simulate_estimates(cfg, args.estimator, args.halfwidth)
    if args.csv:
        figures.write_csv(args.csv, ("replicate", "estimate"), enumerate(summary.estimates))
    return summary.to_json()


def cmd_figure(args):
    counts = None
    if args.counts is not None:
        counts = CountVector(tuple(args.counts[::-1])) if len(args.counts) == 2 else \
            CountVector(tuple(args.counts))
    text = figures.figure_data(args.figure, args.resolution, counts, args.n)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    return {"figure": args.figure, "output": args.output, "rows": text.count("\n") - 1}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fisherkit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fisher", help="Fisher information at a parameter point")
    _add_model(p)
    p.add_argument("--theta", type=float, nargs="+", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--method", choices=["closed", "analytic", "numeric", "hessian"], default="closed")
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("ci", help="Wald confidence interval")
    _add_model(p)
    _add_data(p)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("test", help="point-null test via the prediction interval")
    _add_model(p)
    _add_data(p)
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("predict-interval", help="where the MLE lands under theta")
    _add_model(p)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("design", help="sample size for a target interval halfwidth")
    _add_model(p)
    p.add_argument("--halfwidth", type=float, required=True)
    p.add_argument("--coverage", type=float, default=0.68)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta", type=float)
    g.add_argument("--worst-case", action="store_true")
    p.add_argument("--estimator", choices=["mle", "mean", "median"], default="mle")
    p.set_defaults(func=cmd_design)

    def bayes_opts(p):
        p.add_argument("--grid", type=int, default=bayes.DEFAULT_GRID)
        p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
        p.add_argument("--quantile", type=float)
        p.add_argument("--csv", help="write node,density CSV here")

    p = sub.add_parser("jeffreys", help="Jeffreys prior on a 1-d model")
    _add_model(p)
    bayes_opts(p)
    p.set_defaults(func=cmd_jeffreys)

    p = sub.add_parser("posterior", help="grid posterior")
    _add_model(p)
    _add_data(p)
    p.add_argument("--prior", choices=["uniform", "jeffreys"], default="uniform")
    p.add_argument("--to-theta", action="store_true",
                   help="push a bent-coin (phi) result forward to theta")
    bayes_opts(p)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("geometry", help="sphere embedding, tangents, lengths, volumes")
    p.add_argument("action", choices=["embed", "tangent", "arclength", "volume", "curve"])
    _add_model(p, required=False)
    p.add_argument("--theta", type=float, nargs="+")
    p.add_argument("--dtheta", type=float, default=0.0)
    p.add_argument("--probs", type=float, nargs="+")
    p.add_argument("--bounds", type=float, nargs=2)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("mdl", help="model selection")
    p.add_argument("action", choices=["compare", "nml", "noncurve"])
    p.add_argument("--models", nargs="+", default=["mpt1", "mpt2"])
    p.add_argument("--counts", type=int, nargs="+")
    p.add_argument("--criterion", choices=list(mdl.CRITERIA), default="FIA")
    p.add_argument("--tie-tolerance", type=float, default=mdl.TIE_TOLERANCE)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_mdl)

    p = sub.add_parser("coding", help="entropy, cross-entropy, KL, log-loss, Kraft")
    p.add_argument("action", choices=["entropy", "cross", "kl", "logloss", "kraft", "lengths",
                                      "encode"])
    p.add_argument("--p", type=float, nargs="+")
    p.add_argument("--q", type=float, nargs="+")
    p.add_argument("--base", choices=["2", "e"], default="2")
    p.add_argument("--lengths", type=float, nargs="+")
    p.add_argument("--alphabet", type=int, default=2)
    p.add_argument("--sequence", default="MRMLLMMM")
    _add_model(p, required=False)
    _add_data(p)
    p.add_argument("--theta", type=float, nargs="+")
    p.set_defaults(func=cmd_coding)

    p = sub.add_parser("simulate", help="Monte Carlo sampling distribution or coverage")
    _add_model(p)
    p.add_argument("--theta", type=float, nargs="+", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=list(montecarlo.ESTIMATORS), default="mle")
    p.add_argument("--halfwidth", type=float)
    p.add_argument("--coverage", type=float, metavar="LEVEL")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figure", help="CSV data behind a standard plot")
    p.add_argument("figure", choices=list(figures.FIGURES))
    p.add_argument("--resolution", type=int, default=1000)
    p.add_argument("--output", required=True)
    p.add_argument("--counts", type=int, nargs="+")
    p.add_argument("--n", type=int, default=30)
    p.set_defaults(func=cmd_figure)
    return ap


_REQUIRED_FOR = {
    ("coding", "entropy"): ("p",), ("coding", "cross"): ("p",), ("coding", "kl"): ("p",),
    ("coding", "lengths"): ("p",), ("coding", "kraft"): ("lengths",),
    ("coding", "logloss"): ("model", "theta"),
    ("geometry", "tangent"): ("model", "theta"), ("geometry", "volume"): ("model",),
    ("geometry", "arclength"): ("model",), ("geometry", "curve"): ("model",),
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    action = getattr(args, "action", None)
    for name in _REQUIRED_FOR.get((args.command, action), ()):
        if getattr(args, name, None) is None:
            parser.print_usage(sys.stderr)
            print(f"fisherkit: error: {args.command} {action} requires --{name}", file=sys.stderr)
            return 2
    try:
        emit(args.func(args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fisherkit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, QuadratureError, OSError, ArithmeticError) as exc:
        print(f"fisherkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
