"""``byzfit`` command line.

Exit codes: 0 success, 2 usage or configuration error, 3 algorithmic failure
(for ``verify``: a FAIL verdict).  Run ``byzfit <command> -h`` for flags.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .chebyshev import ChebModel, cheb_to_monomial, grid_points
from .dataset import DataSet, atomic_write, load_model
from .errors import ByzfitError, FitFailure
from .fields import QQ, RR, PrimeField, field_from_spec
from .poly import MultiPoly, evaluate, evaluate_many, to_float
from .report import FitReport

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 2, 3


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# ---------------------------------------------------------------- helpers

def _field(args):
    return field_from_spec(args.field, args.modulus)


def _seed(args):
    if args.seed is None:
        if args.strict:
            raise ConfigError("--strict requires --seed")
        return 0
    return args.seed


def _jobs(args):
    if args.jobs is not None:
        return args.jobs
    return max(1, int(os.environ.get("BYZFIT_JOBS", "1")))


def _box(text, k):
    if text is None:
        return None
    parts = [p for p in text.split(";") if p.strip()]
    axes = [tuple(float(Fraction(v)) for v in p.split(",")) for p in parts]
    if len(axes) == 1:
        axes = axes * k
    if len(axes) != k or any(len(a) != 2 or a[0] >= a[1] for a in axes):
        raise ConfigError(f"--box needs lo,hi (or {k} of them separated by ';')")
    return axes


def _load_truth(text, k, field):
    """``text`` is a JSON model file or an infix expression."""
    from .expr import parse_poly

    if text is None:
        return None
    if os.path.exists(text):
        doc = json.loads(Path(text).read_text())
        return load_model(doc.get("poly", doc))
    return parse_poly(text, k, field)


def _config_echo(args):
    return {k: v for k, v in vars(args).items() if k not in ("func",) and not callable(v)}


def _emit(args, text):
    if getattr(args, "out", None):
        atomic_write(args.out, text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_report(args, report: FitReport):
    report.config.setdefault("cli", _config_echo(args))
    if args.format == "text":
        _emit(args, _report_text(report))
    else:
        _emit(args, report.dumps())


def _report_text(r: FitReport) -> str:
    lines = [f"algorithm: {r.algorithm}", f"status: {r.status}"]
    if r.model is not None:
        lines.append(f"model: {r.model if isinstance(r.model, MultiPoly) else r.model.to_json()}")
    if r.locator is not None:
        lines.append(f"locator: {r.locator}")
    lines.append(f"flagged: {r.flagged}")
    for key in ("delta_achieved", "sup_vs_truth"):
        if getattr(r, key) is not None:
            lines.append(f"{key}: {getattr(r, key)}")
    if r.counters:
        lines.append("counters: " + ", ".join(f"{k}={v}" for k, v in r.counters.items()))
    if r.status != "ok":
        lines.append(f"error: {r.extra.get('kind')}: {r.extra.get('message')}")
    return "\n".join(lines)


def _fail_report(args, algorithm, exc: FitFailure):
    rep = FitReport(algorithm=algorithm, status="error",
                    extra={"kind": exc.kind, "message": str(exc),
                           "details": {k: str(v) for k, v in exc.details.items() if len(str(v)) <= 200}})
    _emit_report(args, rep)
    sys.stderr.write(f"byzfit: {exc.kind}: {exc}\n")
    return EXIT_FAIL


def _rho(args):
    from .wb import as_fraction

    try:
        return as_fraction(args.rho)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    from .aggregate import Generator, generate, parse_corruption, parse_noise
    from .expr import variables_used

    fld = _field(args)
    k = args.vars or (None if os.path.exists(args.truth) else max(variables_used(args.truth), 1))
    truth = _load_truth(args.truth, k, fld)
    if isinstance(truth, MultiPoly) and truth.field != fld:
        truth = truth.map_coeffs(fld, fld)
    gen = Generator(truth, parse_noise(args.noise), args.beta, parse_corruption(args.corruption), _seed(args),
                    _box(args.box, truth.vars), fld, args.layout, args.cluster_size, args.cluster_spread)
    S = generate(gen, args.n)
    S.save(args.out)
    sys.stderr.write(f"wrote {len(S)} rows to {args.out}\n")
    return EXIT_OK


def cmd_fit_wb1d(args):
    from .wb import NoiseAlphabet, degree_search, noise_enumerate_fit

    S = DataSet.load(args.data)
    rho = _rho(args)
    alpha = NoiseAlphabet.symmetric(args.delta, S.field)
    kw = dict(subset_size=args.subset_size, select=args.select, seed=_seed(args), budget=args.budget)
    try:
        if args.d is None:
            rep = degree_search(S, rho, alphabet=alpha, d_max=args.d_max, strategy=args.strategy, **kw)
        else:
            rep = noise_enumerate_fit(S, rho, args.d, alpha, **kw)
    except FitFailure as exc:
        return _fail_report(args, "wb1d", exc)
    _attach_truth(rep, S)
    _emit_report(args, rep)
    return EXIT_OK


def cmd_fit_wbmv(args):
    from .mvwb import MVProblem, mv_noise_enumerate_fit, mv_report
    from .wb import NoiseAlphabet

    S = DataSet.load(args.data)
    try:
        if args.t is not None:
            if args.delta:
                raise ConfigError("--t runs a single noiseless decode; use --rho with --delta for enumeration")
            prob = MVProblem(list(S.points()), S.k, args.d, args.t, S.field, args.axis)
            rep = mv_report(prob, S.index)
        else:
            if args.rho is None:
                raise ConfigError("give --t or --rho")
            alpha = NoiseAlphabet.symmetric(args.delta, S.field)
            rep = mv_noise_enumerate_fit(S, _rho(args), args.d, alpha, axis=args.axis,
                                         subset_size=args.subset_size, select=args.select, seed=_seed(args),
                                         budget=args.budget)
    except FitFailure as exc:
        return _fail_report(args, "wbmv", exc)
    _attach_truth(rep, S)
    _emit_report(args, rep)
    return EXIT_OK


def _attach_truth(rep, S):
    if S.truth is not None and isinstance(S.truth, MultiPoly) and rep.model is not None:
        rep.extra["matches_truth"] = bool(rep.model == S.truth)


def _filter_config(args):
    from .lpfit import FilterConfig

    return FilterConfig(args.d, args.delta, float(_rho(args)), args.halfwidth, args.target_count, args.center,
                        args.min_square, args.min_agreement)


def cmd_fit_lp(args):
    from .lpfit import fit_robust, rescale

    S = DataSet.load(args.data)
    if S.field is not RR:
        raise ConfigError("fit lp needs float data")
    cfg = _filter_config(args)
    truth = S.truth
    maps = None
    if args.rescale:
        S, maps = rescale(S)
        if not all(m.scale == 1.0 and m.shift == 0.0 for m in maps):
            truth = None
    try:
        rep = fit_robust(S, cfg, grid_per_axis=args.grid, truth=truth, filter=not args.no_filter,
                         total_degree=None if args.full_tensor else args.d)
    except FitFailure as exc:
        return _fail_report(args, "lp", exc)
    if maps is not None:
        rep.extra["rescale"] = [m.to_json() for m in maps]
    _emit_report(args, rep)
    return EXIT_OK


def cmd_filter(args):
    from .lpfit import byzantine_filter

    S = DataSet.load(args.data)
    if S.field is not RR:
        raise ConfigError("filter needs float data")
    try:
        F = byzantine_filter(S, _filter_config(args))
    except FitFailure as exc:
        sys.stderr.write(f"byzfit: {exc.kind}: {exc}\n")
        return EXIT_FAIL
    info = F.meta["filter"]
    summary = {"input": len(S), "kept": len(F), "excluded": [int(S.index[p]) for p in info["excluded"]],
               "squares": len(info["squares"])}
    if S.labels is not None:
        summary["kept_corrupt"] = int(sum(1 for lab in F.labels if lab == "corrupt"))
    F.save(args.out)
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK


def cmd_aggregate(args):
    from .aggregate import FitterConfig, MergePlan, Partition, aggregate

    S = DataSet.load(args.data)
    if args.partition:
        part = Partition.from_json(json.loads(Path(args.partition).read_text()))
    else:
        box = _box(args.box, S.k) or ([(-1.0, 1.0)] * S.k if S.field is RR else None)
        if box is None:
            X = np.array([[float(int(v)) if isinstance(S.field, PrimeField) else float(v) for v in r] for r in S.X])
            box = [(float(X[:, a].min()), float(X[:, a].max())) for a in range(S.k)]
        part = Partition.regular(args.cells, box)
    params = {"d": args.d, "rho_clean": float(_rho(args)) if args.fitter == "lp" else str(_rho(args)),
              "delta": args.delta if args.fitter == "lp" else int(args.delta)}
    if args.fitter == "lp":
        params.update(filter=not args.no_filter, target_count=args.target_count, grid=args.grid)
    fitter = FitterConfig(args.fitter, params)
    if args.plan:
        plan = MergePlan.from_json(json.loads(Path(args.plan).read_text()))
    else:
        plan = MergePlan.balanced(len(part.cells), args.M, fitter)
    try:
        summary, _ = aggregate(S, part, plan, _jobs(args), S.truth if S.field is RR else None)
    except FitFailure as exc:
        sys.stderr.write(f"byzfit: {exc.kind}: {exc}\n")
        return EXIT_FAIL
    summary["config"] = _config_echo(args)
    _emit(args, json.dumps(summary, indent=1, default=str))
    return EXIT_OK


def _model_from_file(path):
    doc = json.loads(Path(path).read_text())
    if "algorithm" in doc:
        if doc.get("poly") is None:
            raise ConfigError(f"{path} holds no model (status {doc.get('status')})")
        doc = doc["poly"]
    return load_model(doc)


def cmd_eval(args):
    model = _model_from_file(args.model)
    for at in args.at:
        coords = [c for c in at.split(",") if c.strip()]
        if isinstance(model, ChebModel):
            if len(coords) != model.vars:
                raise ConfigError(f"model has {model.vars} variables, got {len(coords)} coordinates")
            v = model(np.array([[float(Fraction(c)) for c in coords]]))[0]
            print(repr(float(v)))
        else:
            if len(coords) != model.vars:
                raise ConfigError(f"model has {model.vars} variables, got {len(coords)} coordinates")
            fld = model.field
            print(fld.format(evaluate(model, [fld.parse(c) for c in coords])))
    return EXIT_OK


# ---------------------------------------------------------------- verify

def verify(report_doc: dict, S: DataSet, truth=None, rho=None, delta=None, sup_tol=None, box=None) -> dict:
    """Re-check a report's model against raw data using polynomial evaluation only.

    Nothing computed by the fitter (residuals, agreement counts, delta) is
    trusted; the band, the clean fraction and the flagged set come from the
    report's configuration and are recomputed here.
    """
    if report_doc.get("poly") is None:
        return {"verdict": "FAIL", "reason": f"report has no model (status {report_doc.get('status')})"}
    model = load_model(report_doc["poly"])
    poly = cheb_to_monomial(model) if isinstance(model, ChebModel) else model
    if poly.vars != S.k:
        raise ConfigError(f"model has {poly.vars} variables, dataset has {S.k}")
    cfg = report_doc.get("config", {})
    fld = S.field
    n = len(S)
    # band
    if delta is None:
        delta = cfg.get("delta", 0) or 0
    # required agreements
    if rho is None and cfg.get("rho_clean") is not None:
        rho = cfg["rho_clean"]
    if rho is not None:
        rho = Fraction(repr(rho)) if isinstance(rho, float) else Fraction(str(rho))
        need = math.ceil(rho * n)
    elif cfg.get("t") is not None:
        need = n - int(cfg["t"])
    else:
        need = n
    if fld.exact:
        if poly.field != fld:
            raise ConfigError(f"model field {poly.field} differs from dataset field {fld}")
        if isinstance(fld, PrimeField):
            w = int(delta)
            band = {fld(j) for j in range(-w, w + 1)}
            good = [(z - evaluate(poly, x)) in band for x, z in S.points()]
        else:
            dl = Fraction(str(delta))
            good = [abs(z - evaluate(poly, x)) <= dl for x, z in S.points()]
    else:
        fp = to_float(poly) if poly.field != RR else poly
        resid = np.abs(S.z - evaluate_many(fp, S.X))
        good = list(resid <= float(delta) + 1e-9)
    agree = int(sum(good))
    out = {"agreements": agree, "n": n, "need": need, "delta": str(delta), "checks": {}}
    out["checks"]["agreement"] = agree >= need
    if fld.exact and report_doc.get("flagged") is not None:
        bad = sorted(int(S.index[i]) for i, g in enumerate(good) if not g)
        out["recomputed_flagged"] = bad
        out["checks"]["flagged"] = bad == sorted(int(i) for i in report_doc["flagged"])
    if truth is not None:
        tp = cheb_to_monomial(truth) if isinstance(truth, ChebModel) else truth
        if isinstance(fld, PrimeField):
            out["truth_equal"] = bool(tp == poly)
            out["sup_vs_truth"] = 0.0 if out["truth_equal"] else None
        else:
            if box is None:
                if fld.exact:
                    X = np.array([[float(v) for v in r] for r in S.X])
                    box = [(float(X[:, a].min()), float(X[:, a].max())) for a in range(S.k)]
                else:
                    box = [(-1.0, 1.0)] * S.k
            P = grid_points(101, S.k, box)
            a = evaluate_many(to_float(poly) if poly.field != RR else poly, P)
            b = evaluate_many(to_float(tp) if tp.field != RR else tp, P)
            out["sup_vs_truth"] = float(np.max(np.abs(a - b)))
        if sup_tol is not None and out.get("sup_vs_truth") is not None:
            out["checks"]["sup"] = out["sup_vs_truth"] <= sup_tol
        elif sup_tol is not None:
            out["checks"]["sup"] = False
    out["verdict"] = "PASS" if all(out["checks"].values()) else "FAIL"
    return out


def cmd_verify(args):
    doc = json.loads(Path(args.report).read_text())
    S = DataSet.load(args.data)
    truth = _load_truth(args.truth, S.k, S.field) if args.truth else None
    res = verify(doc, S, truth, args.rho, args.delta, args.sup_tol, _box(args.box, S.k))
    if args.format == "json":
        print(json.dumps(res))
    else:
        line = f"{res['verdict']} agreement={res.get('agreements')}/{res.get('n')} need={res.get('need')}"
        if "sup_vs_truth" in res:
            line += f" sup_vs_truth={res['sup_vs_truth']}"
        if res.get("reason"):
            line += f" ({res['reason']})"
        failed = [k for k, v in res.get("checks", {}).items() if not v]
        if failed:
            line += " failed=" + ",".join(failed)
        print(line)
    return EXIT_OK if res["verdict"] == "PASS" else EXIT_FAIL


# ---------------------------------------------------------------- parser

def _common(p):
    p.add_argument("--seed", type=int, default=None, help="single source of randomness (default 0)")
    p.add_argument("--strict", action="store_true", help="require --seed")
    p.add_argument("--jobs", type=int, default=None, help="worker cap (default $BYZFIT_JOBS or 1)")
    p.add_argument("--format", choices=["json", "text"], default="json")


def _filter_args(p):
    p.add_argument("--d", type=int, required=True, help="total degree")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", default="0.8", help="clean fraction")
    p.add_argument("--halfwidth", type=float, default=None, help="square half-width (default delta/d^3)")
    p.add_argument("--target-count", type=int, default=None, help="default ceil(d^2/delta)")
    p.add_argument("--center", choices=["median", "mean"], default="median")
    p.add_argument("--min-square", type=int, default=3)
    p.add_argument("--min-agreement", type=float, default=0.5)


def build_parser():
    top = _Parser(prog="byzfit", description="Robust polynomial fitting with Byzantine samples.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a labeled synthetic dataset")
    _common(p)
    p.add_argument("--truth", required=True, help="infix polynomial or JSON model file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--vars", type=int, default=None)
    p.add_argument("--field", choices=["rational", "gf", "float"], default="float")
    p.add_argument("--modulus", type=int, default=None)
    p.add_argument("--noise", default="none", help="none | uniform:DELTA | alphabet:a,b,...")
    p.add_argument("--beta", type=float, default=0.0, help="corrupted fraction, in [0, 1)")
    p.add_argument("--corruption", default="box", help="box[:lo,hi] | const:V | adversarial:OFFSET")
    p.add_argument("--layout", choices=["uniform", "clustered", "grid"], default=None)
    p.add_argument("--cluster-size", type=int, default=10)
    p.add_argument("--cluster-spread", type=float, default=1e-4)
    p.add_argument("--box", default=None, help="lo,hi or lo,hi;lo,hi;...")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    fit = sub.add_parser("fit", help="fit a model").add_subparsers(dest="algorithm", required=True,
                                                                   parser_class=_Parser)
    p = fit.add_parser("wb1d", help="univariate noise-enumeration fit")
    _common(p)
    p.add_argument("data")
    p.add_argument("--d", type=int, default=None, help="degree (omit for degree search)")
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--strategy", choices=["binary", "linear"], default="binary")
    p.add_argument("--rho", default="0.8")
    p.add_argument("--delta", type=int, default=0, help="integer noise width")
    p.add_argument("--subset-size", type=int, default=None)
    p.add_argument("--select", choices=["first", "random"], default="first")
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit_wb1d)

    p = fit.add_parser("wbmv", help="multivariate Welch-Berlekamp")
    _common(p)
    p.add_argument("data")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=int, default=None, help="error bound for a single decode")
    p.add_argument("--rho", default=None, help="clean fraction (noise enumeration)")
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--axis", type=int, default=0)
    p.add_argument("--subset-size", type=int, default=None)
    p.add_argument("--select", choices=["first", "random"], default="first")
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit_wbmv)

    p = fit.add_parser("lp", help="filter, then Chebyshev LP fit")
    _common(p)
    p.add_argument("data")
    _filter_args(p)
    p.add_argument("--grid", type=int, default=None, help="grid nodes per axis (default min(d^5, 64))")
    p.add_argument("--no-filter", action="store_true")
    p.add_argument("--full-tensor", action="store_true", help="use all T_i T_j with i, j <= d")
    p.add_argument("--rescale", action="store_true", help="map data onto [-1, 1] first")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit_lp)

    p = sub.add_parser("filter", help="Byzantine square filter")
    _common(p)
    p.add_argument("data")
    _filter_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("aggregate", help="local fits merged hierarchically")
    _common(p)
    p.add_argument("data")
    p.add_argument("--cells", type=int, default=4)
    p.add_argument("--fitter", choices=["lp", "wb"], default="lp")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--rho", default="1")
    p.add_argument("--M", type=int, default=200, help="resampled points per child at each merge")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--target-count", type=int, default=None)
    p.add_argument("--no-filter", action="store_true")
    p.add_argument("--box", default=None)
    p.add_argument("--partition", default=None, help="Partition JSON")
    p.add_argument("--plan", default=None, help="MergePlan JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("eval", help="evaluate a model")
    _common(p)
    p.add_argument("--model", required=True, help="model or report JSON")
    p.add_argument("--at", action="append", required=True, help="comma-separated point; repeatable")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="independent check of a report against data")
    _common(p)
    p.add_argument("report")
    p.add_argument("data")
    p.add_argument("--truth", default=None, help="infix polynomial or JSON model file")
    p.add_argument("--rho", default=None)
    p.add_argument("--delta", default=None)
    p.add_argument("--sup-tol", type=float, default=None)
    p.add_argument("--box", default=None)
    p.set_defaults(func=cmd_verify, format="text")
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"byzfit: error: {exc}\n")
        return EXIT_CONFIG
    except FitFailure as exc:
        sys.stderr.write(f"byzfit: {exc.kind}: {exc}\n")
        return EXIT_FAIL
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError, ByzfitError) as exc:
        sys.stderr.write(f"byzfit: error: {exc}\n")
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
