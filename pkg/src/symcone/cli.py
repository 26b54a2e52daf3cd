"""Command-line front end: ``symcone <command> [options]``.

Exit codes: 0 success, 1 a check failed, 2 invalid usage or parameters.
Options may also come from ``--config FILE.json``; flags given on the
command line take precedence over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import Algebra, check_algebra
from .dist import (
    BetaParams,
    BetaRieszParams,
    coords_logpdf,
    draw,
    read_csv,
    sample_mh,
)
from .errors import SymConeError
from .mulalg import MultiplicationRule, check_axioms
from .stats import CONTROLS, DEFAULT_CASE_PARAMS, Scenario, verify_direct, verify_k_invariance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "algebra": "sym",
    "rank": 2,
    "dim": 3,
    "seed": 0,
    "samples": None,
    "family": "beta",
    "n": 1000,
    "shards": 1,
    "threads": None,
    "sampler": "exact",
    "proposal_scale": None,
    "burn_in": 10_000,
    "thin": 10,
    "chains": 1,
    "format": None,
    "mode": "direct",
    "case": 1,
    "alpha": 0.01,
    "n_perms": 500,
    "dcov_n": 1000,
    "n_ref": 100_000,
}

# verification runs use the reference scenario size and seed
COMMAND_DEFAULTS = {"verify": {"n": 5000, "seed": 7}}


class UsageError(Exception):
    pass


def _floats(text) -> list[float]:
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _scalar(name, text):
    vals = _floats(text)
    if vals is None:
        return None
    if len(vals) != 1:
        raise UsageError(f"--{name} takes a single number")
    return vals[0]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcone", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with option values (flags win)")
        p.add_argument("--algebra", choices=["sym", "lorentz"])
        p.add_argument("--rank", type=int, help="rank of the sym algebra")
        p.add_argument("--dim", type=int, help="ambient dimension of the Lorentz algebra")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--threads", type=int, help="maximum worker threads (default: all cores)")

    def family(p):
        p.add_argument("--family", choices=["beta", "beta-riesz"])
        p.add_argument("--p", help="beta parameter p (for verify: p1,p2,p3 of case 1)")
        p.add_argument("--q", help="beta parameter q")
        p.add_argument("--s", help="beta-Riesz vector s, comma separated")
        p.add_argument("--t", help="beta-Riesz vector t, comma separated")

    p = sub.add_parser("check-algebra", help="Jordan algebra property suite")
    common(p)
    p.add_argument("--samples", type=int, help="random trials (default 1000)")

    p = sub.add_parser("check-mulalg", help="axiom checks for a multiplication algorithm")
    common(p)
    p.add_argument("--rule", help="quad, tri or interp:<alpha>")
    p.add_argument("--samples", type=int, help="random trials (default 200)")

    p = sub.add_parser("sample", help="draw samples as CSV")
    common(p)
    family(p)
    p.add_argument("--n", type=int)
    p.add_argument("--shards", type=int)
    p.add_argument("--sampler", choices=["exact", "mcmc"])
    p.add_argument("--proposal-scale", dest="proposal_scale", type=float)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--chains", type=int)

    p = sub.add_parser("density", help="evaluate log-densities at given points")
    common(p)
    family(p)
    p.add_argument("--x", action="append", dest="points",
                   help="a point in canonical coordinates, comma separated (repeatable)")
    p.add_argument("--points-file", dest="points_file", help="CSV with a coordinate header row")

    p = sub.add_parser("verify", help="end-to-end verification pipelines")
    common(p)
    family(p)
    p.add_argument("--mode", choices=["direct", "k-invariance"])
    p.add_argument("--case", type=int)
    p.add_argument("--rule", help="rule of w (with --rule2 selects the case)")
    p.add_argument("--rule2", help="rule of w-tilde")
    for name in ("p1", "p2", "p3"):
        p.add_argument(f"--{name}")
    for name in ("s1", "s2", "s3"):
        p.add_argument(f"--{name}", help="comma separated vector")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n-perms", dest="n_perms", type=int)
    p.add_argument("--dcov-n", dest="dcov_n", type=int)
    p.add_argument("--n-ref", dest="n_ref", type=int)
    p.add_argument("--shards", type=int)
    p.add_argument("--control", choices=list(CONTROLS))
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from ``--config`` and then from the defaults."""
    values = vars(args)
    if values.get("config"):
        try:
            data = json.loads(Path(values["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in data.items():
            key = key.replace("-", "_")
            if key not in values:
                raise UsageError(f"unknown config key {key!r}")
            if values[key] is None:
                values[key] = val
    defaults = {**DEFAULTS, **COMMAND_DEFAULTS.get(values["command"], {})}
    for key, val in defaults.items():
        if key in values and values[key] is None:
            values[key] = val
    return args


def _algebra(args) -> Algebra:
    if args.algebra == "lorentz":
        return Algebra.lorentz(args.dim)
    return Algebra.sym(args.rank)


def _threads(args) -> int:
    return args.threads or os.cpu_count() or 1


def _law(args, alg: Algebra):
    if args.family == "beta":
        p, q = _scalar("p", args.p), _scalar("q", args.q)
        if p is None or q is None:
            raise UsageError("the beta family needs --p and --q")
        return BetaParams(p, q, alg)
    s, t = _floats(args.s), _floats(args.t)
    if s is None or t is None:
        raise UsageError("the beta-Riesz family needs --s and --t")
    return BetaRieszParams(s, t, alg)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_check_algebra(args) -> int:
    alg = _algebra(args)
    report = check_algebra(alg, args.samples or 1000, args.seed)
    _emit(args, _dump(report.as_dict()))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_check_mulalg(args) -> int:
    alg = _algebra(args)
    try:
        rule = MultiplicationRule.parse(args.rule or "quad")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = check_axioms(rule, alg, args.samples or 200, args.seed)
    _emit(args, _dump(report.as_dict()))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_sample(args) -> int:
    alg = _algebra(args)
    law = _law(args, alg)
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.sampler == "exact":
        batch = draw(law, args.n, args.seed, args.shards, _threads(args))
    else:
        thin, chains = args.thin, args.chains
        steps = -(-args.n // chains) * thin
        batch = sample_mh(coords_logpdf(law), alg.identity() * 0.5, steps, args.proposal_scale,
                          np.random.default_rng(args.seed), burn_in=args.burn_in, thin=thin,
                          chains=chains, params=law, seed=args.seed)
        batch.coords = batch.coords[:args.n]
        batch.diagnostics["n"] = args.n
    if (args.format or "csv") == "json":
        data = batch.metadata()
        data["coords"] = batch.coords.tolist()
        _emit(args, _dump(data))
    elif args.out:
        batch.to_csv(args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(alg.coord_names())
        writer.writerows([repr(float(v)) for v in row] for row in batch.coords)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_density(args) -> int:
    alg = _algebra(args)
    law = _law(args, alg)
    rows = []
    for text in args.points or []:
        vals = _floats(text)
        if len(vals) != alg.dim:
            raise UsageError(f"point {text!r} needs {alg.dim} coordinates")
        rows.append(vals)
    if args.points_file:
        rows.extend(read_csv(args.points_file, alg).tolist())
    if not rows:
        raise UsageError("give at least one point with --x or --points-file")
    coords = np.array(rows, dtype=float)
    values = coords_logpdf(law)(coords)
    if (args.format or "csv") == "json":
        _emit(args, _dump({"params": law.as_dict(),
                           "points": coords.tolist(),
                           "logpdf": [None if not np.isfinite(v) else float(v) for v in values]}))
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(alg.coord_names() + ["logpdf"])
        for row, val in zip(coords, values):
            writer.writerow([repr(float(c)) for c in row] + [repr(float(val))])
        _emit(args, buf.getvalue())
    return EXIT_OK


def _case_params(args) -> dict:
    case = args.case
    given = {"p1": _scalar("p1", args.p1), "p2": _scalar("p2", args.p2), "p3": _scalar("p3", args.p3),
             "s1": _floats(args.s1), "s2": _floats(args.s2), "s3": _floats(args.s3)}
    if case == 1 and args.p is not None:
        vals = _floats(args.p)
        if len(vals) != 3:
            raise UsageError("--p for case 1 takes three numbers p1,p2,p3")
        given.update(p1=vals[0], p2=vals[1], p3=vals[2])
    keys = {1: ("p1", "p2", "p3"), 2: ("s1", "s2", "s3"), 3: ("p1", "p3", "s2"), 4: ("p1", "p2", "s3")}[case]
    extra = [k for k, v in given.items() if v is not None and k not in keys]
    if extra:
        raise UsageError(f"case {case} does not take {', '.join('--' + k for k in extra)}")
    defaults = dict(DEFAULT_CASE_PARAMS[case])
    if case == 1:
        defaults = dict(zip(keys, defaults["p"]))
    params = {}
    for k in keys:
        if given[k] is not None:
            params[k] = given[k]
        elif args.rank == 2:
            params[k] = defaults[k]
        else:
            raise UsageError(f"--{k} is required when --rank is not 2")
    return params


def _case_from_rules(args):
    if args.rule is None and args.rule2 is None:
        return args.case
    pair = (args.rule or "quad", args.rule2 or "quad")
    table = {("quad", "quad"): 1, ("tri", "tri"): 2, ("quad", "tri"): 3, ("tri", "quad"): 4}
    if pair not in table:
        raise UsageError(f"rule pair {pair[0]}/{pair[1]} is not one of the four verified cases")
    return table[pair]


def cmd_verify(args) -> int:
    if args.algebra == "lorentz":
        raise UsageError("verification pipelines need exact samplers, available for sym only")
    alg = Algebra.sym(args.rank)
    if args.mode == "k-invariance":
        law = _law(args, alg)
        report = verify_k_invariance(law, args.n, args.seed, alpha=args.alpha, shards=args.shards,
                                     max_workers=_threads(args))
    else:
        args.case = _case_from_rules(args)
        if args.case not in (1, 2, 3, 4):
            raise UsageError("--case must be 1, 2, 3 or 4")
        scenario = Scenario(case=args.case, params=_case_params(args), rank=args.rank, n=args.n, seed=args.seed,
                            alpha=args.alpha, n_perms=args.n_perms, dcov_n=args.dcov_n,
                            n_ref=args.n_ref, shards=args.shards, control=args.control)
        report = verify_direct(scenario, max_workers=_threads(args))
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["name", "statistic", "p_value", "pass"])
        for t in report.tests:
            d = t.as_dict()
            writer.writerow([d["name"], repr(d["statistic"]), "" if d["p_value"] is None else repr(d["p_value"]),
                             d["pass"]])
        _emit(args, buf.getvalue())
    else:
        _emit(args, report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "check-algebra": cmd_check_algebra,
    "check-mulalg": cmd_check_mulalg,
    "sample": cmd_sample,
    "density": cmd_density,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve(args)
        return COMMANDS[args.command](args)
    except (UsageError, SymConeError, ValueError) as exc:
        print(f"symcone {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
