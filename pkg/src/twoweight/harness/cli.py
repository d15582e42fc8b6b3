"""Command line: ``twoweight {gen,eval,norm,check,fuzz}``.

Exit codes: 0 success / suite pass, 1 suite fail, 2 usage or input error.
Outputs go to ``--out``; otherwise into ``$TWOWEIGHT_OUT_DIR`` when set,
otherwise to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import TwoWeightError
from ..estimate import estimate_norm_maximal, estimate_norm_summation
from ..optimize import OptimizerOptions
from .fuzz import fuzz
from .instances import LAMBDA_KINDS, MEASURE_KINDS, InstanceSpec, LambdaGen, MeasureGen, digest, dumps, gen, loads
from .report import RATIO_NAMES, evaluate, write_csv
from .suites import SUITES, SuiteConfig, UnknownSuiteError, check, default_out_dir

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None, default_name: str) -> None:
    if out:
        path = Path(out)
    elif default_out_dir() is not None:
        path = default_out_dir() / default_name
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}", file=sys.stderr)


def _read_instance(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    return loads(text)


def _opts(args) -> OptimizerOptions:
    return OptimizerOptions(restarts=args.restarts, seed=args.seed)


def cmd_gen(args) -> int:
    if args.spec:
        try:
            spec = InstanceSpec.from_dict(json.loads(Path(args.spec).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read spec {args.spec}: {exc}") from None
    else:
        lam = LambdaGen(kind=args.lambda_kind, density=args.density, alpha=args.alpha, path=args.cube)
        spec = InstanceSpec(
            dimension=args.dim, depth=args.depth, sigma=MeasureGen(kind=args.sigma_kind),
            omega=MeasureGen(kind=args.omega_kind), lam=lam, p=args.p, q=args.q, seed=args.seed,
            same_measure=args.same_measure,
        )
    inst = gen(spec)
    _emit(dumps(inst), args.out, f"instance-{digest(inst)}.json")
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = _read_instance(args.instance)
    report = evaluate(inst, _opts(args), args.eps)
    if args.format == "csv":
        text = write_csv(report.csv_rows(), ("digest", "kind", "name", "value"))
    else:
        text = report.to_json()
    _emit(text, args.out, f"report-{report.digest}.{args.format}")
    return EXIT_OK


def cmd_norm(args) -> int:
    inst = _read_instance(args.instance)
    opts = _opts(args)
    result = {"digest": digest(inst)}
    if args.kind in ("summation", "both"):
        est = estimate_norm_summation(inst, opts)
        result["summation"] = {"value": est.value, "converged": est.converged, "witness_f": est.witness_f.tolist()}
    if args.kind in ("maximal", "both"):
        est = estimate_norm_maximal(inst, opts)
        result["maximal"] = {"value": est.value, "converged": est.converged, "witness_f": est.witness_f.tolist()}
    _emit(json.dumps(result, indent=2, sort_keys=True), args.out, f"norm-{result['digest']}.json")
    return EXIT_OK


def cmd_check(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    depths = tuple(range(min(2, args.depth), args.depth + 1))
    cfg = SuiteConfig(seed=args.seed, instances=args.instances, depths=depths, dimension=args.dim,
                      restarts=args.restarts, out_dir=args.out)
    ok = True
    for name in names:
        result = check(name, cfg)
        print(result.summary_line())
        ok &= result.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fuzz(args) -> int:
    if args.target not in RATIO_NAMES:
        raise UsageError(f"unknown target {args.target!r}; known ratios: {', '.join(RATIO_NAMES)}")
    res = fuzz(args.target, args.budget, args.seed, dimension=args.dim, depth=args.depth, p=args.p, q=args.q,
               eps=args.eps, opts=_opts(args))
    print(f"{res.target}: worst ratio {res.ratio!r} after {res.evaluations} evaluations", file=sys.stderr)
    _emit(dumps(res.instance), args.out, f"fuzz-{res.target}-{args.seed}.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoweight", description="Two-weight inequalities on finite dyadic trees.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, restarts=16):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--restarts", type=int, default=restarts)
        p.add_argument("--out", default=None, help="output file (directory for `check`)")

    def shape(p):
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--depth", type=int, default=2)

    def exponents(p):
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--q", type=float, default=1.0)

    g = sub.add_parser("gen", help="generate an instance file")
    common(g)
    shape(g)
    exponents(g)
    g.add_argument("--spec", help="JSON InstanceSpec (overrides the flags below)")
    g.add_argument("--sigma-kind", choices=MEASURE_KINDS[:-1], default="exponential")
    g.add_argument("--omega-kind", choices=MEASURE_KINDS[:-1], default="exponential")
    g.add_argument("--same-measure", action="store_true", help="omega := sigma")
    g.add_argument("--lambda-kind", choices=LAMBDA_KINDS[1:], default="random-sparse")
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--cube", default="0:0", help="cube path for --lambda-kind single-cube")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="full report for an instance file")
    e.add_argument("instance")
    common(e)
    e.add_argument("--eps", type=float, default=None, help="integrability gap for N (default q/4)")
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.set_defaults(func=cmd_eval)

    n = sub.add_parser("norm", help="operator norm estimates for an instance file")
    n.add_argument("instance")
    common(n)
    n.add_argument("--kind", choices=("summation", "maximal", "both"), default="both")
    n.set_defaults(func=cmd_norm)

    c = sub.add_parser("check", help="run a property suite")
    c.add_argument("suite", help=f"one of: {', '.join(SUITES)}, or 'all'")
    common(c, restarts=8)
    c.add_argument("--dim", type=int, default=1)
    c.add_argument("--depth", type=int, default=4, help="largest tree depth drawn")
    c.add_argument("--instances", type=int, default=None, help="override the suite's instance count")
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("fuzz", help="search for instances with a large ratio")
    common(f, restarts=8)
    shape(f)
    exponents(f)
    f.add_argument("--target", default="S_over_N")
    f.add_argument("--budget", type=int, default=100)
    f.add_argument("--eps", type=float, default=None)
    f.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "check" and args.suite != "all" and args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; available: {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, UnknownSuiteError, TwoWeightError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
