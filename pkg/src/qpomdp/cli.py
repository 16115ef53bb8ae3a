"""Command-line interface: ``qpomdp solve | verify | simulate | gen | bench``.

Exit codes: 0 success (almost-sure winning / certificate holds), 1 usage
error, 2 input error, 3 no winning policy in the class (or certificate
refuted), 4 resource cap exceeded.  Results go to standard output and
diagnostics to standard error.
"""
import argparse
import sys
from typing import List, Optional

from . import ingest, objective as obj
from .model import ModelError, ResourceLimitError
from .policy import export, import_policy
from .product import dump
from .verify import PolicyMismatch, check, simulate

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NOT_FOUND, EXIT_CAP = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_inputs(args):
    model = ingest.parse(_read(args.model))
    objective = None
    if getattr(args, "objective", None):
        objective = obj.parse_objective(_read(args.objective))
    return model, objective


def _analyzed(args):
    """The model policies refer to: as given with --raw, else as solve builds it."""
    from .solve import prepare
    model, objective = _load_inputs(args)
    if args.raw:
        if objective is not None:
            raise UsageError("--raw cannot be combined with --objective")
        return model
    _, reduction = prepare(model, objective, args.reads)
    return reduction.model


def cmd_solve(args, out) -> int:
    from .solve import solve
    model, objective = _load_inputs(args)
    result = solve(model, objective, args.cap, reads=args.reads)
    if args.dump_product:
        _write(args.dump_product, dump(result.product))
    if not result.solution.almost_sure:
        out.write("NOT-FOUND-IN-CLASS\n")
        out.write(f"reduction: {result.reduction}\nproduct states: {result.product.n_states()}\n")
        _timing(args, out, result.seconds)
        return EXIT_NOT_FOUND
    text = export(result.policy, result.analyzed)
    out.write("ALMOST-SURE\n")
    out.write(f"reduction: {result.reduction}\nproduct states: {result.product.n_states()}\n")
    if args.policy_out:
        _write(args.policy_out, text)
    else:
        out.write(text)
    if args.model_out:
        _write(args.model_out, ingest.write(result.analyzed))
    out.write(result.certificate.to_text(result.analyzed, result.policy))
    _timing(args, out, result.seconds)
    return EXIT_OK


def _timing(args, out, seconds: float) -> None:
    if not args.quiet:
        out.write(f"time: {seconds:.3f}s\n")


def cmd_verify(args, out) -> int:
    model = _analyzed(args)
    policy = import_policy(_read(args.policy), model)
    cert = check(model, policy)
    if args.csv:
        out.write(cert.to_csv(model, policy))
    else:
        out.write(cert.to_text(model, policy))
    return EXIT_OK if cert.verdict else EXIT_NOT_FOUND


def cmd_simulate(args, out) -> int:
    model = _analyzed(args)
    policy = import_policy(_read(args.policy), model)
    stats = simulate(model, policy, args.steps, args.episodes, args.seed)
    out.write(f"episodes: {stats.episodes}\nsteps: {stats.steps}\n")
    for low, count in sorted(stats.tail_min_counts().items()):
        out.write(f"tail min priority {low}: {count}\n")
    finals = {}
    for s in stats.final_states:
        finals[model.state_names[s]] = finals.get(model.state_names[s], 0) + 1
    for name in sorted(finals):
        out.write(f"final {name}: {finals[name]}\n")
    return EXIT_OK


def cmd_gen(args, out) -> int:
    from .bench.suite import BenchSpec, generate
    try:
        spec = BenchSpec(args.family, args.params, args.objective_kind)
    except ValueError as exc:
        raise UsageError(str(exc))
    model, _, objective = generate(spec)
    text = ingest.write(model)
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    if objective is not None and args.objective_out:
        _write(args.objective_out, obj.write_objective(objective))
    return EXIT_OK


def cmd_bench(args, out) -> int:
    from .bench.suite import run_suite, select, to_csv, to_text
    selection = None if args.suite in ("table1", "all") else args.suite.split(",")
    if not select(selection):
        raise UsageError(f"no benchmark rows match {args.suite!r}")
    results = run_suite(selection, args.timeout, args.cap)
    if args.quiet:
        for r in results:
            r.time_ms = 0.0
    out.write(to_text(results))
    if args.out:
        _write(args.out, to_csv(results))
    skipped = len(select(selection)) - len(results)
    if skipped:
        sys.stderr.write(f"time budget exhausted: {skipped} rows not run\n")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpomdp", description="Almost-sure analysis of POMDPs with parity objectives.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, objective=True):
        p.add_argument("--model", required=True, help=".qpomdp model file")
        if objective:
            p.add_argument("--objective", help=".qobj objective file")
            p.add_argument("--reads", choices=obj.READS, default="entered",
                           help="label the automaton reads on each step")
        p.add_argument("--quiet", action="store_true", help="suppress the timing line")

    p = sub.add_parser("solve", help="decide almost-sure winning and emit a certified policy")
    common(p)
    p.add_argument("--policy-out", help="write the policy (.qpol) here instead of stdout")
    p.add_argument("--model-out", help="write the analyzed model the policy refers to")
    p.add_argument("--dump-product", help="write a listing of the belief product")
    p.add_argument("--cap", type=int, help="maximum number of product states")
    p.set_defaults(func=cmd_solve)

    for name, func, help_text in (("verify", cmd_verify, "check a policy exactly"),
                                  ("simulate", cmd_simulate, "Monte Carlo runs of a policy")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.add_argument("--policy", required=True, help=".qpol policy file")
        p.add_argument("--raw", action="store_true",
                       help="use the model exactly as given (no reduction)")
        p.set_defaults(func=func)
    sub.choices["verify"].add_argument("--csv", action="store_true", help="CSV certificate")
    sim = sub.choices["simulate"]
    sim.add_argument("--steps", type=int, default=100)
    sim.add_argument("--episodes", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen", help="write a benchmark model")
    p.add_argument("--family", required=True)
    p.add_argument("--params", default="", help="variant, e.g. small, large-hard, 4x4, k2-c3, 1, A")
    p.add_argument("--objective-kind", help="objective for hallway/maze models")
    p.add_argument("--out", help="model file (default: stdout)")
    p.add_argument("--objective-out", help="objective file for hallway/maze models")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run benchmark rows")
    p.add_argument("--suite", default="table1",
                   help="table1, or comma-separated row prefixes such as grid,maze/C")
    p.add_argument("--out", help="CSV results file")
    p.add_argument("--timeout", type=float, help="stop starting rows after this many seconds")
    p.add_argument("--cap", type=int, help="maximum number of product states per row")
    p.add_argument("--quiet", action="store_true", help="report zero times (byte-stable output)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = make_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource cap exceeded: {exc}\n")
        return EXIT_CAP
    except ingest.ParseError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (ModelError, PolicyMismatch, OSError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
