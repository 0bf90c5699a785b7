"""Command-line front end.

Subcommands::

    epsobol test    one hypothesis H0: S(u) = S(v) on a CSV file
    epsobol select  screening / add-drop / global tests for stepwise selection
    epsobol bench   replication study on the Ishigami-type benchmark
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .bench import ALPHA_GRID, SCENARIOS, BenchMethod, get_scenario, run_replications
from .core import VacuousHypothesisError, bounding_box_design, sample_rows_design
from .dataio import (
    BENCH_SCHEMA,
    REPORT_SCHEMA,
    SELECTION_SCHEMA,
    ColumnError,
    DataError,
    dumps,
    load_design,
    load_sample,
)
from .selection import Selector, SubsetError, nested_test
from .testing import DEFAULT_K, DEFAULT_MC_DRAWS, DegenerateTestError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COLUMNS = 3
EXIT_DATA = 4
EXIT_HYPOTHESIS = 5
EXIT_DEGENERATE = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _names(value: str | None) -> list[str]:
    if not value:
        return []
    return [s.strip() for s in value.split(",") if s.strip()]


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="delimited text file with a header row")
    p.add_argument("--response", required=True, help="response column")
    p.add_argument("--inputs", help="comma-separated input columns (default: all others)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--drop-missing", action="store_true", help="skip rows with missing values")
    p.add_argument("--method", choices=["mc", "tsvd"], default="tsvd")
    p.add_argument("--K", type=int, default=DEFAULT_K, help="number of design points")
    p.add_argument("--mc-draws", type=int, default=DEFAULT_MC_DRAWS)
    p.add_argument("--tau", type=float, help="override tau_n = 0.1 n^(-1/3)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--design-file", help="explicit design points (columns named like the inputs)")
    p.add_argument("--design-source", choices=["box", "sample"], default="box",
                   help="uniform over the data bounding box, or reuse sample rows")
    p.add_argument("--allow-sample-design", action="store_true",
                   help="permit --design-source sample (not recommended)")
    p.add_argument("--out", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epsobol", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test H0: S(u) = S(v)")
    _add_data_args(t)
    t.add_argument("--u", default="", help="comma-separated columns of u (default: empty)")
    t.add_argument("--v", help="comma-separated columns of v (default: all inputs)")

    s = sub.add_parser("select", help="stepwise non-parametric selection tests")
    _add_data_args(s)
    s.add_argument("--included", default="", help="current working set I")
    s.add_argument("--greedy", action="store_true", help="add/drop automatically at --alpha")

    b = sub.add_parser("bench", help="replication study on the benchmark function")
    b.add_argument("--scenario", required=True)
    b.add_argument("--method", default=BenchMethod.EP_TSVD, help=", ".join(BenchMethod.ALL))
    b.add_argument("--n", type=int, default=1000, help="model-call budget per replication")
    b.add_argument("--K", type=int, default=DEFAULT_K)
    b.add_argument("--N", type=int, default=1000, help="replications")
    b.add_argument("--full", action="store_true", help="N = 10000")
    b.add_argument("--tau", type=float)
    b.add_argument("--mc-draws", type=int, default=DEFAULT_MC_DRAWS)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", required=True,
                   help="output prefix: writes PREFIX.csv, PREFIX_summary.csv and PREFIX.json")
    return parser


def _validate(args) -> None:
    if not 0 < args.alpha < 1:
        raise CliError("--alpha must lie in (0, 1)", EXIT_USAGE)
    if args.K < 1:
        raise CliError("--K must be >= 1", EXIT_USAGE)
    if args.mc_draws < 1000:
        raise CliError("--mc-draws must be >= 1000", EXIT_USAGE)


def _load(args):
    inputs = _names(args.inputs) or None
    try:
        sample, dropped = load_sample(args.data, args.response, inputs, args.delimiter, args.drop_missing)
    except FileNotFoundError as exc:
        raise CliError(f"file not found: {exc.filename}", EXIT_COLUMNS) from exc
    except ColumnError as exc:
        raise CliError(str(exc.args[0]), EXIT_COLUMNS) from exc
    except DataError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    if args.design_file:
        try:
            design = load_design(args.design_file, sample.names, args.delimiter)
        except FileNotFoundError as exc:
            raise CliError(f"file not found: {exc.filename}", EXIT_COLUMNS) from exc
        except ColumnError as exc:
            raise CliError(str(exc.args[0]), EXIT_COLUMNS) from exc
        except DataError as exc:
            raise CliError(str(exc), EXIT_DATA) from exc
    elif args.design_source == "sample":
        if not args.allow_sample_design:
            raise CliError("--design-source sample requires --allow-sample-design", EXIT_USAGE)
        design = sample_rows_design(sample, args.K, args.seed, allow=True)
    else:
        design = bounding_box_design(sample, args.K, args.seed)
    return sample, dropped, design


def _config(args, sample, dropped, design) -> dict:
    return {
        "data": str(args.data),
        "response": args.response,
        "inputs": list(sample.names),
        "n": sample.n,
        "rows_dropped": dropped,
        "method": args.method,
        "K": design.K,
        "mc_draws": args.mc_draws if args.method == "mc" else None,
        "tau": args.tau,
        "alpha": args.alpha,
        "seed": args.seed,
        "design": {"provenance": design.provenance.value, "digest": design.digest()},
    }


def _emit(doc: dict, out: str | None) -> None:
    if out:
        Path(out).write_text(dumps(doc))


def _fmt_p(p) -> str:
    return "    n/a" if p is None else f"{p:7.4f}"


def cmd_test(args) -> int:
    _validate(args)
    sample, dropped, design = _load(args)
    names = list(sample.names)
    u = _names(args.u)
    v = _names(args.v) or names
    unknown = [c for c in u + v if c not in names]
    if unknown:
        raise CliError(f"--u/--v name unknown inputs: {', '.join(unknown)}", EXIT_COLUMNS)
    try:
        report = nested_test(
            sample, [names.index(c) for c in u], [names.index(c) for c in v], design,
            args.method, tau=args.tau, draws=args.mc_draws, seed=args.seed,
        )
    except (SubsetError, VacuousHypothesisError) as exc:
        raise CliError(str(exc), EXIT_HYPOTHESIS) from exc
    except DegenerateTestError as exc:
        raise CliError(str(exc), EXIT_DEGENERATE) from exc
    doc = {
        "schema": REPORT_SCHEMA,
        "config": _config(args, sample, dropped, design),
        "hypothesis": {"u": sorted(u, key=names.index), "v": sorted(v, key=names.index)},
        "report": report.to_dict(),
        "reject": report.p_value <= args.alpha,
    }
    _emit(doc, args.out)
    print(f"H0: S({','.join(doc['hypothesis']['u'])}) = S({','.join(doc['hypothesis']['v'])})")
    print(f"method     {report.method.value}")
    print(f"n, K       {sample.n}, {design.K}")
    print(f"statistic  {report.statistic:.6g}")
    if report.dof is not None:
        print(f"dof        {report.dof}")
    print(f"p-value    {report.p_value:.6g}")
    print(f"decision   {'reject' if doc['reject'] else 'do not reject'} at alpha={args.alpha}")
    if dropped:
        print(f"rows dropped for missing values: {dropped}")
    return EXIT_OK


def cmd_select(args) -> int:
    _validate(args)
    sample, dropped, design = _load(args)
    selector = Selector(sample, design, args.method, args.tau, args.mc_draws, args.seed)
    try:
        state = selector.run(_names(args.included), args.alpha if args.greedy else None)
    except SubsetError as exc:
        raise CliError(str(exc), EXIT_HYPOTHESIS) from exc
    doc = {
        "schema": SELECTION_SCHEMA,
        "config": _config(args, sample, dropped, design),
        "mode": "greedy" if args.greedy else "report",
        "tests_run": selector.tests_run,
        **state.to_dict(),
    }
    _emit(doc, args.out)
    print("one-dimensional screen, H0: S(j) = 0")
    for j, r in state.screen.items():
        print(f"  {j:<20s} p = {_fmt_p(r['p_value'])}")
    for d in state.history:
        print(f"{d.action} {d.input} (p = {d.p_value:.4f})")
    if state.included:
        print(f"working set I = {{{', '.join(state.included)}}}")
        if state.add:
            print("add candidates, H0: S(I) = S(I + j)")
            for j, r in state.add.items():
                print(f"  {j:<20s} p = {_fmt_p(r['p_value'])}")
        print("included inputs, H0: S(I - j) = S(I)")
        for j, r in state.drop.items():
            print(f"  {j:<20s} p = {_fmt_p(r['p_value'])}")
    if state.global_test is not None:
        print(f"global validation, H0: S(I) = S   p = {_fmt_p(state.global_test['p_value'])}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        scenario = get_scenario(args.scenario)
    except KeyError as exc:
        raise CliError(str(exc.args[0]), EXIT_USAGE) from exc
    if args.method not in BenchMethod.ALL:
        raise CliError(f"unknown method {args.method!r}; valid: {', '.join(BenchMethod.ALL)}", EXIT_USAGE)
    N = 10_000 if args.full else args.N
    result = run_replications(
        scenario, args.method, args.n, args.K, N, args.seed, args.tau, args.mc_draws, args.workers
    )
    prefix = Path(args.out)
    if prefix.suffix in (".csv", ".json"):
        prefix = prefix.with_suffix("")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(result.records_csv())
    Path(f"{prefix}_summary.csv").write_text(result.summary_csv(ALPHA_GRID))
    Path(f"{prefix}.json").write_text(dumps({"schema": BENCH_SCHEMA, **result.summary()}))
    print(f"{scenario.id} ({scenario.description}), {args.method}, n={args.n}, K={args.K}, N={N}")
    for a, r in result.summary()["rejection_rate"].items():
        print(f"  rejection rate at alpha={a}: {r:.4f}")
    if result.n_errors:
        print(f"  degenerate replications: {result.n_errors}")
    return EXIT_OK


COMMANDS = {"test": cmd_test, "select": cmd_select, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
