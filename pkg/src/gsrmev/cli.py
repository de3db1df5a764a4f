"""Command-line front end.

Every command prints one JSON document on stdout. Exit codes: 0 success,
2 bad input, 3 invalid order / negative decision / failed check, 4 instance
too large for the exhaustive search.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from .arbitrage import arb_bounds, arbitragable_profit, is_centered, potential, upper_bound
from .curve import DomainError, check_axioms
from .exchange import ExecutionError, Transaction, execute_sequence, miner_profit, user_receipts
from .partition import DEFAULT_FEE, gen_partition_instance, solve_partition_via_mev
from .scalar import format_scalar, parse_scalar
from .scenario import Scenario, ScenarioError, load_scenario
from .sequencing import verify_gsr
from .strategy import SearchConfig, SearchSizeError, achieves_upper_bound, optimize

log = logging.getLogger("gsrmev")

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_SIZE = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": message}))
        self.exit(EXIT_INPUT)


def _search_config(args) -> SearchConfig:
    grid = tuple(parse_scalar(g) for g in (args.grid or ()))
    return SearchConfig(max_n=args.max_n, extra_grid=grid, threads=args.threads)


def cmd_verify(sc: Scenario, args) -> tuple:
    witness = verify_gsr(sc.initial_state, sc.transactions, sc.curve, sc.market.fee, args.order)
    log.info("order %s is %s", list(witness.order), "valid" if witness.valid else "INVALID")
    return witness.to_json(), EXIT_OK if witness.valid else EXIT_NEGATIVE


def cmd_execute(sc: Scenario, args) -> tuple:
    txs = sc.transactions
    if args.strategy:
        with open(args.strategy) as fh:
            raw = json.load(fh)
        txs = [Transaction.from_json(t, sc.exact) for t in raw["sequence"]]
    trace = execute_sequence(sc.initial_state, txs, sc.curve, sc.market)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace.to_jsonl())
    report = {
        "steps": len(trace.steps),
        "final_state": {"x": format_scalar(trace.final_state.x), "y": format_scalar(trace.final_state.y)},
        "miner_profit": format_scalar(trace.final_profit),
        "miner_profit_formula": format_scalar(miner_profit(trace, sc.market)),
        "user_receipts": {
            str(u): [[format_scalar(a), format_scalar(b)] for a, b in r] for u, r in user_receipts(trace).items()
        },
        "gsr_valid": verify_gsr(sc.initial_state, txs, sc.curve, sc.market.fee).valid,
    }
    log.info("executed %d steps, miner profit %s", len(trace.steps), report["miner_profit"])
    return report, EXIT_OK


def cmd_analyze(sc: Scenario, args) -> tuple:
    b = arb_bounds(sc.curve, sc.market)
    report = {
        "L_x": format_scalar(b.lower),
        "R_x": format_scalar(b.upper),
        "centered": is_centered(sc.initial_state, sc.curve, sc.market),
        "potential": format_scalar(potential(sc.initial_state, sc.curve, sc.market, b)),
    }
    if report["centered"]:
        report["arbitragable_profit"] = [
            format_scalar(arbitragable_profit(sc.initial_state, tx, sc.curve, sc.market, b)) for tx in sc.transactions
        ]
        report["upper_bound"] = format_scalar(upper_bound(sc.initial_state, sc.transactions, sc.curve, sc.market, b))
    else:
        report["arbitragable_profit"] = None
        report["upper_bound"] = None
    return report, EXIT_OK


def cmd_optimize(sc: Scenario, args) -> tuple:
    strategy = optimize(sc.initial_state, sc.transactions, sc.curve, sc.market, _search_config(args))
    bound = upper_bound(sc.initial_state, sc.transactions, sc.curve, sc.market)
    log.info("profit %s of bound %s", format_scalar(strategy.declared_profit), format_scalar(bound))
    return strategy.to_json(bound), EXIT_OK


def cmd_decide(sc: Scenario, args) -> tuple:
    ok, witness = achieves_upper_bound(sc.initial_state, sc.transactions, sc.curve, sc.market, _search_config(args))
    bound = upper_bound(sc.initial_state, sc.transactions, sc.curve, sc.market)
    report = {"decision": ok, "upper_bound": format_scalar(bound), "strategy": witness.to_json(bound) if ok else None}
    return report, EXIT_OK if ok else EXIT_NEGATIVE


def cmd_axioms(sc: Scenario, args) -> tuple:
    report = check_axioms(sc.curve, args.lo, args.hi, args.samples)
    return report.to_dict(), EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_reduce(args) -> tuple:
    fee = Fraction(parse_scalar(args.fee))
    config = _search_config(args)
    subset = solve_partition_via_mev(args.integers, fee, config)
    report = {
        "integers": args.integers,
        "half_sum": format_scalar(Fraction(sum(args.integers), 2)),
        "fee": format_scalar(fee),
        "decision": subset is not None,
        "subset": subset,
        "values": None if subset is None else [args.integers[i] for i in subset],
    }
    if args.emit_scenario and 2 * max(args.integers) <= sum(args.integers):
        inst = gen_partition_instance(args.integers, fee)
        report["scenario"] = Scenario(inst.curve, inst.s0, inst.market, inst.transactions).to_json()
    return report, EXIT_OK if subset is not None else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gsrmev", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="human-readable summary on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_scenario(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="scenario JSON file ('-' for stdin)")
        return p

    def with_search(p):
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--max-n", type=int, default=SearchConfig.max_n)
        p.add_argument("--grid", nargs="*", help="extra X-reserve targets for miner trades")
        return p

    p = with_scenario("verify", "check an order against the greedy sequencing rule")
    p.add_argument("--order", type=int, nargs="*", help="transaction indices (default: file order)")
    p = with_scenario("execute", "execute the scenario's transactions (or a strategy's sequence)")
    p.add_argument("--strategy", help="strategy JSON whose sequence replaces the scenario transactions")
    p.add_argument("--trace", help="write the per-step trace as JSON lines here")
    with_scenario("analyze", "arbitrage interval, arbitragable profits, upper bound, potential")
    with_search(with_scenario("optimize", "optimal miner strategy"))
    with_search(with_scenario("decide", "can a strategy reach the upper bound?"))
    p = with_scenario("axioms", "sample the curve axioms")
    p.add_argument("--lo", type=float, default=1.0)
    p.add_argument("--hi", type=float, default=1e6)
    p.add_argument("--samples", type=int, default=10_000)
    p = with_search(sub.add_parser("reduce", help="solve Partition through the miner decision problem"))
    p.add_argument("integers", type=int, nargs="+")
    p.add_argument("--fee", default=format_scalar(DEFAULT_FEE))
    p.add_argument("--emit-scenario", action="store_true", help="include the generated scenario")
    return parser


COMMANDS = {
    "verify": cmd_verify,
    "execute": cmd_execute,
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "decide": cmd_decide,
    "axioms": cmd_axioms,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    try:
        if args.command == "reduce":
            report, code = cmd_reduce(args)
        else:
            sc = load_scenario(sys.stdin if args.scenario == "-" else args.scenario)
            report, code = COMMANDS[args.command](sc, args)
    except SearchSizeError as exc:
        report, code = {"error": str(exc)}, EXIT_SIZE
    except (ScenarioError, DomainError, ExecutionError, ValueError, KeyError, OSError) as exc:
        report, code = {"error": str(exc)}, EXIT_INPUT
    print(json.dumps(report, indent=2))
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
