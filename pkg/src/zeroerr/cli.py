"""Command line front end: ``zeroerr <verb> ...``.

Every verb writes JSON (or CSV for traces) with rationals as strings.
Exit codes: 0 ok, 2 bad input, 3 domain failure, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import bss
from .channel import load_channel, zero_pattern
from .decide import (
    DEFAULT_PRECISION,
    InstabilityExponent,
    Verdict,
    decide_solvability,
    instability_exponent,
    load_plant,
    verdict_from_json,
    verify_verdict,
)
from .errors import BudgetExhausted, DomainFailure, ParseError, ZeroErrError
from .exact import parse_rational
from .graphs import CapacityRegistry, capacity_bounds, confusability_graph
from .search import Exhausted, construct_code, search_minimal_gamma, verify_code
from .sim import boundedness_report, load_sim_config, run_simulation

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_BUDGET = 0, 2, 3, 4


def default_precision() -> int:
    raw = os.environ.get("ZEROERR_PRECISION")
    if raw is None:
        return DEFAULT_PRECISION
    try:
        return int(raw)
    except ValueError as exc:
        raise ParseError(f"ZEROERR_PRECISION must be an integer, got {raw!r}") from exc


def _emit(payload, output: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _exponent(args) -> InstabilityExponent:
    if args.base is not None:
        parts = [parse_rational(p) for p in args.base.split(",")]
        if len(parts) == 1:
            return InstabilityExponent.point(parts[0])
        if len(parts) != 2:
            raise ParseError("--base takes 'q' or 'lo,hi'")
        return InstabilityExponent(parts[0], parts[1], False, parts[0] == parts[1])
    if args.plant is None:
        raise ParseError("give --plant or --base")
    return instability_exponent(load_plant(args.plant), args.precision)


def cmd_classify(args) -> dict:
    ch = load_channel(args.channel)
    pattern = zero_pattern(ch)
    g = confusability_graph(pattern)
    return {"pattern": pattern.to_json(), "realizable": pattern.is_realizable, "graph": g.to_adjacency_json()}


def cmd_capacity(args) -> dict:
    ch = load_channel(args.channel)
    reg = CapacityRegistry.load(args.registry) if args.registry else None
    return capacity_bounds(zero_pattern(ch), args.depth, args.vertex_limit, reg).to_json()


def cmd_decide(args) -> dict:
    ch = load_channel(args.channel)
    if args.check:
        with open(args.check) as fh:
            try:
                verdict = verdict_from_json(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid verdict JSON: {exc}") from exc
        return {"outcome": verdict.outcome.value, "verified": verify_verdict(verdict, ch)}
    plant = load_plant(args.plant) if args.plant else None
    if plant is None:
        raise ParseError("decide needs --plant (or --check)")
    verdict: Verdict = decide_solvability(plant, ch, args.depth, args.precision, args.vertex_limit)
    out = verdict.to_json()
    out["verified"] = verify_verdict(verdict, ch)
    return out


def cmd_find_code(args) -> dict:
    ch = load_channel(args.channel)
    pattern = zero_pattern(ch)
    exp = _exponent(args)
    result = construct_code(pattern, exp, args.max_block, args.vertex_limit)
    out = result.to_json()
    out["certificate"] = verify_code(result.code, pattern, exp)
    if args.code_output:
        _emit(result.code.to_json(), args.code_output)
    return out


def cmd_search_gamma(args) -> dict:
    ch = load_channel(args.channel)
    pattern = zero_pattern(ch)
    exp = _exponent(args)
    result = search_minimal_gamma(pattern, exp, args.budget)
    if isinstance(result, Exhausted):
        raise BudgetExhausted(f"no qualifying index among the first {result.n_examined}", used=result.n_examined)
    out = result.to_json()
    out["certificate"] = verify_code(result.code, pattern, exp)
    return out


def cmd_simulate(args) -> dict:
    config = load_sim_config(args.config, trials=args.trials, seed=args.seed, backend=args.backend)
    traces = run_simulation(config)
    threshold = parse_rational(args.threshold) if args.threshold else Fraction(0)
    report = boundedness_report(traces, threshold)
    if args.trace:
        _emit(traces[0].to_csv(config.channel.alphabets), args.trace)
    return {
        "backend": config.resolved_backend,
        "rate_certified": config.rate_certified(args.precision),
        "trials": [tr.summary() for tr in traces],
        "report": report.to_json(),
    }


def cmd_bss_eval(args) -> dict:
    if args.library:
        if args.library not in bss.LIBRARY:
            raise ParseError(f"unknown library program {args.library!r}")
        prog = bss.LIBRARY[args.library]()
    elif args.program:
        with open(args.program) as fh:
            prog = bss.loads_program(fh.read())
    else:
        raise ParseError("bss-eval needs --program or --library")
    values = [parse_rational(a) for a in args.args]
    result, used = bss.evaluate_counted(prog, values, args.budget)
    return {"result": str(result), "steps": used, "arity": prog.arity}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zeroerr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, channel=True):
        if channel:
            sp.add_argument("--channel", required=True, help="channel JSON file")
        sp.add_argument("--output", "-o", help="write the JSON result here instead of stdout")
        sp.add_argument("--precision", type=int, default=None, help="bits for hi/lo <= 1 + 2^-p")
        sp.add_argument("--vertex-limit", type=int, default=64)

    sp = sub.add_parser("classify", help="zero pattern and confusability graph")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("capacity", help="bounds on 2^C0")
    common(sp)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--registry", help="JSON file of known capacities")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("decide", help="solvability verdict for a plant and channel")
    common(sp)
    sp.add_argument("--plant")
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--check", help="re-verify a verdict JSON instead of deciding")
    sp.set_defaults(func=cmd_decide)

    for name, func in (("find-code", cmd_find_code), ("search-gamma", cmd_search_gamma)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--plant")
        sp.add_argument("--base", help="2^eta as 'q' or 'lo,hi' instead of a plant")
        if name == "find-code":
            sp.add_argument("--max-block", type=int, default=2)
            sp.add_argument("--code-output", help="also write the code JSON here")
        else:
            sp.add_argument("--budget", type=int, default=100_000)
        sp.set_defaults(func=func)

    sp = sub.add_parser("simulate", help="closed-loop estimation runs")
    common(sp, channel=False)
    sp.add_argument("--config", required=True)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--backend", choices=["auto", "exact", "float"])
    sp.add_argument("--threshold", help="error threshold for the report")
    sp.add_argument("--trace", help="CSV file for the first trial's trace")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bss-eval", help="evaluate a combinator program")
    common(sp, channel=False)
    sp.add_argument("--program", help="S-expression program file")
    sp.add_argument("--library", help="cl | indicator-nat | exp-n")
    sp.add_argument("--budget", type=int, default=bss.DEFAULT_BUDGET)
    sp.add_argument("args", nargs="*", help="rational arguments")
    sp.set_defaults(func=cmd_bss_eval)
    return p


def _fail(code: int, exc: BaseException) -> int:
    report = {"error": type(exc).__name__, "message": str(exc)}
    used = getattr(exc, "used", None)
    if used is not None:
        report["budget_used"] = used
    sys.stderr.write(json.dumps(report) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.precision is None:
            args.precision = default_precision()
        payload = args.func(args)
        _emit(payload, args.output)
    except ParseError as exc:
        return _fail(EXIT_PARSE, exc)
    except BudgetExhausted as exc:
        return _fail(EXIT_BUDGET, exc)
    except DomainFailure as exc:
        return _fail(EXIT_DOMAIN, exc)
    except ZeroErrError as exc:  # pragma: no cover - every family is handled above
        return _fail(EXIT_DOMAIN, exc)
    except OSError as exc:
        return _fail(EXIT_PARSE, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
