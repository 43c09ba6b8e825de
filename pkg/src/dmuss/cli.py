"""Command-line interface.

Every command prints JSON on stdout.  Exit status: 0 success, 1 usage or
I/O error, 2 infeasible rates or failed verification.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import WORKED_EXAMPLE_SETS, worked_example_scheme
from .codec import Payload, place, retrieve
from .errors import AssignmentExhausted, CapacityViolation, DmussError, SynthesisFailed, TooLarge
from .formats import (
    dumps,
    keys_from_json,
    load_problem,
    load_scheme,
    payload_from_json,
    read_json,
    scheme_to_json,
    shares_from_json,
    shares_to_json,
    write_json,
)
from .galois import smallest_prime_greater_than
from .matching import MatchPlan, find_match_plan, validate_match_plan
from .synthesis import extract_privacy_blocks, init_symbolic_generator, synthesize
from .topology import check_perfect_capacity, check_weak_capacity, validate_access_structure
from .verification import certify_ranks, entropy_oracle, max_states_default

log = logging.getLogger("dmuss")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
SEED_ATTEMPTS = 32


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(doc) -> None:
    sys.stdout.write(dumps(doc))


def _output(doc, out: str | None) -> None:
    if out:
        write_json(out, doc)
        _emit({"written": str(out)})
    else:
        _emit(doc)


def cmd_check(args) -> int:
    a, rates = load_problem(args.input)
    if args.privacy == "weak":
        v = check_weak_capacity(a, rates)
    else:
        v = check_perfect_capacity(a, rates, method=args.method)
    if v is None:
        _emit({"feasible": True, "privacy": args.privacy})
        return EXIT_OK
    _emit({"feasible": False, "privacy": args.privacy, "violation": v.to_dict()})
    return EXIT_FAIL


def cmd_synth(args) -> int:
    a, rates = load_problem(args.input)
    default_q = smallest_prime_greater_than(a.user_count)
    # below the default field there is no existence guarantee, so try more seeds
    attempts = SEED_ATTEMPTS if args.q is not None and args.q < default_q else 1
    last = None
    for offset in range(attempts):
        try:
            scheme = synthesize(a, rates, q=args.q, seed=args.seed + offset, retry_budget=args.retry_budget)
            break
        except AssignmentExhausted as exc:
            last = exc
            log.info("seed %d exhausted over GF(%d)", args.seed + offset, exc.q)
    else:
        _emit({"error": "assignment exhausted", "q": last.q, "budget": last.budget,
               "seeds_tried": attempts, "block": last.block_index})
        return EXIT_FAIL
    _output(scheme_to_json(scheme), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    s = load_scheme(args.scheme)
    reports = []
    if args.mode in ("ranks", "both"):
        reports.append(certify_ranks(s))
    if args.mode in ("entropy", "both"):
        reports.append(entropy_oracle(s, args.max_states))
    passed = all(r.passed for r in reports)
    _emit({"pass": passed, "mode": args.mode, "reports": [r.to_dict() for r in reports]})
    return EXIT_OK if passed else EXIT_FAIL


def cmd_encode(args) -> int:
    s = load_scheme(args.scheme)
    p = payload_from_json(read_json(args.payload))
    if args.keys:
        keys = keys_from_json(read_json(args.keys))
    else:
        keys = np.random.default_rng(args.seed)
    y = place(s, p, keys)
    _output(shares_to_json(y, s.node_count), args.out)
    return EXIT_OK


def cmd_decode(args) -> int:
    s = load_scheme(args.scheme)
    y = shares_from_json(read_json(args.shares))
    w = retrieve(s, args.user, y)
    _emit({"user": args.user, "q": s.q, "rate": s.rates[args.user - 1], "L": y.length,
           "columns": [[row[l] for row in w] for l in range(y.length)]})
    return EXIT_OK


# plan listed in the worked example; the demo checks it independently of the matcher
REFERENCE_PLAN = {
    "1": {"2": [3], "3": [5], "4": [6]},
    "2": {"1": [1], "3": [4], "4": [5]},
    "3": {"1": [2], "2": [3], "4": [6]},
    "4": {"1": [1], "2": [2], "3": [4]},
}


def _render(block) -> list[str]:
    return [" ".join("0" if e is None else f"d{e[0]},{e[1]}" for e in row) for row in block.entries]


def cmd_demo(args) -> int:
    a = validate_access_structure(WORKED_EXAMPLE_SETS)
    rates = [1, 1, 1, 1]
    doc = {"access_sets": a.sorted_sets(), "N": a.node_count, "K": a.user_count, "rates": rates}
    v = check_perfect_capacity(a, rates)
    doc["feasible"] = v is None
    doc["infeasible_example"] = check_perfect_capacity(a, [2, 1, 1, 1]).to_dict()

    reference = MatchPlan.from_dict(REFERENCE_PLAN)
    validate_match_plan(a, rates, reference)
    plan = find_match_plan(a, rates)
    doc["reference_plan_valid"] = True
    doc["match_plan"] = plan.to_dict()

    g = init_symbolic_generator(a, rates)
    doc["symbolic_generator"] = g.pattern().splitlines()
    blocks = extract_privacy_blocks(g, reference)
    doc["privacy_blocks"] = {str(b.k): _render(b) for b in blocks}

    fixture = worked_example_scheme()
    ranks = certify_ranks(fixture)
    entropy = entropy_oracle(fixture)
    doc["fixture"] = {"q": fixture.q, "states": fixture.q ** fixture.node_count,
                      "ranks_pass": ranks.passed, "entropy_pass": entropy.passed,
                      "entropy": {c.name: c.observed for c in entropy.checks}}

    scheme = synthesize(a, rates, seed=args.seed)
    doc["synthesized"] = scheme_to_json(scheme)
    rng = np.random.default_rng(args.seed)
    payload = Payload.from_blocks(scheme.q, [[[int(x) for x in rng.integers(0, scheme.q, 8)]] for _ in rates])
    shares = place(scheme, payload, rng)
    doc["roundtrip"] = all(retrieve(scheme, k, shares) == payload.blocks[k - 1] for k in range(1, 5))

    if args.figures:
        from .figures import plot_generator, plot_success_probability

        out = Path(args.figures)
        out.mkdir(parents=True, exist_ok=True)
        p1 = plot_generator(g, fixture, out / "generator_gf2.png")
        p2 = plot_generator(g, scheme, out / f"generator_gf{scheme.q}.png")
        p3, curve = plot_success_probability(blocks, out / "success_probability.png", seed=args.seed)
        doc["figures"] = [str(p1), str(p2), str(p3)]
        doc["success_curve"] = curve
    _emit(doc)
    ok = doc["feasible"] and ranks.passed and entropy.passed and doc["roundtrip"]
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dmuss", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check", help="capacity-region membership")
    c.add_argument("input")
    c.add_argument("--privacy", choices=["perfect", "weak"], default="perfect")
    c.add_argument("--method", choices=["matching", "enumerate"], default="matching")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("synth", help="synthesize a scheme")
    c.add_argument("input")
    c.add_argument("--q", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--retry-budget", type=int, default=64)
    c.add_argument("--out")
    c.set_defaults(func=cmd_synth)

    c = sub.add_parser("verify", help="certify a scheme file")
    c.add_argument("scheme")
    c.add_argument("--mode", choices=["ranks", "entropy", "both"], default="both")
    c.add_argument("--max-states", type=int, default=None)
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("encode", help="place a payload into shares")
    c.add_argument("scheme")
    c.add_argument("payload")
    keys = c.add_mutually_exclusive_group()
    keys.add_argument("--keys")
    keys.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_encode)

    c = sub.add_parser("decode", help="recover one user's message")
    c.add_argument("scheme")
    c.add_argument("user", type=int)
    c.add_argument("shares")
    c.set_defaults(func=cmd_decode)

    c = sub.add_parser("demo", help="run the four-user, six-node worked example")
    c.add_argument("--seed", type=int, default=7)
    c.add_argument("--figures", help="directory for rendered figures")
    c.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"dmuss: {exc}", file=sys.stderr)
        _emit({"error": str(exc)})
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "max_states", None) is None and args.command == "verify":
        args.max_states = max_states_default()
    try:
        return args.func(args)
    except CapacityViolation as exc:
        _emit({"feasible": False, "violation": exc.violation.to_dict()})
        return EXIT_FAIL
    except SynthesisFailed as exc:
        print(f"dmuss: {exc}", file=sys.stderr)
        _emit({"error": "SynthesisFailed", "report": exc.report.to_dict()})
        return EXIT_FAIL
    except TooLarge as exc:
        print(f"dmuss: {exc}", file=sys.stderr)
        _emit({"error": "TooLarge", "states": exc.states, "max_states": exc.max_states})
        return EXIT_USAGE
    except (DmussError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"dmuss: {exc}", file=sys.stderr)
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
