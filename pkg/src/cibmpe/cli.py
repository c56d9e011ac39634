"""Command-line front end.

Exit codes: 0 ok, 1 validation or check failure, 2 no pure equilibrium,
3 strategy-independence failure during solve, 4 inconclusive (budget).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .belief import DEFAULT_BUDGET, GENERAL, STRATEGY_FREE, enumerate_reachable_beliefs
from .errors import (
    BudgetExceeded,
    CibmpeError,
    IndependenceError,
    NoPureEquilibrium,
    NotATeam,
    ValidationError,
)
from .independence import FAIL, INCONCLUSIVE, check_strategy_independence
from .induction import (
    BEHAVIORAL,
    PURE,
    TEAM,
    parse_selection,
    policy_to_control_laws,
    solve_algorithm1,
    solve_algorithm2,
    solve_team_dp,
)
from .io import dumps_result, load_game, load_result, resolve_path, result_report
from .rational import fmt
from .verification import verify_mpe_conditions, verify_nash

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_PURE = 2
EXIT_DEPENDENT = 3
EXIT_INCONCLUSIVE = 4


def _workers(args) -> int | None:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("CIBMPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"CIBMPE_THREADS must be an integer, got {env!r}") from None
    return None


def cmd_validate(args) -> int:
    loaded = load_game(args.path)
    g, s = loaded.game, loaded.structure
    print(f"ok: {loaded.path}")
    print(f"horizon {g.horizon}, states {g.n_states}, actions {g.n_actions(1)}x{g.n_actions(2)}, "
          f"observations {g.n_obs(1)}x{g.n_obs(2)}")
    sizes = " ".join(f"{len(s.private_space(1, t))}x{len(s.private_space(2, t))}" for t in range(1, g.horizon + 1))
    print(f"structure {type(loaded.kind).__name__}, private spaces {sizes}")
    if g.horizon > 1:
        print("increments " + " ".join(str(len(z)) for z in s.increment_spaces))
    return EXIT_OK


def cmd_solve(args) -> int:
    loaded = load_game(args.path)
    g, s = loaded.game, loaded.structure
    workers = _workers(args)
    report = None
    if args.mode in (PURE, BEHAVIORAL):
        if args.force_independence:
            print("WARNING: strategy-independence check skipped (--force-independence); "
                  "results are unsound if beliefs depend on strategies", file=sys.stderr)
        else:
            report = check_strategy_independence(g, s, budget=args.budget, workers=workers)
            if report.status == INCONCLUSIVE:
                print(report.render(g, s))
                return EXIT_INCONCLUSIVE
            if not report.passed:
                print(report.render(g, s))
                return EXIT_DEPENDENT
    try:
        if args.mode == PURE:
            rule = parse_selection(args.select, lambda p: resolve_path(p, ("", ".json")))
            result = solve_algorithm1(g, s, rule, report=report, force=args.force_independence,
                                      workers=workers, budget=args.budget)
        elif args.mode == BEHAVIORAL:
            result = solve_algorithm2(g, s, report=report, force=args.force_independence,
                                      workers=workers, budget=args.budget)
        else:
            result = solve_team_dp(g, s, workers=workers, budget=args.budget)
    except NoPureEquilibrium as exc:
        print(f"no pure equilibrium at stage {exc.stage}, belief {exc.belief}")
        print("hint: rerun with --mode behavioral")
        return EXIT_NO_PURE
    except NotATeam as exc:
        print(f"not a team problem: {exc}")
        return EXIT_INVALID
    if args.out:
        Path(args.out).write_text(dumps_result(result, g, s), encoding="utf-8")
    if args.report:
        print(result_report(result, g, s))
    v1, v2 = result.initial_values()
    print(f"V1 = {fmt(v1)}, V2 = {fmt(v2)}")
    return EXIT_OK


def cmd_check_independence(args) -> int:
    loaded = load_game(args.path)
    g, s = loaded.game, loaded.structure
    report = check_strategy_independence(g, s, budget=args.budget, behavioral_samples=args.behavioral_samples,
                                         seed=args.seed, workers=_workers(args))
    print(report.render(g, s))
    if report.status == FAIL:
        return EXIT_INVALID
    if report.status == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_enumerate(args) -> int:
    loaded = load_game(args.path)
    g, s = loaded.game, loaded.structure
    graph = enumerate_reachable_beliefs(g, s, args.mode, budget=args.budget, workers=_workers(args))
    print(graph.report() if args.graph else graph.summary())
    if not graph.complete:
        print(f"inconclusive: {graph.frontier} beliefs at the frontier exceed the budget")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_verify(args) -> int:
    loaded = load_game(args.path)
    g, s = loaded.game, loaded.structure
    result = load_result(args.profile, g, s)
    report = verify_nash(g, s, policy_to_control_laws(result, s))
    print(report.render())
    audit = verify_mpe_conditions(g, s, result)
    print(audit.render())
    return EXIT_OK if report.passed else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cibmpe", description="Exact common-information equilibrium solver")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        p.add_argument("path", help="game file (bundled fixture names are accepted)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: CIBMPE_THREADS or 1)")
        if budget:
            p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max beliefs per stage")

    p = sub.add_parser("validate", help="validate a game file")
    common(p, budget=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="compute an equilibrium by backward induction")
    common(p)
    p.add_argument("--mode", choices=(PURE, BEHAVIORAL, TEAM), default=PURE)
    p.add_argument("--select", default="first", help="first | index:K | file:PATH")
    p.add_argument("--out", help="write the serialized result here")
    p.add_argument("--report", action="store_true", help="print per-stage tables")
    p.add_argument("--force-independence", action="store_true",
                   help="skip the strategy-independence check")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-independence", help="check that beliefs are strategy independent")
    common(p)
    p.add_argument("--behavioral-samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check_independence)

    p = sub.add_parser("enumerate", help="count reachable beliefs per stage")
    common(p)
    p.add_argument("--mode", choices=(STRATEGY_FREE, GENERAL), default=STRATEGY_FREE)
    p.add_argument("--graph", action="store_true", help="print every belief and edge")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="check a solver output for profitable deviations")
    common(p, budget=False)
    p.add_argument("--profile", required=True, help="result file written by solve --out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IndependenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEPENDENT
    except BudgetExceeded as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CibmpeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
