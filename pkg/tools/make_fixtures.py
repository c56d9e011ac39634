"""Regenerate the bundled fixture files under src/cibmpe/fixtures.

Run from the repository root: ``python3 tools/make_fixtures.py``.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from cibmpe.belief import make_prescription  # noqa: E402
from cibmpe.induction import OverrideRule, solve_algorithm1, with_prescription  # noqa: E402
from cibmpe.io import FIXTURES, dumps_result, load_game  # noqa: E402

BIN = ["0", "1"]


def frac(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def example_transition():
    def row(x, u1, u2):
        p0 = Fraction(2, 5) if u1 != u2 else (Fraction(1, 4) if x == 0 else Fraction(1, 2))
        return [frac(p0), frac(1 - p0)]
    return [[[row(x, a, b) for b in range(2)] for a in range(2)] for x in range(2)]


EXAMPLE_COST_1 = [[[1, 0], [0, 0]], [[0, 1], [0, 1]]]
EXAMPLE_COST_2 = [[[0, 1], [1, 0]], [[0, 1], [1, 0]]]
PERFECT = [[1, 0], [0, 1]]
BSC = [["2/3", "1/3"], ["1/3", "2/3"]]


def example(horizon=2, structure=None, costs=None, transition=None):
    return {
        "horizon": horizon,
        "states": BIN,
        "actions": [BIN, BIN],
        "observations": [BIN, BIN],
        "initial": ["1/2", "1/2"],
        "transition": transition or example_transition(),
        "obs_kernels": [PERFECT, BSC],
        "costs": costs or [EXAMPLE_COST_1, EXAMPLE_COST_2],
        "information_structure": structure or {"kind": "one_step_delay"},
    }


def uncontrolled_example():
    # same observation channels and costs, but the state moves independently of the actions
    row = ["1/3", "2/3"], ["3/4", "1/4"]
    transition = [[[row[x] for _ in range(2)] for _ in range(2)] for x in range(2)]
    return example(3, {"kind": "uncontrolled", "d": 2}, transition=transition)


def single_controller(case):
    # controller 1 alone drives the state; controller 2 has a noisy view of it
    def row(x, u1):
        p0 = ["3/4", "1/3"][u1] if x == 0 else ["1/2", "1/5"][u1]
        return [p0, frac(1 - Fraction(p0))]
    return {
        "horizon": 3,
        "states": BIN,
        "actions": [BIN, BIN],
        "observations": [BIN, BIN],
        "initial": ["1/3", "2/3"],
        "transition": [[[row(x, a) for _ in range(2)] for a in range(2)] for x in range(2)],
        "obs_kernels": [[["3/4", "1/4"], ["1/4", "3/4"]], BSC],
        "costs": [[[[1, 0], [0, 2]], [[0, 1], [2, 0]]], [[[0, 1], [1, 0]], [[1, 0], [0, 1]]]],
        "information_structure": {"kind": "single_controller_delay", "case": case, "d": 2},
    }


def global_local(noisy):
    states = [g + l1 + l2 for g in "ab" for l1 in BIN for l2 in BIN]
    comps = {x: [x[0], x[1], x[2]] for x in states}
    p_global = {("a", 0, 0): "1/2", ("a", 0, 1): "1/4", ("a", 1, 0): "2/3", ("a", 1, 1): "1/3",
                ("b", 0, 0): "1/5", ("b", 0, 1): "3/5", ("b", 1, 0): "2/5", ("b", 1, 1): "1/2"}

    def local_law(g, u1, u2, l1, l2):
        # locals move with the actions; in the noisy variant they ignore the global state
        q1 = Fraction(1, 3) if u1 == 0 else Fraction(3, 4)
        q2 = Fraction(1, 2) if u2 == 0 else Fraction(1, 5)
        if not noisy and g == "b":
            q1 = 1 - q1
        a = q1 if l1 == "0" else 1 - q1
        b = q2 if l2 == "0" else 1 - q2
        return a * b

    def row(x, u1, u2):
        g = x[0]
        pa = Fraction(p_global[(g, u1, u2)])
        out = []
        for xn in states:
            pg = pa if xn[0] == "a" else 1 - pa
            out.append(frac(pg * local_law(g, u1, u2, xn[1], xn[2])))
        return out

    if noisy:
        obs = [[g + l for g in "ab" for l in BIN] for _ in range(2)]
        channel = [Fraction(4, 5), Fraction(2, 3)]

        def kernel(i):
            rows = []
            for x in states:
                loc = x[1 + i]
                r = []
                for y in obs[i]:
                    if y[1] != loc:
                        r.append("0/1")
                    else:
                        r.append(frac(channel[i] if y[0] == x[0] else 1 - channel[i]))
                rows.append(r)
            return rows

        obs_kernels = [kernel(0), kernel(1)]
        obs_comps = [{y: [y[0], y[1]] for y in obs[i]} for i in range(2)]
    else:
        obs = [[g + l for g in "ab" for l in BIN] for _ in range(2)]
        obs_kernels = [[["1/1" if y == x[0] + x[1 + i] else "0/1" for y in obs[i]] for x in states]
                       for i in range(2)]
        obs_comps = [{y: [y[0], y[1]] for y in obs[i]} for i in range(2)]

    # global state and locals independent at the start
    prior_g = {"a": Fraction(1, 3), "b": Fraction(2, 3)}
    prior_l1 = {"0": Fraction(1, 2), "1": Fraction(1, 2)}
    prior_l2 = {"0": Fraction(1, 4), "1": Fraction(3, 4)}
    initial = [frac(prior_g[x[0]] * prior_l1[x[1]] * prior_l2[x[2]]) for x in states]

    def cost(i):
        out = []
        for x in states:
            g, l1, l2 = x
            rows = []
            for u1 in range(2):
                r = []
                for u2 in range(2):
                    base = (u1 != int(l1)) + (u2 != int(l2)) if i == 0 else (u1 == u2) + (g == "a") * u2
                    r.append(int(base))
                rows.append(r)
            out.append(rows)
        return out

    return {
        "horizon": 3,
        "states": states,
        "actions": [BIN, BIN],
        "observations": obs,
        "initial": initial,
        "transition": [[[row(x, a, b) for b in range(2)] for a in range(2)] for x in states],
        "obs_kernels": obs_kernels,
        "costs": [cost(0), cost(1)],
        "information_structure": {"kind": "global_local", "noisy": noisy, "state_components": comps,
                                  "obs_components": obs_comps},
    }


def matching_pennies():
    return {
        "horizon": 1,
        "states": ["s"],
        "actions": [["h", "t"], ["h", "t"]],
        "observations": [["o"], ["o"]],
        "initial": ["1/1"],
        "obs_kernels": [[["1/1"]], [["1/1"]]],
        "costs": [[[[1, 0], [0, 1]]], [[[0, 1], [1, 0]]]],
        "information_structure": {"kind": "symmetric"},
    }


def write(name: str, data) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
    print("wrote", path.relative_to(ROOT))


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    write("example_sec4d.game", example())
    write("example_sec4d_T4.game", example(4))
    write("example_sec4d_T1.game", example(1))
    write("two_step_delay.game", example(3, {"kind": "delayed_sharing", "d": 2}))
    write("one_directional_one_step.game", example(3, {"kind": "one_directional_one_step"}))
    write("symmetric.game", example(3, {"kind": "symmetric"}))
    write("uncontrolled.game", uncontrolled_example())
    write("single_controller_delay_a.game", single_controller("A"))
    write("single_controller_delay_b.game", single_controller("B"))
    write("global_local_noiseless.game", global_local(False))
    write("global_local_noisy.game", global_local(True))
    zero = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
    write("zero_cost.game", example(2, costs=[zero, zero]))
    write("sec4d_team.game", example(2, costs=[EXAMPLE_COST_1, EXAMPLE_COST_1]))
    write("matching_pennies.game", matching_pennies())
    selection = {"rules": [{"stage": 2, "prescriptions": {"1": {"0": "1", "1": "1"}, "2": {"0": "1", "1": "1"}}}]}
    write("sec4d_selection.json", selection)

    loaded = load_game(FIXTURES / "example_sec4d.game")
    g, s = loaded.game, loaded.structure
    result = solve_algorithm1(g, s, OverrideRule(selection["rules"], "sec4d_selection"))
    (FIXTURES / "sec4d_result.json").write_text(dumps_result(result, g, s), encoding="utf-8")
    identity = make_prescription(g, s, 1, 1, {"0": "0", "1": "1"})
    tampered = with_prescription(result, 1, result.initial_belief, 1, identity)
    (FIXTURES / "sec4d_tampered.json").write_text(dumps_result(tampered, g, s), encoding="utf-8")
    print("wrote result fixtures")


if __name__ == "__main__":
    main()
