"""Shared helpers for the test suite: fixture loading and seeded random games."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from cibmpe.game import GameSpec, validate_game_spec
from cibmpe.info import (
    GlobalLocal,
    OneDirectionalOneStep,
    OneStepDelay,
    SingleControllerDelay,
    Symmetric,
    Uncontrolled,
    build_information_structure,
)
from cibmpe.io import load_game


def fixture(name: str):
    loaded = load_game(name)
    return loaded.game, loaded.structure


def rand_dist(rng: random.Random, n: int, zeros: float = 0.25) -> list[Fraction]:
    """Random exact distribution on n points; some entries may be exactly zero."""
    while True:
        w = [0 if rng.random() < zeros else rng.randint(1, 5) for _ in range(n)]
        if sum(w):
            return [Fraction(v, sum(w)) for v in w]


def labels(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{k}" for k in range(n)]


def random_spec(rng: random.Random, nx: int, nu: tuple[int, int], ny: tuple[int, int], T: int,
                depends: str = "both", zeros: float = 0.25) -> GameSpec:
    """Random game; ``depends`` is "both", "u1" (controller 1 drives the state) or "none"."""
    def row(t, x, a, b):
        key = {"both": (a, b), "u1": (a,), "none": ()}[depends]
        return cache.setdefault((t, x) + key, rand_dist(rng, nx, zeros))

    cache: dict = {}
    transition = [[[[row(t, x, a, b) for b in range(nu[1])] for a in range(nu[0])] for x in range(nx)]
                  for t in range(T - 1)]
    obs = [[[rand_dist(rng, ny[i], zeros) for _ in range(nx)] for _ in range(T)] for i in range(2)]
    costs = [[[[rng.randint(0, 4) for _ in range(nu[1])] for _ in range(nu[0])] for _ in range(nx)]
             for _ in range(2)]
    return GameSpec(
        horizon=T, states=labels("x", nx), actions_1=labels("a", nu[0]), actions_2=labels("b", nu[1]),
        observations_1=labels("y", ny[0]), observations_2=labels("w", ny[1]),
        initial_dist=rand_dist(rng, nx, zeros / 2), transition=transition,
        obs_kernel_1=obs[0], obs_kernel_2=obs[1], cost_1=costs[0], cost_2=costs[1])


def random_dims(rng: random.Random, max_work: int = 400):
    """(nx, nu, ny, T) with every size in 1..3, T <= 3, and the per-stage
    increment count bounded so the random suites stay fast."""
    while True:
        nx = rng.randint(1, 3)
        nu = (rng.randint(1, 3), rng.randint(1, 3))
        ny = (rng.randint(1, 3), rng.randint(1, 3))
        T = rng.randint(1, 3)
        if (nu[0] * nu[1] * ny[0] * ny[1]) ** max(T - 1, 0) <= max_work:
            return nx, nu, ny, T


def random_game(rng: random.Random, kind=None, depends: str = "both", **kw):
    nx, nu, ny, T = random_dims(rng, **kw)
    spec = random_spec(rng, nx, nu, ny, T, depends)
    g = validate_game_spec(spec)
    return g, build_information_structure(kind or OneStepDelay(), g)


def random_global_local(rng: random.Random, noisy: bool, T: int = 3, correlated: bool = False):
    """Random game with state (global, local_1, local_2) that satisfies the
    structure: dynamics depend on the global state and the actions only.

    The global state starts independent of the locals; in the noisy variant
    the locals also evolve independently of the global state.  With
    ``correlated`` the initial global state is tied to controller 1's local
    state, which the information pattern does not cover.
    """
    G, L1, L2 = ["g0", "g1"], ["0", "1"], ["0", "1"]
    states = [g + a + b for g in G for a in L1 for b in L2]
    nu = (2, 2)

    trans = []
    for _t in range(T - 1):
        stage = []
        rows = {}
        local_law = {(a, b): rand_dist(rng, 4, 0.2) for a in range(nu[0]) for b in range(nu[1])}
        for g in G:
            for a in range(nu[0]):
                for b in range(nu[1]):
                    pg = rand_dist(rng, 2, 0)
                    locs = local_law[(a, b)]
                    if noisy:
                        rows[(g, a, b)] = [pg[G.index(x[:2])] * locs[int(x[2:], 2)] for x in states]
                    else:
                        joint = rand_dist(rng, 8, 0.3)
                        rows[(g, a, b)] = joint
        for x in states:
            stage.append([[rows[(x[:2], a, b)] for b in range(nu[1])] for a in range(nu[0])])
        trans.append(stage)

    if correlated:
        initial = [Fraction(1, 4) if x[:2] == ("g0" if x[2] == "0" else "g1") else Fraction(0) for x in states]
    else:
        pg, pl = rand_dist(rng, 2, 0), rand_dist(rng, 4, 0)
        initial = [pg[G.index(x[:2])] * pl[int(x[2:], 2)] for x in states]

    if noisy:
        obs = [[c + l for c in ("c0", "c1") for l in "01"] for _ in range(2)]
        kernels = []
        for i in range(2):
            per_stage = []
            for _t in range(T):
                channel = {g: rand_dist(rng, 2, 0) for g in G}
                rows = []
                for x in states:
                    loc = x[2 + i]
                    rows.append([channel[x[:2]][int(y[1])] if y[2] == loc else Fraction(0) for y in obs[i]])
                per_stage.append(rows)
            kernels.append(per_stage)
        common_part = lambda y: y[:2]
    else:
        obs = [[g + l for g in G for l in "01"] for _ in range(2)]
        kernels = [[[[Fraction(1) if y == x[:2] + x[2 + i] else Fraction(0) for y in obs[i]] for x in states]
                    for _ in range(T)] for i in range(2)]
        common_part = lambda y: y[:2]

    costs = [[[[rng.randint(0, 3) for _ in range(nu[1])] for _ in range(nu[0])] for _ in states] for _ in range(2)]
    spec = GameSpec(horizon=T, states=states, actions_1=["0", "1"], actions_2=["0", "1"],
                    observations_1=obs[0], observations_2=obs[1], initial_dist=initial, transition=trans,
                    obs_kernel_1=kernels[0], obs_kernel_2=kernels[1], cost_1=costs[0], cost_2=costs[1])
    g = validate_game_spec(spec)
    kind = GlobalLocal(noisy=noisy, state_components={x: (x[:2], x[2], x[3]) for x in states},
                       obs_components=tuple({y: (common_part(y), y[2]) for y in obs[i]} for i in range(2)))
    return g, build_information_structure(kind, g)


def builtin_instances(rng: random.Random, kind_name: str):
    """One random game of a built-in structure kind."""
    if kind_name == "one_step_delay":
        return random_game(rng, OneStepDelay())
    if kind_name == "one_directional_one_step":
        return random_game(rng, OneDirectionalOneStep())
    if kind_name.startswith("single_controller_delay"):
        case = kind_name[-1]
        return random_game(rng, SingleControllerDelay(case=case, d=rng.randint(1, 3)), depends="u1")
    if kind_name == "uncontrolled":
        return random_game(rng, Uncontrolled(d=rng.randint(1, 3)), depends="none")
    if kind_name == "symmetric":
        return random_game(rng, Symmetric())
    if kind_name == "global_local_noiseless":
        return random_global_local(rng, False, T=rng.randint(1, 3))
    if kind_name == "global_local_noisy":
        return random_global_local(rng, True, T=rng.randint(1, 3))
    raise ValueError(kind_name)


BUILTIN_KINDS = ("one_step_delay", "one_directional_one_step", "single_controller_delay_A",
                 "single_controller_delay_B", "global_local_noiseless", "global_local_noisy",
                 "uncontrolled", "symmetric")


def all_pure_pairs(game, pi):
    from cibmpe.belief import pure_prescriptions
    return list(itertools.product(pure_prescriptions(pi, 1, game.n_actions(1)),
                                  pure_prescriptions(pi, 2, game.n_actions(2))))
