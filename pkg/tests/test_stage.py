import itertools
import random
from fractions import Fraction as F

import pytest

from cibmpe.belief import Prescription, enumerate_reachable_beliefs, initial_belief, make_belief
from cibmpe.errors import MissingContinuationValue, StageMismatch, ValidationError
from cibmpe.stage import (
    build_stage_game,
    enumerate_pure_bne,
    equilibrium_values,
    is_equilibrium,
    solve_mixed_bne,
    stage_best_response_values,
    stage_game_from_costs,
)

from support import fixture, rand_dist, random_game


def stage_two_values(g, s):
    """Values of the all-ones stage-2 equilibrium: (pi(X=1), 0)."""
    graph = enumerate_reachable_beliefs(g, s)
    return {pi: (pi.state_marginal()[1], F(0)) for pi in graph.beliefs(2)}


def test_last_stage_costs_are_the_instantaneous_costs():
    g, s = fixture("example_sec4d.game")
    for pi in enumerate_reachable_beliefs(g, s).beliefs(2):
        sg = build_stage_game(g, s, pi)
        for (x, k1, k2), _ in pi.support():
            for i in (1, 2):
                assert sg.cost[i - 1][(x, k1, k2)] == tuple(
                    tuple(g.cost(i, x, a, b) for b in range(2)) for a in range(2))
        eqs = {(e.prescriptions[0].encoding(), e.prescriptions[1].encoding()): e.values
               for e in enumerate_pure_bne(sg)}
        assert eqs[((1, 1), (1, 1))] == (pi.state_marginal()[1], 0)


def test_first_stage_continuation_terms():
    g, s = fixture("example_sec4d.game")
    pi = initial_belief(g, s)
    sg = build_stage_game(g, s, pi, stage_two_values(g, s))
    for (x, k1, k2), _ in pi.support():
        for a, b in itertools.product(range(2), range(2)):
            extra = sg.cost[0][(x, k1, k2)][a][b] - g.cost(1, x, a, b)
            if a != b:
                assert extra == F(3, 5)
            else:
                assert extra == (F(3, 4) if x == 0 else F(1, 2))
            assert sg.cost[1][(x, k1, k2)][a][b] == g.cost(2, x, a, b)


def test_first_stage_contains_the_flipping_equilibrium():
    g, s = fixture("example_sec4d.game")
    sg = build_stage_game(g, s, initial_belief(g, s), stage_two_values(g, s))
    eqs = enumerate_pure_bne(sg)
    found = {(e.prescriptions[0].encoding(), e.prescriptions[1].encoding()): e.values for e in eqs}
    assert found[((1, 0), (1, 0))] == (F(47, 60), F(1, 3))
    keys = [(e.prescriptions[0].encoding(), e.prescriptions[1].encoding()) for e in eqs]
    assert keys == sorted(keys)


def naive_pure_bne(sg):
    """Definition applied pair by pair over every pure pair."""
    n1, n2 = sg.n_actions
    P1, P2 = sg.n_types
    out = []
    for enc1 in itertools.product(range(n1), repeat=P1):
        for enc2 in itertools.product(range(n2), repeat=P2):
            if any(enc1[k] and not sg.mass(1)[k] for k in range(P1)):
                continue
            if any(enc2[k] and not sg.mass(2)[k] for k in range(P2)):
                continue
            g1, g2 = Prescription.pure(sg.stage, 1, enc1, n1), Prescription.pure(sg.stage, 2, enc2, n2)
            ok = True
            for i, own, opp in ((1, enc1, g2), (2, enc2, g1)):
                for k in sg.positive_types(i):
                    costs = []
                    for u in range(sg.n_actions[i - 1]):
                        c = F(0)
                        for (x, k1, k2), w in sg.belief.support():
                            if (k1, k2)[i - 1] != k:
                                continue
                            v = opp.action((k2, k1)[i - 1])
                            u1, u2 = (u, v) if i == 1 else (v, u)
                            c += w * sg.cost[i - 1][(x, k1, k2)][u1][u2]
                        costs.append(c)
                    if costs[own[k]] != min(costs):
                        ok = False
            if ok:
                out.append((enc1, enc2))
    return out


def random_stage_game(rng, n=(2, 2), shape=(2, 2, 2), zeros=0.2):
    weights = rand_dist(rng, shape[0] * shape[1] * shape[2], zeros)
    g, s = fixture("example_sec4d.game") if shape == (2, 2, 2) else (None, None)
    pi = make_belief(g, s, 1, weights)
    cost = [{a: [[F(rng.randint(0, 4)) for _ in range(n[1])] for _ in range(n[0])] for a, _ in pi.support()}
            for _ in range(2)]
    return stage_game_from_costs(pi, n, cost)


def test_pure_enumeration_matches_the_definition():
    rng = random.Random(41)
    for _ in range(60):
        sg = random_stage_game(rng, n=(rng.randint(1, 3), rng.randint(1, 3)))
        got = [(e.prescriptions[0].encoding(), e.prescriptions[1].encoding()) for e in enumerate_pure_bne(sg)]
        assert got == naive_pure_bne(sg)


def test_matching_pennies():
    g, s = fixture("matching_pennies.game")
    sg = build_stage_game(g, s, initial_belief(g, s))
    assert enumerate_pure_bne(sg) == []
    eq = solve_mixed_bne(sg)
    assert eq.prescriptions[0].rows == ((F(1, 2), F(1, 2)),)
    assert eq.prescriptions[1].rows == ((F(1, 2), F(1, 2)),)
    assert eq.values == (F(1, 2), F(1, 2))
    assert is_equilibrium(sg, *eq.prescriptions)


def test_single_action_game():
    g, s = fixture("example_sec4d.game")
    pi = initial_belief(g, s)
    cost = [{a: [[F(k + 1)]] for k, (a, _) in enumerate(pi.support())},
            {a: [[F(2 * k)]] for k, (a, _) in enumerate(pi.support())}]
    sg = stage_game_from_costs(pi, (1, 1), cost)
    expected = (sum(w * (k + 1) for k, (_, w) in enumerate(pi.support())),
                sum(w * 2 * k for k, (_, w) in enumerate(pi.support())))
    (only,) = enumerate_pure_bne(sg)
    assert only.values == expected
    mixed = solve_mixed_bne(sg)
    assert mixed.values == expected
    assert mixed.prescriptions[0].rows == ((1,), (1,))


def test_best_response_examples():
    g, s = fixture("example_sec4d.game")
    pi = enumerate_reachable_beliefs(g, s).beliefs(2)[0]
    sg = build_stage_game(g, s, pi)
    ones = Prescription.pure(2, 2, (1, 1), 2)
    resp = stage_best_response_values(sg, 1, ones)
    assert resp[0].costs == (0, 0) and resp[0].argmin == {0, 1}
    assert resp[1].costs == (1, 1) and resp[1].argmin == {0, 1}
    with pytest.raises(StageMismatch):
        stage_best_response_values(sg, 1, Prescription.pure(2, 1, (1, 1), 2))


def test_zero_mass_types_are_flagged():
    g, s = fixture("example_sec4d.game")
    pi = make_belief(g, s, 2, [F(1, 2), F(1, 2), 0, 0, 0, 0, 0, 0])
    sg = build_stage_game(g, s, pi)
    resp = stage_best_response_values(sg, 1, Prescription.pure(2, 2, (0, 0), 2))
    assert resp[0].defined and not resp[1].defined
    for e in enumerate_pure_bne(sg):
        assert e.prescriptions[0].action(1) == 0


def test_zero_costs():
    g, s = fixture("zero_cost.game")
    graph = enumerate_reachable_beliefs(g, s)
    zeros = {pi: (0, 0) for pi in graph.beliefs(2)}
    pi = initial_belief(g, s)
    sg = build_stage_game(g, s, pi, zeros)
    for i in (1, 2):
        opp = Prescription.pure(1, 3 - i, (0,) * pi.shape[3 - i], g.n_actions(3 - i))
        for k, resp in stage_best_response_values(sg, i, opp).items():
            if resp.defined:
                assert set(resp.costs) == {0} and resp.argmin == set(range(g.n_actions(i)))
    assert all(e.values == (0, 0) for e in enumerate_pure_bne(sg))


def test_continuation_contract():
    g, s = fixture("example_sec4d.game")
    pi = initial_belief(g, s)
    with pytest.raises(ValidationError):
        build_stage_game(g, s, pi)
    with pytest.raises(MissingContinuationValue):
        build_stage_game(g, s, pi, {})
    last = enumerate_reachable_beliefs(g, s).beliefs(2)[0]
    with pytest.raises(ValidationError):
        build_stage_game(g, s, last, {})


def conditional_costs(sg, i, own, opp):
    """Per positive-mass type: conditional expected cost under the pair."""
    out = {}
    for k in sg.positive_types(i):
        resp = stage_best_response_values(sg, i, opp)[k]
        out[k] = sum(q * resp.costs[u] for u, q in own.support_pairs(k))
    return out


def test_mixed_solutions_satisfy_the_support_condition_and_averaging():
    rng = random.Random(43)
    for _ in range(20):
        g, s = random_game(rng)
        graph = enumerate_reachable_beliefs(g, s)
        T = g.horizon
        cont = None
        for t in range(T, 0, -1):
            nxt = {}
            for pi in graph.beliefs(t):
                sg = build_stage_game(g, s, pi, cont)
                eq = solve_mixed_bne(sg)
                g1, g2 = eq.prescriptions
                for i, own, opp in ((1, g1, g2), (2, g2, g1)):
                    for k, resp in stage_best_response_values(sg, i, opp).items():
                        if resp.defined:
                            assert all(u in resp.argmin for u, _ in own.support_pairs(k))
                    avg = sum(sg.mass(i)[k] * c for k, c in conditional_costs(sg, i, own, opp).items())
                    assert avg == eq.values[i - 1]
                assert equilibrium_values(sg, g1, g2) == eq.values
                if enumerate_pure_bne(sg):
                    assert is_equilibrium(sg, g1, g2)
                for e in enumerate_pure_bne(sg):
                    assert is_equilibrium(sg, *e.prescriptions)
                nxt[pi] = eq.values
            cont = nxt


def test_mixed_solver_is_deterministic():
    rng = random.Random(47)
    for _ in range(10):
        sg = random_stage_game(rng, n=(3, 2))
        assert solve_mixed_bne(sg) == solve_mixed_bne(sg)
