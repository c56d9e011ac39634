"""One-stage Bayesian games and their pure and mixed equilibria.

The stage game at belief pi has one type per private realization; agent i's
cost is c^i plus the continuation value of the successor belief.  Types
with zero mass under pi are fixed to the first action and exempt from the
best-response conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from ._simplex import feasible_point
from .belief import Belief, Prescription, belief_update_strategy_free, model_for
from .errors import MissingContinuationValue, NoEquilibriumFound, StageMismatch, ValidationError
from .game import ValidatedGame
from .info import InformationStructure
from .rational import ONE, ZERO


@dataclass(frozen=True, eq=False)
class StageGame:
    stage: int
    belief: Belief
    n_actions: tuple[int, int]
    # cost[i-1][(x, k1, k2)][u1][u2] = K^i, for atoms in the support of the belief
    cost: tuple
    # table[i-1][k][u][k_opp][v]: sum_x pi(x, k, k_opp) K^i with agent i playing u, opponent v
    table: tuple

    @property
    def n_types(self) -> tuple[int, int]:
        return self.belief.shape[1], self.belief.shape[2]

    def mass(self, i: int) -> tuple[Fraction, ...]:
        return self.belief.private_mass(i)

    def positive_types(self, i: int) -> list[int]:
        return [k for k, w in enumerate(self.mass(i)) if w]


@dataclass(frozen=True)
class StageEquilibrium:
    prescriptions: tuple[Prescription, Prescription]
    values: tuple[Fraction, Fraction]


@dataclass(frozen=True)
class TypeResponse:
    """Conditional expected cost of each action for one type; None for zero-mass types."""

    costs: tuple[Fraction, ...] | None
    argmin: frozenset[int] | None

    @property
    def defined(self) -> bool:
        return self.costs is not None


def build_stage_game(game: ValidatedGame, s: InformationStructure, pi: Belief,
                     continuation: Mapping | None = None) -> StageGame:
    """SG_t(pi); ``continuation`` maps stage-(t+1) beliefs to (V1, V2) and is required iff t < T."""
    t = pi.stage
    m = model_for(game, s)
    if pi.shape != m.shape(t):
        raise StageMismatch("belief does not match the stage spaces")
    last = t == game.horizon
    if last and continuation is not None:
        raise ValidationError("the last stage takes no continuation values")
    if not last and continuation is None:
        raise ValidationError(f"stage {t} needs continuation values for stage {t + 1}")
    n1, n2 = game.n_actions(1), game.n_actions(2)

    future: dict = {}

    def value_after(z):
        v = future.get(z)
        if v is None:
            post = belief_update_strategy_free(game, s, pi, z)
            try:
                v = continuation[post]
            except KeyError:
                raise MissingContinuationValue(post.render()) from None
            future[z] = v = (Fraction(v[0]), Fraction(v[1]))
        return v

    cost1, cost2 = {}, {}
    for (x, k1, k2), _ in pi.support():
        rows1, rows2 = [], []
        for u1 in range(n1):
            r1, r2 = [], []
            for u2 in range(n2):
                a, b = game.cost(1, x, u1, u2), game.cost(2, x, u1, u2)
                if not last:
                    for z, _xn, _n1, _n2, q in m.successors(t, x, k1, k2, u1, u2):
                        v1, v2 = value_after(z)
                        a += q * v1
                        b += q * v2
                r1.append(a)
                r2.append(b)
            rows1.append(tuple(r1))
            rows2.append(tuple(r2))
        cost1[(x, k1, k2)] = tuple(rows1)
        cost2[(x, k1, k2)] = tuple(rows2)
    return _assemble(t, pi, (n1, n2), (cost1, cost2))


def stage_game_from_costs(pi: Belief, n_actions: tuple[int, int], cost) -> StageGame:
    """Stage game from an explicit K table ``cost[i-1][(x, k1, k2)][u1][u2]`` on the support."""
    cost = tuple({a: tuple(tuple(Fraction(v) for v in row) for row in tensor[a]) for a, _ in pi.support()}
                 for tensor in cost)
    return _assemble(pi.stage, pi, tuple(n_actions), cost)


def _assemble(t: int, pi: Belief, n_actions: tuple[int, int], cost: tuple) -> StageGame:
    _, P1, P2 = pi.shape
    n1, n2 = n_actions
    t1 = [[[[ZERO] * n2 for _ in range(P2)] for _ in range(n1)] for _ in range(P1)]
    t2 = [[[[ZERO] * n1 for _ in range(P1)] for _ in range(n2)] for _ in range(P2)]
    for (x, k1, k2), w in pi.support():
        K1, K2 = cost[0][(x, k1, k2)], cost[1][(x, k1, k2)]
        for u1 in range(n1):
            for u2 in range(n2):
                t1[k1][u1][k2][u2] += w * K1[u1][u2]
                t2[k2][u2][k1][u1] += w * K2[u1][u2]
    freeze = lambda nested: tuple(tuple(tuple(tuple(r) for r in b) for b in a) for a in nested)
    return StageGame(t, pi, n_actions, cost, (freeze(t1), freeze(t2)))


# -- evaluation ------------------------------------------------------------------


def _type_costs(sg: StageGame, i: int, k: int, opponent: Prescription) -> tuple[Fraction, ...]:
    """Unnormalized expected cost of each action of type k (scaled by the type's mass)."""
    tab = sg.table[i - 1][k]
    out = []
    for row in tab:
        acc = ZERO
        for ko, vec in enumerate(row):
            for v, q in opponent.support_pairs(ko):
                if vec[v]:
                    acc += q * vec[v]
        out.append(acc)
    return tuple(out)


def stage_best_response_values(sg: StageGame, i: int, opponent: Prescription) -> dict[int, TypeResponse]:
    """For each type of agent i: conditional expected cost of every action and the argmin set."""
    j = 3 - i
    if opponent.player != j or len(opponent.rows) != sg.n_types[j - 1]:
        raise StageMismatch(f"opponent prescription must belong to controller {j} at this stage")
    mass = sg.mass(i)
    out = {}
    for k in range(sg.n_types[i - 1]):
        if not mass[k]:
            out[k] = TypeResponse(None, None)
            continue
        costs = tuple(c / mass[k] for c in _type_costs(sg, i, k, opponent))
        best = min(costs)
        out[k] = TypeResponse(costs, frozenset(u for u, c in enumerate(costs) if c == best))
    return out


def equilibrium_values(sg: StageGame, g1: Prescription, g2: Prescription) -> tuple[Fraction, Fraction]:
    """E_pi[K^i] under the prescription pair."""
    vals = [ZERO, ZERO]
    for (x, k1, k2), w in sg.belief.support():
        for u1, a in g1.support_pairs(k1):
            for u2, b in g2.support_pairs(k2):
                q = w * a * b
                vals[0] += q * sg.cost[0][(x, k1, k2)][u1][u2]
                vals[1] += q * sg.cost[1][(x, k1, k2)][u1][u2]
    return vals[0], vals[1]


def is_equilibrium(sg: StageGame, g1: Prescription, g2: Prescription) -> bool:
    """Support-in-argmin test for every positive-mass type of both agents."""
    for i, own, opp in ((1, g1, g2), (2, g2, g1)):
        for k, resp in stage_best_response_values(sg, i, opp).items():
            if resp.defined and any(u not in resp.argmin for u, _ in own.support_pairs(k)):
                return False
    return True


# -- pure equilibria ---------------------------------------------------------------


def _argmin_sets(sg: StageGame, i: int, opponent: Prescription) -> list[tuple[int, ...]]:
    """Per type: the argmin actions (positive mass) or (0,) for zero-mass types."""
    mass = sg.mass(i)
    out = []
    for k in range(sg.n_types[i - 1]):
        if not mass[k]:
            out.append((0,))
            continue
        costs = _type_costs(sg, i, k, opponent)
        best = min(costs)
        out.append(tuple(u for u, c in enumerate(costs) if c == best))
    return out


def enumerate_pure_bne(sg: StageGame) -> list[StageEquilibrium]:
    """All pure Bayesian Nash equilibria, ordered by (encoding of g1, encoding of g2)."""
    n1, n2 = sg.n_actions
    t = sg.stage
    mass2 = sg.mass(2)
    choices2 = [range(n2) if mass2[k] else (0,) for k in range(sg.n_types[1])]
    found = []
    for enc2 in itertools.product(*choices2):
        g2 = Prescription.pure(t, 2, enc2, n2)
        for enc1 in itertools.product(*_argmin_sets(sg, 1, g2)):
            g1 = Prescription.pure(t, 1, enc1, n1)
            best2 = _argmin_sets(sg, 2, g1)
            if all(enc2[k] in best2[k] for k in range(len(enc2))):
                found.append((enc1, enc2, g1, g2))
    found.sort(key=lambda f: (f[0], f[1]))
    return [StageEquilibrium((g1, g2), equilibrium_values(sg, g1, g2)) for _, _, g1, g2 in found]


# -- mixed equilibria ----------------------------------------------------------------


def _nonempty_subsets(n: int) -> list[tuple[int, ...]]:
    return [c for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]


def _support_profiles(agents: list[tuple[int, int]], n_actions: tuple[int, int]):
    """Support profiles by ascending total size, then lexicographically; generated lazily."""
    subsets = {i: sorted(_nonempty_subsets(n_actions[i - 1])) for i in (1, 2)}
    options = [subsets[i] for i, _ in agents]
    widest = [n_actions[i - 1] for i, _ in agents]

    def fill(a: int, left: int):
        if a == len(agents):
            yield ()
            return
        rest = len(agents) - a - 1
        for s in options[a]:
            r = left - len(s)
            if rest <= r <= sum(widest[a + 1:]):
                for tail in fill(a + 1, r):
                    yield (s,) + tail

    for total in range(len(agents), sum(widest) + 1):
        yield from fill(0, total)


def _opponent_mix(sg: StageGame, i: int, own: dict, opp: dict) -> list | None:
    """Find the opponent's mixture (support within ``opp``) making every type of
    agent i indifferent over ``own`` and no better off outside it."""
    j = 3 - i
    nj = sg.n_actions[j - 1]
    var = {}
    for kj, supp in opp.items():
        for v in supp:
            var[(kj, v)] = len(var)
    eq, ub = [], []
    for kj, supp in opp.items():
        row = [ZERO] * len(var)
        for v in supp:
            row[var[(kj, v)]] = ONE
        eq.append((row, ONE))
    for ki, supp in own.items():
        tab = sg.table[i - 1][ki]

        def linear(u):
            row = [ZERO] * len(var)
            for (kj, v), c in var.items():
                row[c] = tab[u][kj][v]
            return row

        ref = linear(supp[0])
        for u in supp[1:]:
            eq.append(([a - b for a, b in zip(linear(u), ref)], ZERO))
        for u in range(sg.n_actions[i - 1]):
            if u not in supp:
                ub.append(([a - b for a, b in zip(ref, linear(u))], ZERO))
    x = feasible_point(len(var), eq, ub)
    if x is None:
        return None
    rows = {}
    for kj, supp in opp.items():
        row = [ZERO] * nj
        for v in supp:
            row[v] = x[var[(kj, v)]]
        rows[kj] = tuple(row)
    return rows


def _behavioral(t: int, i: int, n_types: int, n_actions: int, rows: dict) -> Prescription:
    point = tuple(ONE if u == 0 else ZERO for u in range(n_actions))
    return Prescription(t, i, tuple(rows.get(k, point) for k in range(n_types)))


class _Dominance:
    """Cached test: is action u of type k of agent i strictly dominated once the
    opponent is restricted to the given supports?  A dominated action can never
    be a best reply, so profiles using one are infeasible."""

    def __init__(self, sg: StageGame):
        self.sg = sg
        self.cache: dict = {}

    def dominated(self, i: int, k: int, u: int, opp: tuple) -> bool:
        key = (i, k, u, opp)
        hit = self.cache.get(key)
        if hit is None:
            tab = self.sg.table[i - 1][k]
            hit = any(
                sum((min(tab[u][kj][v] - tab[w][kj][v] for v in supp) for kj, supp in opp), ZERO) > 0
                for w in range(self.sg.n_actions[i - 1]) if w != u)
            self.cache[key] = hit
        return hit

    def excludes(self, supp: dict) -> bool:
        for i in (1, 2):
            opp = tuple(supp[3 - i].items())
            for k, s in supp[i].items():
                if any(self.dominated(i, k, u, opp) for u in s):
                    return True
        return False


def solve_mixed_bne(sg: StageGame) -> StageEquilibrium:
    """First behavioral equilibrium found by support enumeration over the agent form."""
    agents = [(1, k) for k in sg.positive_types(1)] + [(2, k) for k in sg.positive_types(2)]
    t = sg.stage
    dominance = _Dominance(sg)
    for profile in _support_profiles(agents, sg.n_actions):
        supp = {1: {}, 2: {}}
        for (i, k), s in zip(agents, profile):
            supp[i][k] = s
        if dominance.excludes(supp):
            continue
        mix2 = _opponent_mix(sg, 1, supp[1], supp[2])
        if mix2 is None:
            continue
        mix1 = _opponent_mix(sg, 2, supp[2], supp[1])
        if mix1 is None:
            continue
        g1 = _behavioral(t, 1, sg.n_types[0], sg.n_actions[0], mix1)
        g2 = _behavioral(t, 2, sg.n_types[1], sg.n_actions[1], mix2)
        return StageEquilibrium((g1, g2), equilibrium_values(sg, g1, g2))
    raise NoEquilibriumFound(f"support enumeration exhausted at stage {t}")
