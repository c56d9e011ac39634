"""Backward induction over the reachable belief graph.

``solve_algorithm1`` selects a pure stage equilibrium at every belief,
``solve_algorithm2`` a behavioral one, and ``solve_team_dp`` jointly
minimizes the common cost of a team over pure prescription pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .belief import (
    GENERAL,
    STRATEGY_FREE,
    DEFAULT_BUDGET,
    Belief,
    BeliefGraph,
    Prescription,
    _forward,
    _map,
    _posterior,
    enumerate_reachable_beliefs,
    model_for,
    pure_prescriptions,
    require_complete,
)
from .errors import IndependenceError, MissingProfileEntry, NoPureEquilibrium, NotATeam, SelectionError
from .game import ValidatedGame
from .independence import IndependenceReport, check_strategy_independence
from .info import InformationStructure, render
from .rational import ONE, ZERO, to_fraction
from .stage import StageEquilibrium, build_stage_game, enumerate_pure_bne, solve_mixed_bne

PURE = "pure"
BEHAVIORAL = "behavioral"
TEAM = "team"


# -- selection -----------------------------------------------------------------


class SelectionRule:
    """Chooses one of the pure stage equilibria found at a belief."""

    name = "first"

    def choose(self, t: int, pi: Belief, equilibria: list[StageEquilibrium],
               game: ValidatedGame, s: InformationStructure) -> int:
        return 0


class FirstRule(SelectionRule):
    pass


@dataclass
class IndexRule(SelectionRule):
    index: int

    @property
    def name(self) -> str:
        return f"index:{self.index}"

    def choose(self, t, pi, equilibria, game, s) -> int:
        if self.index >= len(equilibria):
            raise SelectionError(f"stage {t}: only {len(equilibria)} equilibria, index {self.index} requested")
        return self.index


@dataclass
class OverrideRule(SelectionRule):
    """Per-stage (optionally per-belief) required prescriptions.

    Each entry is ``{"stage": t, "belief": [weights] (optional),
    "prescriptions": {"1": {p: action}, "2": {p: action}}}`` with private
    realizations rendered as strings.  Stages without an entry fall back to
    the first equilibrium.
    """

    entries: list
    source: str = "inline"

    @property
    def name(self) -> str:
        return f"file:{self.source}"

    def choose(self, t, pi, equilibria, game, s) -> int:
        entry = self._entry(t, pi)
        if entry is None:
            return 0
        mass = (pi.private_mass(1), pi.private_mass(2))
        for k, eq in enumerate(equilibria):
            if all(self._agrees(entry, i, eq.prescriptions[i - 1], mass[i - 1], game, s) for i in (1, 2)):
                return k
        raise SelectionError(f"stage {t}: no equilibrium matches the requested prescriptions at belief {pi.render()}")

    def _entry(self, t: int, pi: Belief):
        fallback = None
        for e in self.entries:
            if e.get("stage") != t:
                continue
            if "belief" in e:
                if tuple(to_fraction(w) for w in e["belief"]) == pi.weights:
                    return e
            elif fallback is None:
                fallback = e
        return fallback

    @staticmethod
    def _agrees(entry, i, g: Prescription, mass, game, s) -> bool:
        want = entry.get("prescriptions", {}).get(str(i))
        if want is None:
            return True
        for k, p in enumerate(s.private_space(i, g.stage)):
            if not mass[k]:
                continue
            if render(p) not in want:
                raise SelectionError(f"selection entry misses the private realization {render(p)!r} of controller {i}")
            if g.action(k) != game.action_index(i, want[render(p)]):
                return False
        return True


def parse_selection(rule: str | SelectionRule | None, resolve: Callable[[str], Path] | None = None) -> SelectionRule:
    """``first`` | ``index:K`` | ``file:PATH`` (JSON list of entries or ``{"rules": [...]}``)."""
    if rule is None or isinstance(rule, SelectionRule):
        return rule or FirstRule()
    if rule == "first":
        return FirstRule()
    if rule.startswith("index:"):
        try:
            k = int(rule[6:])
        except ValueError:
            raise SelectionError(f"bad selection index in {rule!r}") from None
        if k < 0:
            raise SelectionError("selection index must be >= 0")
        return IndexRule(k)
    if rule.startswith("file:"):
        path = (resolve or Path)(rule[5:])
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SelectionError(f"cannot read selection file {path}: {exc}") from None
        entries = data.get("rules", []) if isinstance(data, dict) else data
        return OverrideRule(list(entries), source=rule[5:])
    raise SelectionError(f"unknown selection rule {rule!r}")


# -- results -------------------------------------------------------------------------


@dataclass
class EquilibriumResult:
    mode: str
    graph: BeliefGraph
    # values[t-1][belief] = (V1, V2); team mode stores (V, V)
    values: list[dict]
    # policy[t-1][belief] = (g1, g2)
    policy: list[dict]
    # pure mode: every stage equilibrium found, and the chosen index
    equilibria: list[dict] = field(default_factory=list)
    selection: list[dict] = field(default_factory=list)
    selection_rule: str = ""

    @property
    def horizon(self) -> int:
        return len(self.values)

    @property
    def initial_belief(self) -> Belief:
        return self.graph.stages[0][0]

    def initial_values(self) -> tuple[Fraction, Fraction]:
        return self.values[0][self.initial_belief]

    @property
    def team_value(self) -> Fraction:
        return self.initial_values()[0]


def _require_independence(game, s, report, force, workers):
    if force:
        return None
    if report is None:
        report = check_strategy_independence(game, s, workers=workers)
    if not report.passed:
        raise IndependenceError(report)
    return report


def solve_algorithm1(game: ValidatedGame, s: InformationStructure, selection="first",
                     report: IndependenceReport | None = None, force: bool = False,
                     workers: int | None = None, budget: int = DEFAULT_BUDGET) -> EquilibriumResult:
    """Pure-prescription backward induction.  Raises NoPureEquilibrium at the first
    (t, belief), scanning from the last stage, whose stage game has no pure equilibrium."""
    rule = parse_selection(selection)
    _require_independence(game, s, report, force, workers)
    graph = require_complete(enumerate_reachable_beliefs(game, s, STRATEGY_FREE, budget, workers))
    T = game.horizon
    values: list[dict] = [dict() for _ in range(T)]
    policy: list[dict] = [dict() for _ in range(T)]
    found: list[dict] = [dict() for _ in range(T)]
    chosen: list[dict] = [dict() for _ in range(T)]
    for t in range(T, 0, -1):
        cont = values[t] if t < T else None
        level = graph.beliefs(t)
        eq_lists = _map(lambda pi: enumerate_pure_bne(build_stage_game(game, s, pi, cont)), level, workers)
        for pi, eqs in zip(level, eq_lists):
            if not eqs:
                raise NoPureEquilibrium(t, pi.render())
            k = rule.choose(t, pi, eqs, game, s)
            found[t - 1][pi] = eqs
            chosen[t - 1][pi] = k
            policy[t - 1][pi] = eqs[k].prescriptions
            values[t - 1][pi] = eqs[k].values
    return EquilibriumResult(PURE, graph, values, policy, found, chosen, rule.name)


def solve_algorithm2(game: ValidatedGame, s: InformationStructure, report: IndependenceReport | None = None,
                     force: bool = False, workers: int | None = None,
                     budget: int = DEFAULT_BUDGET) -> EquilibriumResult:
    """Behavioral-prescription backward induction; a stage equilibrium always exists."""
    _require_independence(game, s, report, force, workers)
    graph = require_complete(enumerate_reachable_beliefs(game, s, STRATEGY_FREE, budget, workers))
    T = game.horizon
    values: list[dict] = [dict() for _ in range(T)]
    policy: list[dict] = [dict() for _ in range(T)]
    for t in range(T, 0, -1):
        cont = values[t] if t < T else None
        level = graph.beliefs(t)
        eqs = _map(lambda pi: solve_mixed_bne(build_stage_game(game, s, pi, cont)), level, workers)
        for pi, eq in zip(level, eqs):
            policy[t - 1][pi] = eq.prescriptions
            values[t - 1][pi] = eq.values
    return EquilibriumResult(BEHAVIORAL, graph, values, policy)


# -- team problems ------------------------------------------------------------------------


def team_witness(game: ValidatedGame) -> tuple | None:
    for x in range(game.n_states):
        for u1 in range(game.n_actions(1)):
            for u2 in range(game.n_actions(2)):
                a, b = game.cost(1, x, u1, u2), game.cost(2, x, u1, u2)
                if a != b:
                    return (game.states[x], game.actions[0][u1], game.actions[1][u2], a, b)
    return None


def team_pair_values(game: ValidatedGame, s: InformationStructure, pi: Belief,
                     continuation: dict | None) -> list[tuple[Prescription, Prescription, Fraction]]:
    """Expected team cost-to-go of every pure pair (zero-mass types fixed), lexicographic order."""
    m = model_for(game, s)
    t = pi.stage
    out = []
    for g1 in pure_prescriptions(pi, 1, game.n_actions(1)):
        for g2 in pure_prescriptions(pi, 2, game.n_actions(2)):
            v = ZERO
            for (x, k1, k2), w in pi.support():
                v += w * game.cost(1, x, g1.action(k1), g2.action(k2))
            if continuation is not None:
                for z, cell in _forward(m, pi, g1, g2).items():
                    post = _posterior(m, t, cell)
                    v += sum(cell.values(), ZERO) * continuation[post][0]
            out.append((g1, g2, v))
    return out


def solve_team_dp(game: ValidatedGame, s: InformationStructure, workers: int | None = None,
                  budget: int = DEFAULT_BUDGET) -> EquilibriumResult:
    """Joint minimization over pure prescription pairs on the strategy-dependent belief graph."""
    witness = team_witness(game)
    if witness is not None:
        raise NotATeam(witness)
    graph = require_complete(enumerate_reachable_beliefs(game, s, GENERAL, budget, workers))
    T = game.horizon
    values: list[dict] = [dict() for _ in range(T)]
    policy: list[dict] = [dict() for _ in range(T)]
    for t in range(T, 0, -1):
        cont = values[t] if t < T else None
        level = graph.beliefs(t)

        def best(pi):
            g1, g2, v = min(team_pair_values(game, s, pi, cont), key=lambda r: r[2])
            return g1, g2, v

        for pi, (g1, g2, v) in zip(level, _map(best, level, workers)):
            policy[t - 1][pi] = (g1, g2)
            values[t - 1][pi] = (v, v)
    return EquilibriumResult(TEAM, graph, values, policy)


# -- control laws ------------------------------------------------------------------------------


class StrategyProfile:
    """Controller laws g^i_t(p, c): ``distribution`` returns action probabilities by index.

    ``common`` is the tuple of increments observed so far (empty at t = 1).
    """

    def distribution(self, i: int, t: int, common: tuple, p) -> tuple[Fraction, ...]:
        raise NotImplementedError


class FunctionProfile(StrategyProfile):
    """Profile from a callable ``fn(i, t, common, p) -> action index or distribution``."""

    def __init__(self, game: ValidatedGame, fn):
        self.game = game
        self.fn = fn

    def distribution(self, i, t, common, p):
        out = self.fn(i, t, common, p)
        n = self.game.n_actions(i)
        if isinstance(out, int):
            return tuple(ONE if u == out else ZERO for u in range(n))
        return tuple(Fraction(q) for q in out)


class ControlLaws(StrategyProfile):
    """Laws induced by a result: resolve the common information to a belief by
    replaying increments along graph edges, then apply the stored prescription.

    Team results follow the edge of the chosen pair.  Common information that
    the chosen pair makes impossible (reachable only after a deviation)
    follows the first edge carrying the increment, so the laws stay total.
    """

    def __init__(self, result: EquilibriumResult, s: InformationStructure):
        self.result = result
        self.s = s
        self._edges: dict = {}
        for e in result.graph.edges:
            key = (e.stage, e.source, e.z)
            if e.pair is not None:
                key += (e.pair[0].encoding(), e.pair[1].encoding())
            self._edges.setdefault(key, e.target)
            # off-path fallback for team results: first edge carrying this increment
            self._edges.setdefault((e.stage, e.source, e.z, None), e.target)
        self._cache: dict = {(): 0}

    def belief_index(self, common: tuple) -> int:
        hit = self._cache.get(common)
        if hit is not None:
            return hit
        t = len(common)
        src = self.belief_index(common[:-1])
        key = (t, src, common[-1])
        if self.result.mode == TEAM:
            pi = self.result.graph.beliefs(t)[src]
            g1, g2 = self.result.policy[t - 1][pi]
            key += (g1.encoding(), g2.encoding())
        if key not in self._edges and self.result.mode == TEAM:
            key = (t, src, common[-1], None)
        if key not in self._edges:
            raise MissingProfileEntry(f"common information {render(common)} leaves the belief graph at stage {t + 1}")
        k = self._cache[common] = self._edges[key]
        return k

    def belief(self, t: int, common: tuple) -> Belief:
        if len(common) != t - 1:
            raise MissingProfileEntry(f"stage {t} needs {t - 1} increments, got {len(common)}")
        return self.result.graph.beliefs(t)[self.belief_index(common)]

    def prescription(self, i: int, t: int, common: tuple) -> Prescription:
        return self.result.policy[t - 1][self.belief(t, common)][i - 1]

    def distribution(self, i, t, common, p):
        g = self.prescription(i, t, common)
        return g.rows[self.s.private_index(i, t, p)]

    def action(self, i: int, t: int, common: tuple, p):
        """Action label of a pure law."""
        g = self.prescription(i, t, common)
        return self.s.actions[i - 1][g.action(self.s.private_index(i, t, p))]


def policy_to_control_laws(result: EquilibriumResult, s: InformationStructure) -> ControlLaws:
    return ControlLaws(result, s)


def with_prescription(result: EquilibriumResult, t: int, pi: Belief, i: int, g: Prescription) -> EquilibriumResult:
    """Copy of ``result`` with controller i's prescription at (t, pi) replaced."""
    policy = [dict(level) for level in result.policy]
    pair = list(policy[t - 1][pi])
    pair[i - 1] = g
    policy[t - 1][pi] = tuple(pair)
    return EquilibriumResult(result.mode, result.graph, [dict(v) for v in result.values], policy,
                             result.equilibria, result.selection, result.selection_rule)
