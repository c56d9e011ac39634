"""Independent checks of solver output on the raw game tree.

``evaluate_joint_cost`` and ``best_response_value`` walk the finite tree of
states, observations and actions using only the kernels and the definition
of private/common information; they never consult beliefs, belief updates
or value tables.  ``verify_mpe_conditions`` audits the stage conditions of
a result against its own tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .belief import DEFAULT_BUDGET, Belief, Prescription
from .errors import BudgetExceeded, MissingProfileEntry
from .game import ValidatedGame
from .info import InformationStructure, render
from .induction import TEAM, EquilibriumResult, StrategyProfile, team_pair_values
from .rational import ZERO, fmt
from .stage import build_stage_game, equilibrium_values, stage_best_response_values

DEFAULT_TREE_BUDGET = 10 ** 6


def _law(profile: StrategyProfile, i: int, t: int, common: tuple, p) -> tuple[Fraction, ...]:
    try:
        return profile.distribution(i, t, common, p)
    except (KeyError, IndexError, MissingProfileEntry) as exc:
        raise MissingProfileEntry(
            f"no law for controller {i} at stage {t}, private {render(p)}, common {render(common)}: {exc}") from None


def _initial_nodes(game: ValidatedGame, s: InformationStructure) -> dict:
    nodes: dict = {}
    for x, px in enumerate(game.initial_dist):
        if not px:
            continue
        for j1, q1 in enumerate(game.obs_dist(1, 1, x)):
            if not q1:
                continue
            p1 = s.eta[0](game.observations[0][j1])
            for j2, q2 in enumerate(game.obs_dist(2, 1, x)):
                if q2:
                    p2 = s.eta[1](game.observations[1][j2])
                    key = (x, p1, p2)
                    nodes[key] = nodes.get(key, ZERO) + px * q1 * q2
    return nodes


def _step(game: ValidatedGame, s: InformationStructure, t: int, x: int, p1, p2, u1: int, u2: int):
    """Raw successors: (x', p1', p2', z, prob) with prob > 0 (not aggregated)."""
    a1, a2 = game.actions[0][u1], game.actions[1][u2]
    for xn, px in enumerate(game.next_state_dist(t, x, u1, u2)):
        if not px:
            continue
        for j1, q1 in enumerate(game.obs_dist(1, t + 1, xn)):
            if not q1:
                continue
            y1 = game.observations[0][j1]
            for j2, q2 in enumerate(game.obs_dist(2, t + 1, xn)):
                if not q2:
                    continue
                y2 = game.observations[1][j2]
                yield (xn, s.xi[0](t, p1, a1, y1), s.xi[1](t, p2, a2, y2),
                       s.zeta(t, p1, p2, a1, a2, y1, y2), px * q1 * q2)


def evaluate_joint_cost(game: ValidatedGame, s: InformationStructure, profile: StrategyProfile,
                        budget: int = DEFAULT_TREE_BUDGET) -> tuple[Fraction, Fraction]:
    """Exact (J1, J2) by forward enumeration of (state, private, private, common) nodes."""
    J = [ZERO, ZERO]
    # level: {(common, x, p1, p2): prob}
    level = {((),) + k: q for k, q in _initial_nodes(game, s).items()}
    for t in range(1, game.horizon + 1):
        nxt: dict = {}
        for (common, x, p1, p2), w in level.items():
            d1 = _law(profile, 1, t, common, p1)
            d2 = _law(profile, 2, t, common, p2)
            for u1, a in enumerate(d1):
                if not a:
                    continue
                for u2, b in enumerate(d2):
                    if not b:
                        continue
                    q = w * a * b
                    J[0] += q * game.cost(1, x, u1, u2)
                    J[1] += q * game.cost(2, x, u1, u2)
                    if t < game.horizon:
                        for xn, n1, n2, z, r in _step(game, s, t, x, p1, p2, u1, u2):
                            key = (common + (z,), xn, n1, n2)
                            nxt[key] = nxt.get(key, ZERO) + q * r
        if len(nxt) > budget:
            raise BudgetExceeded(f"game tree exceeds {budget} nodes at stage {t + 1}", len(nxt))
        level = nxt
    return J[0], J[1]


@dataclass
class BestResponse:
    """Optimal deviation of one controller.  ``policy`` maps a history node
    (common, own private history, own action history) to an action index."""

    player: int
    value: Fraction
    policy: dict

    def action(self, t: int, common: tuple, private_history: tuple, action_history: tuple) -> int:
        return self.policy[(common, private_history, action_history)]


def best_response_value(game: ValidatedGame, s: InformationStructure, i: int, opponent: StrategyProfile,
                        budget: int = DEFAULT_TREE_BUDGET) -> tuple[Fraction, BestResponse]:
    """Optimal expected cost of controller i against the opponent's fixed laws.

    Backward induction over i's perfect-recall history nodes (common
    information, own private-information history, own past actions); the
    conditional law of (state, opponent private information) at a node does
    not depend on i's own choices, so the recursion is exact.
    """
    j = 3 - i
    ni = game.n_actions(i)
    # levels[t-1]: {H: {(x, p_j, p_i): reach weight without i's own action probabilities}}
    level: dict = {}
    for (x, p1, p2), q in _initial_nodes(game, s).items():
        pi_, pj = (p1, p2) if i == 1 else (p2, p1)
        H = ((), (pi_,), ())
        cell = level.setdefault(H, {})
        cell[(x, pj, pi_)] = cell.get((x, pj, pi_), ZERO) + q
    levels = [level]
    children: list[dict] = []
    count = len(level)
    for t in range(1, game.horizon):
        nxt: dict = {}
        kids: dict = {}
        for H, cell in level.items():
            common, phist, uhist = H
            for u in range(ni):
                targets = kids.setdefault((H, u), {})
                for (x, pj, pi_), w in cell.items():
                    for v, b in enumerate(_law(opponent, j, t, common, pj)):
                        if not b:
                            continue
                        u1, u2 = (u, v) if i == 1 else (v, u)
                        p1, p2 = (pi_, pj) if i == 1 else (pj, pi_)
                        for xn, n1, n2, z, r in _step(game, s, t, x, p1, p2, u1, u2):
                            ni_, nj = (n1, n2) if i == 1 else (n2, n1)
                            H2 = (common + (z,), phist + (ni_,), uhist + (u,))
                            targets[H2] = None
                            c2 = nxt.setdefault(H2, {})
                            c2[(xn, nj, ni_)] = c2.get((xn, nj, ni_), ZERO) + w * b * r
        count += len(nxt)
        if count > budget:
            raise BudgetExceeded(f"information tree of controller {i} exceeds {budget} nodes", count)
        levels.append(nxt)
        children.append(kids)
        level = nxt

    value: dict = {}
    policy: dict = {}
    for t in range(game.horizon, 0, -1):
        for H, cell in levels[t - 1].items():
            common = H[0]
            best, arg = None, 0
            for u in range(ni):
                q = ZERO
                for (x, pj, _), w in cell.items():
                    for v, b in enumerate(_law(opponent, j, t, common, pj)):
                        if b:
                            u1, u2 = (u, v) if i == 1 else (v, u)
                            q += w * b * game.cost(i, x, u1, u2)
                if t < game.horizon:
                    q += sum((value[H2] for H2 in children[t - 1][(H, u)]), ZERO)
                if best is None or q < best:
                    best, arg = q, u
            value[H] = best
            policy[H] = arg
    B = sum((value[H] for H in levels[0]), ZERO)
    return B, BestResponse(i, B, policy)


@dataclass
class VerificationReport:
    costs: tuple[Fraction, Fraction]
    best: tuple[Fraction, Fraction]
    witnesses: list = field(default_factory=list)

    @property
    def gaps(self) -> tuple[Fraction, Fraction]:
        return self.costs[0] - self.best[0], self.costs[1] - self.best[1]

    @property
    def passed(self) -> bool:
        return self.gaps == (0, 0)

    def render(self) -> str:
        lines = [f"nash {'pass' if self.passed else 'fail'}"]
        for i in (1, 2):
            lines.append(f"controller {i}: J = {fmt(self.costs[i - 1])}, B = {fmt(self.best[i - 1])}, "
                         f"gap = {fmt(self.gaps[i - 1])}")
        lines.extend(self.witnesses)
        return "\n".join(lines)


def _deviation(game, s, profile, br: BestResponse) -> str | None:
    """First history node (in stage order) where the optimal reply differs from the profile's support."""
    i = br.player
    for H in sorted(br.policy, key=lambda h: (len(h[0]), render(h))):
        common, phist, _ = H
        t = len(phist)
        law = _law(profile, i, t, common, phist[-1])
        u = br.policy[H]
        if not law[u]:
            chosen = [game.actions[i - 1][a] for a, q in enumerate(law) if q]
            return (f"controller {i} improves at stage {t}, common {render(common)}, private {render(phist[-1])}: "
                    f"play {game.actions[i - 1][u]} instead of {','.join(chosen)}")
    return None


def verify_nash(game: ValidatedGame, s: InformationStructure, profile: StrategyProfile,
                budget: int = DEFAULT_TREE_BUDGET) -> VerificationReport:
    """Both controllers' unilateral-deviation gaps, computed exactly."""
    J = evaluate_joint_cost(game, s, profile, budget)
    B1, br1 = best_response_value(game, s, 1, profile, budget)
    B2, br2 = best_response_value(game, s, 2, profile, budget)
    report = VerificationReport(J, (B1, B2))
    for i, br in ((1, br1), (2, br2)):
        if report.gaps[i - 1] > 0:
            w = _deviation(game, s, profile, br)
            report.witnesses.append(w or f"controller {i} has a profitable deviation")
    return report


# -- stage-condition audit -----------------------------------------------------------------


@dataclass(frozen=True)
class AuditWitness:
    stage: int
    belief: Belief
    player: int
    improvement: Prescription | None
    detail: str

    def render(self) -> str:
        return f"stage {self.stage}, belief {self.belief.render()}, controller {self.player}: {self.detail}"


@dataclass
class AuditReport:
    witnesses: list = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def render(self) -> str:
        head = f"stage conditions {'pass' if self.passed else 'fail'} ({self.checked} beliefs)"
        return "\n".join([head] + [w.render() for w in self.witnesses])


def verify_mpe_conditions(game: ValidatedGame, s: InformationStructure, result: EquilibriumResult) -> AuditReport:
    """At every (t, belief) re-derive the stage minimization against the stored
    opponent prescription and continuation values."""
    report = AuditReport()
    T = game.horizon
    for t in range(T, 0, -1):
        cont = result.values[t] if t < T else None
        for pi in result.graph.beliefs(t):
            report.checked += 1
            g1, g2 = result.policy[t - 1][pi]
            stored = result.values[t - 1][pi]
            if result.mode == TEAM:
                rows = team_pair_values(game, s, pi, cont)
                best = min(v for _, _, v in rows)
                own = next(v for a, b, v in rows if a.encoding() == g1.encoding() and b.encoding() == g2.encoding())
                if own != best:
                    better = next((a, b) for a, b, v in rows if v == best)
                    report.witnesses.append(AuditWitness(t, pi, 1, better[0],
                                                         f"pair value {fmt(own)} above the minimum {fmt(best)}"))
                elif stored != (own, own):
                    report.witnesses.append(AuditWitness(t, pi, 1, None, "stored value differs from recomputation"))
                continue
            sg = build_stage_game(game, s, pi, cont)
            for i, own, opp in ((1, g1, g2), (2, g2, g1)):
                responses = stage_best_response_values(sg, i, opp)
                bad = [k for k, r in responses.items()
                       if r.defined and any(u not in r.argmin for u, _ in own.support_pairs(k))]
                if bad:
                    n = sg.n_actions[i - 1]
                    better = Prescription(t, i, tuple(
                        tuple(Fraction(int(u == min(responses[k].argmin))) for u in range(n)) if k in bad
                        else own.rows[k] for k in range(len(own.rows))))
                    report.witnesses.append(AuditWitness(
                        t, pi, i, better, f"not a best response at private indices {bad}"))
            if equilibrium_values(sg, g1, g2) != tuple(stored):
                report.witnesses.append(AuditWitness(t, pi, 1, None, "stored values differ from recomputation"))
    return report
