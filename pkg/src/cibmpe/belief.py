"""Common-information beliefs, their updates and the reachable-belief graph.

A belief at stage t is an exact distribution over X x P1_t x P2_t, stored as
a flat tuple of Fractions in declared order (state-major).  Coordinates with
zero mass are kept so the vector length is fixed per stage.
"""

from __future__ import annotations

import itertools
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import BudgetExceeded, LabelError, StageMismatch, UnreachableIncrement, ValidationError, ZeroProbabilityIncrement
from .game import ValidatedGame
from .info import InformationStructure, render
from .rational import ONE, ZERO, fmt, to_fraction

DEFAULT_BUDGET = 10 ** 5

STRATEGY_FREE = "strategy_free"
GENERAL = "general"


@dataclass(frozen=True)
class Belief:
    stage: int
    shape: tuple[int, int, int]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        nx, n1, n2 = self.shape
        if len(self.weights) != nx * n1 * n2:
            raise ValidationError("belief weight vector does not match its shape")
        if any(w < 0 for w in self.weights) or sum(self.weights, ZERO) != ONE:
            raise ValidationError("belief weights must be nonnegative and sum to 1")

    def flat(self, x: int, k1: int, k2: int) -> int:
        _, n1, n2 = self.shape
        return (x * n1 + k1) * n2 + k2

    def weight(self, x: int, k1: int, k2: int) -> Fraction:
        return self.weights[self.flat(x, k1, k2)]

    def atoms(self) -> Iterator[tuple[int, int, int]]:
        return itertools.product(*(range(n) for n in self.shape))

    def support(self) -> list[tuple[tuple[int, int, int], Fraction]]:
        return [(a, w) for a, w in zip(self.atoms(), self.weights) if w]

    def private_mass(self, i: int) -> tuple[Fraction, ...]:
        """Marginal of controller i's private information."""
        mass = [ZERO] * self.shape[i]
        for (x, k1, k2), w in self.support():
            mass[k1 if i == 1 else k2] += w
        return tuple(mass)

    def state_marginal(self) -> tuple[Fraction, ...]:
        mass = [ZERO] * self.shape[0]
        for (x, _, _), w in self.support():
            mass[x] += w
        return tuple(mass)

    def render(self) -> str:
        return " ".join(fmt(w) for w in self.weights)

    def as_dict(self, game: ValidatedGame, s: InformationStructure) -> dict:
        """Positive-mass atoms keyed by (state label, p1, p2)."""
        t = self.stage
        return {(game.states[x], s.private_space(1, t)[k1], s.private_space(2, t)[k2]): w
                for (x, k1, k2), w in self.support()}


def make_belief(game: ValidatedGame, s: InformationStructure, t: int, weights) -> Belief:
    """Belief from a mapping (state, p1, p2) -> prob (labels) or from a full vector."""
    shape = (game.n_states, len(s.private_space(1, t)), len(s.private_space(2, t)))
    if isinstance(weights, Mapping):
        vec = [ZERO] * (shape[0] * shape[1] * shape[2])
        for (x, p1, p2), w in weights.items():
            k = (game.state_index(x) * shape[1] + s.private_index(1, t, p1)) * shape[2] + s.private_index(2, t, p2)
            vec[k] += to_fraction(w)
        return Belief(t, shape, tuple(vec))
    return Belief(t, shape, tuple(to_fraction(w) for w in weights))


@dataclass(frozen=True)
class Prescription:
    """Map from controller i's private information to an action distribution.

    ``rows[k][u]`` is the probability of action index u under the k-th private
    realization of the stage.  Pure prescriptions have point-mass rows.
    """

    stage: int
    player: int
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        for row in self.rows:
            if any(q < 0 for q in row) or sum(row, ZERO) != ONE:
                raise ValidationError("prescription rows must be distributions over actions")

    @classmethod
    def pure(cls, stage: int, player: int, actions: Iterable[int], n_actions: int) -> "Prescription":
        rows = []
        for a in actions:
            if not 0 <= a < n_actions:
                raise LabelError(f"action index {a} out of range")
            rows.append(tuple(ONE if u == a else ZERO for u in range(n_actions)))
        return cls(stage, player, tuple(rows))

    @property
    def is_pure(self) -> bool:
        return all(q in (ZERO, ONE) for row in self.rows for q in row)

    def action(self, k: int) -> int:
        """Action index of a point-mass row."""
        row = self.rows[k]
        for u, q in enumerate(row):
            if q == ONE:
                return u
        raise ValidationError("row is not a point mass")

    def encoding(self) -> tuple[int, ...]:
        return tuple(self.action(k) for k in range(len(self.rows)))

    def support_pairs(self, k: int) -> list[tuple[int, Fraction]]:
        return [(u, q) for u, q in enumerate(self.rows[k]) if q]

    def as_labels(self, game: ValidatedGame, s: InformationStructure) -> dict:
        """{private realization: action label or {action label: prob}}."""
        acts = game.actions[self.player - 1]
        out = {}
        for k, p in enumerate(s.private_space(self.player, self.stage)):
            if self.is_pure:
                out[p] = acts[self.action(k)]
            else:
                out[p] = {acts[u]: q for u, q in self.support_pairs(k)}
        return out


def make_prescription(game: ValidatedGame, s: InformationStructure, t: int, i: int, mapping) -> Prescription:
    """Prescription from {private realization: action} or {private realization: {action: prob}}.

    A bare action (label or index) is accepted as the constant prescription.
    """
    space = s.private_space(i, t)
    n = game.n_actions(i)
    if not isinstance(mapping, Mapping):
        mapping = {p: mapping for p in space}
    missing = [p for p in space if p not in mapping]
    if missing:
        raise ValidationError(f"prescription for controller {i} at stage {t} misses {missing}")
    rows = []
    for p in space:
        entry = mapping[p]
        row = [ZERO] * n
        if isinstance(entry, Mapping):
            for u, q in entry.items():
                row[game.action_index(i, u)] += to_fraction(q)
        else:
            row[game.action_index(i, entry)] = ONE
        rows.append(tuple(row))
    return Prescription(t, i, tuple(rows))


def constant_prescription(game: ValidatedGame, s: InformationStructure, t: int, i: int, action) -> Prescription:
    return make_prescription(game, s, t, i, action)


# -- cached one-step kernel --------------------------------------------------


class _Model:
    """Per (game, structure) cache of the one-step kernel and of F_t."""

    def __init__(self, game: ValidatedGame, s: InformationStructure):
        if s.horizon != game.horizon or s.actions != game.actions or s.observations != game.observations:
            raise ValidationError("information structure was built for a different game")
        self.game = game
        self.s = s
        self._succ: dict = {}
        self._reach: dict = {}
        self._free: dict = {}
        self._lock = threading.Lock()
        self.z_index = tuple({z: k for k, z in enumerate(zs)} for zs in s.increment_spaces)

    def shape(self, t: int) -> tuple[int, int, int]:
        return (self.game.n_states, len(self.s.private_space(1, t)), len(self.s.private_space(2, t)))

    def successors(self, t: int, x: int, k1: int, k2: int, u1: int, u2: int) -> tuple:
        """[(z, x', k1', k2', prob)] for one atom and action pair, aggregated, prob > 0."""
        key = (t, x, k1, k2, u1, u2)
        hit = self._succ.get(key)
        if hit is not None:
            return hit
        g, s = self.game, self.s
        p1, p2 = s.private_space(1, t)[k1], s.private_space(2, t)[k2]
        a1, a2 = g.actions[0][u1], g.actions[1][u2]
        acc: dict = {}
        for xn, px in enumerate(g.next_state_dist(t, x, u1, u2)):
            if not px:
                continue
            for j1, q1 in enumerate(g.obs_dist(1, t + 1, xn)):
                if not q1:
                    continue
                y1 = g.observations[0][j1]
                n1 = s.private_index(1, t + 1, s.xi[0](t, p1, a1, y1))
                for j2, q2 in enumerate(g.obs_dist(2, t + 1, xn)):
                    if not q2:
                        continue
                    y2 = g.observations[1][j2]
                    n2 = s.private_index(2, t + 1, s.xi[1](t, p2, a2, y2))
                    z = s.zeta(t, p1, p2, a1, a2, y1, y2)
                    k = (z, xn, n1, n2)
                    acc[k] = acc.get(k, ZERO) + px * q1 * q2
        out = tuple((z, xn, n1, n2, q) for (z, xn, n1, n2), q in acc.items())
        self._succ[key] = out
        return out

    def witness(self, pi: Belief, z) -> tuple | None:
        """Some (atom, u1, u2) at which z has positive probability, or None."""
        t = pi.stage
        g = self.game
        for (x, k1, k2), _ in pi.support():
            for u1 in range(g.n_actions(1)):
                for u2 in range(g.n_actions(2)):
                    if any(e[0] == z for e in self.successors(t, x, k1, k2, u1, u2)):
                        return (x, k1, k2), u1, u2
        return None

    def reachable_increments(self, pi: Belief) -> list:
        """Increments with positive probability under at least one pure pair, in declared order."""
        key = pi
        hit = self._reach.get(key)
        if hit is not None:
            return hit
        g = self.game
        seen = set()
        for (x, k1, k2), _ in pi.support():
            for u1 in range(g.n_actions(1)):
                for u2 in range(g.n_actions(2)):
                    for e in self.successors(pi.stage, x, k1, k2, u1, u2):
                        seen.add(e[0])
        zi = self.z_index[pi.stage - 1]
        out = sorted(seen, key=zi.__getitem__)
        self._reach[key] = out
        return out


_MODELS: OrderedDict = OrderedDict()
_MODELS_LOCK = threading.Lock()
_MODELS_MAX = 16


def model_for(game: ValidatedGame, s: InformationStructure) -> _Model:
    key = (id(game), id(s))
    with _MODELS_LOCK:
        entry = _MODELS.get(key)
        if entry is not None and entry.game is game and entry.s is s:
            _MODELS.move_to_end(key)
            return entry
        entry = _Model(game, s)
        _MODELS[key] = entry
        while len(_MODELS) > _MODELS_MAX:
            _MODELS.popitem(last=False)
        return entry


# -- updates -------------------------------------------------------------------


def initial_belief(game: ValidatedGame, s: InformationStructure) -> Belief:
    """Prior over (X_1, P1_1, P2_1) with no common information."""
    m = model_for(game, s)
    shape = m.shape(1)
    vec = [ZERO] * (shape[0] * shape[1] * shape[2])
    for x, px in enumerate(game.initial_dist):
        if not px:
            continue
        for j1, q1 in enumerate(game.obs_dist(1, 1, x)):
            if not q1:
                continue
            k1 = s.private_index(1, 1, s.eta[0](game.observations[0][j1]))
            for j2, q2 in enumerate(game.obs_dist(2, 1, x)):
                if not q2:
                    continue
                k2 = s.private_index(2, 1, s.eta[1](game.observations[1][j2]))
                vec[(x * shape[1] + k1) * shape[2] + k2] += px * q1 * q2
    return Belief(1, shape, tuple(vec))


def _check_stage(game: ValidatedGame, pi: Belief, g1: Prescription, g2: Prescription, m: _Model) -> None:
    t = pi.stage
    if g1.stage != t or g2.stage != t:
        raise StageMismatch(f"belief at stage {t}, prescriptions at stages {g1.stage}, {g2.stage}")
    if g1.player != 1 or g2.player != 2:
        raise StageMismatch("prescriptions must be given in controller order (1, 2)")
    if not 1 <= t < game.horizon:
        raise StageMismatch(f"stage {t} has no successor (horizon {game.horizon})")
    if pi.shape != m.shape(t) or len(g1.rows) != pi.shape[1] or len(g2.rows) != pi.shape[2]:
        raise StageMismatch("belief or prescription does not match the stage spaces")


def _forward(m: _Model, pi: Belief, g1: Prescription, g2: Prescription) -> dict:
    """{z: {(x', k1', k2'): prob}} in first-seen order."""
    out: dict = {}
    for (x, k1, k2), w in pi.support():
        for u1, a in g1.support_pairs(k1):
            for u2, b in g2.support_pairs(k2):
                base = w * a * b
                for z, xn, n1, n2, q in m.successors(pi.stage, x, k1, k2, u1, u2):
                    cell = out.setdefault(z, {})
                    key = (xn, n1, n2)
                    cell[key] = cell.get(key, ZERO) + base * q
    return out


def joint_forward_distribution(game: ValidatedGame, s: InformationStructure, pi: Belief,
                               g1: Prescription, g2: Prescription) -> dict:
    """Exact law of (x, p1, p2, x', p1', p2', z) given the belief and both prescriptions."""
    m = model_for(game, s)
    _check_stage(game, pi, g1, g2, m)
    t = pi.stage
    P1, P2 = s.private_space(1, t), s.private_space(2, t)
    Q1, Q2 = s.private_space(1, t + 1), s.private_space(2, t + 1)
    out: dict = {}
    for (x, k1, k2), w in pi.support():
        for u1, a in g1.support_pairs(k1):
            for u2, b in g2.support_pairs(k2):
                for z, xn, n1, n2, q in m.successors(t, x, k1, k2, u1, u2):
                    key = (game.states[x], P1[k1], P2[k2], game.states[xn], Q1[n1], Q2[n2], z)
                    out[key] = out.get(key, ZERO) + w * a * b * q
    return out


def increment_distribution(game: ValidatedGame, s: InformationStructure, pi: Belief,
                           g1: Prescription, g2: Prescription) -> dict:
    """Law of the next common-information increment, in declared increment order."""
    m = model_for(game, s)
    _check_stage(game, pi, g1, g2, m)
    fwd = _forward(m, pi, g1, g2)
    zi = m.z_index[pi.stage - 1]
    return {z: sum(cell.values(), ZERO) for z, cell in sorted(fwd.items(), key=lambda kv: zi[kv[0]])}


def _posterior(m: _Model, t: int, cell: dict) -> Belief:
    shape = m.shape(t + 1)
    total = sum(cell.values(), ZERO)
    vec = [ZERO] * (shape[0] * shape[1] * shape[2])
    for (xn, n1, n2), q in cell.items():
        vec[(xn * shape[1] + n1) * shape[2] + n2] = q / total
    return Belief(t + 1, shape, tuple(vec))


def _update(m: _Model, pi: Belief, g1: Prescription, g2: Prescription, z) -> Belief:
    cell = _forward(m, pi, g1, g2).get(z)
    if not cell:
        raise ZeroProbabilityIncrement(f"increment {render(z)} has zero probability at stage {pi.stage}")
    return _posterior(m, pi.stage, cell)


def belief_update_general(game: ValidatedGame, s: InformationStructure, pi: Belief,
                          g1: Prescription, g2: Prescription, z) -> Belief:
    """Bayes update of the belief given the prescriptions used and the observed increment."""
    m = model_for(game, s)
    _check_stage(game, pi, g1, g2, m)
    if z not in m.z_index[pi.stage - 1]:
        raise ZeroProbabilityIncrement(f"{render(z)} is not an increment of stage {pi.stage + 1}")
    return _update(m, pi, g1, g2, z)


def admissible_pair(game: ValidatedGame, s: InformationStructure, pi: Belief, z) -> tuple[Prescription, Prescription]:
    """One pure prescription pair under which z has positive probability."""
    m = model_for(game, s)
    w = m.witness(pi, z)
    if w is None:
        raise UnreachableIncrement(f"increment {render(z)} is unreachable from this stage-{pi.stage} belief")
    (x, k1, k2), u1, u2 = w
    a = [0] * pi.shape[1]
    b = [0] * pi.shape[2]
    a[k1], b[k2] = u1, u2
    return (Prescription.pure(pi.stage, 1, a, game.n_actions(1)),
            Prescription.pure(pi.stage, 2, b, game.n_actions(2)))


def belief_update_strategy_free(game: ValidatedGame, s: InformationStructure, pi: Belief, z) -> Belief:
    """F_t(pi, z).  Only meaningful when beliefs are strategy independent."""
    m = model_for(game, s)
    if not 1 <= pi.stage < game.horizon:
        raise StageMismatch(f"stage {pi.stage} has no successor (horizon {game.horizon})")
    key = (pi, z)
    hit = m._free.get(key)
    if hit is not None:
        return hit
    g1, g2 = admissible_pair(game, s, pi, z)
    out = _update(m, pi, g1, g2, z)
    m._free[key] = out
    return out


# -- prescription enumeration ---------------------------------------------------


def pure_prescriptions(pi: Belief, i: int, n_actions: int, restrict_to_support: bool = True) -> list[Prescription]:
    """All pure prescriptions of controller i in lexicographic encoding order.

    With ``restrict_to_support`` zero-mass private realizations are fixed to
    the first action, which leaves every joint law unchanged.
    """
    mass = pi.private_mass(i)
    n = pi.shape[i]
    choices = [range(n_actions) if (mass[k] or not restrict_to_support) else (0,) for k in range(n)]
    return [Prescription.pure(pi.stage, i, enc, n_actions) for enc in itertools.product(*choices)]


# -- reachable-belief graph -------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    stage: int
    source: int
    z: object
    target: int
    pair: tuple[Prescription, Prescription] | None = None


@dataclass
class BeliefGraph:
    mode: str
    stages: list[list[Belief]]
    edges: list[Edge]
    complete: bool = True
    frontier: int = 0
    _ids: list[dict] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self._ids:
            self._ids = [{b: k for k, b in enumerate(level)} for level in self.stages]

    @property
    def status(self) -> str:
        return "complete" if self.complete else "inconclusive"

    def counts(self) -> list[int]:
        return [len(level) for level in self.stages]

    def index(self, pi: Belief) -> int:
        return self._ids[pi.stage - 1][pi]

    def beliefs(self, t: int) -> list[Belief]:
        return self.stages[t - 1]

    def out_edges(self, t: int, k: int) -> list[Edge]:
        return [e for e in self.edges if e.stage == t and e.source == k]

    def summary(self) -> str:
        return " ".join(f"R{t}={n}" for t, n in enumerate(self.counts(), start=1))

    def report(self, game: ValidatedGame | None = None, s: InformationStructure | None = None) -> str:
        lines = [self.summary(), f"status {self.status}"]
        for t, level in enumerate(self.stages, start=1):
            for k, b in enumerate(level):
                lines.append(f"belief {t}.{k}: {b.render()}")
        for e in self.edges:
            pair = ""
            if e.pair is not None:
                pair = " via " + ",".join(render(p.encoding()) for p in e.pair)
            lines.append(f"edge {e.stage}.{e.source} --{render(e.z)}--> {e.stage + 1}.{e.target}{pair}")
        return "\n".join(lines)


def _expand_free(m: _Model, pi: Belief) -> list:
    return [(z, belief_update_strategy_free(m.game, m.s, pi, z), None) for z in m.reachable_increments(pi)]


def _expand_general(m: _Model, pi: Belief) -> list:
    out = []
    zi = m.z_index[pi.stage - 1]
    for g1 in pure_prescriptions(pi, 1, m.game.n_actions(1)):
        for g2 in pure_prescriptions(pi, 2, m.game.n_actions(2)):
            fwd = _forward(m, pi, g1, g2)
            for z in sorted(fwd, key=zi.__getitem__):
                out.append((z, _posterior(m, pi.stage, fwd[z]), (g1, g2)))
    return out


def enumerate_reachable_beliefs(game: ValidatedGame, s: InformationStructure, mode: str = STRATEGY_FREE,
                                budget: int = DEFAULT_BUDGET, workers: int | None = None) -> BeliefGraph:
    """Breadth-first closure of the belief dynamics from the prior.

    ``strategy_free`` expands by every increment reachable under some pure
    pair (meaningful only for strategy-independent structures); ``general``
    expands by every pure pair and increment.  When a stage exceeds
    ``budget`` beliefs the partial graph is returned with ``complete=False``.
    """
    if mode not in (STRATEGY_FREE, GENERAL):
        raise ValidationError(f"unknown enumeration mode {mode!r}")
    m = model_for(game, s)
    expand = _expand_free if mode == STRATEGY_FREE else _expand_general
    stages = [[initial_belief(game, s)]]
    edges: list[Edge] = []
    for t in range(1, game.horizon):
        level = stages[-1]
        results = _map(lambda pi: expand(m, pi), level, workers)
        ids: dict = {}
        nxt: list[Belief] = []
        for src, found in enumerate(results):
            for z, post, pair in found:
                k = ids.get(post)
                if k is None:
                    k = ids[post] = len(nxt)
                    nxt.append(post)
                edges.append(Edge(t, src, z, k, pair))
        if len(nxt) > budget:
            stages.append(nxt)
            return BeliefGraph(mode, stages, edges, complete=False, frontier=len(nxt))
        stages.append(nxt)
    return BeliefGraph(mode, stages, edges)


def require_complete(graph: BeliefGraph) -> BeliefGraph:
    if not graph.complete:
        raise BudgetExceeded(f"belief enumeration exceeded its budget ({graph.frontier} beliefs at the frontier)",
                             graph.frontier)
    return graph


def _map(fn, items: list, workers: int | None) -> list:
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]
