"""Computational check that common-information beliefs are strategy independent.

Every belief reachable under some sequence of pure prescription pairs is
visited.  For each (belief, increment) cell the posteriors produced by all
pure pairs giving the increment positive probability must coincide; the
first disagreement is returned as a witness.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .belief import DEFAULT_BUDGET, Belief, Prescription, _forward, _map, _posterior, initial_belief, model_for
from .game import ValidatedGame
from .info import InformationStructure, render

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

DEFAULT_PAIR_BUDGET = 10 ** 5


@dataclass(frozen=True)
class IndependenceWitness:
    stage: int
    belief: Belief
    z: object
    pair_a: tuple[Prescription, Prescription]
    pair_b: tuple[Prescription, Prescription]
    posterior_a: Belief
    posterior_b: Belief

    def render(self, game: ValidatedGame, s: InformationStructure) -> str:
        def pair(p):
            return "; ".join(f"g{q.player}={_labels(q, game, s)}" for q in p)
        return "\n".join([
            f"stage {self.stage}, increment {render(self.z)}",
            f"belief    {self.belief.render()}",
            f"pair A    {pair(self.pair_a)}",
            f"pair B    {pair(self.pair_b)}",
            f"posterior A {self.posterior_a.render()}",
            f"posterior B {self.posterior_b.render()}",
        ])


def _labels(g: Prescription, game: ValidatedGame, s: InformationStructure) -> str:
    items = []
    for p, a in g.as_labels(game, s).items():
        if isinstance(a, dict):
            a = "{" + ",".join(f"{u}:{q}" for u, q in a.items()) + "}"
        items.append(f"{render(p)}->{a}")
    return "{" + ", ".join(items) + "}"


@dataclass
class IndependenceReport:
    status: str
    witness: IndependenceWitness | None = None
    beliefs_per_stage: list[int] = field(default_factory=list)
    cells: int = 0
    frontier: int = 0
    behavioral_samples: int = 0
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def render(self, game: ValidatedGame, s: InformationStructure) -> str:
        counts = " ".join(f"R{t}={n}" for t, n in enumerate(self.beliefs_per_stage, start=1))
        lines = [f"independence {self.status}", f"beliefs {counts}", f"cells {self.cells}"]
        if self.behavioral_samples:
            lines.append(f"behavioral samples per belief {self.behavioral_samples}")
        if self.message:
            lines.append(self.message)
        if self.witness is not None:
            lines.append(self.witness.render(game, s))
        return "\n".join(lines)


def _action_classes(m, pi: Belief, i: int) -> list[tuple[int, ...]]:
    """Per private index of controller i, one representative per class of actions
    with identical one-step consequences.  Zero-mass types get the first action."""
    g = m.game
    mass = pi.private_mass(i)
    support = pi.support()
    out = []
    for k in range(pi.shape[i]):
        if not mass[k]:
            out.append((0,))
            continue
        atoms = [a for a, _ in support if a[i] == k]
        reps: dict = {}
        for u in range(g.n_actions(i)):
            sig = []
            for x, k1, k2 in atoms:
                for v in range(g.n_actions(3 - i)):
                    u1, u2 = (u, v) if i == 1 else (v, u)
                    sig.append(m.successors(pi.stage, x, k1, k2, u1, u2))
            reps.setdefault(tuple(sig), u)
        out.append(tuple(reps.values()))
    return out


def _random_row(rng: random.Random, n: int) -> tuple[Fraction, ...]:
    raw = [rng.randint(0, 4) for _ in range(n)]
    if not any(raw):
        raw[rng.randrange(n)] = 1
    total = sum(raw)
    return tuple(Fraction(r, total) for r in raw)


def _check_belief(m, pi: Belief, pair_budget: int, samples: int, seed: int):
    """(witness or None, posteriors, cell count, over_budget)."""
    g = m.game
    t = pi.stage
    c1, c2 = _action_classes(m, pi, 1), _action_classes(m, pi, 2)
    n_pairs = 1
    for c in itertools.chain(c1, c2):
        n_pairs *= len(c)
    if n_pairs > pair_budget:
        return None, [], 0, True
    ref: dict = {}
    for enc1 in itertools.product(*c1):
        g1 = Prescription.pure(t, 1, enc1, g.n_actions(1))
        for enc2 in itertools.product(*c2):
            g2 = Prescription.pure(t, 2, enc2, g.n_actions(2))
            for z, cell in _forward(m, pi, g1, g2).items():
                post = _posterior(m, t, cell)
                seen = ref.get(z)
                if seen is None:
                    ref[z] = ((g1, g2), post)
                elif seen[1] != post:
                    return IndependenceWitness(t, pi, z, seen[0], (g1, g2), seen[1], post), [], len(ref), False
    if samples:
        rng = random.Random(f"{seed}:{t}:{pi.render()}")
        for _ in range(samples):
            g1 = Prescription(t, 1, tuple(_random_row(rng, g.n_actions(1)) for _ in range(pi.shape[1])))
            g2 = Prescription(t, 2, tuple(_random_row(rng, g.n_actions(2)) for _ in range(pi.shape[2])))
            for z, cell in _forward(m, pi, g1, g2).items():
                post = _posterior(m, t, cell)
                pair_a, post_a = ref[z]
                if post != post_a:
                    return IndependenceWitness(t, pi, z, pair_a, (g1, g2), post_a, post), [], len(ref), False
    zi = m.z_index[t - 1]
    order = sorted(ref, key=zi.__getitem__)
    return None, [ref[z][1] for z in order], len(ref), False


def check_strategy_independence(game: ValidatedGame, s: InformationStructure, budget: int = DEFAULT_BUDGET,
                                pair_budget: int = DEFAULT_PAIR_BUDGET, behavioral_samples: int = 0,
                                seed: int = 0, workers: int | None = None) -> IndependenceReport:
    """Verify that the posterior given (belief, increment) never depends on the prescriptions.

    ``budget`` caps the number of beliefs per stage and ``pair_budget`` the
    number of (reduced) pure prescription pairs per belief; exceeding either
    yields an inconclusive report.  ``behavioral_samples`` additionally tests
    that many random behavioral pairs per belief.
    """
    m = model_for(game, s)
    level = [initial_belief(game, s)]
    report = IndependenceReport(PASS, beliefs_per_stage=[1], behavioral_samples=behavioral_samples)
    for t in range(1, game.horizon):
        results = _map(lambda pi: _check_belief(m, pi, pair_budget, behavioral_samples, seed), level, workers)
        nxt: dict = {}
        for pi, (witness, posts, cells, over) in zip(level, results):
            report.cells += cells
            if witness is not None:
                report.status = FAIL
                report.witness = witness
                return report
            if over:
                report.status = INCONCLUSIVE
                report.frontier = len(level)
                report.message = f"prescription-pair budget exceeded at stage {t}"
                return report
            for post in posts:
                nxt.setdefault(post, None)
        report.beliefs_per_stage.append(len(nxt))
        if len(nxt) > budget:
            report.status = INCONCLUSIVE
            report.frontier = len(nxt)
            report.message = f"belief budget exceeded at stage {t + 1}"
            return report
        level = list(nxt)
    return report
