"""Finite two-controller dynamic game: label sets, kernels and costs.

A :class:`GameSpec` is the raw description.  :func:`validate_game_spec`
checks it and returns an immutable :class:`ValidatedGame` in which every
label is interned to a dense index and every number is a ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    EmptyLabelSet,
    InvalidHorizon,
    LabelError,
    NonStochasticRow,
    TimeVaryingCost,
    ValidationError,
)
from .rational import ONE, ZERO, to_fraction

# Labels used internally for "no private information" and "not yet observed".
NO_INFO = "-"
ABSENT = "_"
RESERVED_LABELS = frozenset({NO_INFO, ABSENT})

PLAYERS = (1, 2)


@dataclass
class GameSpec:
    """Unvalidated game description.

    Kernels are nested sequences indexed in declared label order:
    ``transition[t-1][x][u1][u2][x']`` for t = 1..T-1,
    ``obs_kernel_i[t-1][x][y]`` for t = 1..T and ``cost_i[x][u1][u2]``.
    Numbers may be ints, Fractions or "p/q" strings.
    """

    horizon: int
    states: Sequence[str]
    actions_1: Sequence[str]
    actions_2: Sequence[str]
    observations_1: Sequence[str]
    observations_2: Sequence[str]
    initial_dist: Sequence
    transition: Sequence
    obs_kernel_1: Sequence
    obs_kernel_2: Sequence
    cost_1: Sequence
    cost_2: Sequence

    @classmethod
    def time_invariant(cls, horizon, states, actions, observations, initial_dist,
                       transition, obs_kernels, costs) -> "GameSpec":
        """Build a spec whose transition and observation kernels repeat every stage."""
        return cls(
            horizon=horizon,
            states=states,
            actions_1=actions[0],
            actions_2=actions[1],
            observations_1=observations[0],
            observations_2=observations[1],
            initial_dist=initial_dist,
            transition=[transition] * max(horizon - 1, 0),
            obs_kernel_1=[obs_kernels[0]] * horizon,
            obs_kernel_2=[obs_kernels[1]] * horizon,
            cost_1=costs[0],
            cost_2=costs[1],
        )


@dataclass(frozen=True)
class ValidatedGame:
    horizon: int
    states: tuple[str, ...]
    actions: tuple[tuple[str, ...], tuple[str, ...]]
    observations: tuple[tuple[str, ...], tuple[str, ...]]
    initial_dist: tuple[Fraction, ...]
    # transition[t-1][x][u1][u2] -> distribution over next states
    transition: tuple
    # obs[i-1][t-1][x] -> distribution over controller i's observations
    obs: tuple
    # costs[i-1][x][u1][u2]
    costs: tuple
    _index: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        self._index["state"] = {s: k for k, s in enumerate(self.states)}
        for i in PLAYERS:
            self._index[("action", i)] = {a: k for k, a in enumerate(self.actions[i - 1])}
            self._index[("obs", i)] = {y: k for k, y in enumerate(self.observations[i - 1])}

    @property
    def n_states(self) -> int:
        return len(self.states)

    def n_actions(self, i: int) -> int:
        return len(self.actions[i - 1])

    def n_obs(self, i: int) -> int:
        return len(self.observations[i - 1])

    def state_index(self, x) -> int:
        return _resolve(x, self._index["state"], self.states, "state")

    def action_index(self, i: int, u) -> int:
        _check_player(i)
        return _resolve(u, self._index[("action", i)], self.actions[i - 1], f"action of controller {i}")

    def obs_index(self, i: int, y) -> int:
        _check_player(i)
        return _resolve(y, self._index[("obs", i)], self.observations[i - 1],
                        f"observation of controller {i}")

    def next_state_dist(self, t: int, x: int, u1: int, u2: int) -> tuple[Fraction, ...]:
        return self.transition[t - 1][x][u1][u2]

    def obs_dist(self, i: int, t: int, x: int) -> tuple[Fraction, ...]:
        return self.obs[i - 1][t - 1][x]

    def cost(self, i: int, x: int, u1: int, u2: int) -> Fraction:
        return self.costs[i - 1][x][u1][u2]

    def is_team(self) -> bool:
        return self.costs[0] == self.costs[1]


def _check_player(i: int) -> None:
    if i not in PLAYERS:
        raise LabelError(f"controller id must be 1 or 2, got {i!r}")


def _resolve(value, index: dict, labels: tuple, what: str) -> int:
    if isinstance(value, str):
        try:
            return index[value]
        except KeyError:
            raise LabelError(f"unknown {what} label {value!r}") from None
    if isinstance(value, int) and not isinstance(value, bool):
        if 0 <= value < len(labels):
            return value
        raise LabelError(f"{what} index {value} out of range 0..{len(labels) - 1}")
    raise LabelError(f"cannot interpret {value!r} as a {what}")


def _labels(name: str, values) -> tuple[str, ...]:
    labels = tuple(values)
    if not labels:
        raise EmptyLabelSet(f"label set {name!r} is empty")
    for lab in labels:
        if not isinstance(lab, str) or not lab:
            raise ValidationError(f"labels of {name!r} must be nonempty strings, got {lab!r}")
        if lab in RESERVED_LABELS:
            raise ValidationError(f"label {lab!r} in {name!r} is reserved")
    if len(set(labels)) != len(labels):
        raise ValidationError(f"duplicate labels in {name!r}")
    return labels


def _distribution(row, size: int, kernel: str, stage, where: tuple) -> tuple[Fraction, ...]:
    if isinstance(row, (str, int, Fraction)) or len(row) != size:
        raise ValidationError(f"{kernel} row {where} must have {size} entries")
    probs = tuple(to_fraction(p) for p in row)
    total = sum(probs, ZERO)
    if any(p < 0 for p in probs) or total != ONE:
        raise NonStochasticRow(kernel, stage, where, total)
    return probs


def _depth(value) -> int:
    d = 0
    while isinstance(value, (list, tuple)):
        if not value:
            break
        value = value[0]
        d += 1
    return d


def validate_game_spec(spec: GameSpec) -> ValidatedGame:
    """Check every invariant of ``spec`` and freeze it."""
    T = spec.horizon
    if isinstance(T, bool) or not isinstance(T, int) or T < 1:
        raise InvalidHorizon(f"horizon must be a positive integer, got {T!r}")
    states = _labels("states", spec.states)
    actions = (_labels("actions_1", spec.actions_1), _labels("actions_2", spec.actions_2))
    observations = (_labels("observations_1", spec.observations_1),
                    _labels("observations_2", spec.observations_2))
    nx = len(states)
    n1, n2 = len(actions[0]), len(actions[1])

    initial = _distribution(spec.initial_dist, nx, "initial", None, ())

    if len(spec.transition) != T - 1:
        raise ValidationError(f"expected {T - 1} transition kernels, got {len(spec.transition)}")
    transition = []
    for t, kernel in enumerate(spec.transition, start=1):
        if len(kernel) != nx:
            raise ValidationError(f"transition kernel at stage {t} must have {nx} state rows")
        by_state = []
        for x in range(nx):
            if len(kernel[x]) != n1 or any(len(kernel[x][a]) != n2 for a in range(n1)):
                raise ValidationError(f"transition kernel at stage {t}, state {states[x]!r}: bad action shape")
            by_state.append(tuple(
                tuple(_distribution(kernel[x][a][b], nx, "transition", t,
                                    (states[x], actions[0][a], actions[1][b]))
                      for b in range(n2))
                for a in range(n1)))
        transition.append(tuple(by_state))

    obs = []
    for i, kernels in ((1, spec.obs_kernel_1), (2, spec.obs_kernel_2)):
        if len(kernels) != T:
            raise ValidationError(f"expected {T} observation kernels for controller {i}, got {len(kernels)}")
        ny = len(observations[i - 1])
        per_stage = []
        for t, kernel in enumerate(kernels, start=1):
            if len(kernel) != nx:
                raise ValidationError(f"observation kernel {i} at stage {t} must have {nx} rows")
            per_stage.append(tuple(
                _distribution(kernel[x], ny, f"observation kernel {i}", t, (states[x],))
                for x in range(nx)))
        obs.append(tuple(per_stage))

    costs = []
    for i, tensor in ((1, spec.cost_1), (2, spec.cost_2)):
        if _depth(tensor) > 3:
            raise TimeVaryingCost(f"cost of controller {i} must be time-invariant c(x, u1, u2)")
        if len(tensor) != nx:
            raise ValidationError(f"cost of controller {i} must have {nx} state rows")
        rows = []
        for x in range(nx):
            if len(tensor[x]) != n1 or any(len(tensor[x][a]) != n2 for a in range(n1)):
                raise ValidationError(f"cost of controller {i}, state {states[x]!r}: bad action shape")
            rows.append(tuple(tuple(to_fraction(tensor[x][a][b]) for b in range(n2))
                              for a in range(n1)))
        costs.append(tuple(rows))

    return ValidatedGame(
        horizon=T,
        states=states,
        actions=actions,
        observations=observations,
        initial_dist=initial,
        transition=tuple(transition),
        obs=tuple(obs),
        costs=tuple(costs),
    )


def stage_cost(game: ValidatedGame, i: int, x, u1, u2) -> Fraction:
    """Instantaneous cost c^i(x, u1, u2); labels (str) or indices (int) accepted."""
    _check_player(i)
    return game.cost(i, game.state_index(x), game.action_index(1, u1), game.action_index(2, u2))
