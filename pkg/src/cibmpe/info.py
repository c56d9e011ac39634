"""Private/common information machinery.

An :class:`InformationStructure` declares, for every stage, the finite sets
of private-information realizations of both controllers, the map producing
the common-information increment and the maps updating private information.
All maps take action and observation *labels* and return hashable
realizations built from labels (strings and nested tuples), so realizations
render and serialize without extra bookkeeping.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping

from .errors import IncompatibleGame, OutOfDomain, ValidationError
from .game import ABSENT, NO_INFO, PLAYERS, ValidatedGame

Realization = Hashable


# -- structure kinds ---------------------------------------------------------


@dataclass(frozen=True)
class OneStepDelay:
    """All observations and actions are shared with one step of delay."""


@dataclass(frozen=True)
class OneDirectionalOneStep:
    """Controller 1's observations reach controller 2 at once; the reverse takes one step."""


@dataclass(frozen=True)
class SingleControllerDelay:
    """State driven by controller 1 only; controller 2's observations reach 1 after ``d`` steps."""

    case: str = "A"
    d: int = 1

    def __post_init__(self):
        if self.case not in ("A", "B"):
            raise ValidationError(f"case must be 'A' or 'B', got {self.case!r}")
        _check_delay(self.d)


@dataclass(frozen=True)
class GlobalLocal:
    """Global state shared by everyone, local states private.

    ``state_components`` maps every state label to ``(global, local_1, local_2)``.
    ``obs_components[i-1]`` maps each observation label of controller i to
    ``(common_part, local_part)``.  Noiseless: the common part is the global
    state itself.  Noisy: it is a noisy reading of the global state.
    """

    noisy: bool = False
    state_components: tuple = ()
    obs_components: tuple = ((), ())

    def __post_init__(self):
        object.__setattr__(self, "state_components", _as_items(self.state_components))
        object.__setattr__(self, "obs_components",
                           tuple(_as_items(m) for m in self.obs_components))
        if len(self.obs_components) != 2:
            raise ValidationError("obs_components needs one mapping per controller")


@dataclass(frozen=True)
class Uncontrolled:
    """Action-independent state; observations shared with a delay of ``d`` steps."""

    d: int = 1

    def __post_init__(self):
        _check_delay(self.d)


@dataclass(frozen=True)
class Symmetric:
    """Every observation and action is common; no private information."""


@dataclass(frozen=True)
class DelayedSharing:
    """Observations and actions shared with a delay of ``d`` steps (``d = 1`` is OneStepDelay
    up to the representation of private information).  Beliefs are in general not
    strategy independent for ``d >= 2``.
    """

    d: int = 2

    def __post_init__(self):
        _check_delay(self.d)


@dataclass(frozen=True)
class Custom:
    """Explicit tables.

    ``private_spaces[i-1][t-1]`` lists the realizations, ``init[i-1]`` maps an
    observation label to the stage-1 private realization, ``xi[i-1][t-1]``
    maps ``(p, u, y_next)`` to the next private realization and ``zeta[t-1]``
    maps ``(p1, p2, u1, u2, y1_next, y2_next)`` to the increment.
    """

    private_spaces: tuple
    init: tuple
    xi: tuple
    zeta: tuple
    claims_assumption_2: bool = False


StructureKind = (OneStepDelay | OneDirectionalOneStep | SingleControllerDelay | GlobalLocal
                 | Uncontrolled | Symmetric | DelayedSharing | Custom)


def _check_delay(d) -> None:
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ValidationError(f"delay must be an integer >= 1, got {d!r}")


def _as_items(mapping) -> tuple:
    items = mapping.items() if isinstance(mapping, Mapping) else mapping
    return tuple((k, freeze(v)) for k, v in items)


def freeze(value):
    """Turn JSON-style nested lists into nested tuples."""
    if isinstance(value, list | tuple):
        return tuple(freeze(v) for v in value)
    return value


def render(value) -> str:
    if isinstance(value, tuple):
        return "(" + ",".join(render(v) for v in value) + ")"
    return str(value)


def to_json(value):
    if isinstance(value, tuple):
        return [to_json(v) for v in value]
    return value


# -- the structure -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InformationStructure:
    kind: object
    horizon: int
    actions: tuple
    observations: tuple
    # private_spaces[i-1][t-1]: ordered realizations of P^i_t
    private_spaces: tuple
    # zeta(t, p1, p2, u1, u2, y1_next, y2_next) -> increment z_{t+1}
    zeta: Callable
    # xi[i-1](t, p, u, y_next) -> P^i_{t+1}
    xi: tuple
    # eta[i-1](y) -> P^i_1
    eta: tuple
    claims_assumption_2: bool
    increment_spaces: tuple = ()
    _private_index: tuple = field(default=(), repr=False)

    def __post_init__(self):
        index = tuple(tuple({p: k for k, p in enumerate(space)} for space in per_player)
                      for per_player in self.private_spaces)
        object.__setattr__(self, "_private_index", index)
        for i in PLAYERS:
            if len(self.private_spaces[i - 1]) != self.horizon:
                raise ValidationError(f"controller {i} needs {self.horizon} private spaces")
            for t, space in enumerate(self.private_spaces[i - 1], start=1):
                if not space:
                    raise ValidationError(f"private space of controller {i} at stage {t} is empty")
                if len(index[i - 1][t - 1]) != len(space):
                    raise ValidationError(f"duplicate private realizations for controller {i}, stage {t}")
        object.__setattr__(self, "increment_spaces", self._sweep())

    def private_space(self, i: int, t: int) -> tuple:
        return self.private_spaces[i - 1][t - 1]

    def private_index(self, i: int, t: int, p) -> int:
        try:
            return self._private_index[i - 1][t - 1][p]
        except KeyError:
            raise OutOfDomain(f"{p!r} is not a stage-{t} private realization of controller {i}") from None

    def _sweep(self) -> tuple:
        """Exhaustive totality check; also collects the increment spaces."""
        for i in PLAYERS:
            for y in self.observations[i - 1]:
                p = self._call(self.eta[i - 1], y, what=f"eta^{i}")
                self.private_index(i, 1, p)
        spaces = []
        for t in range(1, self.horizon):
            seen: dict = {}
            for p1, p2 in itertools.product(self.private_space(1, t), self.private_space(2, t)):
                for u1, u2, y1, y2 in itertools.product(self.actions[0], self.actions[1],
                                                        self.observations[0], self.observations[1]):
                    z = self._call(self.zeta, t, p1, p2, u1, u2, y1, y2, what=f"zeta_{t + 1}")
                    seen.setdefault(z, None)
            for i in PLAYERS:
                for p in self.private_space(i, t):
                    for u, y in itertools.product(self.actions[i - 1], self.observations[i - 1]):
                        q = self._call(self.xi[i - 1], t, p, u, y, what=f"xi^{i}_{t + 1}")
                        self.private_index(i, t + 1, q)
            spaces.append(tuple(seen))
        return tuple(spaces)

    @staticmethod
    def _call(fn, *args, what):
        try:
            return fn(*args)
        except (KeyError, IndexError):
            raise ValidationError(f"{what} is not defined at {args}") from None

    def _check_args(self, t: int, **named) -> dict:
        if not 1 <= t < self.horizon:
            raise OutOfDomain(f"stage {t} has no successor (horizon {self.horizon})")
        out = {}
        for name, value in named.items():
            kind, i = name[0], int(name[-1])
            if kind == "p":
                self.private_index(i, t, value)
                out[name] = value
            else:
                labels = self.actions[i - 1] if kind == "u" else self.observations[i - 1]
                if isinstance(value, int) and not isinstance(value, bool) and 0 <= value < len(labels):
                    value = labels[value]
                if value not in labels:
                    raise OutOfDomain(f"{value!r} is not a valid {name} label")
                out[name] = value
        return out


def apply_increment_map(s: InformationStructure, t: int, p1, p2, u1, u2, y1next, y2next):
    """The increment z_{t+1} produced at the boundary t -> t+1."""
    a = s._check_args(t, p1=p1, p2=p2, u1=u1, u2=u2, y1=y1next, y2=y2next)
    return s.zeta(t, a["p1"], a["p2"], a["u1"], a["u2"], a["y1"], a["y2"])


def apply_private_update(s: InformationStructure, t: int, i: int, p, u, ynext):
    """Controller i's private realization at t+1."""
    if i == 1:
        a = s._check_args(t, p1=p, u1=u, y1=ynext)
        return s.xi[0](t, a["p1"], a["u1"], a["y1"])
    if i == 2:
        a = s._check_args(t, p2=p, u2=u, y2=ynext)
        return s.xi[1](t, a["p2"], a["u2"], a["y2"])
    raise OutOfDomain(f"controller id must be 1 or 2, got {i!r}")


# -- builders -------------------------------------------------------------------


def _window_space(labels: tuple, d: int, t: int) -> tuple:
    """Realizations of the last ``d`` observations at stage ``t``, padded while t < d."""
    pad = max(0, d - t)
    return tuple((ABSENT,) * pad + tail for tail in itertools.product(labels, repeat=d - pad))


def _shift(window: tuple, y) -> tuple:
    return window[1:] + (y,)


def _window_init(d: int):
    return lambda y: (ABSENT,) * (d - 1) + (y,)


def _no_info(*_args):
    return NO_INFO


def _latest(_t, _p, _u, y):
    return y


def _keep(_t, p, _u, _y):
    return p


def _shift_obs(_t, p, _u, y):
    return _shift(p, y)


def _identity(y):
    return y


def _transition_witness(game: ValidatedGame, same) -> tuple | None:
    """First (t, x, pair_a, pair_b, x') where two action pairs that ``same`` declares
    equivalent lead to different next-state probabilities."""
    for t in range(1, game.horizon):
        for x in range(game.n_states):
            pairs = list(itertools.product(range(game.n_actions(1)), range(game.n_actions(2))))
            for a, b in itertools.combinations(pairs, 2):
                if not same(a, b):
                    continue
                pa, pb = game.next_state_dist(t, x, *a), game.next_state_dist(t, x, *b)
                if pa != pb:
                    xn = next(k for k in range(game.n_states) if pa[k] != pb[k])
                    return (t, game.states[x],
                            (game.actions[0][a[0]], game.actions[1][a[1]]),
                            (game.actions[0][b[0]], game.actions[1][b[1]]),
                            game.states[xn])
    return None


def build_information_structure(kind, game: ValidatedGame) -> InformationStructure:
    """Instantiate ``kind`` over ``game``; raises IncompatibleGame on a mismatch."""
    T = game.horizon
    obs = game.observations
    common = dict(kind=kind, horizon=T, actions=game.actions, observations=obs)
    singleton = tuple((NO_INFO,) for _ in range(T))

    match kind:
        case OneStepDelay():
            return InformationStructure(
                private_spaces=tuple(tuple(obs[i] for _ in range(T)) for i in range(2)),
                zeta=lambda t, p1, p2, u1, u2, y1, y2: (p1, p2, u1, u2),
                xi=(_latest, _latest), eta=(_identity, _identity),
                claims_assumption_2=True, **common)

        case OneDirectionalOneStep():
            return InformationStructure(
                private_spaces=(singleton, tuple(obs[1] for _ in range(T))),
                zeta=lambda t, p1, p2, u1, u2, y1, y2: (y1, p2, u1, u2),
                xi=(_keep, _latest), eta=(_no_info, _identity),
                claims_assumption_2=True, **common)

        case SingleControllerDelay(case=case, d=d):
            witness = _transition_witness(game, lambda a, b: a[0] == b[0])
            if witness is not None:
                raise IncompatibleGame("transition depends on controller 2's action", witness)
            d = min(d, T)
            window = tuple(_window_space(obs[1], d, t) for t in range(1, T + 1))
            if case == "A":
                spaces1, xi1, eta1 = singleton, _keep, _no_info
                zeta = lambda t, p1, p2, u1, u2, y1, y2: (y1, p2[0], u1)
            else:
                spaces1, xi1, eta1 = tuple(obs[0] for _ in range(T)), _latest, _identity
                zeta = lambda t, p1, p2, u1, u2, y1, y2: (p1, p2[0], u1)
            return InformationStructure(
                private_spaces=(spaces1, window), zeta=zeta, xi=(xi1, _shift_obs),
                eta=(eta1, _window_init(d)), claims_assumption_2=True, **common)

        case Uncontrolled(d=d):
            witness = _transition_witness(game, lambda a, b: True)
            if witness is not None:
                raise IncompatibleGame("transition depends on the actions", witness)
            d = min(d, T)
            return InformationStructure(
                private_spaces=tuple(tuple(_window_space(obs[i], d, t) for t in range(1, T + 1))
                                     for i in range(2)),
                zeta=lambda t, p1, p2, u1, u2, y1, y2: (p1[0], p2[0]),
                xi=(_shift_obs, _shift_obs), eta=(_window_init(d), _window_init(d)),
                claims_assumption_2=True, **common)

        case Symmetric():
            return InformationStructure(
                private_spaces=(singleton, singleton),
                zeta=lambda t, p1, p2, u1, u2, y1, y2: (y1, y2, u1, u2),
                xi=(_keep, _keep), eta=(_no_info, _no_info),
                claims_assumption_2=True, **common)

        case DelayedSharing(d=d):
            return _delayed_sharing(game, min(d, T), common)

        case GlobalLocal():
            return _global_local(kind, game, common)

        case Custom():
            return _custom(kind, game, common)

    raise ValidationError(f"unknown structure kind {kind!r}")


def _delayed_sharing(game: ValidatedGame, d: int, common: dict) -> InformationStructure:
    """P^i_t = (Y^i_{t-d+1:t}, U^i_{t-d+1:t-1}); the oldest observation and action become common."""
    T = game.horizon
    obs, act = game.observations, game.actions

    def space(i, t):
        ys = _window_space(obs[i], d, t)
        us = _window_space(act[i], d - 1, t - 1) if d > 1 else ((),)
        return tuple((y, u) for y in ys for u in us)

    def xi(t, p, u, y):
        ys, us = p
        return (_shift(ys, y), _shift(us, u) if d > 1 else ())

    def zeta(t, p1, p2, u1, u2, y1, y2):
        if d == 1:
            return (p1[0][0], p2[0][0], u1, u2)
        (ys1, us1), (ys2, us2) = p1, p2
        return (ys1[0], ys2[0], us1[0], us2[0])

    def eta(y):
        return ((ABSENT,) * (d - 1) + (y,), (ABSENT,) * (d - 1))

    return InformationStructure(
        private_spaces=tuple(tuple(space(i, t) for t in range(1, T + 1)) for i in range(2)),
        zeta=zeta, xi=(xi, xi), eta=(eta, eta), claims_assumption_2=(d == 1), **common)


def _global_local(kind: GlobalLocal, game: ValidatedGame, common: dict) -> InformationStructure:
    T = game.horizon
    comps = dict(kind.state_components)
    missing = [x for x in game.states if x not in comps]
    if missing or len(comps) != game.n_states:
        raise IncompatibleGame("state_components must list every state exactly once",
                               tuple(missing) or None)
    for x, c in comps.items():
        if not (isinstance(c, tuple) and len(c) == 3):
            raise IncompatibleGame(f"state {x!r} must map to (global, local_1, local_2)")
    if len(set(comps.values())) != len(comps):
        raise IncompatibleGame("state components must identify the state")
    glob = [comps[x][0] for x in game.states]

    witness = _state_witness(game, glob)
    if witness is not None:
        raise IncompatibleGame("transition depends on more than the global state", witness)

    decoders = []
    for i in PLAYERS:
        dec = dict(kind.obs_components[i - 1])
        for y in game.observations[i - 1]:
            if y not in dec or not (isinstance(dec[y], tuple) and len(dec[y]) == 2):
                raise IncompatibleGame(f"observation {y!r} of controller {i} needs (common, local)")
        decoders.append(dec)
        for t in range(1, T + 1):
            for x in range(game.n_states):
                _, *locs = comps[game.states[x]]
                for k, q in enumerate(game.obs_dist(i, t, x)):
                    if q == 0:
                        continue
                    y = game.observations[i - 1][k]
                    c, loc = dec[y]
                    if loc != locs[i - 1]:
                        raise IncompatibleGame(f"controller {i}'s observation does not reveal its local state",
                                               (t, game.states[x], y))
                    if not kind.noisy and c != glob[x]:
                        raise IncompatibleGame(f"controller {i}'s observation does not reveal the global state",
                                               (t, game.states[x], y))
        if kind.noisy:
            w = _common_channel_witness(game, i, dec, glob)
            if w is not None:
                raise IncompatibleGame("common observation depends on more than the global state", w)

    locals_ = []
    for i in PLAYERS:
        seen = dict.fromkeys(comps[x][i] for x in game.states)
        locals_.append(tuple(seen))

    d1, d2 = decoders
    if kind.noisy:
        zeta = lambda t, p1, p2, u1, u2, y1, y2: (d1[y1][0], d2[y2][0], u1, u2)
    else:
        zeta = lambda t, p1, p2, u1, u2, y1, y2: (d1[y1][0], u1, u2)
    return InformationStructure(
        private_spaces=tuple(tuple(locals_[i] for _ in range(T)) for i in range(2)),
        zeta=zeta,
        xi=(lambda t, p, u, y: d1[y][1], lambda t, p, u, y: d2[y][1]),
        eta=(lambda y: d1[y][1], lambda y: d2[y][1]),
        claims_assumption_2=True, **common)


def _state_witness(game: ValidatedGame, glob: list) -> tuple | None:
    for t in range(1, game.horizon):
        for x, xt in itertools.combinations(range(game.n_states), 2):
            if glob[x] != glob[xt]:
                continue
            for a in range(game.n_actions(1)):
                for b in range(game.n_actions(2)):
                    if game.next_state_dist(t, x, a, b) != game.next_state_dist(t, xt, a, b):
                        return (t, game.states[x], game.states[xt],
                                (game.actions[0][a], game.actions[1][b]))
    return None


def _common_channel_witness(game: ValidatedGame, i: int, dec: dict, glob: list) -> tuple | None:
    for t in range(1, game.horizon + 1):
        law = {}
        for x in range(game.n_states):
            marg: dict = {}
            for k, q in enumerate(game.obs_dist(i, t, x)):
                c = dec[game.observations[i - 1][k]][0]
                marg[c] = marg.get(c, 0) + q
            marg = {c: q for c, q in marg.items() if q}
            if glob[x] in law and law[glob[x]][1] != marg:
                return (t, law[glob[x]][0], game.states[x])
            law.setdefault(glob[x], (game.states[x], marg))
    return None


def _custom(kind: Custom, game: ValidatedGame, common: dict) -> InformationStructure:
    T = game.horizon
    spaces = tuple(tuple(tuple(freeze(p) for p in stage) for stage in kind.private_spaces[i])
                   for i in range(2))
    if any(len(s) != T for s in spaces):
        raise ValidationError(f"custom structure needs {T} private spaces per controller")
    init = tuple({y: freeze(p) for y, p in dict(kind.init[i]).items()} for i in range(2))
    xi_tables = tuple(tuple(_table(stage) for stage in kind.xi[i]) for i in range(2))
    zeta_tables = tuple(_table(stage) for stage in kind.zeta)
    if len(zeta_tables) != T - 1 or any(len(x) != T - 1 for x in xi_tables):
        raise ValidationError(f"custom structure needs {T - 1} zeta and xi tables")

    def zeta(t, p1, p2, u1, u2, y1, y2):
        return zeta_tables[t - 1][(p1, p2, u1, u2, y1, y2)]

    def make_xi(i):
        return lambda t, p, u, y: xi_tables[i][t - 1][(p, u, y)]

    return InformationStructure(
        private_spaces=spaces, zeta=zeta, xi=(make_xi(0), make_xi(1)),
        eta=(init[0].__getitem__, init[1].__getitem__),
        claims_assumption_2=bool(kind.claims_assumption_2), **common)


def _table(rows) -> dict:
    """Rows ``[arg_1, ..., arg_k, value]`` (or a prebuilt mapping) to a lookup dict."""
    if isinstance(rows, Mapping):
        return {freeze(k): freeze(v) for k, v in rows.items()}
    out = {}
    for row in rows:
        *args, value = row
        key = tuple(freeze(a) for a in args)
        if key in out and out[key] != freeze(value):
            raise ValidationError(f"conflicting table entries for {key}")
        out[key] = freeze(value)
    return out
