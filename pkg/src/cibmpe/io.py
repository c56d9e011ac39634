"""Game-spec files and result serialization (JSON, exact rationals as "p/q")."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .belief import GENERAL, STRATEGY_FREE, Belief, BeliefGraph, Edge, Prescription
from .errors import ValidationError
from .game import GameSpec, ValidatedGame, validate_game_spec
from .induction import PURE, TEAM, EquilibriumResult
from .info import (
    Custom,
    DelayedSharing,
    GlobalLocal,
    InformationStructure,
    OneDirectionalOneStep,
    OneStepDelay,
    SingleControllerDelay,
    Symmetric,
    Uncontrolled,
    build_information_structure,
    freeze,
    render,
    to_json,
)
from .rational import fmt, to_fraction
from .stage import StageEquilibrium

FIXTURES = Path(__file__).parent / "fixtures"
RESULT_FORMAT = "cibmpe-result/1"

REQUIRED_SECTIONS = ("horizon", "states", "actions", "observations", "initial", "obs_kernels", "costs",
                     "information_structure")

KIND_NAMES = {
    OneStepDelay: "one_step_delay",
    OneDirectionalOneStep: "one_directional_one_step",
    SingleControllerDelay: "single_controller_delay",
    GlobalLocal: "global_local",
    Uncontrolled: "uncontrolled",
    Symmetric: "symmetric",
    DelayedSharing: "delayed_sharing",
    Custom: "custom",
}


def resolve_path(name: str | Path, suffixes=("", ".game", ".json")) -> Path:
    """The path itself if it exists, else a bundled fixture of that name."""
    path = Path(name)
    if path.exists():
        return path
    for suffix in suffixes:
        candidate = FIXTURES / (str(name) + suffix)
        if candidate.exists():
            return candidate
    return path


@dataclass
class LoadedGame:
    game: ValidatedGame
    structure: InformationStructure
    kind: object
    path: Path | None = None


def _kernel_stages(value, stages: int, what: str) -> list:
    if isinstance(value, dict):
        if "stages" not in value:
            raise ValidationError(f"{what}: a per-stage kernel needs a 'stages' list")
        return list(value["stages"])
    return [value] * stages


def parse_kind(data) -> object:
    if isinstance(data, str):
        data = {"kind": data}
    if not isinstance(data, dict) or "kind" not in data:
        raise ValidationError("information_structure needs a 'kind'")
    name = data["kind"]
    params = {k: v for k, v in data.items() if k != "kind"}
    try:
        match name:
            case "one_step_delay":
                return OneStepDelay(**params)
            case "one_directional_one_step":
                return OneDirectionalOneStep(**params)
            case "single_controller_delay":
                return SingleControllerDelay(**params)
            case "global_local":
                obs = params.get("obs_components", [{}, {}])
                return GlobalLocal(noisy=bool(params.get("noisy", False)),
                                   state_components=params.get("state_components", {}),
                                   obs_components=tuple(obs))
            case "uncontrolled":
                return Uncontrolled(**params)
            case "symmetric":
                return Symmetric(**params)
            case "delayed_sharing":
                return DelayedSharing(**params)
            case "custom":
                return Custom(private_spaces=params["private_spaces"], init=params["init"],
                              xi=params["xi"], zeta=params["zeta"],
                              claims_assumption_2=bool(params.get("claims_assumption_2", False)))
    except TypeError as exc:
        raise ValidationError(f"bad parameters for structure kind {name!r}: {exc}") from None
    except KeyError as exc:
        raise ValidationError(f"custom structure misses {exc}") from None
    raise ValidationError(f"unknown structure kind {name!r}")


def kind_to_json(kind) -> dict:
    out = {"kind": KIND_NAMES[type(kind)]}
    match kind:
        case SingleControllerDelay(case=case, d=d):
            out.update(case=case, d=d)
        case Uncontrolled(d=d) | DelayedSharing(d=d):
            out.update(d=d)
        case GlobalLocal():
            out.update(noisy=kind.noisy,
                       state_components={k: to_json(v) for k, v in kind.state_components},
                       obs_components=[{k: to_json(v) for k, v in m} for m in kind.obs_components])
        case Custom():
            out.update(private_spaces=to_json(freeze(kind.private_spaces)),
                       init=[{y: to_json(freeze(p)) for y, p in dict(m).items()} for m in kind.init],
                       xi=[[_table_rows(tab) for tab in per_player] for per_player in kind.xi],
                       zeta=[_table_rows(tab) for tab in kind.zeta],
                       claims_assumption_2=kind.claims_assumption_2)
    return out


def _table_rows(table) -> list:
    if isinstance(table, dict):
        return [to_json(freeze(k)) + [to_json(freeze(v))] for k, v in table.items()]
    return [to_json(freeze(row)) for row in table]


def parse_game(data: dict) -> tuple[GameSpec, object]:
    if not isinstance(data, dict):
        raise ValidationError("a game file must hold a JSON object")
    for section in REQUIRED_SECTIONS:
        if section not in data:
            raise ValidationError(f"missing section {section!r}")
    T = data["horizon"]
    if not isinstance(T, int) or isinstance(T, bool):
        raise ValidationError("'horizon' must be an integer")
    actions, observations = data["actions"], data["observations"]
    if len(actions) != 2 or len(observations) != 2:
        raise ValidationError("'actions' and 'observations' need one list per controller")
    obs_kernels, costs = data["obs_kernels"], data["costs"]
    if len(obs_kernels) != 2 or len(costs) != 2:
        raise ValidationError("'obs_kernels' and 'costs' need one entry per controller")
    if T > 1 and "transition" not in data:
        raise ValidationError("missing section 'transition'")
    transition = _kernel_stages(data.get("transition", []), max(T - 1, 0), "transition") if T > 1 else []
    spec = GameSpec(
        horizon=T,
        states=data["states"],
        actions_1=actions[0], actions_2=actions[1],
        observations_1=observations[0], observations_2=observations[1],
        initial_dist=data["initial"],
        transition=transition,
        obs_kernel_1=_kernel_stages(obs_kernels[0], max(T, 0), "obs_kernels[0]"),
        obs_kernel_2=_kernel_stages(obs_kernels[1], max(T, 0), "obs_kernels[1]"),
        cost_1=costs[0], cost_2=costs[1],
    )
    return spec, parse_kind(data["information_structure"])


def load_game(path: str | Path) -> LoadedGame:
    path = resolve_path(path)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None
    spec, kind = parse_game(data)
    game = validate_game_spec(spec)
    return LoadedGame(game, build_information_structure(kind, game), kind, Path(path))


def game_to_json(game: ValidatedGame, kind) -> dict:
    """Inverse of :func:`parse_game` (always writes per-stage kernels)."""
    frac = lambda nested: [frac(v) for v in nested] if isinstance(nested, tuple) else fmt(nested)
    return {
        "horizon": game.horizon,
        "states": list(game.states),
        "actions": [list(a) for a in game.actions],
        "observations": [list(o) for o in game.observations],
        "initial": frac(game.initial_dist),
        "transition": {"stages": frac(game.transition)},
        "obs_kernels": [{"stages": frac(game.obs[0])}, {"stages": frac(game.obs[1])}],
        "costs": [frac(game.costs[0]), frac(game.costs[1])],
        "information_structure": kind_to_json(kind),
    }


# -- results -----------------------------------------------------------------------------


def _prescription_json(g: Prescription, game: ValidatedGame, s: InformationStructure) -> dict:
    out = {}
    for p, a in g.as_labels(game, s).items():
        out[render(p)] = {u: fmt(q) for u, q in a.items()} if isinstance(a, dict) else a
    return out


def _prescription_from_json(data: dict, t: int, i: int, game: ValidatedGame, s: InformationStructure) -> Prescription:
    n = game.n_actions(i)
    rows = []
    for p in s.private_space(i, t):
        key = render(p)
        if key not in data:
            raise ValidationError(f"prescription of controller {i} at stage {t} misses {key!r}")
        entry = data[key]
        row = [Fraction(0)] * n
        if isinstance(entry, dict):
            for u, q in entry.items():
                row[game.action_index(i, u)] += to_fraction(q)
        else:
            row[game.action_index(i, entry)] = Fraction(1)
        rows.append(tuple(row))
    return Prescription(t, i, tuple(rows))


def result_to_json(result: EquilibriumResult, game: ValidatedGame, s: InformationStructure) -> dict:
    stages = []
    for t in range(1, result.horizon + 1):
        level = result.graph.beliefs(t)
        beliefs = []
        for k, pi in enumerate(level):
            g1, g2 = result.policy[t - 1][pi]
            entry = {
                "id": k,
                "weights": [fmt(w) for w in pi.weights],
                "values": [fmt(v) for v in result.values[t - 1][pi]],
                "prescriptions": {"1": _prescription_json(g1, game, s), "2": _prescription_json(g2, game, s)},
            }
            if result.mode == PURE and result.equilibria:
                entry["selected"] = result.selection[t - 1][pi]
                entry["equilibria"] = [
                    {"prescriptions": {"1": _prescription_json(e.prescriptions[0], game, s),
                                       "2": _prescription_json(e.prescriptions[1], game, s)},
                     "values": [fmt(v) for v in e.values]}
                    for e in result.equilibria[t - 1][pi]]
            beliefs.append(entry)
        edges = []
        for e in result.graph.edges:
            if e.stage != t:
                continue
            item = {"from": e.source, "z": to_json(e.z), "to": e.target}
            if e.pair is not None:
                item["pair"] = [list(e.pair[0].encoding()), list(e.pair[1].encoding())]
            edges.append(item)
        stages.append({
            "stage": t,
            "private_1": [render(p) for p in s.private_space(1, t)],
            "private_2": [render(p) for p in s.private_space(2, t)],
            "beliefs": beliefs,
            "edges": edges,
        })
    out = {"format": RESULT_FORMAT, "mode": result.mode, "horizon": result.horizon}
    if result.selection_rule:
        out["selection_rule"] = result.selection_rule
    out["stages"] = stages
    return out


def dumps_result(result: EquilibriumResult, game: ValidatedGame, s: InformationStructure) -> str:
    return json.dumps(result_to_json(result, game, s), indent=1, ensure_ascii=False) + "\n"


def result_from_json(data: dict, game: ValidatedGame, s: InformationStructure) -> EquilibriumResult:
    if not isinstance(data, dict) or data.get("format") != RESULT_FORMAT:
        raise ValidationError(f"not a {RESULT_FORMAT} document")
    T = data["horizon"]
    if T != game.horizon or len(data["stages"]) != T:
        raise ValidationError("result horizon does not match the game")
    stages, edges = [], []
    values, policy, found, chosen = [], [], [], []
    for t, st in enumerate(data["stages"], start=1):
        if st.get("private_1") != [render(p) for p in s.private_space(1, t)] or \
                st.get("private_2") != [render(p) for p in s.private_space(2, t)]:
            raise ValidationError(f"stage {t}: private spaces do not match the game's structure")
        shape = (game.n_states, len(s.private_space(1, t)), len(s.private_space(2, t)))
        level, vals, pol, eqs, sel = [], {}, {}, {}, {}
        for k, b in enumerate(st["beliefs"]):
            if b["id"] != k:
                raise ValidationError(f"stage {t}: belief ids must be 0..n-1 in order")
            pi = Belief(t, shape, tuple(to_fraction(w) for w in b["weights"]))
            level.append(pi)
            vals[pi] = tuple(to_fraction(v) for v in b["values"])
            pol[pi] = tuple(_prescription_from_json(b["prescriptions"][str(i)], t, i, game, s) for i in (1, 2))
            if "equilibria" in b:
                eqs[pi] = [StageEquilibrium(
                    tuple(_prescription_from_json(e["prescriptions"][str(i)], t, i, game, s) for i in (1, 2)),
                    tuple(to_fraction(v) for v in e["values"])) for e in b["equilibria"]]
                sel[pi] = b.get("selected", 0)
        for e in st["edges"]:
            pair = None
            if "pair" in e:
                pair = (Prescription.pure(t, 1, e["pair"][0], game.n_actions(1)),
                        Prescription.pure(t, 2, e["pair"][1], game.n_actions(2)))
            edges.append(Edge(t, e["from"], freeze(e["z"]), e["to"], pair))
        stages.append(level)
        values.append(vals)
        policy.append(pol)
        found.append(eqs)
        chosen.append(sel)
    graph = BeliefGraph(GENERAL if data["mode"] == TEAM else STRATEGY_FREE, stages, edges)
    has_eqs = any(found)
    return EquilibriumResult(data["mode"], graph, values, policy, found if has_eqs else [],
                             chosen if has_eqs else [], data.get("selection_rule", ""))


def load_result(path: str | Path, game: ValidatedGame, s: InformationStructure) -> EquilibriumResult:
    path = resolve_path(path, ("", ".json", ".result.json"))
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None
    return result_from_json(data, game, s)


def result_report(result: EquilibriumResult, game: ValidatedGame, s: InformationStructure) -> str:
    """Human-readable per-stage tables."""
    lines = [f"mode {result.mode}"]
    if result.selection_rule:
        lines.append(f"selection {result.selection_rule}")
    for t in range(1, result.horizon + 1):
        lines.append(f"stage {t}: {len(result.graph.beliefs(t))} beliefs")
        for k, pi in enumerate(result.graph.beliefs(t)):
            v1, v2 = result.values[t - 1][pi]
            lines.append(f"  belief {t}.{k}: {pi.render()}")
            lines.append(f"    V1 = {fmt(v1)}, V2 = {fmt(v2)}")
            for g in result.policy[t - 1][pi]:
                items = ", ".join(f"{p}->{_cell(a)}" for p, a in _prescription_json(g, game, s).items())
                lines.append(f"    g{g.player}: {items}")
            if result.selection:
                n = len(result.equilibria[t - 1][pi])
                lines.append(f"    selected equilibrium {result.selection[t - 1][pi]} of {n}")
    return "\n".join(lines)


def _cell(a) -> str:
    if isinstance(a, dict):
        return "{" + ",".join(f"{u}:{q}" for u, q in a.items()) + "}"
    return str(a)
