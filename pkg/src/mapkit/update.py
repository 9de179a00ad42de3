"""Update models, product update and the per-action-kind event models.

This is the second route to the same successor states: build an event
model for the action and its frame of reference, then take the product
with the current structure.  `cross_check` compares both routes.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import FrameError, UnsupportedShapeError
from .kripke import KripkeStructure, PointedStructure, bisimilar, satisfies
from .lang import SENSING, WORLD_ALTERING, Theory
from .logic import TOP, And, Atom, Formula, Not, Or, disj, format_formula, simplify
from .transition import FrameOfReference, frame_of_reference, step

SIGMA, TAU, EPSILON = "σ", "τ", "ε"


@dataclass(frozen=True, eq=False)
class UpdateModel:
    events: tuple[str, ...]
    relations: Mapping[str, frozenset]
    pre: Mapping[str, Formula]
    sub: Mapping[str, Mapping[str, Formula]] = field(default_factory=dict)

    def __post_init__(self):
        ev = set(self.events)
        if set(self.pre) != ev:
            raise ValueError("preconditions must be given for exactly the events")
        for e in self.sub:
            if e not in ev:
                raise ValueError(f"substitution for unknown event {e!r}")
        for a, pairs in self.relations.items():
            for x, y in pairs:
                if x not in ev or y not in ev:
                    raise ValueError(f"relation of {a} mentions an unknown event")

    def substitution(self, event: str) -> Mapping[str, Formula]:
        return self.sub.get(event, {})


@dataclass(frozen=True, eq=False)
class UpdateInstance:
    model: UpdateModel
    designated: str


@dataclass(frozen=True, eq=False)
class UpdateTemplate:
    model: UpdateModel
    designated: frozenset

    def __post_init__(self):
        if not set(self.designated) <= set(self.model.events):
            raise ValueError("designated events must belong to the model")


def as_template(u: UpdateInstance | UpdateTemplate) -> UpdateTemplate:
    if isinstance(u, UpdateTemplate):
        return u
    return UpdateTemplate(u.model, frozenset([u.designated]))


def _product(M: KripkeStructure, U: UpdateModel):
    ids: dict[tuple[int, str], int] = {}
    live: dict[str, list] = {}
    for tau in U.events:
        mask = M.truth(U.pre[tau])
        live[tau] = [s for s, ok in zip(M.worlds, mask) if ok]
    live_sets = {tau: set(ws) for tau, ws in live.items()}
    for s in M.worlds:
        for tau in U.events:
            if s in live_sets[tau]:
                ids[(s, tau)] = len(ids)
    val = {}
    for tau in U.events:
        sub = U.substitution(tau)
        vecs = {f: M.truth(phi) for f, phi in sub.items()}
        idx = M.index()
        for s in live[tau]:
            base = M.valuation[s]
            true = {f for f in base.true if f not in sub}
            true.update(f for f, vec in vecs.items() if vec[idx[s]])
            val[ids[(s, tau)]] = true
    rels = {}
    for a in M.agents:
        ev = U.relations.get(a, frozenset())
        out = set()
        for s, t in M.relations[a]:
            for x, y in ev:
                i, j = ids.get((s, x)), ids.get((t, y))
                if i is not None and j is not None:
                    out.add((i, j))
        rels[a] = out
    prov = {i: (s, tau) for (s, tau), i in ids.items()}
    return KripkeStructure(M.agents, M.fluents, val, rels, prov), ids


def product_update(M: KripkeStructure, U: UpdateModel) -> KripkeStructure:
    return _product(M, U)[0]


def apply_template(state: PointedStructure, T: UpdateTemplate | UpdateInstance | None) -> list[PointedStructure]:
    if T is None:
        return []
    T = as_template(T)
    chosen = [e for e in T.model.events if e in T.designated and satisfies(state, T.model.pre[e])]
    if not chosen:
        return []
    K, ids = _product(state.structure, T.model)
    return [PointedStructure(K, ids[(state.real, e)]) for e in chosen]


# --- event models per action kind ------------------------------------------


def _rel(frame: FrameOfReference, full, partial, oblivious) -> dict:
    out = {}
    for a in frame.full:
        out[a] = frozenset(full)
    for a in frame.partial:
        out[a] = frozenset(partial)
    for a in frame.oblivious:
        out[a] = frozenset(oblivious)
    return out


def omega_world(D: Theory, a: str, rho: FrameOfReference) -> UpdateInstance:
    if rho.partial:
        raise FrameError(f"world-altering action {a} cannot have partial observers")
    pos: dict[str, list] = {f: [] for f in D.fluents}
    neg: dict[str, list] = {f: [] for f in D.fluents}
    for st in D.causes(a):
        (pos if st.literal.positive else neg)[st.literal.fluent].append(st.condition)
    sub = {
        f: Or(disj(pos[f]), And(Atom(f), Not(disj(neg[f]))))
        for f in D.fluents
    }
    rel = _rel(
        rho,
        full={(SIGMA, SIGMA), (EPSILON, EPSILON)},
        partial=(),
        oblivious={(SIGMA, EPSILON), (EPSILON, EPSILON)},
    )
    model = UpdateModel(
        (SIGMA, EPSILON),
        rel,
        {SIGMA: D.executability(a), EPSILON: TOP},
        {SIGMA: sub, EPSILON: {}},
    )
    return UpdateInstance(model, SIGMA)


def _three_event(rho: FrameOfReference, pre_sigma, pre_tau) -> UpdateModel:
    rel = _rel(
        rho,
        full={(SIGMA, SIGMA), (TAU, TAU), (EPSILON, EPSILON)},
        partial={(SIGMA, SIGMA), (TAU, TAU), (EPSILON, EPSILON), (SIGMA, TAU), (TAU, SIGMA)},
        oblivious={(SIGMA, EPSILON), (TAU, EPSILON), (EPSILON, EPSILON)},
    )
    return UpdateModel((SIGMA, TAU, EPSILON), rel, {SIGMA: pre_sigma, TAU: pre_tau, EPSILON: TOP})


def omega_sense(D: Theory, a: str, rho: FrameOfReference) -> UpdateTemplate:
    sensed = D.sensed(a)
    if len(sensed) != 1:
        raise UnsupportedShapeError(
            f"{a} senses {len(sensed)} fluents; event models are defined for exactly one"
        )
    psi, f = D.executability(a), Atom(sensed[0])
    return UpdateTemplate(_three_event(rho, And(psi, f), And(psi, Not(f))), frozenset([SIGMA, TAU]))


def omega_announce(D: Theory, a: str, rho: FrameOfReference) -> UpdateInstance:
    psi, phi = D.executability(a), D.announced(a)
    return UpdateInstance(_three_event(rho, And(psi, phi), And(psi, Not(phi))), SIGMA)


def omega(D: Theory, a: str, state: PointedStructure) -> UpdateTemplate | None:
    """Event model for `a` at the state, or None when `a` is inexecutable."""
    if not satisfies(state, D.executability(a)):
        return None
    rho = frame_of_reference(D, a, state)
    kind = D.kind(a)
    if kind == WORLD_ALTERING:
        return as_template(omega_world(D, a, rho))
    if kind == SENSING:
        return omega_sense(D, a, rho)
    return as_template(omega_announce(D, a, rho))


def cross_check(D: Theory, a: str, state: PointedStructure) -> bool:
    """Both routes agree: both empty, or one state each and bisimilar."""
    via_events = apply_template(state, omega(D, a, state))
    direct = step(D, a, state)
    if len(via_events) != len(direct):
        return False
    return all(bisimilar(x, y) for x, y in zip(via_events, direct))


# --- presentation ----------------------------------------------------------


def update_to_dot(u: UpdateTemplate | UpdateInstance, name: str = "U") -> str:
    """Events as boxes, designated events as double boxes."""
    T = as_template(u)
    m = T.model
    lines = [f'digraph "{name}" {{', "  node [shape=box];"]
    for e in m.events:
        label = f"{e}\\npre: {format_formula(simplify(m.pre[e]))}"
        sub = m.substitution(e)
        for f in sorted(sub):
            label += f"\\n{f} := {format_formula(simplify(sub[f]))}"
        extra = ", peripheries=2" if e in T.designated else ""
        lines.append(f'  "{e}" [label="{label}"{extra}];')
    for agent in sorted(m.relations):
        for x, y in sorted(m.relations[agent]):
            lines.append(f'  "{x}" -> "{y}" [label="{agent}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
