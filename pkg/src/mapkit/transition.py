"""Direct transition semantics: frames of reference, the three step kinds,
b-states, plan execution and entailment.

A single step maps a pointed structure to a tuple of results: empty when
the action is not executable at the point, otherwise one state.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import ArgumentError, EffectConsistencyError, FrameError, ObservabilityError
from .kripke import (
    KripkeStructure,
    PointedStructure,
    contract,
    edge_add,
    edge_subtract,
    fresh_renaming,
    replica,
    restrict,
    satisfies,
    union_k,
    union_lambda,
    world_subtract,
)
from .lang import ANNOUNCEMENT, SENSING, WORLD_ALTERING, Query, Theory
from .logic import Atom, B, C, Not, Or, eval_fluent, group

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameOfReference:
    full: frozenset
    partial: frozenset
    oblivious: frozenset

    def __str__(self):
        def show(s):
            return "{" + ", ".join(sorted(s)) + "}" if s else "{}"

        return f"({show(self.full)}, {show(self.partial)}, {show(self.oblivious)})"


class BState:
    """A non-empty set of states, or the failure value."""

    __slots__ = ("failed", "states")

    def __init__(self, states: Iterable[PointedStructure] = (), failed: bool = False):
        uniq: list[PointedStructure] = []
        seen = set()
        for s in states:
            if s not in seen:
                seen.add(s)
                uniq.append(s)
        if failed and uniq:
            raise ArgumentError("a failed b-state carries no states")
        if not failed and not uniq:
            raise ArgumentError("a b-state must contain at least one state")
        self.failed = failed
        self.states: tuple[PointedStructure, ...] = tuple(uniq)

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        if not isinstance(other, BState):
            return NotImplemented
        return self.failed == other.failed and set(self.states) == set(other.states)

    def __hash__(self):
        return hash((self.failed, frozenset(self.states)))

    def __repr__(self):
        return "BState(Failed)" if self.failed else f"BState({len(self.states)} states)"


FAILED = BState(failed=True)


# --- frames and effects ----------------------------------------------------


def frame_of_reference(D: Theory, a: str, state: PointedStructure) -> FrameOfReference:
    full = frozenset(s.agent for s in D.observers(a) if satisfies(state, s.condition))
    partial = frozenset(s.agent for s in D.aware(a) if satisfies(state, s.condition))
    clash = full & partial
    if clash:
        raise ObservabilityError(
            f"agent {sorted(clash)[0]} is both fully and partially observant of {a}"
        )
    oblivious = frozenset(state.structure.agents) - full - partial
    return FrameOfReference(full, partial, oblivious)


def effects(D: Theory, a: str, M: KripkeStructure) -> dict[int, frozenset]:
    """Literals each world would get from the action's causes statements."""
    out = {w: set() for w in M.worlds}
    for st in D.causes(a):
        fires = M.truth(st.condition)
        for w, on in zip(M.worlds, fires):
            if on:
                out[w].add(st.literal)
    for w, lits in out.items():
        for lit in lits:
            if lit.negate() in lits:
                raise EffectConsistencyError(
                    f"{a} would make {lit.fluent} both true and false in world s{w}"
                )
    return {w: frozenset(l) for w, l in out.items()}


def executable_worlds(D: Theory, a: str, M: KripkeStructure) -> list[int]:
    mask = M.truth(D.executability(a))
    return [w for w, ok in zip(M.worlds, mask) if ok]


def res_structure(D: Theory, a: str, state: PointedStructure, frame: FrameOfReference | None = None):
    """Updated copies of the executable worlds, plus the renaming u -> r(a,u)."""
    M = state.structure
    if frame is None:
        frame = frame_of_reference(D, a, state)
    live = executable_worlds(D, a, M)
    eff = effects(D, a, M)
    r = fresh_renaming(M, live)
    val = {r[u]: M.valuation[u].apply(eff[u]) for u in live}
    rels = {}
    for i in M.agents:
        if i in frame.full:
            rels[i] = {(r[u], r[v]) for u, v in M.relations[i] if u in r and v in r}
    prov = {r[u]: (a, u) for u in live}
    return KripkeStructure(M.agents, M.fluents, val, rels, prov), r


# --- the three step kinds --------------------------------------------------


def step_world(D: Theory, a: str, state: PointedStructure) -> tuple[PointedStructure, ...]:
    if not satisfies(state, D.executability(a)):
        return ()
    frame = frame_of_reference(D, a, state)
    if frame.partial:
        raise FrameError(f"world-altering action {a} cannot have partial observers")
    M = state.structure
    res, r = res_structure(D, a, state, frame)
    merged = union_k(M, res)
    link = [
        (r[u], i, v)
        for i in sorted(frame.oblivious)
        for u, v in M.relations[i]
        if u in r
    ]
    return (PointedStructure(edge_add(merged, link), r[state.real]),)


def _observed_update(
    D: Theory, a: str, state: PointedStructure, differs
) -> tuple[PointedStructure, ...]:
    """Shared body of sensing and announcement steps.

    `differs(u_interp, v_interp)` decides which fully-observant links of the
    replica are cut.
    """
    M = state.structure
    frame = frame_of_reference(D, a, state)
    aware = frame.full | frame.partial
    c = fresh_renaming(M)
    rep = replica(state, c, {c[u]: (a, u) for u in M.worlds})
    live = set(executable_worlds(D, a, M))
    rem_states = {c[u] for u in M.worlds if u not in live}
    rem_links = [
        (c[u], i, c[v])
        for i in sorted(frame.full)
        for u, v in M.relations[i]
        if differs(M.valuation[u], M.valuation[v])
    ]
    pruned = PointedStructure(world_subtract(rep.structure, rem_states), rep.real)
    kept = restrict(pruned, aware)
    cut = PointedStructure(edge_subtract(kept.structure, rem_links), kept.real)
    back = {c[u]: u for u in M.worlds if c[u] in cut.structure.valuation}
    return (union_lambda(state, cut, back, aware),)


def step_sense(D: Theory, a: str, state: PointedStructure) -> tuple[PointedStructure, ...]:
    if not satisfies(state, D.executability(a)):
        return ()
    sensed = D.sensed(a)
    return _observed_update(D, a, state, lambda x, y: any(x[f] != y[f] for f in sensed))


def explain_inexecutable(D: Theory, a: str, state: PointedStructure) -> str | None:
    """Why `a` cannot run at the point, or None when it can."""
    if not satisfies(state, D.executability(a)):
        return f"executability condition of {a} is false at s{state.real}"
    if D.kind(a) == ANNOUNCEMENT:
        phi = D.announced(a)
        if not eval_fluent(state.structure.valuation[state.real], phi):
            return f"untruthful announcement: {a} announces a formula that is false at s{state.real}"
    return None


def step_announce(D: Theory, a: str, state: PointedStructure) -> tuple[PointedStructure, ...]:
    reason = explain_inexecutable(D, a, state)
    if reason is not None:
        log.debug(reason)
        return ()
    phi = D.announced(a)
    return _observed_update(D, a, state, lambda x, y: eval_fluent(x, phi) != eval_fluent(y, phi))


def step(D: Theory, a: str, state: PointedStructure) -> tuple[PointedStructure, ...]:
    kind = D.kind(a)
    if kind == WORLD_ALTERING:
        return step_world(D, a, state)
    if kind == SENSING:
        return step_sense(D, a, state)
    return step_announce(D, a, state)


def sensed_set(D: Theory, a: str) -> frozenset:
    if D.kind(a) != SENSING:
        raise ArgumentError(f"{a} is not a sensing action")
    return frozenset(D.sensed(a))


# --- consistency preservation ----------------------------------------------


def consistency_preserving(D: Theory, a: str, state: PointedStructure) -> bool:
    """Whether (M,s) keeps aware agents consistent under sensing/announcing a."""
    frame = frame_of_reference(D, a, state)
    M = state.structure
    aware = sorted(frame.full | frame.partial)
    kind = D.kind(a)
    if kind == SENSING:
        bad = [Or(B(i, f), B(i, Not(f))) for i in aware for f in map(Atom, D.sensed(a))]
    elif kind == ANNOUNCEMENT:
        phi = D.announced(a)
        bad = [B(i, Not(phi)) for i in aware]
    else:
        raise ArgumentError(f"{a} is neither a sensing nor an announcement action")
    return not any(M.truth(f).any() for f in bad)


# --- b-states, plans, entailment -------------------------------------------


def step_bstate(D: Theory, a: str, bs: BState, compress: bool = False) -> BState:
    if bs.failed:
        return FAILED
    out: list[PointedStructure] = []
    for s in bs:
        res = step(D, a, s)
        if not res:
            return FAILED
        if compress:
            res = tuple(contract(r) for r in res)
        out.extend(res)
    return BState(out)


def run_plan(D: Theory, plan: Sequence[str], bs: BState, compress: bool = False) -> BState:
    for a in plan:
        bs = step_bstate(D, a, bs, compress)
        if bs.failed:
            break
    return bs


def trace_plan(D: Theory, plan: Sequence[str], bs: BState, compress: bool = False):
    """Yield (index, action, b-state) after each step; stops after a failure."""
    for k, a in enumerate(plan):
        nxt = step_bstate(D, a, bs, compress)
        if nxt.failed:
            culprit = next((j for j, s in enumerate(bs) if not step(D, a, s)), None)
            yield k, a, nxt, culprit
            return
        bs = nxt
        yield k, a, bs, None


def entails(theory: Theory, q: Query, initial: BState, compress: bool = False) -> bool:
    final = run_plan(theory, q.plan, initial, compress)
    return not final.failed and all(satisfies(s, q.goal) for s in final)


def common(agents: Iterable[str], phi):
    """C over an explicit agent set (possibly empty)."""
    return C(group(agents), phi)
