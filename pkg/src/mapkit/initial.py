"""Initial states of definite theories.

Recognised initial statements (all C without a group, i.e. over every agent):

    phi                              point satisfies phi
    C(phi)                           phi holds everywhere
    C(B[i] phi)                      phi holds everywhere, i knows it
    C(B[i] phi | B[i] !phi)          i knows whether phi
    C(!B[i] phi & !B[i] !phi)        i does not know whether phi

with phi modality-free.  Generation works on the set of all
interpretations: keep those satisfying the global formulas, partition them
per agent by the known-whether formulas, then prune (greatest fixpoint)
worlds whose class cannot witness an ignorance statement.  The result is
the coarsest model of the statements; under the closed-world completion it
is the unique one.  Every generated state is re-checked against every
statement before it is returned.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, CapacityError, DefinitenessError, InconsistencyError
from .kripke import KripkeStructure, PointedStructure, frame_class, quotient, reachable_restriction
from .lang import Initially, Theory
from .logic import (
    And,
    Atom,
    B,
    Bottom,
    C,
    Formula,
    Interpretation,
    Not,
    Or,
    Top,
    all_interpretations,
    check_capacity,
    clause_falsified_by,
    conj,
    format_formula,
    is_fluent_formula,
    world_conjunction,
)


@dataclass(frozen=True)
class InitialClassification:
    plain: tuple = ()
    common: tuple = ()
    known_value: tuple = ()  # (agent, phi, directed); directed means C(B[i] phi)
    ignorant: tuple = ()  # (agent, phi)

    def statements(self) -> list[Formula]:
        """The classified statements as belief formulas."""
        out = list(self.plain)
        out += [C(None, phi) for phi in self.common]
        for i, phi, directed in self.known_value:
            out.append(C(None, B(i, phi)) if directed else C(None, Or(B(i, phi), B(i, Not(phi)))))
        for i, phi in self.ignorant:
            out.append(C(None, And(Not(B(i, phi)), Not(B(i, Not(phi))))))
        return out


@dataclass(frozen=True)
class CanonicalInitial:
    structure: KripkeStructure
    designated: tuple[int, ...] = field(default=())

    def states(self) -> list[PointedStructure]:
        return [PointedStructure(self.structure, d) for d in self.designated]

    def bstate(self):
        from .transition import BState

        return BState(self.states())


# --- classification --------------------------------------------------------


def _negation_pair(x: Formula, y: Formula) -> Formula | None:
    """phi when {x, y} = {phi, !phi}."""
    if y == Not(x):
        return x
    if x == Not(y):
        return y
    return None


def _classify_one(phi: Formula, agents) -> tuple[str, tuple] | None:
    if is_fluent_formula(phi):
        return "plain", (phi,)
    if not isinstance(phi, C):
        return None
    if phi.group is not None and (agents is None or frozenset(agents) != phi.group):
        return None
    body = phi.arg
    if is_fluent_formula(body):
        return "common", (body,)
    if isinstance(body, B) and is_fluent_formula(body.arg):
        return "known_value", (body.agent, body.arg, True)
    if isinstance(body, Or) and isinstance(body.left, B) and isinstance(body.right, B):
        l, r = body.left, body.right
        base = _negation_pair(l.arg, r.arg)
        if l.agent == r.agent and base is not None and is_fluent_formula(base):
            return "known_value", (l.agent, base, False)
    if isinstance(body, And) and isinstance(body.left, Not) and isinstance(body.right, Not):
        l, r = body.left.arg, body.right.arg
        if isinstance(l, B) and isinstance(r, B) and l.agent == r.agent:
            base = _negation_pair(l.arg, r.arg)
            if base is not None and is_fluent_formula(base):
                return "ignorant", (l.agent, base)
    return None


def classify(initial: Iterable[Initially | Formula], agents: Iterable[str] | None = None) -> InitialClassification:
    buckets = {"plain": [], "common": [], "known_value": [], "ignorant": []}
    for st in initial:
        phi = st.formula if isinstance(st, Initially) else st
        hit = _classify_one(phi, agents)
        if hit is None:
            where = f" (line {st.line})" if isinstance(st, Initially) and st.line else ""
            raise DefinitenessError(
                f"initially {format_formula(phi)}{where} is not of a form usable for generating initial states"
            )
        kind, payload = hit
        entry = payload[0] if kind in ("plain", "common") else payload
        if entry not in buckets[kind]:
            buckets[kind].append(entry)
    return InitialClassification(*(tuple(buckets[k]) for k in ("plain", "common", "known_value", "ignorant")))


# --- the fixpoint analysis -------------------------------------------------


def _vec(phi: Formula, table: np.ndarray, col: dict) -> np.ndarray:
    if isinstance(phi, Atom):
        return table[:, col[phi.name]]
    if isinstance(phi, Top):
        return np.ones(len(table), dtype=bool)
    if isinstance(phi, Bottom):
        return np.zeros(len(table), dtype=bool)
    if isinstance(phi, Not):
        return ~_vec(phi.arg, table, col)
    if isinstance(phi, And):
        return _vec(phi.left, table, col) & _vec(phi.right, table, col)
    if isinstance(phi, Or):
        return _vec(phi.left, table, col) | _vec(phi.right, table, col)
    raise ArgumentError(f"not a fluent formula: {format_formula(phi)}")


@dataclass
class _Analysis:
    interps: list[Interpretation]
    valid: np.ndarray  # worlds satisfying the global formulas
    survivors: list[int]  # after ignorance pruning and connectivity
    keys: dict  # agent -> per-interpretation class key
    uncertain: dict  # agent -> set of survivors in classes of size >= 2
    pointed: np.ndarray  # worlds satisfying the plain formulas


def _analyze(cls: InitialClassification, fluents, agents) -> _Analysis:
    check_capacity(len(fluents))
    interps = list(all_interpretations(fluents))
    col = {f: j for j, f in enumerate(fluents)}
    table = np.array([i.values() for i in interps], dtype=bool).reshape(len(interps), len(fluents))
    valid = np.ones(len(interps), dtype=bool)
    for phi in cls.common:
        valid &= _vec(phi, table, col)
    for _, phi, directed in cls.known_value:
        if directed:
            valid &= _vec(phi, table, col)
    keys = {}
    for a in agents:
        cols = [_vec(phi, table, col) for i, phi, _ in cls.known_value if i == a]
        keys[a] = [tuple(bool(c[w]) for c in cols) for w in range(len(interps))]
    ignorance = {a: [_vec(phi, table, col) for i, phi in cls.ignorant if i == a] for a in agents}

    alive = set(np.flatnonzero(valid).tolist())
    changed = True
    while changed:
        changed = False
        for a in agents:
            if not ignorance[a]:
                continue
            classes: dict = {}
            for w in alive:
                classes.setdefault(keys[a][w], []).append(w)
            for members in classes.values():
                for vec in ignorance[a]:
                    vals = {bool(vec[w]) for w in members}
                    if len(vals) < 2:
                        alive.difference_update(members)
                        changed = True
                        break

    pointed = np.ones(len(interps), dtype=bool)
    for phi in cls.plain:
        pointed &= _vec(phi, table, col)

    # connected components under the union of all class relations
    parent = {w: w for w in alive}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in agents:
        first: dict = {}
        for w in sorted(alive):
            k = keys[a][w]
            if k in first:
                parent[find(w)] = find(first[k])
            else:
                first[k] = w
    good_roots = {find(w) for w in alive if pointed[w]}
    survivors = sorted(w for w in alive if find(w) in good_roots)

    uncertain = {}
    for a in agents:
        sizes: dict = {}
        for w in survivors:
            sizes[keys[a][w]] = sizes.get(keys[a][w], 0) + 1
        uncertain[a] = {w for w in survivors if sizes[keys[a][w]] >= 2}
    return _Analysis(interps, valid, survivors, keys, uncertain, pointed)


def known_formulas(cls: InitialClassification, agent: str, fluents, agents) -> list[Formula]:
    """Complete clauses the statements force `agent` to know the value of."""
    an = _analyze(cls, tuple(fluents), tuple(agents))
    return [clause_falsified_by(i) for w, i in enumerate(an.interps) if w not in an.uncertain[agent]]


def ignorance_clauses(cls: InitialClassification, agent: str, fluents, agents) -> list[Formula]:
    """Complete clauses whose value `agent` may be unsure of (closed-world additions)."""
    an = _analyze(cls, tuple(fluents), tuple(agents))
    return [clause_falsified_by(an.interps[w]) for w in sorted(an.uncertain[agent])]


def complete_cwa(cls: InitialClassification, fluents, agents) -> InitialClassification:
    """Add an ignorance statement for every clause not forced to be known."""
    an = _analyze(cls, tuple(fluents), tuple(agents))
    extra = list(cls.ignorant)
    for a in agents:
        for w in sorted(an.uncertain[a]):
            entry = (a, clause_falsified_by(an.interps[w]))
            if entry not in extra:
                extra.append(entry)
    return InitialClassification(cls.plain, cls.common, cls.known_value, tuple(extra))


def _first_violation(state: PointedStructure, statements: list[Formula]) -> Formula | None:
    from .kripke import satisfies

    for phi in statements:
        if not satisfies(state, phi):
            return phi
    return None


def generate_initial(theory: Theory, cwa: bool = True) -> CanonicalInitial:
    agents, fluents = theory.agents, theory.fluents
    cls = classify(theory.initial, agents)
    if cwa:
        cls = complete_cwa(cls, fluents, agents)
    an = _analyze(cls, fluents, agents)
    statements = cls.statements()
    if not an.valid.any():
        globals_ = [C(None, phi) for phi in cls.common]
        globals_ += [C(None, B(i, phi)) for i, phi, directed in cls.known_value if directed]
        raise InconsistencyError(
            "no interpretation satisfies the global statements: " + "; ".join(map(format_formula, globals_))
        )
    if not an.survivors:
        if not an.pointed[an.valid].any():
            raise InconsistencyError(
                "no world satisfies both the common statements and "
                + format_formula(conj(cls.plain))
            )
        # report the first ignorance statement the pruning could not keep
        for i, phi in cls.ignorant:
            bad = C(None, And(Not(B(i, phi)), Not(B(i, Not(phi)))))
            raise InconsistencyError(f"initial statements have no model; cannot satisfy {format_formula(bad)}")
        raise InconsistencyError("initial statements have no model")
    ids = {w: k for k, w in enumerate(an.survivors)}
    valuation = {ids[w]: an.interps[w] for w in an.survivors}
    rels = {}
    for a in agents:
        classes: dict = {}
        for w in an.survivors:
            classes.setdefault(an.keys[a][w], []).append(ids[w])
        rels[a] = {(u, v) for members in classes.values() for u in members for v in members}
    M = KripkeStructure(agents, fluents, valuation, rels)
    designated = tuple(ids[w] for w in an.survivors if an.pointed[w])
    if not designated:
        raise InconsistencyError("no world satisfies the plain initial statements")
    if "S5" not in frame_class(M):
        raise InconsistencyError("generated structure is not S5")
    for d in designated:
        bad = _first_violation(PointedStructure(M, d), statements)
        if bad is not None:
            raise InconsistencyError(f"initial statements have no model; cannot satisfy {format_formula(bad)}")
    return CanonicalInitial(M, designated)


def reduce_state(state: PointedStructure) -> PointedStructure:
    return quotient(reachable_restriction(state))


def world_formula(state: PointedStructure, u: int) -> Formula:
    M = state.structure
    if u not in M.valuation:
        raise ArgumentError(f"unknown world {u}")
    return world_conjunction(M.valuation[u])


# --- brute-force oracle ----------------------------------------------------


def _set_partitions(items: list):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[head]] + part
        for k in range(len(part)):
            yield part[:k] + [[head] + part[k]] + part[k + 1:]


def _candidate_structures(agents, fluents, max_worlds):
    interps = list(all_interpretations(fluents))
    for size in range(1, max_worlds + 1):
        for chosen in itertools.combinations(interps, size):
            val = dict(enumerate(chosen))
            worlds = list(val)
            parts = [list(_set_partitions(worlds)) for _ in agents]
            for combo in itertools.product(*parts):
                rels = {
                    a: {(u, v) for block in p for u in block for v in block}
                    for a, p in zip(agents, combo)
                }
                yield KripkeStructure(agents, fluents, val, rels)


def _explicit_models(theory: Theory, max_worlds: int) -> list[PointedStructure]:
    agents, fluents = theory.agents, theory.fluents
    if len(fluents) > 2 or len(agents) > 2 or max_worlds > 4:
        raise CapacityError("brute-force enumeration is limited to 2 fluents, 2 agents and 4 worlds")
    explicit = classify(theory.initial, agents).statements()
    models = []
    for M in _candidate_structures(agents, fluents, max_worlds):
        ok = np.ones(len(M.worlds), dtype=bool)
        for phi in explicit:
            ok &= M.truth(phi)
        models.extend(PointedStructure(M, w) for w, good in zip(M.worlds, ok) if good)
    return models


def _unquotable(models, agent: str, fluents) -> list[Formula]:
    out = []
    for c in (clause_falsified_by(i) for i in all_interpretations(fluents)):
        knows = C(None, B(agent, c))
        whether = C(None, Or(B(agent, c), B(agent, Not(c))))
        if any(not s.structure.holds_at(s.real, knows) and not s.structure.holds_at(s.real, whether) for s in models):
            out.append(c)
    return out


def brute_force_ignorance(theory: Theory, agent: str, max_worlds: int = 4) -> list[Formula]:
    """Complete clauses some small model leaves `agent` unsure of, by model checking."""
    return _unquotable(_explicit_models(theory, max_worlds), agent, theory.fluents)


def brute_force_initials(theory: Theory, max_worlds: int = 4) -> list[PointedStructure]:
    """Every small pointed S5 model of the closed-world completion.

    Worlds carry distinct interpretations; relations range over all
    equivalence relations.  Independent of the generator: the completion is
    computed by model checking the explicit statements on the same
    enumeration.
    """
    models = _explicit_models(theory, max_worlds)
    extra = [
        C(None, And(Not(B(a, c)), Not(B(a, Not(c)))))
        for a in theory.agents
        for c in _unquotable(models, a, theory.fluents)
    ]
    return [s for s in models if all(s.structure.holds_at(s.real, phi) for phi in extra)]
