"""Finite Kripke structures, satisfaction, structure operators, bisimulation.

World ids are plain non-negative ints.  A structure computes formula truth
for all of its worlds at once (a boolean vector indexed by the sorted world
list) and memoises the vectors, so repeated queries on one state are cheap.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ArgumentError, CapacityError, CompatibilityError, SignatureError
from .logic import (
    And,
    Atom,
    B,
    Bottom,
    C,
    E,
    Formula,
    Interpretation,
    Not,
    Or,
    Top,
    format_formula,
)

Edge = tuple[int, str, int]


class KripkeStructure:
    """Worlds, a valuation and one accessibility relation per agent."""

    def __init__(
        self,
        agents: Iterable[str],
        fluents: Iterable[str],
        valuation: Mapping[int, Interpretation | Iterable[str]],
        relations: Mapping[str, Iterable[tuple[int, int]]] | None = None,
        provenance: Mapping[int, tuple] | None = None,
    ):
        self.agents = tuple(agents)
        self.fluents = tuple(fluents)
        val = {}
        for w, v in valuation.items():
            if not isinstance(w, (int, np.integer)) or w < 0:
                raise ArgumentError(f"world ids must be non-negative ints, got {w!r}")
            if isinstance(v, Interpretation):
                if v.fluents != self.fluents:
                    raise SignatureError(f"world {w}: interpretation over a different fluent list")
            else:
                v = Interpretation(self.fluents, v)
            val[int(w)] = v
        self.valuation: dict[int, Interpretation] = val
        self.worlds: tuple[int, ...] = tuple(sorted(val))
        rels: dict[str, frozenset] = {a: frozenset() for a in self.agents}
        for a, pairs in (relations or {}).items():
            if a not in rels:
                raise SignatureError(f"unknown agent {a!r}")
            pairs = frozenset((int(u), int(v)) for u, v in pairs)
            for u, v in pairs:
                if u not in val or v not in val:
                    raise ArgumentError(f"edge ({u},{a},{v}) has an endpoint outside the structure")
            rels[a] = pairs
        self.relations: dict[str, frozenset] = rels
        self.provenance: dict[int, tuple] = dict(provenance or {})
        self._key = None
        self._index = None
        self._vals = None
        self._csr: dict = {}
        self._truth: dict = {}

    # -- identity ------------------------------------------------------------

    def key(self):
        if self._key is None:
            self._key = (
                self.agents,
                self.fluents,
                tuple((w, self.valuation[w].true) for w in self.worlds),
                tuple(tuple(sorted(self.relations[a])) for a in self.agents),
            )
        return self._key

    def __eq__(self, other):
        if not isinstance(other, KripkeStructure):
            return NotImplemented
        return self is other or self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        n_edges = sum(len(r) for r in self.relations.values())
        return f"KripkeStructure({len(self.worlds)} worlds, {n_edges} edges)"

    # -- accessors -----------------------------------------------------------

    def next_id(self) -> int:
        return self.worlds[-1] + 1 if self.worlds else 0

    def edges(self) -> list[Edge]:
        return sorted((u, a, v) for a in self.agents for u, v in self.relations[a])

    def successors(self, agent: str, u: int) -> list[int]:
        return sorted(v for x, v in self.relations[agent] if x == u)

    def index(self) -> dict[int, int]:
        if self._index is None:
            self._index = {w: k for k, w in enumerate(self.worlds)}
        return self._index

    def _value_matrix(self):
        if self._vals is None:
            m = np.zeros((len(self.worlds), len(self.fluents)), dtype=bool)
            col = {f: j for j, f in enumerate(self.fluents)}
            for k, w in enumerate(self.worlds):
                for f in self.valuation[w].true:
                    m[k, col[f]] = True
            m.flags.writeable = False
            self._vals = (m, col)
        return self._vals

    def csr(self, agents: Iterable[str], reverse: bool = False):
        """CSR adjacency of the union of the given agents' relations."""
        group = frozenset(agents)
        key = (group, reverse)
        hit = self._csr.get(key)
        if hit is not None:
            return hit
        idx = self.index()
        n = len(self.worlds)
        pairs = set()
        for a in group:
            if a not in self.relations:
                raise SignatureError(f"unknown agent {a!r}")
            for u, v in self.relations[a]:
                pairs.add((idx[v], idx[u]) if reverse else (idx[u], idx[v]))
        order = sorted(pairs)
        indptr = np.zeros(n + 1, dtype=np.int32)
        for u, _ in order:
            indptr[u + 1] += 1
        np.cumsum(indptr, out=indptr)
        indices = np.array([v for _, v in order], dtype=np.int32)
        self._csr[key] = (indptr, indices)
        return indptr, indices

    def _group(self, g) -> tuple[str, ...]:
        if g is None:
            return self.agents
        for a in g:
            if a not in self.relations:
                raise SignatureError(f"unknown agent {a!r}")
        return tuple(a for a in self.agents if a in g)

    def truth(self, phi: Formula) -> np.ndarray:
        """Boolean vector: phi's truth value at each world (sorted order)."""
        hit = self._truth.get(phi)
        if hit is not None:
            return hit
        n = len(self.worlds)
        if isinstance(phi, Atom):
            m, col = self._value_matrix()
            try:
                out = m[:, col[phi.name]].copy()
            except KeyError:
                raise SignatureError(f"unknown fluent {phi.name!r}") from None
        elif isinstance(phi, Top):
            out = np.ones(n, dtype=bool)
        elif isinstance(phi, Bottom):
            out = np.zeros(n, dtype=bool)
        elif isinstance(phi, Not):
            out = ~self.truth(phi.arg)
        elif isinstance(phi, And):
            out = self.truth(phi.left) & self.truth(phi.right)
        elif isinstance(phi, Or):
            out = self.truth(phi.left) | self.truth(phi.right)
        elif isinstance(phi, B):
            if phi.agent not in self.relations:
                raise SignatureError(f"unknown agent {phi.agent!r}")
            inner = self.truth(phi.arg).view(np.uint8)
            out = kernels.box(*self.csr([phi.agent]), inner).view(bool)
        elif isinstance(phi, E):
            inner = self.truth(phi.arg).view(np.uint8)
            out = np.ones(n, dtype=bool)
            for a in self._group(phi.group):
                out &= kernels.box(*self.csr([a]), inner).view(bool)
        elif isinstance(phi, C):
            bad = (~self.truth(phi.arg)).view(np.uint8)
            rev = self.csr(self._group(phi.group), reverse=True)
            out = ~kernels.reach(*rev, bad).view(bool)
        else:
            raise ArgumentError(f"not a formula: {phi!r}")
        out.flags.writeable = False
        self._truth[phi] = out
        return out

    def holds_at(self, world: int, phi: Formula) -> bool:
        try:
            k = self.index()[world]
        except KeyError:
            raise ArgumentError(f"unknown world {world}") from None
        return bool(self.truth(phi)[k])


@dataclass(frozen=True)
class PointedStructure:
    structure: KripkeStructure
    real: int

    def __post_init__(self):
        if self.real not in self.structure.valuation:
            raise ArgumentError(f"designated world {self.real} is not in the structure")

    @property
    def worlds(self):
        return self.structure.worlds

    def __repr__(self):
        return f"PointedStructure({len(self.structure.worlds)} worlds, real={self.real})"


# --- satisfaction ----------------------------------------------------------


def satisfies(state: PointedStructure, phi: Formula) -> bool:
    return state.structure.holds_at(state.real, phi)


def holds_everywhere(M: KripkeStructure, phi: Formula) -> bool:
    return bool(M.truth(phi).all())


def frame_class(M: KripkeStructure) -> set[str]:
    """Frame properties shared by every agent's relation."""
    props = {"T", "4", "5", "D"}
    for a in M.agents:
        succ: dict[int, set] = {w: set() for w in M.worlds}
        for u, v in M.relations[a]:
            succ[u].add(v)
        if any(w not in succ[w] for w in M.worlds):
            props.discard("T")
        if any(not succ[w] for w in M.worlds):
            props.discard("D")
        if any(not succ[v] <= succ[u] for u in M.worlds for v in succ[u]):
            props.discard("4")
        if any(not succ[u] <= succ[v] for u in M.worlds for v in succ[u]):
            props.discard("5")
    if {"T", "4", "5"} <= props:
        props.add("S5")
    return props


# --- operators -------------------------------------------------------------


def _rebuild(M: KripkeStructure, valuation=None, relations=None, provenance=None) -> KripkeStructure:
    return KripkeStructure(
        M.agents,
        M.fluents,
        M.valuation if valuation is None else valuation,
        M.relations if relations is None else relations,
        M.provenance if provenance is None else provenance,
    )


def world_subtract(M: KripkeStructure, U: Iterable[int]) -> KripkeStructure:
    U = set(U)
    unknown = U.difference(M.valuation)
    if unknown:
        raise ArgumentError(f"unknown world {min(unknown)}")
    if not U:
        return M
    val = {w: i for w, i in M.valuation.items() if w not in U}
    rels = {a: {(u, v) for u, v in r if u not in U and v not in U} for a, r in M.relations.items()}
    prov = {w: p for w, p in M.provenance.items() if w not in U}
    return _rebuild(M, val, rels, prov)


def _check_agent(M: KripkeStructure, a: str):
    if a not in M.relations:
        raise SignatureError(f"unknown agent {a!r}")


def edge_subtract(M: KripkeStructure, X: Iterable[Edge]) -> KripkeStructure:
    drop: dict[str, set] = {}
    for u, a, v in X:
        _check_agent(M, a)
        drop.setdefault(a, set()).add((u, v))
    if not drop:
        return M
    rels = {a: r - drop.get(a, set()) for a, r in M.relations.items()}
    return _rebuild(M, relations=rels)


def edge_add(M: KripkeStructure, X: Iterable[Edge]) -> KripkeStructure:
    add: dict[str, set] = {}
    for u, a, v in X:
        _check_agent(M, a)
        if u not in M.valuation or v not in M.valuation:
            raise ArgumentError(f"edge ({u},{a},{v}) has an endpoint outside the structure")
        add.setdefault(a, set()).add((u, v))
    if not add:
        return M
    rels = {a: r | add.get(a, set()) for a, r in M.relations.items()}
    return _rebuild(M, relations=rels)


def restrict(state: PointedStructure, alpha: Iterable[str]) -> PointedStructure:
    M = state.structure
    alpha = set(alpha)
    for a in alpha:
        _check_agent(M, a)
    rels = {a: (r if a in alpha else frozenset()) for a, r in M.relations.items()}
    return PointedStructure(_rebuild(M, relations=rels), state.real)


def fresh_renaming(M: KripkeStructure, worlds: Iterable[int] | None = None, start: int | None = None) -> dict[int, int]:
    """Map worlds (default: all of M's) onto the next unused block of ids."""
    base = M.next_id() if start is None else start
    src = M.worlds if worlds is None else sorted(worlds)
    return {w: base + k for k, w in enumerate(src)}


def replica(state: PointedStructure, fresh: Mapping[int, int], provenance: Mapping[int, tuple] | None = None) -> PointedStructure:
    M = state.structure
    if set(fresh) != set(M.worlds):
        raise ArgumentError("renaming must cover exactly the worlds of the structure")
    targets = list(fresh.values())
    if len(set(targets)) != len(targets):
        raise ArgumentError("renaming is not injective")
    clash = set(targets) & set(M.worlds)
    if clash:
        raise ArgumentError(f"renaming reuses world id {min(clash)}")
    val = {fresh[w]: i for w, i in M.valuation.items()}
    rels = {a: {(fresh[u], fresh[v]) for u, v in r} for a, r in M.relations.items()}
    prov = dict(provenance) if provenance is not None else {fresh[w]: ("copy", w) for w in M.worlds}
    return PointedStructure(KripkeStructure(M.agents, M.fluents, val, rels, prov), fresh[state.real])


def _same_signature(M1: KripkeStructure, M2: KripkeStructure):
    if M1.agents != M2.agents or M1.fluents != M2.fluents:
        raise CompatibilityError("structures are over different signatures")


def union_k(M1: KripkeStructure, M2: KripkeStructure) -> KripkeStructure:
    _same_signature(M1, M2)
    val = dict(M2.valuation)
    for w, i in M1.valuation.items():
        if w in val and val[w] != i:
            raise CompatibilityError(f"world {w} has different valuations in the two structures")
        val[w] = i
    rels = {a: M1.relations[a] | M2.relations[a] for a in M1.agents}
    prov = {**M2.provenance, **M1.provenance}
    return KripkeStructure(M1.agents, M1.fluents, val, rels, prov)


def union_lambda(
    p1: PointedStructure,
    p2: PointedStructure,
    lam: Mapping[int, int],
    alpha: Iterable[str],
) -> PointedStructure:
    """Disjoint union; agents outside alpha get M2-to-M1 edges through lam.

    For i not in alpha, (u, v) is added for u in M2 and v in M1 whenever
    (lam(u), v) is an edge of M1 for i.  The point is M2's point.
    """
    M1, M2 = p1.structure, p2.structure
    _same_signature(M1, M2)
    if set(M1.worlds) & set(M2.worlds):
        raise ArgumentError("structures are not world-disjoint")
    if set(lam) != set(M2.worlds):
        raise ArgumentError("lambda must be defined on exactly the worlds of the second structure")
    targets = list(lam.values())
    if len(set(targets)) != len(targets) or not set(targets) <= set(M1.worlds):
        raise ArgumentError("lambda must map injectively into the first structure")
    alpha = set(alpha)
    rels = {}
    for a in M1.agents:
        r = set(M1.relations[a]) | set(M2.relations[a])
        if a not in alpha:
            succ: dict[int, list] = {}
            for u, v in M1.relations[a]:
                succ.setdefault(u, []).append(v)
            for u in M2.worlds:
                r.update((u, v) for v in succ.get(lam[u], ()))
        rels[a] = r
    val = {**M1.valuation, **M2.valuation}
    prov = {**M1.provenance, **M2.provenance}
    return PointedStructure(KripkeStructure(M1.agents, M1.fluents, val, rels, prov), p2.real)


# --- bisimulation and quotients ---------------------------------------------


def _labelled_csr(structures: list[KripkeStructure]):
    """CSR over the disjoint union of structures, edges labelled by agent index."""
    offsets = []
    n = 0
    for M in structures:
        offsets.append(n)
        n += len(M.worlds)
    agents = structures[0].agents
    triples = []
    for M, off in zip(structures, offsets):
        idx = M.index()
        for li, a in enumerate(agents):
            for u, v in M.relations[a]:
                triples.append((idx[u] + off, li, idx[v] + off))
    triples.sort()
    indptr = np.zeros(n + 1, dtype=np.int32)
    for u, _, _ in triples:
        indptr[u + 1] += 1
    np.cumsum(indptr, out=indptr)
    indices = np.array([t[2] for t in triples], dtype=np.int32)
    labels = np.array([t[1] for t in triples], dtype=np.int32)
    return offsets, indptr, indices, labels


def _refine(structures: list[KripkeStructure]) -> tuple[list[int], np.ndarray]:
    interps: dict = {}
    init = []
    for M in structures:
        for w in M.worlds:
            init.append(interps.setdefault(M.valuation[w], len(interps)))
    offsets, indptr, indices, labels = _labelled_csr(structures)
    blocks = kernels.refine(np.array(init, dtype=np.int32), indptr, indices, labels)
    return offsets, blocks


def bisimulation_classes(M: KripkeStructure) -> dict[int, int]:
    """Block id of every world under the largest bisimulation on M."""
    _, blocks = _refine([M])
    return {w: int(blocks[k]) for k, w in enumerate(M.worlds)}


def bisimilar(a: PointedStructure, b: PointedStructure) -> bool:
    Ma, Mb = a.structure, b.structure
    if Ma.agents != Mb.agents or Ma.fluents != Mb.fluents:
        raise SignatureError("states are over different signatures")
    offsets, blocks = _refine([Ma, Mb])
    return blocks[Ma.index()[a.real]] == blocks[offsets[1] + Mb.index()[b.real]]


def reachable_worlds(state: PointedStructure) -> set[int]:
    M = state.structure
    seeds = np.zeros(len(M.worlds), dtype=np.uint8)
    seeds[M.index()[state.real]] = 1
    mask = kernels.reach(*M.csr(M.agents), seeds)
    return {w for w, m in zip(M.worlds, mask) if m}


def reachable_restriction(state: PointedStructure) -> PointedStructure:
    keep = reachable_worlds(state)
    M = state.structure
    if len(keep) == len(M.worlds):
        return state
    return PointedStructure(world_subtract(M, set(M.worlds) - keep), state.real)


def _collapse(state: PointedStructure, cls: Mapping[int, object]) -> PointedStructure:
    """Merge worlds with equal class labels; each class is named by its least member."""
    M = state.structure
    rep: dict = {}
    for w in M.worlds:
        rep.setdefault(cls[w], w)
    name = {w: rep[cls[w]] for w in M.worlds}
    val = {r: M.valuation[r] for r in rep.values()}
    rels = {a: {(name[u], name[v]) for u, v in r} for a, r in M.relations.items()}
    prov = {r: M.provenance[r] for r in rep.values() if r in M.provenance}
    return PointedStructure(KripkeStructure(M.agents, M.fluents, val, rels, prov), name[state.real])


def quotient(state: PointedStructure) -> PointedStructure:
    """Merge worlds carrying identical interpretations."""
    M = state.structure
    return _collapse(state, {w: M.valuation[w] for w in M.worlds})


def contract(state: PointedStructure) -> PointedStructure:
    """Reachable part, then the bisimulation quotient."""
    state = reachable_restriction(state)
    return _collapse(state, bisimulation_classes(state.structure))


def canonical_key(state: PointedStructure, limit: int = 7):
    """Hashable key equal for two states iff they are bisimilar.

    Brute force over relabelings of the contracted state, so only for small
    states (used by the enumeration oracles and tests).
    """
    small = contract(state)
    M = small.structure
    others = [w for w in M.worlds if w != small.real]
    if len(M.worlds) > limit:
        raise CapacityError(f"canonical_key is limited to {limit} worlds after contraction")
    best = None
    for perm in itertools.permutations(others):
        order = (small.real,) + perm
        pos = {w: k for k, w in enumerate(order)}
        key = (
            tuple(M.valuation[w].values() for w in order),
            tuple(tuple(sorted((pos[u], pos[v]) for u, v in M.relations[a])) for a in M.agents),
        )
        if best is None or key < best:
            best = key
    return (M.agents, M.fluents, best)


# --- presentation ----------------------------------------------------------


def world_label(M: KripkeStructure, w: int) -> str:
    return f"s{w}: " + ", ".join(str(l) for l in M.valuation[w].literals())


def to_dot(state: PointedStructure | KripkeStructure, name: str = "M") -> str:
    """Graphviz source: agent-labelled edges, designated world double-circled."""
    if isinstance(state, PointedStructure):
        M, real = state.structure, state.real
    else:
        M, real = state, None
    lines = [f'digraph "{name}" {{', "  node [shape=circle];"]
    for w in M.worlds:
        shape = ", shape=doublecircle" if w == real else ""
        lines.append(f'  s{w} [label="{world_label(M, w)}"{shape}];')
    for u, a, v in M.edges():
        lines.append(f'  s{u} -> s{v} [label="{a}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def describe(state: PointedStructure) -> str:
    """Plain-text listing of worlds and edges."""
    M = state.structure
    out = [f"{len(M.worlds)} worlds, designated s{state.real}"]
    for w in M.worlds:
        mark = "*" if w == state.real else " "
        out.append(f" {mark} {world_label(M, w)}")
    for a in M.agents:
        pairs = " ".join(f"s{u}->s{v}" for u, v in sorted(M.relations[a]))
        out.append(f"   {a}: {pairs}")
    return "\n".join(out)


def formula_text(phi: Formula, M: KripkeStructure | None = None) -> str:
    return format_formula(phi, M.agents if M is not None else None)
