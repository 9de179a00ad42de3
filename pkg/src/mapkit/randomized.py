"""Seeded random structures, formulas and theories for property checks.

Everything takes a `random.Random` so batches are reproducible from a seed.
Sizes stay small (a few fluents, agents and worlds) because the consumers
compare against brute-force oracles.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .kripke import KripkeStructure, PointedStructure
from .lang import Theory, parse_theory
from .logic import TOP, And, Atom, B, C, E, Formula, Not, Or, format_formula

AGENT_NAMES = ("A", "B", "C")


def names(n_agents: int, n_fluents: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    return AGENT_NAMES[:n_agents], tuple(f"f{k}" for k in range(n_fluents))


def random_structure(
    rng: random.Random, agents, fluents, n_worlds: int, density: float = 0.5, s5: bool = False
) -> KripkeStructure:
    val = {w: {f for f in fluents if rng.random() < 0.5} for w in range(n_worlds)}
    rels = {}
    for a in agents:
        if s5:
            block = [rng.randrange(n_worlds) for _ in range(n_worlds)]
            rels[a] = {(u, v) for u in range(n_worlds) for v in range(n_worlds) if block[u] == block[v]}
        else:
            rels[a] = {(u, v) for u in range(n_worlds) for v in range(n_worlds) if rng.random() < density}
    return KripkeStructure(agents, fluents, val, rels)


def random_state(rng: random.Random, agents, fluents, max_worlds: int = 4, s5: bool = False) -> PointedStructure:
    n = rng.randint(1, max_worlds)
    M = random_structure(rng, agents, fluents, n, density=rng.choice((0.3, 0.5, 0.8)), s5=s5)
    return PointedStructure(M, rng.randrange(n))


def random_fluent_formula(rng: random.Random, fluents, depth: int = 2) -> Formula:
    if depth <= 0 or rng.random() < 0.35:
        lit = Atom(rng.choice(fluents))
        return Not(lit) if rng.random() < 0.5 else lit
    op = rng.random()
    if op < 0.2:
        return Not(random_fluent_formula(rng, fluents, depth - 1))
    left = random_fluent_formula(rng, fluents, depth - 1)
    right = random_fluent_formula(rng, fluents, depth - 1)
    return And(left, right) if op < 0.6 else Or(left, right)


def random_formula(rng: random.Random, agents, fluents, depth: int = 3, size: int = 3) -> Formula:
    """Belief formula of modal depth at most `depth`."""
    if size <= 0 or rng.random() < 0.2:
        return random_fluent_formula(rng, fluents, 1)
    op = rng.random()
    if depth > 0 and op < 0.35:
        return B(rng.choice(agents), random_formula(rng, agents, fluents, depth - 1, size - 1))
    if depth > 0 and op < 0.45:
        grp = frozenset(a for a in agents if rng.random() < 0.6)
        cls = E if rng.random() < 0.5 else C
        return cls(grp or None, random_formula(rng, agents, fluents, depth - 1, size - 1))
    if op < 0.6:
        return Not(random_formula(rng, agents, fluents, depth, size - 1))
    left = random_formula(rng, agents, fluents, depth, size - 1)
    right = random_formula(rng, agents, fluents, depth, size - 1)
    return And(left, right) if op < 0.8 else Or(left, right)


# --- theories --------------------------------------------------------------


def _cond(rng: random.Random, fluents, p_true: float) -> Formula:
    if rng.random() < p_true:
        return TOP
    return random_fluent_formula(rng, fluents, 1)


def _if(phi: Formula) -> str:
    return "" if phi == TOP else " if " + format_formula(phi)


@dataclass(frozen=True)
class Instance:
    theory: Theory
    action: str
    state: PointedStructure


def random_theory(
    rng: random.Random,
    n_agents: int = 3,
    n_fluents: int = 3,
    sensed: int = 1,
    belief_preconditions: bool = False,
) -> Theory:
    """One world-altering action `w`, one sensing `s`, one announcement `n`."""
    agents, fluents = names(n_agents, n_fluents)
    lines = [f"agents {', '.join(agents)}", f"fluents {', '.join(fluents)}", "actions w, s, n"]
    for act in ("w", "s", "n"):
        pre = _cond(rng, fluents, 0.6)
        if belief_preconditions and rng.random() < 0.3:
            pre = And(pre, B(rng.choice(agents), random_fluent_formula(rng, fluents, 0)))
        if pre != TOP:
            lines.append(f"executable {act} if {format_formula(pre)}")
    changed = [f for f in fluents if rng.random() < 0.6] or [fluents[0]]
    for f in changed:
        lit = f if rng.random() < 0.5 else "!" + f
        lines.append(f"w causes {lit}{_if(_cond(rng, fluents, 0.5))}")
    lines.append("s determines " + ", ".join(rng.sample(list(fluents), sensed)))
    lines.append(f"n announces {format_formula(random_fluent_formula(rng, fluents, 2))}")
    for act in ("w", "s", "n"):
        for a in agents:
            roll = rng.random()
            if roll < 0.45:
                lines.append(f"{a} observes {act}{_if(_cond(rng, fluents, 0.5))}")
            elif roll < 0.75 and act != "w":
                lines.append(f"{a} aware_of {act}{_if(_cond(rng, fluents, 0.5))}")
    return parse_theory("\n".join(lines) + "\n")


def random_instance(
    rng: random.Random, action: str, n_agents: int = 3, n_fluents: int = 3, max_worlds: int = 4, **kw
) -> Instance:
    agents = rng.randint(1, n_agents)
    fl = rng.randint(max(1, kw.get("sensed", 1)), n_fluents)
    D = random_theory(rng, agents, fl, **kw)
    state = random_state(rng, D.agents, D.fluents, max_worlds)
    return Instance(D, action, state)
