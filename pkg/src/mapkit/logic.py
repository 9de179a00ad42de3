"""Fluents, interpretations and the belief-formula AST.

Formulas are frozen dataclasses, so they hash and compare structurally and
can be used as cache keys.  Implication is not a node: `implies` builds
``!a | b`` directly.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass

from .errors import ArgumentError, CapacityError, SignatureError

DEFAULT_MAX_FLUENTS = 16


def max_fluents() -> int:
    """Capacity bound for 2^|F| enumerations (MAPKIT_MAX_FLUENTS overrides)."""
    raw = os.environ.get("MAPKIT_MAX_FLUENTS")
    if raw is None:
        return DEFAULT_MAX_FLUENTS
    try:
        return int(raw)
    except ValueError:
        raise CapacityError(f"MAPKIT_MAX_FLUENTS is not an integer: {raw!r}") from None


def check_capacity(n_fluents: int) -> None:
    bound = max_fluents()
    if n_fluents > bound:
        raise CapacityError(
            f"{n_fluents} fluents exceed the enumeration bound of {bound} "
            "(set MAPKIT_MAX_FLUENTS to raise it)"
        )


@dataclass(frozen=True)
class Signature:
    agents: tuple[str, ...]
    fluents: tuple[str, ...]
    actions: tuple[str, ...] = ()

    def __post_init__(self):
        for label, names in (("agent", self.agents), ("fluent", self.fluents), ("action", self.actions)):
            if len(set(names)) != len(names):
                raise SignatureError(f"duplicate {label} name")
        pools = [set(self.agents), set(self.fluents), set(self.actions)]
        for a, b in itertools.combinations(pools, 2):
            shared = a & b
            if shared:
                raise SignatureError(f"name used in two name spaces: {sorted(shared)[0]}")


@dataclass(frozen=True)
class FluentLiteral:
    fluent: str
    positive: bool = True

    def negate(self) -> "FluentLiteral":
        return FluentLiteral(self.fluent, not self.positive)

    def as_formula(self) -> "Formula":
        return Atom(self.fluent) if self.positive else Not(Atom(self.fluent))

    def __str__(self):
        return self.fluent if self.positive else "!" + self.fluent


# --- formula AST -----------------------------------------------------------


class Formula:
    """Marker base class for AST nodes."""

    __slots__ = ()

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


TOP = Top()
BOT = Bottom()


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class B(Formula):
    agent: str
    arg: Formula


@dataclass(frozen=True)
class E(Formula):
    """Everybody in `group` believes; group None means every agent."""

    group: frozenset | None
    arg: Formula


@dataclass(frozen=True)
class C(Formula):
    """Common belief among `group`; group None means every agent."""

    group: frozenset | None
    arg: Formula


def conj(formulas: Iterable[Formula]) -> Formula:
    items = list(formulas)
    if not items:
        return TOP
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(formulas: Iterable[Formula]) -> Formula:
    items = list(formulas)
    if not items:
        return BOT
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def group(agents: Iterable[str] | None) -> frozenset | None:
    return None if agents is None else frozenset(agents)


def is_fluent_formula(phi: Formula) -> bool:
    if isinstance(phi, (Top, Bottom, Atom)):
        return True
    if isinstance(phi, Not):
        return is_fluent_formula(phi.arg)
    if isinstance(phi, (And, Or)):
        return is_fluent_formula(phi.left) and is_fluent_formula(phi.right)
    return False


def atoms(phi: Formula) -> set[str]:
    out: set[str] = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.add(f.name)
        elif isinstance(f, (Not, B, E, C)):
            stack.append(f.arg)
        elif isinstance(f, (And, Or)):
            stack.extend((f.left, f.right))
    return out


def agents_in(phi: Formula) -> set[str]:
    out: set[str] = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, B):
            out.add(f.agent)
        elif isinstance(f, (E, C)) and f.group is not None:
            out.update(f.group)
        if isinstance(f, (Not, B, E, C)):
            stack.append(f.arg)
        elif isinstance(f, (And, Or)):
            stack.extend((f.left, f.right))
    return out


def modal_depth(phi: Formula) -> int:
    if isinstance(phi, (Top, Bottom, Atom)):
        return 0
    if isinstance(phi, Not):
        return modal_depth(phi.arg)
    if isinstance(phi, (And, Or)):
        return max(modal_depth(phi.left), modal_depth(phi.right))
    return 1 + modal_depth(phi.arg)


# --- interpretations -------------------------------------------------------


class Interpretation(Mapping):
    """Total assignment of truth values to an ordered tuple of fluents."""

    __slots__ = ("fluents", "true", "_hash")

    def __init__(self, fluents: Sequence[str], true: Iterable[str] = ()):
        self.fluents = tuple(fluents)
        self.true = frozenset(true)
        unknown = self.true.difference(self.fluents)
        if unknown:
            raise SignatureError(f"unknown fluent {sorted(unknown)[0]!r}")
        self._hash = hash((self.fluents, self.true))

    @classmethod
    def from_values(cls, fluents: Sequence[str], values: Iterable[bool]) -> "Interpretation":
        return cls(fluents, (f for f, v in zip(fluents, values) if v))

    def __getitem__(self, fluent: str) -> bool:
        if fluent in self.true:
            return True
        if fluent in self.fluents:
            return False
        raise SignatureError(f"unknown fluent {fluent!r}")

    def __iter__(self) -> Iterator[str]:
        return iter(self.fluents)

    def __len__(self) -> int:
        return len(self.fluents)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Interpretation):
            return self.fluents == other.fluents and self.true == other.true
        return NotImplemented

    def values(self) -> tuple[bool, ...]:  # type: ignore[override]
        return tuple(f in self.true for f in self.fluents)

    def literals(self) -> tuple[FluentLiteral, ...]:
        return tuple(FluentLiteral(f, f in self.true) for f in self.fluents)

    def apply(self, literals: Iterable[FluentLiteral]) -> "Interpretation":
        """Overwrite with the given literals (the rest is kept)."""
        true = set(self.true)
        for lit in literals:
            if lit.fluent not in self.fluents:
                raise SignatureError(f"unknown fluent {lit.fluent!r}")
            if lit.positive:
                true.add(lit.fluent)
            else:
                true.discard(lit.fluent)
        return Interpretation(self.fluents, true)

    def __repr__(self):
        return "Interpretation({" + ", ".join(str(l) for l in self.literals()) + "})"


def all_interpretations(fluents: Sequence[str]) -> Iterator[Interpretation]:
    """All 2^|F| interpretations; the first fluent varies slowest, false first."""
    check_capacity(len(fluents))
    for values in itertools.product((False, True), repeat=len(fluents)):
        yield Interpretation.from_values(fluents, values)


def eval_fluent(interp: Mapping[str, bool], phi: Formula) -> bool:
    if isinstance(phi, Atom):
        try:
            return bool(interp[phi.name])
        except KeyError:
            raise SignatureError(f"unknown fluent {phi.name!r}") from None
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, Not):
        return not eval_fluent(interp, phi.arg)
    if isinstance(phi, And):
        return eval_fluent(interp, phi.left) and eval_fluent(interp, phi.right)
    if isinstance(phi, Or):
        return eval_fluent(interp, phi.left) or eval_fluent(interp, phi.right)
    raise ArgumentError(f"not a fluent formula: {format_formula(phi)}")


def prop_entails(gamma: Iterable[Formula], phi: Formula, fluents: Sequence[str] | None = None) -> bool:
    """Every interpretation satisfying all of `gamma` satisfies `phi`."""
    gamma = list(gamma)
    if fluents is None:
        names: set[str] = atoms(phi)
        for g in gamma:
            names |= atoms(g)
        fluents = sorted(names)
    else:
        missing = set(atoms(phi)).union(*(atoms(g) for g in gamma)) - set(fluents)
        if missing:
            raise SignatureError(f"unknown fluent {sorted(missing)[0]!r}")
    for interp in all_interpretations(fluents):
        if all(eval_fluent(interp, g) for g in gamma) and not eval_fluent(interp, phi):
            return False
    return True


def _fluents_of(sig) -> tuple[str, ...]:
    return tuple(sig.fluents) if isinstance(sig, Signature) else tuple(sig)


def complete_clauses(sig: Signature | Sequence[str]) -> list[Formula]:
    """All complete clauses, each mentioning every fluent once, in fluent order.

    Clause k is falsified by exactly the k-th interpretation of
    `all_interpretations`.
    """
    fluents = _fluents_of(sig)
    check_capacity(len(fluents))
    out = []
    for signs in itertools.product((True, False), repeat=len(fluents)):
        out.append(disj(FluentLiteral(f, s).as_formula() for f, s in zip(fluents, signs)))
    return out


def clause_falsified_by(interp: Interpretation) -> Formula:
    """The unique complete clause that `interp` falsifies."""
    return disj(FluentLiteral(f, not v).as_formula() for f, v in zip(interp.fluents, interp.values()))


def world_conjunction(interp: Interpretation) -> Formula:
    """The complete conjunction true exactly at `interp`."""
    return conj(lit.as_formula() for lit in interp.literals())


def simplify(phi: Formula) -> Formula:
    """Constant folding and double negation removal (display only)."""
    if isinstance(phi, Not):
        a = simplify(phi.arg)
        if isinstance(a, Top):
            return BOT
        if isinstance(a, Bottom):
            return TOP
        if isinstance(a, Not):
            return a.arg
        return Not(a)
    if isinstance(phi, And):
        l, r = simplify(phi.left), simplify(phi.right)
        if isinstance(l, Bottom) or isinstance(r, Bottom):
            return BOT
        if isinstance(l, Top):
            return r
        if isinstance(r, Top):
            return l
        if l == r:
            return l
        if l == Not(r) or r == Not(l):
            return BOT
        return And(l, r)
    if isinstance(phi, Or):
        l, r = simplify(phi.left), simplify(phi.right)
        if isinstance(l, Top) or isinstance(r, Top):
            return TOP
        if isinstance(l, Bottom):
            return r
        if isinstance(r, Bottom):
            return l
        if l == r:
            return l
        if l == Not(r) or r == Not(l):
            return TOP
        return Or(l, r)
    if isinstance(phi, (B, E, C)):
        return type(phi)(phi.agent if isinstance(phi, B) else phi.group, simplify(phi.arg))
    return phi


# --- printing --------------------------------------------------------------

_OR, _AND, _UNARY = 1, 2, 3


def _group_text(g: frozenset | None, agent_order: Sequence[str] | None) -> str:
    if g is None:
        return ""
    if agent_order is not None:
        names = [a for a in agent_order if a in g] + sorted(set(g) - set(agent_order))
    else:
        names = sorted(g)
    return "[{" + ", ".join(names) + "}]"


def format_formula(phi: Formula, agent_order: Sequence[str] | None = None) -> str:
    """Concrete ASCII syntax; parsing the output gives back the same AST."""

    def go(f: Formula, level: int) -> str:
        if isinstance(f, Top):
            return "true"
        if isinstance(f, Bottom):
            return "false"
        if isinstance(f, Atom):
            return f.name
        if isinstance(f, Or):
            text = f"{go(f.left, _OR)} | {go(f.right, _AND)}"
            mine = _OR
        elif isinstance(f, And):
            text = f"{go(f.left, _AND)} & {go(f.right, _UNARY)}"
            mine = _AND
        else:
            if isinstance(f, Not):
                return "!" + go(f.arg, _UNARY)
            if isinstance(f, B):
                head = f"B[{f.agent}]"
            elif isinstance(f, E):
                head = "E" + _group_text(f.group, agent_order)
            else:
                head = "C" + _group_text(f.group, agent_order)
            return head + " " + go(f.arg, _UNARY)
        return text if mine >= level else "(" + text + ")"

    return go(phi, _OR)
