"""JSON documents for pointed structures and b-states.

A single state:

    {
      "agents": ["A", "B"],
      "fluents": ["f", "g"],
      "worlds": [{"id": 0, "literals": ["f", "!g"]}, ...],
      "relations": {"A": [[0, 0], [0, 1]], "B": []},
      "designated": 0
    }

Literals list every fluent in declaration order.  Edges are sorted pairs.
A b-state is {"states": [<state>, ...]}.  `dumps` output is deterministic
(sorted keys, two-space indent, trailing newline).
"""

from __future__ import annotations

import json
from collections.abc import Iterable

from .errors import ArgumentError
from .kripke import KripkeStructure, PointedStructure


def state_to_dict(state: PointedStructure) -> dict:
    M = state.structure
    return {
        "agents": list(M.agents),
        "fluents": list(M.fluents),
        "worlds": [
            {"id": w, "literals": [f if M.valuation[w][f] else "!" + f for f in M.fluents]}
            for w in M.worlds
        ],
        "relations": {a: [list(e) for e in sorted(M.relations[a])] for a in M.agents},
        "designated": state.real,
    }


def state_from_dict(doc: dict) -> PointedStructure:
    try:
        agents, fluents = doc["agents"], doc["fluents"]
        valuation = {}
        for entry in doc["worlds"]:
            true = set()
            for lit in entry["literals"]:
                name = lit[1:] if lit.startswith("!") else lit
                if name not in fluents:
                    raise ArgumentError(f"world {entry['id']}: unknown fluent {name!r}")
                if not lit.startswith("!"):
                    true.add(name)
            if int(entry["id"]) in valuation:
                raise ArgumentError(f"duplicate world id {entry['id']}")
            valuation[int(entry["id"])] = true
        rels = {a: [tuple(e) for e in pairs] for a, pairs in doc.get("relations", {}).items()}
        M = KripkeStructure(agents, fluents, valuation, rels)
        return PointedStructure(M, int(doc["designated"]))
    except (KeyError, TypeError) as exc:
        raise ArgumentError(f"malformed state document: {exc}") from exc


def dumps(states: PointedStructure | Iterable[PointedStructure]) -> str:
    if isinstance(states, PointedStructure):
        doc = state_to_dict(states)
    else:
        doc = {"states": [state_to_dict(s) for s in states]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> list[PointedStructure]:
    """Parse a single-state or b-state document into a list of states."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"not a JSON state document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArgumentError("state document must be a JSON object")
    if "states" in doc:
        return [state_from_dict(d) for d in doc["states"]]
    return [state_from_dict(doc)]


def load(path) -> list[PointedStructure]:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(path, states) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(states))
