import pytest

from mapkit.kripke import KripkeStructure, PointedStructure
from mapkit.lang import corpus_path, load_theory, parse_queries
from mapkit.logic import And, Atom, B, Bottom, E, Not, Or, Top

COIN_FLUENTS = ("opened", "has_key(A)", "has_key(B)", "has_key(C)",
                "looking(A)", "looking(B)", "looking(C)", "tail")
COIN_BASE = {"has_key(A)", "looking(A)", "looking(B)", "looking(C)"}
DELTA_A = ("distract(A,C)", "signal(A,B)", "open(A)", "peek(A)")


def total(worlds):
    return {(u, v) for u in worlds for v in worlds}


def naive_holds(M, w, phi):
    """Textbook recursive satisfaction, used as an oracle for the vectorised one."""
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, Atom):
        return M.valuation[w][phi.name]
    if isinstance(phi, Not):
        return not naive_holds(M, w, phi.arg)
    if isinstance(phi, And):
        return naive_holds(M, w, phi.left) and naive_holds(M, w, phi.right)
    if isinstance(phi, Or):
        return naive_holds(M, w, phi.left) or naive_holds(M, w, phi.right)
    if isinstance(phi, B):
        return all(naive_holds(M, v, phi.arg) for u, v in M.relations[phi.agent] if u == w)
    group = M.agents if phi.group is None else sorted(phi.group)
    succ = {v for a in group for u, v in M.relations[a] if u == w}
    if isinstance(phi, E):
        return all(naive_holds(M, v, phi.arg) for v in succ)
    # C: every world reachable in zero or more group steps
    seen, todo = {w}, [w]
    while todo:
        u = todo.pop()
        for a in group:
            for x, v in M.relations[a]:
                if x == u and v not in seen:
                    seen.add(v)
                    todo.append(v)
    return all(naive_holds(M, v, phi.arg) for v in seen)


@pytest.fixture(scope="session")
def coin():
    return load_theory(corpus_path("coin_box.mad"))


@pytest.fixture(scope="session")
def coin_strict():
    return load_theory(corpus_path("coin_box_strict.mad"))


@pytest.fixture(scope="session")
def coin_queries(coin):
    return parse_queries(corpus_path("coin_box.maq").read_text(), coin.signature)


@pytest.fixture(scope="session")
def m0():
    """The two-world initial structure of the coin box, written out by hand."""
    val = {0: COIN_BASE, 1: COIN_BASE | {"tail"}}
    rels = {a: total([0, 1]) for a in "ABC"}
    return KripkeStructure("ABC", COIN_FLUENTS, val, rels)


@pytest.fixture(scope="session")
def s0(m0):
    return PointedStructure(m0, 0)
