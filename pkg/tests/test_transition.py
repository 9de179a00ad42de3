import pytest

from mapkit import statedoc
from mapkit.errors import ArgumentError, FrameError, ObservabilityError, EffectConsistencyError
from mapkit.initial import generate_initial
from mapkit.kripke import KripkeStructure, PointedStructure, bisimilar, satisfies
from mapkit.lang import corpus_path, load_theory, parse_query, parse_theory
from mapkit.logic import And, Atom, B, Bottom, C, FluentLiteral, Not, Or
from mapkit.transition import (
    FAILED,
    BState,
    consistency_preserving,
    effects,
    entails,
    explain_inexecutable,
    frame_of_reference,
    run_plan,
    step,
    step_announce,
    step_bstate,
    step_sense,
    step_world,
    trace_plan,
)

from conftest import COIN_BASE, COIN_FLUENTS, DELTA_A, total

tail = Atom("tail")


def grow(M, shift, update, copied, linked):
    """Append shifted copies of every world of M.

    Agents in `copied` get the shifted copy of their relation; agents in
    `linked` get edges from each copy back into M.
    """
    val = {w: M.valuation[w].true for w in M.worlds}
    rels = {a: set(M.relations[a]) for a in M.agents}
    for w in M.worlds:
        val[w + shift] = update(M.valuation[w].true)
    for a in copied:
        rels[a] |= {(u + shift, v + shift) for u, v in M.relations[a]}
    for a in linked:
        rels[a] |= {(u + shift, v) for u, v in M.relations[a]}
    return KripkeStructure(M.agents, M.fluents, val, rels)


def worked_example():
    """M1..M4 of the coin-box run, written out from their listed definitions."""
    m1_val = {0: COIN_BASE, 1: COIN_BASE | {"tail"}}
    m1_val[2] = COIN_BASE - {"looking(C)"}
    m1_val[3] = COIN_BASE - {"looking(C)"} | {"tail"}
    m1_rels = {
        "A": total([0, 1]) | total([2, 3]),
        "B": total([0, 1]) | {(2, 0), (2, 1), (3, 0), (3, 1)},
        "C": total([0, 1]) | total([2, 3]),
    }
    M1 = KripkeStructure("ABC", COIN_FLUENTS, m1_val, m1_rels)
    M2 = grow(M1, 4, lambda t: t, "AB", "C")
    M3 = grow(M2, 8, lambda t: t | {"opened"}, "AB", "C")
    M4 = grow(M3, 16, lambda t: t, "AB", "C")
    # the sensing step keeps only A's copied links between equal tail values
    rels = dict(M4.relations)
    rels["A"] = {(u, v) for u, v in rels["A"]
                 if u < 16 or M4.valuation[u]["tail"] == M4.valuation[v]["tail"]}
    M4 = KripkeStructure("ABC", COIN_FLUENTS, M4.valuation, rels)
    return [(M1, 2), (M2, 6), (M3, 14), (M4, 30)]


def test_worked_example_is_reproduced_exactly(coin, s0):
    state = s0
    for action, (expected, point) in zip(DELTA_A, worked_example()):
        (state,) = step(coin, action, state)
        assert state.real == point
        assert state.structure == expected, action
    assert len(state.structure.worlds) == 32
    assert satisfies(state, B("A", Not(tail)))


def test_frames_follow_the_run(coin, s0):
    assert str(frame_of_reference(coin, "distract(A,C)", s0)) == "({A, C}, {}, {B})"
    (s1,) = step(coin, "distract(A,C)", s0)
    assert str(frame_of_reference(coin, "peek(A)", s1)) == "({A}, {B}, {C})"
    assert str(frame_of_reference(coin, "open(A)", s1)) == "({A, B}, {}, {C})"


def test_effects(coin, s0):
    eff = effects(coin, "open(A)", s0.structure)
    assert eff == {0: {FluentLiteral("opened")}, 1: {FluentLiteral("opened")}}
    flip = load_theory(corpus_path("flip.mad"))
    M = KripkeStructure("AB", ["on"], {1: [], 2: ["on"]})
    assert effects(flip, "flip", M) == {1: {FluentLiteral("on")}, 2: {FluentLiteral("on", False)}}


def test_conflicting_effects_are_reported():
    D = parse_theory("agents A\nfluents f\nactions a\na causes f\na causes !f\nA observes a\n")
    with pytest.raises(EffectConsistencyError):
        step(D, "a", PointedStructure(KripkeStructure("A", "f", {0: []}), 0))


# --- hand-built step fixtures -------------------------------------------------


def coin_state(extra=frozenset(), missing=frozenset(), rels=None):
    base = (COIN_BASE | set(extra)) - set(missing)
    val = {0: base, 1: base | {"tail"}}
    rels = rels or {a: total([0, 1]) for a in "ABC"}
    return KripkeStructure("ABC", COIN_FLUENTS, val, rels)


def test_open_step_fixture(coin_strict):
    M = coin_state(missing={"looking(C)"})
    (got,) = step_world(coin_strict, "open(A)", PointedStructure(M, 0))
    opened = COIN_BASE - {"looking(C)"} | {"opened"}
    val = {0: M.valuation[0], 1: M.valuation[1], 2: opened, 3: opened | {"tail"}}
    rels = {
        "A": total([0, 1]) | total([2, 3]),
        "B": total([0, 1]) | total([2, 3]),
        "C": total([0, 1]) | {(u, v) for u in (2, 3) for v in (0, 1)},
    }
    fixture = PointedStructure(KripkeStructure("ABC", COIN_FLUENTS, val, rels), 2)
    assert bisimilar(got, fixture)
    assert got.structure == fixture.structure and got.real == 2


def flip_input():
    M = KripkeStructure("AB", ["on"], {1: [], 2: ["on"]}, {"A": total([1, 2]), "B": {(1, 1), (2, 2)}})
    return PointedStructure(M, 1)


def test_flip_step_fixture():
    D = load_theory(corpus_path("flip.mad"))
    (got,) = step(D, "flip", flip_input())
    val = {1: [], 2: ["on"], 3: ["on"], 4: []}
    rels = {
        "A": total([1, 2]) | {(u, v) for u in (3, 4) for v in (1, 2)},
        "B": {(1, 1), (2, 2), (3, 3), (4, 4)},
    }
    fixture = PointedStructure(KripkeStructure("AB", ["on"], val, rels), 3)
    assert got.structure == fixture.structure and got.real == 3
    on = Atom("on")
    assert satisfies(got, And(on, And(B("B", on), And(Not(B("A", on)), Not(B("A", Not(on)))))))


def test_sense_step_fixture(coin_strict):
    # heads-up state with the box open, C not looking; world ids as drawn
    base = COIN_BASE - {"looking(C)"} | {"opened"}
    M = KripkeStructure("ABC", COIN_FLUENTS, {1: base, 2: base | {"tail"}}, {a: total([1, 2]) for a in "ABC"})
    state = PointedStructure(M, 1)
    assert str(frame_of_reference(coin_strict, "peek(A)", state)) == "({A}, {B}, {C})"
    (got,) = step_sense(coin_strict, "peek(A)", state)
    rels = {
        "A": total([1, 2]) | {(3, 3), (4, 4)},  # (3,A,4) and (4,A,3) removed
        "B": total([1, 2]) | total([3, 4]),
        "C": total([1, 2]) | {(u, v) for u in (3, 4) for v in (1, 2)},
    }
    val = {1: base, 2: base | {"tail"}, 3: base, 4: base | {"tail"}}
    fixture = PointedStructure(KripkeStructure("ABC", COIN_FLUENTS, val, rels), 3)
    assert got.structure == fixture.structure and got.real == 3
    know = Or(B("A", tail), B("A", Not(tail)))
    assert satisfies(got, B("A", Not(tail)))
    assert satisfies(got, B("B", know)) and not satisfies(got, B("B", tail))
    assert satisfies(got, B("C", Not(know)))


def test_public_announcement_drops_a_replica_world(coin):
    # A already knows tail in the real world 0; world 2 is a heads world
    val = {0: COIN_BASE | {"tail"}, 1: COIN_BASE | {"tail"}, 2: COIN_BASE}
    rels = {"A": total([0, 1]) | {(2, 2)}, "B": total([0, 1, 2]), "C": total([0, 1, 2])}
    M = KripkeStructure("ABC", COIN_FLUENTS, val, rels)
    (got,) = step_announce(coin, "shout_tail(A)", PointedStructure(M, 0))
    assert got.real == 3 and got.structure.worlds == (0, 1, 2, 3, 4)
    fixture_rels = {a: set(rels[a]) | total([3, 4]) for a in "ABC"}
    fixture_val = {**val, 3: val[0], 4: val[1]}
    fixture = PointedStructure(KripkeStructure("ABC", COIN_FLUENTS, fixture_val, fixture_rels), 3)
    assert got.structure == fixture.structure
    assert satisfies(got, C(None, tail))


def test_private_announcement():
    D = load_theory(corpus_path("raising_hand.mad"))
    F = D.fluents
    base = {"looking(A)", "looking(B)"}
    M = KripkeStructure("ABC", F, {0: base, 1: base | {"tail"}},
                        {"A": {(0, 0), (1, 1)}, "B": total([0, 1]), "C": total([0, 1])})
    (got,) = step(D, "raising_hand(A)", PointedStructure(M, 0))
    assert got.real == 2 and got.structure.worlds == (0, 1, 2)
    assert got.structure.relations["B"] == total([0, 1]) | {(2, 2)}
    assert got.structure.relations["C"] == total([0, 1]) | {(2, 0), (2, 1)}
    assert satisfies(got, B("B", Not(tail)))
    assert satisfies(got, And(Not(B("C", tail)), Not(B("C", Not(tail)))))
    assert satisfies(got, B("C", Not(B("B", Not(tail)))))


def test_false_belief_sensing_leaves_agent_with_no_options():
    D = load_theory(corpus_path("sensing_ignorant.mad"))
    (state,) = statedoc.load(corpus_path("sensing_ignorant.json"))
    assert not consistency_preserving(D, "a", state)
    (got,) = step(D, "a", state)
    assert got.structure.successors("A", got.real) == []
    assert satisfies(got, B("A", Bottom()))


def test_partial_observer_of_world_change_is_rejected():
    D = parse_theory("agents A, B\nfluents f\nactions a\na causes f\nA observes a\nB aware_of a\n")
    s = PointedStructure(KripkeStructure("AB", "f", {0: []}), 0)
    with pytest.raises(FrameError):
        step(D, "a", s)


def test_full_and_partial_observer_clash():
    D = parse_theory("agents A\nfluents f\nactions a\na determines f\nA observes a\nA aware_of a\n")
    s = PointedStructure(KripkeStructure("A", "f", {0: []}), 0)
    with pytest.raises(ObservabilityError):
        frame_of_reference(D, "a", s)


# --- inexecutability --------------------------------------------------------


def test_inexecutable_steps_are_empty(coin, s0):
    assert step(coin, "open(B)", s0) == ()
    assert "executability" in explain_inexecutable(coin, "open(B)", s0)
    assert explain_inexecutable(coin, "open(A)", s0) is None


def test_untruthful_announcement_is_rejected():
    D = parse_theory("agents A\nfluents f\nactions n\nn announces f\nA observes n\n")
    s = PointedStructure(KripkeStructure("A", "f", {0: [], 1: ["f"]}, {"A": total([0, 1])}), 0)
    assert step(D, "n", s) == ()
    assert "untruthful" in explain_inexecutable(D, "n", s)
    (ok,) = step(D, "n", PointedStructure(s.structure, 1))
    assert satisfies(ok, B("A", Atom("f")))


# --- b-states and plans -----------------------------------------------------


def test_bstate_rules(s0):
    with pytest.raises(ArgumentError):
        BState([])
    with pytest.raises(ArgumentError):
        BState([s0], failed=True)
    assert len(BState([s0, s0])) == 1
    assert FAILED.failed and repr(FAILED) == "BState(Failed)"
    assert BState([s0]) == BState([s0]) and hash(BState([s0])) == hash(BState([s0]))


def test_run_plan_from_generated_initial(coin):
    initial = generate_initial(coin).bstate()
    final = run_plan(coin, DELTA_A, initial)
    assert len(final) == 2 and {len(s.structure.worlds) for s in final} == {32}
    counts = [[len(s.structure.worlds) for s in bs] for _, _, bs, _ in trace_plan(coin, DELTA_A, initial)]
    assert counts == [[4, 4], [8, 8], [16, 16], [32, 32]]


def test_failed_propagates(coin_strict):
    initial = generate_initial(coin_strict).bstate()
    final = run_plan(coin_strict, DELTA_A, initial)
    assert final.failed
    assert step_bstate(coin_strict, "open(A)", FAILED) is FAILED
    steps = list(trace_plan(coin_strict, DELTA_A, initial))
    assert len(steps) == 2 and steps[-1][2].failed and steps[-1][3] == 0


def test_compressed_run_agrees(coin):
    initial = generate_initial(coin).bstate()
    plain = run_plan(coin, DELTA_A, initial)
    small = run_plan(coin, DELTA_A, initial, compress=True)
    assert all(len(s.structure.worlds) < 32 for s in small)
    for x, y in zip(plain, small):
        assert bisimilar(x, y)


def test_entailment(coin, coin_queries):
    initial = generate_initial(coin).bstate()
    assert all(entails(coin, q, initial) for q in coin_queries)
    q = parse_query("B[C] (B[A] tail | B[A] !tail) after " + "; ".join(DELTA_A), coin.signature)
    assert not entails(coin, q, initial)
    assert entails(coin, parse_query("C(!opened) after []", coin.signature), initial)
    # a plan that fails entails nothing
    assert not entails(coin, parse_query("true after open(B)", coin.signature), initial)
