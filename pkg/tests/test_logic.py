import itertools

import pytest
from hypothesis import given

from mapkit.errors import CapacityError, SignatureError
from mapkit.lang import parse_formula
from mapkit.logic import (
    BOT,
    TOP,
    And,
    Atom,
    B,
    C,
    E,
    FluentLiteral,
    Interpretation,
    Not,
    Or,
    all_interpretations,
    atoms,
    check_capacity,
    clause_falsified_by,
    complete_clauses,
    conj,
    disj,
    eval_fluent,
    format_formula,
    implies,
    is_fluent_formula,
    modal_depth,
    prop_entails,
    simplify,
    world_conjunction,
)

from strategies import fluent_formulas, formulas

f, g = Atom("f"), Atom("g")


def test_eval_fluent_basics():
    assert eval_fluent(Interpretation(["tail"], []), Not(Atom("tail")))
    assert eval_fluent(Interpretation(["f"], []), TOP)
    assert not eval_fluent(Interpretation(["f", "g"], ["f"]), implies(f, g))


def test_eval_unknown_fluent():
    with pytest.raises(SignatureError):
        eval_fluent(Interpretation(["f"], []), Atom("zzz"))


def test_prop_entails_examples():
    assert prop_entails([f], Or(f, g))
    assert not prop_entails([], f)
    fl = ["opened", "has_key(A)", "tail"]
    assert prop_entails([Not(Atom("opened")), Atom("has_key(A)")], Or(Not(Atom("opened")), Atom("tail")), fl)


def test_interpretation_order_and_apply():
    seq = [i.values() for i in all_interpretations(["f", "g"])]
    assert seq == [(False, False), (False, True), (True, False), (True, True)]
    i = Interpretation(["f", "g"], ["f"])
    assert i.apply([FluentLiteral("f", False), FluentLiteral("g")]).true == {"g"}
    with pytest.raises(SignatureError):
        Interpretation(["f"], ["x"])


def test_complete_clauses():
    assert [format_formula(c) for c in complete_clauses(["f"])] == ["f", "!f"]
    two = [format_formula(c) for c in complete_clauses(["f", "g"])]
    assert len(two) == 4 and "f | !g" in two
    for k, interp in enumerate(all_interpretations(["f", "g", "h"])):
        clause = complete_clauses(["f", "g", "h"])[k]
        assert clause == clause_falsified_by(interp)
        falsifiers = [j for j in all_interpretations(["f", "g", "h"]) if not eval_fluent(j, clause)]
        assert falsifiers == [interp]


def test_world_conjunction_pins_interpretation():
    fl = ["f", "g", "h"]
    for interp in all_interpretations(fl):
        phi = world_conjunction(interp)
        assert [j for j in all_interpretations(fl) if eval_fluent(j, phi)] == [interp]


def test_capacity_guard(monkeypatch):
    monkeypatch.setenv("MAPKIT_MAX_FLUENTS", "3")
    check_capacity(3)
    with pytest.raises(CapacityError):
        list(all_interpretations(["a", "b", "c", "d"]))


def test_builders():
    assert conj([]) == TOP and disj([]) == BOT
    assert conj([f]) == f
    assert modal_depth(B("A", C(None, Or(f, B("B", g))))) == 3
    assert atoms(B("A", And(f, g))) == {"f", "g"}
    assert is_fluent_formula(Or(f, Not(g))) and not is_fluent_formula(E(None, f))


def test_format_precedence():
    assert format_formula(And(Or(f, g), f)) == "(f | g) & f"
    assert format_formula(Not(And(f, g))) == "!(f & g)"
    assert format_formula(B("A", Or(f, g))) == "B[A] (f | g)"
    assert format_formula(C(frozenset("BA"), f)) == "C[{A, B}] f"


@given(formulas)
def test_format_parse_round_trip(phi):
    assert parse_formula(format_formula(phi)) == phi


@given(fluent_formulas)
def test_simplify_preserves_truth(phi):
    fl = ["f", "g", "h"]
    s = simplify(phi)
    for interp in all_interpretations(fl):
        assert eval_fluent(interp, s) == eval_fluent(interp, phi)


@given(fluent_formulas, fluent_formulas)
def test_prop_entails_matches_truth_table(a, b):
    fl = ["f", "g", "h"]
    expected = all(
        eval_fluent(i, b) for i in all_interpretations(fl) if eval_fluent(i, a)
    )
    assert prop_entails([a], b, fl) == expected


def test_de_morgan_exhaustive():
    for x, y in itertools.product([f, Not(f), g], repeat=2):
        lhs, rhs = Not(And(x, y)), Or(Not(x), Not(y))
        for i in all_interpretations(["f", "g"]):
            assert eval_fluent(i, lhs) == eval_fluent(i, rhs)
