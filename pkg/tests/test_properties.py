"""Behavioural guarantees of the three step kinds, checked on seeded random
domains with at most 3 fluents, 3 agents and 4 worlds."""

import random

import pytest

from mapkit.kripke import satisfies
from mapkit.logic import Atom, B, Not, Or
from mapkit.randomized import random_formula, random_instance
from mapkit.transition import common, consistency_preserving, effects, frame_of_reference, step

CASES = 500
MAX_TRIES = 20000
FORMULAS_PER_CASE = 6


def qualifying(seed, action, want_preserving):
    """Yield (instance, frame, result) until CASES executable cases are found."""
    rng = random.Random(seed)
    found = 0
    for _ in range(MAX_TRIES):
        inst = random_instance(rng, action)
        D, s = inst.theory, inst.state
        if want_preserving and not consistency_preserving(D, action, s):
            continue
        res = step(D, action, s)
        if not res:
            continue
        assert len(res) == 1
        found += 1
        yield inst, frame_of_reference(D, action, s), res[0], rng
        if found == CASES:
            return
    pytest.fail(f"only {found} qualifying cases in {MAX_TRIES} tries")


def oblivious_preserved(inst, frame, new, rng):
    old = inst.state
    D = inst.theory
    for i in sorted(frame.oblivious):
        for _ in range(FORMULAS_PER_CASE):
            phi = B(i, random_formula(rng, D.agents, D.fluents, depth=3))
            if satisfies(new, phi) != satisfies(old, phi):
                return False
    return True


def test_world_altering_guarantees():
    violations = []
    for inst, frame, new, rng in qualifying(101, "w", False):
        D, old = inst.theory, inst.state
        M, M2 = old.structure, new.structure
        eff = effects(D, "w", M)
        for r in set(M2.worlds) - set(M.worlds):
            _, u = M2.provenance[r]
            touched = {lit.fluent for lit in eff[u]}
            for lit in eff[u]:
                if M2.valuation[r][lit.fluent] != lit.positive:
                    violations.append(("effect", inst))
            for f in set(D.fluents) - touched:
                if M2.valuation[r][f] != M.valuation[u][f]:
                    violations.append(("inertia", inst))
        if not oblivious_preserved(inst, frame, new, rng):
            violations.append(("oblivious", inst))
    assert violations == []


def test_world_altering_step_is_single_valued():
    rng = random.Random(102)
    executable = 0
    while executable < CASES:
        inst = random_instance(rng, "w")
        res = step(inst.theory, "w", inst.state)
        if satisfies(inst.state, inst.theory.executability("w")):
            executable += 1
            assert len(res) == 1
        else:
            assert res == ()


def test_sensing_guarantees():
    violations = []
    for inst, frame, new, rng in qualifying(103, "s", True):
        D, old = inst.theory, inst.state
        for f in map(Atom, D.sensed("s")):
            lit = f if satisfies(old, f) else Not(f)
            if not satisfies(new, common(frame.full, lit)):
                violations.append(("full", inst))
            settled = Or(common(frame.full, f), common(frame.full, Not(f)))
            if not satisfies(new, common(frame.partial, settled)):
                violations.append(("partial", inst))
        if not oblivious_preserved(inst, frame, new, rng):
            violations.append(("oblivious", inst))
    assert violations == []


def test_announcement_guarantees():
    violations = []
    for inst, frame, new, rng in qualifying(104, "n", True):
        phi = inst.theory.announced("n")
        if not satisfies(new, common(frame.full, phi)):
            violations.append(("full", inst))
        settled = Or(common(frame.full, phi), common(frame.full, Not(phi)))
        if not satisfies(new, common(frame.partial, settled)):
            violations.append(("partial", inst))
        if not oblivious_preserved(inst, frame, new, rng):
            violations.append(("oblivious", inst))
    assert violations == []


def test_sensing_without_preservation_can_break_full_observers():
    # the guarantee genuinely needs its precondition
    rng = random.Random(105)
    for _ in range(MAX_TRIES):
        inst = random_instance(rng, "s")
        D, old = inst.theory, inst.state
        res = step(D, "s", old)
        if not res or consistency_preserving(D, "s", old):
            continue
        frame = frame_of_reference(D, "s", old)
        f = Atom(D.sensed("s")[0])
        lit = f if satisfies(old, f) else Not(f)
        for i in sorted(frame.full):
            if not satisfies(res[0], B(i, lit)) or satisfies(res[0], B(i, Not(lit))):
                break
        else:
            continue
        return
    pytest.fail("no counterexample found")
