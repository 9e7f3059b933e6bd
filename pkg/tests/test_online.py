import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdeduce.core import Rel, Verdict, World, cr, generate_world, hb, par
from cdeduce.derivation import contains
from cdeduce.errors import DomainError, InconsistentClosure
from cdeduce.microcosm import Microcosm, add
from cdeduce.online import (decide, decide_after_add, decide_after_update, initial_closure,
                            initially_derivable, verdict)
from cdeduce.sampling import random_add_script, random_microcosm

from oracles import initial_judgements, online_verdicts, stored_facts


def sample(seed, max_events=8, max_facts=8):
    rng = random.Random(seed)
    w = generate_world(rng.randint(2, max_events), rng.random(), seed)
    return w, random_microcosm(w, rng, rng.randint(0, max_facts), rng.randint(0, 4)), rng


def test_transitive_closure():
    cl = initial_closure(Microcosm.build((), [hb("e1", "e2"), hb("e2", "e3")]))
    rel, tree = cl["e1", "e3"]
    assert rel is Rel.LT and tree.rule == "In-Tr"


def test_cr_symmetry():
    cl = initial_closure(Microcosm.build((), [cr("e1", "e2")]))
    assert cl["e2", "e1"][1].rule == "CR-Sym"


def test_no_verdict_between_independent_branches():
    m = Microcosm.build((), [par("e1", "e2"), hb("e2", "e3")])
    d = decide(m, "e3", "e1")
    assert d.verdict is Verdict.NONE and d.tree is None


def test_unknown_through_shared_concurrent_neighbour():
    m = Microcosm.build((), [par("e1", "e2"), par("e2", "e3")])
    d = decide(m, "e1", "e3")
    assert d.verdict is Verdict.UNKNOWN
    assert d.tree.rule == "Un-1"
    assert [p.rule for p in d.tree.premises] == ["In-OK", "In-OK"]


def test_outsider_is_unknown():
    m = Microcosm.build((), [par("e1", "e2")])
    assert decide(m, "x", "e1").tree.rule == "Un-4"
    assert decide(m, "e1", "x").tree.rule == "Un-Sym"
    assert verdict(Microcosm(), "a", "b") is Verdict.UNKNOWN


def test_disconnected_members_are_unknown():
    m = Microcosm.build((), [par("a", "b"), par("c", "d")])
    d = decide(m, "a", "c")
    assert d.verdict is Verdict.UNKNOWN and d.tree.rule == "Un-3"


def test_unknown_propagates_along_known_relation():
    # a < b, b is unknown to c via Un-3, so a ? c by Un-2
    m = Microcosm.build((), [hb("a", "b"), par("c", "d"), par("x", "y")])
    assert decide(m, "b", "c").tree.rule == "Un-3"
    assert verdict(m, "a", "c") is Verdict.UNKNOWN


def test_reflexive_query():
    with pytest.raises(DomainError):
        decide(Microcosm(), "a", "a")
    with pytest.raises(DomainError):
        initially_derivable(Microcosm(), "a", "a")


def test_initially_derivable_orientation():
    m = Microcosm.build((), [hb("e1", "e2")])
    assert initially_derivable(m, "e1", "e2") is Verdict.HB
    assert initially_derivable(m, "e2", "e1") is Verdict.HB_INV
    assert initially_derivable(Microcosm.build((), [cr("e1", "e2")]), "e2", "e1") is Verdict.CAUSAL
    m = Microcosm.build((), [par("e1", "e2"), hb("e2", "e3")])
    assert initially_derivable(m, "e1", "e3") is None


def test_inconsistent_closure_detected():
    m = Microcosm((), {hb("a", "b"), hb("b", "c"), par("a", "c")})
    with pytest.raises(InconsistentClosure):
        decide(m, "a", "c")


def test_strengthening_after_add():
    w = World.from_edges(["e1", "e2", "e3", "e4"], [])
    m = Microcosm.build((), [par("e1", "e3"), par("e2", "e4")], w)
    assert verdict(m, "e1", "e2") is Verdict.UNKNOWN
    assert decide_after_add(m, par("e1", "e2"), "e1", "e2").verdict is Verdict.CONCURRENT


def test_weakening_after_add():
    w = World.from_edges(["e1", "e2", "e3", "e4"], [("e1", "e2")])
    m = Microcosm.build((), [hb("e1", "e2")], w)
    assert decide_after_add(m, par("e3", "e4"), "e1", "e2").verdict is Verdict.HB


def test_update_contracts():
    w = World.from_edges(["e1", "e2", "e3", "e4"], [("e1", "e2"), ("e2", "e3")])
    m = Microcosm.build((), [cr("e1", "e2"), par("e3", "e4")])
    assert decide_after_update(m, hb("e1", "e2"), "e1", "e2").verdict is Verdict.HB
    assert decide_after_update(m, hb("e1", "e2"), "e3", "e4").verdict is Verdict.CONCURRENT
    m = Microcosm.build((), [cr("e1", "e2"), hb("e2", "e3")], w)
    assert decide_after_update(m, hb("e1", "e2"), "e1", "e3").verdict is Verdict.HB


def test_trace_format():
    m = Microcosm.build((), [par("e1", "e2"), par("e2", "e3")])
    assert decide(m, "e1", "e3").tree.format().splitlines() == [
        "Un-1: e1 ? e3  [no initial e1 _ e3]",
        "  In-OK: e1 par e2",
        "    Init: e1 par e2",
        "  In-OK: e2 par e3",
        "    Init: e2 par e3",
    ]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_matches_naive_oracle(seed):
    _, m, _ = sample(seed)
    expected = online_verdicts(m.internal, m.external)
    got = {k: v.value for k, v in m.matrix.table().items()}
    assert got == expected


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_initial_closure_matches_oracle(seed):
    _, m, _ = sample(seed)
    j = initial_judgements(stored_facts(m.internal, m.external))
    got = {(a, rel.value, b) for (a, b), (rel, _) in initial_closure(m).items()}
    for a, r, b in got:
        assert (a, r, b) in j
    for a, r, b in j:
        assert initially_derivable(m, a, b) is not None


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_matrix_symmetry_and_single_verdicts(seed):
    _, m, _ = sample(seed, 12, 12)
    t = m.matrix.table()
    for (a, b), v in t.items():
        assert t[b, a] is v.inverse()


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_positive_verdicts_are_initial(seed):
    _, m, _ = sample(seed, 10, 10)
    for (a, b), v in m.matrix.table().items():
        if v not in (Verdict.UNKNOWN, Verdict.NONE):
            assert initially_derivable(m, a, b) is v


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_derivations_without_the_new_fact_replay(seed):
    w, m, rng = sample(seed, 8, 6)
    for step in random_add_script(w, m, 3, rng):
        new = step.apply(m)
        evs = sorted(new.events | {"zz"})
        for a in evs:
            for b in evs:
                if a == b:
                    continue
                d = decide(new, a, b)
                if d.tree is not None and not contains(d.tree, step.payload):
                    assert verdict(m, a, b) is d.verdict
        m = new


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_evolution_contracts_hold(seed):
    w, m, rng = sample(seed, 8, 6)
    for step in random_add_script(w, m, 3, rng):
        decide_after_add(m, step.payload, step.payload.left, step.payload.right,
                         step.placement)
        m = add(m, step.payload, step.placement)
    for c in [f for f in m.external if f.rel is Rel.CR]:
        a, b = (c.left, c.right) if w.before(c.left, c.right) else (c.right, c.left)
        try:
            decide_after_update(m, hb(a, b), a, b)
        except Exception as exc:
            assert type(exc).__name__ == "M4Violation"
