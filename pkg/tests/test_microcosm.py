import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdeduce.core import Rel, World, cr, generate_world, hb, par
from cdeduce.errors import (AlreadyDetermined, ChainViolation, HypothesisUndefined,
                            M4Violation, NoSuchCR, NotInvertible, NotInWorld, NotPresent,
                            VerdictExists, WorldDisagrees)
from cdeduce.microcosm import (EXTERNAL, INTERNAL, EvolutionStep, Microcosm, add,
                               add_hypothetical, is_valid, member_event, remove, update,
                               update_hypothetical, validate)
from cdeduce.sampling import random_add_script, random_microcosm

from oracles import initial_judgements, stored_facts


def chain(*evs):
    return World.from_edges(evs, list(zip(evs, evs[1:])))


LINE4 = World.from_edges(["e1p", "e1", "e2", "e2p"],
                        [("e1p", "e1"), ("e1", "e2"), ("e2", "e2p")])


def test_membership():
    assert member_event(Microcosm(("e1", "e2")), "e1")
    assert member_event(Microcosm((), {cr("e1", "e2")}), "e2")
    assert not member_event(Microcosm(), "e1")


def test_external_fact_spanned_by_internal_chain():
    m = Microcosm(("e1", "e2", "e3"), {hb("e1", "e2")})
    v = validate(m)[0]
    assert v.condition == "M4"
    assert v.witness == ("e1", "e2")


def test_chain_of_cr_facts_is_fine():
    m = Microcosm((), {cr("e1", "e2"), cr("e2", "e3")})
    assert is_valid(m)
    assert is_valid(add(m, hb("e3", "e4")))


def test_validate_checks_world():
    w = chain("e1", "e2", "e3")
    assert validate(Microcosm(("e2", "e1"), world=w))[0].condition == "M2"
    assert validate(Microcosm(("e1", "x"), world=w))[0].condition == "M1"
    assert validate(Microcosm((), {par("e1", "e3")}, w))[0].condition == "M3"


def test_guarded_addition_rejected_with_chain():
    m = Microcosm.build((), [hb("e1p", "e1"), hb("e2", "e2p"), cr("e1p", "e2p")], LINE4)
    with pytest.raises(M4Violation) as info:
        add(m, hb("e1", "e2"))
    assert info.value.witness == ("e1p", "e1", "e2", "e2p")


def test_guarded_update_rejected_with_chain():
    m = Microcosm.build((), [hb("e1p", "e1"), hb("e2", "e2p"), cr("e1", "e2"),
                             cr("e1p", "e2p")], LINE4)
    with pytest.raises(M4Violation) as info:
        update(m, hb("e1", "e2"))
    assert info.value.witness == ("e1p", "e1", "e2", "e2p")


def test_m4_witness_chains_replay():
    m = Microcosm((), {hb("a", "b"), hb("b", "c"), hb("c", "d"), cr("a", "d")})
    (v,) = validate(m)
    facts = {(f.left, f.right) for f in m.facts if f.rel is Rel.LT}
    assert all(step in facts for step in zip(v.witness, v.witness[1:]))
    assert (v.witness[0], v.witness[-1]) == ("a", "d")


def test_add_to_empty():
    m = add(Microcosm(), par("e1", "e2"))
    assert m.external == {par("e1", "e2")}


def test_add_already_determined_by_transitivity():
    m = Microcosm.build(("e1", "e3", "e2"))
    with pytest.raises(AlreadyDetermined):
        add(m, hb("e1", "e2"))


def test_add_checks_world_and_chain():
    w = chain("e1", "e2", "e3")
    m = Microcosm.build(("e1", "e2"), world=w)
    with pytest.raises(NotInWorld):
        add(m, par("e1", "e3"))
    with pytest.raises(ChainViolation):
        add(m, hb("e1", "e3"), INTERNAL)
    assert add(m, hb("e2", "e3"), INTERNAL).internal == ("e1", "e2", "e3")
    assert add(m, cr("e1", "e3")).external == {cr("e1", "e3")}


def test_add_is_persistent():
    m = Microcosm.build((), [par("a", "b")])
    n = add(m, par("b", "c"))
    assert m.external == {par("a", "b")}
    assert len(n) == len(m) + 1


def test_update_replaces_cr():
    w = chain("e1", "e2")
    m = Microcosm.build((), [cr("e1", "e2")], w)
    n = update(m, hb("e1", "e2"))
    assert n.external == {hb("e1", "e2")}
    assert len(n) == len(m)


def test_update_errors():
    w = chain("e1", "e2")
    with pytest.raises(NoSuchCR):
        update(Microcosm((), {par("e1", "e2")}), hb("e1", "e2"))
    with pytest.raises(WorldDisagrees):
        update(Microcosm.build((), [cr("e1", "e2")], w), hb("e2", "e1"))


def test_remove_independent_fact():
    m = Microcosm.build((), [hb("e1", "e2"), hb("e2", "e3"), par("e1", "e4")])
    assert remove(m, par("e1", "e4")) == Microcosm((), {hb("e1", "e2"), hb("e2", "e3")})


def test_remove_end_of_chain_then_readd():
    m = Microcosm.build((), [hb("e1", "e2"), hb("e2", "e3")])
    prev = remove(m, hb("e2", "e3"))
    assert prev.external == {hb("e1", "e2")}
    assert add(prev, hb("e2", "e3")) == m


def test_remove_internal_edges():
    m = Microcosm.build(("a", "b", "c"))
    assert remove(m, hb("a", "b")).internal == ("b", "c")
    assert remove(m, hb("b", "c")).internal == ("a", "b")
    with pytest.raises(NotInvertible):
        remove(Microcosm.build(("a", "b", "c", "d")), hb("b", "c"))
    assert remove(Microcosm.build(("a", "b")), hb("a", "b")) == Microcosm()


def test_remove_missing():
    with pytest.raises(NotPresent):
        remove(Microcosm.build((), [par("a", "b")]), par("a", "c"))


def test_derived_fact_cannot_be_removed():
    # a < c is only derived; storing it next to a < b < c would break M4
    m = Microcosm((), {hb("a", "b"), hb("b", "c"), par("x", "y")})
    with pytest.raises(NotPresent):
        remove(m, hb("a", "c"))


def test_hypothetical_addition():
    m = Microcosm.build((), [par("e1", "e2"), hb("e2", "e3")])
    h = add_hypothetical(m, hb("e3", "e1"), check_m4=False)
    assert h.world is None and h.hypotheses == (hb("e3", "e1"),)
    assert add_hypothetical(m, hb("e1", "e3")).external >= m.external
    with pytest.raises(VerdictExists):
        add_hypothetical(m, par("e1", "e2"))
    q = Microcosm.build((), [par("a", "b"), par("c", "d")])
    with pytest.raises(VerdictExists):
        add_hypothetical(q, par("a", "c"))


def test_hypothetical_update():
    m = Microcosm.build((), [par("e1", "e2"), hb("e2", "e3"), cr("e3", "e1")])
    h = update_hypothetical(m, hb("e3", "e1"), check_m4=False)
    assert hb("e3", "e1") in h.external and cr("e1", "e3") not in h.external
    assert update_hypothetical(m, hb("e1", "e3")).external >= {hb("e1", "e3")}
    with pytest.raises(NoSuchCR):
        update_hypothetical(m, hb("e1", "e2"))


def test_evolution_step_kinds():
    with pytest.raises(ValueError):
        EvolutionStep("update", par("a", "b"))
    with pytest.raises(ValueError):
        EvolutionStep("merge", par("a", "b"))
    assert str(EvolutionStep("add", hb("a", "b"), INTERNAL)) == "add a < b (internal)"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_evolution_keeps_validity_and_counts(seed):
    rng = random.Random(seed)
    w = generate_world(rng.randint(3, 9), rng.random(), seed)
    m = random_microcosm(w, rng, rng.randint(0, 6), rng.randint(0, 4))
    assert is_valid(m)
    for step in random_add_script(w, m, 4, rng):
        n = step.apply(m)
        assert is_valid(n) and len(n) == len(m) + 1
        back = remove(n, step.payload)
        assert back == m
        m = n
    for c in [f for f in m.external if f.rel is Rel.CR]:
        a, b = (c.left, c.right) if w.before(c.left, c.right) else (c.right, c.left)
        try:
            n = update(m, hb(a, b))
        except M4Violation:
            continue
        assert is_valid(n) and len(n) == len(m)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_add_precondition_matches_closure_oracle(seed):
    rng = random.Random(seed)
    w = generate_world(rng.randint(3, 7), rng.random(), seed)
    m = random_microcosm(w, rng, rng.randint(0, 6), rng.randint(0, 3))
    j = initial_judgements(stored_facts(m.internal, m.external))
    for c in w.true_correspondences():
        derived = any({x, y} == {c.left, c.right} for x, _, y in j)
        if derived:
            with pytest.raises(AlreadyDetermined):
                add(m, c)
        else:
            try:
                add(m, c)
            except M4Violation:
                pass


def test_hypothesis_error_wrapping():
    from cdeduce.offline import refute_by_addition, refute_by_update
    m = Microcosm.build((), [hb("a", "b")])
    with pytest.raises(HypothesisUndefined):
        refute_by_addition(m, par("a", "b"))
    with pytest.raises(HypothesisUndefined):
        refute_by_update(m, hb("a", "b"))


def test_placement_must_be_known():
    with pytest.raises(ValueError):
        add(Microcosm(), hb("a", "b"), "sideways")
    assert EXTERNAL == "external"
