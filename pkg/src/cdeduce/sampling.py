"""Random microcosms and evolution scripts over a world, for experiments and tests."""

from __future__ import annotations

import random
from dataclasses import replace
from typing import List, Optional, Tuple

from cdeduce.core import Correspondence, Rel, World, token_key
from cdeduce.errors import CausalityError
from cdeduce.microcosm import EXTERNAL, INTERNAL, EvolutionStep, Microcosm, add


def random_chain(world: World, rng: random.Random, length: int) -> Tuple:
    """A random strict chain of up to ``length`` events of ``world``."""
    evs = world.sorted_events()
    rng.shuffle(evs)
    chain: List = []
    for e in evs:
        if len(chain) >= length:
            break
        if all(world.before(x, e) or world.before(e, x) for x in chain):
            chain.append(e)
    members = list(chain)
    chain.sort(key=lambda e: sum(world.before(x, e) for x in members))
    return tuple(chain) if len(chain) > 1 else ()


def random_candidate(world: World, rng: random.Random, weaken: float = 0.3) -> Correspondence:
    """A correspondence that holds in ``world``; ``<`` degrades to ``cr`` with prob. ``weaken``."""
    a, b = rng.sample(world.sorted_events(), 2)
    if world.before(b, a):
        a, b = b, a
    if world.before(a, b):
        return Correspondence(a, b, Rel.CR if rng.random() < weaken else Rel.LT)
    return Correspondence(a, b, Rel.PAR)


def random_microcosm(world: World, rng: random.Random, n_facts: int = 6,
                     chain_length: int = 3, attempts: int = 200) -> Microcosm:
    """A valid microcosm of ``world`` grown by legal additions."""
    m = Microcosm(random_chain(world, rng, chain_length), frozenset(), world)
    added = 0
    for _ in range(attempts):
        if added >= n_facts:
            break
        try:
            m = add(m, random_candidate(world, rng), EXTERNAL)
            added += 1
        except CausalityError:
            continue
    return m


def random_add_script(world: World, m: Microcosm, length: int, rng: random.Random,
                      internal_prob: float = 0.2, attempts: int = 500) -> List[EvolutionStep]:
    """A sequence of ``length`` add steps that is legal from ``m`` in order."""
    steps: List[EvolutionStep] = []
    cur = m
    for _ in range(attempts):
        if len(steps) >= length:
            break
        c = random_candidate(world, rng)
        placement = INTERNAL if c.rel is Rel.LT and rng.random() < internal_prob else EXTERNAL
        try:
            cur = add(cur, c, placement)
        except CausalityError:
            continue
        steps.append(EvolutionStep("add", c, placement))
    return steps


def removal_script(m: Microcosm, length: int, rng: random.Random) -> List[EvolutionStep]:
    """Up to ``length`` remove steps legal from ``m`` in order."""
    from cdeduce.microcosm import remove
    steps: List[EvolutionStep] = []
    cur = m
    while len(steps) < length:
        options = list(cur.facts)
        rng.shuffle(options)
        for c in options:
            try:
                nxt = remove(cur, c)
            except CausalityError:
                continue
            steps.append(EvolutionStep("remove", c))
            cur = nxt
            break
        else:
            break
    return steps


def externalised(m: Microcosm) -> Microcosm:
    """The same facts with the internal chain moved to external ``<`` correspondences.

    Stores exactly the same facts over the same members, so the result is
    analogous to ``m`` while being a structurally different value.
    """
    return replace(m, internal=(), external=m.external | frozenset(m.internal_facts))


def fresh_event(used, prefix: str = "fresh") -> str:
    k = 0
    while f"{prefix}{k}" in used:
        k += 1
    return f"{prefix}{k}"


def sorted_facts(m: Microcosm) -> List[Correspondence]:
    return sorted(m.facts, key=lambda c: (token_key(c.left), token_key(c.right)))


def maybe(rng: Optional[random.Random], seed: int) -> random.Random:
    return rng if rng is not None else random.Random(seed)
