"""Events, relation vocabularies, correspondences and the ground-truth world.

A :class:`World` is a finite strict poset of events.  Concurrency is not
stored: two distinct events are concurrent exactly when neither happens
before the other, which gives the symmetric, irreflexive relation and the
exclusive trichotomy required of a world of events.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Hashable, Iterable, Iterator, List, Tuple

from cdeduce.errors import DomainError

EventId = Hashable


def token_key(token: EventId) -> Tuple[str, object]:
    """Sort key that keeps mixed int/str tokens comparable."""
    if isinstance(token, (int, str)):
        return (type(token).__name__, token)
    return (type(token).__name__, repr(token))


class Rel(str, Enum):
    """Relation tokens.  ``LT`` and ``PAR`` are the accurate relations."""

    LT = "<"
    PAR = "par"
    CR = "cr"
    UNKNOWN = "?"

    @property
    def accurate(self) -> bool:
        return self in (Rel.LT, Rel.PAR)

    @property
    def symmetric(self) -> bool:
        return self is not Rel.LT

    @classmethod
    def parse(cls, token: str) -> "Rel":
        aliases = {"<": cls.LT, "par": cls.PAR, "||": cls.PAR, "∥": cls.PAR,
                   "cr": cls.CR, "<>": cls.CR, "?": cls.UNKNOWN}
        try:
            return aliases[token]
        except KeyError:
            raise ValueError(f"unknown relation token {token!r}") from None


ACCURATE = frozenset({Rel.LT, Rel.PAR})
CORRESPONDENCE_RELS = frozenset({Rel.LT, Rel.PAR, Rel.CR})


class Verdict(str, Enum):
    """Outcome of querying an ordered pair ``(a, b)``."""

    HB = "<"
    HB_INV = ">"
    CONCURRENT = "par"
    CAUSAL = "cr"
    UNKNOWN = "?"
    NONE = "none"

    @classmethod
    def from_rel(cls, rel: Rel) -> "Verdict":
        return {Rel.LT: cls.HB, Rel.PAR: cls.CONCURRENT,
                Rel.CR: cls.CAUSAL, Rel.UNKNOWN: cls.UNKNOWN}[rel]

    def inverse(self) -> "Verdict":
        if self is Verdict.HB:
            return Verdict.HB_INV
        if self is Verdict.HB_INV:
            return Verdict.HB
        return self


@dataclass(frozen=True)
class Correspondence:
    """A relational fact ``left rel right`` between two distinct events.

    Symmetric relations are stored with the smaller token on the left so
    that set membership does not depend on orientation.
    """

    left: EventId
    right: EventId
    rel: Rel

    def __post_init__(self) -> None:
        rel = self.rel if isinstance(self.rel, Rel) else Rel.parse(self.rel)
        if rel not in CORRESPONDENCE_RELS:
            raise ValueError(f"{rel.value!r} cannot be stored as a correspondence")
        object.__setattr__(self, "rel", rel)
        if self.left == self.right:
            raise DomainError(f"reflexive correspondence on {self.left!r}")
        if rel.symmetric and token_key(self.right) < token_key(self.left):
            left, right = self.right, self.left
            object.__setattr__(self, "left", left)
            object.__setattr__(self, "right", right)

    @property
    def pair(self) -> FrozenSet[EventId]:
        return frozenset((self.left, self.right))

    def mentions(self, event: EventId) -> bool:
        return event == self.left or event == self.right

    def sort_key(self) -> tuple:
        return (token_key(self.left), token_key(self.right), self.rel.value)

    def __str__(self) -> str:
        return f"{self.left} {self.rel.value} {self.right}"


def hb(a: EventId, b: EventId) -> Correspondence:
    return Correspondence(a, b, Rel.LT)


def par(a: EventId, b: EventId) -> Correspondence:
    return Correspondence(a, b, Rel.PAR)


def cr(a: EventId, b: EventId) -> Correspondence:
    return Correspondence(a, b, Rel.CR)


@dataclass(frozen=True)
class World:
    """Finite ground-truth history: events plus a transitively closed order."""

    events: FrozenSet[EventId]
    order: FrozenSet[Tuple[EventId, EventId]]
    _succ: Dict[EventId, FrozenSet[EventId]] = field(
        default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        succ: Dict[EventId, set] = {e: set() for e in self.events}
        for a, b in self.order:
            if a not in succ or b not in succ:
                raise DomainError(f"order mentions unknown event in {(a, b)!r}")
            succ[a].add(b)
        object.__setattr__(self, "_succ", {e: frozenset(s) for e, s in succ.items()})

    @classmethod
    def from_edges(cls, events: Iterable[EventId],
                   edges: Iterable[Tuple[EventId, EventId]]) -> "World":
        """Build a world from happens-before edges, taking their transitive closure."""
        events = frozenset(events)
        adj: Dict[EventId, List[EventId]] = {e: [] for e in events}
        for a, b in edges:
            if a not in adj or b not in adj:
                raise DomainError(f"edge {(a, b)!r} mentions an undeclared event")
            adj[a].append(b)
        order = set()
        for src in events:
            stack = list(adj[src])
            seen = set()
            while stack:
                e = stack.pop()
                if e in seen:
                    continue
                seen.add(e)
                stack.extend(adj[e])
            if src in seen:
                raise DomainError(f"happens-before cycle through {src!r}")
            order.update((src, e) for e in seen)
        return cls(events, frozenset(order))

    def __contains__(self, event: EventId) -> bool:
        return event in self._succ

    def sorted_events(self) -> List[EventId]:
        return sorted(self.events, key=token_key)

    def _check(self, a: EventId, b: EventId) -> None:
        if a == b:
            raise DomainError(f"reflexive query on {a!r}")
        for e in (a, b):
            if e not in self._succ:
                raise DomainError(f"event {e!r} is not in the world")

    def before(self, a: EventId, b: EventId) -> bool:
        return b in self._succ[a]

    def relation(self, a: EventId, b: EventId) -> Verdict:
        """The unique accurate verdict on ``(a, b)``: HB, HB_INV or CONCURRENT."""
        self._check(a, b)
        if self.before(a, b):
            return Verdict.HB
        if self.before(b, a):
            return Verdict.HB_INV
        return Verdict.CONCURRENT

    def pairs(self) -> Iterator[Tuple[EventId, EventId]]:
        evs = self.sorted_events()
        for a in evs:
            for b in evs:
                if a != b:
                    yield a, b

    def true_correspondences(self) -> List[Correspondence]:
        """Every correspondence the world satisfies under the starred judgement."""
        out = []
        evs = self.sorted_events()
        for i, a in enumerate(evs):
            for b in evs[i + 1:]:
                if self.before(a, b):
                    out += [hb(a, b), cr(a, b)]
                elif self.before(b, a):
                    out += [hb(b, a), cr(a, b)]
                else:
                    out.append(par(a, b))
        return out

    def covering_edges(self) -> List[Tuple[EventId, EventId]]:
        """Transitive reduction of the order, sorted by token."""
        edges = []
        for a, b in self.order:
            if not any(b in self._succ[m] for m in self._succ[a]):
                edges.append((a, b))
        return sorted(edges, key=lambda p: (token_key(p[0]), token_key(p[1])))


def world_models(w: World, a: EventId, b: EventId, r: Rel) -> bool:
    """True iff the accurate relation ``r`` holds from ``a`` to ``b`` in ``w``."""
    r = Rel(r)
    if r not in ACCURATE:
        raise DomainError(f"{r.value!r} is not an accurate relation")
    v = w.relation(a, b)
    return (r is Rel.LT and v is Verdict.HB) or (r is Rel.PAR and v is Verdict.CONCURRENT)


def world_models_star(w: World, a: EventId, b: EventId, r: Rel) -> bool:
    """Like :func:`world_models` but also accepts ``cr`` for either direction of ``<``."""
    r = Rel(r)
    if r is Rel.CR:
        return w.relation(a, b) in (Verdict.HB, Verdict.HB_INV)
    return world_models(w, a, b, r)


def satisfies(w: World, c: Correspondence) -> bool:
    return world_models_star(w, c.left, c.right, c.rel)


def generate_world(n: int, density: float, seed: int) -> World:
    """Random world over events ``e1..en``.

    Events are placed in a random linear extension and each forward pair
    receives an edge with probability ``density``; the order is the
    transitive closure of those edges.
    """
    if n < 1:
        raise ValueError("a world needs at least one event")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = random.Random(seed)
    events = [f"e{i}" for i in range(1, n + 1)]
    perm = events[:]
    rng.shuffle(perm)
    edges = [(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n)
             if rng.random() < density]
    return World.from_edges(events, edges)


def dump_world(w: World) -> str:
    lines = [f"event {e}" for e in w.sorted_events()]
    lines += [f"hb {a} {b}" for a, b in w.covering_edges()]
    return "\n".join(lines) + "\n"


def load_world(text: str) -> World:
    events, edges = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "event" and len(parts) == 2:
            events.append(parts[1])
        elif parts[0] == "hb" and len(parts) == 3:
            edges.append((parts[1], parts[2]))
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw.strip()!r}")
    return World.from_edges(events, edges)
