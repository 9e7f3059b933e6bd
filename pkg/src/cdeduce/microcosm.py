"""Partial causal knowledge of one device and its evolution operators.

A :class:`Microcosm` holds an internal chain of events and a set of
external correspondences.  Values are immutable; every operator returns a
new microcosm so that transition systems can branch freely.

The internal chain contributes its consecutive edges as stored ``<``
facts; longer internal comparisons follow by transitivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Tuple

from cdeduce.closure import Closure, chain_between
from cdeduce.core import (Correspondence, EventId, Rel, Verdict, World,
                          satisfies, token_key, world_models)
from cdeduce.errors import (AlreadyDetermined, ChainViolation, DomainError,
                            M4Violation, NoSuchCR, NotInvertible, NotInWorld,
                            NotPresent, VerdictExists, WorldDisagrees)

INTERNAL = "internal"
EXTERNAL = "external"


@dataclass(frozen=True)
class Microcosm:
    internal: Tuple[EventId, ...] = ()
    external: FrozenSet[Correspondence] = frozenset()
    world: Optional[World] = field(default=None, compare=False, repr=False)
    hypotheses: Tuple[Correspondence, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "internal", tuple(self.internal))
        object.__setattr__(self, "external", frozenset(self.external))

    @classmethod
    def build(cls, internal: Iterable[EventId] = (),
              external: Iterable[Correspondence] = (),
              world: Optional[World] = None) -> "Microcosm":
        """Construct and validate; raises on the first violation."""
        m = cls(tuple(internal), frozenset(external), world)
        problems = validate(m)
        if problems:
            raise problems[0].as_error()
        return m

    @cached_property
    def internal_facts(self) -> Tuple[Correspondence, ...]:
        I = self.internal
        return tuple(Correspondence(I[k], I[k + 1], Rel.LT) for k in range(len(I) - 1))

    @cached_property
    def facts(self) -> Tuple[Correspondence, ...]:
        return self.internal_facts + tuple(sorted(self.external, key=Correspondence.sort_key))

    @cached_property
    def events(self) -> FrozenSet[EventId]:
        out = set(self.internal)
        for c in self.external:
            out.update((c.left, c.right))
        return frozenset(out)

    @cached_property
    def closure(self) -> Closure:
        return Closure(self.facts, self.internal, self.hypotheses)

    @cached_property
    def matrix(self):
        from cdeduce.online import DecisionMatrix
        return DecisionMatrix(self)

    def __contains__(self, event: EventId) -> bool:
        return event in self.events

    def __len__(self) -> int:
        return len(self.facts)

    def placement_of(self, c: Correspondence) -> Optional[str]:
        if c in self.external:
            return EXTERNAL
        if c in self.internal_facts:
            return INTERNAL
        return None

    def membership_witness(self, e: EventId) -> FrozenSet[Correspondence]:
        """The first stored fact mentioning ``e`` (empty for a bare chain event)."""
        for f in self.facts:
            if f.mentions(e):
                return frozenset({f})
        return frozenset()

    def without_world(self) -> "Microcosm":
        return replace(self, world=None)

    def __str__(self) -> str:
        parts = []
        if self.internal:
            parts.append("I: " + " < ".join(map(str, self.internal)))
        if self.external:
            parts.append("E: {" + ", ".join(str(c) for c in
                                            sorted(self.external, key=Correspondence.sort_key)) + "}")
        return "(" + "; ".join(parts) + ")" if parts else "(empty)"


def member_event(m: Microcosm, e: EventId) -> bool:
    return e in m.events


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str
    witness: Tuple[EventId, ...] = ()

    def as_error(self):
        from cdeduce.errors import InvalidMicrocosm
        if self.condition == "M4":
            return M4Violation(self.message, self.witness)
        if self.condition == "M2":
            return ChainViolation(self.message, self.witness)
        if self.condition in ("M1", "M3"):
            return NotInWorld(self.message, self.witness)
        return InvalidMicrocosm(self.message, self.witness)


def validate(m: Microcosm) -> List[Violation]:
    """All violated validity conditions (empty list means valid)."""
    out: List[Violation] = []
    w = m.world
    I = m.internal
    if len(set(I)) != len(I):
        out.append(Violation("M2", "internal chain repeats an event", I))
    if w is not None:
        missing = [e for e in I if e not in w]
        if missing:
            out.append(Violation("M1", f"internal events not in world: {missing}", tuple(missing)))
        else:
            for a, b in zip(I, I[1:]):
                if a != b and not world_models(w, a, b, Rel.LT):
                    out.append(Violation("M2", f"world does not order {a} < {b}", (a, b)))
        for c in sorted(m.external, key=Correspondence.sort_key):
            if c.left not in w or c.right not in w or not satisfies(w, c):
                out.append(Violation("M3", f"{c} does not hold in the world", (c.left, c.right)))
    out.extend(_m4_violations(m.internal_facts, m.external))
    seen = {}
    for f in m.facts:
        if f.pair in seen:
            out.append(Violation("DUP", f"{seen[f.pair]} and {f} share a pair", (f.left, f.right)))
        seen[f.pair] = f
    return out


def _m4_violations(internal_facts, external) -> List[Violation]:
    out = []
    for c in sorted(external, key=Correspondence.sort_key):
        others = list(internal_facts) + [f for f in external if f != c]
        for a, b in ((c.left, c.right), (c.right, c.left)):
            chain = chain_between(others, a, b)
            if chain:
                out.append(Violation(
                    "M4", f"{c} is spanned by the chain {' < '.join(map(str, chain))}",
                    tuple(chain)))
                break
    return out


def is_valid(m: Microcosm) -> bool:
    return not validate(m)


# -- evolution ---------------------------------------------------------------

def initially_related(m: Microcosm, a: EventId, b: EventId) -> bool:
    return m.closure.initial(a, b) is not None


def _extend_chain(I: Tuple[EventId, ...], c: Correspondence) -> Tuple[EventId, ...]:
    if c.rel is not Rel.LT:
        raise ChainViolation(f"only < can be placed on the internal chain, got {c}")
    a, b = c.left, c.right
    if not I:
        return (a, b)
    if I[-1] == a and b not in I:
        return I + (b,)
    if I[0] == b and a not in I:
        return (a,) + I
    raise ChainViolation(f"{c} does not extend the chain {' < '.join(map(str, I))}",
                         (a, b))


def _check_m4(new: Microcosm) -> None:
    problems = _m4_violations(new.internal_facts, new.external)
    if problems:
        p = problems[0]
        raise M4Violation(p.message, p.witness)


def _structural_add(m: Microcosm, c: Correspondence, placement: str) -> Microcosm:
    if placement == INTERNAL:
        return replace(m, internal=_extend_chain(m.internal, c))
    if placement != EXTERNAL:
        raise ValueError(f"placement must be internal or external, not {placement!r}")
    return replace(m, external=m.external | {c})


def add(m: Microcosm, c: Correspondence, placement: str = EXTERNAL) -> Microcosm:
    """``m + c``: add a correspondence nothing in ``m`` determines yet."""
    if initially_related(m, c.left, c.right):
        v = m.closure.initial(c.left, c.right)
        raise AlreadyDetermined(f"{c.left} and {c.right} are already related ({v.value})",
                                (c.left, c.right))
    if m.world is not None:
        try:
            ok = satisfies(m.world, c)
        except DomainError:
            ok = False
        if not ok:
            raise NotInWorld(f"{c} does not hold in the world", (c.left, c.right))
    new = _structural_add(m, c, placement)
    _check_m4(new)
    return new


def _stored_cr(m: Microcosm, a: EventId, b: EventId) -> Correspondence:
    c = Correspondence(a, b, Rel.CR)
    if c not in m.external:
        raise NoSuchCR(f"no cr correspondence between {a} and {b}", (a, b))
    return c


def update(m: Microcosm, c: Correspondence) -> Microcosm:
    """``m[a < b]``: replace the stored ``a cr b`` by the directed ``a < b``."""
    if c.rel is not Rel.LT:
        raise DomainError(f"update payload must be <, got {c}")
    old = _stored_cr(m, c.left, c.right)
    if m.world is not None and not world_models(m.world, c.left, c.right, Rel.LT):
        raise WorldDisagrees(f"the world does not order {c}", (c.left, c.right))
    new = replace(m, external=(m.external - {old}) | {c})
    _check_m4(new)
    return new


def remove(m: Microcosm, c: Correspondence) -> Microcosm:
    """Backward step: the ``m'`` with ``add(m', c) == m``."""
    placement = m.placement_of(c)
    if placement is None:
        raise NotPresent(f"{c} is not stored", (c.left, c.right))
    if placement == EXTERNAL:
        prev = replace(m, external=m.external - {c})
    else:
        I = m.internal
        if len(I) == 2:
            prev = replace(m, internal=())
        elif (I[0], I[1]) == (c.left, c.right):
            prev = replace(m, internal=I[1:])
        elif (I[-2], I[-1]) == (c.left, c.right):
            prev = replace(m, internal=I[:-1])
        else:
            raise NotInvertible(f"{c} is an interior edge of the internal chain",
                                (c.left, c.right))
    try:
        again = add(prev, c, placement)
    except Exception as exc:
        raise NotInvertible(f"re-adding {c} after removal fails: {exc}",
                            (c.left, c.right)) from exc
    if again != m:
        raise NotInvertible(f"re-adding {c} does not reproduce the microcosm",
                            (c.left, c.right))
    return prev


def _verdict_on_pair(m: Microcosm, a: EventId, b: EventId) -> Verdict:
    from cdeduce.online import decide
    return decide(m, a, b).verdict


def add_hypothetical(m: Microcosm, c: Correspondence, check_m4: bool = True) -> Microcosm:
    """``m +? c``: assume ``c`` for a pair on which ``m`` has no verdict at all.

    The world is not consulted and the result carries no world reference.
    With ``check_m4=False`` the raw structure is returned even when it
    violates M4, which is what refutation probes need.
    """
    v = _verdict_on_pair(m, c.left, c.right)
    if v is not Verdict.NONE:
        raise VerdictExists(f"{c.left} and {c.right} already have verdict {v.value}",
                            (c.left, c.right))
    new = replace(m, external=m.external | {c}, world=None,
                  hypotheses=m.hypotheses + (c,))
    if check_m4:
        _check_m4(new)
    return new


def update_hypothetical(m: Microcosm, c: Correspondence, check_m4: bool = True) -> Microcosm:
    """``m<a < b>``: hypothesise a direction for a stored ``cr`` pair."""
    if c.rel is not Rel.LT:
        raise DomainError(f"hypothetical update must be <, got {c}")
    old = _stored_cr(m, c.left, c.right)
    new = replace(m, external=(m.external - {old}) | {c}, world=None,
                  hypotheses=m.hypotheses + (c,))
    if check_m4:
        _check_m4(new)
    return new


@dataclass(frozen=True)
class EvolutionStep:
    kind: str
    payload: Correspondence
    placement: str = EXTERNAL

    def __post_init__(self) -> None:
        if self.kind not in ("add", "update", "remove"):
            raise ValueError(f"unknown step kind {self.kind!r}")
        if self.kind == "update" and self.payload.rel is not Rel.LT:
            raise ValueError("update steps carry a directed <")

    def apply(self, m: Microcosm) -> Microcosm:
        if self.kind == "add":
            return add(m, self.payload, self.placement)
        if self.kind == "update":
            return update(m, self.payload)
        return remove(m, self.payload)

    def __str__(self) -> str:
        suffix = f" ({self.placement})" if self.kind == "add" else ""
        return f"{self.kind} {self.payload}{suffix}"


def sorted_events(m: Microcosm) -> List[EventId]:
    return sorted(m.events, key=token_key)
