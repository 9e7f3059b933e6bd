"""Online decision making: initial judgements plus the unknown-relation rules.

The engine is stratified.  Initial judgements come first (see
:mod:`cdeduce.closure`).  Pairs without an initial judgement may then be
judged unknown (``?``):

* Un-3 and the ``par``/``cr`` instances of Un-1 are evaluated against the
  initial judgements only and seed the ``?`` relation;
* the ``?`` instance of Un-1 and Un-2 are iterated to a fixpoint, each
  round reading only the previous round's ``?`` set, so every recorded
  provenance points at strictly earlier facts and trees are well founded;
* Un-4 answers every pair that leaves the microcosm.

Intermediate events of Un-1/2/3 range over members of the microcosm.
Everything is kept as one bitmask row per event, so answering all pairs
costs a quadratic number of word operations for microcosms up to a few
hundred events.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from cdeduce.closure import bits
from cdeduce.core import Correspondence, EventId, Rel, Verdict
from cdeduce.derivation import DerivationTree, Judgement
from cdeduce.errors import ContractViolation, DomainError, InconsistentClosure
from cdeduce.microcosm import EXTERNAL, Microcosm, add, update


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class DecisionMatrix:
    """Memoised verdicts for every ordered pair of a microcosm's members.

    Cells hold either an initial relation or the provenance of a ``?``
    judgement: ``("Un-1", z, rel)``, ``("Un-2", z)``, ``("Un-3",)`` or
    ``("Un-Sym",)``.  Trees are rebuilt on demand from provenance.
    """

    def __init__(self, m: Microcosm) -> None:
        self.m = m
        cl = self.closure = m.closure
        bad = cl.conflicts()
        if bad:
            a, b, r1, r2 = bad[0]
            raise InconsistentClosure(
                f"initial closure gives both {r1.value} and {r2.value} on ({a}, {b})", (a, b))
        n = cl.n
        self.rounds = 0
        unk = [0] * n
        prov: Dict[Tuple[int, int], tuple] = {}
        rel = cl.related
        for i in range(n):
            for j in range(n):
                if i == j or rel[i] >> j & 1:
                    continue
                mid = ~((1 << i) | (1 << j))
                if cl.par[i] & cl.par[j] & mid:
                    prov[i, j] = ("Un-1", _lowest(cl.par[i] & cl.par[j] & mid), Rel.PAR)
                elif cl.cr[i] & cl.cr[j] & mid:
                    prov[i, j] = ("Un-1", _lowest(cl.cr[i] & cl.cr[j] & mid), Rel.CR)
                elif not (rel[i] & rel[j] & mid):
                    prov[i, j] = ("Un-3",)
                else:
                    continue
                unk[i] |= 1 << j
        out = [cl.lt[i] | cl.par[i] | cl.cr[i] for i in range(n)]
        while True:
            snap = unk[:]
            fresh = {}
            for i in range(n):
                for j in range(n):
                    if i == j or rel[i] >> j & 1 or snap[i] >> j & 1:
                        continue
                    mid = ~((1 << i) | (1 << j))
                    if snap[i] & snap[j] & mid:
                        fresh[i, j] = ("Un-1", _lowest(snap[i] & snap[j] & mid), Rel.UNKNOWN)
                    elif out[i] & snap[j] & mid:
                        fresh[i, j] = ("Un-2", _lowest(out[i] & snap[j] & mid))
            if not fresh:
                break
            self.rounds += 1
            for (i, j), p in list(fresh.items()):
                if (j, i) not in fresh:
                    fresh[j, i] = ("Un-Sym",)
            for (i, j), p in fresh.items():
                prov[i, j] = p
                unk[i] |= 1 << j
        self.unknown = unk
        self.provenance = prov

    # -- verdicts ------------------------------------------------------------

    def verdict(self, a: EventId, b: EventId) -> Verdict:
        if a == b:
            raise DomainError(f"reflexive query on {a!r}")
        idx = self.closure.index
        if a not in idx or b not in idx:
            return Verdict.UNKNOWN
        v = self.closure.initial(a, b)
        if v is not None:
            return v
        if self.unknown[idx[a]] >> idx[b] & 1:
            return Verdict.UNKNOWN
        return Verdict.NONE

    def table(self) -> Dict[Tuple[EventId, EventId], Verdict]:
        evs = self.closure.events
        return {(a, b): self.verdict(a, b) for a in evs for b in evs if a != b}

    # -- trees ---------------------------------------------------------------

    def tree(self, a: EventId, b: EventId) -> Optional[DerivationTree]:
        v = self.verdict(a, b)
        cl = self.closure
        if a not in cl.index:
            return _un4(a, b)
        if b not in cl.index:
            return DerivationTree("Un-Sym", Judgement(a, Rel.UNKNOWN, b), (_un4(b, a),))
        if v is Verdict.NONE:
            return None
        if v is Verdict.UNKNOWN:
            return self._unknown_tree(cl.index[a], cl.index[b])
        return self._in_ok(a, b, v)

    def _in_ok(self, a, b, v: Verdict) -> DerivationTree:
        cl = self.closure
        if v is Verdict.HB_INV:
            a, b, v = b, a, Verdict.HB
        rel = {Verdict.HB: Rel.LT, Verdict.CONCURRENT: Rel.PAR, Verdict.CAUSAL: Rel.CR}[v]
        return DerivationTree("In-OK", Judgement(a, rel, b), (cl.tree(a, rel, b),))

    def _premise(self, i: int, j: int, rel: Rel) -> DerivationTree:
        if rel is Rel.UNKNOWN:
            return self._unknown_tree(i, j)
        a, b = self.closure.events[i], self.closure.events[j]
        return DerivationTree("In-OK", Judgement(a, rel, b), (self.closure.tree(a, rel, b),))

    def _unknown_tree(self, i: int, j: int) -> DerivationTree:
        ev = self.closure.events
        a, b = ev[i], ev[j]
        concl = Judgement(a, Rel.UNKNOWN, b)
        p = self.provenance[i, j]
        no_init = f"no initial {a} _ {b}"
        if p[0] == "Un-Sym":
            return DerivationTree("Un-Sym", concl, (self._unknown_tree(j, i),))
        if p[0] == "Un-3":
            return DerivationTree("Un-3", concl, side=(no_init, "no intermediate event"))
        z = p[1]
        wit = self.m.membership_witness(ev[z])
        if p[0] == "Un-1":
            rel = p[2]
            return DerivationTree("Un-1", concl, (self._premise(i, z, rel), self._premise(z, j, rel)),
                                  side=(no_init,), witnesses=wit)
        cl = self.closure
        rel = Rel.LT if cl.lt[i] >> z & 1 else Rel.PAR if cl.par[i] >> z & 1 else Rel.CR
        return DerivationTree("Un-2", concl, (self._premise(i, z, rel), self._unknown_tree(z, j)),
                              side=(no_init,), witnesses=wit)


def _un4(a, b) -> DerivationTree:
    return DerivationTree("Un-4", Judgement(a, Rel.UNKNOWN, b), side=(f"{a} not in M",))


@dataclass(frozen=True)
class Decision:
    a: EventId
    b: EventId
    verdict: Verdict
    tree: Optional[DerivationTree]

    def __str__(self) -> str:
        return f"{self.a} {self.verdict.value} {self.b}"


def decide(m: Microcosm, a: EventId, b: EventId) -> Decision:
    """Online verdict on ``(a, b)`` with its derivation (``None`` for no verdict)."""
    mat = m.matrix
    v = mat.verdict(a, b)
    return Decision(a, b, v, mat.tree(a, b))


def verdict(m: Microcosm, a: EventId, b: EventId) -> Verdict:
    return m.matrix.verdict(a, b)


def initially_derivable(m: Microcosm, a: EventId, b: EventId) -> Optional[Verdict]:
    if a == b:
        raise DomainError(f"reflexive query on {a!r}")
    return m.closure.initial(a, b)


def initial_closure(m: Microcosm) -> Dict[Tuple[EventId, EventId], Tuple[Rel, DerivationTree]]:
    """Every initial judgement ``(a, b) -> (rel, tree)`` in its derived orientation."""
    cl = m.closure
    bad = cl.conflicts()
    if bad:
        a, b, r1, r2 = bad[0]
        raise InconsistentClosure(f"initial closure gives {r1.value} and {r2.value} on ({a}, {b})",
                                  (a, b))
    out = {}
    for i, a in enumerate(cl.events):
        for j in bits(cl.lt[i] | cl.par[i] | cl.cr[i]):
            b = cl.events[j]
            rel = cl.rels(a, b)[0]
            out[a, b] = (rel, cl.tree(a, rel, b))
    return out


def _graded(m: Microcosm) -> Dict[Tuple[EventId, EventId], Verdict]:
    return {k: v for k, v in m.matrix.table().items()
            if v not in (Verdict.UNKNOWN, Verdict.NONE)}


def decide_after_add(m: Microcosm, c: Correspondence, a: EventId, b: EventId,
                     placement: str = EXTERNAL) -> Decision:
    """Decide on ``add(m, c)`` and check the strengthening/weakening contracts."""
    new = add(m, c, placement)
    before = verdict(m, c.left, c.right)
    if before is Verdict.UNKNOWN:
        after = verdict(new, c.left, c.right)
        if after is not Verdict.from_rel(c.rel):
            raise ContractViolation(f"Strng: {c} yields {after.value} after addition")
    for (x, y), v in _graded(m).items():
        if verdict(new, x, y) is not v:
            raise ContractViolation(f"Weak: verdict on ({x}, {y}) changed from {v.value}")
    return decide(new, a, b)


def decide_after_update(m: Microcosm, c: Correspondence, a: EventId, b: EventId) -> Decision:
    """Decide on ``update(m, c)`` and check the update contracts."""
    new = update(m, c)
    if verdict(new, c.left, c.right) is not Verdict.HB:
        raise ContractViolation(f"Up-S: {c} does not hold after update")
    for (x, y), v in _graded(m).items():
        if {x, y} == {c.left, c.right}:
            continue
        if verdict(new, x, y) is not v:
            raise ContractViolation(f"Up-W: verdict on ({x}, {y}) changed from {v.value}")
    return decide(new, a, b)
