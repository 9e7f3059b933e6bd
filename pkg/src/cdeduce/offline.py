"""Offline decision making: refuting relations by hypothetical contradiction.

A hypothesis is added (for a pair with no online verdict) or a stored
``cr`` is given a direction; if the resulting structure derives two jointly
unsatisfiable relations on one pair, the hypothesis is refuted.  From the
refutations the engine concludes positive facts by elimination.

Two interchangeable saturators are provided.  ``mode="sets"`` tracks, per
unordered pair, the set of world relations still possible and reads the
facts off it.  ``mode="rules"`` replays the offline rules literally over
individual judgements and is the one to use for traces.  Both share the
refutation probes and must agree on the resulting fact set.

Hypotheses are built over the microcosm's stored structure only; offline
conclusions do not feed back into later probes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from cdeduce.core import Correspondence, EventId, Rel, Verdict, token_key
from cdeduce.derivation import DerivationTree, Judgement
from cdeduce.errors import HypothesisUndefined, NoSuchCR, VerdictExists
from cdeduce.microcosm import Microcosm, add_hypothetical, update_hypothetical
from cdeduce.online import decide, verdict

LT, PAR, CR, UNK = Rel.LT, Rel.PAR, Rel.CR, Rel.UNKNOWN

# possibility tokens, relative to an ordered pair (a, b)
FWD, BWD, CONC = "<", ">", "par"


def default_depth() -> int:
    return int(os.environ.get("CDEDUCE_DEPTH", "1"))


@dataclass(frozen=True)
class OfflineFact:
    left: EventId
    rel: Rel
    right: EventId
    refuted: bool = False
    provenance: Optional[DerivationTree] = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> Tuple[EventId, Rel, EventId, bool]:
        return (self.left, self.rel, self.right, self.refuted)

    @property
    def judgement(self) -> Judgement:
        return Judgement(self.left, self.rel, self.right, self.refuted)

    def __str__(self) -> str:
        pol = "refuted" if self.refuted else "asserted"
        return f"{pol} {self.left} {self.rel.value} {self.right}"


@dataclass(frozen=True)
class PossibilitySet:
    """World relations still open for ``(left, right)``: subset of {<, >, par}."""

    left: EventId
    right: EventId
    remaining: FrozenSet[str]

    @property
    def empty(self) -> bool:
        return not self.remaining

    def __str__(self) -> str:
        return f"{self.left} {self.right} {{{', '.join(sorted(self.remaining))}}}"


@dataclass(frozen=True)
class Refutation:
    hypothesis: Correspondence
    kind: str
    refuted: bool
    witness: Optional[Tuple[EventId, EventId, str, str]] = None
    premises: Tuple[DerivationTree, ...] = ()

    def __bool__(self) -> bool:
        return self.refuted

    @property
    def tree(self) -> Optional[DerivationTree]:
        if not self.refuted:
            return None
        c = self.hypothesis
        rule = "Cntrd" if self.kind == "add" else "Up-Cntrd"
        return DerivationTree(rule, Judgement(c.left, c.rel, c.right, True), self.premises,
                              side=(f"hyp {c}",))


def _onl(judgement_tree: DerivationTree) -> DerivationTree:
    j = judgement_tree.conclusion
    return DerivationTree("Onl-OK", j, (judgement_tree,))


def _contradiction(h: Microcosm, depth: int):
    cl = h.closure
    for a, b, r1, r2 in cl.conflicts():
        if a == b:
            continue
        if (r1, r2) == (LT, LT):
            t1, t2 = cl.tree(a, LT, b), cl.tree(b, LT, a)
        else:
            t1, t2 = cl.tree(a, r1, b), cl.tree(a, r2, b)
        prem = tuple(_onl(DerivationTree("In-OK", t.conclusion, (t,))) for t in (t1, t2))
        return (a, b, str(t1.conclusion), str(t2.conclusion)), prem
    if depth > 1:
        nested = offline_saturate(h, depth=depth - 1)
        for pset in nested.possibilities.values():
            if pset.empty:
                prem = tuple(f.provenance for f in nested.facts
                             if f.refuted and f.provenance is not None
                             and {f.left, f.right} == {pset.left, pset.right}
                             and f.rel is not UNK)
                return (pset.left, pset.right, "no relation left", ""), prem
    return None


def refute_by_addition(m: Microcosm, c: Correspondence, depth: Optional[int] = None) -> Refutation:
    """Try to refute ``c`` by assuming it and looking for a contradiction."""
    depth = default_depth() if depth is None else depth
    try:
        h = add_hypothetical(m, c, check_m4=False)
    except VerdictExists as exc:
        raise HypothesisUndefined(str(exc), exc.witness) from exc
    found = _contradiction(h, depth)
    if found is None:
        return Refutation(c, "add", False)
    return Refutation(c, "add", True, found[0], found[1])


def refute_by_update(m: Microcosm, c: Correspondence, depth: Optional[int] = None) -> Refutation:
    """Try to refute direction ``c`` of a stored ``cr`` pair."""
    depth = default_depth() if depth is None else depth
    try:
        h = update_hypothetical(m, c, check_m4=False)
    except NoSuchCR as exc:
        raise HypothesisUndefined(str(exc), exc.witness) from exc
    found = _contradiction(h, depth)
    if found is None:
        return Refutation(c, "update", False)
    return Refutation(c, "update", True, found[0], found[1])


# -- saturation --------------------------------------------------------------

@dataclass
class OfflineResult:
    facts: FrozenSet[OfflineFact]
    possibilities: Dict[Tuple[EventId, EventId], PossibilitySet]
    incomplete: bool = False
    probes: int = 0

    def keys(self) -> FrozenSet[tuple]:
        return frozenset(f.key for f in self.facts)

    def get(self, a: EventId, rel: Rel, b: EventId, refuted: bool = False) -> Optional[OfflineFact]:
        for f in self.facts:
            if f.key == (a, rel, b, refuted):
                return f
        return None

    def holds(self, a: EventId, rel: Rel, b: EventId, refuted: bool = False) -> bool:
        return self.get(a, rel, b, refuted) is not None

    def sorted_facts(self) -> List[OfflineFact]:
        return sorted(self.facts, key=lambda f: (token_key(f.left), token_key(f.right),
                                                 f.refuted, f.rel.value))

    def lines(self) -> List[str]:
        return [str(f) for f in self.sorted_facts()]


def _members(m: Microcosm) -> List[EventId]:
    return sorted(m.events, key=token_key)


def _probe_all(m: Microcosm, depth: int, budget: Optional[int]):
    """Run every eligible hypothesis; returns refutation trees keyed by judgement."""
    refs: Dict[Tuple[EventId, Rel, EventId], DerivationTree] = {}
    probes = 0
    incomplete = False
    evs = _members(m)
    for a in evs:
        for b in evs:
            if a == b:
                continue
            v = verdict(m, a, b)
            if v is Verdict.NONE:
                cands = [(Correspondence(a, b, LT), "add")]
                if token_key(a) < token_key(b):
                    cands += [(Correspondence(a, b, PAR), "add"), (Correspondence(a, b, CR), "add")]
            elif v is Verdict.CAUSAL:
                cands = [(Correspondence(a, b, LT), "update")]
            else:
                continue
            for c, kind in cands:
                if budget is not None and probes >= budget:
                    incomplete = True
                    break
                probes += 1
                r = (refute_by_addition if kind == "add" else refute_by_update)(m, c, depth)
                if r:
                    refs[c.left, c.rel, c.right] = r.tree
    return refs, probes, incomplete


def _online_facts(m: Microcosm) -> Dict[tuple, OfflineFact]:
    out = {}
    evs = _members(m)
    for a in evs:
        for b in evs:
            if a == b:
                continue
            d = decide(m, a, b)
            if d.verdict in (Verdict.NONE, Verdict.HB_INV):
                continue
            rel = {Verdict.HB: LT, Verdict.CONCURRENT: PAR, Verdict.CAUSAL: CR,
                   Verdict.UNKNOWN: UNK}[d.verdict]
            f = OfflineFact(a, rel, b, False, _onl(d.tree))
            out[f.key] = f
    return out


def offline_saturate(m: Microcosm, depth: Optional[int] = None, budget: Optional[int] = None,
                     mode: str = "sets") -> OfflineResult:
    """All offline facts of ``m``.

    ``depth`` bounds hypothesis nesting (default from ``CDEDUCE_DEPTH``, else 1).
    ``budget`` caps the number of probes; when hit, the partial result is
    returned with ``incomplete`` set.
    """
    depth = default_depth() if depth is None else depth
    if mode not in ("sets", "rules"):
        raise ValueError(f"unknown mode {mode!r}")
    refs, probes, incomplete = _probe_all(m, depth, budget)
    facts = _online_facts(m)
    if mode == "sets":
        _saturate_sets(m, refs, facts)
    else:
        _saturate_rules(refs, facts)
    return OfflineResult(frozenset(facts.values()), _possibilities(m, refs),
                         incomplete, probes)


def _possibilities(m: Microcosm, refs) -> Dict[Tuple[EventId, EventId], PossibilitySet]:
    out = {}
    evs = _members(m)
    for i, x in enumerate(evs):
        for y in evs[i + 1:]:
            out[x, y] = PossibilitySet(x, y, frozenset(_remaining(verdict(m, x, y), x, y, refs)))
    return out


def _remaining(v: Verdict, x, y, refs) -> set:
    base = {Verdict.HB: {FWD}, Verdict.HB_INV: {BWD}, Verdict.CONCURRENT: {CONC},
            Verdict.CAUSAL: {FWD, BWD}}.get(v, {FWD, BWD, CONC})
    if (x, LT, y) in refs:
        base.discard(FWD)
    if (y, LT, x) in refs:
        base.discard(BWD)
    if (x, PAR, y) in refs or (y, PAR, x) in refs:
        base.discard(CONC)
    if (x, CR, y) in refs or (y, CR, x) in refs:
        base -= {FWD, BWD}
    return base


def _put(facts, a, rel, b, refuted, tree):
    key = (a, rel, b, refuted)
    if key not in facts:
        facts[key] = OfflineFact(a, rel, b, refuted, tree)
    return facts[key]


def _node(rule, a, rel, b, refuted, *premises):
    return DerivationTree(rule, Judgement(a, rel, b, refuted), tuple(p.provenance if isinstance(p, OfflineFact) else p
                                                                   for p in premises))


def _saturate_sets(m: Microcosm, refs, facts) -> None:
    """Read facts off each pair's possibility set and the refutations behind it."""
    evs = _members(m)
    for i, x in enumerate(evs):
        for y in evs[i + 1:]:
            touched = any(k in refs for k in ((x, LT, y), (y, LT, x), (x, PAR, y), (y, PAR, x),
                                              (x, CR, y), (y, CR, x)))
            if not touched:
                continue
            # refuted directions
            for a, b in ((x, y), (y, x)):
                if (a, LT, b) in refs:
                    _put(facts, a, LT, b, True, refs[a, LT, b])
            for rel, sym in ((PAR, "NCo-Sym"), (CR, "NCR-Sym")):
                for a, b in ((x, y), (y, x)):
                    if (a, rel, b) in refs:
                        f = _put(facts, a, rel, b, True, refs[a, rel, b])
                        _put(facts, b, rel, a, True, _node(sym, b, rel, a, True, f))
            if (x, LT, y) in refs and (y, LT, x) in refs:
                f1 = facts[x, LT, y, True]
                f2 = facts[y, LT, x, True]
                _put(facts, x, CR, y, True, _node("No-HBs", x, CR, y, True, f1, f2))
                _put(facts, y, CR, x, True, _node("No-HBs", y, CR, x, True, f2, f1))
            # not-unknown follows from any refuted accurate relation
            src = next((facts[k] for k in ((x, LT, y, True), (y, LT, x, True), (x, PAR, y, True),
                                           (y, PAR, x, True)) if k in facts), None)
            if src is not None:
                n1 = _put(facts, src.left, UNK, src.right, True,
                          _node("Not-R", src.left, UNK, src.right, True, src))
                _put(facts, src.right, UNK, src.left, True,
                     _node("NU-Sym", src.right, UNK, src.left, True, n1))
            # positive conclusions by elimination; with a non-empty possibility
            # set these are exactly: singleton -> that relation, {<, >} -> cr
            for a, b in ((x, y), (y, x)):
                if (a, CR, b, True) in facts:
                    _put(facts, a, PAR, b, False,
                         _node("Not-CR", a, PAR, b, False, facts[a, CR, b, True]))
                if (a, PAR, b, True) in facts:
                    _put(facts, a, CR, b, False,
                         _node("Not-Co", a, CR, b, False, facts[a, PAR, b, True]))
            for a, b in ((x, y), (y, x)):
                if (a, CR, b, False) in facts and (a, LT, b, True) in facts:
                    _put(facts, b, LT, a, False,
                         _node("Not-HB", b, LT, a, False, facts[a, CR, b, False],
                               facts[a, LT, b, True]))


_SYMMETRIC_NEG = {UNK: "NU-Sym", CR: "NCR-Sym", PAR: "NCo-Sym"}


def _saturate_rules(refs, facts) -> None:
    """Apply the offline rules one judgement at a time until nothing changes."""
    for (a, rel, b), tree in sorted(refs.items(), key=lambda kv: (token_key(kv[0][0]),
                                                                 token_key(kv[0][2]),
                                                                 kv[0][1].value)):
        _put(facts, a, rel, b, True, tree)
    changed = True
    while changed:
        changed = False
        for f in sorted(list(facts.values()), key=lambda f: (token_key(f.left), token_key(f.right),
                                                             f.refuted, f.rel.value)):
            new = []
            a, b = f.left, f.right
            if f.refuted:
                if f.rel in (LT, PAR):
                    new.append((a, UNK, b, True, "Not-R", (f,)))
                if f.rel is CR:
                    new.append((a, PAR, b, False, "Not-CR", (f,)))
                if f.rel is PAR:
                    new.append((a, CR, b, False, "Not-Co", (f,)))
                if f.rel in _SYMMETRIC_NEG:
                    new.append((b, f.rel, a, True, _SYMMETRIC_NEG[f.rel], (f,)))
                if f.rel is LT:
                    g = facts.get((b, LT, a, True))
                    if g is not None:
                        new.append((a, CR, b, True, "No-HBs", (f, g)))
                    g = facts.get((a, CR, b, False))
                    if g is not None:
                        new.append((b, LT, a, False, "Not-HB", (g, f)))
            elif f.rel is CR:
                g = facts.get((a, LT, b, True))
                if g is not None:
                    new.append((b, LT, a, False, "Not-HB", (f, g)))
            for x, rel, y, refuted, rule, prem in new:
                if (x, rel, y, refuted) not in facts:
                    _put(facts, x, rel, y, refuted, _node(rule, x, rel, y, refuted, *prem))
                    changed = True


def trace(result: OfflineResult, a: EventId, rel: Rel, b: EventId, refuted: bool = False) -> str:
    f = result.get(a, rel, b, refuted)
    if f is None or f.provenance is None:
        raise KeyError(f"no offline fact {a} {rel.value} {b}")
    return f.provenance.format()


def facts_to_lines(facts: Iterable[OfflineFact]) -> List[str]:
    return [str(f) for f in sorted(facts, key=lambda f: (token_key(f.left), token_key(f.right),
                                                         f.refuted, f.rel.value))]
