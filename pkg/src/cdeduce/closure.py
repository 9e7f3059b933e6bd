"""Initial closure of a set of stored correspondences.

Computes the least fixpoint of the four initial-judgement rules (stored
facts, transitivity of ``<``, symmetry of ``par`` and ``cr``) with one
bitmask row per event.  The closure is deliberately tolerant: it is also
used on hypothetical structures that may be contradictory, and reports the
contradictions through :meth:`Closure.conflicts` instead of failing.
"""

from __future__ import annotations

from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from cdeduce.core import Correspondence, EventId, Rel, Verdict, token_key
from cdeduce.derivation import DerivationTree, Judgement


def bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Closure:
    def __init__(self, facts: Iterable[Correspondence],
                 events: Iterable[EventId] = (),
                 hypotheses: Iterable[Correspondence] = ()) -> None:
        facts = list(facts)
        self.hypotheses: FrozenSet[Correspondence] = frozenset(hypotheses)
        universe = set(events)
        for f in facts:
            universe.update((f.left, f.right))
        self.events: List[EventId] = sorted(universe, key=token_key)
        self.index: Dict[EventId, int] = {e: i for i, e in enumerate(self.events)}
        n = len(self.events)
        self.n = n
        self.succ_facts: List[List[Tuple[int, Correspondence]]] = [[] for _ in range(n)]
        self.par = [0] * n
        self.cr = [0] * n
        self.stored: Dict[FrozenSet[EventId], List[Correspondence]] = {}
        for f in facts:
            i, j = self.index[f.left], self.index[f.right]
            self.stored.setdefault(f.pair, []).append(f)
            if f.rel is Rel.LT:
                self.succ_facts[i].append((j, f))
            elif f.rel is Rel.PAR:
                self.par[i] |= 1 << j
                self.par[j] |= 1 << i
            else:
                self.cr[i] |= 1 << j
                self.cr[j] |= 1 << i
        for row in self.succ_facts:
            row.sort(key=lambda jf: jf[0])
        self.lt = [self._reach(i) for i in range(n)]
        self.lt_inv = [0] * n
        for i in range(n):
            for j in bits(self.lt[i]):
                self.lt_inv[j] |= 1 << i
        self.related = [self.lt[i] | self.lt_inv[i] | self.par[i] | self.cr[i]
                        for i in range(n)]

    def _reach(self, src: int) -> int:
        seen = 0
        stack = [j for j, _ in self.succ_facts[src]]
        while stack:
            j = stack.pop()
            if seen >> j & 1:
                continue
            seen |= 1 << j
            stack.extend(k for k, _ in self.succ_facts[j])
        return seen

    def __contains__(self, event: EventId) -> bool:
        return event in self.index

    # -- queries -------------------------------------------------------------

    def rels(self, a: EventId, b: EventId) -> List[Rel]:
        """Initial relations derivable on the ordered pair (no inversion)."""
        i, j = self.index.get(a), self.index.get(b)
        if i is None or j is None or i == j:
            return []
        out = []
        if self.lt[i] >> j & 1:
            out.append(Rel.LT)
        if self.par[i] >> j & 1:
            out.append(Rel.PAR)
        if self.cr[i] >> j & 1:
            out.append(Rel.CR)
        return out

    def initial(self, a: EventId, b: EventId) -> Optional[Verdict]:
        """Initial verdict on ``(a, b)``; direction is reported by orientation."""
        i, j = self.index.get(a), self.index.get(b)
        if i is None or j is None or i == j:
            return None
        if self.lt[i] >> j & 1:
            return Verdict.HB
        if self.lt[j] >> i & 1:
            return Verdict.HB_INV
        if self.par[i] >> j & 1:
            return Verdict.CONCURRENT
        if self.cr[i] >> j & 1:
            return Verdict.CAUSAL
        return None

    def conflicts(self) -> List[Tuple[EventId, EventId, Rel, Rel]]:
        """Ordered pairs carrying two jointly unsatisfiable initial relations.

        ``<`` together with ``cr`` is satisfiable and is not reported.  A
        ``<``-cycle is reported on its pair as ``<`` against ``<`` reversed,
        encoded as ``(a, b, LT, LT)`` meaning ``a < b`` and ``b < a``.
        """
        out = []
        for i in range(self.n):
            a = self.events[i]
            for j in bits(self.lt[i] & self.par[i]):
                out.append((a, self.events[j], Rel.LT, Rel.PAR))
            for j in bits(self.lt[i] & self.lt_inv[i]):
                if i < j:
                    out.append((a, self.events[j], Rel.LT, Rel.LT))
            if self.lt[i] >> i & 1:
                out.append((a, a, Rel.LT, Rel.LT))
            for j in bits(self.par[i] & self.cr[i]):
                if i < j:
                    out.append((a, self.events[j], Rel.PAR, Rel.CR))
        return out

    def path(self, a: EventId, b: EventId) -> List[Correspondence]:
        """Shortest chain of stored ``<`` facts from ``a`` to ``b`` (BFS)."""
        src, dst = self.index[a], self.index[b]
        parent: Dict[int, Tuple[int, Correspondence]] = {}
        queue = deque([src])
        seen = {src}
        while queue:
            i = queue.popleft()
            for j, f in self.succ_facts[i]:
                if j == dst:
                    chain = [f]
                    while i != src:
                        i, g = parent[i]
                        chain.append(g)
                    return chain[::-1]
                if j not in seen:
                    seen.add(j)
                    parent[j] = (i, f)
                    queue.append(j)
        raise KeyError(f"no <-chain from {a!r} to {b!r}")

    # -- derivation trees ----------------------------------------------------

    def init_node(self, f: Correspondence) -> DerivationTree:
        side = ("hyp",) if f in self.hypotheses else ()
        return DerivationTree("Init", Judgement(f.left, f.rel, f.right), side=side)

    def tree(self, a: EventId, rel: Rel, b: EventId) -> DerivationTree:
        """Derivation of the initial judgement ``a rel b``."""
        if rel is Rel.LT:
            chain = self.path(a, b)
            node = self.init_node(chain[0])
            for f in chain[1:]:
                node = DerivationTree("In-Tr", Judgement(a, Rel.LT, f.right),
                                      (node, self.init_node(f)))
            return node
        stored = next(f for f in self.stored.get(frozenset((a, b)), ()) if f.rel is rel)
        base = self.init_node(stored)
        if (stored.left, stored.right) == (a, b):
            return base
        rule = "Co-Sym" if rel is Rel.PAR else "CR-Sym"
        return DerivationTree(rule, Judgement(a, rel, b), (base,))


def chain_between(facts: Sequence[Correspondence], a: EventId, b: EventId,
                  exclude: Optional[Correspondence] = None) -> Optional[List[EventId]]:
    """Events of a ``<``-chain from ``a`` to ``b`` using ``facts`` minus ``exclude``."""
    succ: Dict[EventId, List[EventId]] = {}
    for f in facts:
        if f.rel is Rel.LT and f != exclude:
            succ.setdefault(f.left, []).append(f.right)
    parent = {a: None}
    queue = deque([a])
    while queue:
        e = queue.popleft()
        for nxt in sorted(succ.get(e, ()), key=token_key):
            if nxt in parent:
                continue
            parent[nxt] = e
            if nxt == b:
                out = [b]
                while parent[out[-1]] is not None:
                    out.append(parent[out[-1]])
                return out[::-1]
            queue.append(nxt)
    return None
