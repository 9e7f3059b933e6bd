"""Accuracy order, analogy, bisimulation games and order-irrelevance experiments.

Two microcosms are analogous when the online procedure gives them the same
verdict on every ordered pair.  Pairs that leave both microcosms are
uniformly ``?``, so checking the union of members plus one fresh event is
enough.

The forward transition system adds an external correspondence true in the
world; the backward one removes a stored correspondence.  Both are
deterministic, so the bisimulation game reduces to comparing which labels
are enabled along every bounded path.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from cdeduce.core import Correspondence, EventId, Rel, Verdict, World, token_key
from cdeduce.errors import CausalityError, DomainError, IllegalScript
from cdeduce.microcosm import EXTERNAL, EvolutionStep, Microcosm, add, remove
from cdeduce.sampling import fresh_event

LESS, EQUAL, GREATER, INCOMPARABLE = "less", "equal", "greater", "incomparable"

_RANKED = (Verdict.HB, Verdict.HB_INV, Verdict.CONCURRENT, Verdict.CAUSAL, Verdict.UNKNOWN)


def _strictly_below(r: Verdict, s: Verdict) -> bool:
    if r is Verdict.UNKNOWN:
        return s is not Verdict.UNKNOWN
    return r is Verdict.CAUSAL and s in (Verdict.HB, Verdict.HB_INV)


def _check_domain(*vs: Verdict) -> None:
    for v in vs:
        if v not in _RANKED:
            raise DomainError(f"the accuracy order is not defined on {v.value!r}")


def accuracy_leq(r: Verdict, s: Verdict) -> bool:
    """``r`` is at most as accurate as ``s``."""
    _check_domain(r, s)
    return r is s or _strictly_below(r, s)


def compare_accuracy(r: Verdict, s: Verdict) -> str:
    _check_domain(r, s)
    if r is s:
        return EQUAL
    if _strictly_below(r, s):
        return LESS
    if _strictly_below(s, r):
        return GREATER
    return INCOMPARABLE


# -- analogy -----------------------------------------------------------------

@dataclass(frozen=True)
class Analogy:
    holds: bool
    counterexample: Optional[Tuple[EventId, EventId, Verdict, Verdict]] = None

    def __bool__(self) -> bool:
        return self.holds

    def __str__(self) -> str:
        if self.holds:
            return "analogous"
        a, b, v1, v2 = self.counterexample
        return f"not analogous: pair {a} {b} {v1.value} {v2.value}"


def probe_universe(m1: Microcosm, m2: Microcosm, extra: Iterable[EventId] = ()) -> List[EventId]:
    """Members of both microcosms, ``extra`` events, and one fresh event."""
    evs = set(m1.events) | set(m2.events) | set(extra)
    evs.add(fresh_event({str(e) for e in evs}))
    return sorted(evs, key=token_key)


def analogous(m1: Microcosm, m2: Microcosm,
              universe: Optional[Iterable[EventId]] = None) -> Analogy:
    """Compare online verdicts of ``m1`` and ``m2`` on every ordered pair.

    A supplied ``universe`` is extended with the members of both
    microcosms so that no stored fact escapes the comparison.
    """
    evs = probe_universe(m1, m2, universe or ())
    t1, t2 = m1.matrix, m2.matrix
    for a in evs:
        for b in evs:
            if a == b:
                continue
            v1, v2 = t1.verdict(a, b), t2.verdict(a, b)
            if v1 is not v2:
                return Analogy(False, (a, b, v1, v2))
    return Analogy(True)


# -- transition systems ------------------------------------------------------

@dataclass(frozen=True)
class TransitionScript:
    start: Microcosm
    steps: Tuple[EvolutionStep, ...]

    def replay(self) -> Microcosm:
        m = self.start
        for k, s in enumerate(self.steps):
            try:
                m = s.apply(m)
            except CausalityError as exc:
                raise IllegalScript(f"step {k} ({s}) is not legal: {exc}", exc.witness) from exc
        return m


def forward_labels(world: World) -> List[Correspondence]:
    """Candidate additions: ``<`` facts first, then ``par``, then ``cr``."""
    order = {Rel.LT: 0, Rel.PAR: 1, Rel.CR: 2}
    return sorted(world.true_correspondences(),
                  key=lambda c: (order[c.rel], token_key(c.left), token_key(c.right)))


def _forward_step(m: Microcosm, c: Correspondence) -> Optional[Microcosm]:
    try:
        return add(m, c, EXTERNAL)
    except CausalityError:
        return None


def _backward_step(m: Microcosm, c: Correspondence) -> Optional[Microcosm]:
    try:
        return remove(m, c)
    except CausalityError:
        return None


@dataclass(frozen=True)
class GameResult:
    holds: bool
    path: Tuple[Correspondence, ...] = ()
    reason: str = ""
    explored: int = 0
    exhausted: bool = False

    def __bool__(self) -> bool:
        return self.holds

    def __str__(self) -> str:
        if self.holds:
            return "holds" + (" within budget" if self.exhausted else "")
        steps = ", ".join(str(c) for c in self.path)
        return f"fails after [{steps}]: {self.reason}"


def _game(m1: Microcosm, m2: Microcosm, labels_of, step, depth: int, budget: int) -> GameResult:
    check_analogy = analogous(m1, m2).holds
    queue = deque([(m1, m2, ())])
    explored = 0
    while queue:
        a, b, path = queue.popleft()
        if len(path) >= depth:
            continue
        for c in labels_of(a, b):
            if explored >= budget:
                return GameResult(True, explored=explored, exhausted=True)
            explored += 1
            na, nb = step(a, c), step(b, c)
            here = path + (c,)
            if (na is None) != (nb is None):
                side = "left" if nb is None else "right"
                return GameResult(False, here, f"{c} enabled on the {side} only", explored)
            if na is None:
                continue
            if check_analogy:
                an = analogous(na, nb)
                if not an:
                    return GameResult(False, here, str(an), explored)
            queue.append((na, nb, here))
    return GameResult(True, explored=explored)


def check_forward_bisimulation(m1: Microcosm, m2: Microcosm, world: World,
                               step_budget: int = 2000, depth: int = 2) -> GameResult:
    """Bounded game over additions of world-true correspondences.

    Fails on the first path (breadth first, labels in :func:`forward_labels`
    order) whose last label is enabled on one side only, or, when the start
    pair is analogous, whose successors stop being analogous.
    """
    labels = forward_labels(world)
    return _game(m1, m2, lambda a, b: labels, _forward_step, depth, step_budget)


def check_backward_bisimulation(m1: Microcosm, m2: Microcosm,
                                step_budget: int = 2000, depth: int = 2) -> GameResult:
    """Bounded game over removals of stored correspondences of either side."""

    def labels(a: Microcosm, b: Microcosm) -> List[Correspondence]:
        return sorted(set(a.facts) | set(b.facts), key=Correspondence.sort_key)

    return _game(m1, m2, labels, _backward_step, depth, step_budget)


# -- permutation experiments -------------------------------------------------

@dataclass(frozen=True)
class Trial:
    index: int
    passed: bool
    order: Tuple[int, ...]
    counterexample: Optional[Tuple[EventId, EventId, Verdict, Verdict]] = None

    def line(self) -> str:
        if self.passed:
            return f"trial {self.index} pass"
        a, b, v1, v2 = self.counterexample
        return f"trial {self.index} fail pair {a} {b} {v1.value} {v2.value}"


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    trials: Tuple[Trial, ...]
    illegal: int
    requested: int
    steps: Tuple[EvolutionStep, ...] = field(default=(), repr=False)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trials)

    @property
    def failures(self) -> List[Trial]:
        return [t for t in self.trials if not t.passed]

    def lines(self) -> List[str]:
        out = [t.line() for t in self.trials]
        verdict = "pass" if self.passed else "fail"
        out.append(f"experiment {self.kind} {verdict} legal={len(self.trials)}/{self.requested} "
                   f"illegal={self.illegal}")
        return out


def _replay(m: Microcosm, steps: Sequence[EvolutionStep]) -> Optional[Microcosm]:
    try:
        return TransitionScript(m, tuple(steps)).replay()
    except IllegalScript:
        return None


def run_permutation_experiment(m0: Microcosm, m0p: Microcosm, steps: Sequence[EvolutionStep],
                               kind: str = "forward", trials: int = 20, seed: int = 0,
                               max_attempts: Optional[int] = None) -> ExperimentReport:
    """Replay ``steps`` from ``m0`` and random permutations of them from ``m0p``.

    Each trial draws permutations from its own seeded generator until one
    is legal step by step from ``m0p``; rejected draws are counted in
    ``illegal``.  A trial passes when both end states are analogous.
    """
    if kind not in ("forward", "backward"):
        raise ValueError(f"kind must be forward or backward, not {kind!r}")
    want = "add" if kind == "forward" else "remove"
    steps = tuple(steps)
    for s in steps:
        if s.kind != want:
            raise IllegalScript(f"{kind} scripts consist of {want} steps, got {s}")
    final = TransitionScript(m0, steps).replay()
    limit = max_attempts if max_attempts is not None else 50
    done: List[Trial] = []
    illegal = 0
    for k in range(trials):
        rng = random.Random(f"{seed}:{k}")
        for _ in range(limit):
            order = list(range(len(steps)))
            rng.shuffle(order)
            other = _replay(m0p, [steps[i] for i in order])
            if other is None:
                illegal += 1
                continue
            an = analogous(final, other)
            done.append(Trial(k, an.holds, tuple(order), an.counterexample))
            break
    return ExperimentReport(kind, tuple(done), illegal, trials, steps)
