"""Derivation trees and their text rendering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterator, Optional, Tuple

from cdeduce.core import Correspondence, EventId, Rel


@dataclass(frozen=True)
class Judgement:
    """``left rel right``, optionally negated (a refutation ``left not-rel right``)."""

    left: EventId
    rel: Rel
    right: EventId
    negated: bool = False

    def correspondence(self) -> Optional[Correspondence]:
        if self.negated or self.rel is Rel.UNKNOWN:
            return None
        return Correspondence(self.left, self.right, self.rel)

    def __str__(self) -> str:
        rel = ("not-" if self.negated else "") + self.rel.value
        return f"{self.left} {rel} {self.right}"


@dataclass(frozen=True)
class DerivationTree:
    """One rule application.

    ``witnesses`` lists stored correspondences the node relies on without a
    premise subtree, e.g. the fact that makes an intermediate event a member
    of the microcosm.  ``side`` holds human-readable side conditions.
    """

    rule: str
    conclusion: Judgement
    premises: Tuple["DerivationTree", ...] = ()
    side: Tuple[str, ...] = ()
    witnesses: FrozenSet[Correspondence] = frozenset()

    def nodes(self) -> Iterator["DerivationTree"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.premises))

    def rules(self) -> list:
        return [n.rule for n in self.nodes()]

    def format(self, indent: int = 0) -> str:
        return "\n".join(_lines(self, indent)) + "\n"


def _lines(tree: DerivationTree, depth: int):
    line = "  " * depth + f"{tree.rule}: {tree.conclusion}"
    if tree.side:
        line += "  [" + "; ".join(tree.side) + "]"
    yield line
    for p in tree.premises:
        yield from _lines(p, depth + 1)


def contains(tree: Optional[DerivationTree], c: Correspondence) -> bool:
    """Whether ``c`` occurs in ``tree``: as some node's conclusion or cited witness."""
    if tree is None:
        return False
    for node in tree.nodes():
        if node.conclusion.correspondence() == c or c in node.witnesses:
            return True
    return False
