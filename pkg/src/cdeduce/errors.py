"""Exception hierarchy shared by the engine modules.

Every precondition failure of an evolution or query step raises a subclass
of :class:`CausalityError`.  The class name doubles as the error tag used by
scenario files (``expect error M4Violation``).
"""

from __future__ import annotations

from typing import Any, Tuple


class CausalityError(Exception):
    """Base class; ``witness`` carries the evidence for the failure, if any."""

    def __init__(self, message: str, witness: Tuple[Any, ...] = ()) -> None:
        super().__init__(message)
        self.witness = tuple(witness)

    @property
    def tag(self) -> str:
        return type(self).__name__


class DomainError(CausalityError, ValueError):
    """Reflexive query, unknown event, or a verdict outside an order's domain."""


class AlreadyDetermined(CausalityError):
    pass


class M4Violation(CausalityError):
    """An external correspondence whose endpoints are joined by a <-chain."""


class ChainViolation(CausalityError):
    pass


class NotInWorld(CausalityError):
    pass


class NoSuchCR(CausalityError):
    pass


class WorldDisagrees(CausalityError):
    pass


class NotPresent(CausalityError):
    pass


class NotInvertible(CausalityError):
    pass


class VerdictExists(CausalityError):
    pass


class HypothesisUndefined(CausalityError):
    pass


class InconsistentClosure(CausalityError):
    pass


class IllegalScript(CausalityError):
    pass


class InvalidMicrocosm(CausalityError):
    pass


class UntrustedStep(CausalityError):
    """A world-dependent step on a world-free microcosm without ``--trust``."""


class ContractViolation(CausalityError):
    """An evolution contract (strengthening/weakening) failed to hold."""
