"""Exception types shared across the package."""


class ZkmechError(Exception):
    """Base class for all library errors."""


class ParameterError(ZkmechError):
    """Invalid or inconsistent group/mechanism parameters."""


class PrimeSearchError(ZkmechError):
    """Safe-prime search exhausted its iteration budget."""


class DerivationError(ZkmechError):
    """Generator derivation exceeded its retry cap (should never happen)."""


class NonMemberError(ZkmechError):
    """Operand is not an element of the prime-order subgroup."""


class RefuseToProve(ZkmechError):
    """Prover-side refusal: the requested statement has no witness.

    Honest code paths raise this instead of ever emitting an unsound
    message.
    """


class ICViolation(ZkmechError):
    """Mechanism parameters violate the incentive-compatibility precondition."""


class StateConsumed(ZkmechError):
    """A single-use prover state was used twice (nonce-reuse guard)."""


class ShapeMismatch(ZkmechError):
    """Proof components do not match the statement's row/column shape."""


class ExtractionError(ZkmechError):
    """Witness extraction was called on unusable transcripts."""


class CodecError(ZkmechError):
    """Malformed wire bytes. Carries the offending offset or line."""

    def __init__(self, message: str, *, offset: int | None = None, line: int | None = None):
        self.offset = offset
        self.line = line
        where = ""
        if offset is not None:
            where = f" (offset {offset})"
        elif line is not None:
            where = f" (line {line})"
        super().__init__(message + where)


class VerificationFailed(ZkmechError):
    """A buyer-side or third-party verification check failed."""

    def __init__(self, phase: str, detail: str, index: int | None = None):
        self.phase = phase
        self.detail = detail
        self.index = index
        at = f" at index {index}" if index is not None else ""
        super().__init__(f"[{phase}]{at} {detail}")


class EnumerationBudget(ZkmechError):
    """An exhaustive enumeration would exceed its configured budget."""


class DegenerateValuation(ZkmechError):
    """Weight extraction called on an all-zero valuation profile."""
