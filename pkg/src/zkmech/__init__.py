"""Commit to a hidden selling mechanism, run it, and let anyone verify.

A seller fixes prices by committing to their bits in a prime-order group,
proves incentive properties and correct evaluation with zero-knowledge
disjunction proofs (interactive, or non-interactive via hashing), and the
buyer verifies everything without ever seeing the mechanism.
"""

from .errors import (
    CodecError,
    ICViolation,
    RefuseToProve,
    VerificationFailed,
    ZkmechError,
)
from .group import GroupParams, RefString, derive_generators, gen_params, params_from_modulus
from .protocols import MechanismSpec, Outcome, run_local, verify_transcript

__all__ = [
    "CodecError",
    "GroupParams",
    "ICViolation",
    "MechanismSpec",
    "Outcome",
    "RefString",
    "RefuseToProve",
    "VerificationFailed",
    "ZkmechError",
    "derive_generators",
    "gen_params",
    "params_from_modulus",
    "run_local",
    "verify_transcript",
]

__version__ = "0.1.0"
