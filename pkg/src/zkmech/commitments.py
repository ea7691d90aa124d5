"""Bit commitments in the subgroup: commit to 0 as g^r, to 1 as h^r.

Integers are committed bitwise, most significant bit first (index 1 is the
high bit throughout the package).  A double opening of any single
commitment yields the discrete log of h base g, which is the binding
reduction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .codec import Reader, encode_u8, encode_uint
from .errors import CodecError, ParameterError, VerificationFailed
from .group import RefString


@dataclass(frozen=True)
class BitCommitment:
    value: int  # the group element C


@dataclass(frozen=True)
class BitOpening:
    bit: int
    r: int  # exponent in {1, ..., p-1}


@dataclass(frozen=True)
class IntCommitment:
    """Per-bit commitments to a width-bit integer, MSB first."""

    width: int
    bits: tuple[BitCommitment, ...]

    def __post_init__(self):
        if len(self.bits) != self.width:
            raise ParameterError("bit count must equal width")


def commit_bit(ref: RefString, bit: int, r: int) -> BitCommitment:
    if bit not in (0, 1):
        raise ParameterError(f"bit must be 0 or 1, got {bit}")
    if not 1 <= r <= ref.params.p - 1:
        raise ParameterError(f"exponent out of range: {r}")
    base = ref.g if bit == 0 else ref.h
    return BitCommitment(ref.params.pow_unchecked(base, r))


def verify_opening(ref: RefString, com: BitCommitment, op: BitOpening) -> bool:
    if op.bit not in (0, 1) or not 1 <= op.r <= ref.params.p - 1:
        return False
    return commit_bit(ref, op.bit, op.r).value == com.value


def int_bits(value: int, width: int) -> list[int]:
    """MSB-first binary expansion."""
    if not 0 <= value < (1 << width):
        raise ParameterError(f"value {value} out of range for width {width}")
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def bits_value(bits: list[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def commit_int(
    ref: RefString, value: int, width: int, rng: random.Random
) -> tuple[IntCommitment, list[BitOpening]]:
    """Commit to each bit independently; openings returned in bit order."""
    bits = int_bits(value, width)
    openings = [BitOpening(bit=b, r=ref.params.exp_sample(rng)) for b in bits]
    coms = tuple(commit_bit(ref, op.bit, op.r) for op in openings)
    return IntCommitment(width=width, bits=coms), openings


def reveal_int(ref: RefString, com: IntCommitment, ops: list[BitOpening]) -> int:
    """Recover the committed value; error names the first failing index."""
    if len(ops) != com.width:
        raise VerificationFailed("reveal", f"expected {com.width} openings, got {len(ops)}")
    for i, (bit_com, op) in enumerate(zip(com.bits, ops), start=1):
        if not verify_opening(ref, bit_com, op):
            raise VerificationFailed("reveal", "opening does not match commitment", index=i)
    return bits_value([op.bit for op in ops])


def binding_break_to_dlog(ref: RefString, r_zero: int, r_one: int) -> int:
    """Turn a double opening (g^r_zero = h^r_one) into log_g(h).

    Returns l = r_zero * r_one^-1 mod p and asserts g^l = h.
    """
    params = ref.params
    if params.pow(ref.g, r_zero) != params.pow(ref.h, r_one):
        raise ParameterError("inputs are not a double opening of one commitment")
    ell = r_zero * params.exp_inv(r_one) % params.p
    if params.pow(ref.g, ell) != ref.h:
        raise ParameterError("extracted exponent failed the g^l = h check")
    return ell


# -- wire encodings ----------------------------------------------------------


def encode_bit_commitment(com: BitCommitment) -> bytes:
    return encode_uint(com.value)


def read_bit_commitment(r: Reader, q: int) -> BitCommitment:
    value = r.uint()
    if not 2 <= value <= q - 1:
        raise CodecError(f"commitment {value} out of range", offset=r.off)
    return BitCommitment(value)


def encode_int_commitment(com: IntCommitment) -> bytes:
    return encode_u8(com.width) + b"".join(encode_bit_commitment(b) for b in com.bits)


def read_int_commitment(r: Reader, q: int) -> IntCommitment:
    width = r.u8()
    bits = tuple(read_bit_commitment(r, q) for _ in range(width))
    return IntCommitment(width=width, bits=bits)


def encode_opening(op: BitOpening) -> bytes:
    return encode_u8(op.bit) + encode_uint(op.r)


def read_opening(r: Reader, p: int) -> BitOpening:
    bit = r.u8()
    if bit not in (0, 1):
        raise CodecError(f"bad bit {bit}", offset=r.off)
    exp = r.uint()
    if not 1 <= exp <= p - 1:
        raise CodecError("opening exponent out of range", offset=r.off)
    return BitOpening(bit=bit, r=exp)
