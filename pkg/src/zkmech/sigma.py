"""Sigma protocols over a statement matrix, plus the Fiat-Shamir transform.

One engine covers every proof form the package needs: a statement is a
matrix of (base, target) pairs with possibly different row widths, and the
prover shows she knows the discrete logs of *every* cell in *some* row,
without revealing which.  Plain knowledge-of-dlog is the 1x1 instance,
AND-composition over several bases is 1xm, disjunction over alternatives
is kx1, and the general matrix covers gate proofs.

Row widths may differ because each row is simulated and verified
independently; soundness and witness indistinguishability are per-row
arguments and do not care about the other rows' widths.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .codec import Reader, encode_u16, encode_uint
from .errors import (
    CodecError,
    ExtractionError,
    ParameterError,
    ShapeMismatch,
    StateConsumed,
)
from .group import GroupParams


@dataclass(frozen=True)
class CdsStatement:
    """Rows of (base, target) pairs; the prover knows one full row."""

    params: GroupParams
    rows: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise ParameterError("statement needs at least one row")
        for row in self.rows:
            if not row:
                raise ParameterError("statement rows must be nonempty")
            for base, target in row:
                if base == 1 or target == 1:
                    raise ParameterError("bases and targets must differ from the identity")
                self.params.require_member(base)
                self.params.require_member(target)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(row) for row in self.rows)


@dataclass(frozen=True)
class CdsWitness:
    row: int
    exps: tuple[int, ...]


@dataclass(frozen=True)
class SigmaFirst:
    alphas: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class SigmaResponse:
    betas: tuple[int, ...]  # one per row, summing to the challenge mod p
    gammas: tuple[tuple[int, ...], ...]


@dataclass
class ProverState:
    """Single-use prover state; consumed by `cds_respond`.

    Reusing a nonce across two challenges leaks the witness, so the state
    refuses to respond twice.
    """

    stmt: CdsStatement
    wit: CdsWitness
    nonces: tuple[int, ...]
    sims: dict[int, tuple[int, tuple[int, ...]]] = field(default_factory=dict)
    used: bool = False


@dataclass(frozen=True)
class NiProof:
    """A Fiat-Shamir (non-interactive) proof bound to a byte context."""

    first: SigmaFirst
    challenge: int
    response: SigmaResponse
    context_digest: bytes


def check_witness(stmt: CdsStatement, wit: CdsWitness) -> bool:
    if not 0 <= wit.row < len(stmt.rows):
        return False
    row = stmt.rows[wit.row]
    if len(wit.exps) != len(row):
        return False
    return all(
        stmt.params.pow_unchecked(base, r) == target
        for (base, target), r in zip(row, wit.exps)
    )


def _sim_alpha(params: GroupParams, base: int, target: int, beta_i: int, gamma: int) -> int:
    """alpha = base^gamma / target^beta_i, so the cell equation holds."""
    return params.pow_unchecked(base, gamma) * params.pow_unchecked(target, -beta_i) % params.q


def _build_first(
    stmt: CdsStatement,
    wit: CdsWitness,
    nonces: tuple[int, ...],
    sims: dict[int, tuple[int, tuple[int, ...]]],
) -> SigmaFirst:
    alphas = []
    for i, row in enumerate(stmt.rows):
        if i == wit.row:
            alphas.append(
                tuple(stmt.params.pow_unchecked(base, s) for (base, _), s in zip(row, nonces))
            )
        else:
            beta_i, gammas = sims[i]
            alphas.append(
                tuple(
                    _sim_alpha(stmt.params, base, target, beta_i, g)
                    for (base, target), g in zip(row, gammas)
                )
            )
    return SigmaFirst(alphas=tuple(alphas))


def _build_response(
    stmt: CdsStatement,
    wit: CdsWitness,
    nonces: tuple[int, ...],
    sims: dict[int, tuple[int, tuple[int, ...]]],
    beta: int,
) -> SigmaResponse:
    p = stmt.params.p
    beta_real = (beta - sum(b for b, _ in sims.values())) % p
    betas = []
    gammas = []
    for i, _ in enumerate(stmt.rows):
        if i == wit.row:
            betas.append(beta_real)
            gammas.append(tuple((s + beta_real * r) % p for s, r in zip(nonces, wit.exps)))
        else:
            beta_i, sim_gammas = sims[i]
            betas.append(beta_i)
            gammas.append(sim_gammas)
    return SigmaResponse(betas=tuple(betas), gammas=tuple(gammas))


def cds_prove_first(
    stmt: CdsStatement, wit: CdsWitness, rng: random.Random
) -> tuple[SigmaFirst, ProverState]:
    """Real-row alphas use fresh nonces; every other row is simulated."""
    if not check_witness(stmt, wit):
        raise ParameterError("witness does not satisfy its statement row")
    p = stmt.params.p
    nonces = tuple(rng.randrange(1, p + 1) for _ in stmt.rows[wit.row])
    sims = {
        i: (rng.randrange(p), tuple(rng.randrange(p) for _ in row))
        for i, row in enumerate(stmt.rows)
        if i != wit.row
    }
    first = _build_first(stmt, wit, nonces, sims)
    return first, ProverState(stmt=stmt, wit=wit, nonces=nonces, sims=sims)


def cds_respond(state: ProverState, beta: int) -> SigmaResponse:
    if state.used:
        raise StateConsumed("prover state already consumed")
    if not 1 <= beta <= state.stmt.params.p:
        raise ParameterError(f"challenge out of range: {beta}")
    state.used = True
    return _build_response(state.stmt, state.wit, state.nonces, state.sims, beta)


def cds_verify(stmt: CdsStatement, first: SigmaFirst, beta: int, resp: SigmaResponse) -> bool:
    params = stmt.params
    shape = stmt.shape
    if tuple(len(r) for r in first.alphas) != shape or tuple(
        len(r) for r in resp.gammas
    ) != shape or len(resp.betas) != len(shape):
        raise ShapeMismatch("proof components do not match statement shape")
    if not 1 <= beta <= params.p:
        raise ParameterError(f"challenge out of range: {beta}")
    p, q = params.p, params.q
    if any(not 0 <= b < p for b in resp.betas):
        return False
    if any(not 0 <= g < p for row in resp.gammas for g in row):
        return False
    if any(not 1 <= a <= q - 1 for row in first.alphas for a in row):
        return False
    if sum(resp.betas) % p != beta % p:
        return False
    for row, alpha_row, beta_i, gamma_row in zip(stmt.rows, first.alphas, resp.betas, resp.gammas):
        for (base, target), alpha, gamma in zip(row, alpha_row, gamma_row):
            if params.pow_unchecked(base, gamma) != alpha * params.pow_unchecked(target, beta_i) % q:
                return False
    return True


def cds_extract(
    stmt: CdsStatement,
    first: SigmaFirst,
    transcript1: tuple[int, SigmaResponse],
    transcript2: tuple[int, SigmaResponse],
) -> CdsWitness:
    """Special soundness: two accepting transcripts with one first message
    and distinct challenges yield a witness for some row.

    The exponent is (gamma - gamma') / (beta_i - beta_i') mod p, the sign
    for which base^r = target actually holds; the result is asserted.
    """
    beta1, resp1 = transcript1
    beta2, resp2 = transcript2
    p = stmt.params.p
    if beta1 % p == beta2 % p:
        raise ExtractionError("challenges must be distinct")
    if not cds_verify(stmt, first, beta1, resp1) or not cds_verify(stmt, first, beta2, resp2):
        raise ExtractionError("both transcripts must verify")
    for i, _ in enumerate(stmt.rows):
        if resp1.betas[i] != resp2.betas[i]:
            inv = stmt.params.exp_inv(resp1.betas[i] - resp2.betas[i])
            exps = tuple(
                (g1 - g2) * inv % p for g1, g2 in zip(resp1.gammas[i], resp2.gammas[i])
            )
            wit = CdsWitness(row=i, exps=exps)
            if not check_witness(stmt, wit):
                raise ExtractionError("extracted exponents failed the row check")
            return wit
    raise ExtractionError("no row with differing per-row challenges")


def cds_simulate(
    stmt: CdsStatement, beta: int, rng: random.Random
) -> tuple[SigmaFirst, SigmaResponse]:
    """Honest-verifier simulator: accepting transcripts without any witness.

    For a uniformly drawn challenge the joint output distribution equals an
    honest run's exactly.
    """
    params = stmt.params
    if not 1 <= beta <= params.p:
        raise ParameterError(f"challenge out of range: {beta}")
    p = params.p
    k = len(stmt.rows)
    betas = [rng.randrange(p) for _ in range(k - 1)]
    betas.append((beta - sum(betas)) % p)
    gammas = tuple(tuple(rng.randrange(p) for _ in row) for row in stmt.rows)
    alphas = tuple(
        tuple(
            _sim_alpha(params, base, target, beta_i, gamma)
            for (base, target), gamma in zip(row, gamma_row)
        )
        for row, beta_i, gamma_row in zip(stmt.rows, betas, gammas)
    )
    return SigmaFirst(alphas=alphas), SigmaResponse(betas=tuple(betas), gammas=gammas)


# -- Fiat-Shamir --------------------------------------------------------------


def fiat_shamir_challenge(params: GroupParams, context: bytes) -> int:
    """Hash the context to a challenge in {1, ..., p}.

    Interprets 2*bit_length(p) hash bits as an integer, reduces mod p, and
    maps 0 to p; the double-width read keeps the bias below 2^-bit_length(p).
    The counter only advances on an all-zero hash read, which never happens
    in practice.
    """
    nbits = 2 * params.p.bit_length()
    nbytes = (nbits + 7) // 8
    for counter in range(1000):
        out = bytearray()
        block = 0
        while len(out) < nbytes:
            out += hashlib.sha256(
                context + counter.to_bytes(4, "big") + block.to_bytes(4, "big")
            ).digest()
            block += 1
        t = int.from_bytes(out[:nbytes], "big") >> (8 * nbytes - nbits)
        if t == 0:
            continue
        c = t % params.p
        return params.p if c == 0 else c
    raise ParameterError("challenge derivation failed")  # pragma: no cover


def ni_prove(stmt: CdsStatement, wit: CdsWitness, context: bytes, rng: random.Random) -> NiProof:
    first, state = cds_prove_first(stmt, wit, rng)
    challenge = fiat_shamir_challenge(stmt.params, context + encode_first(first))
    response = cds_respond(state, challenge)
    return NiProof(
        first=first,
        challenge=challenge,
        response=response,
        context_digest=hashlib.sha256(context).digest(),
    )


def ni_verify(stmt: CdsStatement, proof: NiProof, context: bytes) -> bool:
    """Recompute the challenge from the context; a context mismatch is just
    a verification failure, never an oracle."""
    if hashlib.sha256(context).digest() != proof.context_digest:
        return False
    if fiat_shamir_challenge(stmt.params, context + encode_first(proof.first)) != proof.challenge:
        return False
    try:
        return cds_verify(stmt, proof.first, proof.challenge, proof.response)
    except (ShapeMismatch, ParameterError):
        return False


# -- convenience statement builders ------------------------------------------


def schnorr_statement(params: GroupParams, base: int, target: int) -> CdsStatement:
    """Knowledge of log_base(target): the 1x1 instance."""
    return CdsStatement(params=params, rows=(((base, target),),))


def or_statement(params: GroupParams, base: int, targets: list[int]) -> CdsStatement:
    """Knowledge of log_base of at least one target: the kx1 instance."""
    return CdsStatement(params=params, rows=tuple(((base, t),) for t in targets))


def and_statement(params: GroupParams, pairs: list[tuple[int, int]]) -> CdsStatement:
    """Knowledge of every log in one list of (base, target) pairs: 1xm."""
    return CdsStatement(params=params, rows=(tuple(pairs),))


# -- wire encodings ------------------------------------------------------------


def encode_shape(shape: tuple[int, ...]) -> bytes:
    return encode_u16(len(shape)) + b"".join(encode_u16(w) for w in shape)


def encode_statement(stmt: CdsStatement) -> bytes:
    out = [encode_shape(stmt.shape)]
    for row in stmt.rows:
        for base, target in row:
            out.append(encode_uint(base))
            out.append(encode_uint(target))
    return b"".join(out)


def encode_first(first: SigmaFirst) -> bytes:
    shape = tuple(len(r) for r in first.alphas)
    return encode_shape(shape) + b"".join(
        encode_uint(a) for row in first.alphas for a in row
    )


def encode_proof(proof: NiProof) -> bytes:
    out = [encode_first(proof.first), encode_uint(proof.challenge)]
    out.extend(encode_uint(b) for b in proof.response.betas)
    out.extend(encode_uint(g) for row in proof.response.gammas for g in row)
    out.append(proof.context_digest)
    return b"".join(out)


def read_proof(r: Reader, params: GroupParams, shape: tuple[int, ...]) -> NiProof:
    """Strict decode against an expected statement shape."""
    k = r.u16()
    if k != len(shape):
        raise CodecError(f"proof row count {k} != expected {len(shape)}", offset=r.off)
    widths = tuple(r.u16() for _ in range(k))
    if widths != shape:
        raise CodecError("proof row widths differ from statement", offset=r.off)
    q, p = params.q, params.p
    alphas = []
    for w in widths:
        row = tuple(r.uint() for _ in range(w))
        if any(not 1 <= a <= q - 1 for a in row):
            raise CodecError("alpha out of range", offset=r.off)
        alphas.append(row)
    challenge = r.uint()
    if not 1 <= challenge <= p:
        raise CodecError("challenge out of range", offset=r.off)
    betas = tuple(r.uint() for _ in range(k))
    if any(not 0 <= b < p for b in betas):
        raise CodecError("per-row challenge out of range", offset=r.off)
    gammas = []
    for w in widths:
        row = tuple(r.uint() for _ in range(w))
        if any(not 0 <= g < p for g in row):
            raise CodecError("gamma out of range", offset=r.off)
        gammas.append(row)
    digest = r.take(32)
    return NiProof(
        first=SigmaFirst(alphas=tuple(alphas)),
        challenge=challenge,
        response=SigmaResponse(betas=betas, gammas=tuple(gammas)),
        context_digest=digest,
    )


def decode_proof(buf: bytes, params: GroupParams, shape: tuple[int, ...]) -> NiProof:
    r = Reader(buf)
    proof = read_proof(r, params, shape)
    r.finish()
    return proof
