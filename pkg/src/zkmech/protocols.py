"""Seller/buyer session machines for the five auction protocols.

Each protocol runs as an ordered message exchange: commitments (plus an
incentive certificate where needed), type reports, evidence (reveals,
proofs, coin messages), and a final announced outcome.  The buyer aborts
the session on the first failed check; `verify_transcript` replays every
check a buyer would perform from the message log alone, so any third
party holding the group parameters and the transcript can re-verify a
run and recompute its outcome.

Supported kinds:

- ``ex1``       one buyer, one item at a hidden price
- ``ex1multi``  second-price auction with a hidden reserve
- ``ex2``       two items, unit-demand buyer, two hidden prices
- ``ex3``       two-part pricing with a zero-knowledge incentive
                certificate and a public half-probability lottery
- ``ex4``       hidden price charged in expectation: pay H with
                probability s/H via a verifiable coin flip
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .codec import (
    Message,
    Reader,
    TAG_COIN_MASK,
    TAG_COIN_PAIR,
    TAG_COMMIT,
    TAG_COMMIT_PROOF,
    TAG_EVAL_PROOF,
    TAG_OUTCOME,
    TAG_REVEAL,
    TAG_TYPE_REPORT,
    TAG_VERDICT,
    Transcript,
    encode_u8,
    encode_u16,
    encode_uint,
    seed_frame,
)
from .commitments import (
    BitCommitment,
    BitOpening,
    IntCommitment,
    commit_int,
    encode_int_commitment,
    encode_opening,
    int_bits,
    read_int_commitment,
    read_opening,
    reveal_int,
    verify_opening,
)
from .errors import (
    CodecError,
    ICViolation,
    NonMemberError,
    ParameterError,
    VerificationFailed,
)
from .gadgets import (
    ComplementPair,
    ProofBundle,
    coin_openings,
    coin_select,
    complement_commit,
    encode_bundle,
    ge_positions,
    ge_targets,
    le_positions,
    le_targets,
    prove_complement,
    prove_ge_public,
    prove_le_committed,
    prove_le_public,
    prove_lt_committed,
    prove_sum,
    read_bundle,
    verify_complement,
    verify_ge_public,
    verify_le_committed,
    verify_le_public,
    verify_lt_committed,
    verify_sum,
)
from .group import RefString
from .sigma import encode_proof, read_proof

KINDS = ("ex1", "ex1multi", "ex2", "ex3", "ex4")

# Claim bytes inside evaluation-proof messages.
CLAIM_GE0 = 0x00  # first (or only) committed price >= recomputed public bound
CLAIM_GE1 = 0x01  # second committed price >= recomputed public bound
CLAIM_LE0 = 0x02  # committed price <= recomputed public bound
CLAIM_SUM = 0x03  # announced total of the two committed prices


def width_of(bound: int) -> int:
    """Bit width of prices in {0, ..., H-1}; H must be a power of two."""
    if bound < 2 or bound & (bound - 1):
        raise ParameterError(f"H must be a power of two >= 2, got {bound}")
    return bound.bit_length() - 1


@dataclass(frozen=True)
class MechanismSpec:
    """A mechanism family member: kind, price bound H, and hidden prices."""

    kind: str
    bound: int
    prices: tuple[int, ...]
    n_buyers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown kind {self.kind!r}")
        width_of(self.bound)
        expected = 2 if self.kind in ("ex2", "ex3") else 1
        if len(self.prices) != expected:
            raise ParameterError(f"{self.kind} takes {expected} price(s)")
        for s in self.prices:
            if not 0 <= s < self.bound:
                raise ParameterError(f"price {s} outside {{0,...,{self.bound - 1}}}")
        if self.kind == "ex1multi":
            if self.n_buyers < 2:
                raise ParameterError("ex1multi needs at least two buyers")
        elif self.n_buyers != 1:
            raise ParameterError(f"{self.kind} is a single-buyer protocol")
        if self.kind == "ex3" and self.prices[0] > self.prices[1]:
            raise ICViolation(
                f"two-part pricing is incentive compatible only when "
                f"s1 <= s2; got {self.prices}"
            )


@dataclass(frozen=True)
class Outcome:
    """What a protocol run produced.

    `item` is the sold item's index, or the winning buyer's index for the
    multi-buyer auction; `lottery` records the public coin draw where one
    took place.
    """

    trade: bool
    item: int | None = None
    payment: int = 0
    lottery: tuple[int, ...] | None = None


# -- payload builders and strict parsers --------------------------------------


def _fail(phase: str, detail: str, index: int | None = None):
    raise VerificationFailed(phase, detail, index=index)


def _commit_payload(coms: list[IntCommitment]) -> bytes:
    return encode_u8(len(coms)) + b"".join(encode_int_commitment(c) for c in coms)


def _parse_commit(
    ref: RefString, payload: bytes, phase: str, count: int, width: int
) -> list[IntCommitment]:
    try:
        r = Reader(payload)
        if r.u8() != count:
            _fail(phase, "unexpected commitment count")
        coms = [read_int_commitment(r, ref.params.q) for _ in range(count)]
        r.finish()
    except CodecError as exc:
        _fail(phase, f"malformed commitment message: {exc}")
    for com in coms:
        if com.width != width:
            _fail(phase, f"commitment width {com.width} != {width}")
        for i, bit in enumerate(com.bits, start=1):
            if not ref.params.is_member(bit.value):
                _fail(phase, "commitment outside the subgroup", index=i)
    return coms


def _report_payload(index: int, values: list[int]) -> bytes:
    return encode_u16(index) + encode_u8(len(values)) + b"".join(encode_uint(v) for v in values)


def _parse_report(
    payload: bytes, phase: str, bound: int, index: int, count: int
) -> list[int]:
    try:
        r = Reader(payload)
        got_index = r.u16()
        got_count = r.u8()
        values = [r.uint() for _ in range(got_count)]
        r.finish()
    except CodecError as exc:
        _fail(phase, f"malformed report: {exc}")
    if got_index != index:
        _fail(phase, f"report index {got_index}, expected {index}")
    if got_count != count:
        _fail(phase, f"report carries {got_count} values, expected {count}")
    for v in values:
        if not 0 <= v < bound:
            _fail(phase, f"reported value {v} outside {{0,...,{bound - 1}}}")
    return values


def _reveal_payload(label: int, ops: list[BitOpening]) -> bytes:
    return encode_u8(label) + encode_u8(len(ops)) + b"".join(encode_opening(o) for o in ops)


def _parse_reveal(
    ref: RefString, payload: bytes, phase: str, width: int
) -> tuple[int, list[BitOpening]]:
    try:
        r = Reader(payload)
        label = r.u8()
        count = r.u8()
        ops = [read_opening(r, ref.params.p) for _ in range(count)]
        r.finish()
    except CodecError as exc:
        _fail(phase, f"malformed reveal: {exc}")
    if count != width:
        _fail(phase, f"reveal carries {count} openings, expected {width}")
    return label, ops


def _proof_payload(claim: int, body: bytes) -> bytes:
    return encode_u8(claim) + body


def _sum_body(total: int, carry: IntCommitment, bundle: ProofBundle) -> bytes:
    return encode_uint(total) + encode_int_commitment(carry) + encode_bundle(bundle)


def _coin_pair_payload(pairs: list[ComplementPair], proofs: list[list]) -> bytes:
    out = [encode_u8(len(pairs))]
    for pair in pairs:
        out.append(encode_uint(pair.r_com.value))
        out.append(encode_uint(pair.rp_com.value))
    for pr in proofs:
        for proof in pr:
            body = encode_proof(proof)
            out.append(len(body).to_bytes(4, "big"))
            out.append(body)
    return b"".join(out)


def _parse_coin_pairs(
    ref: RefString, payload: bytes, phase: str, count: int
) -> tuple[list[ComplementPair], list[list]]:
    try:
        r = Reader(payload)
        got = r.u8()
        if got != count:
            _fail(phase, f"coin message carries {got} pairs, expected {count}")
        pairs = []
        for _ in range(count):
            a = r.uint()
            b = r.uint()
            pairs.append(ComplementPair(BitCommitment(a), BitCommitment(b)))
        proofs = []
        for _ in range(count):
            pr = []
            for _ in range(2):
                length = int.from_bytes(r.take(4), "big")
                sub = Reader(r.take(length))
                pr.append(read_proof(sub, ref.params, (1, 1)))
                sub.finish()
            proofs.append(pr)
        r.finish()
    except CodecError as exc:
        _fail(phase, f"malformed coin message: {exc}")
    for i, pair in enumerate(pairs):
        for value in (pair.r_com.value, pair.rp_com.value):
            if not ref.params.is_member(value):
                _fail(phase, "coin commitment outside the subgroup", index=i)
    return pairs, proofs


def _mask_payload(bits: list[int]) -> bytes:
    return encode_u8(len(bits)) + bytes(bits)


def _parse_mask(payload: bytes, phase: str, count: int) -> list[int]:
    try:
        r = Reader(payload)
        got = r.u8()
        bits = list(r.take(got))
        r.finish()
    except CodecError as exc:
        _fail(phase, f"malformed coin mask: {exc}")
    if got != count:
        _fail(phase, f"mask carries {got} bits, expected {count}")
    if any(b not in (0, 1) for b in bits):
        _fail(phase, "mask bits must be 0 or 1")
    return bits


def encode_outcome(o: Outcome) -> bytes:
    out = [encode_u8(1 if o.trade else 0)]
    out.append(encode_u8(1 if o.item is not None else 0))
    out.append(encode_u16(o.item if o.item is not None else 0))
    out.append(encode_uint(o.payment))
    if o.lottery is None:
        out.append(encode_u8(0))
    else:
        out.append(encode_u8(1))
        out.append(encode_u8(len(o.lottery)))
        out.append(bytes(o.lottery))
    return b"".join(out)


def _parse_outcome(payload: bytes, phase: str) -> Outcome:
    try:
        r = Reader(payload)
        trade = r.u8()
        has_item = r.u8()
        item = r.u16()
        payment = r.uint()
        has_lottery = r.u8()
        lottery = None
        if has_lottery == 1:
            n = r.u8()
            lottery = tuple(r.take(n))
        elif has_lottery != 0:
            raise CodecError("bad lottery flag")
        r.finish()
    except CodecError as exc:
        _fail(phase, f"malformed outcome: {exc}")
    if trade not in (0, 1) or has_item not in (0, 1):
        _fail(phase, "bad outcome flags")
    if has_item == 0 and item != 0:
        _fail(phase, "non-canonical outcome encoding")
    if lottery is not None and any(b not in (0, 1) for b in lottery):
        _fail(phase, "lottery record bits must be 0 or 1")
    return Outcome(
        trade=bool(trade),
        item=item if has_item else None,
        payment=payment,
        lottery=lottery,
    )


# -- mechanism case selection (shared by seller and verifier) -------------------


def second_price_case(prices: tuple[int, ...], bids: list[int]) -> tuple[str, int, int, int]:
    """Returns (case, winner, top, second) for the hidden-reserve auction."""
    s = prices[0]
    top = max(bids)
    winner = bids.index(top)
    rest = sorted(bids, reverse=True)
    second = rest[1]
    if s > top:
        return "above", winner, top, second
    if s > second:
        return "between", winner, top, second
    return "below", winner, top, second


def unit_demand_choice(prices: tuple[int, int], values: list[int]) -> int | None:
    """Utility-maximizing feasible item, ties to the lower index."""
    feasible = [i for i in (0, 1) if values[i] >= prices[i]]
    if not feasible:
        return None
    return max(feasible, key=lambda i: (values[i] - prices[i], -i))


def two_part_case(prices: tuple[int, int], v: int) -> str:
    """Thresholds v/2 < s are integerized as s >= floor(v/2) + 1."""
    t = v // 2 + 1
    if prices[0] >= t:
        return "nothing"
    if prices[1] >= t:
        return "lottery"
    return "full"


# -- seller session --------------------------------------------------------------


class SellerSession:
    """The committing party.  Emits message batches and tracks the running
    frame log so every proof binds the entire conversation so far."""

    def __init__(
        self,
        ref: RefString,
        spec: MechanismSpec,
        rng: random.Random,
        coin_value: int | None = None,
    ):
        self.ref = ref
        self.spec = spec
        self.rng = rng
        self.phase = "commit"
        self.frames: list[bytes] = []
        self.outcome: Outcome | None = None
        self.width = width_of(spec.bound)
        self._coin_value = coin_value  # test hook: scripted coin draw
        self._coms: list[IntCommitment] = []
        self._ops: list[list[BitOpening]] = []
        self._pairs: list[ComplementPair] = []
        self._pair_ops: list[tuple[BitOpening, BitOpening]] = []

    # frame bookkeeping

    def _prefix(self) -> bytes:
        return seed_frame(self.ref.seed) + b"".join(self.frames)

    def _emit(self, tag: int, payload: bytes) -> Message:
        msg = Message(tag, payload)
        self.frames.append(msg.frame())
        return msg

    def _absorb(self, msg: Message):
        self.frames.append(msg.frame())

    @property
    def awaiting_mask(self) -> bool:
        return self.phase == "mask"

    # protocol steps

    def begin(self) -> list[Message]:
        if self.phase != "commit":
            raise VerificationFailed("commit", f"out-of-order call in phase {self.phase}")
        for price in self.spec.prices:
            com, ops = commit_int(self.ref, price, self.width, self.rng)
            self._coms.append(com)
            self._ops.append(ops)
        out = [self._emit(TAG_COMMIT, _commit_payload(self._coms))]
        if self.spec.kind == "ex3":
            bundle = prove_le_committed(
                self.ref,
                self._coms[0],
                self._ops[0],
                self._coms[1],
                self._ops[1],
                self._prefix(),
                self.rng,
            )
            out.append(self._emit(TAG_COMMIT_PROOF, encode_bundle(bundle)))
        self.phase = "report"
        return out

    def receive_reports(self, msgs: list[Message]) -> list[Message]:
        if self.phase != "report":
            raise VerificationFailed("report", f"out-of-order message in phase {self.phase}")
        expected = self.spec.n_buyers if self.spec.kind == "ex1multi" else 1
        per_msg = 2 if self.spec.kind == "ex2" else 1
        if len(msgs) != expected:
            _fail("report", f"expected {expected} report message(s), got {len(msgs)}")
        values: list[int] = []
        for i, msg in enumerate(msgs):
            if msg.tag != TAG_TYPE_REPORT:
                _fail("report", f"unexpected tag {msg.tag:#x}")
            values.extend(_parse_report(msg.payload, "report", self.spec.bound, i, per_msg))
            self._absorb(msg)
        builder = getattr(self, f"_evaluate_{self.spec.kind}")
        return builder(values)

    def receive_mask(self, msg: Message) -> list[Message]:
        if self.phase != "mask":
            raise VerificationFailed("mask", f"out-of-order message in phase {self.phase}")
        if msg.tag != TAG_COIN_MASK:
            _fail("mask", f"unexpected tag {msg.tag:#x}")
        mask = _parse_mask(msg.payload, "mask", len(self._pairs))
        self._absorb(msg)
        if self.spec.kind == "ex3":
            return self._finish_ex3(mask[0])
        return self._finish_ex4(mask)

    def _final(self, outcome: Outcome) -> Message:
        self.outcome = outcome
        self.phase = "done"
        return self._emit(TAG_OUTCOME, encode_outcome(outcome))

    # per-kind evaluation

    def _evaluate_ex1(self, values: list[int]) -> list[Message]:
        s = self.spec.prices[0]
        v = values[0]
        out = []
        if s <= v:
            out.append(self._emit(TAG_REVEAL, _reveal_payload(0, self._ops[0])))
            outcome = Outcome(trade=True, item=0, payment=s)
        else:
            bundle = prove_ge_public(
                self.ref, self._coms[0], self._ops[0], v + 1, self._prefix(), self.rng
            )
            out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_GE0, encode_bundle(bundle))))
            outcome = Outcome(trade=False, payment=0)
        out.append(self._final(outcome))
        return out

    def _evaluate_ex1multi(self, bids: list[int]) -> list[Message]:
        case, winner, top, second = second_price_case(self.spec.prices, bids)
        out = []
        if case == "above":
            bundle = prove_ge_public(
                self.ref, self._coms[0], self._ops[0], top + 1, self._prefix(), self.rng
            )
            out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_GE0, encode_bundle(bundle))))
            outcome = Outcome(trade=False, payment=0)
        elif case == "between":
            out.append(self._emit(TAG_REVEAL, _reveal_payload(0, self._ops[0])))
            outcome = Outcome(trade=True, item=winner, payment=self.spec.prices[0])
        else:
            bundle = prove_le_public(
                self.ref, self._coms[0], self._ops[0], second, self._prefix(), self.rng
            )
            out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_LE0, encode_bundle(bundle))))
            outcome = Outcome(trade=True, item=winner, payment=second)
        out.append(self._final(outcome))
        return out

    def _evaluate_ex2(self, values: list[int]) -> list[Message]:
        prices = self.spec.prices
        chosen = unit_demand_choice(prices, values)
        out = []
        if chosen is None:
            for i in (0, 1):
                bundle = prove_ge_public(
                    self.ref, self._coms[i], self._ops[i], values[i] + 1, self._prefix(), self.rng
                )
                claim = CLAIM_GE0 if i == 0 else CLAIM_GE1
                out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(claim, encode_bundle(bundle))))
            outcome = Outcome(trade=False, payment=0)
        else:
            other = 1 - chosen
            out.append(self._emit(TAG_REVEAL, _reveal_payload(chosen, self._ops[chosen])))
            bound = prices[chosen] - values[chosen] + values[other]
            if bound >= 1:
                bundle = prove_ge_public(
                    self.ref, self._coms[other], self._ops[other], bound, self._prefix(), self.rng
                )
                claim = CLAIM_GE0 if other == 0 else CLAIM_GE1
                out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(claim, encode_bundle(bundle))))
            outcome = Outcome(trade=True, item=chosen, payment=prices[chosen])
        out.append(self._final(outcome))
        return out

    def _evaluate_ex3(self, values: list[int]) -> list[Message]:
        v = values[0]
        t = v // 2 + 1
        case = two_part_case(self.spec.prices, v)
        out = []
        if case == "nothing":
            bundle = prove_ge_public(
                self.ref, self._coms[0], self._ops[0], t, self._prefix(), self.rng
            )
            out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_GE0, encode_bundle(bundle))))
            out.append(self._final(Outcome(trade=False, payment=0)))
            return out
        if case == "lottery":
            out.append(self._emit(TAG_REVEAL, _reveal_payload(0, self._ops[0])))
            bundle = prove_ge_public(
                self.ref, self._coms[1], self._ops[1], t, self._prefix(), self.rng
            )
            out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_GE1, encode_bundle(bundle))))
            x = self._coin_value if self._coin_value is not None else self.rng.getrandbits(1)
            pair, ops = complement_commit(self.ref, x, self.rng)
            self._pairs = [pair]
            self._pair_ops = [ops]
            proofs = prove_complement(self.ref, pair, ops, self._prefix(), self.rng, 0)
            out.append(self._emit(TAG_COIN_PAIR, _coin_pair_payload([pair], [proofs])))
            self.phase = "mask"
            return out
        total, carry_com, bundle = prove_sum(
            self.ref,
            self._coms[0],
            self._ops[0],
            self._coms[1],
            self._ops[1],
            self._prefix(),
            self.rng,
        )
        out.append(
            self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_SUM, _sum_body(total, carry_com, bundle)))
        )
        out.append(self._final(Outcome(trade=True, item=0, payment=total)))
        return out

    def _finish_ex3(self, y: int) -> list[Message]:
        opening = self._pair_ops[0][y]
        z = opening.bit
        out = [self._emit(TAG_VERDICT, encode_opening(opening))]
        outcome = Outcome(
            trade=z == 1,
            item=0 if z == 1 else None,
            payment=self.spec.prices[0],
            lottery=(y, z),
        )
        out.append(self._final(outcome))
        return out

    def _evaluate_ex4(self, values: list[int]) -> list[Message]:
        s = self.spec.prices[0]
        v = values[0]
        out = []
        if v < s:
            bundle = prove_ge_public(
                self.ref, self._coms[0], self._ops[0], v + 1, self._prefix(), self.rng
            )
            out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_GE0, encode_bundle(bundle))))
            out.append(self._final(Outcome(trade=False, payment=0)))
            return out
        bundle = prove_le_public(
            self.ref, self._coms[0], self._ops[0], v, self._prefix(), self.rng
        )
        out.append(self._emit(TAG_EVAL_PROOF, _proof_payload(CLAIM_LE0, encode_bundle(bundle))))
        x = self._coin_value if self._coin_value is not None else self.rng.randrange(self.spec.bound)
        x_bits = int_bits(x, self.width)
        self._pairs = []
        self._pair_ops = []
        proofs = []
        prefix = self._prefix()
        for idx, bit in enumerate(x_bits):
            pair, ops = complement_commit(self.ref, bit, self.rng)
            self._pairs.append(pair)
            self._pair_ops.append(ops)
            proofs.append(prove_complement(self.ref, pair, ops, prefix, self.rng, idx))
        out.append(self._emit(TAG_COIN_PAIR, _coin_pair_payload(self._pairs, proofs)))
        self.phase = "mask"
        return out

    def _finish_ex4(self, mask: list[int]) -> list[Message]:
        z_com = coin_select(self._pairs, mask)
        z_ops = coin_openings(self._pair_ops, mask)
        verdict, borrow_com, bundle = prove_lt_committed(
            self.ref, z_com, z_ops, self._coms[0], self._ops[0], self._prefix(), self.rng
        )
        payload = encode_u8(verdict) + encode_int_commitment(borrow_com) + encode_bundle(bundle)
        out = [self._emit(TAG_VERDICT, payload)]
        payment = self.spec.bound if verdict == 1 else 0
        outcome = Outcome(trade=True, item=0, payment=payment, lottery=(*mask, verdict))
        out.append(self._final(outcome))
        return out


# -- buyer session ----------------------------------------------------------------


class BuyerSession:
    """The verifying party.  Produces reports and coin masks, aborts on the
    first bad message, and replays the full transcript at the end."""

    def __init__(
        self,
        ref: RefString,
        kind: str,
        bound: int,
        values: list[int],
        rng: random.Random,
        mask_value: int | None = None,
    ):
        if kind not in KINDS:
            raise ParameterError(f"unknown kind {kind!r}")
        self.ref = ref
        self.kind = kind
        self.bound = bound
        self.width = width_of(bound)
        expected = 2 if kind == "ex2" else len(values) if kind == "ex1multi" else 1
        if kind == "ex1multi" and len(values) < 2:
            raise ParameterError("ex1multi needs at least two bids")
        if len(values) != expected:
            raise ParameterError(f"{kind} takes {expected} reported value(s)")
        for v in values:
            if not 0 <= v < bound:
                raise ParameterError(f"value {v} outside {{0,...,{bound - 1}}}")
        self.values = list(values)
        self.rng = rng
        self.mask_value = mask_value  # test hook: scripted mask draw
        self.messages: list[Message] = []
        self.failed = False

    def _absorb(self, msg: Message):
        self.messages.append(msg)

    def _prefix_before_last(self) -> bytes:
        return seed_frame(self.ref.seed) + b"".join(m.frame() for m in self.messages[:-1])

    def _guard(self):
        if self.failed:
            raise VerificationFailed("session", "session already aborted")

    def receive_commit(self, msgs: list[Message]) -> list[Message]:
        self._guard()
        try:
            expect = [TAG_COMMIT, TAG_COMMIT_PROOF] if self.kind == "ex3" else [TAG_COMMIT]
            if [m.tag for m in msgs] != expect:
                _fail("commit", f"unexpected message tags {[m.tag for m in msgs]}")
            count = 2 if self.kind in ("ex2", "ex3") else 1
            coms = _parse_commit(self.ref, msgs[0].payload, "commit", count, self.width)
            self._absorb(msgs[0])
            if self.kind == "ex3":
                self._absorb(msgs[1])
                prefix = self._prefix_before_last()
                shapes = [
                    (1, 1) + (2,) * (i - 1) for i in range(1, self.width + 1)
                ]
                try:
                    r = Reader(msgs[1].payload)
                    bundle = read_bundle(r, self.ref.params, shapes)
                    r.finish()
                except CodecError as exc:
                    _fail("commit-proof", f"malformed certificate: {exc}")
                if not verify_le_committed(self.ref, coms[0], coms[1], bundle, prefix):
                    _fail("commit-proof", "incentive certificate does not verify")
        except VerificationFailed:
            self.failed = True
            raise
        out = []
        if self.kind == "ex2":
            out.append(Message(TAG_TYPE_REPORT, _report_payload(0, self.values)))
        elif self.kind == "ex1multi":
            for i, v in enumerate(self.values):
                out.append(Message(TAG_TYPE_REPORT, _report_payload(i, [v])))
        else:
            out.append(Message(TAG_TYPE_REPORT, _report_payload(0, self.values)))
        for msg in out:
            self._absorb(msg)
        return out

    def receive_evidence(self, msgs: list[Message]) -> Message | None:
        """Absorb an evidence batch; if it ends with a coin-pair message,
        verify the complement proofs and answer with a fresh mask."""
        self._guard()
        for msg in msgs:
            self._absorb(msg)
        if msgs and msgs[-1].tag == TAG_COIN_PAIR:
            count = 1 if self.kind == "ex3" else self.width
            try:
                pairs, proofs = _parse_coin_pairs(self.ref, msgs[-1].payload, "coin", count)
                prefix = self._prefix_before_last()
                for idx, (pair, pr) in enumerate(zip(pairs, proofs)):
                    if not verify_complement(self.ref, pair, pr, prefix, idx):
                        _fail("coin", "complement proof does not verify", index=idx)
            except VerificationFailed:
                self.failed = True
                raise
            if self.kind == "ex3":
                y = self.mask_value if self.mask_value is not None else self.rng.getrandbits(1)
                mask = [y]
            else:
                y = (
                    self.mask_value
                    if self.mask_value is not None
                    else self.rng.randrange(self.bound)
                )
                mask = int_bits(y, self.width)
            msg = Message(TAG_COIN_MASK, _mask_payload(mask))
            self._absorb(msg)
            return msg
        return None

    def receive_final(self, msgs: list[Message]) -> Outcome:
        """Absorb the closing batch and replay the whole conversation."""
        self._guard()
        for msg in msgs:
            self._absorb(msg)
        try:
            outcome = replay(self.ref, self.kind, self.bound, self.messages)
        except VerificationFailed:
            self.failed = True
            raise
        return outcome


# -- transcript verification ---------------------------------------------------


class _Walk:
    """Message cursor that carries the frame log for Fiat-Shamir prefixes."""

    def __init__(self, ref: RefString, messages: list[Message]):
        self.ref = ref
        self.messages = messages
        self.idx = 0
        self._frames: list[bytes] = []

    def peek(self) -> int | None:
        if self.idx < len(self.messages):
            return self.messages[self.idx].tag
        return None

    def take(self, tag: int, phase: str) -> tuple[Message, bytes]:
        if self.idx >= len(self.messages):
            _fail(phase, "transcript truncated")
        msg = self.messages[self.idx]
        if msg.tag != tag:
            _fail(phase, f"expected tag {tag:#x}, found {msg.tag:#x}", index=self.idx)
        prefix = seed_frame(self.ref.seed) + b"".join(self._frames)
        self._frames.append(msg.frame())
        self.idx += 1
        return msg, prefix

    def finish(self, phase: str):
        if self.idx != len(self.messages):
            _fail(phase, "trailing messages after outcome", index=self.idx)


def _ge_shapes(width: int, w: int) -> list[tuple[int, ...]]:
    return [(1,) * len(ge_targets(w, width, i)) for i in ge_positions(w, width)]


def _le_shapes(width: int, w: int) -> list[tuple[int, ...]]:
    return [(1,) * len(le_targets(w, width, i)) for i in le_positions(w, width)]


def _read_claim_bundle(
    ref: RefString, msg: Message, phase: str, shapes: list[tuple[int, ...]]
) -> tuple[int, ProofBundle]:
    try:
        r = Reader(msg.payload)
        claim = r.u8()
        bundle = read_bundle(r, ref.params, shapes)
        r.finish()
    except CodecError as exc:
        _fail(phase, f"malformed proof message: {exc}")
    return claim, bundle


def _claim_of(msg: Message, phase: str) -> int:
    if not msg.payload:
        _fail(phase, "empty proof message")
    return msg.payload[0]


def _expect_ge(ref, walk, com, w, claim, phase) -> None:
    msg, prefix = walk.take(TAG_EVAL_PROOF, phase)
    got_claim, bundle = _read_claim_bundle(ref, msg, phase, _ge_shapes(com.width, w))
    if got_claim != claim:
        _fail(phase, f"unexpected claim byte {got_claim:#x}")
    if not verify_ge_public(ref, com, w, bundle, prefix):
        _fail(phase, f"lower-bound proof against {w} does not verify")


def _expect_le(ref, walk, com, w, claim, phase) -> None:
    msg, prefix = walk.take(TAG_EVAL_PROOF, phase)
    got_claim, bundle = _read_claim_bundle(ref, msg, phase, _le_shapes(com.width, w))
    if got_claim != claim:
        _fail(phase, f"unexpected claim byte {got_claim:#x}")
    if not verify_le_public(ref, com, w, bundle, prefix):
        _fail(phase, f"upper-bound proof against {w} does not verify")


def _take_reveal(ref, walk, com, phase) -> tuple[int, list[BitOpening]]:
    msg, _ = walk.take(TAG_REVEAL, phase)
    return _parse_reveal(ref, msg.payload, phase, com.width)


def _finish_with_outcome(walk: _Walk, expected: Outcome) -> Outcome:
    msg, _ = walk.take(TAG_OUTCOME, "outcome")
    announced = _parse_outcome(msg.payload, "outcome")
    if announced != expected:
        _fail("outcome", f"announced {announced}, evidence implies {expected}")
    walk.finish("outcome")
    return announced


def _verify_ex1(ref: RefString, bound: int, messages: list[Message]) -> Outcome:
    width = width_of(bound)
    walk = _Walk(ref, messages)
    msg, _ = walk.take(TAG_COMMIT, "commit")
    (com,) = _parse_commit(ref, msg.payload, "commit", 1, width)
    msg, _ = walk.take(TAG_TYPE_REPORT, "report")
    (v,) = _parse_report(msg.payload, "report", bound, 0, 1)
    tag = walk.peek()
    if tag == TAG_REVEAL:
        label, ops = _take_reveal(ref, walk, com, "reveal")
        if label != 0:
            _fail("reveal", f"unexpected reveal label {label}")
        s = reveal_int(ref, com, ops)
        if s > v:
            _fail("reveal", f"trade claimed but revealed price {s} exceeds report {v}")
        expected = Outcome(trade=True, item=0, payment=s)
    elif tag == TAG_EVAL_PROOF:
        if v == bound - 1:
            _fail("evaluate", "no-trade claim impossible against a maximal report")
        _expect_ge(ref, walk, com, v + 1, CLAIM_GE0, "evaluate")
        expected = Outcome(trade=False, payment=0)
    else:
        _fail("evaluate", f"unexpected tag {tag}")
    return _finish_with_outcome(walk, expected)


def _verify_ex1multi(ref: RefString, bound: int, messages: list[Message]) -> Outcome:
    width = width_of(bound)
    walk = _Walk(ref, messages)
    msg, _ = walk.take(TAG_COMMIT, "commit")
    (com,) = _parse_commit(ref, msg.payload, "commit", 1, width)
    bids: list[int] = []
    while walk.peek() == TAG_TYPE_REPORT:
        msg, _ = walk.take(TAG_TYPE_REPORT, "report")
        bids.extend(_parse_report(msg.payload, "report", bound, len(bids), 1))
    if len(bids) < 2:
        _fail("report", f"need at least two bids, got {len(bids)}")
    top = max(bids)
    winner = bids.index(top)
    second = sorted(bids, reverse=True)[1]
    tag = walk.peek()
    if tag == TAG_REVEAL:
        label, ops = _take_reveal(ref, walk, com, "reveal")
        if label != 0:
            _fail("reveal", f"unexpected reveal label {label}")
        s = reveal_int(ref, com, ops)
        if not second < s <= top:
            _fail("reveal", f"revealed reserve {s} inconsistent with case bounds")
        expected = Outcome(trade=True, item=winner, payment=s)
    elif tag == TAG_EVAL_PROOF:
        claim = _claim_of(messages[walk.idx], "evaluate")
        if claim == CLAIM_GE0:
            if top == bound - 1:
                _fail("evaluate", "no-trade claim impossible against a maximal bid")
            _expect_ge(ref, walk, com, top + 1, CLAIM_GE0, "evaluate")
            expected = Outcome(trade=False, payment=0)
        else:
            _expect_le(ref, walk, com, second, CLAIM_LE0, "evaluate")
            expected = Outcome(trade=True, item=winner, payment=second)
    else:
        _fail("evaluate", f"unexpected tag {tag}")
    return _finish_with_outcome(walk, expected)


def _verify_ex2(ref: RefString, bound: int, messages: list[Message]) -> Outcome:
    width = width_of(bound)
    walk = _Walk(ref, messages)
    msg, _ = walk.take(TAG_COMMIT, "commit")
    coms = _parse_commit(ref, msg.payload, "commit", 2, width)
    msg, _ = walk.take(TAG_TYPE_REPORT, "report")
    values = _parse_report(msg.payload, "report", bound, 0, 2)
    tag = walk.peek()
    if tag == TAG_EVAL_PROOF:
        for i in (0, 1):
            if values[i] == bound - 1:
                _fail("evaluate", "no-trade claim impossible against a maximal value")
            claim = CLAIM_GE0 if i == 0 else CLAIM_GE1
            _expect_ge(ref, walk, coms[i], values[i] + 1, claim, "evaluate")
        expected = Outcome(trade=False, payment=0)
    elif tag == TAG_REVEAL:
        msg, _ = walk.take(TAG_REVEAL, "reveal")
        chosen, ops = _parse_reveal(ref, msg.payload, "reveal", width)
        if chosen not in (0, 1):
            _fail("reveal", f"bad item index {chosen}")
        price = reveal_int(ref, coms[chosen], ops)
        if values[chosen] < price:
            _fail("reveal", "sold item is not affordable at its revealed price")
        other = 1 - chosen
        hidden_bound = price - values[chosen] + values[other]
        if hidden_bound >= bound:
            _fail("evaluate", "required lower bound exceeds the price domain")
        if hidden_bound >= 1:
            claim = CLAIM_GE0 if other == 0 else CLAIM_GE1
            _expect_ge(ref, walk, coms[other], hidden_bound, claim, "evaluate")
        expected = Outcome(trade=True, item=chosen, payment=price)
    else:
        _fail("evaluate", f"unexpected tag {tag}")
    return _finish_with_outcome(walk, expected)


def _verify_ex3(ref: RefString, bound: int, messages: list[Message]) -> Outcome:
    width = width_of(bound)
    walk = _Walk(ref, messages)
    msg, _ = walk.take(TAG_COMMIT, "commit")
    coms = _parse_commit(ref, msg.payload, "commit", 2, width)
    msg, prefix = walk.take(TAG_COMMIT_PROOF, "commit-proof")
    shapes = [(1, 1) + (2,) * (i - 1) for i in range(1, width + 1)]
    try:
        r = Reader(msg.payload)
        ic_bundle = read_bundle(r, ref.params, shapes)
        r.finish()
    except CodecError as exc:
        _fail("commit-proof", f"malformed certificate: {exc}")
    if not verify_le_committed(ref, coms[0], coms[1], ic_bundle, prefix):
        _fail("commit-proof", "incentive certificate does not verify")
    msg, _ = walk.take(TAG_TYPE_REPORT, "report")
    (v,) = _parse_report(msg.payload, "report", bound, 0, 1)
    t = v // 2 + 1
    tag = walk.peek()
    if tag == TAG_EVAL_PROOF and _claim_of(messages[walk.idx], "evaluate") == CLAIM_GE0:
        _expect_ge(ref, walk, coms[0], t, CLAIM_GE0, "evaluate")
        expected = Outcome(trade=False, payment=0)
        return _finish_with_outcome(walk, expected)
    if tag == TAG_EVAL_PROOF and _claim_of(messages[walk.idx], "evaluate") == CLAIM_SUM:
        msg, prefix = walk.take(TAG_EVAL_PROOF, "evaluate")
        try:
            r = Reader(msg.payload)
            if r.u8() != CLAIM_SUM:
                raise CodecError("claim byte changed mid-parse")
            total = r.uint()
            carry_com = read_int_commitment(r, ref.params.q)
            gate_shapes: list[tuple[int, ...]] = [(1,)]
            for i in range(1, width + 1):
                gate_shapes.append((3, 3) if i == width else (4, 4, 4, 4))
            bundle = read_bundle(r, ref.params, gate_shapes)
            r.finish()
        except CodecError as exc:
            _fail("evaluate", f"malformed sum proof: {exc}")
        for i, bit in enumerate(carry_com.bits, start=1):
            if not ref.params.is_member(bit.value):
                _fail("evaluate", "carry commitment outside the subgroup", index=i)
        if not verify_sum(ref, coms[0], coms[1], total, carry_com, bundle, prefix):
            _fail("evaluate", "sum proof does not verify")
        expected = Outcome(trade=True, item=0, payment=total)
        return _finish_with_outcome(walk, expected)
    if tag == TAG_REVEAL:
        label, ops = _take_reveal(ref, walk, coms[0], "reveal")
        if label != 0:
            _fail("reveal", f"unexpected reveal label {label}")
        s1 = reveal_int(ref, coms[0], ops)
        if s1 >= t:
            _fail("reveal", "lottery case claimed but the base price clears the threshold")
        _expect_ge(ref, walk, coms[1], t, CLAIM_GE1, "evaluate")
        msg, prefix = walk.take(TAG_COIN_PAIR, "coin")
        pairs, proofs = _parse_coin_pairs(ref, msg.payload, "coin", 1)
        if not verify_complement(ref, pairs[0], proofs[0], prefix, 0):
            _fail("coin", "complement proof does not verify")
        msg, _ = walk.take(TAG_COIN_MASK, "coin")
        (y,) = _parse_mask(msg.payload, "coin", 1)
        msg, _ = walk.take(TAG_VERDICT, "verdict")
        try:
            r = Reader(msg.payload)
            opening = read_opening(r, ref.params.p)
            r.finish()
        except CodecError as exc:
            _fail("verdict", f"malformed coin opening: {exc}")
        selected = pairs[0].r_com if y == 0 else pairs[0].rp_com
        if not verify_opening(ref, selected, opening):
            _fail("verdict", "coin opening does not match the selected commitment")
        z = opening.bit
        expected = Outcome(
            trade=z == 1,
            item=0 if z == 1 else None,
            payment=s1,
            lottery=(y, z),
        )
        return _finish_with_outcome(walk, expected)
    _fail("evaluate", f"unexpected tag {tag}")


def _verify_ex4(ref: RefString, bound: int, messages: list[Message]) -> Outcome:
    width = width_of(bound)
    walk = _Walk(ref, messages)
    msg, _ = walk.take(TAG_COMMIT, "commit")
    (com,) = _parse_commit(ref, msg.payload, "commit", 1, width)
    msg, _ = walk.take(TAG_TYPE_REPORT, "report")
    (v,) = _parse_report(msg.payload, "report", bound, 0, 1)
    tag = walk.peek()
    if tag != TAG_EVAL_PROOF:
        _fail("evaluate", f"unexpected tag {tag}")
    claim = _claim_of(messages[walk.idx], "evaluate")
    if claim == CLAIM_GE0:
        if v == bound - 1:
            _fail("evaluate", "no-trade claim impossible against a maximal report")
        _expect_ge(ref, walk, com, v + 1, CLAIM_GE0, "evaluate")
        return _finish_with_outcome(walk, Outcome(trade=False, payment=0))
    _expect_le(ref, walk, com, v, CLAIM_LE0, "evaluate")
    msg, prefix = walk.take(TAG_COIN_PAIR, "coin")
    pairs, proofs = _parse_coin_pairs(ref, msg.payload, "coin", width)
    for idx, (pair, pr) in enumerate(zip(pairs, proofs)):
        if not verify_complement(ref, pair, pr, prefix, idx):
            _fail("coin", "complement proof does not verify", index=idx)
    msg, _ = walk.take(TAG_COIN_MASK, "coin")
    mask = _parse_mask(msg.payload, "coin", width)
    msg, prefix = walk.take(TAG_VERDICT, "verdict")
    try:
        r = Reader(msg.payload)
        verdict = r.u8()
        borrow_com = read_int_commitment(r, ref.params.q)
        gate_shapes: list[tuple[int, ...]] = [(1,)]
        for i in range(1, width + 1):
            gate_shapes.append((3, 3, 3, 3) if i == width else (4,) * 8)
        bundle = read_bundle(r, ref.params, gate_shapes)
        r.finish()
    except CodecError as exc:
        _fail("verdict", f"malformed comparison proof: {exc}")
    if verdict not in (0, 1):
        _fail("verdict", f"bad verdict byte {verdict}")
    for i, bit in enumerate(borrow_com.bits, start=1):
        if not ref.params.is_member(bit.value):
            _fail("verdict", "borrow commitment outside the subgroup", index=i)
    z_com = coin_select(pairs, mask)
    if not verify_lt_committed(ref, z_com, com, verdict, borrow_com, bundle, prefix):
        _fail("verdict", "comparison proof does not verify")
    payment = bound if verdict == 1 else 0
    expected = Outcome(trade=True, item=0, payment=payment, lottery=(*mask, verdict))
    return _finish_with_outcome(walk, expected)


_VERIFIERS = {
    "ex1": _verify_ex1,
    "ex1multi": _verify_ex1multi,
    "ex2": _verify_ex2,
    "ex3": _verify_ex3,
    "ex4": _verify_ex4,
}


def replay(ref: RefString, kind: str, bound: int, messages: list[Message]) -> Outcome:
    """Re-run every buyer-side check over a complete message log."""
    if kind not in _VERIFIERS:
        _fail("params", f"unknown protocol kind {kind!r}")
    try:
        return _VERIFIERS[kind](ref, bound, messages)
    except (NonMemberError, ParameterError, CodecError) as exc:
        raise VerificationFailed("replay", str(exc)) from exc


def verify_transcript(ref: RefString, transcript: Transcript) -> Outcome:
    """Replay a full transcript; returns the outcome iff every check passes."""
    if transcript.seed != ref.seed:
        _fail("params", "transcript seed differs from the reference string")
    return replay(ref, transcript.kind, transcript.bound, transcript.messages)


# -- in-process driver -------------------------------------------------------------


def run_local(
    ref: RefString,
    spec: MechanismSpec,
    values: list[int],
    seller_rng: random.Random,
    buyer_rng: random.Random,
    coin_value: int | None = None,
    mask_value: int | None = None,
) -> tuple[Outcome, Transcript]:
    """Run seller and buyer in one process and return the verified outcome."""
    seller = SellerSession(ref, spec, seller_rng, coin_value=coin_value)
    buyer = BuyerSession(ref, spec.kind, spec.bound, values, buyer_rng, mask_value=mask_value)
    ordered: list[Message] = []
    commit_msgs = seller.begin()
    ordered.extend(commit_msgs)
    reports = buyer.receive_commit(commit_msgs)
    ordered.extend(reports)
    evidence = seller.receive_reports(reports)
    ordered.extend(evidence)
    if seller.awaiting_mask:
        mask = buyer.receive_evidence(evidence)
        ordered.append(mask)
        closing = seller.receive_mask(mask)
        ordered.extend(closing)
        outcome = buyer.receive_final(closing)
    else:
        outcome = buyer.receive_final(evidence)
    if seller.outcome != outcome:
        raise VerificationFailed("outcome", "seller and buyer disagree on the outcome")
    transcript = Transcript(
        kind=spec.kind, bound=spec.bound, seed=ref.seed, messages=ordered
    )
    return outcome, transcript
