"""Zero-knowledge relations over committed integers.

Each relation compiles to one or more matrix statements for the sigma
engine: inequalities against public bounds, inequalities between two
committed values, bit gates with explicit truth tables, the addition
circuit with committed carries, complement pairs, verifiable coin flips,
and the strict comparison circuit with committed borrows.

Bit positions are 1-based with position 1 the most significant bit,
matching the package-wide integer convention.  Provers refuse (raise
`RefuseToProve`) whenever the claimed relation has no witness; honest code
paths can never emit an unsound message.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .codec import Reader, encode_u8, encode_u16
from .commitments import (
    BitCommitment,
    BitOpening,
    IntCommitment,
    bits_value,
    commit_bit,
    commit_int,
    int_bits,
)
from .errors import CodecError, ParameterError, RefuseToProve
from .group import RefString
from .sigma import (
    CdsStatement,
    CdsWitness,
    NiProof,
    encode_proof,
    encode_statement,
    ni_prove,
    ni_verify,
    read_proof,
)

# Per-proof context labels: gadget kind + 1-based position.
_LBL_GE = 0x10
_LBL_LE = 0x11
_LBL_LE_COMMITTED = 0x12
_LBL_GATE = 0x13
_LBL_COMPLEMENT = 0x14

ProofBundle = list[tuple[int, NiProof]]


def _ctx(prefix: bytes, stmt: CdsStatement, label: int, position: int) -> bytes:
    return prefix + encode_statement(stmt) + encode_u8(label) + encode_u16(position)


# -- inequalities against a public bound --------------------------------------
#
# s >= w iff for every 1-position i of w the prover knows the log base h of
# one of {C_j | j = i or (j < i and w_j = 0)}; s <= w is the base-g dual
# over the 0-positions of w.


def ge_positions(w: int, width: int) -> list[int]:
    return [i for i, b in enumerate(int_bits(w, width), start=1) if b == 1]


def le_positions(w: int, width: int) -> list[int]:
    return [i for i, b in enumerate(int_bits(w, width), start=1) if b == 0]


def ge_targets(w: int, width: int, i: int) -> list[int]:
    w_bits = int_bits(w, width)
    return [j for j in range(1, i + 1) if j == i or w_bits[j - 1] == 0]


def le_targets(w: int, width: int, i: int) -> list[int]:
    w_bits = int_bits(w, width)
    return [j for j in range(1, i + 1) if j == i or w_bits[j - 1] == 1]


def ge_statement(ref: RefString, com: IntCommitment, w: int, i: int) -> CdsStatement:
    rows = tuple(((ref.h, com.bits[j - 1].value),) for j in ge_targets(w, com.width, i))
    return CdsStatement(params=ref.params, rows=rows)


def le_statement(ref: RefString, com: IntCommitment, w: int, i: int) -> CdsStatement:
    rows = tuple(((ref.g, com.bits[j - 1].value),) for j in le_targets(w, com.width, i))
    return CdsStatement(params=ref.params, rows=rows)


def _one_sided_prove(
    ref: RefString,
    com: IntCommitment,
    openings: list[BitOpening],
    w: int,
    ctx_prefix: bytes,
    rng: random.Random,
    *,
    greater: bool,
) -> ProofBundle:
    value = bits_value([op.bit for op in openings])
    if greater and value < w:
        raise RefuseToProve(f"committed value {value} < bound {w}")
    if not greater and value > w:
        raise RefuseToProve(f"committed value {value} > bound {w}")
    positions = ge_positions(w, com.width) if greater else le_positions(w, com.width)
    want_bit = 1 if greater else 0
    label = _LBL_GE if greater else _LBL_LE
    bundle: ProofBundle = []
    for i in positions:
        targets = ge_targets(w, com.width, i) if greater else le_targets(w, com.width, i)
        row = next((k for k, j in enumerate(targets) if openings[j - 1].bit == want_bit), None)
        if row is None:  # unreachable when the bound check above passed
            raise RefuseToProve(f"no witness at position {i}")
        stmt = (ge_statement if greater else le_statement)(ref, com, w, i)
        wit = CdsWitness(row=row, exps=(openings[targets[row] - 1].r,))
        bundle.append((i, ni_prove(stmt, wit, _ctx(ctx_prefix, stmt, label, i), rng)))
    return bundle


def _one_sided_verify(
    ref: RefString,
    com: IntCommitment,
    w: int,
    bundle: ProofBundle,
    ctx_prefix: bytes,
    *,
    greater: bool,
) -> bool:
    positions = ge_positions(w, com.width) if greater else le_positions(w, com.width)
    if [pos for pos, _ in bundle] != positions:
        return False
    label = _LBL_GE if greater else _LBL_LE
    for i, proof in bundle:
        stmt = (ge_statement if greater else le_statement)(ref, com, w, i)
        if not ni_verify(stmt, proof, _ctx(ctx_prefix, stmt, label, i)):
            return False
    return True


def prove_ge_public(ref, com, openings, w, ctx_prefix, rng) -> ProofBundle:
    """Prove the committed value is >= the public bound w."""
    if not 0 <= w < (1 << com.width):
        raise ParameterError(f"bound {w} out of range for width {com.width}")
    return _one_sided_prove(ref, com, openings, w, ctx_prefix, rng, greater=True)


def verify_ge_public(ref, com, w, bundle, ctx_prefix) -> bool:
    if not 0 <= w < (1 << com.width):
        return False
    return _one_sided_verify(ref, com, w, bundle, ctx_prefix, greater=True)


def prove_le_public(ref, com, openings, w, ctx_prefix, rng) -> ProofBundle:
    """Prove the committed value is <= the public bound w."""
    if not 0 <= w < (1 << com.width):
        raise ParameterError(f"bound {w} out of range for width {com.width}")
    return _one_sided_prove(ref, com, openings, w, ctx_prefix, rng, greater=False)


def verify_le_public(ref, com, w, bundle, ctx_prefix) -> bool:
    if not 0 <= w < (1 << com.width):
        return False
    return _one_sided_verify(ref, com, w, bundle, ctx_prefix, greater=False)


# -- committed <= committed ----------------------------------------------------
#
# a <= b iff for every i one of: a_i = 0, b_i = 1, or some j < i has
# a_j = 0 and b_j = 1.  Row widths vary: the first two options are single
# cells, each j-option is a two-cell AND row.


def le_committed_statement(
    ref: RefString, com_a: IntCommitment, com_b: IntCommitment, i: int
) -> CdsStatement:
    rows = [((ref.g, com_a.bits[i - 1].value),), ((ref.h, com_b.bits[i - 1].value),)]
    for j in range(1, i):
        rows.append(((ref.g, com_a.bits[j - 1].value), (ref.h, com_b.bits[j - 1].value)))
    return CdsStatement(params=ref.params, rows=tuple(rows))


def prove_le_committed(ref, com_a, ops_a, com_b, ops_b, ctx_prefix, rng) -> ProofBundle:
    """Prove committed a <= committed b, one matrix proof per bit position."""
    if com_a.width != com_b.width:
        raise ParameterError("widths must match")
    a = bits_value([op.bit for op in ops_a])
    b = bits_value([op.bit for op in ops_b])
    if a > b:
        raise RefuseToProve(f"{a} > {b}: no witness exists")
    bundle: ProofBundle = []
    for i in range(1, com_a.width + 1):
        if ops_a[i - 1].bit == 0:
            wit = CdsWitness(row=0, exps=(ops_a[i - 1].r,))
        elif ops_b[i - 1].bit == 1:
            wit = CdsWitness(row=1, exps=(ops_b[i - 1].r,))
        else:
            j = next(
                k for k in range(1, i) if ops_a[k - 1].bit == 0 and ops_b[k - 1].bit == 1
            )
            wit = CdsWitness(row=1 + j, exps=(ops_a[j - 1].r, ops_b[j - 1].r))
        stmt = le_committed_statement(ref, com_a, com_b, i)
        bundle.append((i, ni_prove(stmt, wit, _ctx(ctx_prefix, stmt, _LBL_LE_COMMITTED, i), rng)))
    return bundle


def verify_le_committed(ref, com_a, com_b, bundle, ctx_prefix) -> bool:
    if com_a.width != com_b.width:
        return False
    if [pos for pos, _ in bundle] != list(range(1, com_a.width + 1)):
        return False
    for i, proof in bundle:
        stmt = le_committed_statement(ref, com_a, com_b, i)
        if not ni_verify(stmt, proof, _ctx(ctx_prefix, stmt, _LBL_LE_COMMITTED, i)):
            return False
    return True


# -- generic truth-table gates --------------------------------------------------


@dataclass(frozen=True)
class GateSpec:
    """An n-ary relation given by its allowed bit assignments."""

    arity: int
    allowed: frozenset[tuple[int, ...]]

    def __post_init__(self):
        if not self.allowed:
            raise ParameterError("gate needs at least one allowed assignment")
        for row in self.allowed:
            if len(row) != self.arity or any(b not in (0, 1) for b in row):
                raise ParameterError(f"bad assignment {row}")

    def rows(self) -> list[tuple[int, ...]]:
        return sorted(self.allowed)


def gate_statement(ref: RefString, coms: list[BitCommitment], spec: GateSpec) -> CdsStatement:
    if len(coms) != spec.arity:
        raise ParameterError("commitment count must equal gate arity")
    rows = tuple(
        tuple((ref.g if b == 0 else ref.h, c.value) for b, c in zip(assignment, coms))
        for assignment in spec.rows()
    )
    return CdsStatement(params=ref.params, rows=rows)


def prove_gate(
    ref: RefString,
    coms: list[BitCommitment],
    openings: list[BitOpening],
    spec: GateSpec,
    ctx_prefix: bytes,
    rng: random.Random,
    position: int = 0,
) -> NiProof:
    """One matrix proof that the committed bits form an allowed assignment."""
    assignment = tuple(op.bit for op in openings)
    table = spec.rows()
    if assignment not in spec.allowed:
        raise RefuseToProve(f"assignment {assignment} not allowed by gate")
    wit = CdsWitness(row=table.index(assignment), exps=tuple(op.r for op in openings))
    stmt = gate_statement(ref, coms, spec)
    return ni_prove(stmt, wit, _ctx(ctx_prefix, stmt, _LBL_GATE, position), rng)


def verify_gate(
    ref: RefString,
    coms: list[BitCommitment],
    spec: GateSpec,
    proof: NiProof,
    ctx_prefix: bytes,
    position: int = 0,
) -> bool:
    stmt = gate_statement(ref, coms, spec)
    return ni_verify(stmt, proof, _ctx(ctx_prefix, stmt, _LBL_GATE, position))


# -- addition with committed carries --------------------------------------------
#
# The carry out of position i is the majority of (a_i, b_i, carry-in),
# with the carry into the least significant position fixed at zero.  The
# announced sum has width+1 bits; its top bit equals the outgoing carry of
# position 1 and is certified by a single-bit gate.


def _carry_bits(a_bits: list[int], b_bits: list[int]) -> list[int]:
    width = len(a_bits)
    # carries[i-1] = carry out of position i; the sentinel at index `width`
    # is the zero carry into the least significant position.
    carries = [0] * (width + 1)
    for i in range(width, 0, -1):
        carries[i - 1] = 1 if a_bits[i - 1] + b_bits[i - 1] + carries[i] >= 2 else 0
    return carries[:width]


def _adder_gate(sum_bit: int, lsb: bool) -> GateSpec:
    """Quadruples (a, b, carry_out, carry_in) consistent with the announced
    sum bit; at the LSB the carry-in is fixed to zero and the gate is ternary."""
    rows = []
    for a in (0, 1):
        for b in (0, 1):
            for cin in ((0,) if lsb else (0, 1)):
                if (a + b + cin) % 2 != sum_bit:
                    continue
                cout = 1 if a + b + cin >= 2 else 0
                rows.append((a, b, cout) if lsb else (a, b, cout, cin))
    return GateSpec(arity=3 if lsb else 4, allowed=frozenset(rows))


def _bit_value_gate(bit: int) -> GateSpec:
    """Degenerate arity-1 gate: 'this committed bit equals `bit`'."""
    return GateSpec(arity=1, allowed=frozenset({(bit,)}))


def prove_sum(
    ref: RefString,
    com1: IntCommitment,
    ops1: list[BitOpening],
    com2: IntCommitment,
    ops2: list[BitOpening],
    ctx_prefix: bytes,
    rng: random.Random,
) -> tuple[int, IntCommitment, ProofBundle]:
    """Announce s1+s2 publicly and prove it against the hidden summands.

    Returns the announced (width+1)-bit total, the carry commitments, and
    the gate proofs.  Carry openings never leave this function.
    """
    if com1.width != com2.width:
        raise ParameterError("widths must match")
    width = com1.width
    a_bits = [op.bit for op in ops1]
    b_bits = [op.bit for op in ops2]
    total = bits_value(a_bits) + bits_value(b_bits)
    carries = _carry_bits(a_bits, b_bits)
    carry_com, carry_ops = commit_int(ref, bits_value(carries), width, rng)
    total_bits = int_bits(total, width + 1)
    bundle: ProofBundle = []
    # Position 0 certifies that the announced top bit equals the carry out
    # of position 1.
    top_gate = _bit_value_gate(total_bits[0])
    bundle.append(
        (0, prove_gate(ref, [carry_com.bits[0]], [carry_ops[0]], top_gate, ctx_prefix, rng, 0))
    )
    for i in range(1, width + 1):
        lsb = i == width
        gate = _adder_gate(total_bits[i], lsb)
        coms = [com1.bits[i - 1], com2.bits[i - 1], carry_com.bits[i - 1]]
        ops = [ops1[i - 1], ops2[i - 1], carry_ops[i - 1]]
        if not lsb:
            coms.append(carry_com.bits[i])
            ops.append(carry_ops[i])
        bundle.append((i, prove_gate(ref, coms, ops, gate, ctx_prefix, rng, i)))
    return total, carry_com, bundle


def verify_sum(
    ref: RefString,
    com1: IntCommitment,
    com2: IntCommitment,
    total: int,
    carry_com: IntCommitment,
    bundle: ProofBundle,
    ctx_prefix: bytes,
) -> bool:
    """Recompute the allowed gate tables from the announced total and check
    every per-position proof."""
    if com1.width != com2.width or carry_com.width != com1.width:
        return False
    width = com1.width
    if not 0 <= total < (1 << (width + 1)):
        return False
    if [pos for pos, _ in bundle] != list(range(width + 1)):
        return False
    total_bits = int_bits(total, width + 1)
    proofs = dict(bundle)
    if not verify_gate(ref, [carry_com.bits[0]], _bit_value_gate(total_bits[0]), proofs[0], ctx_prefix, 0):
        return False
    for i in range(1, width + 1):
        lsb = i == width
        gate = _adder_gate(total_bits[i], lsb)
        coms = [com1.bits[i - 1], com2.bits[i - 1], carry_com.bits[i - 1]]
        if not lsb:
            coms.append(carry_com.bits[i])
        if not verify_gate(ref, coms, gate, proofs[i], ctx_prefix, i):
            return False
    return True


# -- complement pairs and coin flips ---------------------------------------------


@dataclass(frozen=True)
class ComplementPair:
    """Commitments to a hidden bit and to its complement."""

    r_com: BitCommitment
    rp_com: BitCommitment


def complement_commit(
    ref: RefString, bit: int, rng: random.Random
) -> tuple[ComplementPair, tuple[BitOpening, BitOpening]]:
    op = BitOpening(bit=bit, r=ref.params.exp_sample(rng))
    r_com = commit_bit(ref, op.bit, op.r)
    # Resample until the two elements differ: equal elements would be a
    # commitment opening to both bits, defeating the complement certificate.
    while True:
        opp = BitOpening(bit=1 - bit, r=ref.params.exp_sample(rng))
        rp_com = commit_bit(ref, opp.bit, opp.r)
        if rp_com.value != r_com.value:
            break
    return ComplementPair(r_com=r_com, rp_com=rp_com), (op, opp)


def _complement_statements(ref: RefString, pair: ComplementPair) -> list[CdsStatement]:
    targets = [pair.r_com.value, pair.rp_com.value]
    return [
        CdsStatement(params=ref.params, rows=tuple(((ref.g, t),) for t in targets)),
        CdsStatement(params=ref.params, rows=tuple(((ref.h, t),) for t in targets)),
    ]


def prove_complement(
    ref: RefString,
    pair: ComplementPair,
    openings: tuple[BitOpening, BitOpening],
    ctx_prefix: bytes,
    rng: random.Random,
    position: int = 0,
) -> list[NiProof]:
    """Two disjunction proofs: log base g of one element is known, and log
    base h of one element is known.  Under dlog hardness this certifies a
    complement pair without revealing which element commits which bit."""
    op, opp = openings
    if op.bit == opp.bit:
        raise RefuseToProve("not a complement pair: equal bits")
    stmts = _complement_statements(ref, pair)
    proofs = []
    for base_bit, stmt in enumerate(stmts):
        # The base-g proof's witness is the commitment to 0, the base-h
        # proof's the commitment to 1.
        row = 0 if op.bit == base_bit else 1
        exp = op.r if op.bit == base_bit else opp.r
        wit = CdsWitness(row=row, exps=(exp,))
        ctx = _ctx(ctx_prefix, stmt, _LBL_COMPLEMENT, 2 * position + base_bit)
        proofs.append(ni_prove(stmt, wit, ctx, rng))
    return proofs


def verify_complement(
    ref: RefString,
    pair: ComplementPair,
    proofs: list[NiProof],
    ctx_prefix: bytes,
    position: int = 0,
) -> bool:
    if len(proofs) != 2 or pair.r_com.value == pair.rp_com.value:
        return False
    for base_bit, (stmt, proof) in enumerate(zip(_complement_statements(ref, pair), proofs)):
        ctx = _ctx(ctx_prefix, stmt, _LBL_COMPLEMENT, 2 * position + base_bit)
        if not ni_verify(stmt, proof, ctx):
            return False
    return True


@dataclass(frozen=True)
class CommittedCoin:
    """A public commitment to x XOR y, assembled from the mask bits y."""

    pairs: tuple[ComplementPair, ...]
    mask: tuple[int, ...]
    z_com: IntCommitment


def coin_select(pairs: list[ComplementPair], mask: list[int]) -> IntCommitment:
    """Deterministic selection: bit i's commitment is the original when
    y_i = 0 and the complement when y_i = 1, so the result commits x XOR y."""
    if len(pairs) != len(mask) or any(b not in (0, 1) for b in mask):
        raise ParameterError("mask must supply one bit per pair")
    bits = tuple(p.r_com if y == 0 else p.rp_com for p, y in zip(pairs, mask))
    return IntCommitment(width=len(pairs), bits=bits)


def coin_flip(
    ref: RefString,
    pairs: list[ComplementPair],
    proofs: list[list[NiProof]],
    mask: list[int],
    ctx_prefix: bytes,
) -> CommittedCoin:
    """Verify the complement proofs, then select the masked commitment."""
    if len(proofs) != len(pairs):
        raise ParameterError("one proof pair per complement pair required")
    for idx, (pair, pr) in enumerate(zip(pairs, proofs)):
        if not verify_complement(ref, pair, pr, ctx_prefix, idx):
            raise RefuseToProve(f"complement proof {idx} does not verify")
    return CommittedCoin(pairs=tuple(pairs), mask=tuple(mask), z_com=coin_select(pairs, mask))


def coin_openings(
    pair_openings: list[tuple[BitOpening, BitOpening]], mask: list[int]
) -> list[BitOpening]:
    """The holder's openings for the selected (masked) commitments."""
    return [ops[y] for ops, y in zip(pair_openings, mask)]


# -- strict comparison of two committed values -----------------------------------
#
# z < s is decided by the borrow chain of z - s: the borrow out of
# position i is the majority of (NOT z_i, s_i, borrow-in), zero borrow
# into the least significant position.  Only the final borrow (the
# verdict) is announced; difference bits are never committed or revealed.


def _borrow_bits(z_bits: list[int], s_bits: list[int]) -> list[int]:
    width = len(z_bits)
    borrows = [0] * width
    bin_ = 0
    for i in range(width, 0, -1):
        bout = 1 if (1 - z_bits[i - 1]) + s_bits[i - 1] + bin_ >= 2 else 0
        borrows[i - 1] = bout
        bin_ = bout
    return borrows


def _subtractor_gate(lsb: bool) -> GateSpec:
    """All (z, s, borrow_out, borrow_in) rows of the standard subtractor:
    eight rows, or four ternary rows at the LSB where borrow-in is zero."""
    rows = []
    for z in (0, 1):
        for s in (0, 1):
            for bin_ in ((0,) if lsb else (0, 1)):
                bout = 1 if (1 - z) + s + bin_ >= 2 else 0
                rows.append((z, s, bout) if lsb else (z, s, bout, bin_))
    return GateSpec(arity=3 if lsb else 4, allowed=frozenset(rows))


def prove_lt_committed(
    ref: RefString,
    com_z: IntCommitment,
    ops_z: list[BitOpening],
    com_s: IntCommitment,
    ops_s: list[BitOpening],
    ctx_prefix: bytes,
    rng: random.Random,
) -> tuple[int, IntCommitment, ProofBundle]:
    """Announce and prove the verdict bit of z < s.

    Returns (verdict, borrow commitments, proofs); verdict is 1 iff z < s.
    """
    if com_z.width != com_s.width:
        raise ParameterError("widths must match")
    width = com_z.width
    z_bits = [op.bit for op in ops_z]
    s_bits = [op.bit for op in ops_s]
    borrows = _borrow_bits(z_bits, s_bits)
    verdict = borrows[0]
    if (bits_value(z_bits) < bits_value(s_bits)) != bool(verdict):
        raise RefuseToProve("verdict inconsistent with openings")
    borrow_com, borrow_ops = commit_int(ref, bits_value(borrows), width, rng)
    bundle: ProofBundle = []
    bundle.append(
        (
            0,
            prove_gate(
                ref, [borrow_com.bits[0]], [borrow_ops[0]], _bit_value_gate(verdict), ctx_prefix, rng, 0
            ),
        )
    )
    for i in range(1, width + 1):
        lsb = i == width
        gate = _subtractor_gate(lsb)
        coms = [com_z.bits[i - 1], com_s.bits[i - 1], borrow_com.bits[i - 1]]
        ops = [ops_z[i - 1], ops_s[i - 1], borrow_ops[i - 1]]
        if not lsb:
            coms.append(borrow_com.bits[i])
            ops.append(borrow_ops[i])
        bundle.append((i, prove_gate(ref, coms, ops, gate, ctx_prefix, rng, i)))
    return verdict, borrow_com, bundle


def verify_lt_committed(
    ref: RefString,
    com_z: IntCommitment,
    com_s: IntCommitment,
    verdict: int,
    borrow_com: IntCommitment,
    bundle: ProofBundle,
    ctx_prefix: bytes,
) -> bool:
    if verdict not in (0, 1):
        return False
    if com_z.width != com_s.width or borrow_com.width != com_z.width:
        return False
    width = com_z.width
    if [pos for pos, _ in bundle] != list(range(width + 1)):
        return False
    proofs = dict(bundle)
    if not verify_gate(ref, [borrow_com.bits[0]], _bit_value_gate(verdict), proofs[0], ctx_prefix, 0):
        return False
    for i in range(1, width + 1):
        lsb = i == width
        gate = _subtractor_gate(lsb)
        coms = [com_z.bits[i - 1], com_s.bits[i - 1], borrow_com.bits[i - 1]]
        if not lsb:
            coms.append(borrow_com.bits[i])
        if not verify_gate(ref, coms, gate, proofs[i], ctx_prefix, i):
            return False
    return True


# -- bundle wire encoding ----------------------------------------------------------


def encode_bundle(bundle: ProofBundle) -> bytes:
    out = [encode_u16(len(bundle))]
    for pos, proof in bundle:
        body = encode_proof(proof)
        out.append(encode_u16(pos))
        out.append(len(body).to_bytes(4, "big"))
        out.append(body)
    return b"".join(out)


def read_bundle(r: Reader, params, shapes: list[tuple[int, ...]]) -> ProofBundle:
    """Strict decode against the expected per-entry statement shapes."""
    count = r.u16()
    if count != len(shapes):
        raise CodecError(f"bundle count {count} != expected {len(shapes)}", offset=r.off)
    bundle: ProofBundle = []
    for shape in shapes:
        pos = r.u16()
        length = int.from_bytes(r.take(4), "big")
        sub = Reader(r.take(length))
        proof = read_proof(sub, params, shape)
        sub.finish()
        bundle.append((pos, proof))
    return bundle
