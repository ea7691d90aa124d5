"""Canonical byte encodings, wire framing, and transcript file I/O.

Every protocol object has exactly one byte representation (minimal-length
big-endian integers, fixed-width counts), and decoding is strict: any
non-canonical form, wrong range, or trailing byte is a `CodecError`.
Strictness is load-bearing for tamper detection -- a mutated transcript
must never re-encode to something valid.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import CodecError

# Protocol message tags (1 byte each).
TAG_SEED = 0x00  # transcript bookkeeping: the reference-string seed
TAG_COMMIT = 0x01
TAG_COMMIT_PROOF = 0x02
TAG_TYPE_REPORT = 0x03
TAG_REVEAL = 0x04
TAG_EVAL_PROOF = 0x05
TAG_COIN_PAIR = 0x06
TAG_COIN_MASK = 0x07
TAG_VERDICT = 0x08
TAG_OUTCOME = 0x09
# Two-party pricing computation (appendix-style extension tags).
TAG_MPC_COMMIT = 0x11
TAG_MPC_RESPONSE = 0x12
TAG_MPC_FINAL = 0x13

TRANSCRIPT_MAGIC = "zkmech/1"


# -- primitive encoders ----------------------------------------------------


def encode_uint(n: int) -> bytes:
    """4-byte big-endian length, then minimal big-endian magnitude."""
    if n < 0:
        raise CodecError("negative integer cannot be encoded")
    mag = n.to_bytes((n.bit_length() + 7) // 8, "big") if n else b""
    return len(mag).to_bytes(4, "big") + mag


def encode_u8(n: int) -> bytes:
    if not 0 <= n <= 0xFF:
        raise CodecError(f"u8 out of range: {n}")
    return bytes([n])


def encode_u16(n: int) -> bytes:
    if not 0 <= n <= 0xFFFF:
        raise CodecError(f"u16 out of range: {n}")
    return n.to_bytes(2, "big")


class Reader:
    """Cursor over immutable bytes with strict, offset-reporting reads."""

    def __init__(self, buf: bytes, offset: int = 0):
        self.buf = buf
        self.off = offset

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.buf):
            raise CodecError("truncated input", offset=self.off)
        out = self.buf[self.off : self.off + n]
        self.off += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def uint(self) -> int:
        length = int.from_bytes(self.take(4), "big")
        start = self.off
        mag = self.take(length)
        if length and mag[0] == 0:
            raise CodecError("non-minimal integer encoding", offset=start)
        return int.from_bytes(mag, "big")

    def finish(self) -> None:
        if self.off != len(self.buf):
            raise CodecError("trailing bytes", offset=self.off)

    @property
    def remaining(self) -> int:
        return len(self.buf) - self.off


# -- framing ---------------------------------------------------------------


@dataclass(frozen=True)
class Message:
    """One tagged protocol message."""

    tag: int
    payload: bytes

    def frame(self) -> bytes:
        if not 0 <= self.tag <= 0xFF:
            raise CodecError(f"bad tag {self.tag}")
        return bytes([self.tag]) + len(self.payload).to_bytes(4, "big") + self.payload


def decode_frame(buf: bytes, offset: int = 0) -> tuple[Message, int]:
    """Decode one frame starting at `offset`; returns (message, next offset)."""
    r = Reader(buf, offset)
    tag = r.u8()
    length = int.from_bytes(r.take(4), "big")
    payload = r.take(length)
    return Message(tag, payload), r.off


def decode_single_frame(buf: bytes) -> Message:
    msg, end = decode_frame(buf)
    if end != len(buf):
        raise CodecError("trailing bytes after frame", offset=end)
    return msg


# -- Fiat-Shamir context ----------------------------------------------------


def seed_frame(seed: bytes) -> bytes:
    return Message(TAG_SEED, seed).frame()


def fs_context(seed: bytes, frames: list[bytes], statement: bytes) -> bytes:
    """Concatenate: seed frame, every prior frame in order, the statement.

    Identical histories give identical contexts; any differing frame gives
    a differing context (and hence a differing derived challenge).
    """
    return seed_frame(seed) + b"".join(frames) + statement


# -- transcripts -------------------------------------------------------------


@dataclass
class Transcript:
    """The full ordered message log of one protocol run.

    Together with the group parameters this is sufficient for third-party
    re-verification; no secrets ever appear outside explicit reveal
    messages.
    """

    kind: str
    bound: int  # the public price bound H
    seed: bytes
    messages: list[Message] = field(default_factory=list)

    def frames(self) -> list[bytes]:
        return [m.frame() for m in self.messages]

    def tags(self) -> list[int]:
        return [m.tag for m in self.messages]


def transcript_dumps(t: Transcript) -> str:
    """Text form: header line, then one hex-encoded framed message per line."""
    lines = [f"{TRANSCRIPT_MAGIC} {t.kind} H={t.bound}"]
    lines.append(Message(TAG_SEED, t.seed).frame().hex())
    lines.extend(m.frame().hex() for m in t.messages)
    return "\n".join(lines) + "\n"


def transcript_loads(text: str) -> Transcript:
    lines = text.splitlines()
    if not lines:
        raise CodecError("empty transcript", line=1)
    header = lines[0].split(" ")
    if len(header) != 3 or header[0] != TRANSCRIPT_MAGIC or not header[2].startswith("H="):
        raise CodecError(f"bad header {lines[0]!r}", line=1)
    kind = header[1]
    try:
        bound = int(header[2][2:])
    except ValueError:
        raise CodecError("bad H= field", line=1) from None
    messages: list[Message] = []
    seed = None
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        try:
            raw = bytes.fromhex(line)
        except ValueError:
            raise CodecError("invalid hex", line=lineno) from None
        try:
            msg = decode_single_frame(raw)
        except CodecError as exc:
            raise CodecError(f"bad frame: {exc}", line=lineno) from None
        if seed is None:
            if msg.tag != TAG_SEED:
                raise CodecError("first frame must carry the seed", line=lineno)
            seed = msg.payload
        else:
            messages.append(msg)
    if seed is None:
        raise CodecError("missing seed frame", line=2)
    return Transcript(kind=kind, bound=bound, seed=seed, messages=messages)


def transcript_write(path: str, t: Transcript) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(transcript_dumps(t))


def transcript_read(path: str) -> Transcript:
    with open(path, "r", encoding="ascii") as fh:
        return transcript_loads(fh.read())


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()
