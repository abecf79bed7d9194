"""Blocks, extrinsics, canonical encoding and block construction.

Wire layout (all integers big-endian):

    extrinsic  = kind:u8 | id_len:u16 | meter_file_id | submitted_slot:u64 | body
      RAW body    = payload_len:u32 | payload
      ANCHOR body = cid_len:u8 | cid (binary CIDv1: 36 bytes raw, 39 manifest)
    header     = parent_hash[32] | number:u64 | slot:u64 | author:u32 | extrinsics_root[32]
    block      = header | count:u32 | (len:u32 | extrinsic)*
"""
from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass, field
from functools import cached_property

from .cas import Cid

HASH_LEN = 32
ZERO_HASH = bytes(HASH_LEN)
EMPTY_ROOT = hashlib.sha256(b"").digest()

_HEADER = struct.Struct(">32sQQI32s")
HEADER_SIZE = _HEADER.size  # 84
LEN_PREFIX = 4
EMPTY_BLOCK_SIZE = HEADER_SIZE + LEN_PREFIX


class TxKind(enum.IntEnum):
    ANCHOR = 1
    RAW = 2


class Violation(enum.Enum):
    BAD_PARENT = "BAD_PARENT"
    BAD_NUMBER = "BAD_NUMBER"
    BAD_SLOT = "BAD_SLOT"
    BAD_AUTHOR = "BAD_AUTHOR"
    BAD_ROOT = "BAD_ROOT"


class DecodeError(ValueError):
    pass


@dataclass(frozen=True, eq=True)
class Extrinsic:
    kind: TxKind
    meter_file_id: str
    submitted_slot: int = 0
    payload: bytes = b""
    cid: Cid | None = None

    def __post_init__(self):
        if self.kind == TxKind.ANCHOR:
            if self.cid is None or self.payload:
                raise ValueError("ANCHOR extrinsic needs a cid and an empty payload")
        elif self.kind == TxKind.RAW:
            if self.cid is not None:
                raise ValueError("RAW extrinsic must not carry a cid")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    # Cached so that large RAW payloads are encoded and hashed once per object,
    # however many simulated blocks they end up in.
    @cached_property
    def encoded(self) -> bytes:
        return encode_extrinsic(self)

    @cached_property
    def leaf_hash(self) -> bytes:
        return hashlib.sha256(self.encoded).digest()

    @property
    def size(self) -> int:
        return len(self.encoded)


def encode_extrinsic(tx: Extrinsic) -> bytes:
    ident = tx.meter_file_id.encode("utf-8")
    head = struct.pack(">BH", tx.kind, len(ident)) + ident + struct.pack(">Q", tx.submitted_slot)
    if tx.kind == TxKind.RAW:
        return head + struct.pack(">I", len(tx.payload)) + tx.payload
    raw = tx.cid.to_bytes()
    return head + struct.pack(">B", len(raw)) + raw


def decode_extrinsic(buf: bytes) -> Extrinsic:
    try:
        kind, id_len = struct.unpack_from(">BH", buf, 0)
        pos = 3
        ident = buf[pos:pos + id_len].decode("utf-8")
        pos += id_len
        (slot,) = struct.unpack_from(">Q", buf, pos)
        pos += 8
        kind = TxKind(kind)
        if kind == TxKind.RAW:
            (n,) = struct.unpack_from(">I", buf, pos)
            pos += 4
            payload = bytes(buf[pos:pos + n])
            if len(payload) != n:
                raise DecodeError("truncated payload")
            pos += n
            tx = Extrinsic(kind, ident, slot, payload=payload)
        else:
            n = buf[pos]
            cid = Cid.from_bytes(bytes(buf[pos + 1:pos + 1 + n]))
            pos += 1 + n
            tx = Extrinsic(kind, ident, slot, cid=cid)
    except (struct.error, IndexError, UnicodeDecodeError, ValueError) as exc:
        if isinstance(exc, DecodeError):
            raise
        raise DecodeError(str(exc)) from exc
    if pos != len(buf):
        raise DecodeError(f"{len(buf) - pos} trailing bytes")
    return tx


@dataclass(frozen=True)
class BlockHeader:
    parent_hash: bytes
    number: int
    slot: int
    author: int
    extrinsics_root: bytes

    def encode(self) -> bytes:
        return _HEADER.pack(self.parent_hash, self.number, self.slot,
                            self.author, self.extrinsics_root)

    @cached_property
    def hash(self) -> bytes:
        return hash_header(self)


def hash_header(h: BlockHeader) -> bytes:
    return hashlib.sha256(h.encode()).digest()


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    body: tuple[Extrinsic, ...] = field(default=())

    @property
    def size(self) -> int:
        return EMPTY_BLOCK_SIZE + sum(LEN_PREFIX + tx.size for tx in self.body)

    def encode(self) -> bytes:
        parts = [self.header.encode(), struct.pack(">I", len(self.body))]
        for tx in self.body:
            parts.append(struct.pack(">I", tx.size))
            parts.append(tx.encoded)
        return b"".join(parts)


def genesis_header() -> BlockHeader:
    return BlockHeader(ZERO_HASH, 0, 0, 0, EMPTY_ROOT)


def merkle_root(leaves: list[bytes]) -> bytes:
    """Binary SHA-256 Merkle root over leaf hashes; odd levels duplicate the last node."""
    if not leaves:
        return EMPTY_ROOT
    level = list(leaves)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [hashlib.sha256(level[i] + level[i + 1]).digest()
                 for i in range(0, len(level), 2)]
    return level[0]


def compute_extrinsics_root(body) -> bytes:
    return merkle_root([tx.leaf_hash for tx in body])


def author_for_slot(slot: int, n_validators: int) -> int:
    if n_validators < 1:
        raise ValueError("n_validators must be >= 1")
    return slot % n_validators


def build_block(parent: BlockHeader, slot: int, pool: list[Extrinsic],
                max_block_bytes: int, n_validators: int,
                max_block_txs: int | None = None) -> Block:
    """Pack a block on top of ``parent`` from the front of ``pool``.

    Transactions are taken in FIFO order until the next one would push the
    block over ``max_block_bytes`` (or ``max_block_txs`` is reached). The
    included prefix is removed from ``pool`` in place.
    """
    if slot <= parent.slot:
        raise ValueError(f"slot {slot} does not follow parent slot {parent.slot}")
    if max_block_bytes < EMPTY_BLOCK_SIZE:
        raise ValueError(f"max_block_bytes below empty block size {EMPTY_BLOCK_SIZE}")
    used = EMPTY_BLOCK_SIZE
    take = 0
    limit = len(pool) if max_block_txs is None else min(len(pool), max_block_txs)
    while take < limit:
        need = LEN_PREFIX + pool[take].size
        if used + need > max_block_bytes:
            break
        used += need
        take += 1
    body = tuple(pool[:take])
    del pool[:take]
    header = BlockHeader(
        parent_hash=hash_header(parent),
        number=parent.number + 1,
        slot=slot,
        author=author_for_slot(slot, n_validators),
        extrinsics_root=compute_extrinsics_root(body),
    )
    return Block(header, body)


def validate_block(parent: BlockHeader, block: Block, n_validators: int) -> Violation | None:
    """Return the first failed check, or ``None`` if the block is valid."""
    h = block.header
    if h.parent_hash != hash_header(parent):
        return Violation.BAD_PARENT
    if h.number != parent.number + 1:
        return Violation.BAD_NUMBER
    if h.slot <= parent.slot:
        return Violation.BAD_SLOT
    if h.author != author_for_slot(h.slot, n_validators):
        return Violation.BAD_AUTHOR
    # leaf hashes are cached per immutable extrinsic, so a tampered body
    # (necessarily made of new objects) is rehashed here
    if compute_extrinsics_root(block.body) != h.extrinsics_root:
        return Violation.BAD_ROOT
    return None
