"""Per-meter anchor log: the on-chain state transition for both storage modes."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .cas import BlobStore, Cid, InvalidCidError, add_file, cid_of_blob
from .chain import Block, Extrinsic, TxKind


class EmptyPayloadError(ValueError):
    pass


def meter_file_id(source: str, index: int) -> str:
    return f"{source}-{index:06d}"


def make_anchor_tx(meter_file_id: str, cid: Cid, slot: int = 0) -> Extrinsic:
    if not isinstance(cid, Cid):
        raise InvalidCidError(f"expected a Cid, got {type(cid).__name__}")
    return Extrinsic(TxKind.ANCHOR, meter_file_id, slot, cid=cid)


def make_raw_tx(meter_file_id: str, payload: bytes, slot: int = 0) -> Extrinsic:
    if not payload:
        raise EmptyPayloadError("RAW extrinsic needs a nonempty payload")
    return Extrinsic(TxKind.RAW, meter_file_id, slot, payload=bytes(payload))


@dataclass(frozen=True)
class AnchorRecord:
    meter_file_id: str
    block_number: int
    slot: int
    cid: Cid | None = None
    payload_digest: bytes | None = None

    @property
    def key(self):
        return (self.meter_file_id, self.cid if self.cid is not None else self.payload_digest)


@dataclass
class ChainState:
    anchors: dict[str, list[AnchorRecord]] = field(default_factory=dict)
    total_onchain_bytes: int = 0
    duplicates: int = 0
    _seen: set = field(default_factory=set, repr=False)

    def apply(self, tx: Extrinsic, block_number: int, slot: int | None = None) -> bool:
        """Apply one extrinsic. Returns False (and counts it) for a duplicate."""
        if tx.kind == TxKind.ANCHOR:
            record = AnchorRecord(tx.meter_file_id, block_number,
                                  tx.submitted_slot if slot is None else slot, cid=tx.cid)
        else:
            record = AnchorRecord(tx.meter_file_id, block_number,
                                  tx.submitted_slot if slot is None else slot,
                                  payload_digest=_payload_digest(tx))
        if record.key in self._seen:
            self.duplicates += 1
            return False
        self._seen.add(record.key)
        self.anchors.setdefault(tx.meter_file_id, []).append(record)
        self.total_onchain_bytes += tx.size
        return True

    def apply_block(self, block: Block) -> int:
        """Apply a block body in order; returns the number of duplicates skipped."""
        before = self.duplicates
        for tx in block.body:
            self.apply(tx, block.header.number, block.header.slot)
        return self.duplicates - before

    @property
    def record_count(self) -> int:
        return sum(len(v) for v in self.anchors.values())

    def records(self):
        for recs in self.anchors.values():
            yield from recs

    def __eq__(self, other):
        if not isinstance(other, ChainState):
            return NotImplemented
        return (self.anchors == other.anchors
                and self.total_onchain_bytes == other.total_onchain_bytes
                and self.duplicates == other.duplicates)


def _payload_digest(tx: Extrinsic) -> bytes:
    # memoised on the (immutable) extrinsic like its leaf hash
    digest = tx.__dict__.get("_payload_digest")
    if digest is None:
        digest = hashlib.sha256(tx.payload).digest()
        tx.__dict__["_payload_digest"] = digest
    return digest


def apply_extrinsic(state: ChainState, tx: Extrinsic, block_number: int,
                    slot: int | None = None) -> ChainState:
    """Apply ``tx`` to ``state`` in place and return it. Duplicates only bump a counter."""
    state.apply(tx, block_number, slot)
    return state


def verify_anchor(record: AnchorRecord, payload: bytes) -> bool:
    if record.cid is not None:
        if cid_of_blob(payload) == record.cid:
            return True
        # multi-chunk files are anchored by their manifest root
        return len(payload) > 0 and add_file(BlobStore(), payload) == record.cid
    if record.payload_digest is not None:
        return hashlib.sha256(payload).digest() == record.payload_digest
    return False
