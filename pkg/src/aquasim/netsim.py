"""Discrete-event simulation of a slot-based proof-of-authority network.

Timing model (all times are integer simulated milliseconds):

* Slot ``s`` starts at ``s * slot_ms``; its author is ``s mod n_nodes``.
* At a slot start the author builds a block only if it has finished importing
  every block produced so far. Otherwise the slot is skipped, so the gap
  between consecutive blocks is always a whole number of slots.
* A block of ``size`` bytes costs ``exec_base_ms + exec_per_kb_ms * size/1024``
  (rounded up) to execute. The author executes it straight away; every other
  node receives it after a latency drawn uniformly from
  ``[latency_ms_mean - latency_ms_jitter, latency_ms_mean + latency_ms_jitter]``
  and executes it after any import already in progress.
* When a node finishes an import it sends a vote, which reaches the finality
  tracker after another latency draw. A block is final once
  ``ceil(quorum_fraction * n_nodes)`` votes have arrived and its parent is
  final.

Randomness comes from one ``SplitMix64`` stream seeded with ``cfg.seed``, and
events are ordered by ``(time, insertion sequence)``, so a configuration and
workload always reproduce the same trace.
"""
from __future__ import annotations

import enum
import hashlib
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .chain import (EMPTY_BLOCK_SIZE, LEN_PREFIX, Block, BlockHeader, Extrinsic,
                    build_block, genesis_header, hash_header, validate_block)
from .rng import SplitMix64


class LivenessError(RuntimeError):
    pass


class EventKind(enum.IntEnum):
    SLOT_TICK = 0
    BLOCK_ARRIVAL = 1
    IMPORT_DONE = 2
    VOTE = 3


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int = 10
    slot_seconds: int = 6
    max_block_bytes: int = 16 * 1024 * 1024
    max_block_txs: int | None = None
    exec_base_ms: float = 500.0
    exec_per_kb_ms: float = 1.0
    latency_ms_mean: int = 100
    latency_ms_jitter: int = 50
    quorum_fraction: Fraction = Fraction(2, 3)
    seed: int = 0
    stop_after_finalized: int = 3

    def __post_init__(self):
        object.__setattr__(self, "quorum_fraction", Fraction(self.quorum_fraction))
        if self.n_nodes < 3:
            raise ValueError("n_nodes must be >= 3")
        if self.slot_seconds <= 0:
            raise ValueError("slot_seconds must be positive")
        if not Fraction(1, 2) < self.quorum_fraction <= 1:
            raise ValueError("quorum_fraction must lie in (1/2, 1]")
        if self.latency_ms_jitter < 0 or self.latency_ms_mean - self.latency_ms_jitter < 0:
            raise ValueError("latency range must be non-negative")
        if self.max_block_bytes < EMPTY_BLOCK_SIZE:
            raise ValueError(f"max_block_bytes must be >= {EMPTY_BLOCK_SIZE}")
        if self.stop_after_finalized < 1:
            raise ValueError("stop_after_finalized must be >= 1")

    @property
    def slot_ms(self) -> int:
        return self.slot_seconds * 1000

    @property
    def quorum(self) -> int:
        return math.ceil(self.quorum_fraction * self.n_nodes)

    def exec_ms(self, block_size: int) -> int:
        return math.ceil(self.exec_base_ms + self.exec_per_kb_ms * block_size / 1024)


@dataclass(frozen=True)
class SimEvent:
    at_ms: int
    seq: int
    kind: EventKind
    node: int = -1
    block: int = -1

    def __lt__(self, other):
        return (self.at_ms, self.seq) < (other.at_ms, other.seq)


@dataclass(frozen=True)
class FinalityRecord:
    block_number: int
    finalized_at_ms: int
    votes: int


@dataclass(frozen=True)
class RejectedTx:
    meter_file_id: str
    size: int
    reason: str = "OVERSIZE_TX"


@dataclass
class SimResult:
    config: SimConfig
    chain: list[Block]                      # index = block number, [0] is genesis
    finalized: list[tuple[Block, FinalityRecord]]
    rejected: list[RejectedTx] = field(default_factory=list)
    trace: list[tuple] = field(default_factory=list, repr=False)
    ended_at_ms: int = 0

    def trace_digest(self) -> str:
        h = hashlib.sha256()
        for entry in self.trace:
            h.update(repr(entry).encode())
        return h.hexdigest()


def _normalize_workload(workload):
    """Accept bare extrinsics (all admitted at t=0) or ``(admit_at_ms, tx)`` pairs."""
    items = []
    for item in workload:
        if isinstance(item, Extrinsic):
            items.append((0, item))
        else:
            at, tx = item
            items.append((int(at), tx))
    items.sort(key=lambda p: p[0])  # stable: FIFO among equal admission times
    return items


def run_simulation(cfg: SimConfig, workload) -> SimResult:
    rng = SplitMix64(cfg.seed)
    n = cfg.n_nodes
    slot_ms = cfg.slot_ms
    budget = cfg.max_block_bytes - EMPTY_BLOCK_SIZE - LEN_PREFIX

    pending = _normalize_workload(workload)
    next_admit = 0
    pool: list[Extrinsic] = []
    rejected: list[RejectedTx] = []

    genesis = Block(genesis_header())
    chain: list[Block] = [genesis]
    produced_at: dict[int, int] = {0: 0}
    imported = [0] * n          # highest block number fully imported per node
    busy_until = [0] * n
    queue: list[list[int]] = [[] for _ in range(n)]   # arrived, not yet imported
    importing: list[int | None] = [None] * n
    votes: dict[int, int] = {}
    finalized: list[tuple[Block, FinalityRecord]] = []
    trace: list[tuple] = []

    events: list[SimEvent] = []
    seq = 0

    def push(at, kind, node=-1, block=-1):
        nonlocal seq
        heapq.heappush(events, SimEvent(at, seq, kind, node, block))
        seq += 1

    def draw_latency():
        return rng.randint(cfg.latency_ms_mean - cfg.latency_ms_jitter,
                           cfg.latency_ms_mean + cfg.latency_ms_jitter)

    def start_import(node, now):
        if importing[node] is not None or not queue[node]:
            return
        nxt = imported[node] + 1
        if nxt not in queue[node]:
            return  # wait for the missing parent to arrive
        queue[node].remove(nxt)
        importing[node] = nxt
        done = max(now, busy_until[node]) + cfg.exec_ms(chain[nxt].size)
        busy_until[node] = done
        push(done, EventKind.IMPORT_DONE, node, nxt)

    def try_finalize(now):
        while len(finalized) + 1 < len(chain):
            number = len(finalized) + 1
            if votes.get(number, 0) < cfg.quorum:
                return
            rec = FinalityRecord(number, now, votes[number])
            finalized.append((chain[number], rec))
            trace.append(("FINAL", now, number, votes[number]))

    deadline = 10 * cfg.stop_after_finalized * slot_ms
    push(slot_ms, EventKind.SLOT_TICK)
    now = 0
    while len(finalized) < cfg.stop_after_finalized:
        if not events:
            break
        ev = heapq.heappop(events)
        now = ev.at_ms
        if now > deadline:
            raise LivenessError(
                f"only {len(finalized)}/{cfg.stop_after_finalized} blocks final by {deadline} ms")

        if ev.kind == EventKind.SLOT_TICK:
            slot = now // slot_ms
            while next_admit < len(pending) and pending[next_admit][0] <= now:
                tx = pending[next_admit][1]
                next_admit += 1
                if tx.size > budget:
                    rejected.append(RejectedTx(tx.meter_file_id, tx.size))
                    trace.append(("REJECT", now, tx.meter_file_id, tx.size))
                else:
                    pool.append(tx)
            author = slot % n
            head = len(chain) - 1
            ready = imported[author] == head and busy_until[author] <= now
            trace.append(("SLOT", now, slot, author, ready))
            if ready:
                block = build_block(chain[head].header, slot, pool, cfg.max_block_bytes, n,
                                    cfg.max_block_txs)
                number = block.header.number
                chain.append(block)
                produced_at[number] = now
                trace.append(("BLOCK", now, number, slot, author, len(block.body), block.size))
                queue[author].append(number)
                start_import(author, now)
                for node in range(n):
                    if node != author:
                        push(now + draw_latency(), EventKind.BLOCK_ARRIVAL, node, number)
            push(now + slot_ms, EventKind.SLOT_TICK)

        elif ev.kind == EventKind.BLOCK_ARRIVAL:
            trace.append(("ARRIVE", now, ev.node, ev.block))
            queue[ev.node].append(ev.block)
            start_import(ev.node, now)

        elif ev.kind == EventKind.IMPORT_DONE:
            trace.append(("IMPORTED", now, ev.node, ev.block))
            imported[ev.node] = ev.block
            importing[ev.node] = None
            push(now + draw_latency(), EventKind.VOTE, ev.node, ev.block)
            start_import(ev.node, now)

        elif ev.kind == EventKind.VOTE:
            votes[ev.block] = votes.get(ev.block, 0) + 1
            trace.append(("VOTE", now, ev.node, ev.block))
            try_finalize(now)

    return SimResult(cfg, chain, finalized[:cfg.stop_after_finalized], rejected, trace, now)


def block_time_of(prev: FinalityRecord, cur: FinalityRecord, blocks, slot_seconds: int = 6) -> float:
    """Production interval between two adjacent blocks, in seconds.

    ``blocks`` maps block number to ``Block`` (a list indexed by number works).
    """
    if cur.block_number != prev.block_number + 1:
        raise ValueError(f"blocks {prev.block_number} and {cur.block_number} are not adjacent")
    a = blocks[prev.block_number].header.slot
    b = blocks[cur.block_number].header.slot
    return float((b - a) * slot_seconds)


def genesis_record() -> FinalityRecord:
    """Genesis is final by construction."""
    return FinalityRecord(0, 0, 0)


def audit(result: SimResult) -> list[str]:
    """Check chain and finality invariants of a finished simulation.

    Returns human-readable violations; an empty list means the run is sound.
    """
    cfg = result.config
    problems = []
    chain = result.chain
    for parent, child in zip(chain, chain[1:]):
        if child.header.parent_hash != hash_header(parent.header):
            problems.append(f"block {child.header.number}: parent hash mismatch")
        v = validate_block(parent.header, child, cfg.n_nodes)
        if v is not None:
            problems.append(f"block {child.header.number}: {v.value}")
    prev_at = 0
    for i, (block, rec) in enumerate(result.finalized, start=1):
        if rec.block_number != i or block is not chain[i]:
            problems.append(f"finalized entry {i} is not a chain prefix")
        if rec.votes < cfg.quorum:
            problems.append(f"block {rec.block_number}: {rec.votes} votes < quorum {cfg.quorum}")
        if rec.finalized_at_ms < prev_at:
            problems.append(f"block {rec.block_number}: finality time went backwards")
        prev_at = rec.finalized_at_ms
    for a, b in zip(chain, chain[1:]):
        gap = b.header.slot - a.header.slot
        if gap < 1:
            problems.append(f"block {b.header.number}: non-positive slot gap")
    return problems
