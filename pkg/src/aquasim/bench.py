"""Scenario definitions, per-block metrics capture and the t-test battery.

Four scans are defined, two per storage mode:

    A_IPFS_FIXED_NODES  ANCHOR, 10 nodes,     10..90 hashes per block
    B_IPFS_FIXED_DATA   ANCHOR, 3..10 nodes,  90 hashes per block
    C_RAW_FIXED_NODES   RAW,    10 nodes,     50..800 hashes per block
    D_RAW_FIXED_DATA    RAW,    3..10 nodes,  800 hashes per block

Each (node count, hash count, run) triple is an independent simulation. Its
pool is filled up front with ``blocks_per_run * tx_target`` transactions and
blocks carry at most ``tx_target`` of them, so every captured block holds one
batch of data hashes.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from . import svg
from .anchor import ChainState, make_anchor_tx, make_raw_tx
from .cas import BlobStore, add_file, remote_add
from .ingest import corpus_scale, generate_synthetic, records_for_payload
from .netsim import SimConfig, SimResult, block_time_of, genesis_record, run_simulation
from .stats import InsufficientDataError, TTestResult, spearman, welch_t

log = logging.getLogger(__name__)

CSV_HEADER = ("scenario", "run", "n_nodes", "tx_target", "block_number", "block_time_s",
              "finality_latency_s", "block_size_bytes", "tx_count", "tps")

DEFAULT_PAYLOAD_BYTES = 16384


class ScenarioName(str, enum.Enum):
    A_IPFS_FIXED_NODES = "A_IPFS_FIXED_NODES"
    B_IPFS_FIXED_DATA = "B_IPFS_FIXED_DATA"
    C_RAW_FIXED_NODES = "C_RAW_FIXED_NODES"
    D_RAW_FIXED_DATA = "D_RAW_FIXED_DATA"


class Mode(str, enum.Enum):
    ANCHOR = "ANCHOR"
    RAW = "RAW"


class ScenarioError(RuntimeError):
    pass


class EmptySeriesError(ValueError):
    pass


_SHAPES = {
    ScenarioName.A_IPFS_FIXED_NODES: (Mode.ANCHOR, (10,), tuple(range(10, 91, 10))),
    ScenarioName.B_IPFS_FIXED_DATA: (Mode.ANCHOR, tuple(range(3, 11)), (90,)),
    ScenarioName.C_RAW_FIXED_NODES: (Mode.RAW, (10,), tuple(range(50, 801, 50))),
    ScenarioName.D_RAW_FIXED_DATA: (Mode.RAW, tuple(range(3, 11)), (800,)),
}
SCENARIO_LETTERS = {name.value[0]: name for name in ScenarioName}
SIM_FIELDS = {f.name for f in dataclasses.fields(SimConfig)} - {
    "n_nodes", "seed", "stop_after_finalized", "max_block_txs"}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    mode: Mode
    node_counts: tuple[int, ...]
    tx_counts: tuple[int, ...]
    payload_bytes: int = DEFAULT_PAYLOAD_BYTES
    runs: int = 5
    seed: int = 0
    blocks_per_run: int = 3
    arrival_rate: float | None = None
    sim: dict = field(default_factory=dict, hash=False)

    def check_shape(self) -> None:
        try:
            mode, nodes, txs = _SHAPES[ScenarioName(self.name)]
        except ValueError:
            raise ValueError(f"unknown scenario {self.name!r}") from None
        if (Mode(self.mode), tuple(self.node_counts), tuple(self.tx_counts)) != (mode, nodes, txs):
            raise ValueError(f"{self.name} must be mode={mode.value} nodes={list(nodes)} "
                             f"tx_counts={list(txs)}")

    def sim_config(self, n_nodes: int, tx_target: int, run: int) -> SimConfig:
        unknown = set(self.sim) - SIM_FIELDS
        if unknown:
            raise ValueError(f"unknown simulation settings: {sorted(unknown)}")
        return SimConfig(n_nodes=n_nodes, seed=self.seed + run, max_block_txs=tx_target,
                         stop_after_finalized=self.blocks_per_run, **self.sim)


def scenario(name, **overrides) -> ScenarioConfig:
    """Default configuration for a scenario given by name or letter ("A".."D")."""
    if isinstance(name, str) and name.upper() in SCENARIO_LETTERS:
        name = SCENARIO_LETTERS[name.upper()]
    name = ScenarioName(name)
    mode, nodes, txs = _SHAPES[name]
    cfg = ScenarioConfig(name.value, mode, nodes, txs)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def from_mapping(name, data: dict) -> ScenarioConfig:
    """Build a scenario from JSON-style overrides (lists become tuples)."""
    fields = {f.name for f in dataclasses.fields(ScenarioConfig)} - {"name"}
    unknown = set(data) - fields
    if unknown:
        raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
    clean = {}
    for key, value in data.items():
        if key in ("node_counts", "tx_counts"):
            value = tuple(int(v) for v in value)
        elif key == "mode":
            value = Mode(value)
        clean[key] = value
    return scenario(name, **clean)


@dataclass(frozen=True)
class MetricsRow:
    scenario: str
    run: int
    n_nodes: int
    tx_target: int
    block_number: int
    block_time_s: float
    finality_latency_s: float
    block_size_bytes: int
    tx_count: int
    tps: float

    def sort_key(self):
        return (self.scenario, self.run, self.n_nodes, self.tx_target, self.block_number)


@dataclass(frozen=True)
class Workload:
    mode: Mode
    txs: tuple
    store: BlobStore | None
    payloads: dict


@lru_cache(maxsize=8)
def _corpus(n_files: int, records: int, seed: int):
    files = generate_synthetic(n_files, records, seed)
    log.info("generated %d meter files, %.3g of the published 56.38 GB corpus",
             n_files, corpus_scale(files))
    return tuple(files)


_remote_endpoint: str | None = None


def set_cid_backend(endpoint: str | None) -> None:
    """Route ANCHOR payloads through a Kubo-compatible daemon (``None``: embedded store)."""
    global _remote_endpoint
    _remote_endpoint = endpoint


@lru_cache(maxsize=16)
def build_workload(mode: Mode, n_files: int, payload_bytes: int, seed: int,
                   endpoint: str | None = None) -> Workload:
    """Synthetic meter files turned into transactions, one per file.

    ANCHOR mode stores each file in a pinned blob store first and anchors its
    root CID; RAW mode embeds the file bytes. With ``endpoint`` set, ANCHOR
    payloads are also added to that daemon and its CID is the one anchored.
    """
    files = _corpus(n_files, records_for_payload(payload_bytes), seed)
    payloads = {f.file_id: f.encoded for f in files}
    if Mode(mode) == Mode.RAW:
        return Workload(Mode.RAW, tuple(make_raw_tx(f.file_id, f.encoded) for f in files),
                        None, payloads)
    store = BlobStore()
    txs = []
    for f in files:
        cid = add_file(store, f.encoded, pin=True)
        if endpoint:
            cid = remote_add(endpoint, f.encoded)
        txs.append(make_anchor_tx(f.file_id, cid))
    return Workload(Mode.ANCHOR, tuple(txs), store, payloads)


def _schedule(txs, arrival_rate):
    if not arrival_rate:
        return list(txs)
    return [(math.floor(i * 1000 / arrival_rate), tx) for i, tx in enumerate(txs)]


def iter_runs(cfg: ScenarioConfig, *, strict: bool = True):
    """Yield ``((n_nodes, tx_target, run), SimResult)`` for every triple of ``cfg``."""
    if strict:
        cfg.check_shape()
    n_files = cfg.blocks_per_run * max(cfg.tx_counts)
    work = build_workload(Mode(cfg.mode), n_files, cfg.payload_bytes, cfg.seed, _remote_endpoint)
    for n_nodes in cfg.node_counts:
        for tx_target in cfg.tx_counts:
            for run in range(cfg.runs):
                triple = (n_nodes, tx_target, run)
                sim_cfg = cfg.sim_config(n_nodes, tx_target, run)
                txs = work.txs[:cfg.blocks_per_run * tx_target]
                try:
                    result = run_simulation(sim_cfg, _schedule(txs, cfg.arrival_rate))
                except RuntimeError as exc:
                    raise ScenarioError(f"{cfg.name} nodes={n_nodes} txs={tx_target} "
                                        f"run={run}: {exc}") from exc
                if result.rejected:
                    raise ScenarioError(
                        f"{cfg.name} nodes={n_nodes} txs={tx_target} run={run}: OVERSIZE_TX "
                        f"({len(result.rejected)} transactions larger than a block)")
                yield triple, result


def metrics_rows(name: str, triple, result: SimResult) -> list[MetricsRow]:
    n_nodes, tx_target, run = triple
    slot_s = result.config.slot_seconds
    rows = []
    prev = genesis_record()
    for block, rec in result.finalized:
        bt = block_time_of(prev, rec, result.chain, slot_s)
        produced_ms = block.header.slot * result.config.slot_ms
        tx_count = len(block.body)
        rows.append(MetricsRow(
            scenario=name, run=run, n_nodes=n_nodes, tx_target=tx_target,
            block_number=rec.block_number, block_time_s=bt,
            finality_latency_s=(rec.finalized_at_ms - produced_ms) / 1000.0,
            block_size_bytes=block.size, tx_count=tx_count, tps=tx_count / bt,
        ))
        prev = rec
    return rows


def run_scenario(cfg: ScenarioConfig, *, strict: bool = True) -> list[MetricsRow]:
    rows = []
    for triple, result in iter_runs(cfg, strict=strict):
        rows.extend(metrics_rows(cfg.name, triple, result))
    rows.sort(key=MetricsRow.sort_key)
    return rows


def replay_state(result: SimResult) -> ChainState:
    """Apply a simulation's finalized blocks to a fresh anchor state."""
    state = ChainState()
    for block, _ in result.finalized:
        state.apply_block(block)
    return state


# -- comparisons -------------------------------------------------------------

METRIC_COLUMNS = {
    "block_time": "block_time_s",
    "block_size": "block_size_bytes",
    "tps": "tps",
}
# Sample order per metric, chosen so that a negative t favours ANCHOR:
# smaller blocks, shorter block times, higher throughput.
ORIENTATION = {"block_size": ("ANCHOR", "RAW"), "block_time": ("ANCHOR", "RAW"),
               "tps": ("RAW", "ANCHOR")}


def metric_column(metric: str) -> str:
    if metric in METRIC_COLUMNS:
        return METRIC_COLUMNS[metric]
    if metric in METRIC_COLUMNS.values() or metric in ("finality_latency_s", "tx_count"):
        return metric
    raise ValueError(f"unknown metric {metric!r}")


def compare_modes(metric: str, a, b, *, pooled: bool = False) -> TTestResult:
    col = metric_column(metric)
    xa = [float(getattr(r, col) if not isinstance(r, dict) else r[col]) for r in a]
    xb = [float(getattr(r, col) if not isinstance(r, dict) else r[col]) for r in b]
    if len(xa) < 2 or len(xb) < 2:
        raise InsufficientDataError(f"need >= 2 rows per side, got {len(xa)} and {len(xb)}")
    return welch_t(xa, xb, pooled=pooled)


def oriented(metric: str, anchor_rows, raw_rows) -> TTestResult:
    first, _ = ORIENTATION[metric]
    if first == "ANCHOR":
        return compare_modes(metric, anchor_rows, raw_rows)
    return compare_modes(metric, raw_rows, anchor_rows)


# -- emission ----------------------------------------------------------------

def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def rows_to_csv(rows) -> str:
    if not rows:
        raise EmptySeriesError("no metrics rows to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_HEADER])
    return buf.getvalue()


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"IO_ERROR: cannot write {path}: {exc}") from exc
    return path


def emit_csv(rows, path) -> Path:
    return _write(path, rows_to_csv(rows))


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: not a metrics CSV")
        return list(reader)


def ttest_json(result: TTestResult, metric: str) -> str:
    return json.dumps(result.to_json(metric), indent=2, sort_keys=False) + "\n"


def emit_ttest_json(result: TTestResult, metric: str, path) -> Path:
    return _write(path, ttest_json(result, metric))


def _axis_for(cfg_name: str) -> tuple[str, str]:
    if cfg_name.startswith(("B", "D")):
        return "n_nodes", "number of nodes"
    return "tx_target", "data hashes per block"


FIGURE_METRICS = {
    "block_time_s": "block time (s)",
    "block_size_bytes": "block size (bytes)",
    "tps": "throughput (tx/s)",
}


def figure_series(rows, x_attr: str, y_attr: str) -> dict:
    """Per-run series of (x, mean y) points."""
    acc: dict = {}
    for r in rows:
        acc.setdefault(r.run, {}).setdefault(getattr(r, x_attr), []).append(getattr(r, y_attr))
    return {f"run {run}": [(x, sum(ys) / len(ys)) for x, ys in sorted(points.items())]
            for run, points in sorted(acc.items())}


def emit_svg(series: dict, axes: tuple[str, str], path, title: str = "") -> Path:
    if not series or not any(series.values()):
        raise EmptySeriesError("no series to plot")
    return _write(path, svg.line_chart(series, axes[0], axes[1], title))


# -- the full battery --------------------------------------------------------

def comparison_configs(seed: int = 0, payload_bytes: int = DEFAULT_PAYLOAD_BYTES,
                       runs: int = 5, blocks_per_run: int = 3, sim=None):
    """Extra scans needed by the t-tests that scenarios A-D do not cover.

    ``anchor_800`` mirrors the RAW 10-node/800-hash point of scenario C in
    ANCHOR mode. ``raw_matched`` is scenario D's node scan in RAW mode at the
    90-hash load of scenario B, with payloads the size of a binary CID so that
    RAW blocks are ANCHOR-sized.
    """
    sim = dict(sim or {})
    common = dict(seed=seed, runs=runs, blocks_per_run=blocks_per_run, sim=sim)
    anchor_800 = ScenarioConfig("CMP_ANCHOR_FIXED_NODES_800", Mode.ANCHOR, (10,), (800,),
                                payload_bytes=payload_bytes, **common)
    raw_matched = ScenarioConfig("CMP_RAW_MATCHED_FIXED_DATA", Mode.RAW, tuple(range(3, 11)),
                                 (90,), payload_bytes=36, **common)
    return anchor_800, raw_matched


def ttest_battery(rows_by_name: dict) -> dict:
    """All t-tests of the benchmark, keyed by report name."""
    c800 = [r for r in rows_by_name[ScenarioName.C_RAW_FIXED_NODES.value]
            if r.n_nodes == 10 and r.tx_target == 800]
    a800 = rows_by_name["CMP_ANCHOR_FIXED_NODES_800"]
    b = rows_by_name[ScenarioName.B_IPFS_FIXED_DATA.value]
    d = rows_by_name[ScenarioName.D_RAW_FIXED_DATA.value]
    d_matched = rows_by_name["CMP_RAW_MATCHED_FIXED_DATA"]
    return {
        "fixed_nodes_block_size": ("block_size", oriented("block_size", a800, c800)),
        "fixed_nodes_tps": ("tps", oriented("tps", a800, c800)),
        "fixed_nodes_block_time": ("block_time", oriented("block_time", a800, c800)),
        "fixed_data_block_time": ("block_time", oriented("block_time", b, d)),
        "fixed_data_block_time_matched": ("block_time", oriented("block_time", b, d_matched)),
    }


def size_trend(rows) -> float:
    """Spearman correlation of tx_target against mean block size."""
    acc: dict = {}
    for r in rows:
        acc.setdefault(r.tx_target, []).append(r.block_size_bytes)
    xs = sorted(acc)
    return spearman(xs, [sum(acc[x]) / len(acc[x]) for x in xs])


def bench_all(out_dir, *, seed: int = 0, overrides: dict | None = None) -> dict:
    """Run scenarios A-D plus comparison scans, write every artifact, return a summary.

    ``overrides`` maps scenario letters to field overrides; a top-level key
    that is not a letter applies to every scenario.
    """
    out = Path(out_dir)
    overrides = dict(overrides or {})
    shared = {k: v for k, v in overrides.items() if k not in SCENARIO_LETTERS}
    shared.setdefault("seed", seed)

    rows_by_name: dict = {}
    for letter, name in SCENARIO_LETTERS.items():
        cfg = from_mapping(name, {**shared, **overrides.get(letter, {})})
        rows = run_scenario(cfg)
        rows_by_name[name.value] = rows
        emit_csv(rows, out / f"scenario_{letter}.csv")
        x_attr, x_label = _axis_for(name.value)
        for col, y_label in FIGURE_METRICS.items():
            emit_svg(figure_series(rows, x_attr, col), (x_label, y_label),
                     out / "figures" / f"{letter}_{col}.svg", title=f"{name.value}: {y_label}")

    base = from_mapping(ScenarioName.C_RAW_FIXED_NODES, shared)
    for cfg in comparison_configs(base.seed, base.payload_bytes, base.runs,
                                  base.blocks_per_run, base.sim):
        rows = run_scenario(cfg, strict=False)
        rows_by_name[cfg.name] = rows
        emit_csv(rows, out / "comparisons" / f"{cfg.name}.csv")

    tests = ttest_battery(rows_by_name)
    for key, (metric, result) in tests.items():
        emit_ttest_json(result, METRIC_COLUMNS[metric], out / "ttests" / f"{key}.json")

    summary = {
        "seed": seed,
        "block_times_s": sorted({r.block_time_s for name in SCENARIO_LETTERS.values()
                                 for r in rows_by_name[name.value]}),
        "size_trend_spearman": {
            "A": size_trend(rows_by_name[ScenarioName.A_IPFS_FIXED_NODES.value]),
            "C": size_trend(rows_by_name[ScenarioName.C_RAW_FIXED_NODES.value]),
        },
        "ttests": {k: r.to_json(METRIC_COLUMNS[m]) for k, (m, r) in tests.items()},
        "rows": {k: len(v) for k, v in rows_by_name.items()},
    }
    _write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    return summary


def tree_digest(path) -> str:
    """SHA-256 over every file (relative path and bytes) under ``path``."""
    h = hashlib.sha256()
    root = Path(path)
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode() + b"\0")
            h.update(p.read_bytes())
    return h.hexdigest()
