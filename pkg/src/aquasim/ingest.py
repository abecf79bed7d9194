"""Smart-water-meter CSV batches: parsing and seeded synthetic generation."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from functools import cached_property

import numpy as np

from .rng import splitmix64_array

HEADER = ("meter_id", "read_at", "reading_kl")
HEADER_LINE = ",".join(HEADER) + "\n"
METER_POOL = tuple(f"M{i:05d}" for i in range(48))
EPOCH = np.datetime64("2024-01-01T00:00:00", "s")
# mean encoded record length for generated data, used to size payloads
RECORD_BYTES = 37

# Size of the reference production corpus: 3960 files totalling 56.38 GB.
REFERENCE_CORPUS_BYTES = 56.38e9
REFERENCE_CORPUS_FILES = 3960


class BadHeaderError(ValueError):
    pass


@dataclass(frozen=True)
class MeterReading:
    meter_id: str
    read_at: datetime
    reading_kl: Decimal


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str


@dataclass(frozen=True)
class ColumnMap:
    """Names of the source columns holding meter id, timestamp and reading."""

    meter: str = "meter_id"
    time: str = "read_at"
    reading: str = "reading_kl"


@dataclass
class ParseResult:
    readings: list[MeterReading] = field(default_factory=list)
    errors: list[RowError] = field(default_factory=list)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_meter_csv(data: bytes, columns: ColumnMap | None = None) -> ParseResult:
    """Parse a meter CSV batch.

    Bad rows do not stop the parse: each is reported as a ``RowError`` with its
    1-based line number and the remaining rows are still returned.

    Raises:
        BadHeaderError: the header is missing, or lacks a mapped column. Without
            a ``columns`` mapping the header must be exactly
            ``meter_id,read_at,reading_kl``.
    """
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    header = next(reader, None)
    if header is None:
        raise BadHeaderError("empty input")
    header = [h.strip() for h in header]
    if columns is None:
        if tuple(header) != HEADER:
            raise BadHeaderError(f"expected header {','.join(HEADER)}, got {','.join(header)}")
        columns = ColumnMap()
    try:
        idx = [header.index(c) for c in (columns.meter, columns.time, columns.reading)]
    except ValueError as exc:
        raise BadHeaderError(str(exc)) from None

    result = ParseResult()
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < len(header) or any(not row[i].strip() for i in idx):
            result.errors.append(RowError(line, "missing field"))
            continue
        meter, when, value = (row[i].strip() for i in idx)
        try:
            read_at = _parse_timestamp(when)
        except ValueError:
            result.errors.append(RowError(line, f"bad timestamp {when!r}"))
            continue
        try:
            reading = Decimal(value)
        except InvalidOperation:
            result.errors.append(RowError(line, f"bad reading {value!r}"))
            continue
        if not reading.is_finite() or reading < 0:
            result.errors.append(RowError(line, f"negative or non-finite reading {value!r}"))
            continue
        result.readings.append(MeterReading(meter, read_at, reading))
    return result


def encode_meter_csv(readings) -> bytes:
    lines = [HEADER_LINE]
    lines.extend(f"{r.meter_id},{format_timestamp(r.read_at)},{r.reading_kl}\n" for r in readings)
    return "".join(lines).encode("utf-8")


@dataclass(frozen=True)
class BatchFile:
    file_id: str
    encoded: bytes

    @cached_property
    def readings(self) -> list[MeterReading]:
        return parse_meter_csv(self.encoded).readings


def is_cumulative(readings) -> bool:
    """True if every meter's readings are nondecreasing in time order."""
    by_meter: dict[str, list[MeterReading]] = {}
    for r in readings:
        by_meter.setdefault(r.meter_id, []).append(r)
    for rows in by_meter.values():
        rows.sort(key=lambda r: r.read_at)
        if any(b.reading_kl < a.reading_kl for a, b in zip(rows, rows[1:])):
            return False
    return True


def _synthetic_file(index: int, records: int, seed: int, source: str) -> BatchFile:
    n_meters = len(METER_POOL)
    draws = splitmix64_array(seed ^ index, 2 * records + n_meters)
    meter = (draws[:records] % np.uint64(n_meters)).astype(np.int64)
    litres = (draws[records:2 * records] % np.uint64(250)).astype(np.int64)
    start = (draws[2 * records:] % np.uint64(5_000_000)).astype(np.int64)

    # per-meter running totals: cumulative sum inside each meter's group
    order = np.argsort(meter, kind="stable")
    sorted_m = meter[order]
    csum = np.cumsum(litres[order])
    first = np.r_[0, np.flatnonzero(np.diff(sorted_m)) + 1]
    group_base = np.repeat(csum[first] - litres[order][first], np.diff(np.r_[first, records]))
    total = np.empty(records, dtype=np.int64)
    total[order] = start[sorted_m] + csum - group_base

    hours = EPOCH + np.timedelta64(24 * index, "h") + np.arange(records).astype("timedelta64[h]")
    stamps = np.datetime_as_string(hours, unit="s")
    body = "".join(
        f"{METER_POOL[m]},{t}Z,{v // 1000}.{v % 1000:03d}\n"
        for m, t, v in zip(meter.tolist(), stamps.tolist(), total.tolist())
    )
    return BatchFile(f"{source}-{index:06d}", (HEADER_LINE + body).encode("ascii"))


def generate_synthetic(n_files: int, records_per_file: int, seed: int,
                       source: str = "swm") -> list[BatchFile]:
    """Deterministic synthetic meter batches.

    File ``i`` is generated from the SplitMix64 stream seeded with ``seed ^ i``,
    so files can be produced independently and in any order. Each file holds
    hourly readings from meters drawn from ``METER_POOL``; readings are
    cumulative per meter.
    """
    if n_files < 1 or records_per_file < 1:
        raise ValueError("n_files and records_per_file must be >= 1")
    return [_synthetic_file(i, records_per_file, seed, source) for i in range(n_files)]


def records_for_payload(payload_bytes: int) -> int:
    """Record count whose generated CSV is roughly ``payload_bytes`` long."""
    return max(1, round((payload_bytes - len(HEADER_LINE)) / RECORD_BYTES))


def corpus_scale(files) -> float:
    """Total encoded size of ``files`` as a fraction of the published corpus."""
    return sum(len(f.encoded) for f in files) / REFERENCE_CORPUS_BYTES
