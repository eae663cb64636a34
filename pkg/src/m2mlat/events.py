"""Timestamped interrupt events and the text log formats that carry them.

A capture session involves two nodes, an operator station and a vehicle,
each producing an ordered log of edge-detection events. Two input formats
are supported:

* CSV, the toolkit's canonical format: header
  ``node,seq,t_wall_ns[,t_mono_ns][,source]``, one record per line, UTF-8,
  LF line endings. ``source`` is one of ``hall``, ``pulse``, ``synthetic``
  and defaults to ``hall``. A headerless file is accepted when its first
  line does not begin with ``node,``; headerless 4-column rows are
  disambiguated by whether the fourth field is numeric (``t_mono_ns``) or
  a source name.
* Kernel ring text: one event per line matching
  ``m2m_irq: seq=<uint> ts=<uint ns> src=<hall|pulse>``. Anything before
  the ``m2m_irq:`` marker (such as a bracketed kernel timestamp) is
  ignored. Ring logs carry no node identity, so ``parse_log`` requires an
  explicit ``node`` for this format. Interrupt-logging kernel modules do
  not share a standard output grammar; this line shape is the contract
  this toolkit commits to, and an emitter must match it (or be piped
  through a one-line rewrite) to be ingested.

Timestamps are stored as 64-bit signed integer nanoseconds; derived
statistics may be floating point but storage never is. Within one log,
``seq`` is strictly increasing and ``t_wall_ns`` is non-decreasing (equal
timestamps are legal: interrupt bursts can collide at nanosecond
granularity).

CSV does not serialize ``EventLog.meta`` or the node role. Parsing the
output of ``write_log`` reproduces the original log exactly for logs with
empty meta and a canonical node id ("operator" or "vehicle"); for any
other node, pass the original ``node`` back into ``parse_log``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ConfigInvalid,
    EmptyLog,
    NonMonotonicSeq,
    NonMonotonicTime,
    UnparseableLine,
)


class Role(Enum):
    OPERATOR = "operator"
    VEHICLE = "vehicle"


class EventSource(Enum):
    HALL_EDGE = "hall"
    SHARED_PULSE = "pulse"
    SYNTHETIC = "synthetic"


class LogFormat(Enum):
    CSV = "csv"
    KERNEL_RING = "kernelring"


_SOURCE_BY_NAME = {s.value: s for s in EventSource}

# Node ids mapped to roles when no explicit NodeId is supplied; anything
# else defaults to OPERATOR (precision analysis does not use roles, and the
# CLI reassigns roles from its flag names).
_ROLE_BY_ID = {
    "operator": Role.OPERATOR,
    "op": Role.OPERATOR,
    "vehicle": Role.VEHICLE,
    "veh": Role.VEHICLE,
}

_KERNEL_RING_RE = re.compile(
    r"m2m_irq:\s*seq=(\d+)\s+ts=(\d+)\s+src=(hall|pulse)\s*$"
)

_CSV_COLUMNS = ("node", "seq", "t_wall_ns", "t_mono_ns", "source")


@dataclass(frozen=True)
class NodeId:
    """Identity of one recording endpoint."""

    id: str
    role: Role

    def __post_init__(self):
        if not self.id:
            raise ConfigInvalid("node id must be non-empty")
        if not isinstance(self.role, Role):
            raise ConfigInvalid(f"invalid role: {self.role!r}")


def infer_node(node_id: str) -> NodeId:
    """Build a NodeId from a bare id, guessing the role from well-known names."""
    return NodeId(node_id, _ROLE_BY_ID.get(node_id.lower(), Role.OPERATOR))


@dataclass(frozen=True)
class EventRecord:
    """One timestamped edge detection on one node."""

    node: NodeId
    seq: int
    t_wall_ns: int
    t_mono_ns: int | None = None
    source: EventSource = EventSource.HALL_EDGE

    def __post_init__(self):
        if self.seq < 0:
            raise ConfigInvalid(f"seq must be non-negative, got {self.seq}")
        if self.t_wall_ns <= 0:
            raise ConfigInvalid(f"t_wall_ns must be positive, got {self.t_wall_ns}")


@dataclass(frozen=True)
class EventLog:
    """An ordered, validated sequence of events from a single node.

    Treat instances as immutable value data; they are safe to share
    read-only across threads.
    """

    node: NodeId
    records: tuple[EventRecord, ...]
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        prev: EventRecord | None = None
        for pos, rec in enumerate(self.records, start=1):
            if rec.node != self.node:
                raise ConfigInvalid(
                    f"record {pos} belongs to node {rec.node.id!r}, "
                    f"log is for {self.node.id!r}"
                )
            if prev is not None:
                if rec.seq <= prev.seq:
                    raise NonMonotonicSeq(pos, f"seq {rec.seq} after {prev.seq}")
                if rec.t_wall_ns < prev.t_wall_ns:
                    raise NonMonotonicTime(
                        pos, f"t_wall_ns {rec.t_wall_ns} after {prev.t_wall_ns}"
                    )
            prev = rec

    def __len__(self) -> int:
        return len(self.records)


def with_role(log: EventLog, role: Role) -> EventLog:
    """Return a copy of the log with the node role replaced."""
    if log.node.role is role:
        return log
    node = NodeId(log.node.id, role)
    records = tuple(
        EventRecord(node, r.seq, r.t_wall_ns, r.t_mono_ns, r.source)
        for r in log.records
    )
    return EventLog(node, records, dict(log.meta))


def parse_log(
    raw: str | bytes,
    fmt: LogFormat = LogFormat.CSV,
    *,
    node: NodeId | None = None,
    lenient: bool = False,
) -> EventLog:
    """Parse raw log text into a validated EventLog.

    In strict mode (the default) any malformed line or monotonicity
    violation raises. With ``lenient=True`` offending lines are dropped
    and counted; the count and first failure reason are reported in the
    returned log's ``meta`` under ``parse_skipped`` / ``parse_first_error``.
    """
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    if fmt is LogFormat.CSV:
        return _parse_csv(text, node, lenient)
    if fmt is LogFormat.KERNEL_RING:
        if node is None:
            raise ConfigInvalid(
                "kernel ring logs carry no node id; pass node= explicitly"
            )
        return _parse_kernel_ring(text, node, lenient)
    raise ConfigInvalid(f"unsupported log format: {fmt!r}")


def write_log(log: EventLog, fmt: LogFormat = LogFormat.CSV) -> str:
    """Serialize a log to text. Only the CSV format is writable.

    Optional columns are emitted only when some record needs them, so all
    header variants of the format are produced naturally.
    """
    if fmt is not LogFormat.CSV:
        raise ConfigInvalid(f"unsupported output format: {fmt!r}")
    with_mono = any(r.t_mono_ns is not None for r in log.records)
    with_source = any(r.source is not EventSource.HALL_EDGE for r in log.records)
    cols = ["node", "seq", "t_wall_ns"]
    if with_mono:
        cols.append("t_mono_ns")
    if with_source:
        cols.append("source")
    lines = [",".join(cols)]
    for r in log.records:
        row = [log.node.id, str(r.seq), str(r.t_wall_ns)]
        if with_mono:
            row.append("" if r.t_mono_ns is None else str(r.t_mono_ns))
        if with_source:
            row.append(r.source.value)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


class _LenientState:
    """Skip counters for lenient parsing."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.skipped = 0
        self.first_error = ""

    def reject(self, err: Exception) -> None:
        if not self.enabled:
            raise err
        self.skipped += 1
        if not self.first_error:
            self.first_error = str(err)

    def annotate(self, meta: dict[str, str]) -> None:
        if self.skipped:
            meta["parse_skipped"] = str(self.skipped)
            meta["parse_first_error"] = self.first_error


def _check_order(
    prev: EventRecord | None, seq: int, t_wall: int, line_no: int
) -> None:
    if prev is None:
        return
    if seq <= prev.seq:
        raise NonMonotonicSeq(line_no, f"seq {seq} after {prev.seq}")
    if t_wall < prev.t_wall_ns:
        raise NonMonotonicTime(line_no, f"t_wall_ns {t_wall} after {prev.t_wall_ns}")


def _parse_csv(text: str, node: NodeId | None, lenient: bool) -> EventLog:
    state = _LenientState(lenient)
    lines = text.split("\n")
    start = 0
    layout: tuple[str, ...] | None = None

    # Skip leading blank lines, then detect an optional header.
    while start < len(lines) and not lines[start].strip():
        start += 1
    if start < len(lines):
        first = [c.strip() for c in lines[start].split(",")]
        if first and first[0] == "node":
            layout = _header_layout(first, start + 1)
            start += 1

    records: list[EventRecord] = []
    prev: EventRecord | None = None
    for line_no, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        try:
            if layout is None:
                # Headerless file: the first data row pins the layout.
                layout = _sniff_layout([c.strip() for c in line.split(",")])
                if layout is None:
                    raise UnparseableLine(line_no, "expected 3 to 5 columns")
            rec = _parse_csv_row(line, line_no, layout, node, prev)
            _check_order(prev, rec.seq, rec.t_wall_ns, line_no)
        except (UnparseableLine, NonMonotonicSeq, NonMonotonicTime) as err:
            state.reject(err)
            continue
        if node is None and prev is None:
            # First record pins the log's node for the rest of the file.
            node = rec.node
        records.append(rec)
        prev = rec

    if not records:
        raise EmptyLog("no event records found")
    meta: dict[str, str] = {}
    state.annotate(meta)
    return EventLog(records[0].node, tuple(records), meta)


def _header_layout(cells: list[str], line_no: int) -> tuple[str, ...]:
    if (
        len(cells) < 3
        or tuple(cells[:3]) != _CSV_COLUMNS[:3]
        or any(c not in _CSV_COLUMNS[3:] for c in cells[3:])
        or len(set(cells)) != len(cells)
    ):
        raise UnparseableLine(line_no, f"bad header: {','.join(cells)!r}")
    return tuple(cells)


def _parse_csv_row(
    line: str,
    line_no: int,
    layout: tuple[str, ...],
    node: NodeId | None,
    prev: EventRecord | None,
) -> EventRecord:
    cells = [c.strip() for c in line.split(",")]
    if len(cells) != len(layout):
        raise UnparseableLine(
            line_no, f"expected {len(layout)} columns, got {len(cells)}"
        )
    row = dict(zip(layout, cells))

    node_id = row["node"]
    if not node_id:
        raise UnparseableLine(line_no, "empty node id")
    if node is not None:
        if node_id != node.id:
            raise UnparseableLine(
                line_no, f"node {node_id!r} does not match log node {node.id!r}"
            )
        rec_node = node
    elif prev is not None:
        if node_id != prev.node.id:
            raise UnparseableLine(
                line_no, f"node {node_id!r} does not match log node {prev.node.id!r}"
            )
        rec_node = prev.node
    else:
        rec_node = infer_node(node_id)

    seq = _parse_uint(row["seq"], line_no, "seq")
    t_wall = _parse_uint(row["t_wall_ns"], line_no, "t_wall_ns")
    if t_wall <= 0:
        raise UnparseableLine(line_no, "t_wall_ns must be positive")
    t_mono: int | None = None
    if row.get("t_mono_ns"):
        t_mono = _parse_uint(row["t_mono_ns"], line_no, "t_mono_ns")
    source = EventSource.HALL_EDGE
    if row.get("source"):
        try:
            source = _SOURCE_BY_NAME[row["source"]]
        except KeyError:
            raise UnparseableLine(line_no, f"unknown source {row['source']!r}")
    return EventRecord(rec_node, seq, t_wall, t_mono, source)


def _sniff_layout(cells: list[str]) -> tuple[str, ...] | None:
    """Column layout for headerless rows; 4 columns need disambiguation."""
    if len(cells) == 3:
        return _CSV_COLUMNS[:3]
    if len(cells) == 5:
        return _CSV_COLUMNS
    if len(cells) == 4:
        if cells[3] in _SOURCE_BY_NAME:
            return ("node", "seq", "t_wall_ns", "source")
        return ("node", "seq", "t_wall_ns", "t_mono_ns")
    return None


def _parse_uint(cell: str, line_no: int, name: str) -> int:
    try:
        value = int(cell)
    except ValueError:
        raise UnparseableLine(line_no, f"{name} is not an integer: {cell!r}")
    if value < 0:
        raise UnparseableLine(line_no, f"{name} must be non-negative: {value}")
    return value


def _parse_kernel_ring(text: str, node: NodeId, lenient: bool) -> EventLog:
    state = _LenientState(lenient)
    records: list[EventRecord] = []
    prev: EventRecord | None = None
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            marker = line.find("m2m_irq:")
            if marker < 0:
                raise UnparseableLine(line_no, "no m2m_irq: marker")
            m = _KERNEL_RING_RE.match(line[marker:])
            if m is None:
                raise UnparseableLine(line_no, f"bad event line: {line.strip()!r}")
            seq, t_wall = int(m.group(1)), int(m.group(2))
            if t_wall <= 0:
                raise UnparseableLine(line_no, "ts must be positive")
            _check_order(prev, seq, t_wall, line_no)
        except (UnparseableLine, NonMonotonicSeq, NonMonotonicTime) as err:
            state.reject(err)
            continue
        rec = EventRecord(node, seq, t_wall, None, _SOURCE_BY_NAME[m.group(3)])
        records.append(rec)
        prev = rec

    if not records:
        raise EmptyLog("no event records found")
    meta: dict[str, str] = {}
    state.annotate(meta)
    return EventLog(node, tuple(records), meta)
