"""Event-log data model, loaders and the exact trace-variant query."""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

logger = logging.getLogger(__name__)

END_TOKEN = "__END__"
UNKNOWN_END_TOKEN = "__END_UNKNOWN__"
RESERVED_LABELS = frozenset({"⊥", END_TOKEN, UNKNOWN_END_TOKEN})

DEFAULT_COLUMNS = {"case": "case", "activity": "activity", "order": "timestamp"}


class LogFormatError(ValueError):
    """Raised when an input file does not follow the expected format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyLogError(ValueError):
    pass


def check_activity(label: str) -> str:
    if not isinstance(label, str) or not label:
        raise ValueError(f"activity label must be a nonempty string, got {label!r}")
    if "\t" in label or "\n" in label or "\r" in label:
        raise ValueError(f"activity label {label!r} contains tab or newline")
    if label in RESERVED_LABELS:
        raise ValueError(f"activity label {label!r} is reserved for the end symbol")
    return label


@dataclass(frozen=True, order=True)
class Variant:
    """An activity sequence, optionally closed by the end symbol.

    Ordering is lexicographic on the activity labels, with unterminated
    variants sorting before terminated ones of the same sequence.
    """

    activities: tuple[str, ...]
    terminated: bool = True

    def __post_init__(self):
        if not isinstance(self.activities, tuple):
            object.__setattr__(self, "activities", tuple(self.activities))

    def __len__(self) -> int:
        return len(self.activities)

    def extend(self, activity: str) -> "Variant":
        if self.terminated:
            raise ValueError("cannot extend a terminated variant")
        return Variant(self.activities + (activity,), False)

    def terminate(self) -> "Variant":
        return Variant(self.activities, True)

    def __str__(self) -> str:
        body = ",".join(self.activities)
        return f"<{body}>" + ("" if self.terminated else "...")


@dataclass(frozen=True)
class Trace:
    case_id: str
    activities: tuple[str, ...]

    def __post_init__(self):
        acts = tuple(self.activities)
        if not acts:
            raise ValueError(f"trace {self.case_id!r} has no events")
        for a in acts:
            check_activity(a)
        object.__setattr__(self, "activities", acts)


@dataclass(frozen=True)
class EventLog:
    """A set of traces with unique case identifiers."""

    traces: tuple[Trace, ...]
    activity_universe: frozenset[str] = field(init=False)

    def __post_init__(self):
        traces = tuple(self.traces)
        seen = set()
        for t in traces:
            if t.case_id in seen:
                raise ValueError(f"duplicate case id {t.case_id!r}")
            seen.add(t.case_id)
        object.__setattr__(self, "traces", traces)
        universe = frozenset(a for t in traces for a in t.activities)
        object.__setattr__(self, "activity_universe", universe)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    @cached_property
    def prefix_index(self) -> tuple[dict, dict]:
        """``(exact, prefixes)``: trace counts per full sequence and per prefix."""
        exact = Counter(t.activities for t in self.traces)
        prefixes: Counter = Counter()
        for acts, c in exact.items():
            for i in range(len(acts) + 1):
                prefixes[acts[:i]] += c
        return dict(exact), dict(prefixes)

    @classmethod
    def from_sequences(cls, sequences: Iterable[Sequence[str]]) -> "EventLog":
        """Build a log from bare activity sequences, numbering the cases."""
        return cls(tuple(Trace(str(i), tuple(s)) for i, s in enumerate(sequences)))

    @classmethod
    def from_distribution(cls, dist: "VariantDistribution") -> "EventLog":
        """Materialize one trace per counted occurrence of each variant."""
        traces = []
        for i, (variant, count) in enumerate(dist.most_common()):
            if not variant.terminated:
                raise ValueError(f"cannot materialize unterminated variant {variant}")
            for j in range(count):
                traces.append(Trace(f"v{i}_{j}", variant.activities))
        return cls(tuple(traces))


class VariantDistribution(Mapping[Variant, int]):
    """Immutable multiset of variants. Zero counts are never stored."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[Variant, int] | Iterable[tuple[Variant, int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        merged: dict[Variant, int] = {}
        for variant, count in items:
            if not isinstance(variant, Variant):
                raise TypeError(f"expected Variant key, got {type(variant).__name__}")
            count = int(count)
            if count < 0:
                raise ValueError(f"negative count {count} for {variant}")
            if count:
                merged[variant] = merged.get(variant, 0) + count
        self._entries = merged

    def __getitem__(self, key: Variant) -> int:
        return self._entries[key]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, VariantDistribution):
            return self._entries == other._entries
        if isinstance(other, Mapping):
            return self._entries == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{v}: {c}" for v, c in self.most_common())
        return f"VariantDistribution({{{body}}})"

    def total(self) -> int:
        return sum(self._entries.values())

    def most_common(self) -> list[tuple[Variant, int]]:
        """Entries sorted by descending count, ties broken lexicographically."""
        return sorted(self._entries.items(), key=lambda kv: (-kv[1], kv[0]))


def variant_query(log: EventLog) -> VariantDistribution:
    counts = Counter(Variant(t.activities, True) for t in log.traces)
    return VariantDistribution(counts)


def prefix_count(log: EventLog, prefix: Variant) -> int:
    """Number of traces matching ``prefix``.

    A terminated prefix matches traces whose whole sequence equals it; an
    unterminated one matches every trace that starts with it.
    """
    target = prefix.activities
    n = len(target)
    if prefix.terminated:
        return sum(1 for t in log.traces if t.activities == target)
    return sum(1 for t in log.traces if t.activities[:n] == target)


def _parse_order_key(raw: str):
    raw = raw.strip()
    try:
        return (0, int(raw))
    except ValueError:
        pass
    text = raw[:-1] + "+00:00" if raw.endswith(("Z", "z")) else raw
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} lacks a UTC offset")
    return (1, ts.timestamp())


def load_csv(path, column_map: Mapping[str, str] | None = None) -> EventLog:
    """Read an event log from a CSV file with case, activity and order columns.

    Events are grouped by case and stably sorted on the order key, which is
    either an integer index or an RFC 3339 timestamp.
    """
    cols = dict(DEFAULT_COLUMNS)
    cols.update(column_map or {})
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyLogError(f"{path}: empty file") from None
        index = {}
        for role in ("case", "activity", "order"):
            name = cols[role]
            if name not in header:
                raise LogFormatError(f"{path}: missing column {name!r} ({role})")
            index[role] = header.index(name)

        cases: dict[str, list] = {}
        kinds = set()
        width = max(index.values())
        for row in reader:
            lineno = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= width:
                raise LogFormatError("too few fields", lineno)
            try:
                key = _parse_order_key(row[index["order"]])
            except ValueError as exc:
                raise LogFormatError(f"unparseable order key: {exc}", lineno) from None
            kinds.add(key[0])
            if len(kinds) > 1:
                raise LogFormatError("order keys mix integers and timestamps", lineno)
            activity = row[index["activity"]]
            try:
                check_activity(activity)
            except ValueError as exc:
                raise LogFormatError(str(exc), lineno) from None
            cases.setdefault(row[index["case"]], []).append((key, activity))

    if not cases:
        raise EmptyLogError(f"{path}: no events")
    traces = []
    for case_id, events in cases.items():
        events.sort(key=lambda e: e[0])
        traces.append(Trace(case_id, tuple(a for _, a in events)))
    return EventLog(tuple(traces))


def parse_variant_fields(body: str, lineno: int | None = None) -> Variant:
    labels = body.split(",") if body else []
    terminated = True
    if labels and labels[-1] == UNKNOWN_END_TOKEN:
        labels.pop()
        terminated = False
    for label in labels:
        try:
            check_activity(label)
        except ValueError as exc:
            raise LogFormatError(str(exc), lineno) from None
    return Variant(tuple(labels), terminated)


def load_variants(path) -> VariantDistribution:
    """Read a ``count<TAB>act1,act2,...`` variant list.

    Lines ending in the ``__END_UNKNOWN__`` marker load as unterminated
    variants. Repeated variants are summed.
    """
    counts: dict[Variant, int] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LogFormatError("expected '<count>\\t<activities>'", lineno)
            try:
                count = int(parts[0])
            except ValueError:
                raise LogFormatError(f"bad count {parts[0]!r}", lineno) from None
            if count < 1:
                raise LogFormatError(f"count must be >= 1, got {count}", lineno)
            variant = parse_variant_fields(parts[1], lineno)
            if variant in counts:
                logger.warning("line %d: duplicate variant %s, counts summed", lineno, variant)
            counts[variant] = counts.get(variant, 0) + count
    return VariantDistribution(counts)


def format_variants(dist: VariantDistribution) -> str:
    lines = []
    for variant, count in dist.most_common():
        labels = list(variant.activities)
        if not variant.terminated:
            labels.append(UNKNOWN_END_TOKEN)
        lines.append(f"{count}\t{','.join(labels)}\n")
    return "".join(lines)


def write_variants(dist: VariantDistribution, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(format_variants(dist))


def load_log(path, column_map: Mapping[str, str] | None = None) -> EventLog:
    """Load a CSV event log or a variant list, chosen by file extension."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_csv(path, column_map)
    dist = load_variants(path)
    if not dist:
        raise EmptyLogError(f"{path}: no variants")
    return EventLog.from_distribution(dist)
