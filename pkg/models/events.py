"""
Signals, state vectors, events and event logs.

Raw per-signal samples are coalesced into events on a fixed PLC-cycle grid:
every value change whose timestamp falls into the same ``t // cycle_ms``
window becomes part of one event.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from utils.errors import PipelineError
from utils.validators import ValidationError, validate_record_fields

logger = logging.getLogger(__name__)

DEFAULT_CYCLE_MS = 100

SignalId = str


class UnknownSignal(PipelineError):
    """Raised when a sample or event references a signal outside the ordering"""
    pass


class NonMonotonicTimestamps(PipelineError):
    """Raised when timestamps go backwards"""
    pass


class InconsistentOldValue(PipelineError):
    """Raised when an event's old value does not match the state vector"""
    pass


@dataclass(frozen=True)
class StateVector:
    """Discrete IO values in a fixed signal ordering"""

    signals: tuple[SignalId, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'signals', tuple(self.signals))
        object.__setattr__(self, 'values', tuple(int(v) for v in self.values))
        if len(self.signals) != len(self.values):
            raise ValidationError(
                f"State vector has {len(self.values)} values for {len(self.signals)} signals"
            )
        if len(set(self.signals)) != len(self.signals):
            raise ValidationError("Signal ordering contains duplicates")

    @classmethod
    def zeros(cls, signals: Sequence[SignalId]) -> StateVector:
        return cls(tuple(signals), (0,) * len(signals))

    def __len__(self):
        return len(self.values)

    def index_of(self, signal: SignalId) -> int:
        try:
            return self.signals.index(signal)
        except ValueError:
            raise UnknownSignal(f"Signal {signal!r} is not part of the signal ordering")

    def __getitem__(self, signal: SignalId) -> int:
        return self.values[self.index_of(signal)]

    def with_values(self, updates: Mapping[SignalId, int]) -> StateVector:
        """Return a copy with some signals overwritten"""
        values = list(self.values)
        for signal, value in updates.items():
            values[self.index_of(signal)] = int(value)
        return StateVector(self.signals, tuple(values))

    def as_dict(self) -> dict[SignalId, int]:
        return dict(zip(self.signals, self.values))

    def __str__(self):
        return '(' + ','.join(str(v) for v in self.values) + ')'


@dataclass(frozen=True)
class SignalChange:
    signal: SignalId
    old: int
    new: int

    def __post_init__(self):
        if self.old == self.new:
            raise ValidationError(f"Change of {self.signal} restates value {self.new}")


@dataclass(frozen=True, eq=False)
class Event:
    """A coalesced set of signal value changes.

    Identity is the set of ``(signal, new value)`` pairs; old values only
    serve integrity checks against the source state.
    """

    changes: tuple[SignalChange, ...]
    _key: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        changes = tuple(sorted(self.changes, key=lambda c: c.signal))
        if not changes:
            raise ValidationError("An event needs at least one signal change")
        signals = [c.signal for c in changes]
        if len(set(signals)) != len(signals):
            raise ValidationError(f"Event changes a signal twice: {signals}")
        object.__setattr__(self, 'changes', changes)
        object.__setattr__(self, '_key', frozenset((c.signal, c.new) for c in changes))

    @classmethod
    def from_new_values(cls, source: StateVector, new_values: Mapping[SignalId, int]) -> Event:
        """Build an event whose old values are read from `source`"""
        return cls(tuple(SignalChange(signal, source[signal], int(value))
                         for signal, value in new_values.items()))

    @property
    def key(self) -> frozenset:
        return self._key

    @property
    def signals(self) -> tuple[SignalId, ...]:
        return tuple(c.signal for c in self.changes)

    def new_values(self) -> dict[SignalId, int]:
        return {c.signal: c.new for c in self.changes}

    def describe(self) -> str:
        return ', '.join(f"{c.signal}: {c.new}" for c in self.changes)

    def __eq__(self, other):
        if not isinstance(other, Event):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Event({{{self.describe()}}})"


@dataclass(frozen=True)
class EventRecord:
    event: Event
    timestamp: int

    def to_dict(self) -> dict:
        return {'t_ms': self.timestamp, 'changes': self.event.new_values()}


@dataclass(frozen=True)
class RawSample:
    timestamp: int
    signal: SignalId
    value: int

    def to_dict(self) -> dict:
        return {'t_ms': self.timestamp, 'signal': self.signal, 'value': self.value}

    @classmethod
    def from_dict(cls, data: Mapping) -> RawSample:
        fields = validate_record_fields(
            data, {'t_ms': 'timestamp', 'signal': 'signal', 'value': 'signal_value'}
        )
        return cls(fields['t_ms'], fields['signal'], fields['value'])


def apply_event(u: StateVector, e: Event) -> StateVector:
    """
    Apply an event to a state vector

    Raises:
        InconsistentOldValue: If a change's old value differs from `u`
        UnknownSignal: If the event touches a signal outside the ordering
    """
    values = list(u.values)
    for change in e.changes:
        index = u.index_of(change.signal)
        if values[index] != change.old:
            raise InconsistentOldValue(
                f"{change.signal} is {values[index]} in {u}, event expects {change.old}"
            )
        values[index] = change.new
    return StateVector(u.signals, tuple(values))


def coalesce_samples(samples: Iterable[RawSample], initial: StateVector,
                     cycle_ms: int = DEFAULT_CYCLE_MS) -> list[EventRecord]:
    """
    Merge raw samples into events, one per PLC cycle window

    Args:
        samples: Samples sorted by timestamp
        initial: State vector before the first sample
        cycle_ms: Width of the fixed coalescing grid

    Returns:
        list[EventRecord]: Events with strictly increasing timestamps
    """
    if cycle_ms <= 0:
        raise ValidationError("cycle_ms must be positive")

    ordering = initial.signals
    current = initial.as_dict()
    records = []

    window = None
    window_start = current
    first_change_at = None
    previous_at = None

    def flush():
        changes = [SignalChange(s, window_start[s], current[s])
                   for s in ordering if current[s] != window_start[s]]
        if changes:
            records.append(EventRecord(Event(tuple(changes)), first_change_at))

    for sample in samples:
        if sample.signal not in current:
            raise UnknownSignal(f"Sample at t={sample.timestamp} references unknown signal {sample.signal!r}")
        if previous_at is not None and sample.timestamp < previous_at:
            raise NonMonotonicTimestamps(
                f"Sample timestamp {sample.timestamp} follows {previous_at}"
            )
        previous_at = sample.timestamp

        sample_window = sample.timestamp // cycle_ms
        if sample_window != window:
            if window is not None:
                flush()
            window = sample_window
            window_start = dict(current)
            first_change_at = None

        if current[sample.signal] != sample.value:
            if first_change_at is None:
                first_change_at = sample.timestamp
            current[sample.signal] = sample.value

    if window is not None:
        flush()

    logger.debug(f"Coalesced samples into {len(records)} events (cycle {cycle_ms} ms)")
    return records


def fold_samples(samples: Iterable[RawSample], initial: StateVector) -> StateVector:
    """Last-write-wins fold of raw samples over `initial`"""
    current = initial.as_dict()
    for sample in samples:
        if sample.signal not in current:
            raise UnknownSignal(f"Unknown signal {sample.signal!r}")
        current[sample.signal] = sample.value
    return StateVector(initial.signals, tuple(current[s] for s in initial.signals))


def replay_events(initial: StateVector, records: Iterable[EventRecord]) -> StateVector:
    """Fold events with apply_event"""
    vector = initial
    for record in records:
        vector = apply_event(vector, record.event)
    return vector


def records_to_samples(records: Iterable[EventRecord]) -> list[RawSample]:
    """Expand coalesced events back into one raw sample per change"""
    samples = []
    for record in records:
        for change in record.event.changes:
            samples.append(RawSample(record.timestamp, change.signal, change.new))
    return samples


def signal_ordering_from_samples(samples: Iterable[RawSample]) -> tuple[SignalId, ...]:
    """Signals in order of first appearance"""
    seen = {}
    for sample in samples:
        seen.setdefault(sample.signal, None)
    return tuple(seen)


def samples_to_rows(samples: Iterable[RawSample]) -> list[dict]:
    return [sample.to_dict() for sample in samples]


def samples_from_rows(rows: Iterable[Mapping]) -> list[RawSample]:
    return [RawSample.from_dict(row) for row in rows]


def records_to_rows(records: Iterable[EventRecord]) -> list[dict]:
    return [record.to_dict() for record in records]


def records_from_rows(rows: Iterable[Mapping], initial: StateVector) -> list[EventRecord]:
    """
    Decode coalesced event rows, recovering old values by replay

    Args:
        rows: Decoded ``{"t_ms": ..., "changes": {...}}`` objects
        initial: State vector at log start

    Returns:
        list[EventRecord]
    """
    vector = initial
    records = []
    previous_at = None
    for row in rows:
        fields = validate_record_fields(row, {'t_ms': 'timestamp'})
        changes = row.get('changes')
        if not isinstance(changes, dict) or not changes:
            raise ValidationError(f"Event at t={fields['t_ms']} has no changes")
        if previous_at is not None and fields['t_ms'] <= previous_at:
            raise NonMonotonicTimestamps(f"Event timestamp {fields['t_ms']} follows {previous_at}")
        previous_at = fields['t_ms']
        event = Event.from_new_values(vector, changes)
        vector = apply_event(vector, event)
        records.append(EventRecord(event, fields['t_ms']))
    return records
