from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

from utils.validators import ValidationError, validate_input
from .automaton import StateId, TimingInterval, state_label
from .events import Event, SignalChange


class AnomalyKind(str, Enum):
    WRONG_TIMING = 'WrongTiming'
    UNKNOWN_EVENT = 'UnknownEvent'


class ViolatedBound(str, Enum):
    BELOW_MIN = 'BelowMin'
    ABOVE_MAX = 'AboveMax'


class Resolution(str, Enum):
    """How monitoring continued after the anomaly"""

    ADVANCED = 'advanced'
    RESYNCED = 'resynced'
    HALTED = 'halted'


def event_to_rows(event: Event) -> list[dict]:
    return [{'signal': c.signal, 'from': c.old, 'to': c.new} for c in event.changes]


def event_from_rows(rows) -> Event:
    try:
        return Event(tuple(SignalChange(validate_input('signal', row['signal']),
                                        validate_input('signal_value', row['from']),
                                        validate_input('signal_value', row['to']))
                           for row in rows))
    except (KeyError, TypeError, AttributeError) as e:
        raise ValidationError(f"Malformed event description: {e!r}")


@dataclass(frozen=True)
class ExpectedEvent:
    event: Event
    target: StateId
    timing: TimingInterval

    def to_dict(self) -> dict:
        return {'changes': event_to_rows(self.event), 'target': self.target, **self.timing.to_dict()}

    @classmethod
    def from_dict(cls, data: Mapping) -> ExpectedEvent:
        return cls(event_from_rows(data['changes']), int(data['target']), TimingInterval.from_dict(data))


@dataclass(frozen=True)
class AnomalyReport:
    """One wrong-timing or unknown-event observation"""

    kind: AnomalyKind
    at: int
    source_state: StateId
    observed_event: Event
    resolution: Resolution
    target_state: Optional[StateId] = None
    observed_duration_ms: Optional[int] = None
    violated_bound: Optional[ViolatedBound] = None
    reference: Optional[TimingInterval] = None
    deviation_ms: Optional[int] = None
    expected_events: tuple[ExpectedEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'kind', AnomalyKind(self.kind))
        object.__setattr__(self, 'resolution', Resolution(self.resolution))
        if self.kind is AnomalyKind.WRONG_TIMING:
            if self.reference is None or self.observed_duration_ms is None or self.violated_bound is None:
                raise ValidationError("WrongTiming report needs duration, bound and reference")
            object.__setattr__(self, 'violated_bound', ViolatedBound(self.violated_bound))
            if self.violated_bound is ViolatedBound.BELOW_MIN:
                expected = self.reference.min_ms - self.observed_duration_ms
            else:
                expected = self.observed_duration_ms - self.reference.max_ms
            if expected <= 0 or self.deviation_ms != expected:
                raise ValidationError(
                    f"Deviation {self.deviation_ms} ms does not match {self.violated_bound.value} "
                    f"for duration {self.observed_duration_ms} ms"
                )

    @property
    def transition_label(self) -> str:
        target = state_label(self.target_state) if self.target_state is not None else '?'
        return f"{state_label(self.source_state)}->{target}"

    def to_dict(self) -> dict:
        data = {
            'kind': self.kind.value,
            'at': self.at,
            'source_state': self.source_state,
            'target_state': self.target_state,
            'observed_event': event_to_rows(self.observed_event),
            'resolution': self.resolution.value,
        }
        if self.kind is AnomalyKind.WRONG_TIMING:
            data.update({
                'observed_duration_ms': self.observed_duration_ms,
                'violated_bound': self.violated_bound.value,
                'reference': self.reference.to_dict(),
                'deviation_ms': self.deviation_ms,
            })
        else:
            data['expected_events'] = [expected.to_dict() for expected in self.expected_events]
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> AnomalyReport:
        try:
            kind = AnomalyKind(data['kind'])
            common = {
                'kind': kind,
                'at': validate_input('timestamp', data['at']),
                'source_state': int(data['source_state']),
                'target_state': None if data.get('target_state') is None else int(data['target_state']),
                'observed_event': event_from_rows(data['observed_event']),
                'resolution': Resolution(data['resolution']),
            }
            if kind is AnomalyKind.WRONG_TIMING:
                return cls(
                    **common,
                    observed_duration_ms=int(data['observed_duration_ms']),
                    violated_bound=ViolatedBound(data['violated_bound']),
                    reference=TimingInterval.from_dict(data['reference']),
                    deviation_ms=int(data['deviation_ms']),
                )
            return cls(
                **common,
                expected_events=tuple(ExpectedEvent.from_dict(e) for e in data.get('expected_events', [])),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ValidationError(f"Malformed anomaly report: {e!r}")


@dataclass(frozen=True)
class Syndrome:
    """Reports that occurred close enough together to be read as one picture"""

    index: int
    reports: tuple[AnomalyReport, ...]
    window_ms: int

    def __post_init__(self):
        if not self.reports:
            raise ValidationError("A syndrome needs at least one report")
        for earlier, later in zip(self.reports, self.reports[1:]):
            if later.at - earlier.at > self.window_ms:
                raise ValidationError("Syndrome reports are further apart than the window")

    @property
    def first_at(self) -> int:
        return self.reports[0].at

    @property
    def last_at(self) -> int:
        return self.reports[-1].at

    def __len__(self):
        return len(self.reports)
