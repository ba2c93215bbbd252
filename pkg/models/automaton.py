"""
Timed automaton with state-vector states.

States are identified by their discovery index (``q0`` is the initial
state). Each transition carries the minimum and maximum dwell time observed
in its source state before the triggering event; the clock resets on every
transition.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional

from utils.errors import PipelineError
from utils.validators import ValidationError, validate_input
from .events import Event, SignalChange, StateVector, apply_event

logger = logging.getLogger(__name__)

StateId = int


class AutomatonIntegrityError(PipelineError):
    """Raised when a timed automaton violates its structural invariants"""
    pass


class UnreachableState(AutomatonIntegrityError):
    """Raised when a state cannot be reached from the initial state"""
    pass


class NondeterministicTransition(AutomatonIntegrityError):
    """Raised when a (source, event) pair has more than one transition"""
    pass


class InconsistentTransition(AutomatonIntegrityError):
    """Raised when a transition's event does not map its source vector onto its target vector"""
    pass


def state_label(state: StateId) -> str:
    return f"q{state}"


@dataclass(frozen=True)
class TimingInterval:
    min_ms: int
    max_ms: int
    observation_count: int = 1

    def __post_init__(self):
        if self.min_ms < 0 or self.max_ms < 0:
            raise ValidationError("Timing bounds cannot be negative")
        if self.min_ms > self.max_ms:
            raise ValidationError(f"Timing interval [{self.min_ms}, {self.max_ms}] is empty")
        if self.observation_count < 1:
            raise ValidationError("Timing interval needs at least one observation")

    @classmethod
    def single(cls, duration_ms: int) -> TimingInterval:
        return cls(duration_ms, duration_ms, 1)

    def widened(self, duration_ms: int) -> TimingInterval:
        """Include one more observed duration"""
        return TimingInterval(
            min(self.min_ms, duration_ms),
            max(self.max_ms, duration_ms),
            self.observation_count + 1,
        )

    def contains(self, duration_ms: int) -> bool:
        # closed interval: observed extremes are legal
        return self.min_ms <= duration_ms <= self.max_ms

    def covers(self, other: TimingInterval) -> bool:
        return self.min_ms <= other.min_ms and other.max_ms <= self.max_ms

    def to_dict(self) -> dict:
        return {'min_ms': self.min_ms, 'max_ms': self.max_ms, 'count': self.observation_count}

    @classmethod
    def from_dict(cls, data: Mapping) -> TimingInterval:
        return cls(
            validate_input('non_negative_int', data.get('min_ms'), field_name='min_ms'),
            validate_input('non_negative_int', data.get('max_ms'), field_name='max_ms'),
            validate_input('positive_int', data.get('count', 1), field_name='count'),
        )


@dataclass(frozen=True)
class Transition:
    source: StateId
    event: Event
    target: StateId
    timing: TimingInterval

    def sort_key(self):
        return (self.source, self.target, sorted(self.event.new_values().items()))


@dataclass(frozen=True)
class TimedAutomaton:
    """Immutable timed automaton A = (S, S0, Σ, T, Δ) with a single initial state"""

    signal_ordering: tuple[str, ...]
    states: Mapping[StateId, StateVector]
    initial: StateId
    transitions: tuple[Transition, ...]
    metadata: Mapping = field(default_factory=dict, compare=False)
    _by_source: Mapping = field(init=False, repr=False, compare=False)
    _by_vector: Mapping = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = MappingProxyType({sid: self.states[sid] for sid in sorted(self.states)})
        transitions = tuple(sorted(self.transitions, key=Transition.sort_key))
        object.__setattr__(self, 'signal_ordering', tuple(self.signal_ordering))
        object.__setattr__(self, 'states', states)
        object.__setattr__(self, 'transitions', transitions)
        object.__setattr__(self, 'metadata', MappingProxyType(dict(self.metadata)))

        by_source = {}
        for transition in transitions:
            by_source.setdefault(transition.source, {}).setdefault(transition.event, []).append(transition)
        object.__setattr__(self, '_by_source', by_source)
        object.__setattr__(self, '_by_vector', {vector: sid for sid, vector in states.items()})

    def __hash__(self):
        return hash((self.signal_ordering, tuple(self.states.items()), self.initial, self.transitions))

    def __eq__(self, other):
        if not isinstance(other, TimedAutomaton):
            return NotImplemented
        return (self.signal_ordering == other.signal_ordering
                and dict(self.states) == dict(other.states)
                and self.initial == other.initial
                and self.transitions == other.transitions)

    def vector(self, state: StateId) -> StateVector:
        return self.states[state]

    def outgoing(self, state: StateId) -> tuple[Transition, ...]:
        """Outgoing transitions of `state` in canonical order"""
        found = [t for group in self._by_source.get(state, {}).values() for t in group]
        return tuple(sorted(found, key=Transition.sort_key))

    def transition_for(self, state: StateId, event: Event) -> Optional[Transition]:
        matches = self._by_source.get(state, {}).get(event)
        return matches[0] if matches else None

    def state_for_vector(self, vector: StateVector) -> Optional[StateId]:
        return self._by_vector.get(vector)

    def check_integrity(self) -> TimedAutomaton:
        """
        Verify endpoints, determinism, vector consistency and reachability

        Returns:
            TimedAutomaton: self, for chaining

        Raises:
            AutomatonIntegrityError: (or a subclass) naming the first violation
        """
        if self.initial not in self.states:
            raise AutomatonIntegrityError(f"Initial state {state_label(self.initial)} is not a state")

        if len(self._by_vector) != len(self.states):
            raise AutomatonIntegrityError("Two states share the same state vector")

        for sid, vector in self.states.items():
            if vector.signals != self.signal_ordering:
                raise AutomatonIntegrityError(f"State {state_label(sid)} uses a different signal ordering")

        for source, by_event in self._by_source.items():
            for event, group in by_event.items():
                if len(group) > 1:
                    raise NondeterministicTransition(
                        f"{state_label(source)} has {len(group)} transitions on {event!r}"
                    )

        for t in self.transitions:
            if t.source not in self.states or t.target not in self.states:
                raise AutomatonIntegrityError(
                    f"Transition {state_label(t.source)}->{state_label(t.target)} has a dangling endpoint"
                )
            try:
                reached = apply_event(self.states[t.source], t.event)
            except PipelineError as e:
                raise InconsistentTransition(str(e))
            if reached != self.states[t.target]:
                raise InconsistentTransition(
                    f"{t.event!r} maps {state_label(t.source)} to {reached}, "
                    f"not {state_label(t.target)} {self.states[t.target]}"
                )

        reachable = reachable_states(self, self.initial)
        unreachable = sorted(set(self.states) - reachable)
        if unreachable:
            raise UnreachableState(
                f"States not reachable from {state_label(self.initial)}: "
                + ', '.join(state_label(s) for s in unreachable)
            )
        return self

    def to_dict(self) -> dict:
        data = {
            'signal_ordering': list(self.signal_ordering),
            'states': {str(sid): list(vector.values) for sid, vector in self.states.items()},
            'initial': self.initial,
            'transitions': [
                {
                    'source': t.source,
                    'target': t.target,
                    'changes': t.event.new_values(),
                    **t.timing.to_dict(),
                }
                for t in self.transitions
            ],
        }
        if self.metadata:
            data['learning'] = dict(self.metadata)
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> TimedAutomaton:
        """Load an automaton document and verify its invariants"""
        try:
            ordering = tuple(validate_input('signal', s) for s in data['signal_ordering'])
            states = {
                int(sid): StateVector(ordering, validate_input('vector', values))
                for sid, values in data['states'].items()
            }
            initial = int(data['initial'])
            transitions = []
            for item in data['transitions']:
                source = int(item['source'])
                if source not in states:
                    raise AutomatonIntegrityError(f"Transition source q{source} is not a state")
                changes = item['changes']
                if not isinstance(changes, dict):
                    raise ValidationError("Transition changes must be an object")
                event = Event(tuple(SignalChange(signal, states[source][signal], int(value))
                                    for signal, value in changes.items()))
                transitions.append(Transition(source, event, int(item['target']),
                                              TimingInterval.from_dict(item)))
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ValidationError(f"Malformed automaton document: {e!r}")

        automaton = cls(ordering, states, initial, tuple(transitions), data.get('learning', {}))
        return automaton.check_integrity()


def reachable_states(automaton: TimedAutomaton, start: StateId) -> set[StateId]:
    """States reachable from `start` (including it)"""
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for t in automaton.outgoing(state):
            if t.target not in seen:
                seen.add(t.target)
                queue.append(t.target)
    return seen

