"""
Online timed automaton learning.

Each distinct state vector is one state. Events are ingested as they occur:
unseen vectors become new states, unseen (state, event) pairs become new
transitions, and known transitions widen their [min, max] dwell interval.
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional

from models.automaton import TimedAutomaton, TimingInterval, Transition, state_label
from models.events import (
    DEFAULT_CYCLE_MS,
    EventRecord,
    NonMonotonicTimestamps,
    RawSample,
    StateVector,
    apply_event,
    coalesce_samples,
)
from utils.validators import ValidationError

logger = logging.getLogger(__name__)

MIN_DYNAMIC_WINDOW = 50
DYNAMIC_WINDOW_FACTOR = 3


class LearnerSession:
    """Single-writer learning state over one event stream"""

    def __init__(self, initial_vector: StateVector, convergence_window: Optional[int] = None):
        if convergence_window is not None and convergence_window <= 0:
            raise ValidationError("Convergence window must be positive")

        self.signal_ordering = initial_vector.signals
        self.initial = 0
        self.current = 0
        self.last_transition_timestamp = 0
        self.events_since_last_change = 0
        self.events_ingested = 0
        self.fixed_window = convergence_window

        self._states = {0: initial_vector}
        self._ids = {initial_vector: 0}
        # (source, event) -> [target, TimingInterval]
        self._transitions = {}

    @property
    def convergence_window(self) -> int:
        if self.fixed_window is not None:
            return self.fixed_window
        return max(MIN_DYNAMIC_WINDOW, DYNAMIC_WINDOW_FACTOR * len(self._transitions))

    @property
    def window_rule(self) -> str:
        if self.fixed_window is not None:
            return 'fixed'
        return f"max({MIN_DYNAMIC_WINDOW}, {DYNAMIC_WINDOW_FACTOR}*|T|)"

    @property
    def state_count(self) -> int:
        return len(self._states)

    @property
    def transition_count(self) -> int:
        return len(self._transitions)

    def ingest(self, record: EventRecord) -> LearnerSession:
        """
        Feed one coalesced event

        Raises:
            NonMonotonicTimestamps: If the record is not later than the previous one
            InconsistentOldValue: If the event does not fit the current state vector
        """
        if self.events_ingested and record.timestamp <= self.last_transition_timestamp:
            raise NonMonotonicTimestamps(
                f"Event at t={record.timestamp} does not follow t={self.last_transition_timestamp}"
            )
        if record.timestamp < 0:
            raise NonMonotonicTimestamps(f"Negative timestamp {record.timestamp}")

        duration = record.timestamp - self.last_transition_timestamp
        target_vector = apply_event(self._states[self.current], record.event)
        changed = False

        target = self._ids.get(target_vector)
        if target is None:
            target = len(self._states)
            self._states[target] = target_vector
            self._ids[target_vector] = target
            changed = True
            logger.debug(f"New state {state_label(target)} = {target_vector}")

        key = (self.current, record.event)
        entry = self._transitions.get(key)
        if entry is None:
            self._transitions[key] = [target, TimingInterval.single(duration)]
            changed = True
            logger.debug(
                f"New transition {state_label(self.current)}->{state_label(target)} "
                f"on {record.event.describe()} after {duration} ms"
            )
        else:
            entry[1] = entry[1].widened(duration)

        if changed:
            self.events_since_last_change = 0
        else:
            was_converged = self.has_converged()
            self.events_since_last_change += 1
            if not was_converged and self.has_converged():
                logger.info(
                    f"Learner converged after {self.events_ingested + 1} events "
                    f"({self.state_count} states, {self.transition_count} transitions)"
                )

        self.current = target
        self.last_transition_timestamp = record.timestamp
        self.events_ingested += 1
        return self

    def has_converged(self) -> bool:
        return self.events_since_last_change >= self.convergence_window

    @property
    def automaton(self) -> TimedAutomaton:
        """Snapshot of the automaton learned so far"""
        transitions = tuple(
            Transition(source, event, target, timing)
            for (source, event), (target, timing) in self._transitions.items()
        )
        return TimedAutomaton(self.signal_ordering, dict(self._states), self.initial, transitions)

    def metadata(self) -> dict:
        return {
            'converged': self.has_converged(),
            'convergence_window': self.convergence_window,
            'window_rule': self.window_rule,
            'events_ingested': self.events_ingested,
            'events_since_last_change': self.events_since_last_change,
        }

    def finalize(self) -> TimedAutomaton:
        """
        Return the learned automaton after verifying its invariants

        Raises:
            AutomatonIntegrityError: (or a subclass) if learning produced an invalid model
        """
        snapshot = self.automaton.check_integrity()
        automaton = TimedAutomaton(
            snapshot.signal_ordering,
            snapshot.states,
            snapshot.initial,
            snapshot.transitions,
            self.metadata(),
        )
        if not self.has_converged():
            logger.warning(
                f"Learning ended before convergence: {self.events_since_last_change} stable events, "
                f"window {self.convergence_window}"
            )
        return automaton


def new_session(initial_vector: StateVector, convergence_window: Optional[int] = None) -> LearnerSession:
    return LearnerSession(initial_vector, convergence_window)


def learn(records: Iterable[EventRecord], initial: StateVector,
          convergence_window: Optional[int] = None) -> TimedAutomaton:
    """Run a whole event log through a fresh session and finalize it"""
    session = new_session(initial, convergence_window)
    for record in records:
        session.ingest(record)
    return session.finalize()


class LearnerAgent:
    """Learns automata from raw sample logs with fixed coalescing settings"""

    def __init__(self, cycle_ms: int = DEFAULT_CYCLE_MS, convergence_window: Optional[int] = None):
        self.cycle_ms = cycle_ms
        self.convergence_window = convergence_window

    def coalesce(self, samples: Iterable[RawSample], initial: StateVector) -> list[EventRecord]:
        return coalesce_samples(samples, initial, self.cycle_ms)

    def learn_records(self, records: list[EventRecord], initial: StateVector) -> TimedAutomaton:
        logger.info(f"Learning from {len(records)} events over {len(initial)} signals")
        automaton = learn(records, initial, self.convergence_window)
        logger.info(f"Learned {len(automaton.states)} states and {len(automaton.transitions)} transitions")
        return automaton

    def learn_samples(self, samples: Iterable[RawSample], initial: StateVector) -> TimedAutomaton:
        return self.learn_records(self.coalesce(samples, initial), initial)
