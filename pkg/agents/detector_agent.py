"""
Replay of unseen event streams against a learned timed automaton.

Every observation is classified as OK, a timing violation of a known
transition, or an event the current state does not allow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from models.anomaly import (
    AnomalyKind,
    AnomalyReport,
    ExpectedEvent,
    Resolution,
    Syndrome,
    ViolatedBound,
)
from models.automaton import StateId, TimedAutomaton, state_label
from models.events import EventRecord, NonMonotonicTimestamps, apply_event
from utils.errors import PipelineError
from utils.validators import ValidationError

logger = logging.getLogger(__name__)


class UnknownStartState(PipelineError):
    """Raised when detection starts in a state the automaton does not have"""
    pass


class DetectorHalted(PipelineError):
    """Raised when a halted detector is stepped again"""
    pass


class ResyncPolicy(str, Enum):
    HALT = 'halt'
    RESYNC = 'resync'


class DetectorStatus(str, Enum):
    RUNNING = 'running'
    HALTED = 'halted'


@dataclass(frozen=True)
class StepOutcome:
    state: Optional[StateId]
    report: Optional[AnomalyReport] = None

    @property
    def is_anomaly(self) -> bool:
        return self.report is not None


@dataclass
class RunResult:
    reports: list[AnomalyReport] = field(default_factory=list)
    status: DetectorStatus = DetectorStatus.RUNNING
    final_state: Optional[StateId] = None
    processed: int = 0
    unprocessed: int = 0


class DetectorState:
    """Position of one monitored stream inside the automaton"""

    def __init__(self, automaton: TimedAutomaton, start_state: StateId,
                 policy: ResyncPolicy = ResyncPolicy.RESYNC):
        if start_state not in automaton.states:
            raise UnknownStartState(f"{state_label(start_state)} is not a state of the automaton")
        self.automaton = automaton
        self.current = start_state
        self.entered_at = 0
        self.policy = ResyncPolicy(policy)
        self.status = DetectorStatus.RUNNING

    @property
    def halted(self) -> bool:
        return self.status is DetectorStatus.HALTED

    def step(self, record: EventRecord) -> StepOutcome:
        """
        Classify one observation and move the detector

        Raises:
            DetectorHalted: If the detector already stopped
            NonMonotonicTimestamps: If the record predates the current state's entry
        """
        if self.halted:
            raise DetectorHalted(f"Detector halted, cannot process event at t={record.timestamp}")
        if record.timestamp < self.entered_at:
            raise NonMonotonicTimestamps(
                f"Event at t={record.timestamp} precedes state entry at t={self.entered_at}"
            )

        source = self.current
        duration = record.timestamp - self.entered_at
        transition = self.automaton.transition_for(source, record.event)

        if transition is not None:
            self.current = transition.target
            self.entered_at = record.timestamp
            if transition.timing.contains(duration):
                return StepOutcome(self.current)

            if duration < transition.timing.min_ms:
                bound, deviation = ViolatedBound.BELOW_MIN, transition.timing.min_ms - duration
            else:
                bound, deviation = ViolatedBound.ABOVE_MAX, duration - transition.timing.max_ms
            report = AnomalyReport(
                kind=AnomalyKind.WRONG_TIMING,
                at=record.timestamp,
                source_state=source,
                target_state=transition.target,
                observed_event=record.event,
                resolution=Resolution.ADVANCED,
                observed_duration_ms=duration,
                violated_bound=bound,
                reference=transition.timing,
                deviation_ms=deviation,
            )
            logger.warning(
                f"WrongTiming at t={record.timestamp}: {report.transition_label} took {duration} ms, "
                f"{bound.value} of [{transition.timing.min_ms}, {transition.timing.max_ms}] by {deviation} ms"
            )
            return StepOutcome(self.current, report)

        expected = tuple(ExpectedEvent(t.event, t.target, t.timing) for t in self.automaton.outgoing(source))
        target = self._resync(record) if self.policy is ResyncPolicy.RESYNC else None
        if target is None:
            self.status = DetectorStatus.HALTED
            resolution = Resolution.HALTED
        else:
            self.current = target
            self.entered_at = record.timestamp
            resolution = Resolution.RESYNCED

        report = AnomalyReport(
            kind=AnomalyKind.UNKNOWN_EVENT,
            at=record.timestamp,
            source_state=source,
            target_state=target,
            observed_event=record.event,
            resolution=resolution,
            expected_events=expected,
        )
        logger.warning(
            f"UnknownEvent at t={record.timestamp} in {state_label(source)}: "
            f"{record.event.describe()} ({resolution.value})"
        )
        return StepOutcome(None if self.halted else self.current, report)

    def _resync(self, record: EventRecord) -> Optional[StateId]:
        try:
            vector = apply_event(self.automaton.vector(self.current), record.event)
        except PipelineError as e:
            logger.debug(f"Resync failed: {e}")
            return None
        return self.automaton.state_for_vector(vector)


def start(automaton: TimedAutomaton, start_state: StateId,
          policy: ResyncPolicy = ResyncPolicy.RESYNC) -> DetectorState:
    return DetectorState(automaton, start_state, policy)


def run(automaton: TimedAutomaton, start_state: StateId, log: Iterable[EventRecord],
        policy: ResyncPolicy = ResyncPolicy.RESYNC) -> RunResult:
    """
    Fold `step` over a whole log

    A halt is reported through the result status; the remaining records are
    counted as unprocessed.
    """
    detector = start(automaton, start_state, policy)
    result = RunResult(final_state=start_state)
    records = list(log)
    for index, record in enumerate(records):
        outcome = detector.step(record)
        result.processed += 1
        if outcome.report is not None:
            result.reports.append(outcome.report)
        if detector.halted:
            result.unprocessed = len(records) - index - 1
            break
    result.status = detector.status
    result.final_state = detector.current
    logger.info(
        f"Detection finished ({result.status.value}): {len(result.reports)} anomalies "
        f"in {result.processed} events"
    )
    return result


def group_syndromes(reports: Iterable[AnomalyReport], window_ms: int) -> list[Syndrome]:
    """Split time-ordered reports into maximal runs whose gaps are at most `window_ms`"""
    if window_ms <= 0:
        raise ValidationError("Syndrome window must be positive")

    groups = []
    for report in reports:
        if groups and report.at - groups[-1][-1].at <= window_ms:
            groups[-1].append(report)
        else:
            groups.append([report])
    return [Syndrome(index, tuple(group), window_ms) for index, group in enumerate(groups)]


class DetectorAgent:
    """Runs detection with fixed policy and syndrome grouping"""

    def __init__(self, automaton: TimedAutomaton, policy: ResyncPolicy = ResyncPolicy.RESYNC,
                 syndrome_window_ms: int = 300000):
        self.automaton = automaton
        self.policy = ResyncPolicy(policy)
        self.syndrome_window_ms = syndrome_window_ms

    def detect(self, records: Iterable[EventRecord], start_state: Optional[StateId] = None
               ) -> tuple[RunResult, list[Syndrome]]:
        """Return the run result and its syndromes"""
        start_state = self.automaton.initial if start_state is None else start_state
        result = run(self.automaton, start_state, records, self.policy)
        syndromes = group_syndromes(result.reports, self.syndrome_window_ms)
        return result, syndromes

    @staticmethod
    def report_rows(reports: Iterable[AnomalyReport], syndromes: Iterable[Syndrome]) -> list[dict]:
        """Report dicts annotated with the index of their syndrome"""
        index = {}
        for syndrome in syndromes:
            for report in syndrome.reports:
                index[id(report)] = syndrome.index
        rows = []
        for report in reports:
            row = report.to_dict()
            row['syndrome'] = index.get(id(report))
            rows.append(row)
        return rows


def reports_from_rows(rows: Iterable[dict]) -> tuple[list[AnomalyReport], list[Syndrome]]:
    """
    Decode an anomaly JSONL document back into reports and syndromes

    Syndromes are rebuilt from the per-row ``syndrome`` index. The window of a
    rebuilt syndrome is its largest internal gap.
    """
    reports = []
    groups = {}
    for row in rows:
        report = AnomalyReport.from_dict(row)
        reports.append(report)
        if row.get('syndrome') is not None:
            groups.setdefault(int(row['syndrome']), []).append(report)

    syndromes = []
    for index in sorted(groups):
        members = groups[index]
        gaps = [later.at - earlier.at for earlier, later in zip(members, members[1:])]
        syndromes.append(Syndrome(index, tuple(members), max(gaps, default=0) or 1))
    return reports, syndromes
