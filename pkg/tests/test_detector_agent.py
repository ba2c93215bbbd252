import random

import pytest

from agents.detector_agent import (
    DetectorAgent,
    DetectorHalted,
    DetectorStatus,
    ResyncPolicy,
    UnknownStartState,
    group_syndromes,
    reports_from_rows,
    run,
    start,
)
from agents.learner_agent import learn
from agents.simulator_agent import FaultSpec, PhaseSpec, PlantConfig, default_config, simulate
from models.anomaly import AnomalyKind, AnomalyReport, Resolution, ViolatedBound
from models.automaton import TimedAutomaton, TimingInterval, Transition
from models.events import (
    Event,
    EventRecord,
    NonMonotonicTimestamps,
    SignalChange,
    StateVector,
    apply_event,
    coalesce_samples,
    replay_events,
)
from utils.serialization import dumps_jsonl, loads_jsonl
from utils.validators import ValidationError


def flip(signal, old, new):
    return Event((SignalChange(signal, old, new),))


def toggle_automaton():
    """q0 -(io1 up, 100..200)-> q1 -(io1 down, 50..80)-> q0"""
    ordering = ('io1', 'io2')
    states = {0: StateVector(ordering, (0, 0)), 1: StateVector(ordering, (1, 0))}
    transitions = (
        Transition(0, flip('io1', 0, 1), 1, TimingInterval(100, 200, 2)),
        Transition(1, flip('io1', 1, 0), 0, TimingInterval(50, 80, 2)),
    )
    return TimedAutomaton(ordering, states, 0, transitions).check_integrity()


def timing_report(at, duration=300):
    return AnomalyReport(
        kind=AnomalyKind.WRONG_TIMING,
        at=at,
        source_state=0,
        target_state=1,
        observed_event=flip('io1', 0, 1),
        resolution=Resolution.ADVANCED,
        observed_duration_ms=duration,
        violated_bound=ViolatedBound.ABOVE_MAX,
        reference=TimingInterval(100, 200, 2),
        deviation_ms=duration - 200,
    )


def stretch_gap(automaton, records, index, beyond_ms=100):
    """Delay records[index:] so the dwell before records[index] runs past its learned maximum"""
    state = automaton.state_for_vector(replay_events(automaton.vector(automaton.initial), records[:index]))
    transition = automaton.transition_for(state, records[index].event)
    entered = records[index - 1].timestamp if index else 0
    shift = transition.timing.max_ms + beyond_ms - (records[index].timestamp - entered)
    return records[:index] + [EventRecord(r.event, r.timestamp + shift) for r in records[index:]]


class TestStep:
    def test_ok_step_advances(self):
        detector = start(toggle_automaton(), 0)
        outcome = detector.step(EventRecord(flip('io1', 0, 1), 150))
        assert not outcome.is_anomaly
        assert outcome.state == 1
        assert detector.entered_at == 150

    def test_bounds_are_inclusive(self):
        detector = start(toggle_automaton(), 0)
        assert not detector.step(EventRecord(flip('io1', 0, 1), 200)).is_anomaly
        assert not detector.step(EventRecord(flip('io1', 1, 0), 250)).is_anomaly

    def test_too_early_is_below_min(self):
        detector = start(toggle_automaton(), 0)
        outcome = detector.step(EventRecord(flip('io1', 0, 1), 40))
        report = outcome.report
        assert report.kind is AnomalyKind.WRONG_TIMING
        assert report.violated_bound is ViolatedBound.BELOW_MIN
        assert report.deviation_ms == 60
        assert report.resolution is Resolution.ADVANCED
        assert outcome.state == 1

    def test_unknown_event_lists_expected_transitions(self):
        """An unmatched event reports what the current state allows"""
        automaton = toggle_automaton()
        detector = start(automaton, 0)
        outcome = detector.step(EventRecord(flip('io2', 0, 1), 120))
        report = outcome.report

        assert report.kind is AnomalyKind.UNKNOWN_EVENT
        assert [e.event for e in report.expected_events] == [flip('io1', 0, 1)]
        assert report.expected_events[0].target == 1
        # (0,1) is not a learned vector
        assert report.resolution is Resolution.HALTED
        assert detector.status is DetectorStatus.HALTED

    def test_halt_policy(self):
        detector = start(toggle_automaton(), 1, ResyncPolicy.HALT)
        # io1 up in q1 is unknown; its old value contradicts q1 as well
        outcome = detector.step(EventRecord(flip('io1', 0, 1), 10))
        assert outcome.report.resolution is Resolution.HALTED
        assert outcome.state is None
        with pytest.raises(DetectorHalted):
            detector.step(EventRecord(flip('io1', 1, 0), 20))

    def test_timestamp_before_entry(self):
        detector = start(toggle_automaton(), 0)
        detector.step(EventRecord(flip('io1', 0, 1), 150))
        with pytest.raises(NonMonotonicTimestamps):
            detector.step(EventRecord(flip('io1', 1, 0), 100))

    def test_unknown_start_state(self):
        with pytest.raises(UnknownStartState):
            start(toggle_automaton(), 5)


class TestRun:
    def test_empty_log(self):
        result = run(toggle_automaton(), 0, [])
        assert result.reports == []
        assert result.status is DetectorStatus.RUNNING
        assert result.final_state == 0

    def test_halt_counts_unprocessed(self):
        log = [
            EventRecord(flip('io1', 0, 1), 150),
            EventRecord(flip('io2', 0, 1), 170),
            EventRecord(flip('io1', 1, 0), 230),
        ]
        result = run(toggle_automaton(), 0, log, ResyncPolicy.HALT)
        assert result.status is DetectorStatus.HALTED
        assert result.processed == 2
        assert result.unprocessed == 1
        assert len(result.reports) == 1

    def test_resync_policy_continues(self, learned, normal_records):
        """An out-of-order event resyncs onto the state whose vector it produces"""
        records = list(normal_records[:3])
        # jump from q3 straight to the q5 pattern
        q3, q5 = learned.vector(3), learned.vector(5)
        jump = Event.from_new_values(q3, {s: v for s, v in q5.as_dict().items() if q3[s] != v})
        records.append(EventRecord(jump, records[-1].timestamp + 1000))

        result = run(learned, learned.initial, records, ResyncPolicy.RESYNC)
        (report,) = result.reports
        assert report.kind is AnomalyKind.UNKNOWN_EVENT
        assert report.resolution is Resolution.RESYNCED
        assert report.target_state == 5
        assert result.final_state == 5
        assert result.status is DetectorStatus.RUNNING


class TestFiveTankDetection:
    def test_reference_clogging(self, clogging_result):
        """A transfer phase of 127 s against a learned maximum of 121.8 s"""
        (report,) = clogging_result.reports
        assert report.kind is AnomalyKind.WRONG_TIMING
        assert (report.source_state, report.target_state) == (2, 3)
        assert report.observed_duration_ms == 127000
        assert report.reference.max_ms == 121800
        assert report.violated_bound is ViolatedBound.ABOVE_MAX
        assert report.deviation_ms == 5200
        assert report.transition_label == 'q2->q3'

    def test_training_log_replays_clean(self, learned, normal_records):
        result = run(learned, learned.initial, normal_records)
        assert result.reports == []
        assert result.processed == len(normal_records)

    def test_start_mid_cycle(self, learned, normal_records):
        """Detection can start in q2 on a log sliced at a phase boundary"""
        entry = normal_records[1].timestamp
        sliced = [EventRecord(r.event, r.timestamp - entry) for r in normal_records[2:]]
        result = run(learned, 2, sliced)
        assert result.reports == []

    def test_training_replay_random_configs(self):
        """Replaying the training log against its own automaton never reports"""
        rng = random.Random(2024)
        base = default_config()
        for _ in range(25):
            phases = []
            for spec in base.phases:
                low = rng.randint(10, 600) * 100
                high = low + rng.randint(0, 50) * 100
                phases.append(PhaseSpec(spec.open_actuators, low, high, low))
            config = PlantConfig(
                base.actuators, tuple(phases),
                cycles=rng.randint(1, 8), seed=rng.randint(0, 10000),
                anchor_extremes=rng.random() < 0.5,
            )
            initial = config.initial_vector()
            records = coalesce_samples(simulate(config).samples, initial)
            automaton = learn(records, initial)
            assert run(automaton, automaton.initial, records).reports == []

    def test_one_stretched_gap_adds_one_report(self, learned, normal_records, clogged_records):
        rng = random.Random(5)
        for records in (normal_records, clogged_records):
            baseline = run(learned, learned.initial, records).reports
            flagged = {report.at for report in baseline}
            candidates = [i for i, r in enumerate(records) if r.timestamp not in flagged]
            for index in rng.sample(candidates, 10):
                result = run(learned, learned.initial, stretch_gap(learned, records, index))
                assert len(result.reports) == len(baseline) + 1
                assert all(r.kind is AnomalyKind.WRONG_TIMING for r in result.reports)
                assert result.status is DetectorStatus.RUNNING

    def test_tracked_vector_is_the_fold_of_events(self, learned, normal_records, clogged_records):
        for records in (normal_records, clogged_records):
            detector = start(learned, learned.initial)
            vector = learned.vector(learned.initial)
            for record in records:
                outcome = detector.step(record)
                vector = apply_event(vector, record.event)
                assert learned.vector(outcome.state) == vector

    def test_two_faults_form_one_syndrome(self, learned, plant_config, initial_vector):
        faults = [FaultSpec.parse('clogging:1:2:5200'), FaultSpec.parse('leakage:2:2:5000')]
        records = coalesce_samples(simulate(plant_config, faults).samples, initial_vector)

        result, syndromes = DetectorAgent(learned, syndrome_window_ms=300000).detect(records)

        assert [r.violated_bound for r in result.reports] == [ViolatedBound.ABOVE_MAX, ViolatedBound.BELOW_MIN]
        assert len(syndromes) == 1
        assert len(syndromes[0]) == 2


class TestSyndromes:
    def test_grouping_example(self):
        reports = [timing_report(0), timing_report(1000), timing_report(100000)]
        groups = group_syndromes(reports, 5000)
        assert [len(g) for g in groups] == [2, 1]
        assert [g.index for g in groups] == [0, 1]
        assert groups[0].first_at == 0 and groups[0].last_at == 1000

    def test_gap_equal_to_window_joins(self):
        groups = group_syndromes([timing_report(0), timing_report(5000)], 5000)
        assert len(groups) == 1

    def test_invalid_window(self):
        with pytest.raises(ValidationError):
            group_syndromes([], 0)

    def test_report_rows_round_trip(self):
        reports = [timing_report(0), timing_report(1000), timing_report(100000)]
        syndromes = group_syndromes(reports, 5000)
        rows = loads_jsonl(dumps_jsonl(DetectorAgent.report_rows(reports, syndromes)))
        assert [row['syndrome'] for row in rows] == [0, 0, 1]

        decoded, rebuilt = reports_from_rows(rows)
        assert decoded == reports
        assert [len(s) for s in rebuilt] == [2, 1]

    def test_reference_must_be_an_object(self, clogging_result):
        row = clogging_result.reports[0].to_dict()
        row['reference'] = '121.8'
        with pytest.raises(ValidationError):
            reports_from_rows([row])

    def test_report_rejects_wrong_deviation(self):
        with pytest.raises(ValidationError):
            AnomalyReport(
                kind=AnomalyKind.WRONG_TIMING, at=0, source_state=0, target_state=1,
                observed_event=flip('io1', 0, 1), resolution=Resolution.ADVANCED,
                observed_duration_ms=300, violated_bound=ViolatedBound.ABOVE_MAX,
                reference=TimingInterval(100, 200), deviation_ms=99,
            )
