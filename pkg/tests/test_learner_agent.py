import logging
import random

import pytest

from agents.learner_agent import LearnerAgent, LearnerSession, learn, new_session
from models.automaton import (
    AutomatonIntegrityError,
    InconsistentTransition,
    NondeterministicTransition,
    TimedAutomaton,
    TimingInterval,
    Transition,
    UnreachableState,
)
from models.events import (
    Event,
    EventRecord,
    InconsistentOldValue,
    NonMonotonicTimestamps,
    SignalChange,
    StateVector,
    apply_event,
)
from utils.serialization import canonical_dumps
from utils.validators import ValidationError


def flip(signal, old, new):
    return Event((SignalChange(signal, old, new),))


def random_log(rng, signals=('io1', 'io2', 'io3')):
    """Random multi-signal toggles with strictly increasing timestamps"""
    vector = StateVector.zeros(signals)
    records = []
    now = 0
    for _ in range(rng.randint(0, 60)):
        flipped = rng.sample(signals, rng.randint(1, len(signals)))
        event = Event.from_new_values(vector, {s: 1 - vector[s] for s in flipped})
        now += rng.randint(1, 500)
        records.append(EventRecord(event, now))
        vector = apply_event(vector, event)
    return records


class TestLearnerSession:
    def test_first_transition(self):
        """One event creates q1 and a single-observation transition"""
        session = new_session(StateVector.zeros(['io1', 'io2']))
        session.ingest(EventRecord(flip('io1', 0, 1), 100))

        automaton = session.automaton
        assert automaton.states[1].values == (1, 0)
        (transition,) = automaton.transitions
        assert (transition.source, transition.target) == (0, 1)
        assert transition.timing == TimingInterval(100, 100, 1)
        assert session.current == 1
        assert session.last_transition_timestamp == 100

    def test_repeated_transition_widens_interval(self):
        session = new_session(StateVector.zeros(['io1']))
        for t, (old, new) in zip([100, 300, 450, 750], [(0, 1), (1, 0), (0, 1), (1, 0)]):
            session.ingest(EventRecord(flip('io1', old, new), t))

        automaton = session.automaton
        assert session.state_count == 2
        assert session.transition_count == 2
        up = automaton.transition_for(0, flip('io1', 0, 1))
        down = automaton.transition_for(1, flip('io1', 1, 0))
        assert up.timing == TimingInterval(100, 150, 2)
        assert down.timing == TimingInterval(200, 300, 2)

    def test_state_vectors_are_unique(self):
        session = new_session(StateVector.zeros(['io1', 'io2']))
        session.ingest(EventRecord(flip('io1', 0, 1), 10))
        session.ingest(EventRecord(flip('io2', 0, 1), 20))
        session.ingest(EventRecord(flip('io1', 1, 0), 30))
        session.ingest(EventRecord(flip('io2', 1, 0), 40))
        vectors = list(session.automaton.states.values())
        assert len(vectors) == len(set(vectors)) == 4

    def test_equal_timestamp_rejected(self):
        session = new_session(StateVector.zeros(['io1']))
        session.ingest(EventRecord(flip('io1', 0, 1), 100))
        with pytest.raises(NonMonotonicTimestamps):
            session.ingest(EventRecord(flip('io1', 1, 0), 100))

    def test_inconsistent_event_rejected(self):
        session = new_session(StateVector.zeros(['io1']))
        with pytest.raises(InconsistentOldValue):
            session.ingest(EventRecord(flip('io1', 1, 0), 100))

    def test_fixed_window(self):
        """Convergence needs `window` consecutive events without structural change"""
        session = LearnerSession(StateVector.zeros(['io1']), convergence_window=3)
        events = [flip('io1', 0, 1), flip('io1', 1, 0)]
        for i in range(4):
            session.ingest(EventRecord(events[i % 2], (i + 1) * 10))
        assert not session.has_converged()
        session.ingest(EventRecord(events[0], 50))
        assert session.has_converged()
        assert session.window_rule == 'fixed'

    def test_non_positive_window_rejected(self):
        with pytest.raises(ValidationError):
            LearnerSession(StateVector.zeros(['io1']), convergence_window=0)

    def test_dynamic_window_rule(self):
        session = new_session(StateVector.zeros(['io1']))
        assert session.convergence_window == 50
        assert session.window_rule == 'max(50, 3*|T|)'

    def test_empty_log_gives_single_state(self, caplog):
        with caplog.at_level(logging.WARNING):
            automaton = learn([], StateVector.zeros(['io1', 'io2']))
        assert list(automaton.states) == [0]
        assert automaton.transitions == ()
        assert automaton.metadata['converged'] is False
        assert 'before convergence' in caplog.text


class TestLearningProperties:
    def test_intervals_only_widen(self):
        """Every interval learned on a prefix is covered by the one learned on its extension"""
        rng = random.Random(31)
        for _ in range(30):
            records = random_log(rng)
            session = new_session(StateVector.zeros(['io1', 'io2', 'io3']))
            before = session.automaton
            for record in records:
                session.ingest(record)
                after = session.automaton
                for transition in before.transitions:
                    extended = after.transition_for(transition.source, transition.event)
                    assert extended.target == transition.target
                    assert extended.timing.covers(transition.timing)
                assert set(before.states.items()) <= set(after.states.items())
                before = after

    def test_state_count_bounded_by_distinct_vectors(self):
        rng = random.Random(32)
        for _ in range(30):
            initial = StateVector.zeros(['io1', 'io2', 'io3'])
            records = random_log(rng)
            visited = {initial}
            vector = initial
            for record in records:
                vector = apply_event(vector, record.event)
                visited.add(vector)

            automaton = learn(records, initial)
            assert len(automaton.states) <= len(visited) + 1
            assert set(automaton.states.values()) == visited

    def test_training_durations_inside_intervals(self):
        rng = random.Random(33)
        for _ in range(30):
            initial = StateVector.zeros(['io1', 'io2', 'io3'])
            records = random_log(rng)
            automaton = learn(records, initial)
            state, entered = automaton.initial, 0
            for record in records:
                transition = automaton.transition_for(state, record.event)
                assert transition.timing.contains(record.timestamp - entered)
                state, entered = transition.target, record.timestamp


class TestFiveTankLearning:
    def test_seven_states_seven_transitions(self, learned):
        """Normal operation gives the startup state plus one state per phase"""
        assert len(learned.states) == 7
        assert len(learned.transitions) == 7
        edges = sorted((t.source, t.target) for t in learned.transitions)
        assert edges == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1)]

    def test_startup_transition(self, learned, plant_config):
        (startup,) = learned.outgoing(0)
        assert startup.timing.min_ms == startup.timing.max_ms == plant_config.startup_ms
        assert learned.vector(1) == plant_config.phase_vector(0)

    def test_q2_opens_transfer_line(self, learned):
        opened = {s for s, v in learned.vector(2).as_dict().items() if v}
        assert opened == {'ValveV204', 'PumpP201'}

    def test_converged(self, learned):
        assert learned.metadata['converged'] is True
        assert learned.metadata['convergence_window'] == 50
        assert learned.metadata['events_ingested'] == 121

    def test_timing_extrema_match_ground_truth(self, learned, normal_run):
        """Each learned interval spans exactly the simulated phase durations"""
        phases = normal_run.ground_truth['phases']
        for index in range(6):
            durations = [p['actual_ms'] for p in phases if p['phase'] == index]
            source = index + 1
            (transition,) = learned.outgoing(source)
            assert transition.timing.min_ms == min(durations)
            assert transition.timing.max_ms == max(durations)
            assert transition.timing.observation_count == len(durations)

    def test_anchored_extremes_are_the_configured_ranges(self, learned, plant_config):
        for index, phase in enumerate(plant_config.phases):
            (transition,) = learned.outgoing(index + 1)
            assert (transition.timing.min_ms, transition.timing.max_ms) == (phase.min_ms, phase.max_ms)

    def test_learning_is_deterministic(self, normal_records, initial_vector, learned):
        again = learn(normal_records, initial_vector)
        assert again == learned
        assert canonical_dumps(again.to_dict()) == canonical_dumps(learned.to_dict())

    def test_agent_learns_from_samples(self, normal_run, initial_vector, learned):
        agent = LearnerAgent(cycle_ms=100)
        assert agent.learn_samples(normal_run.samples, initial_vector) == learned


class TestAutomatonDocument:
    def test_json_round_trip(self, learned):
        restored = TimedAutomaton.from_dict(learned.to_dict())
        assert restored == learned
        assert restored.metadata['converged'] is True

    def test_unknown_source_rejected(self, learned):
        data = learned.to_dict()
        data['transitions'][0]['source'] = 42
        with pytest.raises(AutomatonIntegrityError):
            TimedAutomaton.from_dict(data)

    def test_malformed_document(self):
        with pytest.raises(ValidationError):
            TimedAutomaton.from_dict({'signal_ordering': ['io1']})

    def test_states_must_be_an_object(self, learned):
        data = learned.to_dict()
        data['states'] = list(data['states'].values())
        with pytest.raises(ValidationError):
            TimedAutomaton.from_dict(data)


class TestIntegrity:
    def setup_method(self):
        self.ordering = ('io1', 'io2')
        self.states = {
            0: StateVector(self.ordering, (0, 0)),
            1: StateVector(self.ordering, (1, 0)),
            2: StateVector(self.ordering, (1, 1)),
        }

    def test_unreachable_state(self):
        transitions = (Transition(0, flip('io1', 0, 1), 1, TimingInterval.single(5)),)
        with pytest.raises(UnreachableState):
            TimedAutomaton(self.ordering, self.states, 0, transitions).check_integrity()

    def test_inconsistent_transition(self):
        transitions = (
            Transition(0, flip('io1', 0, 1), 2, TimingInterval.single(5)),
            Transition(0, flip('io2', 0, 1), 1, TimingInterval.single(5)),
        )
        with pytest.raises(InconsistentTransition):
            TimedAutomaton(self.ordering, self.states, 0, transitions).check_integrity()

    def test_nondeterministic_transition(self):
        transitions = (
            Transition(0, flip('io1', 0, 1), 1, TimingInterval.single(5)),
            Transition(0, flip('io1', 0, 1), 1, TimingInterval.single(9)),
            Transition(1, flip('io2', 0, 1), 2, TimingInterval.single(5)),
        )
        with pytest.raises(NondeterministicTransition):
            TimedAutomaton(self.ordering, self.states, 0, transitions).check_integrity()

    def test_empty_interval_rejected(self):
        with pytest.raises(ValidationError):
            TimingInterval(10, 5)

    def test_closed_interval(self):
        interval = TimingInterval(100, 200, 2)
        assert interval.contains(100)
        assert interval.contains(200)
        assert not interval.contains(99)
        assert not interval.contains(201)
