import pytest

from agents.simulator_agent import (
    FaultKind,
    FaultSpec,
    FiveTankSimulator,
    InvalidFaultPhase,
    InvalidPlantConfig,
    PhaseSpec,
    PlantConfig,
    default_config,
    reference_clogging,
    reference_leakage,
    simulate,
)
from models.events import coalesce_samples, replay_events
from utils.validators import ValidationError


class TestPlantConfig:
    def test_defaults(self, plant_config):
        assert len(plant_config.actuators) == 9
        assert plant_config.phases[1].max_ms == 121800
        assert plant_config.startup_ms == 5000

    def test_round_trip(self, plant_config):
        assert PlantConfig.from_dict(plant_config.to_dict()) == plant_config

    def test_partial_document_uses_defaults(self):
        config = PlantConfig.from_dict({'cycles': 3, 'seed': 11})
        assert config.cycles == 3
        assert config.phases == default_config().phases

    def test_document_must_be_an_object(self):
        with pytest.raises(InvalidPlantConfig):
            PlantConfig.from_dict([3, 11])

    def test_wrong_phase_count(self, plant_config):
        with pytest.raises(InvalidPlantConfig):
            PlantConfig(plant_config.actuators, plant_config.phases[:5])

    def test_repeated_pattern(self, plant_config):
        phases = list(plant_config.phases)
        phases[5] = PhaseSpec(phases[4].open_actuators, 30000, 32000, 31000)
        with pytest.raises(InvalidPlantConfig):
            PlantConfig(plant_config.actuators, tuple(phases))

    def test_off_grid_range(self, plant_config):
        phases = list(plant_config.phases)
        phases[0] = PhaseSpec(phases[0].open_actuators, 43050, 47000, 45000)
        with pytest.raises(InvalidPlantConfig):
            PlantConfig(plant_config.actuators, tuple(phases))

    def test_nominal_outside_range(self, plant_config):
        phases = list(plant_config.phases)
        phases[2] = PhaseSpec(phases[2].open_actuators, 58000, 62000, 70000)
        with pytest.raises(InvalidPlantConfig):
            PlantConfig(plant_config.actuators, tuple(phases))

    def test_unknown_actuator(self, plant_config):
        phases = list(plant_config.phases)
        phases[3] = PhaseSpec(('ValveV999',), 30000, 32000, 31000)
        with pytest.raises(InvalidPlantConfig):
            PlantConfig(plant_config.actuators, tuple(phases))


class TestFaultSpec:
    def test_parse(self):
        fault = FaultSpec.parse('clogging:1:0:5200')
        assert fault == reference_clogging()
        assert fault.delay_ms == 5200 and fault.early_ms == 0

    def test_parse_with_duration(self):
        fault = FaultSpec.parse('LEAKAGE:2:3:4000:2')
        assert fault.kind is FaultKind.LEAKAGE
        assert fault.active(4, 2)
        assert not fault.active(5, 2)
        assert not fault.active(3, 1)

    @pytest.mark.parametrize('text', ['clogging:1:0', 'melting:1:0:100', 'clogging:x:0:100', 'clogging:1:0:0'])
    def test_parse_rejects(self, text):
        with pytest.raises(ValidationError):
            FaultSpec.parse(text)

    def test_phase_out_of_range(self, plant_config):
        with pytest.raises(InvalidFaultPhase):
            FiveTankSimulator(plant_config, [FaultSpec(FaultKind.CLOGGING, 6, 0, 1000)])

    def test_leakage_cannot_empty_phase(self, plant_config):
        with pytest.raises(ValidationError):
            FiveTankSimulator(plant_config, [FaultSpec(FaultKind.LEAKAGE, 3, 0, 30000)])

    def test_stacked_leakages_cannot_reverse_time(self):
        """Two leakages that each fit can still empty a phase together"""
        faults = [FaultSpec.parse('leakage:3:0:20000'), FaultSpec.parse('leakage:3:0:20000')]
        with pytest.raises(InvalidFaultPhase):
            simulate(default_config(cycles=3), faults)

    def test_stacked_faults_that_fit(self, plant_config, initial_vector):
        faults = [FaultSpec.parse('leakage:3:2:10000'), FaultSpec.parse('leakage:3:2:10000'),
                  FaultSpec.parse('clogging:3:2:5000')]
        result = simulate(plant_config, faults)
        entry = result.ground_truth['phases'][2 * 6 + 3]
        assert entry['actual_ms'] == entry['base_ms'] - 15000
        assert entry['actual_ms'] > 0
        coalesce_samples(result.samples, initial_vector)

    def test_onset_past_last_cycle(self, plant_config):
        with pytest.raises(InvalidFaultPhase):
            FiveTankSimulator(plant_config, [FaultSpec(FaultKind.CLOGGING, 1, plant_config.cycles, 1000)])

    def test_magnitude_on_grid(self, plant_config):
        with pytest.raises(ValidationError):
            FiveTankSimulator(plant_config, [FaultSpec(FaultKind.CLOGGING, 1, 0, 150)])


class TestSimulate:
    def test_zero_cycles_only_snapshot(self, plant_config):
        result = simulate(plant_config.with_run(cycles=0))
        assert {s.timestamp for s in result.samples} == {0}
        assert len(result.samples) == 9
        assert result.ground_truth['phases'] == []
        assert coalesce_samples(result.samples, plant_config.initial_vector()) == []

    def test_visits_seven_vectors(self, normal_run, initial_vector):
        records = coalesce_samples(normal_run.samples, initial_vector)
        vectors = {initial_vector}
        vector = initial_vector
        for record in records:
            vector = replay_events(vector, [record])
            vectors.add(vector)
        assert len(vectors) == 7

    def test_run_ends_back_in_fill_phase(self, normal_run, initial_vector, plant_config):
        records = coalesce_samples(normal_run.samples, initial_vector)
        assert replay_events(initial_vector, records) == plant_config.phase_vector(0)

    def test_deterministic(self, plant_config, normal_run):
        again = simulate(plant_config)
        assert again.samples == normal_run.samples
        assert again.ground_truth == normal_run.ground_truth

    def test_seed_changes_durations(self, plant_config, normal_run):
        other = simulate(plant_config.with_run(seed=8))
        durations = [p['actual_ms'] for p in normal_run.ground_truth['phases']]
        assert [p['actual_ms'] for p in other.ground_truth['phases']] != durations

    def test_anchored_cycles(self, normal_run, plant_config):
        phases = normal_run.ground_truth['phases']
        for entry in phases[:6]:
            assert entry['actual_ms'] == plant_config.phases[entry['phase']].max_ms
        for entry in phases[6:12]:
            assert entry['actual_ms'] == plant_config.phases[entry['phase']].min_ms

    def test_durations_stay_in_range(self, normal_run, plant_config):
        for entry in normal_run.ground_truth['phases']:
            phase = plant_config.phases[entry['phase']]
            assert phase.min_ms <= entry['actual_ms'] <= phase.max_ms
            assert entry['actual_ms'] % plant_config.sample_period_ms == 0

    def test_ground_truth_matches_event_times(self, normal_run, initial_vector, plant_config):
        """Each phase ends exactly when the next actuator pattern switches in"""
        records = coalesce_samples(normal_run.samples, initial_vector)
        now = plant_config.startup_ms
        assert records[0].timestamp == now
        for entry, record in zip(normal_run.ground_truth['phases'], records[1:]):
            now += entry['actual_ms']
            assert record.timestamp == now
            assert entry['state'] == f"q{entry['phase'] + 1}"

    def test_clogging_lengthens_first_transfer(self, clogged_run, normal_run):
        clogged = clogged_run.ground_truth['phases']
        normal = normal_run.ground_truth['phases']
        assert clogged[1]['actual_ms'] == 127000
        assert clogged[1]['base_ms'] == normal[1]['actual_ms'] == 121800
        assert clogged[1]['fault'] == 'clogging'
        # the fault does not shift later draws
        assert [p['actual_ms'] for p in clogged[2:]] == [p['actual_ms'] for p in normal[2:]]

    def test_leakage_shortens_discharge(self, plant_config):
        result = simulate(plant_config, [reference_leakage()])
        entry = result.ground_truth['phases'][2]
        assert entry['actual_ms'] == 62000 - 4000
        assert result.ground_truth['faults'][0]['kind'] == 'leakage'
