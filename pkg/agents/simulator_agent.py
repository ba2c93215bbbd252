"""
Discrete-event surrogate of the five-tank mixing plant.

Only the nine actuators are simulated. A production cycle walks through six
phases, each with a fixed pattern of open valves / running pump:

    p0  fill the three input tanks          ValveV201..V203
    p1  transfer into Tank_B204             ValveV204 + PumpP201
    p2  discharge Tank_B204                 ValveDiscrete
    p3..p5  drain the mixing tank inlets    ValveIn1, ValveIn2, ValveIn3

Phase durations are drawn uniformly on the sample grid inside configured
ranges. Clogging lengthens a phase and leakage shortens it; neither fault
changes the sequence of actuator patterns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from models.events import RawSample, StateVector
from utils.errors import PipelineError
from utils.validators import ValidationError, validate_input

logger = logging.getLogger(__name__)

PHASE_COUNT = 6

DEFAULT_ACTUATORS = (
    'ValveIn1',
    'ValveIn2',
    'ValveIn3',
    'ValveV201',
    'ValveV202',
    'ValveV203',
    'ValveV204',
    'ValveDiscrete',
    'PumpP201',
)


class InvalidFaultPhase(PipelineError):
    """Raised when a fault targets a phase or cycle that does not exist"""
    pass


class InvalidPlantConfig(PipelineError):
    """Raised when a plant configuration is inconsistent"""
    pass


class FaultKind(str, Enum):
    CLOGGING = 'clogging'
    LEAKAGE = 'leakage'


@dataclass(frozen=True)
class PhaseSpec:
    open_actuators: tuple[str, ...]
    min_ms: int
    max_ms: int
    nominal_ms: int

    def to_dict(self) -> dict:
        return {
            'open': list(self.open_actuators),
            'min_ms': self.min_ms,
            'max_ms': self.max_ms,
            'nominal_ms': self.nominal_ms,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> PhaseSpec:
        return cls(
            tuple(validate_input('signal', s) for s in data['open']),
            validate_input('positive_int', data['min_ms'], field_name='min_ms'),
            validate_input('positive_int', data['max_ms'], field_name='max_ms'),
            validate_input('positive_int', data.get('nominal_ms', data['min_ms']), field_name='nominal_ms'),
        )


@dataclass(frozen=True)
class PlantConfig:
    actuators: tuple[str, ...]
    phases: tuple[PhaseSpec, ...]
    sample_period_ms: int = 100
    cycles: int = 20
    seed: int = 7
    startup_ms: int = 5000
    anchor_extremes: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'actuators', tuple(self.actuators))
        object.__setattr__(self, 'phases', tuple(self.phases))
        self.validate()

    def validate(self):
        """
        Check structural consistency

        Raises:
            InvalidPlantConfig: On the first inconsistency found
        """
        try:
            for actuator in self.actuators:
                validate_input('signal', actuator)
            validate_input('cycle_ms', self.sample_period_ms)
            validate_input('cycles', self.cycles)
            validate_input('seed', self.seed)
            validate_input('positive_int', self.startup_ms, field_name='startup_ms')
        except ValidationError as e:
            raise InvalidPlantConfig(str(e))

        if not self.actuators or len(set(self.actuators)) != len(self.actuators):
            raise InvalidPlantConfig("Actuator list must be non-empty and unique")
        if len(self.phases) != PHASE_COUNT:
            raise InvalidPlantConfig(f"Expected {PHASE_COUNT} phases, got {len(self.phases)}")
        if self.startup_ms % self.sample_period_ms:
            raise InvalidPlantConfig("startup_ms must be a multiple of the sample period")

        patterns = set()
        for index, phase in enumerate(self.phases):
            unknown = set(phase.open_actuators) - set(self.actuators)
            if unknown:
                raise InvalidPlantConfig(f"Phase {index} opens unknown actuators {sorted(unknown)}")
            if not phase.open_actuators:
                raise InvalidPlantConfig(f"Phase {index} must open at least one actuator")
            if not 0 < phase.min_ms <= phase.nominal_ms <= phase.max_ms:
                raise InvalidPlantConfig(
                    f"Phase {index} needs 0 < min <= nominal <= max, got "
                    f"{phase.min_ms}/{phase.nominal_ms}/{phase.max_ms}"
                )
            if phase.min_ms % self.sample_period_ms or phase.max_ms % self.sample_period_ms:
                raise InvalidPlantConfig(f"Phase {index} range is not on the {self.sample_period_ms} ms grid")
            pattern = frozenset(phase.open_actuators)
            if pattern in patterns:
                raise InvalidPlantConfig(f"Phase {index} repeats the pattern of an earlier phase")
            patterns.add(pattern)

    def phase_vector(self, index: int) -> StateVector:
        opened = set(self.phases[index].open_actuators)
        return StateVector(self.actuators, tuple(int(a in opened) for a in self.actuators))

    def initial_vector(self) -> StateVector:
        return StateVector.zeros(self.actuators)

    def with_run(self, cycles: int = None, seed: int = None) -> PlantConfig:
        """Copy with a different cycle count or seed"""
        return PlantConfig(
            self.actuators,
            self.phases,
            self.sample_period_ms,
            self.cycles if cycles is None else cycles,
            self.seed if seed is None else seed,
            self.startup_ms,
            self.anchor_extremes,
        )

    def to_dict(self) -> dict:
        return {
            'actuators': list(self.actuators),
            'phases': [phase.to_dict() for phase in self.phases],
            'sample_period_ms': self.sample_period_ms,
            'cycles': self.cycles,
            'seed': self.seed,
            'startup_ms': self.startup_ms,
            'anchor_extremes': self.anchor_extremes,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> PlantConfig:
        defaults = default_config()
        try:
            return cls(
                tuple(data.get('actuators', defaults.actuators)),
                tuple(PhaseSpec.from_dict(p) for p in data['phases']) if 'phases' in data else defaults.phases,
                int(data.get('sample_period_ms', defaults.sample_period_ms)),
                int(data.get('cycles', defaults.cycles)),
                int(data.get('seed', defaults.seed)),
                int(data.get('startup_ms', defaults.startup_ms)),
                bool(data.get('anchor_extremes', defaults.anchor_extremes)),
            )
        except (KeyError, TypeError, ValueError, AttributeError, ValidationError) as e:
            raise InvalidPlantConfig(f"Malformed plant configuration: {e}")


@dataclass(frozen=True)
class FaultSpec:
    """A timing fault on one phase, active for `duration_cycles` cycles from `onset_cycle`"""

    kind: FaultKind
    phase_index: int
    onset_cycle: int
    magnitude_ms: int
    duration_cycles: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'kind', FaultKind(self.kind))
        if self.magnitude_ms <= 0:
            raise ValidationError(f"Fault magnitude must be positive, got {self.magnitude_ms}")
        if self.duration_cycles < 1:
            raise ValidationError("Fault must last at least one cycle")
        if self.onset_cycle < 0:
            raise InvalidFaultPhase(f"Fault onset cycle {self.onset_cycle} is negative")

    @property
    def delay_ms(self) -> int:
        return self.magnitude_ms if self.kind is FaultKind.CLOGGING else 0

    @property
    def early_ms(self) -> int:
        return self.magnitude_ms if self.kind is FaultKind.LEAKAGE else 0

    def active(self, cycle: int, phase: int) -> bool:
        return phase == self.phase_index and self.onset_cycle <= cycle < self.onset_cycle + self.duration_cycles

    def effect_ms(self) -> int:
        return self.delay_ms - self.early_ms

    @classmethod
    def parse(cls, text: str) -> FaultSpec:
        """Parse ``KIND:PHASE:ONSET:MAGNITUDE[:DURATION]``, e.g. ``clogging:1:0:5200``"""
        parts = text.split(':')
        if len(parts) not in (4, 5):
            raise ValidationError(f"Fault {text!r} must look like KIND:PHASE:ONSET:MAGNITUDE[:DURATION]")
        try:
            kind = FaultKind(parts[0].strip().lower())
        except ValueError:
            raise ValidationError(f"Unknown fault kind {parts[0]!r}")
        numbers = [validate_input('non_negative_int', p, field_name='Fault field') for p in parts[1:]]
        return cls(kind, *numbers)

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'phase_index': self.phase_index,
            'onset_cycle': self.onset_cycle,
            'magnitude_ms': self.magnitude_ms,
            'duration_cycles': self.duration_cycles,
        }


def reference_clogging() -> FaultSpec:
    """Clogged transfer line: the Tank_B204 filling phase runs 5.2 s long in the first cycle"""
    return FaultSpec(FaultKind.CLOGGING, phase_index=1, onset_cycle=0, magnitude_ms=5200)


def reference_leakage() -> FaultSpec:
    return FaultSpec(FaultKind.LEAKAGE, phase_index=2, onset_cycle=0, magnitude_ms=4000)


def default_config(cycles: int = 20, seed: int = 7) -> PlantConfig:
    """Reference five-tank configuration; the transfer phase tops out at 121.8 s"""
    return PlantConfig(
        actuators=DEFAULT_ACTUATORS,
        phases=(
            PhaseSpec(('ValveV201', 'ValveV202', 'ValveV203'), 43000, 47000, 45000),
            PhaseSpec(('ValveV204', 'PumpP201'), 118200, 121800, 120000),
            PhaseSpec(('ValveDiscrete',), 58000, 62000, 60000),
            PhaseSpec(('ValveIn1',), 30000, 32000, 31000),
            PhaseSpec(('ValveIn2',), 30000, 32000, 31000),
            PhaseSpec(('ValveIn3',), 30000, 32000, 31000),
        ),
        sample_period_ms=100,
        cycles=cycles,
        seed=seed,
    )


@dataclass
class SimulationResult:
    samples: list[RawSample] = field(default_factory=list)
    ground_truth: dict = field(default_factory=dict)


class FiveTankSimulator:
    """Seeded generator of actuator sample logs with optional timing faults"""

    def __init__(self, config: PlantConfig, faults: Sequence[FaultSpec] = ()):
        self.config = config
        self.faults = tuple(faults)
        self._validate_faults()

    def _validate_faults(self):
        period = self.config.sample_period_ms
        for fault in self.faults:
            if not 0 <= fault.phase_index < PHASE_COUNT:
                raise InvalidFaultPhase(f"Fault phase {fault.phase_index} outside 0..{PHASE_COUNT - 1}")
            if fault.magnitude_ms % period:
                raise ValidationError(f"Fault magnitude {fault.magnitude_ms} ms is not on the {period} ms grid")
            if fault.kind is FaultKind.LEAKAGE and fault.early_ms >= self.config.phases[fault.phase_index].min_ms:
                raise ValidationError(
                    f"Leakage of {fault.early_ms} ms would empty phase {fault.phase_index} completely"
                )
            if fault.onset_cycle >= self.config.cycles:
                raise InvalidFaultPhase(
                    f"Fault onset cycle {fault.onset_cycle} is past the last cycle {self.config.cycles - 1}"
                )

        # overlapping faults add up; the shortest draw must still leave a positive phase
        for cycle in range(self.config.cycles):
            for index, phase in enumerate(self.config.phases):
                net = sum(f.effect_ms() for f in self.faults if f.active(cycle, index))
                if phase.min_ms + net <= 0:
                    raise InvalidFaultPhase(
                        f"Faults on cycle {cycle} phase {index} shorten it by {-net} ms, "
                        f"leaving no time from its {phase.min_ms} ms minimum"
                    )

    def _base_duration(self, rng, cycle: int, phase: PhaseSpec) -> int:
        period = self.config.sample_period_ms
        # draw unconditionally so anchoring does not shift later cycles
        drawn = int(rng.integers(phase.min_ms // period, phase.max_ms // period, endpoint=True)) * period
        if self.config.anchor_extremes and cycle == 0:
            return phase.max_ms
        if self.config.anchor_extremes and cycle == 1:
            return phase.min_ms
        return drawn

    def simulate(self) -> SimulationResult:
        config = self.config
        rng = np.random.default_rng(config.seed)
        vector = config.initial_vector()
        # initial snapshot of every actuator
        samples = [RawSample(0, signal, value) for signal, value in zip(vector.signals, vector.values)]
        phases = []
        now = config.startup_ms

        def switch_to(target: StateVector, at: int):
            for signal, old, new in zip(target.signals, vector.values, target.values):
                if old != new:
                    samples.append(RawSample(at, signal, new))
            return target

        if config.cycles:
            vector = switch_to(config.phase_vector(0), now)

        for cycle in range(config.cycles):
            for index, phase in enumerate(config.phases):
                base = self._base_duration(rng, cycle, phase)
                active = [f for f in self.faults if f.active(cycle, index)]
                actual = base + sum(f.effect_ms() for f in active)
                for fault in active:
                    logger.info(
                        f"Injecting {fault.kind.value} into cycle {cycle} phase {index}: "
                        f"{base} ms -> {actual} ms"
                    )
                phases.append({
                    'cycle': cycle,
                    'phase': index,
                    'state': f"q{index + 1}",
                    'nominal_ms': phase.nominal_ms,
                    'base_ms': base,
                    'actual_ms': actual,
                    'fault': active[0].kind.value if active else None,
                })
                now += actual
                vector = switch_to(config.phase_vector((index + 1) % PHASE_COUNT), now)

        ground_truth = {
            'seed': config.seed,
            'sample_period_ms': config.sample_period_ms,
            'startup_ms': config.startup_ms,
            'cycles': config.cycles,
            'faults': [fault.to_dict() for fault in self.faults],
            'phases': phases,
        }
        logger.info(f"Simulated {config.cycles} cycles, {len(samples)} samples, ending at t={now}")
        return SimulationResult(samples, ground_truth)


def simulate(config: PlantConfig, faults: Iterable[FaultSpec] = ()) -> SimulationResult:
    return FiveTankSimulator(config, tuple(faults)).simulate()
