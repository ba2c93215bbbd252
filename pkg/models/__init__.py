from .events import (
    EventRecord,
    Event,
    RawSample,
    SignalChange,
    StateVector,
    apply_event,
    coalesce_samples,
)
from .automaton import TimedAutomaton, TimingInterval, Transition
from .anomaly import AnomalyKind, AnomalyReport, Syndrome, ViolatedBound
from .plant import PlantFacts, load_facts

__all__ = [
    'EventRecord',
    'Event',
    'RawSample',
    'SignalChange',
    'StateVector',
    'apply_event',
    'coalesce_samples',
    'TimedAutomaton',
    'TimingInterval',
    'Transition',
    'AnomalyKind',
    'AnomalyReport',
    'Syndrome',
    'ViolatedBound',
    'PlantFacts',
    'load_facts',
]
