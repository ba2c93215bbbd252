from .learner_agent import LearnerAgent, LearnerSession, learn, new_session
from .detector_agent import DetectorAgent, DetectorState, ResyncPolicy, group_syndromes, run
from .simulator_agent import FaultSpec, FiveTankSimulator, PlantConfig, default_config, simulate

__all__ = [
    'LearnerAgent',
    'LearnerSession',
    'learn',
    'new_session',
    'DetectorAgent',
    'DetectorState',
    'ResyncPolicy',
    'group_syndromes',
    'run',
    'FaultSpec',
    'FiveTankSimulator',
    'PlantConfig',
    'default_config',
    'simulate',
]
