import os

import pytest

from agents.detector_agent import group_syndromes, run
from agents.learner_agent import learn
from agents.simulator_agent import default_config, reference_clogging, simulate
from knowledge.graph import KnowledgeGraph
from knowledge.mapper import KnowledgeGraphMapper
from models.events import coalesce_samples
from models.plant import load_facts

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FACTS_DIR = os.path.join(ROOT, 'data', 'fivetank')
OWNER = 'MixingModule'


@pytest.fixture(scope='session')
def plant_config():
    return default_config(cycles=20, seed=7)


@pytest.fixture(scope='session')
def initial_vector(plant_config):
    return plant_config.initial_vector()


@pytest.fixture(scope='session')
def normal_run(plant_config):
    return simulate(plant_config)


@pytest.fixture(scope='session')
def clogged_run(plant_config):
    return simulate(plant_config, [reference_clogging()])


@pytest.fixture(scope='session')
def normal_records(normal_run, initial_vector):
    return coalesce_samples(normal_run.samples, initial_vector)


@pytest.fixture(scope='session')
def clogged_records(clogged_run, initial_vector):
    return coalesce_samples(clogged_run.samples, initial_vector)


@pytest.fixture(scope='session')
def learned(normal_records, initial_vector):
    return learn(normal_records, initial_vector)


@pytest.fixture(scope='session')
def clogging_result(learned, clogged_records):
    return run(learned, learned.initial, clogged_records)


@pytest.fixture(scope='session')
def facts():
    return load_facts(FACTS_DIR)


@pytest.fixture(scope='session')
def mapper(facts):
    return KnowledgeGraphMapper(facts)


@pytest.fixture(scope='session')
def export(mapper, learned, clogging_result):
    """Plant, automaton and anomaly graphs of the reference clogging run"""
    plant_graph = mapper.map_plant()
    automaton_graph = mapper.map_automaton(learned, OWNER)
    syndromes = group_syndromes(clogging_result.reports, 300000)
    anomaly_graph = mapper.map_anomalies(
        clogging_result.reports, syndromes, mapper.iris.machine(OWNER), automaton_graph
    )
    return {
        'plant': plant_graph,
        'automaton': automaton_graph,
        'anomalies': anomaly_graph,
        'merged': KnowledgeGraph.union([plant_graph, automaton_graph, anomaly_graph]),
    }
