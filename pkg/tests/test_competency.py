import pytest

from agents.detector_agent import DetectorAgent
from agents.simulator_agent import FaultSpec, simulate
from knowledge.competency import competency_queries, competency_query
from knowledge.graph import KnowledgeGraph
from knowledge.query import query
from models.events import coalesce_samples


def answers(graph, cq_id):
    cq = competency_query(cq_id)
    return [tuple(str(row[name]) for name in cq.query.result_names) for row in query(graph, cq.query)]


class TestCatalogue:
    def test_twelve_questions(self):
        questions = competency_queries()
        assert list(questions) == [f"CQ{i}" for i in range(1, 13)]
        assert {q.requirement for q in questions.values()} == {'R1', 'R2', 'R3'}

    def test_lookup_is_case_insensitive(self):
        assert competency_query('cq5').id == 'CQ5'

    def test_unknown_id(self):
        with pytest.raises(KeyError):
            competency_query('CQ13')


class TestAnswers:
    """Answers over the merged export of the reference clogging run"""

    @pytest.fixture
    def graph(self, export):
        return export['merged']

    def test_cq1_sensors_of_b201(self, graph):
        assert answers(graph, 'CQ1') == [('B201_isFull',), ('tank_B201.level',)]

    def test_cq2_actuators_of_mixing_module(self, graph):
        assert len(answers(graph, 'CQ2')) == 9
        assert ('PumpP201',) in answers(graph, 'CQ2')

    def test_cq3_mount_point(self, graph):
        assert answers(graph, 'CQ3') == [('Tank_B201',)]

    def test_cq4_observed_property(self, graph):
        assert answers(graph, 'CQ4') == [('Filling Level of Tank_B201',)]

    def test_cq5_state_count(self, graph):
        assert answers(graph, 'CQ5') == [('7',)]

    def test_cq6_valve_position(self, graph):
        assert answers(graph, 'CQ6') == [('open',)]

    def test_cq7_transfer_state(self, graph):
        assert answers(graph, 'CQ7') == [('q2',)]

    def test_cq8_allowed_events(self, graph):
        assert answers(graph, 'CQ8') == [('ValveDiscrete', 'closed'), ('ValveIn1', 'open')]

    def test_cq9_timing_anomaly_states(self, graph):
        assert answers(graph, 'CQ9') == [('q2', 'q3')]

    def test_cq10_deviation(self, graph):
        assert answers(graph, 'CQ10') == [('5.2',)]

    def test_cq11_single_fault_syndrome(self, graph, mapper, clogging_result):
        (report,) = clogging_result.reports
        expected = (str(mapper.iris.symptom(report.at)), str(mapper.iris.syndrome(report.at)))
        assert answers(graph, 'CQ11') == [expected]

    def test_cq12_expected_event(self, graph):
        assert answers(graph, 'CQ12') == [('PumpP201', '0'), ('ValveDiscrete', '1'), ('ValveV204', '0')]


def test_cq11_two_faults(export, mapper, learned, plant_config, initial_vector):
    """Two timing faults in one cycle share a syndrome"""
    faults = [FaultSpec.parse('clogging:1:2:5200'), FaultSpec.parse('leakage:2:2:5000')]
    records = coalesce_samples(simulate(plant_config, faults).samples, initial_vector)
    result, syndromes = DetectorAgent(learned).detect(records)
    anomalies = mapper.map_anomalies(result.reports, syndromes, mapper.iris.machine('MixingModule'), export['automaton'])
    graph = KnowledgeGraph.union([export['plant'], export['automaton'], anomalies])

    rows = answers(graph, 'CQ11')
    assert len(rows) == 2
    assert len({syndrome for _, syndrome in rows}) == 1
