"""
Competency questions the five-tank knowledge graph must answer.

R1 covers the physical plant, R2 the learned automaton and R3 the detected
anomalies. Queries match entities by ``rdfs:label`` so they do not depend on
the base IRI chosen at export time.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

from .query import Query
from .vocabulary import VOCABULARY_PREFIXES


@dataclass(frozen=True)
class CompetencyQuestion:
    id: str
    question: str
    requirement: str
    query: Query


def _actuator_value(state_var: str, signal: str, suffix: str, value_var_or_label: str) -> list:
    ps, prop, device = f"?ps{suffix}", f"?p{suffix}", f"?d{suffix}"
    return [
        [state_var, 'ext:hasPropertyState', ps],
        [ps, 'ext:forProperty', prop],
        [device, 'sosa:actsOnProperty', prop],
        [device, 'rdfs:label', f'"{signal}"'],
        [ps, 'ext:valueLabel', value_var_or_label],
    ]


_DOCUMENTS = [
    ('CQ1', 'R1', 'Which sensors are part of Tank_B201?', {
        'select': ['?sensor'],
        'where': [
            ['?device', 'a', 'sosa:Sensor'],
            ['?device', 'sosa:isHostedBy', '?host'],
            ['?host', 'rdfs:label', '"Tank_B201"'],
            ['?device', 'rdfs:label', '?sensor'],
        ],
    }),
    ('CQ2', 'R1', 'Which actuators are part of the MixingModule?', {
        'select': ['?actuator'],
        'where': [
            ['?device', 'a', 'sosa:Actuator'],
            ['?device', 'sosa:isHostedBy', '?host'],
            ['?host', 'rdfs:label', '"MixingModule"'],
            ['?device', 'rdfs:label', '?actuator'],
        ],
    }),
    ('CQ3', 'R1', 'Where is sensor tank_B201.level mounted?', {
        'select': ['?host'],
        'where': [
            ['?device', 'rdfs:label', '"tank_B201.level"'],
            ['?device', 'sosa:isHostedBy', '?entity'],
            ['?entity', 'rdfs:label', '?host'],
        ],
    }),
    ('CQ4', 'R1', 'What does sensor tank_B201.level observe?', {
        'select': ['?semantic'],
        'where': [
            ['?device', 'rdfs:label', '"tank_B201.level"'],
            ['?device', 'sosa:observes', '?property'],
            ['?property', 'din61360:semanticLabel', '?semantic'],
        ],
    }),
    ('CQ5', 'R1', 'How many states does the state machine of the MixingModule have?', {
        'count': True,
        'where': [
            ['?owner', 'rdfs:label', '"MixingModule"'],
            ['?owner', 'sm:hasStateMachine', '?machine'],
            ['?machine', 'sm:hasState', '?state'],
        ],
    }),
    ('CQ6', 'R2', 'What is the position of ValveV204 in state q2?', {
        'select': ['?value'],
        'where': [['?state', 'rdfs:label', '"q2"'], *_actuator_value('?state', 'ValveV204', '', '?value')],
    }),
    ('CQ7', 'R2', 'In which state was ValveV204 open and PumpP201 turned on?', {
        'select': ['?name'],
        'where': [
            ['?state', 'a', 'sm:State'],
            ['?state', 'rdfs:label', '?name'],
            *_actuator_value('?state', 'ValveV204', '1', '"open"'),
            *_actuator_value('?state', 'PumpP201', '2', '"on"'),
        ],
    }),
    ('CQ8', 'R2', 'Which events are allowed in state q3?', {
        'select': ['?signal', '?value'],
        'where': [
            ['?state', 'rdfs:label', '"q3"'],
            ['?transition', 'sm:sourceState', '?state'],
            ['?transition', 'sm:triggeredBy', '?event'],
            ['?event', 'ext:hasEventDescription', '?description'],
            ['?description', 'ext:forProperty', '?property'],
            ['?device', 'sosa:actsOnProperty', '?property'],
            ['?device', 'rdfs:label', '?signal'],
            ['?description', 'ext:valueLabel', '?value'],
        ],
    }),
    ('CQ9', 'R3', 'Between which states was a timing anomaly observed?', {
        'select': ['?source', '?target'],
        'where': [
            ['?symptom', 'iso17359:anomalyKind', '"WrongTiming"'],
            ['?symptom', 'iso17359:onTransition', '?transition'],
            ['?transition', 'sm:sourceState', '?from'],
            ['?transition', 'sm:targetState', '?to'],
            ['?from', 'rdfs:label', '?source'],
            ['?to', 'rdfs:label', '?target'],
        ],
    }),
    ('CQ10', 'R3', 'By how many seconds was the maximum transition timing exceeded?', {
        'select': ['?deviation'],
        'where': [
            ['?symptom', 'iso17359:violatedBound', '"AboveMax"'],
            ['?symptom', 'iso17359:deviation', '?deviation'],
        ],
        'filter': [['?deviation', '>', 0]],
    }),
    ('CQ11', 'R3', 'Which timing anomalies were part of a syndrome?', {
        'select': ['?symptom', '?syndrome'],
        'where': [
            ['?symptom', 'iso17359:anomalyKind', '"WrongTiming"'],
            ['?symptom', 'iso17359:partOfSyndrome', '?syndrome'],
        ],
    }),
    ('CQ12', 'R3', 'Which event should have occurred when the timing anomaly was observed?', {
        'select': ['?signal', '?value'],
        'where': [
            ['?symptom', 'iso17359:anomalyKind', '"WrongTiming"'],
            ['?symptom', 'iso17359:onTransition', '?transition'],
            ['?transition', 'sm:triggeredBy', '?event'],
            ['?event', 'ext:hasEventDescription', '?description'],
            ['?description', 'ext:forProperty', '?property'],
            ['?device', 'sosa:actsOnProperty', '?property'],
            ['?device', 'rdfs:label', '?signal'],
            ['?description', 'ext:hasValue', '?value'],
        ],
    }),
]


def competency_queries() -> OrderedDict:
    """The embedded competency questions keyed CQ1..CQ12"""
    questions = OrderedDict()
    for cq_id, requirement, question, document in _DOCUMENTS:
        questions[cq_id] = CompetencyQuestion(
            cq_id, question, requirement, Query.from_json(document, VOCABULARY_PREFIXES)
        )
    return questions


def competency_query(cq_id: str) -> CompetencyQuestion:
    questions = competency_queries()
    key = cq_id.strip().upper()
    if key not in questions:
        raise KeyError(f"Unknown competency question {cq_id!r}; expected one of {', '.join(questions)}")
    return questions[key]
