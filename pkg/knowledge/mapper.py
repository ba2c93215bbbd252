"""
Mappings from plant facts, learned automata and anomaly reports to RDF.

Automaton graph size
--------------------
For an automaton with |S| states, |T| transitions, n signals and k changed
signals summed over all transition events, ``map_automaton`` emits exactly::

    f(|S|, |T|, n, k) = 3 + 3|S| + 5n|S| + 11|T| + 5k

triples:

* 3 for the machine (its type, the owner link, the InitialState type),
* 3 per state (type, hasState, label),
* 5 per property state and per event description (type, link, forProperty,
  hasValue, valueLabel),
* 11 per transition (type, hasTransition, sourceState, targetState,
  triggeredBy, hasTiming, timing type, minDuration, maxDuration,
  observationCount, event type).

A single-state automaton over two signals therefore maps to 16 triples.
"""

from __future__ import annotations

import logging
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional, Sequence

from rdflib import Literal, URIRef
from rdflib.namespace import RDF, RDFS, XSD

from models.anomaly import AnomalyKind, AnomalyReport, Syndrome, ViolatedBound
from models.automaton import TimedAutomaton, state_label
from models.events import Event
from models.plant import PlantFacts
from utils.errors import PipelineError
from . import vocabulary as v
from .graph import KnowledgeGraph

logger = logging.getLogger(__name__)

ONE_DECIMAL = Decimal('0.1')


class UnknownActuator(PipelineError):
    """Raised when an automaton signal has no actuator in the plant facts"""
    pass


class DanglingReference(PipelineError):
    """Raised when a mapping refers to a node that is not in the graph it extends"""
    pass


def seconds(ms: int) -> Decimal:
    """Milliseconds to seconds with exactly one decimal place"""
    return (Decimal(ms) / 1000).quantize(ONE_DECIMAL, rounding=ROUND_HALF_UP)


def seconds_literal(ms: int) -> Literal:
    return decimal_literal(seconds(ms))


def decimal_literal(value: Decimal) -> Literal:
    return Literal(f"{value:.1f}", datatype=XSD.decimal)


def timing_deviation(report: AnomalyReport) -> Decimal:
    """Deviation in seconds, computed from the rounded values written to the graph"""
    observed = seconds(report.observed_duration_ms)
    if report.violated_bound is ViolatedBound.BELOW_MIN:
        return seconds(report.reference.min_ms) - observed
    return observed - seconds(report.reference.max_ms)


class KnowledgeGraphMapper:
    """Maps one plant's facts, automata and anomalies onto deterministic IRIs"""

    def __init__(self, facts: PlantFacts, base_iri: str = 'http://example.org/', plant: str = 'fivetank'):
        self.facts = facts
        self.iris = v.IriFactory(base_iri, plant)
        self.prefixes = self.iris.prefixes()

    def new_graph(self) -> KnowledgeGraph:
        return KnowledgeGraph(prefixes=self.prefixes)

    def map_plant(self) -> KnowledgeGraph:
        """Hierarchy, devices and their properties"""
        graph = self.new_graph()
        iris = self.iris

        for entity in self.facts.entities:
            node = iris.entity(entity.id)
            graph.add(node, RDF.type, v.ISA88_CLASSES[entity.level])
            graph.add(node, RDFS.label, Literal(entity.id))
            if entity.parent:
                graph.add(iris.entity(entity.parent), v.HAS_PART, node)

        for device in self.facts.devices:
            node = iris.device(device.id)
            prop = iris.property(device.property)
            host = iris.entity(device.host)
            graph.add(node, RDF.type, v.ACTUATOR if device.is_actuator else v.SENSOR)
            graph.add(node, RDFS.label, Literal(device.id))
            graph.add(node, v.IS_HOSTED_BY, host)
            graph.add(prop, RDF.type, v.ACTUATABLE_PROPERTY if device.is_actuator else v.OBSERVABLE_PROPERTY)
            graph.add(prop, RDF.type, v.DATA_ELEMENT)
            graph.add(prop, RDFS.label, Literal(device.property))
            graph.add(prop, v.SEMANTIC_LABEL, Literal(device.semantic_label))
            graph.add(node, v.ACTS_ON_PROPERTY if device.is_actuator else v.OBSERVES, prop)

            if self.facts.entity(device.host).level == 'ControlModule':
                graph.add(host, RDF.type, v.PLATFORM)
                graph.add(host, RDF.type, v.FEATURE_OF_INTEREST)

        logger.info(f"Mapped plant facts to {len(graph)} triples")
        return graph

    def property_of(self, signal: str) -> URIRef:
        device = self.facts.actuator(signal)
        if device is None:
            raise UnknownActuator(f"Signal {signal!r} is not an actuator of the plant")
        return self.iris.property(device.property)

    def _add_value_node(self, graph, node, rdf_type, link_from, link, prop, signal, value):
        graph.add(node, RDF.type, rdf_type)
        graph.add(link_from, link, node)
        graph.add(node, v.FOR_PROPERTY, prop)
        graph.add(node, v.HAS_VALUE, Literal(int(value)))
        graph.add(node, v.VALUE_LABEL, Literal(v.value_label(signal, value)))

    def _add_event_descriptions(self, graph, event_node, event: Event, properties, name):
        for change in event.changes:
            self._add_value_node(
                graph, name(change.signal), v.EVENT_DESCRIPTION, event_node,
                v.HAS_EVENT_DESCRIPTION, properties[change.signal], change.signal, change.new,
            )

    def map_automaton(self, automaton: TimedAutomaton, owner: str) -> KnowledgeGraph:
        """
        State machine of `owner` with property states, transitions and timings

        Raises:
            DanglingReference: If `owner` is not a plant entity
            UnknownActuator: If a signal is not an actuator in the facts
        """
        if self.facts.entity(owner) is None:
            raise DanglingReference(f"Owner {owner!r} is not an entity of the plant hierarchy")
        properties = {signal: self.property_of(signal) for signal in automaton.signal_ordering}
        iris = self.iris
        graph = self.new_graph()

        machine = iris.machine(owner)
        graph.add(machine, RDF.type, v.STATE_MACHINE)
        graph.add(iris.entity(owner), v.HAS_STATE_MACHINE, machine)
        graph.add(iris.state(owner, automaton.initial), RDF.type, v.INITIAL_STATE)

        for sid, vector in automaton.states.items():
            state = iris.state(owner, sid)
            graph.add(state, RDF.type, v.STATE)
            graph.add(machine, v.HAS_STATE, state)
            graph.add(state, RDFS.label, Literal(state_label(sid)))
            for signal, value in zip(vector.signals, vector.values):
                self._add_value_node(
                    graph, iris.property_state(owner, sid, signal), v.PROPERTY_STATE, state,
                    v.HAS_PROPERTY_STATE, properties[signal], signal, value,
                )

        for t in automaton.transitions:
            node = iris.transition(owner, t.source, t.target)
            event = iris.event(owner, t.source, t.target)
            timing = iris.timing(owner, t.source, t.target)
            graph.add(node, RDF.type, v.TRANSITION)
            graph.add(machine, v.HAS_TRANSITION, node)
            graph.add(node, v.SOURCE_STATE, iris.state(owner, t.source))
            graph.add(node, v.TARGET_STATE, iris.state(owner, t.target))
            graph.add(node, v.TRIGGERED_BY, event)
            graph.add(node, v.HAS_TIMING, timing)
            graph.add(timing, RDF.type, v.TRANSITION_TIMING)
            graph.add(timing, v.MIN_DURATION, seconds_literal(t.timing.min_ms))
            graph.add(timing, v.MAX_DURATION, seconds_literal(t.timing.max_ms))
            graph.add(timing, v.OBSERVATION_COUNT, Literal(t.timing.observation_count))
            graph.add(event, RDF.type, v.EVENT)
            self._add_event_descriptions(
                graph, event, t.event, properties,
                lambda signal, t=t: iris.event_description(owner, t.source, t.target, signal),
            )

        logger.info(
            f"Mapped automaton of {owner}: {len(automaton.states)} states, "
            f"{len(automaton.transitions)} transitions, {len(graph)} triples"
        )
        return graph

    def owner_of(self, machine: URIRef) -> str:
        namespace = self.iris.namespace('machine')
        if not str(machine).startswith(namespace):
            raise DanglingReference(f"{machine} is not a state machine IRI of this plant")
        return str(machine)[len(namespace):]

    def map_anomalies(self, reports: Sequence[AnomalyReport], syndromes: Iterable[Syndrome],
                      machine: URIRef, automaton_graph: KnowledgeGraph) -> KnowledgeGraph:
        """
        Symptoms and syndromes attached to a mapped state machine

        Raises:
            DanglingReference: If a report names a state, transition or event
                that `automaton_graph` does not contain
        """
        graph = self.new_graph()
        if not reports:
            return graph

        owner = self.owner_of(machine)
        iris = self.iris

        def require(node, rdf_type):
            if not automaton_graph.contains((node, RDF.type, rdf_type)):
                raise DanglingReference(f"{node} is not a {rdf_type} in the automaton graph")
            return node

        require(machine, v.STATE_MACHINE)
        graph.add(machine, RDF.type, v.DIAGNOSTIC_MODEL)
        for report in reports:
            symptom = iris.symptom(report.at)
            source = require(iris.state(owner, report.source_state), v.STATE)
            graph.add(symptom, RDF.type, v.SYMPTOM)
            graph.add(symptom, v.DETECTED_BY, machine)
            graph.add(symptom, v.OCCURRED_AT, Literal(report.at))
            graph.add(symptom, v.ANOMALY_KIND, Literal(report.kind.value))
            graph.add(symptom, v.IN_STATE, source)

            if report.kind is AnomalyKind.WRONG_TIMING:
                transition = require(iris.transition(owner, report.source_state, report.target_state), v.TRANSITION)
                timing = require(iris.timing(owner, report.source_state, report.target_state), v.TRANSITION_TIMING)
                graph.add(symptom, v.ON_TRANSITION, transition)
                graph.add(symptom, v.OBSERVED_VALUE, seconds_literal(report.observed_duration_ms))
                graph.add(symptom, v.REFERENCE_VALUE_LINK, timing)
                graph.add(timing, RDF.type, v.REFERENCE_VALUE)
                graph.add(symptom, v.VIOLATED_BOUND, Literal(report.violated_bound.value))
                graph.add(symptom, v.DEVIATION, decimal_literal(timing_deviation(report)))
                continue

            for expected in report.expected_events:
                event = require(iris.event(owner, report.source_state, expected.target), v.EVENT)
                graph.add(symptom, v.EXPECTED_EVENT, event)
            properties = {c.signal: self.property_of(c.signal) for c in report.observed_event.changes}
            observed = iris.observed_event(owner, report.at)
            graph.add(symptom, v.OBSERVED_EVENT, observed)
            graph.add(observed, RDF.type, v.EVENT)
            self._add_event_descriptions(
                graph, observed, report.observed_event, properties,
                lambda signal, at=report.at: iris.observed_event_description(owner, at, signal),
            )

        for syndrome in syndromes:
            node = iris.syndrome(syndrome.first_at)
            graph.add(node, RDF.type, v.SYNDROME)
            graph.add(node, v.OCCURRED_AT, Literal(syndrome.first_at))
            for report in syndrome.reports:
                graph.add(iris.symptom(report.at), v.PART_OF_SYNDROME, node)

        logger.info(f"Mapped {len(reports)} anomaly reports to {len(graph)} triples")
        return graph


def map_plant(facts: PlantFacts, base_iri: str = 'http://example.org/', plant: str = 'fivetank') -> KnowledgeGraph:
    return KnowledgeGraphMapper(facts, base_iri, plant).map_plant()


def map_automaton(automaton: TimedAutomaton, owner: str, facts: PlantFacts,
                  base_iri: str = 'http://example.org/', plant: str = 'fivetank') -> KnowledgeGraph:
    return KnowledgeGraphMapper(facts, base_iri, plant).map_automaton(automaton, owner)


def map_anomalies(reports: Sequence[AnomalyReport], syndromes: Iterable[Syndrome], machine: URIRef,
                  automaton_graph: KnowledgeGraph, facts: Optional[PlantFacts] = None,
                  base_iri: str = 'http://example.org/', plant: str = 'fivetank') -> KnowledgeGraph:
    mapper = KnowledgeGraphMapper(facts or PlantFacts.empty(), base_iri, plant)
    return mapper.map_anomalies(reports, syndromes, machine, automaton_graph)
