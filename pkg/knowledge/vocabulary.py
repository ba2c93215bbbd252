"""
Vocabulary of the alignment ontology and the deterministic IRI scheme.

The ISA88, statemachine, extension and ISO17359 namespaces are PlantWatch's
own IRIs; SOSA is the W3C namespace.
"""

from __future__ import annotations

from rdflib import Namespace, URIRef
from rdflib.namespace import RDF, RDFS, XSD

from utils.validators import validate_input

ISA88 = Namespace('http://example.org/cpps/isa88#')
SOSA = Namespace('http://www.w3.org/ns/sosa/')
DIN61360 = Namespace('http://example.org/cpps/din61360#')
SM = Namespace('http://example.org/cpps/statemachine#')
EXT = Namespace('http://example.org/cpps/ext#')
ISO17359 = Namespace('http://example.org/cpps/iso17359#')

VOCABULARY_PREFIXES = {
    'rdf': str(RDF),
    'rdfs': str(RDFS),
    'xsd': str(XSD),
    'isa88': str(ISA88),
    'sosa': str(SOSA),
    'din61360': str(DIN61360),
    'sm': str(SM),
    'ext': str(EXT),
    'iso17359': str(ISO17359),
}

# ISA88 physical model
ISA88_CLASSES = {
    level: ISA88[level]
    for level in ('Enterprise', 'Site', 'Area', 'ProcessCell', 'Unit', 'EquipmentModule', 'ControlModule')
}
HAS_PART = ISA88.hasPart

# SOSA sensing and actuation
SENSOR = SOSA.Sensor
ACTUATOR = SOSA.Actuator
PLATFORM = SOSA.Platform
FEATURE_OF_INTEREST = SOSA.FeatureOfInterest
OBSERVABLE_PROPERTY = SOSA.ObservableProperty
ACTUATABLE_PROPERTY = SOSA.ActuatableProperty
OBSERVES = SOSA.observes
ACTS_ON_PROPERTY = SOSA.actsOnProperty
IS_HOSTED_BY = SOSA.isHostedBy

# property semantics
DATA_ELEMENT = DIN61360.DataElement
SEMANTIC_LABEL = DIN61360.semanticLabel

# state machines
STATE_MACHINE = SM.StateMachine
STATE = SM.State
INITIAL_STATE = SM.InitialState
TRANSITION = SM.Transition
EVENT = SM.Event
HAS_STATE_MACHINE = SM.hasStateMachine
HAS_STATE = SM.hasState
HAS_TRANSITION = SM.hasTransition
SOURCE_STATE = SM.sourceState
TARGET_STATE = SM.targetState
TRIGGERED_BY = SM.triggeredBy

# timing and property-state extension
TRANSITION_TIMING = EXT.TransitionTiming
HAS_TIMING = EXT.hasTiming
MIN_DURATION = EXT.minDuration
MAX_DURATION = EXT.maxDuration
OBSERVATION_COUNT = EXT.observationCount
PROPERTY_STATE = EXT.PropertyState
HAS_PROPERTY_STATE = EXT.hasPropertyState
EVENT_DESCRIPTION = EXT.EventDescription
HAS_EVENT_DESCRIPTION = EXT.hasEventDescription
FOR_PROPERTY = EXT.forProperty
HAS_VALUE = EXT.hasValue
VALUE_LABEL = EXT.valueLabel

# condition monitoring
DIAGNOSTIC_MODEL = ISO17359.DiagnosticModel
SYMPTOM = ISO17359.Symptom
REFERENCE_VALUE = ISO17359.ReferenceValue
SYNDROME = ISO17359.Syndrome
OBSERVED_VALUE = ISO17359.observedValue
REFERENCE_VALUE_LINK = ISO17359.referenceValue
DEVIATION = ISO17359.deviation
DETECTED_BY = ISO17359.detectedBy
PART_OF_SYNDROME = ISO17359.partOfSyndrome
OCCURRED_AT = ISO17359.occurredAt
ON_TRANSITION = ISO17359.onTransition
IN_STATE = ISO17359.inState
EXPECTED_EVENT = ISO17359.expectedEvent
OBSERVED_EVENT = ISO17359.observedEvent
ANOMALY_KIND = ISO17359.anomalyKind
VIOLATED_BOUND = ISO17359.violatedBound

IRI_KINDS = (
    'entity',
    'device',
    'property',
    'machine',
    'state',
    'pstate',
    'transition',
    'event',
    'timing',
    'edesc',
    'symptom',
    'syndrome',
)


class IriFactory:
    """Builds ``{base}{plant}/{kind}/{name}`` IRIs"""

    def __init__(self, base_iri: str, plant: str):
        base_iri = validate_input('iri', base_iri)
        if not base_iri.endswith(('/', '#')):
            base_iri += '/'
        self.base_iri = base_iri
        self.plant = validate_input('entity', plant)

    def namespace(self, kind: str) -> str:
        if kind not in IRI_KINDS:
            raise ValueError(f"Unknown IRI kind {kind!r}")
        return f"{self.base_iri}{self.plant}/{kind}/"

    def iri(self, kind: str, name) -> URIRef:
        return URIRef(self.namespace(kind) + str(name))

    def prefixes(self) -> dict:
        """Vocabulary prefixes plus one prefix per IRI kind"""
        table = dict(VOCABULARY_PREFIXES)
        table['ex'] = self.base_iri
        for kind in IRI_KINDS:
            table[kind] = self.namespace(kind)
        return table

    def entity(self, entity_id: str) -> URIRef:
        return self.iri('entity', entity_id)

    def device(self, device_id: str) -> URIRef:
        return self.iri('device', device_id)

    def property(self, property_id: str) -> URIRef:
        return self.iri('property', property_id)

    def machine(self, owner: str) -> URIRef:
        return self.iri('machine', owner)

    def state(self, owner: str, state: int) -> URIRef:
        return self.iri('state', f"{owner}_q{state}")

    def property_state(self, owner: str, state: int, signal: str) -> URIRef:
        return self.iri('pstate', f"{owner}_q{state}_{signal}")

    def transition(self, owner: str, source: int, target: int) -> URIRef:
        return self.iri('transition', f"{owner}_q{source}_q{target}")

    def event(self, owner: str, source: int, target: int) -> URIRef:
        return self.iri('event', f"{owner}_q{source}_q{target}")

    def timing(self, owner: str, source: int, target: int) -> URIRef:
        return self.iri('timing', f"{owner}_q{source}_q{target}")

    def event_description(self, owner: str, source: int, target: int, signal: str) -> URIRef:
        return self.iri('edesc', f"{owner}_q{source}_q{target}_{signal}")

    def symptom(self, at_ms: int) -> URIRef:
        return self.iri('symptom', at_ms)

    def observed_event(self, owner: str, at_ms: int) -> URIRef:
        return self.iri('event', f"{owner}_observed_{at_ms}")

    def observed_event_description(self, owner: str, at_ms: int, signal: str) -> URIRef:
        return self.iri('edesc', f"{owner}_observed_{at_ms}_{signal}")

    def syndrome(self, first_at_ms: int) -> URIRef:
        return self.iri('syndrome', first_at_ms)


def value_label(signal: str, value: int) -> str:
    """Human reading of an actuator value: pumps run, valves open"""
    if value not in (0, 1):
        return str(value)
    if signal.startswith('Pump'):
        return 'on' if value else 'off'
    return 'open' if value else 'closed'
