"""
RDF layer for PlantWatch: graph, Turtle, queries and the plant mappings
"""

from .graph import KnowledgeGraph, UnsupportedFeature
from .turtle import ParseError, parse_turtle, read_turtle, serialize_turtle, write_turtle
from .query import MalformedQuery, Query, format_tsv, query
from .mapper import (
    DanglingReference,
    KnowledgeGraphMapper,
    UnknownActuator,
    map_anomalies,
    map_automaton,
    map_plant,
)
from .competency import CompetencyQuestion, competency_queries, competency_query

__all__ = [
    'KnowledgeGraph',
    'UnsupportedFeature',
    'ParseError',
    'parse_turtle',
    'read_turtle',
    'serialize_turtle',
    'write_turtle',
    'MalformedQuery',
    'Query',
    'format_tsv',
    'query',
    'DanglingReference',
    'KnowledgeGraphMapper',
    'UnknownActuator',
    'map_anomalies',
    'map_automaton',
    'map_plant',
    'CompetencyQuestion',
    'competency_queries',
    'competency_query',
]
