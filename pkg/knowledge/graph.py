"""
In-memory RDF graph with set semantics and no blank nodes.
"""

from __future__ import annotations

import logging
from typing import Iterable, Iterator, Mapping, Optional

from rdflib import BNode, Graph, Literal, URIRef
from rdflib.namespace import RDF, RDFS, XSD
from rdflib.term import Node

from utils.errors import PipelineError

logger = logging.getLogger(__name__)

Triple = tuple

DEFAULT_PREFIXES = {
    'rdf': str(RDF),
    'rdfs': str(RDFS),
    'xsd': str(XSD),
}


class UnsupportedFeature(PipelineError):
    """Raised for blank nodes, collections and other constructs the graph does not carry"""
    pass


def check_term(term: Node, position: str) -> Node:
    if isinstance(term, BNode):
        raise UnsupportedFeature(f"Blank node {term.n3()} in {position} position")
    if position == 'object':
        if not isinstance(term, (URIRef, Literal)):
            raise UnsupportedFeature(f"Object must be an IRI or literal, got {type(term).__name__}")
    elif not isinstance(term, URIRef):
        raise UnsupportedFeature(f"{position.capitalize()} must be an IRI, got {type(term).__name__}")
    return term


class KnowledgeGraph:
    """A set of IRI/literal triples plus the prefixes used to write them"""

    def __init__(self, triples: Iterable[Triple] = (), prefixes: Optional[Mapping[str, str]] = None):
        self._graph = Graph(bind_namespaces='core')
        self.prefixes = dict(DEFAULT_PREFIXES)
        for prefix, namespace in (prefixes or {}).items():
            self.bind(prefix, namespace)
        for triple in triples:
            self.insert(triple)

    @property
    def rdf_graph(self) -> Graph:
        """The underlying rdflib graph (read-only use)"""
        return self._graph

    def bind(self, prefix: str, namespace: str) -> KnowledgeGraph:
        self.prefixes[prefix] = str(namespace)
        self._graph.bind(prefix, URIRef(str(namespace)), override=True, replace=True)
        return self

    def insert(self, triple: Triple) -> KnowledgeGraph:
        subject, predicate, obj = triple
        check_term(subject, 'subject')
        check_term(predicate, 'predicate')
        check_term(obj, 'object')
        self._graph.add((subject, predicate, obj))
        return self

    def add(self, subject, predicate, obj) -> KnowledgeGraph:
        return self.insert((subject, predicate, obj))

    def contains(self, triple: Triple) -> bool:
        return tuple(triple) in self._graph

    def __contains__(self, triple: Triple) -> bool:
        return self.contains(triple)

    def size(self) -> int:
        return len(self._graph)

    def __len__(self) -> int:
        return self.size()

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._graph)

    def triples(self, pattern: Triple = (None, None, None)) -> Iterator[Triple]:
        return self._graph.triples(pattern)

    def subjects_of_type(self, rdf_type) -> list[URIRef]:
        return sorted(self._graph.subjects(RDF.type, rdf_type), key=str)

    def objects(self, subject, predicate) -> list:
        return sorted(self._graph.objects(subject, predicate), key=str)

    def value(self, subject: Node, predicate: Node) -> Optional[Node]:
        return self._graph.value(subject, predicate)

    def label(self, subject) -> Optional[str]:
        label = self._graph.value(subject, RDFS.label)
        return None if label is None else str(label)

    def merge(self, other: KnowledgeGraph) -> KnowledgeGraph:
        """Add every triple and prefix of `other` into this graph"""
        for prefix, namespace in other.prefixes.items():
            if prefix not in self.prefixes:
                self.bind(prefix, namespace)
        for triple in other:
            self._graph.add(triple)
        return self

    @classmethod
    def union(cls, graphs: Iterable[KnowledgeGraph]) -> KnowledgeGraph:
        merged = cls()
        for graph in graphs:
            merged.merge(graph)
        return merged

    def triple_set(self) -> set:
        return set(self._graph)

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.triple_set() == other.triple_set()

    __hash__ = None

    def __repr__(self):
        return f"KnowledgeGraph({self.size()} triples, {len(self.prefixes)} prefixes)"
