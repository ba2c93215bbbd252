"""
Canonical Turtle writer and a restricted Turtle reader.

The writer is deterministic: prefixes, subjects and predicates are sorted,
objects of one predicate are sorted and joined into an object list, and
literals are escaped the same way every time, so equal graphs serialize to
identical bytes.
"""

from __future__ import annotations

import re
import logging

from rdflib import BNode, Graph, Literal, URIRef
from rdflib.namespace import RDF
from rdflib.plugins.parsers.notation3 import BadSyntax

from utils.errors import PipelineError
from .graph import KnowledgeGraph, UnsupportedFeature

logger = logging.getLogger(__name__)

LOCAL_NAME = re.compile(r'^[A-Za-z_][A-Za-z0-9_-]*$')
PREFIX_DIRECTIVE = re.compile(
    r'^\s*(?:@prefix|PREFIX)\s+([A-Za-z][A-Za-z0-9_.-]*)?:\s*<([^>]*)>',
    re.MULTILINE | re.IGNORECASE,
)
IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')

_ESCAPES = {
    '\\': '\\\\',
    '"': '\\"',
    '\n': '\\n',
    '\r': '\\r',
    '\t': '\\t',
}


class ParseError(PipelineError):
    """Raised for malformed Turtle; carries the 1-based line/column and offending token"""

    def __init__(self, line: int, column: int, token: str, reason: str = ''):
        self.line = line
        self.column = column
        self.token = token
        self.reason = reason
        message = f"line {line}, column {column}: unexpected {token!r}"
        if reason:
            message += f" ({reason})"
        super().__init__(message)


def escape_literal(text: str) -> str:
    out = []
    for char in text:
        if char in _ESCAPES:
            out.append(_ESCAPES[char])
        elif ord(char) < 0x20 or ord(char) == 0x7f:
            out.append(f"\\u{ord(char):04X}")
        else:
            out.append(char)
    return ''.join(out)


class TurtleWriter:
    """Renders terms against a fixed prefix table"""

    def __init__(self, prefixes: dict):
        self.prefixes = dict(prefixes)
        # longest namespace first so the most specific prefix wins
        self._by_length = sorted(self.prefixes.items(), key=lambda item: (-len(item[1]), item[0]))

    def iri(self, iri: URIRef) -> str:
        text = str(iri)
        for prefix, namespace in self._by_length:
            if namespace and text.startswith(namespace):
                local = text[len(namespace):]
                if LOCAL_NAME.match(local):
                    return f"{prefix}:{local}"
        if IRI_FORBIDDEN.search(text):
            raise UnsupportedFeature(f"IRI {text!r} cannot be written in Turtle")
        return f"<{text}>"

    def term(self, term) -> str:
        if isinstance(term, BNode):
            raise UnsupportedFeature("Blank nodes cannot be serialized")
        if isinstance(term, Literal):
            text = f'"{escape_literal(str(term))}"'
            if term.language:
                return f"{text}@{term.language}"
            if term.datatype is not None:
                return f"{text}^^{self.iri(term.datatype)}"
            return text
        return self.iri(term)

    def predicate(self, term) -> str:
        return 'a' if term == RDF.type else self.iri(term)


def _object_key(term):
    if isinstance(term, Literal):
        return (1, str(term), str(term.datatype or ''), term.language or '')
    return (0, str(term), '', '')


def serialize_turtle(graph: KnowledgeGraph) -> str:
    """
    Write `graph` as canonical Turtle

    Every prefix in the graph's table is emitted, even if unused, so that
    parse and re-serialize is a fixed point.
    """
    writer = TurtleWriter(graph.prefixes)
    lines = [f"@prefix {prefix}: <{namespace}> ." for prefix, namespace in sorted(graph.prefixes.items())]

    by_subject = {}
    for subject, predicate, obj in graph:
        by_subject.setdefault(subject, {}).setdefault(predicate, []).append(obj)

    for subject in sorted(by_subject, key=str):
        lines.append('')
        predicates = by_subject[subject]
        rendered = []
        for predicate in sorted(predicates, key=str):
            objects = ' , '.join(writer.term(o) for o in sorted(predicates[predicate], key=_object_key))
            rendered.append(f"{writer.predicate(predicate)} {objects}")
        lines.append(f"{writer.term(subject)} " + ' ;\n    '.join(rendered) + ' .')

    return '\n'.join(lines) + '\n'


def _locate(text: str, index: int):
    index = max(0, min(index, len(text)))
    line = text.count('\n', 0, index) + 1
    column = index - (text.rfind('\n', 0, index) + 1) + 1
    match = re.match(r'\S+', text[index:])
    token = match.group(0) if match else '<end of input>'
    return line, column, token


def parse_turtle(text: str) -> KnowledgeGraph:
    """
    Parse restricted Turtle into a KnowledgeGraph

    Raises:
        ParseError: On syntax errors, with line/column of the offending token
        UnsupportedFeature: If the document contains blank nodes or collections
    """
    parsed = Graph(bind_namespaces='none')
    try:
        parsed.parse(data=text, format='turtle')
    except BadSyntax as e:
        line, column, token = _locate(text, getattr(e, '_i', 0))
        raise ParseError(line, column, token, getattr(e, '_why', ''))
    except (SyntaxError, ValueError) as e:
        raise ParseError(1, 1, text[:20], str(e))

    for triple in parsed:
        for term in triple:
            if isinstance(term, BNode):
                raise UnsupportedFeature("Blank nodes and collections are not supported")

    prefixes = {prefix or '': namespace for prefix, namespace in PREFIX_DIRECTIVE.findall(text)}
    graph = KnowledgeGraph(parsed, prefixes)
    logger.debug(f"Parsed {len(graph)} triples")
    return graph


def read_turtle(path) -> KnowledgeGraph:
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    try:
        return parse_turtle(text)
    except ParseError as e:
        raise ParseError(e.line, e.column, e.token, f"{path}: {e.reason}" if e.reason else str(path))


def write_turtle(path: str, graph: KnowledgeGraph) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(serialize_turtle(graph))
