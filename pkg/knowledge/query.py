"""
Basic graph pattern queries: conjunctive triple patterns, projection,
numeric FILTERs and an optional COUNT(*).

Queries are written as JSON documents::

    {"select": ["?s"],
     "where": [["?s", "a", "sm:State"]],
     "filter": [["?d", ">", 5]],
     "count": false}

and compiled to the matching SPARQL subset for evaluation by rdflib.
"""

from __future__ import annotations

import re
import logging
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Mapping, Optional, Sequence, Union

from rdflib import Literal, URIRef, Variable
from rdflib.term import Node
from rdflib.namespace import RDF

from utils.errors import PipelineError
from .graph import KnowledgeGraph

logger = logging.getLogger(__name__)

COMPARISONS = ('=', '!=', '<', '<=', '>', '>=')
ARITHMETIC = ('+', '-')

VARIABLE = re.compile(r'^\?([A-Za-z_][A-Za-z0-9_]*)$')
LITERAL = re.compile(r'^"((?:[^"\\]|\\.)*)"(?:@([A-Za-z]+(?:-[A-Za-z0-9]+)*)|\^\^(.+))?$', re.DOTALL)
PREFIXED = re.compile(r'^([A-Za-z][A-Za-z0-9_.-]*)?:([^\s]*)$')

_UNESCAPE = {'n': '\n', 'r': '\r', 't': '\t', '"': '"', '\\': '\\'}


class MalformedQuery(PipelineError):
    """Raised when a query document cannot be compiled or evaluated"""
    pass


def _unescape(text: str) -> str:
    return re.sub(r'\\(.)', lambda m: _UNESCAPE.get(m.group(1), m.group(1)), text)


def parse_token(token: Any, prefixes: Mapping[str, str]) -> Union[URIRef, Literal, Variable]:
    """Turn one JSON query token into an rdflib term or Variable"""
    if isinstance(token, bool):
        raise MalformedQuery(f"Boolean {token!r} is not a query term")
    if isinstance(token, int):
        return Literal(token)
    if isinstance(token, float):
        return Literal(Decimal(str(token)))
    if not isinstance(token, str) or not token:
        raise MalformedQuery(f"Unsupported query token {token!r}")

    if token.startswith('?'):
        if not VARIABLE.match(token):
            raise MalformedQuery(f"Invalid variable name {token!r}")
        return Variable(token[1:])
    if token == 'a':
        return RDF.type
    if token.startswith('<') and token.endswith('>'):
        return URIRef(token[1:-1])

    match = LITERAL.match(token)
    if match:
        lexical, language, datatype = match.groups()
        if datatype:
            datatype_term = parse_token(datatype, prefixes)
            if not isinstance(datatype_term, URIRef):
                raise MalformedQuery(f"Datatype of {token!r} must be an IRI")
            return Literal(_unescape(lexical), datatype=datatype_term)
        return Literal(_unescape(lexical), lang=language)

    match = PREFIXED.match(token)
    if match:
        prefix, local = match.group(1) or '', match.group(2)
        if prefix not in prefixes:
            raise MalformedQuery(f"Unknown prefix {prefix!r} in {token!r}")
        return URIRef(prefixes[prefix] + local)

    raise MalformedQuery(f"Cannot interpret query token {token!r}")


def _variables(term) -> set:
    if isinstance(term, Variable):
        return {term}
    if isinstance(term, tuple):
        return _variables(term[0]) | _variables(term[2])
    return set()


@dataclass(frozen=True)
class Filter:
    left: object
    op: str
    right: object

    def to_sparql(self) -> str:
        return f"FILTER({_operand_sparql(self.left)} {self.op} {_operand_sparql(self.right)})"


def _operand_sparql(operand) -> str:
    if isinstance(operand, tuple):
        return f"({_operand_sparql(operand[0])} {operand[1]} {_operand_sparql(operand[2])})"
    return operand.n3()


@dataclass(frozen=True)
class Query:
    select: tuple[Variable, ...]
    where: tuple[tuple, ...]
    filters: tuple[Filter, ...] = ()
    count: bool = False

    def __post_init__(self):
        if not self.where:
            raise MalformedQuery("A query needs at least one triple pattern")
        bound = set()
        for pattern in self.where:
            if len(pattern) != 3:
                raise MalformedQuery(f"Triple pattern {pattern!r} does not have three positions")
            subject, predicate, _ = pattern
            if isinstance(subject, Literal):
                raise MalformedQuery(f"Literal {subject!r} in subject position")
            if not isinstance(predicate, (URIRef, Variable)):
                raise MalformedQuery(f"Predicate {predicate!r} must be an IRI or variable")
            bound |= {term for term in pattern if isinstance(term, Variable)}
        if not self.count and not self.select:
            raise MalformedQuery("Nothing selected")
        for variable in self.select:
            if variable not in bound:
                raise MalformedQuery(f"Selected ?{variable} does not occur in any pattern")
        for condition in self.filters:
            if condition.op not in COMPARISONS:
                raise MalformedQuery(f"Unsupported comparison {condition.op!r}")
            unbound = (_variables(condition.left) | _variables(condition.right)) - bound
            if unbound:
                raise MalformedQuery(f"Filter uses unbound variables {sorted(str(v) for v in unbound)}")

    @property
    def result_names(self) -> list[str]:
        return ['count'] if self.count else [str(v) for v in self.select]

    @classmethod
    def from_json(cls, data: Mapping, prefixes: Optional[Mapping[str, str]] = None) -> Query:
        """
        Compile a JSON query document

        Args:
            data: Decoded document with ``select``, ``where`` and optional ``filter``/``count``
            prefixes: Prefix table used to expand ``pfx:local`` tokens

        Raises:
            MalformedQuery: On any structural problem
        """
        prefixes = dict(prefixes or {})
        if not isinstance(data, Mapping):
            raise MalformedQuery("Query must be a JSON object")
        prefixes.update(data.get('prefixes', {}))
        try:
            select = tuple(parse_token(v, prefixes) for v in data.get('select', []))
            where = tuple(tuple(parse_token(t, prefixes) for t in pattern) for pattern in data['where'])
            filters = tuple(
                Filter(_parse_operand(left, prefixes), op, _parse_operand(right, prefixes))
                for left, op, right in data.get('filter', [])
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise MalformedQuery(f"Malformed query document: {e!r}")
        if any(not isinstance(v, Variable) for v in select):
            raise MalformedQuery("Only variables can be selected")
        return cls(select, where, filters, bool(data.get('count', False)))

    def to_sparql(self) -> str:
        head = 'SELECT (COUNT(*) AS ?count)' if self.count else 'SELECT ' + ' '.join(v.n3() for v in self.select)
        body = [' '.join(term.n3() for term in pattern) + ' .' for pattern in self.where]
        body.extend(condition.to_sparql() for condition in self.filters)
        return head + ' WHERE {\n  ' + '\n  '.join(body) + '\n}'


def _parse_operand(operand: Any, prefixes: Mapping[str, str]):
    if isinstance(operand, list):
        if len(operand) != 3 or operand[1] not in ARITHMETIC:
            raise MalformedQuery(f"Arithmetic operand {operand!r} must be [a, '+'|'-', b]")
        return (_parse_operand(operand[0], prefixes), operand[1], _parse_operand(operand[2], prefixes))
    term = parse_token(operand, prefixes)
    if not isinstance(term, (Variable, Literal)):
        raise MalformedQuery(f"Filter operand {operand!r} must be a variable or literal")
    return term


def term_sort_key(term: Optional[Node]) -> tuple:
    if term is None:
        return (0, '', '', '')
    if isinstance(term, Literal):
        return (2, str(term), str(term.datatype or ''), term.language or '')
    return (1, str(term), '', '')


def query(graph: KnowledgeGraph, q: Query) -> list[dict]:
    """
    Evaluate `q` and return solutions in deterministic order

    Returns:
        list[dict]: One mapping per solution from variable name (without ``?``) to term
    """
    sparql = q.to_sparql()
    logger.debug(f"Evaluating query:\n{sparql}")
    try:
        result = graph.rdf_graph.query(sparql)
    except Exception as e:
        raise MalformedQuery(f"Query evaluation failed: {e}")

    names = q.result_names
    rows = [{name: row[Variable(name)] for name in names} for row in result]
    rows.sort(key=lambda row: tuple(term_sort_key(row[name]) for name in names))
    return rows


def lexical(term) -> str:
    """Display form of a result term: literals as their lexical form, IRIs as written"""
    if term is None:
        return ''
    return str(term)


def format_tsv(q: Query, rows: Sequence[dict]) -> str:
    """Render solutions as TSV with a header row of variable names"""
    names = q.result_names
    lines = ['\t'.join(names)]
    for row in rows:
        lines.append('\t'.join(lexical(row[name]).replace('\t', ' ').replace('\n', ' ') for name in names))
    return '\n'.join(lines) + '\n'
