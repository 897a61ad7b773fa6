"""
Group presentations - parsing, validation and canonicalization of group files

Two presentations are supported:
  - GroupSpec: a finite simplicial graph with a cyclic group on every vertex
    (graph products of cyclic groups, right-angled Coxeter/Artin groups).
  - CoxeterSpec: a Coxeter matrix over an ordered generator list.

The order in which generators are declared in the file is the canonical
generator order used by every engine downstream.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import networkx as nx

from app.services.errors import (
    NotRightAngledError,
    SpecSyntaxError,
    SpecValidationError,
)

logger = logging.getLogger(__name__)

INF = math.inf
IDENTITY_TOKEN = 'e'
NAME_PATTERN = re.compile(r'^[A-Za-z][A-Za-z0-9_]*$')

Order = Union[int, float]
Types = FrozenSet[int]


def is_finite(order: Order) -> bool:
    return order != INF


def format_order(order: Order) -> str:
    return 'inf' if order == INF else str(order)


class _Generators:
    """Name/index bookkeeping shared by both presentation kinds"""

    generators: Tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.generators)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SpecValidationError(f"Unknown generator: {name}")

    def name(self, i: int) -> str:
        return self.generators[i]

    def all_types(self) -> Types:
        return frozenset(range(self.n))

    def parse_types(self, text: str) -> Types:
        """Parse a generator subset: '{a,b}', 'a,b', '{}' or ''"""
        body = text.strip()
        if body.startswith('{') and body.endswith('}'):
            body = body[1:-1]
        names = [token.strip() for token in body.split(',') if token.strip()]
        return frozenset(self.index(name) for name in names)

    def format_types(self, types: Iterable[int]) -> str:
        return '{' + ','.join(self.generators[i] for i in sorted(types)) + '}'


@dataclass(frozen=True)
class GroupSpec(_Generators):
    """Simplicial graph with cyclic vertex groups"""

    generators: Tuple[str, ...]
    orders: Tuple[Order, ...]
    edges: FrozenSet[Tuple[int, int]] = frozenset()
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)
    _neighbours: Tuple[FrozenSet[int], ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        _validate_names(self.generators)
        if len(self.orders) != len(self.generators):
            raise SpecValidationError("One order is required per generator")
        for name, order in zip(self.generators, self.orders):
            if order != INF and (not isinstance(order, int) or order < 2):
                raise SpecValidationError(f"Order of generator {name} must be >= 2 or inf, got {order}")

        normalized = set()
        for i, j in self.edges:
            if not (0 <= i < len(self.generators) and 0 <= j < len(self.generators)):
                raise SpecValidationError(f"Edge endpoint out of range: ({i}, {j})")
            if i == j:
                raise SpecValidationError(f"Self-loop on generator {self.generators[i]}")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, 'edges', frozenset(normalized))
        object.__setattr__(self, '_index', {name: i for i, name in enumerate(self.generators)})

        neighbours = [set() for _ in self.generators]
        for i, j in normalized:
            neighbours[i].add(j)
            neighbours[j].add(i)
        object.__setattr__(self, '_neighbours', tuple(frozenset(s) for s in neighbours))

    def order(self, i: int) -> Order:
        return self.orders[i]

    def commutes(self, i: int, j: int) -> bool:
        """True when s_i and s_j are distinct and joined by an edge"""
        return j in self._neighbours[i]

    def link(self, i: int) -> Types:
        return self._neighbours[i]

    def star(self, i: int) -> Types:
        return self._neighbours[i] | {i}

    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def is_finite_group(self) -> bool:
        """Finite iff the graph is complete and every vertex group is finite"""
        complete = len(self.edges) == self.n * (self.n - 1) // 2
        return complete and all(is_finite(m) for m in self.orders)

    def group_order(self) -> Optional[int]:
        if not self.is_finite_group():
            return None
        return math.prod(int(m) for m in self.orders)


@dataclass(frozen=True)
class CoxeterSpec(_Generators):
    """Coxeter system (W, S) given by its Coxeter matrix"""

    generators: Tuple[str, ...]
    matrix: Tuple[Tuple[Order, ...], ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        _validate_names(self.generators)
        n = len(self.generators)
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise SpecValidationError("Coxeter matrix must be square of size n")
        for i in range(n):
            if self.matrix[i][i] != 1:
                raise SpecValidationError(f"Diagonal entry m({self.generators[i]},{self.generators[i]}) must be 1")
            for j in range(n):
                if i == j:
                    continue
                m = self.matrix[i][j]
                if m != self.matrix[j][i]:
                    raise SpecValidationError(
                        f"Coxeter matrix is not symmetric at ({self.generators[i]},{self.generators[j]})")
                if m != INF and (not isinstance(m, int) or m < 2):
                    raise SpecValidationError(
                        f"Off-diagonal entry m({self.generators[i]},{self.generators[j]}) must be >= 2, got {m}")
        object.__setattr__(self, '_index', {name: i for i, name in enumerate(self.generators)})

    def m(self, i: int, j: int) -> Order:
        return self.matrix[i][j]

    def commutes(self, i: int, j: int) -> bool:
        return i != j and self.matrix[i][j] == 2

    def is_right_angled(self) -> bool:
        return all(self.matrix[i][j] in (2, INF)
                   for i in range(self.n) for j in range(self.n) if i != j)


def _validate_names(generators: Tuple[str, ...]):
    seen = set()
    for name in generators:
        if not NAME_PATTERN.match(name or ''):
            raise SpecValidationError(f"Invalid generator name: {name!r}")
        if name == IDENTITY_TOKEN:
            raise SpecValidationError(f"Generator name {IDENTITY_TOKEN!r} is reserved for the identity")
        if name in seen:
            raise SpecValidationError(f"Duplicate generator: {name}")
        seen.add(name)


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

def _statements(text: str):
    """Yield (line_no, [(column, token), ...]) for every non-empty line"""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in re.finditer(r'\S+', line)]
        if tokens:
            yield line_no, tokens


def _parse_order(token: str, line_no: int, column: int, what: str) -> Order:
    if token in ('inf', '0'):
        return INF
    if not re.fullmatch(r'-?\d+', token):
        raise SpecSyntaxError(f"Expected an integer or 'inf' for {what}, got {token!r}", line_no, column)
    return int(token)


def _expect_arity(tokens, count: int, line_no: int, keyword: str):
    if len(tokens) < count:
        column = tokens[-1][0] + len(tokens[-1][1])
        raise SpecSyntaxError(f"'{keyword}' expects {count - 1} argument(s)", line_no, column)
    if len(tokens) > count:
        raise SpecSyntaxError(f"Unexpected token {tokens[count][1]!r}", line_no, tokens[count][0])


def _is_coxeter_document(text: str) -> bool:
    for _, tokens in _statements(text):
        return tokens[0][1] == 'coxeter'
    return False


def parse_group_spec(text: str) -> GroupSpec:
    """Parse the GroupSpec grammar: 'generator <name> <order>' and 'edge <a> <b>'"""
    generators: List[str] = []
    orders: List[Order] = []
    pending_edges: List[Tuple[int, str, str]] = []

    for line_no, tokens in _statements(text):
        keyword_col, keyword = tokens[0]
        if keyword == 'generator':
            _expect_arity(tokens, 3, line_no, keyword)
            name = tokens[1][1]
            if name in generators:
                raise SpecValidationError(f"Duplicate generator: {name} (line {line_no})")
            order = _parse_order(tokens[2][1], line_no, tokens[2][0], f"order of {name}")
            if order != INF and order < 2:
                raise SpecValidationError(f"Order of generator {name} must be >= 2 or inf, got {order} (line {line_no})")
            generators.append(name)
            orders.append(order)
        elif keyword == 'edge':
            _expect_arity(tokens, 3, line_no, keyword)
            pending_edges.append((line_no, tokens[1][1], tokens[2][1]))
        elif keyword == 'coxeter':
            raise SpecSyntaxError("'coxeter' header in a group document", line_no, keyword_col)
        else:
            raise SpecSyntaxError(f"Unknown statement {keyword!r}", line_no, keyword_col)

    edges = set()
    for line_no, a, b in pending_edges:
        for name in (a, b):
            if name not in generators:
                raise SpecValidationError(f"Unknown edge endpoint: {name} (line {line_no})")
        if a == b:
            raise SpecValidationError(f"Self-loop on generator {a} (line {line_no})")
        edges.add((generators.index(a), generators.index(b)))

    if not generators:
        raise SpecValidationError("A group needs at least one generator")

    spec = GroupSpec(tuple(generators), tuple(orders), frozenset(edges))
    logger.debug(f"Parsed group spec with {spec.n} generators and {len(spec.edges)} edges")
    return spec


def parse_coxeter_spec(text: str) -> CoxeterSpec:
    """Parse the Coxeter grammar; unspecified pairs default to m = inf"""
    generators: List[str] = []
    entries: Dict[Tuple[str, str], Tuple[Order, int]] = {}
    header_seen = False

    for line_no, tokens in _statements(text):
        keyword_col, keyword = tokens[0]
        if keyword == 'coxeter':
            if header_seen or generators or entries:
                raise SpecSyntaxError("'coxeter' header must be the first statement", line_no, keyword_col)
            _expect_arity(tokens, 1, line_no, keyword)
            header_seen = True
        elif keyword == 'generator':
            _expect_arity(tokens, 2, line_no, keyword)
            name = tokens[1][1]
            if name in generators:
                raise SpecValidationError(f"Duplicate generator: {name} (line {line_no})")
            generators.append(name)
        elif keyword == 'm':
            _expect_arity(tokens, 4, line_no, keyword)
            a, b = tokens[1][1], tokens[2][1]
            value = _parse_order(tokens[3][1], line_no, tokens[3][0], f"m({a},{b})")
            if a == b:
                raise SpecValidationError(f"Diagonal entry m({a},{a}) is fixed to 1 (line {line_no})")
            if value != INF and value < 2:
                raise SpecValidationError(f"Off-diagonal entry m({a},{b}) must be >= 2, got {value} (line {line_no})")
            key = (min(a, b), max(a, b))
            if key in entries and entries[key][0] != value:
                raise SpecValidationError(f"Conflicting entries for m({a},{b}) (line {line_no})")
            entries[key] = (value, line_no)
        elif keyword == 'edge':
            raise SpecSyntaxError("'edge' is not part of the Coxeter grammar", line_no, keyword_col)
        else:
            raise SpecSyntaxError(f"Unknown statement {keyword!r}", line_no, keyword_col)

    if not generators:
        raise SpecValidationError("A Coxeter system needs at least one generator")

    index = {name: i for i, name in enumerate(generators)}
    matrix = [[1 if i == j else INF for j in range(len(generators))] for i in range(len(generators))]
    for (a, b), (value, line_no) in entries.items():
        for name in (a, b):
            if name not in index:
                raise SpecValidationError(f"Unknown generator in m entry: {name} (line {line_no})")
        matrix[index[a]][index[b]] = value
        matrix[index[b]][index[a]] = value

    return CoxeterSpec(tuple(generators), tuple(tuple(row) for row in matrix))


def parse_spec(text: str) -> Union[GroupSpec, CoxeterSpec]:
    if _is_coxeter_document(text):
        return parse_coxeter_spec(text)
    return parse_group_spec(text)


def load_spec(path: Union[str, Path]) -> Union[GroupSpec, CoxeterSpec]:
    """Load a group file from disk"""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        line = raw.count(b'\n', 0, e.start) + 1
        column = e.start - (raw.rfind(b'\n', 0, e.start) + 1) + 1
        raise SpecSyntaxError(f"invalid UTF-8 byte 0x{raw[e.start]:02x}", line, column) from e
    spec = parse_spec(text)
    logger.info(f"Loaded {type(spec).__name__} from {path}: generators={','.join(spec.generators)}")
    return spec


def serialize_group_spec(spec: GroupSpec) -> str:
    lines = [f"generator {name} {format_order(order)}" for name, order in zip(spec.generators, spec.orders)]
    lines += [f"edge {spec.name(i)} {spec.name(j)}" for i, j in sorted(spec.edges)]
    return '\n'.join(lines) + '\n'


def serialize_coxeter_spec(spec: CoxeterSpec) -> str:
    lines = ['coxeter'] + [f"generator {name}" for name in spec.generators]
    for i in range(spec.n):
        for j in range(i + 1, spec.n):
            if spec.m(i, j) != INF:
                lines.append(f"m {spec.name(i)} {spec.name(j)} {format_order(spec.m(i, j))}")
    return '\n'.join(lines) + '\n'


def underlying_coxeter(spec: GroupSpec) -> CoxeterSpec:
    """The right-angled Coxeter system giving the building type of the chamber system"""
    matrix = tuple(
        tuple(1 if i == j else (2 if spec.commutes(i, j) else INF) for j in range(spec.n))
        for i in range(spec.n)
    )
    return CoxeterSpec(spec.generators, matrix)


def right_angled_group_spec(cox: CoxeterSpec) -> GroupSpec:
    """Order-2 graph product presenting the same right-angled Coxeter group"""
    if not cox.is_right_angled():
        raise NotRightAngledError("Coxeter matrix has an entry outside {2, inf}")
    edges = frozenset((i, j) for i in range(cox.n) for j in range(i + 1, cox.n) if cox.m(i, j) == 2)
    return GroupSpec(cox.generators, tuple(2 for _ in cox.generators), edges)
