"""
Brute-force oracle for the group engines

Everything here is computed without the WordEngine's reduction: balls are
enumerated with the heap-of-pieces (piling) reduction, words are compared with
an exhaustive rewrite search or, for right-angled Coxeter groups, with exact
integer matrices of the geometric representation. The verification campaign
checks the parabolic intersection theorem against these brute-force answers.
"""

import logging
import random
from collections import deque
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import reduce as fold
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from app.services.coxeter import CoxeterGroup, CoxWord
from app.services.errors import (
    BallCapExceeded,
    InvariantViolation,
    NotRightAngledError,
    SearchBoundExceeded,
)
from app.services.geometry import render_graph
from app.services.parabolic import ParabolicDesc, ParabolicService
from app.services.presentation import INF, CoxeterSpec, GroupSpec, Types
from app.services.words import NormalForm, Syllable, WordEngine

logger = logging.getLogger(__name__)

DEFAULT_BALL_CAP = 200000
DEFAULT_EXPONENT_BOUND = 2
DEFAULT_ORACLE_BOUND = 12
DEFAULT_ORACLE_STATES = 500000

BEAD = 'bead'
MARKER = 'marker'


def _normalize(spec: GroupSpec, gen: int, exp: int) -> int:
    order = spec.order(gen)
    return exp if order == INF else exp % int(order)


def _invert_word(word: Sequence[Syllable]) -> Tuple[Syllable, ...]:
    return tuple(Syllable(s.gen, -s.exp) for s in reversed(word))


# ---------------------------------------------------------------------------
# Independent reductions
# ---------------------------------------------------------------------------

def piling_reduce(word: Iterable[Syllable], spec: GroupSpec) -> NormalForm:
    """
    Normal form by piling syllables as beads on one column per generator.

    A bead of type g also drops a marker on the column of every generator not
    commuting with g. A new g-syllable merges with the top of column g when
    that is a bead: nothing blocking g has been piled since. Reading the piles
    from the bottom, always taking the smallest generator whose column starts
    with a bead, gives the lexicographically least reduced form.
    """
    n = spec.n
    blockers = [[t for t in range(n) if t != g and not spec.commutes(t, g)] for g in range(n)]
    piles: List[deque] = [deque() for _ in range(n)]
    beads: Dict[int, int] = {}
    next_bead = 0

    for syllable in word:
        gen = syllable.gen
        exp = _normalize(spec, gen, syllable.exp)
        if exp == 0:
            continue
        column = piles[gen]
        if column and column[-1] != MARKER:
            _, bead = column[-1]
            merged = _normalize(spec, gen, beads[bead] + exp)
            if merged:
                beads[bead] = merged
            else:
                column.pop()
                for t in blockers[gen]:
                    piles[t].pop()
                del beads[bead]
            continue
        beads[next_bead] = exp
        column.append((BEAD, next_bead))
        for t in blockers[gen]:
            piles[t].append(MARKER)
        next_bead += 1

    out = []
    while True:
        free = [g for g in range(n) if piles[g] and piles[g][0] != MARKER]
        if not free:
            break
        g = min(free)
        _, bead = piles[g].popleft()
        for t in blockers[g]:
            piles[t].popleft()
        out.append(Syllable(g, beads[bead]))

    if any(piles):
        raise InvariantViolation("Piles not empty after reading the normal form")
    return NormalForm(tuple(out))


def _rewrites(state: Tuple[Tuple[int, int], ...], spec: GroupSpec):
    for i in range(len(state) - 1):
        (g, a), (h, b) = state[i], state[i + 1]
        if g == h:
            merged = _normalize(spec, g, a + b)
            middle = ((g, merged),) if merged else ()
            yield state[:i] + middle + state[i + 2:]
        elif spec.commutes(g, h):
            yield state[:i] + ((h, b), (g, a)) + state[i + 2:]


def oracle_reduce(word: Sequence[Syllable], spec: GroupSpec, bound: int = DEFAULT_ORACLE_BOUND,
                  max_states: int = DEFAULT_ORACLE_STATES) -> NormalForm:
    """ShortLex-least shortest word reachable by commuting swaps and merges"""
    if len(word) > bound:
        raise SearchBoundExceeded(f"Word of length {len(word)} exceeds the oracle search bound {bound}")

    start = tuple((s.gen, _normalize(spec, s.gen, s.exp)) for s in word
                  if _normalize(spec, s.gen, s.exp) != 0)
    seen = {start}
    queue = deque([start])
    best = start
    while queue:
        state = queue.popleft()
        if (len(state), state) < (len(best), best):
            best = state
        for rewritten in _rewrites(state, spec):
            if rewritten not in seen:
                seen.add(rewritten)
                queue.append(rewritten)
        if len(seen) > max_states:
            raise SearchBoundExceeded(f"Oracle rewrite search exceeded {max_states} states")
    logger.debug(f"oracle_reduce explored {len(seen)} words")
    return NormalForm(tuple(Syllable(g, e) for g, e in best))


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """Elements of syllable length <= radius with the chamber-graph edges among them"""
    radius: int
    elements: Tuple[NormalForm, ...]
    edges: Tuple[Tuple[NormalForm, NormalForm, Syllable], ...]
    layers: Tuple[int, ...]
    members: FrozenSet[NormalForm] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'members', frozenset(self.elements))

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.members

    @property
    def saturated(self) -> bool:
        return len(self.layers) > 1 and self.layers[-1] == 0

    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.elements)
        for x, y, step in self.edges:
            graph.add_edge(x, y, type=step.gen, exp=step.exp)
        return graph


def _shortlex(x: NormalForm):
    return len(x.syllables), tuple((s.gen, s.exp) for s in x.syllables)


def _steps(spec: GroupSpec, types: Iterable[int], exponent_bound: int) -> List[Syllable]:
    steps = []
    for s in sorted(types):
        if spec.order(s) == INF:
            steps.extend(Syllable(s, a) for k in range(1, exponent_bound + 1) for a in (k, -k))
        else:
            steps.extend(Syllable(s, a) for a in range(1, int(spec.order(s))))
    return steps


def _bfs_ball(spec: GroupSpec, types: Iterable[int], radius: int, cap: int, exponent_bound: int) -> Ball:
    if radius < 0:
        raise ValueError(f"Ball radius must be >= 0, got {radius}")
    types = sorted(types)
    steps = _steps(spec, types, exponent_bound)
    origin = NormalForm()
    depth = {origin: 0}
    frontier = [origin]
    layers = [1]
    adjacency: Set[Tuple[NormalForm, NormalForm, Syllable]] = set()

    for level in range(1, radius + 1):
        next_frontier = []
        for x in frontier:
            for step in steps:
                y = piling_reduce(x.syllables + (step,), spec)
                if any(spec.order(s.gen) == INF and abs(s.exp) > exponent_bound for s in y.syllables):
                    continue
                if y not in depth:
                    if len(y) != level:
                        raise InvariantViolation(
                            f"BFS depth {level} differs from syllable length {len(y)}")
                    depth[y] = level
                    next_frontier.append(y)
                    if len(depth) > cap:
                        raise BallCapExceeded(f"Ball of radius {radius} exceeds the cap of {cap} elements")
        layers.append(len(next_frontier))
        frontier = next_frontier
        if not frontier:
            logger.debug(f"Ball saturated at radius {level - 1} with {len(depth)} elements")
            break

    # chambers sharing an s-panel are pairwise s-adjacent
    panels: Dict[Tuple[int, NormalForm], List[Tuple[NormalForm, int]]] = {}
    for x in depth:
        tail = {}
        for k, syllable in enumerate(x.syllables):
            if all(spec.commutes(later.gen, syllable.gen) for later in x.syllables[k + 1:]):
                tail[syllable.gen] = syllable.exp
        for s in sorted(types):
            exp = tail.get(s, 0)
            anchor = piling_reduce(x.syllables + (Syllable(s, -exp),), spec) if exp else x
            panels.setdefault((s, anchor), []).append((x, exp))
    for (s, _), members in panels.items():
        members.sort(key=lambda m: _shortlex(m[0]))
        for (x, a), (y, b) in combinations(members, 2):
            adjacency.add((x, y, Syllable(s, _normalize(spec, s, b - a))))

    elements = tuple(sorted(depth, key=_shortlex))
    edges = tuple(sorted(adjacency, key=lambda e: (_shortlex(e[0]), _shortlex(e[1]))))
    return Ball(radius, elements, edges, tuple(layers))


def enumerate_ball(spec: GroupSpec, radius: int, cap: int = DEFAULT_BALL_CAP,
                   exponent_bound: int = DEFAULT_EXPONENT_BOUND) -> Ball:
    ball = _bfs_ball(spec, range(spec.n), radius, cap, exponent_bound)
    logger.info(f"Enumerated ball of radius {radius}: {len(ball)} elements, layers {list(ball.layers)}")
    return ball


def enumerate_subgroup_ball(spec: GroupSpec, types: Types, radius: int, cap: int = DEFAULT_BALL_CAP,
                            exponent_bound: int = DEFAULT_EXPONENT_BOUND) -> Ball:
    return _bfs_ball(spec, types, radius, cap, exponent_bound)


def layers_monotone_under_edges(spec: GroupSpec, radius: int = 2,
                                exponent_bound: int = DEFAULT_EXPONENT_BOUND) -> bool:
    """Sanity check: adding a commutation edge should never grow a ball layer"""
    base = enumerate_subgroup_ball(spec, spec.all_types(), radius, exponent_bound=exponent_bound).layers
    monotone = True
    for i in range(spec.n):
        for j in range(i + 1, spec.n):
            if spec.commutes(i, j):
                continue
            denser = GroupSpec(spec.generators, spec.orders, spec.edges | {(i, j)})
            layers = enumerate_subgroup_ball(denser, denser.all_types(), radius, exponent_bound=exponent_bound).layers
            if any(b > a for a, b in zip(base, layers)):
                logger.warning(f"Layer sizes grew after adding edge {spec.name(i)}-{spec.name(j)}: "
                               f"{list(base)} -> {list(layers)}")
                monotone = False
    return monotone


# ---------------------------------------------------------------------------
# Right-angled Coxeter groups as integer matrices
# ---------------------------------------------------------------------------

def racg_matrix_rep(spec: CoxeterSpec) -> List[np.ndarray]:
    """Generator matrices of the geometric representation, exact integers"""
    if not spec.is_right_angled():
        raise NotRightAngledError("The integer geometric representation needs every m(s,t) in {2, inf}")
    matrices = []
    for i in range(spec.n):
        sigma = np.identity(spec.n, dtype=object)
        for j in range(spec.n):
            if j == i:
                sigma[i, j] = -1
            elif spec.m(i, j) == INF:
                sigma[i, j] = 2
        matrices.append(sigma)
    return matrices


def racg_word_matrix(matrices: List[np.ndarray], letters: Iterable[int]) -> np.ndarray:
    identity = np.identity(matrices[0].shape[0], dtype=object)
    return fold(lambda acc, s: acc @ matrices[s], letters, identity)


# ---------------------------------------------------------------------------
# Coxeter balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoxBall:
    radius: int
    elements: Tuple[CoxWord, ...]
    layers: Tuple[int, ...]
    table: Dict[Tuple[CoxWord, int], CoxWord] = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def saturated(self) -> bool:
        return len(self.layers) > 1 and self.layers[-1] == 0

    def export(self, group: CoxeterGroup, fmt: str = 'dot') -> str:
        """Cayley graph of the ball as DOT or JSON"""
        ids = {w: k for k, w in enumerate(self.elements)}
        edges = sorted({(min(ids[x], ids[y]), max(ids[x], ids[y]), group.spec.name(s), 1)
                        for (x, s), y in self.table.items() if x in ids and y in ids})
        return render_graph([group.format_word(w) for w in self.elements],
                            [len(w) for w in self.elements], edges, fmt)

    def product(self, group: CoxeterGroup, x: CoxWord, letters: Iterable[int]) -> CoxWord:
        """x * letters, through the multiplication table while it stays inside the ball"""
        for s in letters:
            y = self.table.get((x, s))
            x = y if y is not None else group.multiply(x, (s,))
        return x


def cox_enumerate_ball(group: CoxeterGroup, radius: int, cap: int = DEFAULT_BALL_CAP,
                       types: Optional[Iterable[int]] = None) -> CoxBall:
    letters = sorted(types) if types is not None else list(range(group.spec.n))
    seen = {(): 0}
    frontier: List[CoxWord] = [()]
    layers = [1]
    table: Dict[Tuple[CoxWord, int], CoxWord] = {}
    for level in range(1, radius + 1):
        next_frontier = []
        for x in frontier:
            for s in letters:
                y = group.multiply(x, (s,))
                table[(x, s)] = y
                if y not in seen:
                    seen[y] = level
                    next_frontier.append(y)
                    if len(seen) > cap:
                        raise BallCapExceeded(f"Coxeter ball of radius {radius} exceeds the cap of {cap}")
        layers.append(len(next_frontier))
        frontier = next_frontier
        if not frontier:
            break
    for x in frontier:
        for s in letters:
            table[(x, s)] = group.multiply(x, (s,))
    elements = tuple(sorted(seen, key=lambda w: (len(w), w)))
    return CoxBall(radius, elements, tuple(layers), table)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    spec_name: str
    first: str
    gamma: str
    second: str
    radius: int
    missing: List[str] = field(default_factory=list)
    extra: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.missing and not self.extra

    def line(self) -> str:
        head = f"INSTANCE {self.spec_name} {self.first} {self.gamma} {self.second} {self.radius}"
        if self.ok:
            return f"{head} OK"
        witness = (self.missing + self.extra)[0]
        return f"{head} FAIL witness={witness}"


def _token(text: str) -> str:
    return text.replace(' ', '.')


def _conjugated_subgroup(spec: GroupSpec, desc: ParabolicDesc, radius: int, cap: int,
                         exponent_bound: int) -> Set[NormalForm]:
    """
    Members of conjugator * Gamma_K * conjugator^-1 up to the given radius.

    The conjugator must be right-K-reduced: then every syllable of g survives in
    conjugator * g * conjugator^-1, so the K-ball of the same radius and exponent
    bound covers the members of the ball.
    """
    conjugator = desc.conjugator.syllables
    inverse = _invert_word(conjugator)
    subgroup = enumerate_subgroup_ball(spec, desc.types, radius, cap, exponent_bound)
    return {piling_reduce(conjugator + g.syllables + inverse, spec) for g in subgroup.elements}


def verify_instance(service: ParabolicService, first: ParabolicDesc, second: ParabolicDesc,
                    radius: int, ball: Optional[Ball] = None, spec_name: str = 'spec',
                    cap: int = DEFAULT_BALL_CAP) -> VerifyReport:
    """Compare the theorem's answer with enumerated subgroup members on a ball"""
    spec = service.spec
    engine = service.engine
    if ball is None:
        ball = enumerate_ball(spec, radius, cap, service.exponent_bound)
    first = ParabolicDesc.of(engine, first.conjugator, first.types)
    second = ParabolicDesc.of(engine, second.conjugator, second.types)
    members_first = _conjugated_subgroup(spec, first, radius, cap, service.exponent_bound)
    members_second = _conjugated_subgroup(spec, second, radius, cap, service.exponent_bound)

    result = service.intersect_parabolics(first, second)
    first_token = spec.format_types(first.types)
    if not first.conjugator.is_identity:
        first_token = f"{_token(engine.format_word(first.conjugator))}:{first_token}"
    report = VerifyReport(spec_name, first_token, _token(engine.format_word(second.conjugator)),
                          spec.format_types(second.types), radius)

    for w in ball.elements:
        if len(w) > radius:
            continue
        lhs = w in members_first and w in members_second
        rhs = service.member_of_parabolic(w, result)
        if lhs and not rhs:
            report.missing.append(_token(engine.format_word(w)))
        elif rhs and not lhs:
            report.extra.append(_token(engine.format_word(w)))
    if not report.ok:
        logger.error(f"Verification failed: {report.line()}")
    return report


def cox_verify_instance(group: CoxeterGroup, left: Types, w: CoxWord, right: Types, radius: int,
                        ball: Optional[CoxBall] = None, spec_name: str = 'spec',
                        cap: int = DEFAULT_BALL_CAP) -> VerifyReport:
    """W_I n w W_J w^-1 by enumeration of W_I and W_J against the intersection theorem"""
    spec = group.spec
    w = group.reduce(w)
    if ball is None:
        ball = cox_enumerate_ball(group, radius, cap)
    subgroup_left = set(cox_enumerate_ball(group, radius, cap, left).elements)
    subgroup_right = set(cox_enumerate_ball(group, radius + 2 * len(w), cap, right).elements)
    w_inverse = group.inverse(w)

    result = group.intersect(left, w, right)
    c_inverse = group.inverse(result.conjugator)
    report = VerifyReport(spec_name, spec.format_types(left), _token(group.format_word(w)),
                          spec.format_types(right), radius)
    for x in ball.elements:
        if len(x) > radius:
            continue
        lhs = x in subgroup_left and ball.product(group, w_inverse, x + w) in subgroup_right
        local = ball.product(group, c_inverse, x + result.conjugator)
        rhs = set(local) <= result.types
        if lhs and not rhs:
            report.missing.append(_token(group.format_word(x)))
        elif rhs and not lhs:
            report.extra.append(_token(group.format_word(x)))
    if not report.ok:
        logger.error(f"Verification failed: {report.line()}")
    return report


def _random_types(rng: random.Random, n: int) -> FrozenSet[int]:
    return frozenset(i for i in range(n) if rng.random() < 0.5)


def run_campaign(specs: Sequence[Tuple[str, GroupSpec]], trials: int, radius: int, seed: int,
                 workers: int = 4, cap: int = DEFAULT_BALL_CAP,
                 exponent_bound: int = DEFAULT_EXPONENT_BOUND) -> List[VerifyReport]:
    """Seeded random instances Gamma_I n gamma Gamma_J gamma^-1, verified concurrently"""
    rng = random.Random(seed)
    jobs = []
    for name, spec in specs:
        service = ParabolicService(WordEngine(spec), exponent_bound)
        ball = enumerate_ball(spec, radius, cap, exponent_bound)
        layers_monotone_under_edges(spec, min(radius, 2), exponent_bound)
        pool = [x for x in ball.elements if len(x) <= 2]
        for _ in range(trials):
            first = ParabolicDesc.of(service.engine, NormalForm(), _random_types(rng, spec.n))
            second = ParabolicDesc.of(service.engine, rng.choice(pool), _random_types(rng, spec.n))
            jobs.append((name, service, ball, first, second))
    return run_instances(jobs, radius, workers)


def run_instances(jobs, radius: int, workers: int = 4) -> List[VerifyReport]:
    """jobs: (spec_name, service, ball, first, second) tuples"""
    reports = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_job = {
            executor.submit(verify_instance, service, first, second, radius, ball, name): name
            for name, service, ball, first, second in jobs
        }
        for future in as_completed(future_to_job):
            try:
                reports.append(future.result())
            except Exception as e:
                logger.error(f"Instance on {future_to_job[future]} raised: {str(e)}")
                raise
    reports.sort(key=lambda r: r.line())
    failures = sum(1 for r in reports if not r.ok)
    logger.info(f"Campaign finished: {len(reports)} instances, {failures} failures")
    return reports


def cox_run_campaign(spec_name: str, group: CoxeterGroup, trials: int, radius: int, seed: int,
                     workers: int = 4, cap: int = DEFAULT_BALL_CAP) -> List[VerifyReport]:
    rng = random.Random(seed)
    ball = cox_enumerate_ball(group, radius, cap)
    pool = [x for x in ball.elements if len(x) <= 3]
    instances = [(_random_types(rng, group.spec.n), rng.choice(pool), _random_types(rng, group.spec.n))
                 for _ in range(trials)]
    reports = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(cox_verify_instance, group, left, w, right, radius, ball, spec_name)
                   for left, w, right in instances]
        for future in as_completed(futures):
            reports.append(future.result())
    reports.sort(key=lambda r: r.line())
    logger.info(f"Coxeter campaign finished: {len(reports)} instances, "
                f"{sum(1 for r in reports if not r.ok)} failures")
    return reports
