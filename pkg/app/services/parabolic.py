"""
Parabolic subgroups and sectors of graph products

Implements the intersection theorem for parabolic subgroups,
    Gamma_I  n  gamma Gamma_J gamma^-1  =  gamma_I Gamma_K gamma_I^-1,
where gamma = gamma_I d gamma_J is the double-coset normalization and K is the
set of s in I n J commuting with d. The same normalization gives the
projection C+ of the sector gamma Sigma_J onto Sigma_I, itself a sector.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

from app.services.errors import ParabolicsError, SpecMismatchError
from app.services.geometry import ChamberGeometry, WallId
from app.services.presentation import INF, Types
from app.services.words import IDENTITY, Chamber, NormalForm, WordEngine, shortlex_key

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SectorRef:
    """The I-sector gamma Sigma_I; base is the shortest element of gamma Gamma_I"""
    base: Chamber
    types: Types

    @classmethod
    def of(cls, engine: WordEngine, base: Chamber, types: Iterable[int]) -> 'SectorRef':
        types = frozenset(types)
        canonical, _ = engine.right_coset_minimize(base, types)
        return cls(canonical, types)


@dataclass(frozen=True)
class ParabolicDesc:
    """The parabolic subgroup conjugator * Gamma_K * conjugator^-1"""
    conjugator: NormalForm
    types: Types

    @classmethod
    def of(cls, engine: WordEngine, conjugator: NormalForm, types: Iterable[int]) -> 'ParabolicDesc':
        types = frozenset(types)
        canonical, _ = engine.right_coset_minimize(conjugator, types)
        return cls(canonical, types)


class ParabolicService:
    def __init__(self, engine: WordEngine, exponent_bound: int = 2, cache_size: int = 100000):
        self.engine = engine
        self.spec = engine.spec
        self.geometry = ChamberGeometry(engine)
        self.exponent_bound = exponent_bound
        self.cache: Dict[tuple, object] = {}
        self.cache_size = cache_size
        logger.info(f"ParabolicService ready (exponent bound {exponent_bound})")

    def _remember(self, key: tuple, value):
        if len(self.cache) >= self.cache_size:
            logger.debug("ParabolicService cache full, clearing")
            self.cache.clear()
        self.cache[key] = value
        return value

    # -- normalization -----------------------------------------------------

    def coset_minimize(self, gamma: NormalForm, types: Types, side: str = 'left') -> Tuple[NormalForm, NormalForm]:
        """
        Returns (g, d) with g in Gamma_I and d the shortest element of the coset.
        side='left':  gamma = g d, d without left descent in I
        side='right': gamma = d g, d without right descent in I
        """
        if side == 'left':
            return self.engine.i_prefix(gamma, types)
        if side == 'right':
            d, g = self.engine.right_coset_minimize(gamma, types)
            return g, d
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def double_coset_minimize(self, gamma: NormalForm, left: Types,
                              right: Types) -> Tuple[NormalForm, NormalForm, NormalForm]:
        key = ('dcm', gamma, frozenset(left), frozenset(right))
        cached = self.cache.get(key)
        if cached is None:
            cached = self._remember(key, self.engine.double_coset_minimize(gamma, frozenset(left), frozenset(right)))
        return cached

    def commuting_K(self, d: NormalForm, left: Types, right: Types) -> Types:
        candidates = sorted(set(left) & set(right))
        return frozenset(s for s in candidates if self.engine.commute(self.engine.element(s), d))

    # -- the intersection theorem -----------------------------------------

    def _check(self, desc: ParabolicDesc):
        gens = set(desc.types) | desc.conjugator.types()
        if any(not 0 <= s < self.spec.n for s in gens):
            raise SpecMismatchError(
                f"Parabolic descriptor refers to generators outside {self.spec.format_types(self.spec.all_types())}")

    def intersect_parabolics(self, first: ParabolicDesc, second: ParabolicDesc) -> ParabolicDesc:
        self._check(first)
        self._check(second)
        gamma = self.engine.multiply(self.engine.invert(first.conjugator), second.conjugator)
        gamma_i, d, _ = self.double_coset_minimize(gamma, first.types, second.types)
        k = self.commuting_K(d, first.types, second.types)
        result = ParabolicDesc.of(self.engine, self.engine.multiply(first.conjugator, gamma_i), k)
        logger.debug(f"Intersection: d={self.engine.format_word(d)} K={self.spec.format_types(k)}")
        return result

    def member_of_parabolic(self, w: NormalForm, desc: ParabolicDesc) -> bool:
        conjugated = self.engine.conjugate(self.engine.invert(desc.conjugator), w)
        return self.engine.in_subgroup(conjugated, desc.types)

    # -- sectors -----------------------------------------------------------

    def c_plus(self, left: Types, gamma: NormalForm, right: Types) -> SectorRef:
        """proj onto Sigma_I of the sector gamma Sigma_J"""
        gamma_i, d, _ = self.double_coset_minimize(gamma, left, right)
        return SectorRef.of(self.engine, gamma_i, self.commuting_K(d, left, right))

    def c_minus(self, left: Types, gamma: NormalForm, right: Types) -> SectorRef:
        """proj onto gamma Sigma_J of Sigma_I"""
        mirrored = self.c_plus(right, self.engine.invert(gamma), left)
        return SectorRef.of(self.engine, self.engine.multiply(gamma, mirrored.base), mirrored.types)

    def _steps(self, types: Types) -> List[NormalForm]:
        steps = []
        for s in sorted(types):
            order = self.spec.order(s)
            if order == INF:
                exponents = [a for k in range(1, self.exponent_bound + 1) for a in (k, -k)]
            else:
                exponents = range(1, int(order))
            steps.extend(self.engine.element(s, a) for a in exponents)
        return steps

    def _bounded(self, x: NormalForm) -> bool:
        return all(self.spec.order(s.gen) != INF or abs(s.exp) <= self.exponent_bound for s in x.syllables)

    def sector_members(self, sector: SectorRef, radius: int) -> List[Chamber]:
        """Chambers of the sector within gallery distance `radius` of its base"""
        key = ('members', sector.types, radius)
        members = self.cache.get(key)
        if members is None:
            steps = self._steps(sector.types)
            seen: Set[NormalForm] = {IDENTITY}
            queue = deque([IDENTITY])
            while queue:
                x = queue.popleft()
                if len(x) >= radius:
                    continue
                for step in steps:
                    y = self.engine.multiply(x, step)
                    if y not in seen and self._bounded(y):
                        seen.add(y)
                        queue.append(y)
            members = self._remember(key, sorted(seen, key=shortlex_key))
        return [self.engine.multiply(sector.base, g) for g in members]

    def sector_recognize(self, chambers: Iterable[Chamber]) -> Optional[Tuple[SectorRef, int]]:
        """Recognize a finite chamber set as a metric ball of a sector around its base"""
        chambers = set(chambers)
        if not chambers:
            raise ParabolicsError("Cannot recognize an empty chamber set")
        base = min(chambers, key=shortlex_key)
        inverse = self.engine.invert(base)
        relative = {self.engine.multiply(inverse, c) for c in chambers}
        types = frozenset(x.syllables[0].gen for x in relative if len(x) == 1)
        radius = max(len(x) for x in relative)
        ball = set(self.sector_members(SectorRef(IDENTITY, types), radius))
        if relative != ball:
            logger.debug(f"Chamber set is not a sector ball (|C|={len(relative)}, |ball|={len(ball)})")
            return None
        return SectorRef.of(self.engine, base, types), radius

    def stabilizer_generators(self, chambers: Iterable[Chamber]) -> List[NormalForm]:
        """One rotation around every wall crossing the chamber set"""
        ordered = sorted(set(chambers), key=shortlex_key)
        walls: Set[WallId] = set()
        for i, x in enumerate(ordered):
            for y in ordered[i + 1:]:
                if self.engine.adjacency_witness(x, y) is not None:
                    walls.add(self.geometry.wall_between(x, y))
        return sorted({self.geometry.rotation(wall) for wall in walls}, key=shortlex_key)

    # -- conversions and text ----------------------------------------------

    def sector_of(self, desc: ParabolicDesc) -> SectorRef:
        return SectorRef.of(self.engine, desc.conjugator, desc.types)

    def parabolic_of(self, sector: SectorRef) -> ParabolicDesc:
        return ParabolicDesc.of(self.engine, sector.base, sector.types)

    def parse_parabolic(self, text: str) -> ParabolicDesc:
        """'<conjugator word>,<types>' e.g. 'c,{a,b}'"""
        conjugator, _, types = text.partition(',')
        return ParabolicDesc.of(self.engine, self.engine.parse_word(conjugator or 'e'),
                                self.spec.parse_types(types))

    def format_parabolic(self, desc: ParabolicDesc) -> str:
        return f"conjugator={self.engine.format_word(desc.conjugator)} types={self.spec.format_types(desc.types)}"

    def format_sector(self, sector: SectorRef) -> str:
        return f"base={self.engine.format_word(sector.base)} types={self.spec.format_types(sector.types)}"
