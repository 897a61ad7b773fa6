"""
Coxeter groups with arbitrary Coxeter matrices

The word problem is solved with Tits' theorem: two reduced words represent the
same element iff they are related by braid moves. A canonical word is the
lexicographically least member of its braid orbit; reduced words are grown one
letter at a time, cancelling a letter whenever it is a right descent.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

from app.services.errors import SpecMismatchError, WordSyntaxError
from app.services.presentation import IDENTITY_TOKEN, INF, CoxeterSpec, Types
from app.services.words import TOKEN_PATTERN

logger = logging.getLogger(__name__)

CoxWord = Tuple[int, ...]

PLUS = 'plus'
MINUS = 'minus'


@dataclass(frozen=True)
class Reflection:
    """A conjugate w s w^-1 of a generator, stored as its canonical reduced word"""
    element: CoxWord


@dataclass(frozen=True)
class CoxParabolic:
    """conjugator * W_K * conjugator^-1, conjugator shortest in conjugator * W_K"""
    conjugator: CoxWord
    types: Types


def _alternating(s: int, t: int, m: int) -> CoxWord:
    return tuple(s if k % 2 == 0 else t for k in range(m))


class CoxeterGroup:
    """Word problem, descents, coset normalization and parabolic intersections in (W, S)"""

    def __init__(self, spec: CoxeterSpec, cache_size: int = 200000):
        self.spec = spec
        self.cache: Dict[CoxWord, FrozenSet[CoxWord]] = {}
        self.products: Dict[Tuple[CoxWord, int], CoxWord] = {}
        self.cache_size = cache_size
        logger.info(f"CoxeterGroup ready for generators {','.join(spec.generators)}")

    # -- word problem ------------------------------------------------------

    def _braid_moves(self, word: CoxWord):
        for i in range(len(word) - 1):
            s, t = word[i], word[i + 1]
            m = self.spec.m(s, t)
            if s == t or m == INF:
                continue
            m = int(m)
            if word[i:i + m] == _alternating(s, t, m):
                yield word[:i] + _alternating(t, s, m) + word[i + m:]

    def _orbit(self, word: CoxWord) -> FrozenSet[CoxWord]:
        """All reduced words of the element represented by a reduced word"""
        cached = self.cache.get(word)
        if cached is not None:
            return cached
        seen = {word}
        queue = deque([word])
        while queue:
            for moved in self._braid_moves(queue.popleft()):
                if moved not in seen:
                    seen.add(moved)
                    queue.append(moved)
        orbit = frozenset(seen)
        if len(self.cache) + len(orbit) > self.cache_size:
            logger.debug("CoxeterGroup orbit cache full, clearing")
            self.cache.clear()
            self.products.clear()
        for member in orbit:
            self.cache[member] = orbit
        return orbit

    def _canonical(self, reduced: CoxWord) -> CoxWord:
        return min(self._orbit(reduced))

    def _append(self, canonical: CoxWord, s: int) -> CoxWord:
        key = (canonical, s)
        cached = self.products.get(key)
        if cached is not None:
            return cached
        enders = [u for u in self._orbit(canonical) if u and u[-1] == s]
        if enders:
            result = self._canonical(min(enders)[:-1])
        else:
            result = self._canonical(canonical + (s,))
        self.products[key] = result
        return result

    def reduce(self, word: Iterable[int]) -> CoxWord:
        result: CoxWord = ()
        for s in word:
            if not 0 <= s < self.spec.n:
                raise SpecMismatchError(f"Letter {s} is not a generator index of this Coxeter system")
            result = self._append(result, s)
        return result

    # -- group law ---------------------------------------------------------

    def length(self, w: Iterable[int]) -> int:
        return len(self.reduce(w))

    def multiply(self, *words: Iterable[int]) -> CoxWord:
        result: CoxWord = ()
        for word in words:
            for s in word:
                result = self._append(result, s)
        return result

    def inverse(self, w: Iterable[int]) -> CoxWord:
        return self.reduce(reversed(tuple(w)))

    def conjugate(self, g: CoxWord, w: CoxWord) -> CoxWord:
        return self.multiply(g, w, self.inverse(g))

    def distance(self, x: CoxWord, y: CoxWord) -> int:
        return len(self.multiply(self.inverse(x), y))

    def left_descents(self, w: CoxWord) -> Set[int]:
        return {u[0] for u in self._orbit(self.reduce(w)) if u}

    def right_descents(self, w: CoxWord) -> Set[int]:
        return {u[-1] for u in self._orbit(self.reduce(w)) if u}

    # -- cosets and parabolics ---------------------------------------------

    def coset_minimize(self, w: CoxWord, types: Types, side: str = 'left') -> Tuple[CoxWord, CoxWord]:
        """(g, d) with g in W_I; side='left' means w = g d, side='right' means w = d g"""
        d = self.reduce(w)
        stripped: List[int] = []
        while True:
            descents = self.left_descents(d) if side == 'left' else self.right_descents(d)
            candidates = sorted(descents & set(types))
            if not candidates:
                break
            s = candidates[0]
            if side == 'left':
                d = self.multiply((s,), d)
                stripped.append(s)
            else:
                d = self.multiply(d, (s,))
                stripped.insert(0, s)
        return self.reduce(stripped), d

    def double_coset_minimize(self, w: CoxWord, left: Types, right: Types) -> Tuple[CoxWord, CoxWord, CoxWord]:
        left_parts: List[CoxWord] = []
        right_parts: List[CoxWord] = []
        d = self.reduce(w)
        while True:
            prefix, d = self.coset_minimize(d, left, 'left')
            suffix, d = self.coset_minimize(d, right, 'right')
            left_parts.append(prefix)
            right_parts.insert(0, suffix)
            if not prefix and not suffix:
                break
        return self.multiply(*left_parts), d, self.multiply(*right_parts)

    def cox_K(self, d: CoxWord, left: Types, right: Types) -> Types:
        """{s in I : s = d r d^-1 for some r in J}"""
        conjugates = {self.conjugate(d, (r,)) for r in right}
        return frozenset(s for s in left if (s,) in conjugates)

    def parabolic(self, conjugator: CoxWord, types: Iterable[int]) -> CoxParabolic:
        types = frozenset(types)
        _, canonical = self.coset_minimize(conjugator, types, 'right')
        return CoxParabolic(canonical, types)

    def intersect(self, left: Types, w: CoxWord, right: Types) -> CoxParabolic:
        """W_I n w W_J w^-1 as conjugator * W_K * conjugator^-1"""
        w_i, d, _ = self.double_coset_minimize(w, left, right)
        k = self.cox_K(d, left, right)
        logger.debug(f"Coxeter intersection: d={self.format_word(d)} K={self.spec.format_types(k)}")
        return self.parabolic(w_i, k)

    def intersect_parabolics(self, first: CoxParabolic, second: CoxParabolic) -> CoxParabolic:
        w = self.multiply(self.inverse(first.conjugator), second.conjugator)
        local = self.intersect(first.types, w, second.types)
        return self.parabolic(self.multiply(first.conjugator, local.conjugator), local.types)

    def member_of_parabolic(self, w: CoxWord, desc: CoxParabolic) -> bool:
        conjugated = self.conjugate(self.inverse(desc.conjugator), w)
        return set(conjugated) <= desc.types

    # -- reflections -------------------------------------------------------

    def reflection(self, w: CoxWord, s: int) -> Reflection:
        return Reflection(self.conjugate(self.reduce(w), (s,)))

    def reflection_side(self, t: Reflection, w: CoxWord) -> str:
        return PLUS if self.length(t.element + tuple(w)) > self.length(w) else MINUS

    def reflections_between(self, x: CoxWord, y: CoxWord) -> List[Reflection]:
        """Reflections crossed by the minimal gallery following the canonical word of x^-1 y"""
        current = self.reduce(x)
        crossed = []
        for s in self.multiply(self.inverse(x), y):
            crossed.append(self.reflection(current, s))
            current = self.multiply(current, (s,))
        return crossed

    # -- text --------------------------------------------------------------

    def parse_raw_word(self, text: str) -> CoxWord:
        letters: List[int] = []
        for token in text.split():
            if token == IDENTITY_TOKEN:
                continue
            match = TOKEN_PATTERN.match(token)
            if not match:
                raise WordSyntaxError(f"Invalid word token {token!r}")
            name, power = match.group(1), match.group(2)
            if name not in self.spec.generators:
                raise WordSyntaxError(f"Unknown generator {name!r} in word")
            # letters are involutions
            if power is None or int(power) % 2:
                letters.append(self.spec.index(name))
        return tuple(letters)

    def parse_word(self, text: str) -> CoxWord:
        return self.reduce(self.parse_raw_word(text))

    def format_word(self, w: Iterable[int]) -> str:
        names = [self.spec.name(s) for s in w]
        return ' '.join(names) if names else IDENTITY_TOKEN

    def parse_parabolic(self, text: str) -> CoxParabolic:
        conjugator, _, types = text.partition(',')
        return self.parabolic(self.parse_word(conjugator or 'e'), self.spec.parse_types(types))

    def format_parabolic(self, desc: CoxParabolic) -> str:
        return f"conjugator={self.format_word(desc.conjugator)} types={self.spec.format_types(desc.types)}"
