"""
Word engine for graph products of cyclic groups

Elements are handled as syllable normal forms. A chamber of the chamber system
C(Gamma, {e}, {G_i}) is identified with the group element it is the image of
the base chamber under, so Chamber and NormalForm are the same type here.
"""

import logging
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from app.services.errors import ExponentOverflowError, GalleryError, WordSyntaxError
from app.services.presentation import IDENTITY_TOKEN, INF, GroupSpec

if TYPE_CHECKING:
    from app.services.parabolic import SectorRef

logger = logging.getLogger(__name__)

MAX_EXPONENT = 2 ** 63 - 1
TOKEN_PATTERN = re.compile(r'^([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?$')


@dataclass(frozen=True, order=True)
class Syllable:
    """A power s_gen^exp of a single generator"""
    gen: int
    exp: int


Word = Tuple[Syllable, ...]


@dataclass(frozen=True)
class NormalForm:
    """Canonical reduced syllable sequence of a group element"""
    syllables: Tuple[Syllable, ...] = ()

    def __len__(self) -> int:
        return len(self.syllables)

    def __iter__(self):
        return iter(self.syllables)

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    def types(self) -> FrozenSet[int]:
        return frozenset(s.gen for s in self.syllables)


Chamber = NormalForm
IDENTITY = NormalForm()


def shortlex_key(x: NormalForm):
    """Deterministic ordering of elements: syllable count, then generator/exponent sequence"""
    return (len(x.syllables), tuple((s.gen, s.exp) for s in x.syllables))


@dataclass(frozen=True)
class Gallery:
    """Chamber sequence with the adjacency witness c_{k+1} = c_k * s^alpha of every step"""
    chambers: Tuple[Chamber, ...]
    steps: Tuple[Syllable, ...]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def start(self) -> Chamber:
        return self.chambers[0]

    @property
    def end(self) -> Chamber:
        return self.chambers[-1]

    @classmethod
    def from_chambers(cls, engine: 'WordEngine', chambers: Sequence[Chamber]) -> 'Gallery':
        return engine.gallery(chambers)


class WordEngine:
    """Normal forms, group law, gallery metric and coset prefixes for one GroupSpec"""

    def __init__(self, spec: GroupSpec, cache_size: int = 100000):
        self.spec = spec
        self.cache: Dict[Word, NormalForm] = {}
        self.cache_size = cache_size
        logger.debug(f"WordEngine ready for generators {','.join(spec.generators)}")

    # -- syllables ---------------------------------------------------------

    def syllable(self, gen: int, exp: int) -> Optional[Syllable]:
        """Canonical syllable for s_gen^exp, or None when the power is trivial"""
        order = self.spec.order(gen)
        if order == INF:
            if abs(exp) > MAX_EXPONENT:
                raise ExponentOverflowError(
                    f"Exponent {exp} of generator {self.spec.name(gen)} exceeds the 64-bit range")
            return Syllable(gen, exp) if exp else None
        exp %= order
        return Syllable(gen, exp) if exp else None

    def element(self, gen: int, exp: int = 1) -> NormalForm:
        syllable = self.syllable(gen, exp)
        return NormalForm((syllable,)) if syllable else IDENTITY

    # -- reduction ---------------------------------------------------------

    def _append(self, stack: List[Syllable], gen: int, exp: int):
        """Append s_gen^exp to a reduced syllable list, merging across commuting syllables"""
        incoming = self.syllable(gen, exp)
        if incoming is None:
            return
        for k in range(len(stack) - 1, -1, -1):
            current = stack[k]
            if current.gen == gen:
                merged = self.syllable(gen, current.exp + incoming.exp)
                if merged is None:
                    del stack[k]
                else:
                    stack[k] = merged
                return
            if not self.spec.commutes(current.gen, gen):
                break
        stack.append(incoming)

    def _front_movable(self, syllables: Sequence[Syllable]) -> List[int]:
        """Positions of syllables that commute with everything before them"""
        movable = []
        for k, syllable in enumerate(syllables):
            if all(self.spec.commutes(syllables[j].gen, syllable.gen) for j in range(k)):
                movable.append(k)
        return movable

    def _back_movable(self, syllables: Sequence[Syllable]) -> List[int]:
        movable = []
        last = len(syllables) - 1
        for k, syllable in enumerate(syllables):
            if all(self.spec.commutes(syllables[j].gen, syllable.gen) for j in range(k + 1, last + 1)):
                movable.append(k)
        return movable

    def _lex_form(self, syllables: Sequence[Syllable]) -> Tuple[Syllable, ...]:
        """Lexicographically least shuffle of a reduced syllable sequence"""
        remaining = list(syllables)
        ordered = []
        while remaining:
            k = min(self._front_movable(remaining), key=lambda j: remaining[j].gen)
            ordered.append(remaining.pop(k))
        return tuple(ordered)

    def reduce(self, word: Iterable[Syllable]) -> NormalForm:
        """Canonical normal form of a word; constant on the group element"""
        key = tuple(word)
        cached = self.cache.get(key)
        if cached is not None:
            return cached

        stack: List[Syllable] = []
        for syllable in key:
            if not 0 <= syllable.gen < self.spec.n:
                raise WordSyntaxError(f"Generator index {syllable.gen} out of range")
            self._append(stack, syllable.gen, syllable.exp)
        result = NormalForm(self._lex_form(stack))

        if len(self.cache) >= self.cache_size:
            logger.debug("WordEngine cache full, clearing")
            self.cache.clear()
        self.cache[key] = result
        return result

    # -- group law ---------------------------------------------------------

    def multiply(self, *elements: NormalForm) -> NormalForm:
        stack: List[Syllable] = []
        for element in elements:
            for syllable in element.syllables:
                self._append(stack, syllable.gen, syllable.exp)
        return NormalForm(self._lex_form(stack))

    def invert(self, x: NormalForm) -> NormalForm:
        return self.reduce(Syllable(s.gen, -s.exp) for s in reversed(x.syllables))

    def conjugate(self, g: NormalForm, x: NormalForm) -> NormalForm:
        """g x g^-1"""
        return self.multiply(g, x, self.invert(g))

    def commute(self, x: NormalForm, y: NormalForm) -> bool:
        return self.multiply(x, y) == self.multiply(y, x)

    # -- metric ------------------------------------------------------------

    def syllable_length(self, x: NormalForm) -> int:
        return len(x.syllables)

    def distance(self, x: Chamber, y: Chamber) -> int:
        return len(self.multiply(self.invert(x), y).syllables)

    # -- descents and prefixes ---------------------------------------------

    def left_descents(self, x: NormalForm) -> Set[Tuple[int, int]]:
        """(type, exponent) pairs such that x has a normal form starting with s^exp"""
        return {(x.syllables[k].gen, x.syllables[k].exp) for k in self._front_movable(x.syllables)}

    def right_descents(self, x: NormalForm) -> Set[Tuple[int, int]]:
        """(type, exponent) pairs such that x has a normal form ending with s^exp"""
        return {(x.syllables[k].gen, x.syllables[k].exp) for k in self._back_movable(x.syllables)}

    def _strip(self, x: NormalForm, types: FrozenSet[int], from_left: bool) -> Tuple[NormalForm, NormalForm]:
        remaining = list(x.syllables)
        stripped: List[Syllable] = []
        while True:
            positions = self._front_movable(remaining) if from_left else self._back_movable(remaining)
            candidates = [k for k in positions if remaining[k].gen in types]
            if not candidates:
                break
            k = min(candidates, key=lambda j: remaining[j].gen)
            stripped.append(remaining.pop(k))
        if not from_left:
            stripped.reverse()
        return NormalForm(self._lex_form(stripped)), NormalForm(self._lex_form(remaining))

    def i_prefix(self, x: NormalForm, types: FrozenSet[int]) -> Tuple[NormalForm, NormalForm]:
        """Split x = p r with p in Gamma_I maximal and r without left descent in I"""
        return self._strip(x, frozenset(types), from_left=True)

    def right_coset_minimize(self, x: NormalForm, types: FrozenSet[int]) -> Tuple[NormalForm, NormalForm]:
        """Split x = d g with g in Gamma_I and d without right descent in I"""
        suffix, rest = self._strip(x, frozenset(types), from_left=False)
        return rest, suffix

    def double_coset_minimize(self, x: NormalForm, left: FrozenSet[int],
                              right: FrozenSet[int]) -> Tuple[NormalForm, NormalForm, NormalForm]:
        """Split x = x_I d x_J with d the shortest element of Gamma_I x Gamma_J"""
        left_parts: List[NormalForm] = []
        right_parts: List[NormalForm] = []
        core = x
        while True:
            prefix, core = self.i_prefix(core, left)
            core, suffix = self.right_coset_minimize(core, right)
            left_parts.append(prefix)
            right_parts.insert(0, suffix)
            if prefix.is_identity and suffix.is_identity:
                break
        return self.multiply(*left_parts), core, self.multiply(*right_parts)

    def project_to_sector(self, x: Chamber, sector: 'SectorRef') -> Chamber:
        """The unique chamber of gamma Sigma_I nearest to x (gate property)"""
        local = self.multiply(self.invert(sector.base), x)
        prefix, _ = self.i_prefix(local, sector.types)
        return self.multiply(sector.base, prefix)

    def in_subgroup(self, x: NormalForm, types: FrozenSet[int]) -> bool:
        return x.types() <= set(types)

    # -- galleries ---------------------------------------------------------

    def adjacency_witness(self, x: Chamber, y: Chamber) -> Optional[Syllable]:
        """The syllable s^alpha with y = x s^alpha, or None when x, y are not adjacent"""
        step = self.multiply(self.invert(x), y)
        if len(step.syllables) != 1:
            return None
        return step.syllables[0]

    def gallery(self, chambers: Sequence[Chamber]) -> Gallery:
        if not chambers:
            raise GalleryError("A gallery needs at least one chamber")
        steps = []
        for k in range(len(chambers) - 1):
            witness = self.adjacency_witness(chambers[k], chambers[k + 1])
            if witness is None:
                raise GalleryError(
                    f"Chambers {self.format_word(chambers[k])} and {self.format_word(chambers[k + 1])} "
                    f"are not adjacent")
            steps.append(witness)
        return Gallery(tuple(chambers), tuple(steps))

    def minimal_gallery(self, x: Chamber, y: Chamber) -> Gallery:
        """The gallery from x to y following the normal form of x^-1 y"""
        chambers = [x]
        for syllable in self.multiply(self.invert(x), y).syllables:
            chambers.append(self.multiply(chambers[-1], NormalForm((syllable,))))
        return Gallery(tuple(chambers), self.multiply(self.invert(x), y).syllables)

    # -- text --------------------------------------------------------------

    def parse_raw_word(self, text: str) -> Word:
        syllables = []
        for token in text.split():
            if token == IDENTITY_TOKEN:
                continue
            match = TOKEN_PATTERN.match(token)
            if not match:
                raise WordSyntaxError(f"Invalid word token {token!r}")
            name, power = match.group(1), match.group(2)
            if name not in self.spec.generators:
                raise WordSyntaxError(f"Unknown generator {name!r} in word")
            exp = int(power) if power is not None else 1
            if abs(exp) > MAX_EXPONENT:
                raise ExponentOverflowError(f"Exponent {exp} exceeds the 64-bit range")
            syllables.append(Syllable(self.spec.index(name), exp))
        return tuple(syllables)

    def parse_word(self, text: str) -> NormalForm:
        return self.reduce(self.parse_raw_word(text))

    def format_word(self, x: Iterable[Syllable]) -> str:
        tokens = [self.spec.name(s.gen) if s.exp == 1 else f"{self.spec.name(s.gen)}^{s.exp}" for s in x]
        return ' '.join(tokens) if tokens else IDENTITY_TOKEN
