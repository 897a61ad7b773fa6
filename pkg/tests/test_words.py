import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.services.errors import ExponentOverflowError, GalleryError, WordSyntaxError
from app.services.oracle import enumerate_ball, enumerate_subgroup_ball
from app.services.parabolic import SectorRef
from app.services.words import IDENTITY, MAX_EXPONENT, Gallery, Syllable, WordEngine

from conftest import load

MIXED = WordEngine(load('mixed_abc'))


def words_over(n: int, max_size: int = 8):
    syllable = st.builds(Syllable, st.integers(0, n - 1), st.integers(-4, 4))
    return st.lists(syllable, max_size=max_size).map(tuple)


def test_commuting_syllables_sort_by_generator(path_engine):
    assert path_engine.format_word(path_engine.parse_word('b a')) == 'a b'
    assert path_engine.format_word(path_engine.parse_word('c a')) == 'c a'


def test_canonical_form_is_lexicographically_least_shuffle(path_engine):
    # b commutes with a and c, c must stay before a
    assert path_engine.format_word(path_engine.parse_word('c a b')) == 'b c a'
    assert path_engine.format_word(path_engine.parse_word('c b a')) == 'b c a'


def test_merge_across_commuting_syllable():
    engine = WordEngine(load('z2_z3'))
    assert engine.format_word(engine.parse_word('b^2 a b^2')) == 'a b'
    assert engine.format_word(engine.multiply(engine.parse_word('a b'), engine.parse_word('a b'))) == 'b^2'


def test_exponents_are_normalized():
    assert MIXED.format_word(MIXED.parse_word('b^4')) == 'b'
    assert MIXED.format_word(MIXED.parse_word('b^-1')) == 'b^2'
    assert MIXED.format_word(MIXED.parse_word('a^-1 a^3')) == 'e'
    assert MIXED.format_word(MIXED.parse_word('c^-3')) == 'c^-3'
    assert MIXED.format_word(MIXED.parse_word('c^2 c^-2')) == 'e'


def test_identity_spellings(path_engine):
    assert path_engine.parse_word('e') == IDENTITY
    assert path_engine.parse_word('') == IDENTITY
    assert path_engine.parse_word('a e a') == IDENTITY
    assert path_engine.format_word(IDENTITY) == 'e'


def test_exponent_overflow():
    with pytest.raises(ExponentOverflowError):
        MIXED.parse_word(f"c^{MAX_EXPONENT + 1}")
    with pytest.raises(ExponentOverflowError):
        MIXED.parse_word(f"c^{MAX_EXPONENT} c")


@pytest.mark.parametrize('text', ['x', 'a^', 'a^b', '^2', 'a b^1.5'])
def test_word_syntax_errors(path_engine, text):
    with pytest.raises(WordSyntaxError):
        path_engine.parse_word(text)


def test_reduce_rejects_foreign_generator(path_engine):
    with pytest.raises(WordSyntaxError):
        path_engine.reduce([Syllable(7, 1)])


def test_length_and_distance(path_engine):
    x = path_engine.parse_word('a b c')
    assert path_engine.syllable_length(x) == 3
    assert path_engine.distance(path_engine.parse_word('a'), path_engine.parse_word('c')) == 2
    assert path_engine.distance(x, x) == 0


def test_descents(path_engine):
    x = path_engine.parse_word('b c a')
    assert path_engine.left_descents(x) == {(1, 1), (2, 1)}
    assert path_engine.right_descents(x) == {(0, 1), (1, 1)}
    assert path_engine.left_descents(IDENTITY) == set()


def test_i_prefix(path_engine):
    p, r = path_engine.i_prefix(path_engine.parse_word('b c a'), frozenset({0, 1}))
    assert path_engine.format_word(p) == 'b'
    assert path_engine.format_word(r) == 'c a'
    p, r = path_engine.i_prefix(path_engine.parse_word('a b'), frozenset())
    assert p == IDENTITY


def test_i_prefix_with_powers():
    p, r = MIXED.i_prefix(MIXED.parse_word('b^2 c^-2 a'), frozenset({1, 2}))
    assert MIXED.format_word(p) == 'b^2 c^-2'
    assert MIXED.format_word(r) == 'a'


def test_right_coset_minimize(path_engine):
    d, g = path_engine.right_coset_minimize(path_engine.parse_word('c a b'), frozenset({0, 1}))
    assert path_engine.format_word(d) == 'c'
    assert path_engine.format_word(g) == 'a b'


def test_project_to_sector(path_engine):
    sector = SectorRef.of(path_engine, IDENTITY, {0, 1})
    assert path_engine.project_to_sector(path_engine.parse_word('c a'), sector) == IDENTITY
    assert path_engine.format_word(path_engine.project_to_sector(path_engine.parse_word('b c a'), sector)) == 'b'


def test_gallery_construction(path_engine):
    chambers = [path_engine.parse_word(t) for t in ('e', 'a', 'a b')]
    gallery = Gallery.from_chambers(path_engine, chambers)
    assert len(gallery) == 2
    assert gallery.steps == (Syllable(0, 1), Syllable(1, 1))
    with pytest.raises(GalleryError):
        path_engine.gallery([IDENTITY, path_engine.parse_word('a c')])
    with pytest.raises(GalleryError):
        path_engine.gallery([IDENTITY, IDENTITY])
    with pytest.raises(GalleryError):
        path_engine.gallery([])


def test_minimal_gallery_walks_normal_form():
    x, y = MIXED.parse_word('c'), MIXED.parse_word('c a b^2')
    gallery = MIXED.minimal_gallery(x, y)
    assert gallery.start == x and gallery.end == y
    assert len(gallery) == MIXED.distance(x, y) == 2


@given(words_over(3))
def test_reduce_is_idempotent(word):
    x = MIXED.reduce(word)
    assert MIXED.reduce(x.syllables) == x


@given(words_over(3), words_over(3))
def test_inverse_is_anti_homomorphism(u, v):
    x, y = MIXED.reduce(u), MIXED.reduce(v)
    assert MIXED.invert(MIXED.invert(x)) == x
    assert MIXED.invert(MIXED.multiply(x, y)) == MIXED.multiply(MIXED.invert(y), MIXED.invert(x))
    assert MIXED.multiply(x, MIXED.invert(x)) == IDENTITY


@given(words_over(3), words_over(3))
def test_length_is_subadditive(u, v):
    x, y = MIXED.reduce(u), MIXED.reduce(v)
    assert MIXED.syllable_length(MIXED.multiply(x, y)) <= MIXED.syllable_length(x) + MIXED.syllable_length(y)


@given(words_over(3), words_over(3), words_over(3))
def test_multiplication_is_associative(u, v, w):
    x, y, z = MIXED.reduce(u), MIXED.reduce(v), MIXED.reduce(w)
    assert MIXED.multiply(MIXED.multiply(x, y), z) == MIXED.multiply(x, MIXED.multiply(y, z))


@given(words_over(3))
def test_i_prefix_splits_additively(word):
    x = MIXED.reduce(word)
    for types in (frozenset({0}), frozenset({1, 2}), frozenset({0, 2})):
        p, r = MIXED.i_prefix(x, types)
        assert MIXED.multiply(p, r) == x
        assert len(p) + len(r) == len(x)
        assert p.types() <= types
        assert all(gen not in types for gen, _ in MIXED.left_descents(r))


@pytest.mark.parametrize('name', ['path_abc', 'mixed_abc', 'pentagon', 'z2_z3', 'k3'])
def test_projection_is_the_unique_nearest_chamber_and_a_gate(name):
    spec = load(name)
    engine = WordEngine(spec)
    ball = enumerate_ball(spec, 2)
    chambers = [x for x in ball.elements if len(x) <= 2]
    bases = [x for x in ball.elements if len(x) <= 1]
    rng = random.Random(f"gate-{name}")
    subgroups = {}
    for _ in range(100):
        x = rng.choice(chambers)
        types = frozenset(i for i in range(spec.n) if rng.random() < 0.5)
        sector = SectorRef.of(engine, rng.choice(bases), types)
        if types not in subgroups:
            subgroups[types] = enumerate_subgroup_ball(spec, types, 3, exponent_bound=4).elements
        members = [engine.multiply(sector.base, g) for g in subgroups[types]]
        distances = {z: engine.distance(x, z) for z in members}
        nearest = min(distances.values())
        minimizers = [z for z, d in distances.items() if d == nearest]
        p = engine.project_to_sector(x, sector)
        assert minimizers == [p]
        for z in members:
            assert distances[z] == engine.distance(x, p) + engine.distance(p, z)
