from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from braidsector.braid import (
    IDENTITIES,
    MAX_IDENTITY_N,
    BraidWord,
    b_word,
    beta,
    canonical_word,
    compose,
    embed,
    equal_in_group,
    invert,
    is_pure,
    mirror,
    normal_form,
    permutation,
    power,
    reverse,
    shift,
    t_braid,
    u_braid,
    verify_identity,
    words_up_to,
)


def W(text: str, n: int) -> BraidWord:
    return BraidWord.parse(text, n)


# -- an independent oracle: the Burau representation ---------------------------
# Faithful on B_3, so matrix equality decides the word problem there; on larger
# n it is a necessary condition for equality.

T_SAMPLE = 0.613 + 0.377j


def burau(w: BraidWord, t: complex = T_SAMPLE) -> np.ndarray:
    m = np.eye(w.n, dtype=complex)
    for i, sign in w.letters:
        g = np.eye(w.n, dtype=complex)
        block = np.array([[1 - t, t], [1, 0]])
        if sign < 0:
            block = np.linalg.inv(block)
        g[i - 1 : i + 1, i - 1 : i + 1] = block
        m = m @ g
    return m


def burau_equal(a: BraidWord, b: BraidWord) -> bool:
    return bool(np.allclose(burau(a), burau(b), atol=1e-9))


def words(n_min=2, n_max=5, max_size=10):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.lists(
            st.tuples(st.integers(1, n - 1), st.sampled_from((1, -1))), max_size=max_size
        ).map(lambda ls: BraidWord(n, tuple(ls)))
    )


def pairs_same_n(n_min=2, n_max=4, max_size=6):
    def both(n):
        letters = st.lists(st.tuples(st.integers(1, n - 1), st.sampled_from((1, -1))), max_size=max_size)
        return st.tuples(letters, letters).map(lambda p: (BraidWord(n, tuple(p[0])), BraidWord(n, tuple(p[1]))))

    return st.integers(n_min, n_max).flatmap(both)


# -- words and text form -----------------------------------------------------


@pytest.mark.parametrize("text", ["e", "s1", "s1 s2 s1'", "s3' s1 s2'"])
def test_text_round_trip(text):
    w = BraidWord.parse(text, 4)
    assert str(w) == text
    assert BraidWord.parse(str(w), 4) == w


@given(words())
def test_text_round_trip_property(w):
    assert BraidWord.parse(str(w), w.n) == w


@pytest.mark.parametrize("bad", ["x1", "s", "s1''", "sa"])
def test_parse_rejects_bad_tokens(bad):
    with pytest.raises(ValueError):
        BraidWord.parse(bad, 3)


def test_letter_range_is_checked():
    with pytest.raises(ValueError):
        BraidWord(3, ((3, 1),))
    with pytest.raises(ValueError):
        BraidWord(3, ((1, 2),))
    with pytest.raises(ValueError):
        BraidWord(0)


def test_compose_concatenates_without_reduction():
    w = compose(W("s1", 2), W("s1'", 2))
    assert w.letters == ((1, 1), (1, -1))
    assert len(w) == 2
    assert compose(BraidWord(3), W("s2", 3)) == W("s2", 3)
    assert compose(b_word(2, 3), b_word(1, 3)) == W("s1 s2 s1", 3) == beta(3)


def test_compose_rejects_mismatched_strands():
    with pytest.raises(ValueError):
        compose(W("s1", 2), W("s1", 3))


def test_invert_and_reverse():
    assert invert(W("s1 s2", 3)) == W("s2' s1'", 3)
    assert invert(BraidWord(4)) == BraidWord(4)
    assert reverse(W("s1 s2", 3)) == W("s2 s1", 3)


@given(words())
def test_reverse_is_an_involution(w):
    assert reverse(reverse(w)) == w


@pytest.mark.parametrize("k", range(1, 5))
@pytest.mark.parametrize("l", range(1, 5))
def test_t_inverse_is_u(k, l):
    assert equal_in_group(invert(t_braid(k, l)), u_braid(l, k))
    assert equal_in_group(reverse(t_braid(k, l)), t_braid(l, k))


def test_t_braid_small_cases():
    assert t_braid(1, 1) == W("s1", 2)
    assert t_braid(2, 2) == W("s2 s1 s3 s2", 4)
    with pytest.raises(ValueError):
        t_braid(0, 2)


def test_shift():
    assert shift(W("s1", 2), 2, 4) == W("s3", 4)
    assert shift(beta(2), 1, 3) == W("s2", 3)
    with pytest.raises(ValueError):
        shift(W("s1", 2), 2, 3)


@given(words(n_max=4))
def test_shift_composes_additively(w):
    assert shift(shift(w, 1, w.n + 1), 2, w.n + 3) == shift(w, 3, w.n + 3)


# -- beta ----------------------------------------------------------------------


def test_beta_small_cases():
    assert beta(1) == BraidWord(1)
    assert beta(2) == W("s1", 2)
    assert beta(4) == W("s1 s2 s3 s1 s2 s1", 4)
    with pytest.raises(ValueError):
        beta(0)


@pytest.mark.parametrize("n", range(1, MAX_IDENTITY_N + 1))
def test_beta_facts(n):
    b = beta(n)
    assert len(b) == n * (n - 1) // 2
    assert equal_in_group(b, reverse(b))
    assert permutation(b).image == tuple(range(n, 0, -1))


# -- permutations --------------------------------------------------------------


def test_permutation_examples():
    assert permutation(W("s1", 2)).image == (2, 1)
    assert not is_pure(W("s1", 2))
    assert is_pure(W("s1 s1", 2))
    assert is_pure(power(beta(5), 2))


@given(pairs_same_n())
def test_permutation_is_a_homomorphism(pair):
    a, b = pair
    assert permutation(compose(a, b)) == permutation(a).compose(permutation(b))


# -- normal form -------------------------------------------------------------


def test_normal_form_examples():
    assert normal_form(W("s1 s1'", 2)) == normal_form(BraidWord(2))
    e = normal_form(BraidWord(3))
    assert e.inf == 0 and e.factors == ()
    assert normal_form(W("s1 s2 s1", 3)) == normal_form(W("s2 s1 s2", 3))
    assert normal_form(W("s1 s3", 4)) == normal_form(W("s3 s1", 4))
    assert equal_in_group(beta(3), reverse(beta(3)))
    assert not equal_in_group(W("s1", 3), W("s2", 3))
    assert equal_in_group(beta(4), W("s1 s2 s3 s1 s2 s1", 4))


@given(words())
def test_normal_form_is_idempotent(w):
    assert normal_form(canonical_word(w)) == normal_form(w)
    assert equal_in_group(canonical_word(w), w)


@given(words(max_size=8))
def test_inverse_cancels(w):
    assert equal_in_group(compose(w, invert(w)), BraidWord(w.n))


@given(pairs_same_n(3, 3, 6))
@settings(max_examples=300)
def test_word_problem_matches_burau_on_three_strands(pair):
    a, b = pair
    assert equal_in_group(a, b) == burau_equal(a, b)


@given(pairs_same_n(4, 5, 5))
def test_equal_words_have_equal_burau_matrices(pair):
    a, b = pair
    if equal_in_group(a, b):
        assert burau_equal(a, b)


def _random_rewrite(letters: list, n: int, rng: random.Random) -> list:
    """One relation-preserving rewrite: free insertion or cancellation, a far
    commutation, or a braid relation."""
    letters = list(letters)
    kind = rng.randrange(4)
    if kind == 0:
        pos = rng.randrange(len(letters) + 1)
        i, s = rng.randrange(1, n), rng.choice((1, -1))
        letters[pos:pos] = [(i, s), (i, -s)]
        return letters
    spots = range(len(letters) - 1)
    if kind == 1:
        opts = [j for j in spots if letters[j][0] == letters[j + 1][0] and letters[j][1] == -letters[j + 1][1]]
        if opts:
            j = rng.choice(opts)
            del letters[j : j + 2]
        return letters
    if kind == 2:
        opts = [j for j in spots if abs(letters[j][0] - letters[j + 1][0]) >= 2]
        if opts:
            j = rng.choice(opts)
            letters[j], letters[j + 1] = letters[j + 1], letters[j]
        return letters
    opts = [
        j
        for j in range(len(letters) - 2)
        if letters[j] == letters[j + 2]
        and letters[j][1] == letters[j + 1][1]
        and abs(letters[j][0] - letters[j + 1][0]) == 1
    ]
    if opts:
        j = rng.choice(opts)
        (i, s), (k, _) = letters[j], letters[j + 1]
        letters[j : j + 3] = [(k, s), (i, s), (k, s)]
    return letters


@pytest.mark.parametrize("text,n", [("s1 s2 s1 s3' s2", 4), ("s1 s2 s3 s1 s2 s1", 4), ("s2' s1 s1 s2", 3)])
def test_normal_form_constant_under_random_rewrites(text, n):
    rng = random.Random(7)
    w = W(text, n)
    target = normal_form(w)
    letters = list(w.letters)
    for _ in range(200):
        letters = _random_rewrite(letters, n, rng)
        assert normal_form(BraidWord(n, tuple(letters))) == target


def test_words_up_to_counts_and_order():
    ws = list(words_up_to(3, 3))
    assert len(ws) == 1 + 4 + 16 + 64
    assert [len(w) for w in ws] == sorted(len(w) for w in ws)


def test_mirror_and_embed():
    assert mirror(W("s1 s2'", 3)) == W("s1' s2", 3)
    assert embed(W("s1", 2), 4) == W("s1", 4)
    for n in range(2, 6):
        assert equal_in_group(mirror(beta(n)), invert(beta(n)))


# -- identity suite ----------------------------------------------------------


@pytest.mark.parametrize(
    "name,n",
    [(name, n) for name, (n_min, _) in IDENTITIES.items() for n in range(n_min, MAX_IDENTITY_N + 1)],
)
def test_identity_holds(name, n):
    assert verify_identity(name, n)


def test_identity_errors():
    with pytest.raises(KeyError):
        verify_identity("no-such-identity", 3)
    with pytest.raises(ValueError):
        verify_identity("b-shift", 2)


@pytest.mark.parametrize("n", [5])
def test_beta_conjugation_each_generator(n):
    for i in range(1, n):
        for s in (1, -1):
            g, h = BraidWord(n, ((i, s),)), BraidWord(n, ((n - i, s),))
            assert equal_in_group(compose(beta(n), g), compose(h, beta(n)))


def test_literal_inverse_reading_fails_beyond_two_strands():
    """Inverting the recursion forms swaps the block sizes, so the exchange must be
    ``t_{l,k}^{-1}``; the literal ``t_{k,l}^{-1}`` already fails at n = 3."""
    k, l = 2, 1
    n = 3
    bk, bl = embed(beta(k), n), embed(beta(l), n)
    rl_bk = shift(beta(k), l, n)
    literal = compose(compose(invert(bl), invert(rl_bk)), invert(t_braid(k, l)))
    assert not equal_in_group(literal, invert(beta(n)))
    fixed = compose(compose(invert(bl), invert(rl_bk)), u_braid(k, l))
    assert equal_in_group(fixed, invert(beta(n)))
