"""Braid words over the Artin generators and the word problem in B_n.

A word ``x_1 x_2 ... x_k`` is read as a composition of maps, so the rightmost
letter acts first.  Equality in the group is decided with the left-greedy
Garside normal form ``Δ^p A_1 ... A_r`` whose factors are permutation braids.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

Perm = tuple[int, ...]
Letter = tuple[int, int]

MAX_IDENTITY_N = 7


@dataclass(frozen=True)
class BraidWord:
    """A sequence of signed Artin generators on ``n`` strands.

    ``letters`` holds pairs ``(i, sign)`` with ``1 <= i <= n - 1`` and
    ``sign`` in ``{+1, -1}``.  The empty word is the identity.
    """

    n: int
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"strand count must be a positive integer, got {self.n!r}")
        letters = tuple((int(i), int(s)) for i, s in self.letters)
        for i, s in letters:
            if not 1 <= i <= self.n - 1:
                raise ValueError(f"generator index {i} out of range for B_{self.n}")
            if s not in (1, -1):
                raise ValueError(f"generator sign must be +1 or -1, got {s}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def identity(cls, n: int) -> BraidWord:
        return cls(n, ())

    @classmethod
    def generator(cls, n: int, i: int, sign: int = 1) -> BraidWord:
        return cls(n, ((i, sign),))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> BraidWord:
        """Parse ``"s1 s2 s1'"``; ``"e"`` is the identity.

        Without ``n`` the strand count is one more than the largest index.
        """
        letters = []
        for tok in text.split():
            if tok == "e":
                continue
            sign = 1
            body = tok
            if body.endswith("'"):
                sign, body = -1, body[:-1]
            if not body.startswith("s") or not body[1:].isdigit():
                raise ValueError(f"bad braid token {tok!r}")
            letters.append((int(body[1:]), sign))
        if n is None:
            n = max((i for i, _ in letters), default=0) + 1
        return cls(n, tuple(letters))

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return " ".join(f"s{i}" + ("'" if s < 0 else "") for i, s in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: BraidWord) -> BraidWord:
        return compose(self, other)


@dataclass(frozen=True)
class PermutationImage:
    """Image of a braid in the symmetric group, as a 1-based bijection.

    The strand that starts at position ``j`` ends at position ``image[j - 1]``.
    """

    n: int
    image: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.image) != list(range(1, self.n + 1)):
            raise ValueError(f"not a bijection on 1..{self.n}: {self.image}")

    def __call__(self, j: int) -> int:
        return self.image[j - 1]

    def compose(self, other: PermutationImage) -> PermutationImage:
        """``self ∘ other``: apply ``other`` first."""
        if self.n != other.n:
            raise ValueError("size mismatch")
        return PermutationImage(self.n, tuple(self.image[other.image[j] - 1] for j in range(self.n)))

    @property
    def is_identity(self) -> bool:
        return self.image == tuple(range(1, self.n + 1))


@dataclass(frozen=True)
class NormalForm:
    """Left-greedy normal form ``Δ^inf · A_1 ··· A_r``.

    Factors are 0-based permutation tuples, none equal to the identity or to
    the half twist, and every adjacent pair is left-weighted.
    """

    n: int
    inf: int
    factors: tuple[Perm, ...]

    def to_word(self) -> BraidWord:
        """A braid word representing this element."""
        delta = _perm_word(_delta(self.n))
        letters: list[Letter] = []
        if self.inf >= 0:
            letters.extend(delta * self.inf)
        else:
            inv_delta = [(i, -s) for i, s in reversed(delta)]
            letters.extend(inv_delta * (-self.inf))
        for f in self.factors:
            letters.extend(_perm_word(f))
        return BraidWord(self.n, tuple(letters))

    def __str__(self) -> str:
        return f"Δ^{self.inf} · " + " · ".join(str(BraidWord(self.n, tuple(_perm_word(f)))) for f in self.factors)


def _check_same_n(w1: BraidWord, w2: BraidWord) -> None:
    if w1.n != w2.n:
        raise ValueError(f"strand count mismatch: {w1.n} vs {w2.n}")


def compose(w1: BraidWord, w2: BraidWord) -> BraidWord:
    """Concatenate letters; ``w2`` acts first.  No reduction."""
    _check_same_n(w1, w2)
    return BraidWord(w1.n, w1.letters + w2.letters)


def product(words: Iterable[BraidWord], n: int) -> BraidWord:
    letters: list[Letter] = []
    for w in words:
        if w.n != n:
            raise ValueError(f"strand count mismatch: {w.n} vs {n}")
        letters.extend(w.letters)
    return BraidWord(n, tuple(letters))


def power(w: BraidWord, k: int) -> BraidWord:
    base = w if k >= 0 else invert(w)
    return BraidWord(w.n, base.letters * abs(k))


def invert(w: BraidWord) -> BraidWord:
    return BraidWord(w.n, tuple((i, -s) for i, s in reversed(w.letters)))


def reverse(w: BraidWord) -> BraidWord:
    """Anti-automorphism fixing each generator: reverse the letters, keep signs."""
    return BraidWord(w.n, tuple(reversed(w.letters)))


def mirror(w: BraidWord) -> BraidWord:
    """Flip every crossing: ``σ_i^{±1} ↦ σ_i^{∓1}``."""
    return BraidWord(w.n, tuple((i, -s) for i, s in w.letters))


def shift(w: BraidWord, a: int, new_n: int) -> BraidWord:
    """Embed ``B_n → B_{new_n}`` by ``σ_i ↦ σ_{i+a}``."""
    if a < 0:
        raise ValueError("shift amount must be nonnegative")
    if new_n < w.n + a:
        raise ValueError(f"shift by {a} overflows B_{new_n}")
    return BraidWord(new_n, tuple((i + a, s) for i, s in w.letters))


def embed(w: BraidWord, new_n: int) -> BraidWord:
    return shift(w, 0, new_n)


# -- named braids ------------------------------------------------------------


def b_word(j: int, n: int | None = None) -> BraidWord:
    """``b_j = σ_1 σ_2 ··· σ_j`` in ``B_n`` (default ``n = j + 1``); ``b_0 = e``."""
    if j < 0:
        raise ValueError("b_j needs j >= 0")
    if n is None:
        n = j + 1
    return BraidWord(n, tuple((i, 1) for i in range(1, j + 1)))


def beta(n: int) -> BraidWord:
    """The superselection braid ``β_n = b_{n-1} b_{n-2} ··· b_1``."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"β_n is defined for n >= 1, got {n!r}")
    return product((b_word(j, n) for j in range(n - 1, 0, -1)), n)


def t_braid(k: int, l: int) -> BraidWord:
    """Clockwise exchange of the first ``k`` strands with the last ``l``.

    Built as ``r_0(←b_l) · r_1(←b_l) ··· r_{k-1}(←b_l)`` in ``B_{k+l}``.
    """
    if k < 1 or l < 1:
        raise ValueError("t_{k,l} needs k, l >= 1")
    n = k + l
    rb = reverse(b_word(l))
    return product((shift(rb, a, n) for a in range(k)), n)


def u_braid(k: int, l: int) -> BraidWord:
    """Anticlockwise exchange of the first ``k`` strands with the last ``l``.

    This is the crossing-flipped ``t_{k,l}``; it equals ``t_{l,k}^{-1}`` in the group.
    """
    return mirror(t_braid(k, l))


# -- permutations ------------------------------------------------------------


def _identity_perm(n: int) -> Perm:
    return tuple(range(n))


@lru_cache(maxsize=None)
def _delta(n: int) -> Perm:
    return tuple(range(n - 1, -1, -1))


@lru_cache(maxsize=None)
def _transposition(n: int, i: int) -> Perm:
    p = list(range(n))
    p[i - 1], p[i] = p[i], p[i - 1]
    return tuple(p)


def _pmul(p: Perm, q: Perm) -> Perm:
    """``p ∘ q`` (apply ``q`` first)."""
    return tuple(p[x] for x in q)


def _pinv(p: Perm) -> Perm:
    out = [0] * len(p)
    for j, x in enumerate(p):
        out[x] = j
    return tuple(out)


def _inversions(p: Perm) -> int:
    n = len(p)
    return sum(1 for a in range(n) for b in range(a + 1, n) if p[a] > p[b])


def _left_descents(p: Perm) -> frozenset[int]:
    """Generators ``σ_i`` with ``P = σ_i · P'`` for the permutation braid ``P``."""
    q = _pinv(p)
    return frozenset(i for i in range(1, len(p)) if q[i - 1] > q[i])


def _right_descents(p: Perm) -> frozenset[int]:
    """Generators ``σ_i`` with ``P = P' · σ_i``."""
    return frozenset(i for i in range(1, len(p)) if p[i - 1] > p[i])


def _tau(p: Perm) -> Perm:
    """Conjugation by the half twist, ``X ↦ Δ X Δ^{-1}``."""
    d = _delta(len(p))
    return _pmul(d, _pmul(p, d))


@lru_cache(maxsize=None)
def _perm_word(p: Perm) -> tuple[Letter, ...]:
    """Positive word of the permutation braid with image ``p``."""
    letters = []
    n = len(p)
    while True:
        desc = _left_descents(p)
        if not desc:
            break
        i = min(desc)
        letters.append((i, 1))
        p = _pmul(_transposition(n, i), p)
    return tuple(letters)


def permutation(w: BraidWord) -> PermutationImage:
    p = _identity_perm(w.n)
    for i, _ in w.letters:
        p = _pmul(p, _transposition(w.n, i))
    return PermutationImage(w.n, tuple(x + 1 for x in p))


def is_pure(w: BraidWord) -> bool:
    return permutation(w).is_identity


# -- normal form -------------------------------------------------------------


def _left_weight(a: Perm, b: Perm) -> tuple[Perm, Perm]:
    n = len(a)
    while True:
        movable = _left_descents(b) - _right_descents(a)
        if not movable:
            return a, b
        i = min(movable)
        s = _transposition(n, i)
        a, b = _pmul(a, s), _pmul(s, b)


def normal_form(w: BraidWord) -> NormalForm:
    n = w.n
    ident = _identity_perm(n)
    delta = _delta(n)
    inf = 0
    factors: list[Perm] = []
    for i, sign in w.letters:
        s = _transposition(n, i)
        if sign > 0:
            factors.append(s)
        else:
            # σ_i^{-1} = Δ^{-1} · τ(σ_i^{-1} Δ); pull Δ^{-1} to the front.
            inf -= 1
            factors = [_tau(f) for f in factors]
            factors.append(_tau(_pmul(_pinv(s), delta)))
    changed = True
    while changed:
        changed = False
        for j in range(len(factors) - 1):
            a, b = _left_weight(factors[j], factors[j + 1])
            if (a, b) != (factors[j], factors[j + 1]):
                factors[j], factors[j + 1] = a, b
                changed = True
        kept = [f for f in factors if f != ident]
        if len(kept) != len(factors):
            factors = kept
            changed = True
    while factors and factors[0] == delta:
        inf += 1
        factors.pop(0)
    return NormalForm(n, inf, tuple(factors))


def equal_in_group(w1: BraidWord, w2: BraidWord) -> bool:
    _check_same_n(w1, w2)
    return normal_form(w1) == normal_form(w2)


def canonical_word(w: BraidWord) -> BraidWord:
    return normal_form(w).to_word()


# -- identity suite ----------------------------------------------------------


def _splits(n: int) -> Iterator[tuple[int, int]]:
    for k in range(1, n):
        yield k, n - k


def _g(n: int, i: int, sign: int = 1) -> BraidWord:
    return BraidWord.generator(n, i, sign)


def _eq(*words: BraidWord) -> bool:
    nf = normal_form(words[0])
    return all(normal_form(w) == nf for w in words[1:])


def _beta_conjugation(n: int) -> bool:
    bn = beta(n)
    return all(
        _eq(bn * _g(n, i, s), _g(n, n - i, s) * bn) for i in range(1, n) for s in (1, -1)
    )


def _beta_last_generator(n: int) -> bool:
    if n < 2:
        return True
    bn = beta(n)
    return all(_eq(bn * _g(n, n - 1, s), _g(n, 1, s) * bn) for s in (1, -1))


def _b_shift(n: int) -> bool:
    # b_m σ_{m-i}^{±} = σ_{m+1-i}^{±} b_m inside B_n with m = n - 1
    m = n - 1
    bm = b_word(m, n)
    return all(
        _eq(bm * _g(n, m - i, s), _g(n, m + 1 - i, s) * bm) for i in range(1, m) for s in (1, -1)
    )


def _beta_decomposition(n: int) -> bool:
    if n < 2:
        return True
    rhs = product((shift(b_word(j), n - 1 - j, n) for j in range(1, n)), n)
    return _eq(beta(n), rhs)


def _b_reverse(n: int) -> bool:
    # b_{m-1} ←b_m = ←b_m r_1(b_{m-1}) inside B_{m+1}, m = n - 1
    m = n - 1
    if m < 1:
        return True
    rb = reverse(b_word(m, n))
    return _eq(b_word(m - 1, n) * rb, rb * shift(b_word(m - 1), 1, n))


def _beta_palindrome(n: int) -> bool:
    return _eq(reverse(beta(n)), beta(n))


def _beta_length(n: int) -> bool:
    return len(beta(n)) == n * (n - 1) // 2


def _beta_reversal(n: int) -> bool:
    return permutation(beta(n)).image == tuple(range(n, 0, -1))


def _t_commutation(n: int) -> bool:
    for k, l in _splits(n):
        t = t_braid(k, l)
        for i in range(1, l):
            for s in (1, -1):
                if not _eq(_g(n, i, s) * t, t * _g(n, i + k, s)):
                    return False
        for i in range(1, k):
            for s in (1, -1):
                if not _eq(t * _g(n, i, s), _g(n, i + l, s) * t):
                    return False
    return True


def _t_reverse(n: int) -> bool:
    return all(_eq(reverse(t_braid(k, l)), t_braid(l, k)) for k, l in _splits(n))


def _t_alternative(n: int) -> bool:
    # t_{k,l} = r_{l-1}(b_k) ··· r_1(b_k) r_0(b_k)
    for k, l in _splits(n):
        alt = product((shift(b_word(k), a, n) for a in range(l - 1, -1, -1)), n)
        if not _eq(t_braid(k, l), alt):
            return False
    return True


def _u_inverse(n: int) -> bool:
    return all(_eq(u_braid(k, l), invert(t_braid(l, k))) for k, l in _splits(n))


def _parts(k: int, l: int):
    n = k + l
    bk, bl = beta(k), beta(l)
    return (
        n,
        embed(bk, n),
        embed(bl, n),
        shift(bk, l, n),
        shift(bl, k, n),
        t_braid(k, l),
        t_braid(l, k),
    )


def _fusion_proposition(n: int) -> bool:
    for k, l in _splits(n):
        n_, bk, bl, rl_bk, rk_bl, tkl, tlk = _parts(k, l)
        bracket = rl_bk * bl
        if not _eq(beta(n), bracket * tkl, tlk * bracket):
            return False
    return True


def _commuting_brackets(n: int) -> bool:
    for k, l in _splits(n):
        n_, bk, bl, rl_bk, rk_bl, tkl, tlk = _parts(k, l)
        if not (_eq(rl_bk * bl, bl * rl_bk) and _eq(bk * rk_bl, rk_bl * bk)):
            return False
    return True


def _recursion_forms(k: int, l: int, inverse: bool) -> list[BraidWord]:
    n, bk, bl, rl_bk, rk_bl, tkl, _ = _parts(k, l)
    if inverse:
        # inverting a form swaps k and l, so the exchange becomes t_{l,k}^{-1} = u_{k,l}
        bk, bl, rl_bk, rk_bl = (invert(x) for x in (bk, bl, rl_bk, rk_bl))
        tkl = u_braid(k, l)
    return [
        (bl * rl_bk) * tkl,
        tkl * (bk * rk_bl),
        bl * tkl * bk,
        rl_bk * tkl * rk_bl,
    ]


def _recursion(n: int) -> bool:
    if n < 2:
        return True
    return all(_eq(beta(n), *_recursion_forms(k, l, False)) for k, l in _splits(n))


def _recursion_inverse(n: int) -> bool:
    if n < 2:
        return True
    target = invert(beta(n))
    return all(_eq(target, *_recursion_forms(k, l, True)) for k, l in _splits(n))


def _beta_square(n: int) -> bool:
    for k, l in _splits(n):
        _, bk, bl, rl_bk, _, tkl, tlk = _parts(k, l)
        rhs = tlk * power(rl_bk, 2) * power(bl, 2) * tkl
        if not _eq(power(beta(n), 2), rhs):
            return False
    return True


def _beta_t_intertwining(n: int) -> bool:
    for k, l in _splits(n):
        _, bk, bl, rl_bk, rk_bl, tkl, _ = _parts(k, l)
        if not (_eq(bl * tkl, tkl * rk_bl) and _eq(tkl * bk, rl_bk * tkl)):
            return False
    return True


IDENTITIES: dict[str, tuple[int, Callable[[int], bool]]] = {
    # name: (smallest n, checker)
    "beta-length": (1, _beta_length),
    "beta-palindrome": (1, _beta_palindrome),
    "beta-reversal": (1, _beta_reversal),
    "beta-conjugation": (2, _beta_conjugation),
    "beta-last-generator": (2, _beta_last_generator),
    "b-shift": (3, _b_shift),
    "beta-decomposition": (2, _beta_decomposition),
    "b-reverse": (2, _b_reverse),
    "t-commutation": (2, _t_commutation),
    "t-reverse": (2, _t_reverse),
    "t-alternative": (2, _t_alternative),
    "u-inverse": (2, _u_inverse),
    "fusion-proposition": (2, _fusion_proposition),
    "commuting-brackets": (2, _commuting_brackets),
    "recursion-i-to-iv": (2, _recursion),
    "recursion-inverse": (2, _recursion_inverse),
    "beta-square": (2, _beta_square),
    "beta-t-intertwining": (2, _beta_t_intertwining),
}


def verify_identity(name: str, n: int) -> bool:
    """Check a named braid identity exhaustively over its parameters at strand count ``n``."""
    if name not in IDENTITIES:
        raise KeyError(f"unknown identity {name!r}; known: {sorted(IDENTITIES)}")
    n_min, check = IDENTITIES[name]
    if n < n_min:
        raise ValueError(f"identity {name!r} needs n >= {n_min}")
    return check(n)


def verify_all_identities(n_max: int = MAX_IDENTITY_N) -> dict[tuple[str, int], bool]:
    out = {}
    for name, (n_min, _) in IDENTITIES.items():
        for n in range(n_min, n_max + 1):
            out[(name, n)] = verify_identity(name, n)
    return out


def words_up_to(n: int, max_len: int) -> Iterator[BraidWord]:
    """All words in ``B_n`` of length ``<= max_len``, shortest first."""
    alphabet = [(i, s) for i in range(1, n) for s in (1, -1)]
    frontier: list[tuple[Letter, ...]] = [()]
    for length in range(max_len + 1):
        for letters in frontier:
            yield BraidWord(n, letters)
        if length < max_len:
            frontier = [w + (a,) for w in frontier for a in alphabet]


