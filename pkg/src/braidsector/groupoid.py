"""The braid groupoid on distinctly coloured strands.

Base points are strings of distinct labels.  A braid ``b`` acts on a string by
carrying each label along its strand, and each pair ``(s, b)`` has a domain
set ``U_{s,b}`` of orderings on which the exchange is defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations as _permutations
from typing import Iterable, Sequence

from .braid import (
    BraidWord,
    compose,
    invert,
    is_pure,
    normal_form,
    permutation,
    words_up_to,
)

# Enumerating every word up to the given length is exhaustive but exponential.
GEODESIC_WORD_CAP = 200_000


@dataclass(frozen=True)
class ColorString:
    """A string ``q_1 ... q_n`` of distinct labels."""

    chars: tuple[str, ...]

    def __post_init__(self):
        chars = tuple(str(c) for c in self.chars)
        if not chars:
            raise ValueError("a colour string needs at least one label")
        if len(set(chars)) != len(chars):
            raise ValueError(f"colour labels must be distinct: {chars}")
        object.__setattr__(self, "chars", chars)

    @classmethod
    def parse(cls, text: str) -> ColorString:
        """``"123"`` for single-character labels, ``"a,b,c"`` otherwise."""
        text = text.strip()
        if "," in text:
            return cls(tuple(t.strip() for t in text.split(",")))
        return cls(tuple(text))

    @classmethod
    def of(cls, s: str | Sequence[str] | ColorString) -> ColorString:
        if isinstance(s, ColorString):
            return s
        if isinstance(s, str):
            return cls.parse(s)
        return cls(tuple(s))

    def __len__(self) -> int:
        return len(self.chars)

    def __getitem__(self, i: int) -> str:
        return self.chars[i]

    def __str__(self) -> str:
        if all(len(c) == 1 for c in self.chars):
            return "".join(self.chars)
        return ",".join(self.chars)

    def swap(self, i: int) -> ColorString:
        """Exchange the characters at 1-based positions ``i`` and ``i + 1``."""
        c = list(self.chars)
        c[i - 1], c[i] = c[i], c[i - 1]
        return ColorString(tuple(c))


DomainSet = frozenset  # frozenset[ColorString]


def _check_len(w: BraidWord, s: ColorString) -> None:
    if w.n != len(s):
        raise ValueError(f"braid on {w.n} strands cannot act on a string of length {len(s)}")


def act(w: BraidWord, s: ColorString | str) -> ColorString:
    """``w(s)``: the labels read off at the strand endpoints."""
    s = ColorString.of(s)
    _check_len(w, s)
    perm = permutation(w)
    out = [""] * len(s)
    for j, c in enumerate(s.chars, start=1):
        out[perm(j) - 1] = c
    return ColorString(tuple(out))


def all_orderings(s: ColorString | str) -> DomainSet:
    s = ColorString.of(s)
    return frozenset(ColorString(p) for p in _permutations(s.chars))


def _pair_start(u: ColorString, pair: frozenset[str]) -> int | None:
    """1-based start of the adjacent occurrence of ``pair`` in ``u``, if any."""
    for j in range(len(u) - 1):
        if frozenset(u.chars[j : j + 2]) == pair:
            return j + 1
    return None


def generator_domain(s: ColorString | str, i: int, sign: int = 1) -> DomainSet:
    """``U_{s,σ_i^{±1}}``.

    ``u`` qualifies when it holds ``q_i q_{i+1}`` or ``q_{i+1} q_i`` as adjacent
    characters, starting neither at position ``i - 1`` nor ``i + 1``.
    """
    s = ColorString.of(s)
    if not 1 <= i <= len(s) - 1:
        raise ValueError(f"generator index {i} out of range for length {len(s)}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    pair = frozenset(s.chars[i - 1 : i + 1])
    out = set()
    for u in all_orderings(s):
        start = _pair_start(u, pair)
        if start is not None and start not in (i - 1, i + 1):
            out.add(u)
    return frozenset(out)


def chain_domain(s: ColorString, w: BraidWord) -> DomainSet:
    """Domain of one specific word, chaining generator domains right to left."""
    current = all_orderings(s)
    base = s
    # track each candidate u together with its image under the letters so far
    images = {u: u for u in current}
    for i, sign in reversed(w.letters):
        dom = generator_domain(base, i, sign)
        images = {u: v.swap(i) for u, v in images.items() if v in dom}
        base = base.swap(i)
    return frozenset(images)


@lru_cache(maxsize=None)
def _words_by_element(n: int, max_len: int) -> dict:
    count = sum((2 * (n - 1)) ** k for k in range(max_len + 1))
    if count > GEODESIC_WORD_CAP:
        raise OverflowError(f"{count} words exceed the enumeration cap {GEODESIC_WORD_CAP}")
    table: dict = {}
    for w in words_up_to(n, max_len):
        nf = normal_form(w)
        entry = table.setdefault(nf, [len(w), []])
        if len(w) == entry[0]:
            entry[1].append(w)
    return table


def geodesic_words(w: BraidWord) -> list[BraidWord]:
    """All minimal-length words equal to ``w`` in the group."""
    table = _words_by_element(w.n, len(w))
    return list(table[normal_form(w)][1])


def word_domain(s: ColorString | str, w: BraidWord, strict: bool = False) -> DomainSet:
    """``U_{s,w}``.

    The identity has every ordering.  Otherwise ``u`` qualifies if some
    minimal-length word for ``w`` admits the chain of generator domains, or,
    with ``strict``, if every such word does.
    """
    s = ColorString.of(s)
    _check_len(w, s)
    words = geodesic_words(w)
    if len(words[0]) == 0:
        return all_orderings(s)
    domains = [chain_domain(s, g) for g in words]
    if strict:
        return frozenset.intersection(*domains)
    return frozenset.union(*domains)


@dataclass(frozen=True)
class GroupoidMorphism:
    """A braid together with its source base point; the target is ``word(source)``."""

    word: BraidWord
    source: ColorString

    def __post_init__(self):
        object.__setattr__(self, "source", ColorString.of(self.source))
        _check_len(self.word, self.source)

    @property
    def target(self) -> ColorString:
        return act(self.word, self.source)

    def inverse(self) -> GroupoidMorphism:
        return GroupoidMorphism(invert(self.word), self.target)

    @classmethod
    def identity(cls, s: ColorString | str) -> GroupoidMorphism:
        s = ColorString.of(s)
        return cls(BraidWord(len(s)), s)


def compose_morphisms(g: GroupoidMorphism, h: GroupoidMorphism) -> GroupoidMorphism:
    """``g h``: first ``h``, then ``g``; defined when ``g`` starts where ``h`` ends."""
    if g.source != h.target:
        raise ValueError(f"cannot compose: source {g.source} differs from target {h.target}")
    return GroupoidMorphism(compose(g.word, h.word), h.source)


def morphisms_equal(g: GroupoidMorphism, h: GroupoidMorphism) -> bool:
    return g.source == h.source and normal_form(g.word) == normal_form(h.word)


def automorphism_group_is_pure(s: ColorString | str, w: BraidWord) -> bool:
    """True iff ``w`` fixes ``s``; with distinct colours this is exactly ``is_pure(w)``."""
    s = ColorString.of(s)
    _check_len(w, s)
    fixed = act(w, s) == s
    assert fixed == is_pure(w)
    return fixed


def orderings_of(labels: Iterable[str]) -> list[ColorString]:
    return sorted(all_orderings(ColorString(tuple(labels))), key=lambda c: c.chars)
