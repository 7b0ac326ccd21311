"""Normal-form algebra for elements of A_1 * ... * A_p * F_k.

Elements are alternating products of syllables: a syllable is either a
nontrivial element of one free-abelian factor A_i (stored as an integer
exponent vector) or a nonzero power of one free letter x_l.  A word is in
normal form when no two adjacent syllables live in the same factor / on the
same letter.  All values are immutable and all operations are pure, so
everything here is safe to share between threads.

>>> pres = Presentation((2, 2), 0)
>>> w = reduce_syllables([fs(1, (1, 0)), fs(2, (0, 1)), fs(2, (0, -1)), fs(1, (2, 0))], pres)
>>> w.syllables
(FactorSyllable(factor=1, vector=(3, 0)),)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import EmptyWord, IndexOutOfRange, PresentationMismatch


@dataclass(frozen=True)
class Presentation:
    """A free product of free-abelian groups and a free group.

    ``abelian_ranks[i-1]`` is the rank of the factor A_i (factors are
    1-indexed everywhere, matching the generator names a<i>.<j>); ``free_rank``
    is the rank k of the free part with letters x1..xk.
    """

    abelian_ranks: tuple[int, ...]
    free_rank: int = 0

    def __post_init__(self):
        object.__setattr__(self, "abelian_ranks", tuple(int(n) for n in self.abelian_ranks))
        if any(n < 1 for n in self.abelian_ranks):
            raise ValueError("every abelian factor must have rank >= 1")
        if self.free_rank < 0:
            raise ValueError("free rank must be nonnegative")
        if not self.abelian_ranks and self.free_rank == 0:
            raise ValueError("trivial group: need at least one factor or free letter")

    @property
    def num_factors(self) -> int:
        return len(self.abelian_ranks)

    @property
    def scott_complexity(self) -> tuple[int, int]:
        """(free rank, number of factors)."""
        return (self.free_rank, self.num_factors)

    def factor_rank(self, i: int) -> int:
        if not 1 <= i <= self.num_factors:
            raise IndexOutOfRange(f"factor index {i} not in 1..{self.num_factors}")
        return self.abelian_ranks[i - 1]

    def check_letter(self, l: int) -> None:
        if not 1 <= l <= self.free_rank:
            raise IndexOutOfRange(f"free letter index {l} not in 1..{self.free_rank}")

    def generator_names(self) -> list[str]:
        """All generator names, factor generators first: a1.1, ..., xk."""
        names = [f"a{i}.{j}" for i in range(1, self.num_factors + 1)
                 for j in range(1, self.abelian_ranks[i - 1] + 1)]
        names += [f"x{l}" for l in range(1, self.free_rank + 1)]
        return names


@dataclass(frozen=True)
class FactorSyllable:
    """A nontrivial element of the abelian factor A_factor."""

    factor: int
    vector: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(int(c) for c in self.vector))

    @property
    def mass(self) -> int:
        return sum(abs(c) for c in self.vector)

    def inverse(self) -> "FactorSyllable":
        return FactorSyllable(self.factor, tuple(-c for c in self.vector))

    def sort_key(self):
        return (0, self.factor, self.vector)


@dataclass(frozen=True)
class FreeSyllable:
    """A nonzero power of the free letter x_letter."""

    letter: int
    exponent: int

    @property
    def mass(self) -> int:
        return abs(self.exponent)

    def inverse(self) -> "FreeSyllable":
        return FreeSyllable(self.letter, -self.exponent)

    def sort_key(self):
        return (1, self.letter, self.exponent)


Syllable = Union[FactorSyllable, FreeSyllable]


def fs(i: int, vector: Sequence[int]) -> FactorSyllable:
    """Shorthand constructor used heavily in tests."""
    return FactorSyllable(i, tuple(vector))


def xs(l: int, e: int) -> FreeSyllable:
    return FreeSyllable(l, e)


def _track(s: Syllable):
    """Which free factor of the free product the syllable lives in."""
    if isinstance(s, FactorSyllable):
        return ("A", s.factor)
    return ("X", s.letter)


def _merge(a: Syllable, b: Syllable) -> Syllable | None:
    """Product of two same-track syllables; None when it cancels to 1."""
    if isinstance(a, FactorSyllable):
        v = tuple(x + y for x, y in zip(a.vector, b.vector))
        return None if not any(v) else FactorSyllable(a.factor, v)
    e = a.exponent + b.exponent
    return None if e == 0 else FreeSyllable(a.letter, e)


def _is_zero(s: Syllable) -> bool:
    if isinstance(s, FactorSyllable):
        return not any(s.vector)
    return s.exponent == 0


@dataclass(frozen=True)
class Word:
    """An element of the free product in normal form."""

    presentation: Presentation
    syllables: tuple[Syllable, ...] = ()

    def __len__(self) -> int:
        return len(self.syllables)

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def inverse(self) -> "Word":
        return Word(self.presentation,
                    tuple(s.inverse() for s in reversed(self.syllables)))

    @property
    def mass(self) -> int:
        """Total L1 magnitude of all exponents."""
        return sum(s.mass for s in self.syllables)

    def sort_key(self):
        return (len(self.syllables), tuple(s.sort_key() for s in self.syllables))


@dataclass(frozen=True)
class CyclicWord:
    """Cyclically reduced core of a word, with the conjugating witness.

    ``conjugator * Word(core) * conjugator^-1`` reduces to the word this was
    computed from.  The normal-form condition holds between the last and first
    core syllable whenever the core has length >= 2.
    """

    presentation: Presentation
    core: tuple[Syllable, ...]
    conjugator: Word

    def __len__(self) -> int:
        return len(self.core)

    @property
    def mass(self) -> int:
        return sum(s.mass for s in self.core)

    def rotations(self) -> list[tuple[Syllable, ...]]:
        n = len(self.core)
        return [self.core[r:] + self.core[:r] for r in range(n)]

    def canonical_rotation(self) -> tuple[Syllable, ...]:
        """Lexicographically least rotation; a conjugacy-class invariant."""
        if not self.core:
            return ()
        return min(self.rotations(), key=lambda c: [s.sort_key() for s in c])


def _check_syllable(s: Syllable, pres: Presentation) -> None:
    if isinstance(s, FactorSyllable):
        if len(s.vector) != pres.factor_rank(s.factor):
            raise IndexOutOfRange(
                f"factor {s.factor} has rank {pres.factor_rank(s.factor)}, "
                f"got vector of length {len(s.vector)}")
    else:
        pres.check_letter(s.letter)


def reduce_syllables(raw: Iterable[Syllable], pres: Presentation) -> Word:
    """Normal form of an arbitrary syllable sequence.

    Adjacent same-factor syllables merge by exponent addition, trivial
    syllables drop, and merging cascades; zero syllables are permitted in the
    raw input.
    """
    stack: list[Syllable] = []
    for s in raw:
        _check_syllable(s, pres)
        if _is_zero(s):
            continue
        while stack and _track(stack[-1]) == _track(s):
            merged = _merge(stack.pop(), s)
            if merged is None:
                s = None
                break
            s = merged
        if s is not None:
            stack.append(s)
    return Word(pres, tuple(stack))


def word(pres: Presentation, *raw: Syllable) -> Word:
    return reduce_syllables(raw, pres)


def _same_presentation(u: Word, v: Word) -> None:
    if u.presentation != v.presentation:
        raise PresentationMismatch(
            f"{u.presentation} vs {v.presentation}")


def multiply(u: Word, v: Word) -> Word:
    _same_presentation(u, v)
    return reduce_syllables(itertools.chain(u.syllables, v.syllables),
                            u.presentation)


def invert(u: Word) -> Word:
    return u.inverse()


def power(u: Word, n: int) -> Word:
    """u**n, computed through the cyclic form so large n stays cheap."""
    if n == 0 or not u:
        return Word(u.presentation)
    if n < 0:
        return power(u.inverse(), -n)
    cyc = cyclic_normal_form(u)
    core = cyc.core
    if len(core) == 1:
        s = core[0]
        if isinstance(s, FactorSyllable):
            big: Syllable = FactorSyllable(s.factor, tuple(n * c for c in s.vector))
        else:
            big = FreeSyllable(s.letter, n * s.exponent)
        mid = Word(u.presentation, (big,))
    else:
        # cyclically reduced: concatenation needs no interior reduction
        mid = Word(u.presentation, core * n)
    return multiply(multiply(cyc.conjugator, mid), cyc.conjugator.inverse())


def cyclic_normal_form(w: Word) -> CyclicWord:
    """Strip conjugating prefix/suffix pairs and merge the wrap-around.

    The recorded conjugator c satisfies  c * core * c^-1 == w.
    """
    if not w:
        raise EmptyWord("cyclic normal form of the empty word")
    syl = list(w.syllables)
    conj: list[Syllable] = []
    while len(syl) >= 2 and _track(syl[0]) == _track(syl[-1]):
        merged = _merge(syl[-1], syl[0])
        if merged is None:
            # exact cancellation: w = first . core . first^-1
            conj.append(syl[0])
            syl = syl[1:-1]
        else:
            # wrap merge: rotate the last syllable to the front;
            # w = last^-1 . (merged core) . last
            conj.append(syl[-1].inverse())
            syl = [merged] + syl[1:-1]
            break  # first and last now lie in different factors
    return CyclicWord(w.presentation, tuple(syl),
                      reduce_syllables(conj, w.presentation))


def syllable_length(w: Word) -> int:
    return len(w.syllables)


def cyclic_syllable_length(w: Word) -> int:
    if not w:
        return 0
    return len(cyclic_normal_form(w).core)


def cyclic_mass(w: Word) -> int:
    """Total exponent L1 magnitude of the cyclically reduced core."""
    if not w:
        return 0
    return cyclic_normal_form(w).mass


def is_hyperbolic(w: Word) -> bool:
    """True when w is not conjugate into any abelian factor.

    Free-letter powers act loxodromically on the loop edge, so a length-1
    cyclic form still counts as hyperbolic when its syllable is free.  The
    empty word is elliptic by convention.
    """
    if not w:
        return False
    cyc = cyclic_normal_form(w)
    if len(cyc) >= 2:
        return True
    return isinstance(cyc.core[0], FreeSyllable)


def conjugate_test(u: Word, v: Word) -> bool:
    """Decide conjugacy in the free product.

    Hyperbolic elements are conjugate iff their cyclic forms agree up to
    rotation; elliptic elements iff they are the same factor element (the
    factors are abelian).  An elliptic element is never conjugate to a
    hyperbolic one.
    """
    _same_presentation(u, v)
    if not u or not v:
        return len(u) == len(v)
    cu, cv = cyclic_normal_form(u), cyclic_normal_form(v)
    hu = len(cu) >= 2 or isinstance(cu.core[0], FreeSyllable)
    hv = len(cv) >= 2 or isinstance(cv.core[0], FreeSyllable)
    if hu != hv:
        return False
    if not hu:
        return cu.core == cv.core
    if len(cu) != len(cv):
        return False
    return cu.canonical_rotation() == cv.canonical_rotation()


def double_coset_rep(i: int, w: Word, j: int) -> Word:
    """Canonical representative of the double coset A_i . w . A_j.

    Strips one leading syllable in factor i and one trailing syllable in
    factor j from the normal form; invariant under w -> a.w.b for a in A_i,
    b in A_j.
    """
    pres = w.presentation
    pres.factor_rank(i)
    pres.factor_rank(j)
    syl = list(w.syllables)
    if syl and isinstance(syl[0], FactorSyllable) and syl[0].factor == i:
        syl = syl[1:]
    if syl and isinstance(syl[-1], FactorSyllable) and syl[-1].factor == j:
        syl = syl[:-1]
    return Word(pres, tuple(syl))
