"""Validated automorphisms of a free product of abelian factors.

An automorphism is handed over as a pair of tables (images and inverse
images of every generator).  Validation certifies the two-sided inverse,
extracts the factor permutation and the canonical conjugators g_i with
phi(A_i) = g_i A_{sigma(i)} g_i^-1, and records the integer matrix of
ad_{g_i^-1} o phi on each factor.

Inverting an automorphism given only by images is a nontrivial algorithmic
problem; requiring the inverse table keeps validation cheap and decidable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import (FactorsPermuted, NotAnAutomorphism, NotFactorPreserving,
                     PresentationMismatch)
from .matrices import IntegerMatrix, determinant
from .words import (FactorSyllable, FreeSyllable, Presentation, Word,
                    cyclic_normal_form, multiply, reduce_syllables)
from .words import power as word_power


def generator_word(pres: Presentation, name: str) -> Word:
    """The length-one word for a generator name (a<i>.<j> or x<l>)."""
    if name.startswith("x"):
        l = int(name[1:])
        pres.check_letter(l)
        return Word(pres, (FreeSyllable(l, 1),))
    i, j = name[1:].split(".")
    i, j = int(i), int(j)
    rank = pres.factor_rank(i)
    vec = tuple(1 if r == j else 0 for r in range(1, rank + 1))
    return Word(pres, (FactorSyllable(i, vec),))


def _apply_table(table: dict[str, Word], pres: Presentation, w: Word) -> Word:
    parts = []
    for s in w.syllables:
        if isinstance(s, FreeSyllable):
            parts.extend(word_power(table[f"x{s.letter}"], s.exponent).syllables)
        else:
            for j, e in enumerate(s.vector, start=1):
                if e:
                    parts.extend(word_power(table[f"a{s.factor}.{j}"], e).syllables)
    return reduce_syllables(parts, pres)


@dataclass(eq=False)
class Automorphism:
    """Immutable after validation; construct through :func:`validate`."""

    presentation: Presentation
    images: dict[str, Word]
    inverse_images: dict[str, Word]
    factor_permutation: tuple[int, ...]
    conjugators: tuple[Word, ...]
    factor_matrices: tuple[IntegerMatrix, ...]

    def __eq__(self, other):
        return (isinstance(other, Automorphism)
                and self.presentation == other.presentation
                and self.images == other.images
                and self.inverse_images == other.inverse_images)

    @property
    def preserves_factor_classes(self) -> bool:
        """True when the factor permutation is the identity."""
        return all(s == i for i, s in enumerate(self.factor_permutation, start=1))

    def conjugator(self, i: int) -> Word:
        return self.conjugators[i - 1]

    def factor_matrix(self, i: int) -> IntegerMatrix:
        """Matrix of ad_{g_i^-1} o phi on A_i; columns are generator images."""
        return self.factor_matrices[i - 1]

    @cached_property
    def abelianized_matrix(self) -> IntegerMatrix:
        """Action on G_ab, basis: factor generators then free letters."""
        pres = self.presentation
        names = pres.generator_names()
        index = {name: r for r, name in enumerate(names)}
        n = len(names)
        cols = []
        for name in names:
            col = [0] * n
            for s in self.images[name].syllables:
                if isinstance(s, FreeSyllable):
                    col[index[f"x{s.letter}"]] += s.exponent
                else:
                    for j, e in enumerate(s.vector, start=1):
                        col[index[f"a{s.factor}.{j}"]] += e
            cols.append(col)
        return IntegerMatrix(tuple(zip(*cols)))


def _strip_trailing(w: Word, factor: int) -> Word:
    syl = w.syllables
    if syl and isinstance(syl[-1], FactorSyllable) and syl[-1].factor == factor:
        syl = syl[:-1]
    return Word(w.presentation, syl)


def validate(images: dict[str, Word], inverse_images: dict[str, Word],
             pres: Presentation) -> Automorphism:
    """Certify an automorphism of (G, its free factor system).

    Raises NotFactorPreserving when some factor image is not elliptic in a
    single target factor with a common conjugator, and NotAnAutomorphism when
    the two tables are not two-sided inverses on generators.
    """
    names = pres.generator_names()
    for table, label in ((images, "images"), (inverse_images, "inverse_images")):
        missing = set(names) - set(table)
        if missing:
            raise NotAnAutomorphism(f"{label} missing generators {sorted(missing)}")
        for name in names:
            if table[name].presentation != pres:
                raise PresentationMismatch(f"{label}[{name}] over a different presentation")

    p = pres.num_factors
    sigma = []
    conjugators = []
    matrices = []
    for i in range(1, p + 1):
        rank = pres.factor_rank(i)
        target = None
        conj = None
        columns = []
        for j in range(1, rank + 1):
            w = images[f"a{i}.{j}"]
            if not w:
                raise NotFactorPreserving(f"a{i}.{j} maps to the empty word")
            cyc = cyclic_normal_form(w)
            if len(cyc) != 1 or not isinstance(cyc.core[0], FactorSyllable):
                raise NotFactorPreserving(f"image of a{i}.{j} is not elliptic")
            s = cyc.core[0]
            g = _strip_trailing(cyc.conjugator, s.factor)
            if target is None:
                target, conj = s.factor, g
            elif s.factor != target:
                raise NotFactorPreserving(
                    f"images of factor {i} land in factors {target} and {s.factor}")
            elif g != conj:
                raise NotFactorPreserving(
                    f"no common conjugator for the generators of factor {i}")
            columns.append(s.vector)
        if pres.factor_rank(target) != rank:
            raise NotFactorPreserving(
                f"factor {i} (rank {rank}) maps to factor {target} "
                f"(rank {pres.factor_rank(target)})")
        sigma.append(target)
        conjugators.append(conj)
        matrices.append(IntegerMatrix(tuple(zip(*columns))))

    if sorted(sigma) != list(range(1, p + 1)):
        raise NotFactorPreserving(f"factor map {sigma} is not a permutation")

    for name in names:
        gen = generator_word(pres, name)
        if _apply_table(images, pres, inverse_images[name]) != gen:
            raise NotAnAutomorphism(f"phi(psi({name})) != {name}")
        if _apply_table(inverse_images, pres, images[name]) != gen:
            raise NotAnAutomorphism(f"psi(phi({name})) != {name}")

    for i, m in enumerate(matrices, start=1):
        if abs(determinant(m)) != 1:
            raise NotFactorPreserving(f"restriction to factor {i} is not invertible")

    return Automorphism(pres, dict(images), dict(inverse_images),
                        tuple(sigma), tuple(conjugators), tuple(matrices))


def identity_automorphism(pres: Presentation) -> Automorphism:
    table = {name: generator_word(pres, name) for name in pres.generator_names()}
    return validate(table, dict(table), pres)


def ad(g: Word, pres: Presentation | None = None) -> Automorphism:
    """The inner automorphism s -> g s g^-1."""
    pres = pres or g.presentation
    gi = g.inverse()
    images = {}
    inverse_images = {}
    for name in pres.generator_names():
        s = generator_word(pres, name)
        images[name] = multiply(multiply(g, s), gi)
        inverse_images[name] = multiply(multiply(gi, s), g)
    return validate(images, inverse_images, pres)


def apply(phi: Automorphism, w: Word) -> Word:
    if w.presentation != phi.presentation:
        raise PresentationMismatch("word over a different presentation")
    return _apply_table(phi.images, phi.presentation, w)


def apply_inverse(phi: Automorphism, w: Word) -> Word:
    if w.presentation != phi.presentation:
        raise PresentationMismatch("word over a different presentation")
    return _apply_table(phi.inverse_images, phi.presentation, w)


def apply_power(phi: Automorphism, n: int, w: Word) -> Word:
    table = phi.images if n >= 0 else phi.inverse_images
    for _ in range(abs(n)):
        w = _apply_table(table, phi.presentation, w)
    return w


def inverse(phi: Automorphism) -> Automorphism:
    return validate(phi.inverse_images, phi.images, phi.presentation)


def compose(phi: Automorphism, psi: Automorphism) -> Automorphism:
    """(phi o psi): applies psi first."""
    if phi.presentation != psi.presentation:
        raise PresentationMismatch("automorphisms over different presentations")
    pres = phi.presentation
    images = {name: _apply_table(phi.images, pres, psi.images[name])
              for name in pres.generator_names()}
    inverse_images = {name: _apply_table(psi.inverse_images, pres,
                                         phi.inverse_images[name])
                      for name in pres.generator_names()}
    return validate(images, inverse_images, pres)


def power(phi: Automorphism, n: int) -> Automorphism:
    if n == 0:
        return identity_automorphism(phi.presentation)
    base = phi if n > 0 else inverse(phi)
    out = base
    for _ in range(abs(n) - 1):
        out = compose(out, base)
    return out


def is_toral(phi: Automorphism) -> tuple[bool, tuple[Word, ...]]:
    """Whether each factor restriction is the identity up to conjugation.

    Returns the verdict together with the conjugator witnesses g_i.
    """
    if not phi.preserves_factor_classes:
        raise FactorsPermuted("torality needs the identity factor permutation")
    n = phi.presentation.num_factors
    toral = all(phi.factor_matrix(i) == IntegerMatrix.identity(phi.presentation.factor_rank(i))
                for i in range(1, n + 1))
    return toral, phi.conjugators


def check_central_condition(phi: Automorphism) -> dict[int, bool]:
    """Per factor i: does ad_{g_i^-1} o phi fix a nonzero vector of A_i?

    A nontrivial fixed vector gives a central element of the factor mapping
    torus A_i x| Z; the test is det(M_i - I) == 0 over the integers.
    """
    if not phi.preserves_factor_classes:
        raise FactorsPermuted("central condition needs the identity factor permutation")
    out = {}
    for i in range(1, phi.presentation.num_factors + 1):
        m = phi.factor_matrix(i)
        out[i] = determinant(m - IntegerMatrix.identity(m.nrows)) == 0
    return out
