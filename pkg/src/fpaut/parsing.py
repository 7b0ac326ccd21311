"""Text grammar for words and the automorphism file schema.

Grammar: tokens separated by whitespace.  ``a<i>.<j>^<e>`` is the j-th
generator of factor i raised to e, ``x<l>^<e>`` is a free letter; ``^<e>`` is
optional (default 1) and e is a signed decimal integer.

>>> pres = Presentation((2, 2), 1)
>>> render_word(parse_word("a1.1^2 x1^-1 a2.2", pres))
'a1.1^2 x1^-1 a2.2'
"""

from __future__ import annotations

import re

from .errors import IndexOutOfRange, ParseError
from .words import (FactorSyllable, FreeSyllable, Presentation, Word,
                    reduce_syllables)

_TOKEN = re.compile(
    r"(?:a(?P<i>\d+)\.(?P<j>\d+)|x(?P<l>\d+))(?:\^(?P<e>[+-]?\d+))?$")


def parse_word(text: str, pres: Presentation) -> Word:
    """Parse and reduce a word; malformed tokens report their position."""
    raw = []
    pos = 0
    for token in text.split():
        pos = text.index(token, pos)
        m = _TOKEN.match(token)
        if m is None:
            raise ParseError(pos, f"malformed token {token!r}")
        e = int(m.group("e")) if m.group("e") is not None else 1
        if m.group("l") is not None:
            l = int(m.group("l"))
            pres.check_letter(l)
            raw.append(FreeSyllable(l, e))
        else:
            i, j = int(m.group("i")), int(m.group("j"))
            rank = pres.factor_rank(i)
            if not 1 <= j <= rank:
                raise IndexOutOfRange(
                    f"factor {i} has rank {rank}, no generator a{i}.{j}")
            vec = tuple(e if r == j else 0 for r in range(1, rank + 1))
            raw.append(FactorSyllable(i, vec))
        pos += len(token)
    return reduce_syllables(raw, pres)


def render_word(w: Word) -> str:
    """Inverse of parse_word on normal forms; the empty word renders as ''."""
    tokens = []
    for s in w.syllables:
        if isinstance(s, FreeSyllable):
            tokens.append(f"x{s.letter}" if s.exponent == 1
                          else f"x{s.letter}^{s.exponent}")
        else:
            for j, e in enumerate(s.vector, start=1):
                if e:
                    tokens.append(f"a{s.factor}.{j}" if e == 1
                                  else f"a{s.factor}.{j}^{e}")
    return " ".join(tokens)


def presentation_from_dict(group: dict) -> Presentation:
    return Presentation(tuple(group.get("abelian_factors", ())),
                        int(group.get("free_rank", 0)))


def word_table_from_dict(table: dict, pres: Presentation) -> dict[str, Word]:
    return {name: parse_word(text, pres) for name, text in table.items()}
