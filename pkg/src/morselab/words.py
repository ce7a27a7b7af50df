"""Words over a symmetric generating set.

A word is stored as ``bytes``: letter code ``2*i`` is generator ``i`` and
``2*i + 1`` its inverse, so inversion is ``code ^ 1`` and plain bytes
comparison of equal-length words is the ShortLex tie-break (declaration
order, each inverse right after its generator).
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

from morselab.errors import SpecSyntaxError, UnknownGeneratorError

Word = bytes
EMPTY: Word = b""


class Gen(NamedTuple):
    index: int
    sign: int = 1

    @property
    def code(self) -> int:
        return 2 * self.index + (self.sign < 0)

    @classmethod
    def from_code(cls, code: int) -> "Gen":
        return cls(code >> 1, -1 if code & 1 else 1)

    def inverse(self) -> "Gen":
        return Gen(self.index, -self.sign)


def word_from_gens(gens: Sequence[Gen]) -> Word:
    return bytes(g.code for g in gens)


def gens_of(word: Word) -> list[Gen]:
    return [Gen.from_code(c) for c in word]


_SWAP = bytes(c ^ 1 for c in range(256))


def invert(word: Word) -> Word:
    return word[::-1].translate(_SWAP)


def free_reduce(word: Word) -> Word:
    """Cancel adjacent inverse pairs until none remain."""
    out = bytearray()
    for c in word:
        if out and out[-1] == c ^ 1:
            out.pop()
        else:
            out.append(c)
    return bytes(out)


def cyclic_reduce(word: Word) -> Word:
    w = free_reduce(word)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1] ^ 1:
        i += 1
        j -= 1
    return w[i:j]


def cyclic_permutations(word: Word) -> list[Word]:
    return [word[i:] + word[:i] for i in range(len(word))] or [word]


def exponent_sums(word: Word, rank: int) -> tuple[int, ...]:
    sums = [0] * rank
    for c in word:
        sums[c >> 1] += -1 if c & 1 else 1
    return tuple(sums)


def _single_letter_names(names: Sequence[str]) -> bool:
    return all(len(s) == 1 and s.islower() for s in names)


def parse_word(text: str, names: Sequence[str], line: int | None = None) -> Word:
    """Parse ``abAB`` (single-letter generators, uppercase = inverse) or
    ``x y^-1 x^-1`` (whitespace-separated tokens)."""
    text = text.strip()
    if text in ("", "e", "1", "ε"):
        return EMPTY
    lookup = {name: i for i, name in enumerate(names)}
    codes = []
    if _single_letter_names(names) and " " not in text and "^" not in text:
        for col, ch in enumerate(text, start=1):
            low = ch.lower()
            if low not in lookup:
                raise UnknownGeneratorError(
                    f"unknown generator {ch!r} in word {text!r}"
                    + (f" (line {line}, col {col})" if line else "")
                )
            codes.append(2 * lookup[low] + (ch != low))
        return bytes(codes)
    for token in text.split():
        name, inverse = token, False
        if token.endswith("^-1"):
            name, inverse = token[:-3], True
        elif "^" in token:
            raise SpecSyntaxError(f"bad exponent in token {token!r}", line)
        if name not in lookup:
            raise UnknownGeneratorError(f"unknown generator {name!r} in word {text!r}")
        codes.append(2 * lookup[name] + inverse)
    return bytes(codes)


def format_word(word: Word, names: Sequence[str]) -> str:
    if _single_letter_names(names):
        return "".join(
            names[c >> 1].upper() if c & 1 else names[c >> 1] for c in word
        )
    return " ".join(names[c >> 1] + ("^-1" if c & 1 else "") for c in word)
