"""Tokenization, stemming and term-frequency vectors.

Every textual comparison in the crawler goes through this module: text is
split into lowercase alphanumeric tokens, each token is Porter-stemmed, and
bags of stemmed terms are compared as term-frequency vectors.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .porter import stem

# maximal runs of letters/digits; underscore is a separator, not a word char
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


class TokenSequence:
    """Ordered lowercase word tokens with their source character spans."""

    def __init__(self, tokens: Sequence[Token]):
        self.tokens = list(tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


def tokenize(text: str) -> TokenSequence:
    """Split text into lowercase maximal alphanumeric runs, in order."""
    return TokenSequence(
        [Token(m.group().lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]
    )


def stem_text(text: str) -> list[str]:
    """Tokenize and stem in one step; the common path for headings and bodies."""
    return [stem(t) for t in tokenize(text).texts()]


@dataclass
class TermFrequencyVector:
    """Sparse bag of stemmed terms with positive counts."""

    counts: dict[str, int] = field(default_factory=dict)

    def magnitude(self) -> float:
        return math.sqrt(sum(c * c for c in self.counts.values()))

    def __bool__(self) -> bool:
        return bool(self.counts)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TermFrequencyVector) and self.counts == other.counts


def build_tf_vector(terms: Iterable[str]) -> TermFrequencyVector:
    """Count distinct stemmed terms; empty input yields an empty vector."""
    return TermFrequencyVector(dict(Counter(terms)))


def cosine(a: TermFrequencyVector, b: TermFrequencyVector) -> float:
    """Cosine of two term-frequency vectors; 0.0 whenever either is empty.

    Counts are non-negative, so the result lies in [0, 1]. Shared terms are
    accumulated in sorted order, making the computation exactly symmetric.
    """
    if not a.counts or not b.counts:
        return 0.0
    shared = sorted(set(a.counts) & set(b.counts))
    dot = 0.0
    for term in shared:
        dot += a.counts[term] * b.counts[term]
    if dot == 0.0:
        return 0.0
    return min(1.0, dot / (a.magnitude() * b.magnitude()))


@dataclass(frozen=True)
class PhraseCandidate:
    term: str      # stemmed words joined by single spaces
    start: int     # index of the first token
    length: int    # number of tokens covered


def phrase_candidates(tokens: TokenSequence, max_words: int) -> list[PhraseCandidate]:
    """All contiguous n-grams, n descending from max_words to 1, stemmed word-by-word.

    Positions are preserved so a caller can consume matches longest-first
    without overlap. max_words larger than the token count is clamped.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    stems = [stem(t) for t in tokens.texts()]
    n_tokens = len(stems)
    out: list[PhraseCandidate] = []
    for n in range(min(max_words, n_tokens), 0, -1):
        for i in range(n_tokens - n + 1):
            out.append(PhraseCandidate(" ".join(stems[i : i + n]), i, n))
    return out
