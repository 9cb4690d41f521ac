"""Dewey-Decimal term lexicon.

Maps stemmed words/phrases to one or more Dewey codes (D-numbers). The
lexicon file format is one record per line, ``code<TAB>term``; '#' starts a
comment line. Terms are stemmed word-by-word on load, so lookups must be
performed with already-stemmed input.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Iterable

from .porter import stem

logger = logging.getLogger(__name__)

_CODE_RE = re.compile(r"^\d{1,3}(?:\.\d+)?$")


class DNumberError(ValueError):
    """Raised for text that is not a valid Dewey code."""


@dataclass(frozen=True)
class DNumber:
    """A Dewey code: 1-3 integer digits plus optional decimal digits."""

    integer_digits: str
    fraction_digits: str = ""

    def __post_init__(self):
        if not (1 <= len(self.integer_digits) <= 3) or not self.integer_digits.isdigit():
            raise DNumberError(f"bad integer digits {self.integer_digits!r}")
        if self.fraction_digits and not self.fraction_digits.isdigit():
            raise DNumberError(f"bad fraction digits {self.fraction_digits!r}")

    @classmethod
    def parse(cls, text: str) -> "DNumber":
        if not _CODE_RE.match(text):
            raise DNumberError(f"not a D-number: {text!r}")
        integer, _, fraction = text.partition(".")
        return cls(integer, fraction)

    def __str__(self) -> str:
        if self.fraction_digits:
            return f"{self.integer_digits}.{self.fraction_digits}"
        return self.integer_digits

    def __len__(self) -> int:
        """Digit count: integer digits plus fraction digits, point excluded."""
        return len(self.integer_digits) + len(self.fraction_digits)

    def digit_at(self, position: int) -> str:
        """Digit at a 0-based position, integer digits first, point skipped."""
        if not 0 <= position < len(self):
            raise IndexError(f"digit position {position} out of range for {self}")
        n = len(self.integer_digits)
        if position < n:
            return self.integer_digits[position]
        return self.fraction_digits[position - n]

    def prefix(self, depth: int) -> str:
        """First ``depth`` digits as a string; requires len(self) >= depth."""
        return "".join(self.digit_at(p) for p in range(depth))


@dataclass
class LexiconEntry:
    term: str                 # stemmed, lowercase, single-space separated
    codes: list[DNumber]      # no duplicates, insertion order


class DdcLexicon:
    """Immutable-after-load association from stemmed term to Dewey codes."""

    def __init__(self) -> None:
        self._entries: dict[str, LexiconEntry] = {}
        self.max_phrase_words: int = 1
        self.warnings: list[str] = []

    def __len__(self) -> int:
        return len(self._entries)

    def terms(self) -> Iterable[str]:
        return self._entries.keys()

    def entry(self, term: str) -> LexiconEntry | None:
        return self._entries.get(term)

    def add(self, term: str, code: DNumber) -> None:
        entry = self._entries.get(term)
        if entry is None:
            self._entries[term] = LexiconEntry(term, [code])
            self.max_phrase_words = max(self.max_phrase_words, len(term.split()))
        elif code not in entry.codes:
            entry.codes.append(code)

    def lookup(self, candidate: str) -> list[DNumber]:
        """Exact-match codes for a stemmed term or phrase; [] when absent."""
        entry = self._entries.get(candidate)
        return list(entry.codes) if entry else []


# Stemming is not idempotent ("database" -> "databas" -> "databa"), so a
# dumped lexicon marks its terms as pre-stemmed to make reloads lossless.
_STEMMED_PRAGMA = "#%stemmed"


def load_lexicon(source: IO[str]) -> DdcLexicon:
    """Parse ``code<TAB>term`` records; bad records are skipped with a warning.

    Duplicate terms merge their codes. Any run of whitespace separates the
    code from the term, so space-padded files load too.
    """
    lexicon = DdcLexicon()
    valid = 0
    prestemmed = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if line == _STEMMED_PRAGMA:
            prestemmed = True
            continue
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            lexicon.warnings.append(f"line {lineno}: missing term: {line!r}")
            continue
        code_text, term_text = parts
        try:
            code = DNumber.parse(code_text)
        except DNumberError:
            lexicon.warnings.append(f"line {lineno}: bad D-number {code_text!r}")
            continue
        if prestemmed:
            term = " ".join(term_text.lower().split())
        else:
            term = " ".join(stem(t.lower()) for t in term_text.split())
        lexicon.add(term, code)
        valid += 1
    if valid == 0:
        lexicon.warnings.append("no valid records in lexicon source")
    for message in lexicon.warnings:
        logger.warning("lexicon: %s", message)
    return lexicon


def dump_lexicon(lexicon: DdcLexicon, dest: IO[str]) -> None:
    """Write the line format back out; stored terms are already stemmed."""
    dest.write(_STEMMED_PRAGMA + "\n")
    for term in sorted(lexicon.terms()):
        for code in lexicon.entry(term).codes:
            dest.write(f"{code}\t{term}\n")


def load_lexicon_path(path: str | Path) -> DdcLexicon:
    with open(path, encoding="utf-8") as f:
        return load_lexicon(f)


def seed_lexicon_path() -> Path:
    """Path of the packaged seed lexicon (a small all-classes sample)."""
    return Path(resources.files("treasure_crawler").joinpath("data/ddc_seed.tsv"))
