"""Galaxy detection: predicting a Dewey prefix for a topical boundary.

Every boundary word/phrase with lexicon codes plots one dot per code.
The galaxy is found by refining digit regions: at each digit position the
surviving dots are split into ten regions, each region is weighted by
W = n * sum(length(d) * anchor_impact(d)), and the maximum-weight region(s)
survive to the next digit. Anchor-text dots weigh 1.4x.

Region selection uses exact rational arithmetic internally so that ties are
decided identically no matter how the dots are ordered; the public
region_weight value is the plain floating-point expression.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .ddc import DdcLexicon, DNumber
from .htmldoc import BoundaryWord, PageElements, UnvisitedLink
from .textproc import stem_text

ANCHOR_IMPACT = 1.4


@dataclass(frozen=True)
class Dot:
    code: DNumber
    is_anchor: bool


@dataclass
class GalaxyResult:
    prefixes: set[str]       # digit strings, all of length = refinement depth
    weight: float            # the winning region weight at the final depth
    dot_count: int           # dots surviving in the winning region(s)


@dataclass
class TopicConfig:
    """The crawler's assigned topics plus the off-topic floor priority."""

    topics: set[str]
    refinement_depth: int = 3
    off_topic_priority: float = 0.01

    def __post_init__(self):
        if not self.topics:
            raise ValueError("at least one topic prefix is required")
        for prefix in self.topics:
            if len(prefix) != self.refinement_depth or not prefix.isdigit():
                raise ValueError(
                    f"topic prefix {prefix!r} must be {self.refinement_depth} digits"
                )
        if not 0 < self.off_topic_priority < 1:
            raise ValueError("off_topic_priority must be in (0, 1)")


def plot_dots(boundary: Sequence[BoundaryWord], lexicon: DdcLexicon) -> list[Dot]:
    """One dot per (matched term occurrence, code), longest phrase first.

    Phrases are matched greedily left to right up to the lexicon's longest
    phrase; a match consumes its words. The anchor flag is inherited from
    the first word of the match. Repeated occurrences plot repeated dots.
    """
    dots: list[Dot] = []
    terms = [w.term for w in boundary]
    i = 0
    while i < len(terms):
        consumed = 1
        for n in range(min(lexicon.max_phrase_words, len(terms) - i), 0, -1):
            codes = lexicon.lookup(" ".join(terms[i : i + n]))
            if codes:
                dots.extend(Dot(code, boundary[i].is_anchor) for code in codes)
                consumed = n
                break
        i += consumed
    return dots


def region_weight(dots: Sequence[Dot], anchor_impact: float = ANCHOR_IMPACT) -> float:
    """W = n * sum(length * impact) over the dots; 0.0 for no dots."""
    if not dots:
        return 0.0
    total = 0.0
    for dot in dots:
        total += len(dot.code) * (anchor_impact if dot.is_anchor else 1.0)
    return len(dots) * total


def _exact_weight(dots: Sequence[Dot], impact: Fraction) -> Fraction:
    return len(dots) * sum(
        (len(d.code) * (impact if d.is_anchor else 1) for d in dots), Fraction(0)
    )


def find_galaxy(
    dots: Sequence[Dot],
    depth: int,
    anchor_impact: float = ANCHOR_IMPACT,
) -> GalaxyResult | None:
    """Maximum-weight digit-prefix region(s) after `depth` refinements.

    At each digit position, dots shorter than the position drop out, the
    rest partition by that digit, and all regions attaining the maximum W
    are kept with their dots pooled. None when no dots survive a stage.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    impact = Fraction(anchor_impact)
    surviving = list(dots)
    weight = Fraction(0)
    for position in range(depth):
        regions: dict[str, list[Dot]] = {}
        for dot in surviving:
            if len(dot.code) > position:
                regions.setdefault(dot.code.digit_at(position), []).append(dot)
        if not regions:
            return None
        weights = {digit: _exact_weight(group, impact) for digit, group in regions.items()}
        weight = max(weights.values())
        surviving = [
            dot
            for digit in sorted(regions)
            if weights[digit] == weight
            for dot in regions[digit]
        ]
    return GalaxyResult(
        prefixes={dot.code.prefix(depth) for dot in surviving},
        weight=float(weight),
        dot_count=len(surviving),
    )


def classify_link(
    link: UnvisitedLink, lexicon: DdcLexicon, config: TopicConfig
) -> set[str] | None:
    """Predicted Dewey prefixes of the page behind a link, from its boundary."""
    result = find_galaxy(plot_dots(link.boundary, lexicon), config.refinement_depth)
    return result.prefixes if result else None


def classify_page(
    page: PageElements, lexicon: DdcLexicon, config: TopicConfig
) -> set[str] | None:
    """Predicted prefixes of a fetched page.

    The whole visible text plots unweighted dots; main-heading terms are
    re-plotted with anchor impact, mirroring the extra weight anchor text
    gets for links.
    """
    boundary = [BoundaryWord(t, False) for t in page.body_terms]
    boundary += [BoundaryWord(t, True) for t in stem_text(page.main_heading)]
    result = find_galaxy(plot_dots(boundary, lexicon), config.refinement_depth)
    return result.prefixes if result else None


def is_on_topic(prefixes: Iterable[str] | None, config: TopicConfig) -> bool:
    """True iff any predicted prefix is one of the crawler's topics."""
    return bool(prefixes) and bool(set(prefixes) & config.topics)
