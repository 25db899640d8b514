"""Lexicons and noisy-span resolution for utterance text.

Utterances arrive as transcribed speech, so titles and names can be
corrupted at the spelling level. Title resolution therefore scores every
candidate span by normalized Levenshtein distance rather than demanding
exact matches.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .catalog import GENRE_VOCABULARY, Catalog, CatalogError

TITLE_MATCH_THRESHOLD = 0.75

# Explicit sort-order keywords. Kept in the lexicon so slot extraction can
# consume them like any other surface form.
SORT_KEYWORDS: dict[str, str] = {
    "popular": "popular",
    "best": "popular",
    "recent": "recent",
    "new": "recent",
    "latest": "recent",
}

_TOKEN_SPLIT = re.compile(r"[\W_]+", re.UNICODE)
_APOSTROPHES = str.maketrans("", "", "'’")


def normalize(text: str) -> list[str]:
    """Case-fold, drop apostrophes, break on all other punctuation."""
    return [t for t in _TOKEN_SPLIT.split(text.casefold().translate(_APOSTROPHES)) if t]


def levenshtein(a: str, b: str) -> int:
    """Plain character-level edit distance (insert/delete/substitute)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class TitleMatch:
    movie_id: int
    matched_span: tuple[int, int]  # token range [start, end) in the utterance
    score: float  # 1.0 exactly iff the span is an exact normalized-title match


@dataclass(frozen=True)
class Lexicons:
    """Immutable derived vocabulary shared by the parser components."""

    genre_synonyms: dict[str, str]
    title_index: dict[str, tuple[int, ...]]
    tag_vocabulary: frozenset[str]
    sort_keywords: dict[str, str] = field(default_factory=lambda: dict(SORT_KEYWORDS))
    movie_years: dict[int, Optional[int]] = field(default_factory=dict)
    movie_rating_counts: dict[int, int] = field(default_factory=dict)
    max_title_tokens: int = 1


def load_genre_synonyms(path: str | Path) -> dict[str, str]:
    """Parse the tab-separated surface_form -> canonical_genre file."""
    synonyms: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CatalogError("expected surface<TAB>genre", str(path), line_no)
            surface, canonical = parts[0].strip().casefold(), parts[1].strip()
            synonyms[" ".join(normalize(surface))] = canonical
    return synonyms


def build_lexicons(catalog: Catalog, genre_synonyms: Mapping[str, str]) -> Lexicons:
    """Index every catalog title under its normalized form and collect the
    tag vocabulary. Synonyms whose canonical genre the catalog does not know
    are dropped."""
    synonyms = {
        surface: canonical
        for surface, canonical in genre_synonyms.items()
        if canonical in GENRE_VOCABULARY
    }
    title_index: dict[str, list[int]] = {}
    tags: set[str] = set()
    years: dict[int, Optional[int]] = {}
    counts: dict[int, int] = {}
    max_tokens = 1
    for movie in catalog.movies.values():
        key = " ".join(normalize(movie.title))
        title_index.setdefault(key, []).append(movie.id)
        max_tokens = max(max_tokens, len(key.split()))
        tags.update(movie.tags)
        years[movie.id] = movie.year
        counts[movie.id] = movie.rating_count
    return Lexicons(
        genre_synonyms=synonyms,
        title_index={k: tuple(sorted(v)) for k, v in title_index.items()},
        tag_vocabulary=frozenset(tags),
        movie_years=years,
        movie_rating_counts=counts,
        max_title_tokens=max_tokens,
    )


def title_score(span_text: str, title_text: str) -> float:
    """1 minus normalized edit distance; exactly 1.0 only on equality."""
    if span_text == title_text:
        return 1.0
    longest = max(len(span_text), len(title_text))
    if longest == 0:
        return 0.0
    return 1.0 - levenshtein(span_text, title_text) / longest


def resolve_title(
    lexicons: Lexicons,
    tokens: list[str],
    threshold: float = TITLE_MATCH_THRESHOLD,
) -> list[TitleMatch]:
    """Scan every n-gram span for indexed titles, exact first, then fuzzy.

    Returns matches at or above the threshold, best score first. Movies
    sharing a title are all returned; the caller disambiguates by year slot
    or popularity.
    """
    best: dict[int, TitleMatch] = {}
    limit = min(len(tokens), lexicons.max_title_tokens)
    for width in range(1, limit + 1):
        for start in range(0, len(tokens) - width + 1):
            span = (start, start + width)
            span_text = " ".join(tokens[start : start + width])
            exact = lexicons.title_index.get(span_text)
            if exact is not None:
                for movie_id in exact:
                    _offer(best, TitleMatch(movie_id, span, 1.0))
                continue
            for title_text, movie_ids in lexicons.title_index.items():
                # Edit distance is at least the length gap, so skip titles
                # that cannot reach the threshold.
                longest = max(len(span_text), len(title_text))
                if longest == 0 or abs(len(span_text) - len(title_text)) > longest * (1 - threshold):
                    continue
                score = title_score(span_text, title_text)
                if score >= threshold:
                    for movie_id in movie_ids:
                        _offer(best, TitleMatch(movie_id, span, score))
    return sorted(best.values(), key=lambda m: (-m.score, m.movie_id))


def _offer(best: dict[int, TitleMatch], match: TitleMatch) -> None:
    current = best.get(match.movie_id)
    if current is None or match.score > current.score:
        best[match.movie_id] = match


def match_genres(lexicons: Lexicons, tokens: list[str]) -> set[str]:
    """Longest-match scan over genre synonyms; multi-word synonyms consume
    all their tokens."""
    genres, _ = match_genre_spans(lexicons, tokens)
    return genres


def match_genre_spans(lexicons: Lexicons, tokens: list[str]) -> tuple[set[str], set[int]]:
    """As match_genres, but also reports which token positions were consumed."""
    if not lexicons.genre_synonyms:
        return set(), set()
    max_words = max(len(s.split()) for s in lexicons.genre_synonyms)
    genres: set[str] = set()
    consumed: set[int] = set()
    i = 0
    while i < len(tokens):
        matched_width = 0
        for width in range(min(max_words, len(tokens) - i), 0, -1):
            surface = " ".join(tokens[i : i + width])
            canonical = lexicons.genre_synonyms.get(surface)
            if canonical is not None:
                genres.add(canonical)
                consumed.update(range(i, i + width))
                matched_width = width
                break
        i += matched_width or 1
    return genres, consumed
