"""Utterance understanding: intent classification and slot extraction.

Turns one transcribed utterance into a structured request: an intent
label from a fixed set, plus whatever slots (genres, title, sort key,
years, descriptors) can be read out of the token stream.

The classifier is a multinomial naive Bayes over unigram and bigram
features with add-one smoothing, computed in log space. It is trained
from a small labelled corpus shipped with the package and is fully
deterministic: training twice on permutations of the same corpus gives
an identical model.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .entities import (
    Lexicons,
    TitleMatch,
    match_genre_spans,
    normalize,
    resolve_title,
)

FIND_MOVIES = "FindMovies"
SIMILAR_MOVIES = "SimilarMovies"
MORE_RESULTS = "MoreResults"
SHOW_DETAILS = "ShowDetails"
PLAY_TRAILER = "PlayTrailer"
GO_BACK = "GoBack"
HOME = "Home"
STOP = "Stop"
UNKNOWN = "Unknown"

INTENT_LABELS = frozenset({
    FIND_MOVIES,
    SIMILAR_MOVIES,
    MORE_RESULTS,
    SHOW_DETAILS,
    PLAY_TRAILER,
    GO_BACK,
    HOME,
    STOP,
    UNKNOWN,
})

DEFAULT_CONFIDENCE_THRESHOLD = 0.5

# A high-scoring title match is trusted even when the intent does not
# normally carry one; anything weaker needs a title-bearing intent.
STRONG_TITLE_SCORE = 0.9

MODEL_FORMAT = "intent-model/1"

# Wake-phrase prefixes, stripped repeatedly until none applies so the
# result is a fixpoint (stripping twice equals stripping once).
_WAKE_PATTERNS = (
    re.compile(r"^\s*alexa\b[\s,]*", re.IGNORECASE),
    re.compile(r"^\s*(?:ask|tell)\s+movielens\s+to\b[\s,]*", re.IGNORECASE),
    re.compile(r"^\s*open\s+movielens\b[\s,]*", re.IGNORECASE),
)

_YEAR_TOKEN = re.compile(r"^(19|20)\d\d$")
_DECADE_TOKEN = re.compile(r"^(\d\d|19\d0|20\d0)s$")

_PERSON_MARKERS = frozenset({"starring", "featuring"})

# Marker word pairs that signal the user is narrowing the current list
# rather than starting a new search.
_REFINEMENT_BIGRAMS = frozenset({
    ("of", "those"),
    ("of", "these"),
    ("of", "them"),
    ("only", "the"),
    ("just", "the"),
    ("from", "those"),
    ("from", "these"),
})


def load_corpus(path: "str | Path") -> list[tuple[str, str]]:
    """Read a labelled corpus from a TSV of intent<TAB>utterance rows.

    Lines that are blank or start with # are skipped. Order follows the
    file, though training is insensitive to it.
    """
    rows: list[tuple[str, str]] = []
    text = Path(path).read_text(encoding="utf-8")
    for line_num, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{line_num}: expected intent<TAB>utterance")
        label, utterance = parts[0].strip(), parts[1].strip()
        rows.append((utterance, label))
    return rows


def strip_wake_prefix(text: str) -> str:
    """Remove leading wake phrases from a transcribed utterance.

    Handles the invocation name and launch verbs so that "alexa, ask
    movielens to show action movies" and "show action movies" parse the
    same way. Applied until no pattern matches, so it is idempotent.
    """
    current = text
    while True:
        for pattern in _WAKE_PATTERNS:
            stripped = pattern.sub("", current, count=1)
            if stripped != current:
                current = stripped
                break
        else:
            return current


def _features(tokens: Sequence[str]) -> list[str]:
    feats = list(tokens)
    feats.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return feats


@dataclass(frozen=True)
class IntentModel:
    """Trained naive Bayes intent classifier.

    All counts are integers; keys are stored sorted so two models built
    from the same corpus in any order compare equal and serialize to
    identical bytes.
    """

    alpha: float
    class_counts: Mapping[str, int]
    feature_counts: Mapping[str, Mapping[str, int]]

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(self.class_counts)

    def vocabulary(self) -> frozenset[str]:
        vocab: set[str] = set()
        for counts in self.feature_counts.values():
            vocab.update(counts)
        return frozenset(vocab)


def train_intent_model(
    corpus: Iterable[tuple[str, str]], alpha: float = 1.0
) -> IntentModel:
    """Fit the classifier on (utterance, label) pairs.

    Raises ValueError on an empty corpus, a label outside the known
    intent set, or an utterance that normalizes to no tokens. Unknown
    is a fallback outcome, never a trainable class.
    """
    if alpha <= 0:
        raise ValueError(f"smoothing alpha must be positive, got {alpha}")
    class_counts: dict[str, int] = {}
    feature_counts: dict[str, dict[str, int]] = {}
    seen = 0
    for text, label in corpus:
        seen += 1
        if label == UNKNOWN or label not in INTENT_LABELS:
            raise ValueError(f"untrainable intent label: {label!r}")
        tokens = normalize(text)
        if not tokens:
            raise ValueError(f"utterance has no tokens: {text!r}")
        class_counts[label] = class_counts.get(label, 0) + 1
        bucket = feature_counts.setdefault(label, {})
        for feat in _features(tokens):
            bucket[feat] = bucket.get(feat, 0) + 1
    if seen == 0:
        raise ValueError("training corpus is empty")
    ordered_classes = {c: class_counts[c] for c in sorted(class_counts)}
    ordered_features = {
        c: dict(sorted(feature_counts[c].items())) for c in ordered_classes
    }
    return IntentModel(
        alpha=alpha,
        class_counts=ordered_classes,
        feature_counts=ordered_features,
    )


def posteriors(model: IntentModel, text: str) -> dict[str, float]:
    """Class posteriors for an utterance, normalized to sum to one.

    Features absent from the training vocabulary are skipped, so an
    utterance of pure novelty falls back to the class priors.
    """
    tokens = normalize(text)
    vocab = model.vocabulary()
    feats = [f for f in _features(tokens) if f in vocab]
    total_docs = sum(model.class_counts.values())
    vsize = len(vocab)
    log_joint: dict[str, float] = {}
    for label, doc_count in model.class_counts.items():
        counts = model.feature_counts[label]
        denom = sum(counts.values()) + model.alpha * vsize
        score = math.log(doc_count / total_docs)
        for feat in feats:
            score += math.log((counts.get(feat, 0) + model.alpha) / denom)
        log_joint[label] = score
    peak = max(log_joint.values())
    raw = {label: math.exp(s - peak) for label, s in log_joint.items()}
    norm = sum(raw.values())
    return {label: value / norm for label, value in raw.items()}


def classify(
    model: IntentModel,
    text: str,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> tuple[str, float]:
    """Pick the most probable intent, falling back to Unknown.

    Returns (label, confidence) where confidence is the winning
    posterior. Empty input and sub-threshold winners come back as
    Unknown; ties break toward the alphabetically first label.
    """
    if not normalize(text):
        return UNKNOWN, 0.0
    probs = posteriors(model, text)
    label = max(sorted(probs), key=lambda c: probs[c])
    confidence = probs[label]
    if confidence < threshold:
        return UNKNOWN, confidence
    return label, confidence


def serialize_model(model: IntentModel) -> str:
    payload = {
        "format": MODEL_FORMAT,
        "alpha": model.alpha,
        "classes": {
            label: {
                "count": model.class_counts[label],
                "features": model.feature_counts[label],
            }
            for label in model.class_counts
        },
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def deserialize_model(raw: str) -> IntentModel:
    payload = json.loads(raw)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format: {payload.get('format')!r}")
    classes = payload["classes"]
    class_counts = {label: classes[label]["count"] for label in sorted(classes)}
    feature_counts = {
        label: dict(sorted(classes[label]["features"].items()))
        for label in class_counts
    }
    return IntentModel(
        alpha=payload["alpha"],
        class_counts=class_counts,
        feature_counts=feature_counts,
    )


@dataclass(frozen=True)
class SlotSet:
    """Slots extracted from one utterance. All fields optional."""

    genres: frozenset[str] = frozenset()
    descriptor_terms: tuple[str, ...] = ()
    title_match: Optional[TitleMatch] = None
    person_span: Optional[str] = None
    sort: Optional[str] = None
    year_min: Optional[int] = None
    year_max: Optional[int] = None
    refinement: bool = False


@dataclass(frozen=True)
class StructuredRequest:
    """One utterance reduced to intent, slots, and confidence."""

    intent: str
    slots: SlotSet
    confidence: float
    raw_text: str


def detect_refinement(tokens: Sequence[str]) -> bool:
    """True when the utterance narrows the list already on screen."""
    return any(pair in _REFINEMENT_BIGRAMS for pair in zip(tokens, tokens[1:]))


def _decade_range(token: str) -> tuple[int, int]:
    digits = token[:-1]
    if len(digits) == 4:
        start = int(digits)
    else:
        two = int(digits)
        # Two-digit decades: 00s/10s/20s read as this century, the rest
        # as the last one; movie catalogs skew heavily to 19xx.
        start = 2000 + two if two < 30 else 1900 + two
    return start, start + 9


def _year_constraints(
    tokens: Sequence[str], skip: set[int]
) -> tuple[Optional[int], Optional[int], set[int]]:
    points: list[tuple[int, int]] = []
    consumed: set[int] = set()
    for i, tok in enumerate(tokens):
        if i in skip:
            continue
        if _YEAR_TOKEN.match(tok):
            year = int(tok)
            points.append((year, year))
            consumed.add(i)
        elif _DECADE_TOKEN.match(tok):
            points.append(_decade_range(tok))
            consumed.add(i)
    if not points:
        return None, None, consumed
    return min(p[0] for p in points), max(p[1] for p in points), consumed


def _pick_title(
    matches: Sequence[TitleMatch],
    lexicons: Lexicons,
    year_hints: set[int],
) -> TitleMatch:
    best_score = matches[0].score
    tied = [m for m in matches if m.score == best_score]
    if len(tied) == 1:
        return tied[0]
    if year_hints:
        dated = [m for m in tied if lexicons.movie_years.get(m.movie_id) in year_hints]
        if dated:
            tied = dated
    return min(
        tied,
        key=lambda m: (-lexicons.movie_rating_counts.get(m.movie_id, 0), m.movie_id),
    )


def extract_slots(
    lexicons: Lexicons,
    tokens: Sequence[str],
    intent_hint: str = UNKNOWN,
    title_threshold: float = 0.75,
) -> SlotSet:
    """Read slots out of a normalized token sequence.

    The title span is resolved first and masked off, so that genre or
    year words inside a matched title are not also consumed as filters.
    A fuzzy title is only accepted when the intent calls for one
    (SimilarMovies, ShowDetails) or when the match is near-exact.
    """
    tokens = list(tokens)
    refinement = detect_refinement(tokens)

    # Raw year tokens anywhere in the utterance may disambiguate between
    # same-titled movies, before any are consumed as range constraints.
    year_hints: set[int] = {
        int(t) for t in tokens if _YEAR_TOKEN.match(t)
    }

    title: Optional[TitleMatch] = None
    matches = resolve_title(lexicons, tokens, threshold=title_threshold)
    if matches:
        candidate = _pick_title(matches, lexicons, year_hints)
        wants_title = intent_hint in (SIMILAR_MOVIES, SHOW_DETAILS)
        if wants_title or candidate.score >= STRONG_TITLE_SCORE:
            title = candidate

    masked: set[int] = set()
    if title is not None:
        masked.update(range(title.matched_span[0], title.matched_span[1]))

    visible = [t if i not in masked else "\x00" for i, t in enumerate(tokens)]

    genres, genre_positions = match_genre_spans(lexicons, visible)
    masked.update(genre_positions)

    year_min, year_max, year_positions = _year_constraints(tokens, masked)
    masked.update(year_positions)

    sort: Optional[str] = None
    for i, tok in enumerate(tokens):
        if i in masked:
            continue
        key = lexicons.sort_keywords.get(tok)
        if key is not None:
            sort = key
            masked.add(i)
            break

    person: Optional[str] = None
    for i, tok in enumerate(tokens):
        if i in masked or tok not in _PERSON_MARKERS:
            continue
        span: list[str] = []
        j = i + 1
        while j < len(tokens) and j not in masked and len(span) < 3:
            span.append(tokens[j])
            masked.add(j)
            j += 1
        if span:
            person = " ".join(span)
            masked.add(i)
        break

    descriptors: list[str] = []
    for i, tok in enumerate(tokens):
        if i in masked:
            continue
        if tok in lexicons.tag_vocabulary and tok not in descriptors:
            descriptors.append(tok)

    return SlotSet(
        genres=frozenset(genres),
        descriptor_terms=tuple(descriptors),
        title_match=title,
        person_span=person,
        sort=sort,
        year_min=year_min,
        year_max=year_max,
        refinement=refinement,
    )


def parse(
    model: IntentModel,
    lexicons: Lexicons,
    text: str,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    title_threshold: float = 0.75,
) -> StructuredRequest:
    """Full pipeline: wake-prefix strip, classify, extract slots.

    An utterance that is nothing but wake phrases becomes a Home
    request with full confidence, mirroring a bare skill launch.
    """
    remainder = strip_wake_prefix(text)
    tokens = normalize(remainder)
    if not tokens:
        return StructuredRequest(
            intent=HOME, slots=SlotSet(), confidence=1.0, raw_text=text
        )
    label, confidence = classify(model, remainder, threshold=threshold)
    slots = extract_slots(
        lexicons, tokens, intent_hint=label, title_threshold=title_threshold
    )
    return StructuredRequest(
        intent=label, slots=slots, confidence=confidence, raw_text=text
    )
