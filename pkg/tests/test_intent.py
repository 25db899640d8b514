"""Intent classification and slot extraction.

The classifier oracle is worked by hand: with the two training rows
"good fun film" and "bad sad film" the feature space has 9 entries
(3 + 2 unigram/bigram features per row, minus the shared "film"), so
for the query "good film" (its bigram is unseen and skipped):

    P(good|FindMovies) = (1+1)/(5+9)   P(film|FindMovies) = (1+1)/(5+9)
    P(good|Stop)       = (0+1)/(5+9)   P(film|Stop)       = (1+1)/(5+9)

with equal priors the posterior is exactly 2/3 versus 1/3.
"""
from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cinevoice.entities import normalize
from cinevoice.intent import (
    FIND_MOVIES,
    GO_BACK,
    HOME,
    MORE_RESULTS,
    PLAY_TRAILER,
    SHOW_DETAILS,
    SIMILAR_MOVIES,
    STOP,
    UNKNOWN,
    classify,
    deserialize_model,
    extract_slots,
    load_corpus,
    parse,
    posteriors,
    serialize_model,
    strip_wake_prefix,
    train_intent_model,
)

HAND_CORPUS = [("good fun film", FIND_MOVIES), ("bad sad film", STOP)]


def test_posteriors_hand_computed():
    model = train_intent_model(HAND_CORPUS)
    p = posteriors(model, "good film")
    assert abs(p[FIND_MOVIES] - 2 / 3) < 1e-12
    assert abs(p[STOP] - 1 / 3) < 1e-12
    assert abs(sum(p.values()) - 1.0) < 1e-12


def test_classify_uses_posterior_argmax():
    model = train_intent_model(HAND_CORPUS)
    label, confidence = classify(model, "good film")
    assert label == FIND_MOVIES
    assert confidence == pytest.approx(2 / 3)


def test_classify_empty_text_is_unknown():
    model = train_intent_model(HAND_CORPUS)
    assert classify(model, "") == (UNKNOWN, 0.0)
    assert classify(model, "   ") == (UNKNOWN, 0.0)


def test_classify_all_oov_ties_break_alphabetically():
    # Unseen words contribute nothing, leaving the uniform prior; the
    # two-class tie lands on the alphabetically first label, and at
    # exactly the threshold the label is kept.
    model = train_intent_model(HAND_CORPUS)
    assert classify(model, "zebra") == (FIND_MOVIES, pytest.approx(0.5))
    assert classify(model, "zebra", threshold=0.6) == (UNKNOWN, pytest.approx(0.5))


def test_train_rejects_bad_inputs():
    with pytest.raises(ValueError):
        train_intent_model([])
    with pytest.raises(ValueError):
        train_intent_model(HAND_CORPUS, alpha=0.0)
    with pytest.raises(ValueError):
        train_intent_model([("hello", UNKNOWN)])
    with pytest.raises(ValueError):
        train_intent_model([("hello", "NotAnIntent")])
    with pytest.raises(ValueError):
        train_intent_model([("", FIND_MOVIES)])


def test_training_is_order_insensitive():
    rows = [
        ("show action movies", FIND_MOVIES),
        ("more like this one", SIMILAR_MOVIES),
        ("go back", GO_BACK),
        ("stop", STOP),
        ("show me more", MORE_RESULTS),
    ]
    base = serialize_model(train_intent_model(rows))
    rng = random.Random(7)
    for _ in range(5):
        shuffled = rows[:]
        rng.shuffle(shuffled)
        assert serialize_model(train_intent_model(shuffled)) == base


def test_serialization_round_trip_preserves_behavior(intent_model):
    raw = serialize_model(intent_model)
    restored = deserialize_model(raw)
    assert serialize_model(restored) == raw
    for text in ("show action movies", "go back", "stop", "play the trailer"):
        assert classify(restored, text) == classify(intent_model, text)


def test_deserialize_rejects_other_formats():
    with pytest.raises(ValueError):
        deserialize_model('{"format": "item-model/1"}')


def test_load_corpus_reports_malformed_line(tmp_path):
    path = tmp_path / "corpus.tsv"
    path.write_text("# comment\nshow movies\tFindMovies\nmissing label\n",
                    encoding="utf-8")
    with pytest.raises(ValueError) as err:
        load_corpus(path)
    assert "corpus.tsv" in str(err.value)
    assert "3" in str(err.value)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Alexa, ask MovieLens to show action movies", "show action movies"),
        ("ask movielens to show action movies", "show action movies"),
        ("tell movielens to go back", "go back"),
        ("Alexa, open MovieLens", ""),
        ("open movielens", ""),
        ("alexa alexa show comedies", "show comedies"),
        ("show action movies", "show action movies"),
        # Only prefixes are stripped, never mid-utterance mentions.
        ("what does alexa think", "what does alexa think"),
    ],
)
def test_strip_wake_prefix(text, expected):
    assert strip_wake_prefix(text) == expected


@given(st.text(max_size=60))
@settings(max_examples=80)
def test_strip_wake_prefix_is_idempotent(text):
    once = strip_wake_prefix(text)
    assert strip_wake_prefix(once) == once


def test_packaged_model_classifies_core_utterances(intent_model):
    cases = {
        "show action movies": FIND_MOVIES,
        "what are some popular comedies": FIND_MOVIES,
        "im looking for futuristic movies": FIND_MOVIES,
        "show me more like pitch black": SIMILAR_MOVIES,
        "show me more": MORE_RESULTS,
        "tell me about pitch black": SHOW_DETAILS,
        "play the trailer": PLAY_TRAILER,
        "go back": GO_BACK,
        "start over": HOME,
        "stop": STOP,
    }
    for text, want in cases.items():
        label, confidence = classify(intent_model, text)
        assert label == want, f"{text!r} -> {label} ({confidence:.3f})"
        assert confidence > 0.5


def test_packaged_model_low_confidence_is_unknown(intent_model):
    label, confidence = classify(intent_model, "quux flurgle")
    assert label == UNKNOWN
    assert confidence < 0.5


def test_slots_genre_and_sort(demo_lexicons):
    slots = extract_slots(demo_lexicons, normalize("what are some popular comedies"))
    assert slots.genres == frozenset({"Comedy"})
    assert slots.sort == "popular"
    assert slots.title_match is None


def test_slots_synonym_genre_with_decade(demo_lexicons):
    slots = extract_slots(demo_lexicons, normalize("show me funny movies from the 90s"))
    assert slots.genres == frozenset({"Comedy"})
    assert (slots.year_min, slots.year_max) == (1990, 1999)


def test_slots_exact_year(demo_lexicons):
    slots = extract_slots(demo_lexicons, normalize("action movies from 1997"))
    assert slots.genres == frozenset({"Action"})
    assert (slots.year_min, slots.year_max) == (1997, 1997)


def test_slots_two_digit_decade_century(demo_lexicons):
    slots = extract_slots(demo_lexicons, normalize("movies from the 20s"))
    assert (slots.year_min, slots.year_max) == (2020, 2029)
    slots = extract_slots(demo_lexicons, normalize("movies from the 40s"))
    assert (slots.year_min, slots.year_max) == (1940, 1949)


def test_slots_descriptor_from_tag_vocabulary(demo_lexicons):
    slots = extract_slots(demo_lexicons, normalize("im looking for futuristic movies"))
    assert slots.descriptor_terms == ("futuristic",)
    assert slots.genres == frozenset()


def test_slots_person_span(demo_lexicons):
    slots = extract_slots(demo_lexicons, normalize("movies starring harrison ford"))
    assert slots.person_span == "harrison ford"


def test_slots_title_requires_hint_or_near_exact(demo_lexicons):
    # Exact title inside a query: accepted even without a title intent.
    slots = extract_slots(demo_lexicons, normalize("show me more like pitch black"))
    assert slots.title_match is not None
    assert slots.title_match.movie_id == 14
    # A one-edit typo is still near-exact and accepted unhinted.
    near = extract_slots(demo_lexicons, normalize("more like pich black"))
    assert near.title_match is not None
    assert near.title_match.score == pytest.approx(1 - 1 / 11)
    # Two edits fall under the near-exact bar and need the hinting intent.
    tokens = normalize("more like pich blak")
    assert extract_slots(demo_lexicons, tokens).title_match is None
    hinted = extract_slots(demo_lexicons, tokens, intent_hint=SIMILAR_MOVIES)
    assert hinted.title_match is not None
    assert hinted.title_match.movie_id == 14
    assert hinted.title_match.score == pytest.approx(1 - 2 / 11)


def test_slots_title_masks_genre_words(demo_lexicons):
    # "Pitch Black" does not leak tokens, and the genre word outside the
    # span still registers.
    slots = extract_slots(
        demo_lexicons, normalize("action movies like pitch black"),
        intent_hint=SIMILAR_MOVIES,
    )
    assert slots.title_match is not None
    assert slots.title_match.movie_id == 14
    assert slots.genres == frozenset({"Action"})


def test_slots_year_hint_disambiguates_duplicate_titles(demo_lexicons):
    slots = extract_slots(
        demo_lexicons, normalize("tell me about the 1933 king kong"),
        intent_hint=SHOW_DETAILS,
    )
    assert slots.title_match is not None
    assert slots.title_match.movie_id == 31
    slots = extract_slots(
        demo_lexicons, normalize("tell me about king kong"),
        intent_hint=SHOW_DETAILS,
    )
    assert slots.title_match is not None
    assert slots.title_match.movie_id == 13


def test_slots_refinement_bigrams(demo_lexicons):
    assert extract_slots(demo_lexicons, normalize("only the funny ones")).refinement
    assert extract_slots(demo_lexicons, normalize("just the recent ones")).refinement
    assert extract_slots(demo_lexicons, normalize("the scary ones of those")).refinement
    assert not extract_slots(demo_lexicons, normalize("show comedies")).refinement


def test_parse_wake_only_is_home(intent_model, demo_lexicons):
    request = parse(intent_model, demo_lexicons, "Alexa, open MovieLens")
    assert request.intent == HOME
    assert request.confidence == 1.0
    assert request.raw_text == "Alexa, open MovieLens"


def test_parse_full_pipeline(intent_model, demo_lexicons):
    request = parse(intent_model, demo_lexicons,
                    "Alexa, ask MovieLens to show action movies")
    assert request.intent == FIND_MOVIES
    assert request.slots.genres == frozenset({"Action"})
    assert request.raw_text == "Alexa, ask MovieLens to show action movies"


def test_parse_deterministic(intent_model, demo_lexicons):
    first = parse(intent_model, demo_lexicons, "show me more like Pitch Black")
    second = parse(intent_model, demo_lexicons, "show me more like Pitch Black")
    assert first == second
