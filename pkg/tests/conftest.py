"""Shared fixtures: the bundled demo corpus loaded once per run, plus
small hand-built catalogs whose expected numbers fit in a code review."""
from __future__ import annotations

from pathlib import Path

import pytest

from cinevoice.catalog import (
    Catalog,
    Movie,
    RatingsMatrix,
    load_catalog,
    profile_for,
)
from cinevoice.cli import SimClock
from cinevoice.dialogue import Deps
from cinevoice.entities import build_lexicons, load_genre_synonyms
from cinevoice.gateway import Service
from cinevoice.intent import load_corpus, train_intent_model
from cinevoice.recsys import build_item_model
from cinevoice.server import packaged_data_path

REPO_ROOT = Path(__file__).resolve().parents[1]
DEMO_DIR = REPO_ROOT / "data" / "demo"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

# The 5 user x 6 item matrix every collaborative-filtering test shares.
# Items deliberately use ids unlike the demo catalog's so a mixup fails.
FIXTURE_RATINGS = {
    1: {10: 4.0, 20: 3.0, 30: 5.0, 40: 2.0, 50: 3.5},
    2: {10: 3.5, 20: 2.5, 30: 4.5, 60: 3.0},
    3: {10: 1.0, 20: 2.0, 40: 4.5, 50: 4.0, 60: 2.5},
    4: {20: 5.0, 30: 4.0, 40: 3.0, 50: 4.5, 60: 5.0},
    5: {10: 2.5, 30: 3.5, 40: 4.0, 60: 1.5},
}


@pytest.fixture()
def fixture_matrix() -> RatingsMatrix:
    return RatingsMatrix(by_user={u: dict(r) for u, r in FIXTURE_RATINGS.items()})


def make_movie(movie_id: int, title: str, **kw) -> Movie:
    defaults = dict(
        year=2000,
        genres=frozenset(),
        tags=(),
        rating_count=0,
        mean_rating=None,
        trailer_url=None,
    )
    defaults.update(kw)
    return Movie(id=movie_id, title=title, **defaults)


def content_catalog() -> Catalog:
    """Ten movies with overlapping genres and tags for similarity tests.

    Movie 109 has no genres and no tags (zero vector); 101 and 102 share
    the same genre set and tag bag so their similarity is exactly 1.
    """
    movies = [
        make_movie(101, "Star Freight", genres=frozenset({"Sci-Fi"}),
                   tags=("space", "survival"), rating_count=30),
        make_movie(102, "Cold Orbit", genres=frozenset({"Sci-Fi"}),
                   tags=("space", "survival"), rating_count=12),
        make_movie(103, "Iron Dunes", genres=frozenset({"Sci-Fi", "Action"}),
                   tags=("space",), rating_count=25),
        make_movie(104, "Last Harvest", genres=frozenset({"Drama"}),
                   tags=("dystopia", "survival"), rating_count=18),
        make_movie(105, "Glass City", genres=frozenset({"Drama", "Thriller"}),
                   tags=("dystopia",), rating_count=40),
        make_movie(106, "Night Ledger", genres=frozenset({"Thriller"}),
                   tags=("heist",), rating_count=8),
        make_movie(107, "Copper Alley", genres=frozenset({"Thriller", "Crime"}),
                   tags=("heist", "heist"), rating_count=8),
        make_movie(108, "Parade of Hours", genres=frozenset({"Comedy"}),
                   tags=(), rating_count=50),
        make_movie(109, "Reel Nine", genres=frozenset(), tags=(), rating_count=0),
        make_movie(110, "Meadow Line", genres=frozenset({"Comedy", "Romance"}),
                   tags=("heist",), rating_count=50),
    ]
    return Catalog(movies={m.id: m for m in movies})


@pytest.fixture(scope="session")
def genre_synonyms() -> dict[str, str]:
    return load_genre_synonyms(packaged_data_path("genre_synonyms.tsv"))


@pytest.fixture(scope="session")
def demo_loaded(genre_synonyms):
    return load_catalog(
        DEMO_DIR / "movies.csv",
        DEMO_DIR / "ratings.csv",
        DEMO_DIR / "tags.csv",
        genre_synonyms=genre_synonyms,
    )


@pytest.fixture(scope="session")
def demo_catalog(demo_loaded):
    return demo_loaded[0]


@pytest.fixture(scope="session")
def demo_ratings(demo_loaded):
    return demo_loaded[1]


@pytest.fixture(scope="session")
def demo_lexicons(demo_catalog, genre_synonyms):
    return build_lexicons(demo_catalog, genre_synonyms)


@pytest.fixture(scope="session")
def demo_neighborhood(demo_ratings):
    return build_item_model(demo_ratings, k=20, min_support=2)


@pytest.fixture(scope="session")
def intent_model():
    corpus = load_corpus(packaged_data_path("intent_corpus.tsv"))
    return train_intent_model(corpus)


@pytest.fixture(scope="session")
def demo_deps(demo_catalog, demo_ratings, demo_lexicons, demo_neighborhood):
    return Deps(
        catalog=demo_catalog,
        lexicons=demo_lexicons,
        neighborhood=demo_neighborhood,
        profile=profile_for(demo_ratings, 1),
    )


@pytest.fixture()
def make_service(demo_catalog, demo_ratings, demo_lexicons, demo_neighborhood,
                 intent_model):
    """Factory for a fresh Service on a simulated clock."""

    def factory(clock: SimClock | None = None, **overrides) -> tuple[Service, SimClock]:
        clock = clock or SimClock()
        service = Service(
            catalog=demo_catalog,
            ratings=demo_ratings,
            lexicons=demo_lexicons,
            neighborhood=demo_neighborhood,
            intent_model=intent_model,
            clock=clock,
            **overrides,
        )
        return service, clock

    return factory
