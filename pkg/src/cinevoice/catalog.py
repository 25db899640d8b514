"""Movie catalog: ingestion, indexing, and candidate filtering.

Loads MovieLens-style delimited files (movies / ratings / optional tags),
normalizes titles, aggregates popularity statistics, and answers filtered
candidate queries plus the two explicit sort orders.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

# The closed genre vocabulary of the MovieLens file convention. Rows naming a
# genre outside this set are rejected at load time.
GENRE_VOCABULARY = frozenset(
    {
        "Action",
        "Adventure",
        "Animation",
        "Children",
        "Comedy",
        "Crime",
        "Documentary",
        "Drama",
        "Fantasy",
        "Film-Noir",
        "Horror",
        "IMAX",
        "Musical",
        "Mystery",
        "Romance",
        "Sci-Fi",
        "Thriller",
        "War",
        "Western",
    }
)

NO_GENRES = "(no genres listed)"

RATING_MIN = 0.5
RATING_MAX = 5.0

_ARTICLES = ("The", "A", "An")


class CatalogError(ValueError):
    """Raised when a source file is malformed or internally inconsistent."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:" if line is None else f"{path}:{line}: "
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class Movie:
    """One catalog entry. Title is canonical: year suffix removed, leading
    article restored ("Matrix, The" becomes "The Matrix")."""

    id: int
    title: str
    year: Optional[int]
    genres: frozenset[str]
    tags: tuple[str, ...] = ()
    rating_count: int = 0
    mean_rating: Optional[float] = None
    trailer_url: Optional[str] = None


@dataclass(frozen=True)
class Catalog:
    movies: dict[int, Movie]
    genre_synonyms: Mapping[str, str] = field(default_factory=dict)

    def __contains__(self, movie_id: int) -> bool:
        return movie_id in self.movies

    def __len__(self) -> int:
        return len(self.movies)

    def get(self, movie_id: int) -> Movie:
        return self.movies[movie_id]

    def ids(self) -> list[int]:
        return sorted(self.movies)


@dataclass(frozen=True)
class RatingsMatrix:
    """Sparse user-by-movie ratings on a 0.5 step scale in [0.5, 5.0]."""

    by_user: dict[int, dict[int, float]]

    def users(self) -> list[int]:
        return sorted(self.by_user)

    def ratings_of(self, user_id: int) -> dict[int, float]:
        return self.by_user.get(user_id, {})

    def __len__(self) -> int:
        return sum(len(r) for r in self.by_user.values())


@dataclass(frozen=True)
class UserProfile:
    """A single user's ratings; never empty when passed to personalized ranking."""

    user_id: int
    ratings: dict[int, float]


@dataclass(frozen=True)
class QuerySpec:
    """Declarative candidate query. seed_movie is set only for related-item
    requests; person_filter is carried through but never filtered on (no cast
    data in the base files)."""

    genre_filter: frozenset[str] = frozenset()
    descriptor_terms: tuple[str, ...] = ()
    year_min: Optional[int] = None
    year_max: Optional[int] = None
    sort: str = "personalized"  # personalized | popular | recent
    seed_movie: Optional[int] = None
    person_filter: Optional[str] = None


def split_title_year(raw_title: str) -> tuple[str, Optional[int]]:
    """Extract a trailing "(YYYY)" into the year and relocate a trailing
    article: "Matrix, The (1999)" -> ("The Matrix", 1999)."""
    title = raw_title.strip()
    year = None
    if title.endswith(")") and "(" in title:
        head, _, paren = title.rpartition("(")
        inner = paren[:-1]
        if len(inner) == 4 and inner.isdigit():
            year = int(inner)
            title = head.strip()
    for article in _ARTICLES:
        suffix = f", {article}"
        if title.endswith(suffix):
            title = f"{article} {title[: -len(suffix)]}"
            break
    return title, year


def _parse_genres(cell: str, path: str, line: int) -> frozenset[str]:
    if cell == NO_GENRES or cell == "":
        return frozenset()
    genres = cell.split("|")
    for g in genres:
        if g not in GENRE_VOCABULARY:
            raise CatalogError(f"unknown genre {g!r}", path, line)
    return frozenset(genres)


def _open_rows(source: str | Path) -> Iterable[tuple[int, list[str]]]:
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        # csv.reader tracks physical lines, so multi-line quoted fields still
        # report the right location.
        for row in reader:
            yield reader.line_num, row


def _check_header(row: list[str], expected: list[str], path: str) -> None:
    if row[: len(expected)] != expected:
        raise CatalogError(f"expected header {','.join(expected)!r}, got {','.join(row)!r}", path, 1)


def load_catalog(
    movies_source: str | Path,
    ratings_source: str | Path,
    tags_source: str | Path | None = None,
    genre_synonyms: Mapping[str, str] | None = None,
) -> tuple[Catalog, RatingsMatrix]:
    """Load and fully index the catalog and ratings.

    File formats (UTF-8, standard CSV quoting):
      movies:  movieId,title,genres           genres pipe-separated
      ratings: userId,movieId,rating,timestamp  timestamp ignored
      tags:    userId,movieId,tag,timestamp     userId/timestamp ignored

    Raises CatalogError, with the offending line number, on malformed rows,
    duplicate movie ids, or ratings/tags that reference unknown movies.
    """
    movies_path, ratings_path = str(movies_source), str(ratings_source)

    parsed: dict[int, tuple[str, Optional[int], frozenset[str]]] = {}
    rows = _open_rows(movies_source)
    try:
        _, header = next(rows)
    except StopIteration:
        raise CatalogError("empty file", movies_path, 1) from None
    _check_header(header, ["movieId", "title", "genres"], movies_path)
    for line, row in rows:
        if not row:
            continue
        if len(row) < 3:
            raise CatalogError(f"expected 3 fields, got {len(row)}", movies_path, line)
        try:
            movie_id = int(row[0])
        except ValueError:
            raise CatalogError(f"bad movie id {row[0]!r}", movies_path, line) from None
        if movie_id <= 0:
            raise CatalogError(f"movie id must be positive, got {movie_id}", movies_path, line)
        if movie_id in parsed:
            raise CatalogError(f"duplicate movie id {movie_id}", movies_path, line)
        title, year = split_title_year(row[1])
        genres = _parse_genres(row[2], movies_path, line)
        parsed[movie_id] = (title, year, genres)

    by_user: dict[int, dict[int, float]] = {}
    rating_sums: dict[int, float] = {}
    rating_counts: dict[int, int] = {}
    rows = _open_rows(ratings_source)
    try:
        _, header = next(rows)
    except StopIteration:
        raise CatalogError("empty file", ratings_path, 1) from None
    _check_header(header, ["userId", "movieId", "rating"], ratings_path)
    for line, row in rows:
        if not row:
            continue
        if len(row) < 3:
            raise CatalogError(f"expected at least 3 fields, got {len(row)}", ratings_path, line)
        try:
            user_id, movie_id, value = int(row[0]), int(row[1]), float(row[2])
        except ValueError:
            raise CatalogError(f"bad rating row {row!r}", ratings_path, line) from None
        if movie_id not in parsed:
            raise CatalogError(f"rating references unknown movie {movie_id}", ratings_path, line)
        if not (RATING_MIN <= value <= RATING_MAX) or (value * 2) != int(value * 2):
            raise CatalogError(f"rating {value} not on the 0.5 step scale", ratings_path, line)
        user_ratings = by_user.setdefault(user_id, {})
        if movie_id in user_ratings:
            raise CatalogError(
                f"duplicate rating for user {user_id}, movie {movie_id}", ratings_path, line
            )
        user_ratings[movie_id] = value
        rating_sums[movie_id] = rating_sums.get(movie_id, 0.0) + value
        rating_counts[movie_id] = rating_counts.get(movie_id, 0) + 1

    tags_by_movie: dict[int, list[str]] = {}
    if tags_source is not None:
        tags_path = str(tags_source)
        rows = _open_rows(tags_source)
        try:
            _, header = next(rows)
        except StopIteration:
            raise CatalogError("empty file", tags_path, 1) from None
        _check_header(header, ["userId", "movieId", "tag"], tags_path)
        for line, row in rows:
            if not row:
                continue
            if len(row) < 3:
                raise CatalogError(f"expected at least 3 fields, got {len(row)}", tags_path, line)
            try:
                movie_id = int(row[1])
            except ValueError:
                raise CatalogError(f"bad movie id {row[1]!r}", tags_path, line) from None
            if movie_id not in parsed:
                raise CatalogError(f"tag references unknown movie {movie_id}", tags_path, line)
            tag = row[2].strip().lower()
            if tag:
                tags_by_movie.setdefault(movie_id, []).append(tag)

    movies: dict[int, Movie] = {}
    for movie_id, (title, year, genres) in parsed.items():
        count = rating_counts.get(movie_id, 0)
        mean = rating_sums[movie_id] / count if count else None
        movies[movie_id] = Movie(
            id=movie_id,
            title=title,
            year=year,
            genres=genres,
            tags=tuple(sorted(tags_by_movie.get(movie_id, []))),
            rating_count=count,
            mean_rating=mean,
        )

    catalog = Catalog(movies=movies, genre_synonyms=dict(genre_synonyms or {}))
    return catalog, RatingsMatrix(by_user=by_user)


def profile_for(ratings: RatingsMatrix, user_id: int) -> Optional[UserProfile]:
    """The user's profile, or None for users with no ratings."""
    user_ratings = ratings.ratings_of(user_id)
    if not user_ratings:
        return None
    return UserProfile(user_id=user_id, ratings=dict(user_ratings))


def _descriptor_matches(movie: Movie, term: str, genre_synonyms: Mapping[str, str]) -> bool:
    folded = term.casefold()
    if folded in movie.tags:
        return True
    canonical = genre_synonyms.get(folded)
    return canonical is not None and canonical in movie.genres


def filter_candidates(catalog: Catalog, spec: QuerySpec) -> list[int]:
    """Movie ids matching every filter in the query; order unspecified but
    deterministic (ascending id). Genres are conjunctive; descriptor terms
    match when at least one equals a tag or a known genre synonym."""
    out = []
    for movie_id in sorted(catalog.movies):
        movie = catalog.movies[movie_id]
        if not spec.genre_filter <= movie.genres:
            continue
        if spec.year_min is not None and (movie.year is None or movie.year < spec.year_min):
            continue
        if spec.year_max is not None and (movie.year is None or movie.year > spec.year_max):
            continue
        if spec.descriptor_terms:
            if not any(
                _descriptor_matches(movie, term, catalog.genre_synonyms)
                for term in spec.descriptor_terms
            ):
                continue
        out.append(movie_id)
    return out


def order_by(catalog: Catalog, ids: list[int], key: str) -> list[int]:
    """Total deterministic ordering: popular = descending rating count,
    recent = descending year with missing years last; ties by ascending id."""
    if key == "popular":
        return sorted(ids, key=lambda m: (-catalog.movies[m].rating_count, m))
    if key == "recent":
        return sorted(
            ids,
            key=lambda m: (
                catalog.movies[m].year is None,
                -(catalog.movies[m].year or 0),
                m,
            ),
        )
    raise ValueError(f"unknown sort key {key!r}")
