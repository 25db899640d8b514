"""Recommendation ranking.

Two rankers, matching the two shapes a query can take:

- Personalized top-N over a candidate set, scored by item-based
  K-nearest-neighbors collaborative filtering with adjusted-cosine
  item-item similarity.
- Related-item ranking around a seed movie, scored by cosine over
  content vectors (one-hot genres joined with TF-IDF tag weights).

Everything here is deterministic: iteration happens in sorted id order,
ties break by ascending id, and building a model twice from the same
ratings serializes to identical bytes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .catalog import Catalog, QuerySpec, RatingsMatrix, UserProfile, order_by

NEIGHBORHOOD_FORMAT = "item-model/1"


@dataclass(frozen=True)
class ItemNeighborhood:
    """Precomputed top-k similar items per movie.

    Each list holds (neighbor id, similarity) pairs sorted by descending
    similarity, ties by ascending id, truncated to k. Similarities are
    adjusted cosine, always within [-1, 1]; a movie never lists itself.
    """

    k: int
    min_support: int
    neighbors: Mapping[int, tuple[tuple[int, float], ...]] = field(
        default_factory=dict
    )

    def neighbors_of(self, movie_id: int) -> tuple[tuple[int, float], ...]:
        return self.neighbors.get(movie_id, ())


def build_item_model(
    ratings: RatingsMatrix, k: int = 20, min_support: int = 2
) -> ItemNeighborhood:
    """Compute item-item adjusted-cosine neighborhoods.

    Each rating is centered by its user's mean over everything that user
    rated; similarity is then a cosine restricted to co-rating users.
    Pairs with fewer than min_support co-raters, or with a zero-norm
    centered vector over the common users, carry no similarity at all.

    An empty matrix yields an empty (valid) neighborhood.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if min_support < 1:
        raise ValueError(f"min_support must be >= 1, got {min_support}")

    by_item: dict[int, dict[int, float]] = {}
    for user in ratings.users():
        user_ratings = ratings.ratings_of(user)
        mean = sum(user_ratings.values()) / len(user_ratings)
        for item in sorted(user_ratings):
            by_item.setdefault(item, {})[user] = user_ratings[item] - mean

    items = sorted(by_item)
    lists: dict[int, list[tuple[int, float]]] = {item: [] for item in items}
    for pos, a in enumerate(items):
        vec_a = by_item[a]
        for b in items[pos + 1 :]:
            vec_b = by_item[b]
            common = sorted(vec_a.keys() & vec_b.keys())
            if len(common) < min_support:
                continue
            num = 0.0
            norm_a = 0.0
            norm_b = 0.0
            for user in common:
                ca = vec_a[user]
                cb = vec_b[user]
                num += ca * cb
                norm_a += ca * ca
                norm_b += cb * cb
            if norm_a == 0.0 or norm_b == 0.0:
                continue
            sim = num / math.sqrt(norm_a * norm_b)
            sim = max(-1.0, min(1.0, sim))
            lists[a].append((b, sim))
            lists[b].append((a, sim))

    neighbors: dict[int, tuple[tuple[int, float], ...]] = {}
    for item in items:
        ranked = sorted(lists[item], key=lambda pair: (-pair[1], pair[0]))
        neighbors[item] = tuple(ranked[:k])
    return ItemNeighborhood(k=k, min_support=min_support, neighbors=neighbors)


def predict_rating(
    profile: UserProfile, movie_id: int, neighborhood: ItemNeighborhood
) -> Optional[float]:
    """Weighted-average rating prediction from rated neighbors.

    score = sum(sim * user rating) / sum(|sim|) over the neighbors of
    movie_id that the user has rated. None when the user rated no
    neighbor or the weights cancel to zero.
    """
    num = 0.0
    den = 0.0
    for neighbor_id, sim in neighborhood.neighbors_of(movie_id):
        rating = profile.ratings.get(neighbor_id)
        if rating is None:
            continue
        num += sim * rating
        den += abs(sim)
    if den == 0.0:
        return None
    return num / den


def rank_topn(
    profile: Optional[UserProfile],
    candidates: Sequence[int],
    spec: QuerySpec,
    neighborhood: ItemNeighborhood,
    catalog: Catalog,
    n: int,
) -> list[int]:
    """Order candidates for a top-N answer.

    An explicit sort (popular, recent) delegates to catalog ordering.
    Otherwise ranking is personalized: predicted rating descending,
    candidates without a prediction afterwards in popularity order.
    Movies the user already rated never appear. Ties break by ascending
    id; output is truncated to n.
    """
    rated = set(profile.ratings) if profile is not None else set()
    pool = [m for m in sorted(set(candidates)) if m not in rated]
    if spec.sort in ("popular", "recent"):
        return order_by(catalog, pool, spec.sort)[:n]

    predicted: list[tuple[float, int]] = []
    unpredicted: list[int] = []
    for movie_id in pool:
        score = (
            predict_rating(profile, movie_id, neighborhood)
            if profile is not None
            else None
        )
        if score is None:
            unpredicted.append(movie_id)
        else:
            predicted.append((score, movie_id))
    predicted.sort(key=lambda pair: (-pair[0], pair[1]))
    ranked = [movie_id for _, movie_id in predicted]
    ranked.extend(order_by(catalog, unpredicted, "popular"))
    return ranked[:n]


@dataclass(frozen=True)
class ContentVector:
    """Sparse movie feature vector: genre block joined with tag block.

    Genre entries carry weight 1.0 and tag entries their TF-IDF weight
    before joint L2 normalization, so the stored weights have norm 1,
    or 0 for a movie with no genres and no tags.
    """

    weights: Mapping[str, float]

    @property
    def is_zero(self) -> bool:
        return not self.weights

    def dot(self, other: "ContentVector") -> float:
        if len(self.weights) > len(other.weights):
            return other.dot(self)
        return sum(
            w * other.weights[key]
            for key, w in self.weights.items()
            if key in other.weights
        )


def build_content_vectors(catalog: Catalog) -> dict[int, ContentVector]:
    """TF-IDF weighted content vectors for every movie in the catalog.

    tf is the raw tag count on the movie; idf = ln(N / (1 + movies
    containing the tag)) with N the catalog size. Negative idf (a tag on
    every movie) is kept as computed; genres always weigh 1.0 before
    normalization. Keys are namespaced so a tag can never collide with
    a genre label.
    """
    total = len(catalog)
    tag_movie_counts: dict[str, int] = {}
    for movie_id in catalog.ids():
        for tag in set(catalog.get(movie_id).tags):
            tag_movie_counts[tag] = tag_movie_counts.get(tag, 0) + 1

    vectors: dict[int, ContentVector] = {}
    for movie_id in catalog.ids():
        movie = catalog.get(movie_id)
        raw: dict[str, float] = {}
        for genre in sorted(movie.genres):
            raw[f"g:{genre}"] = 1.0
        tag_counts: dict[str, int] = {}
        for tag in movie.tags:
            tag_counts[tag] = tag_counts.get(tag, 0) + 1
        for tag in sorted(tag_counts):
            idf = math.log(total / (1 + tag_movie_counts[tag]))
            raw[f"t:{tag}"] = tag_counts[tag] * idf
        norm = math.sqrt(sum(w * w for w in raw.values()))
        if norm == 0.0:
            vectors[movie_id] = ContentVector(weights={})
        else:
            vectors[movie_id] = ContentVector(
                weights={key: w / norm for key, w in raw.items()}
            )
    return vectors


def similar_items(
    seed: int,
    candidates: Sequence[int],
    catalog: Catalog,
    n: int,
) -> list[int]:
    """Rank candidates by content similarity to the seed movie.

    Cosine between normalized content vectors, descending; the seed is
    never part of the output. Ties break by descending popularity then
    ascending id. A zero-vector seed matches nothing and yields an
    empty list; callers can distinguish that case with seed_has_content.
    """
    if seed not in catalog:
        raise KeyError(f"unknown seed movie id: {seed}")
    vectors = build_content_vectors(catalog)
    seed_vector = vectors[seed]
    if seed_vector.is_zero:
        return []
    scored: list[tuple[float, int, int]] = []
    for movie_id in sorted(set(candidates)):
        if movie_id == seed or movie_id not in catalog:
            continue
        score = seed_vector.dot(vectors[movie_id])
        scored.append((score, catalog.get(movie_id).rating_count, movie_id))
    scored.sort(key=lambda row: (-row[0], -row[1], row[2]))
    return [movie_id for _, _, movie_id in scored[:n]]


def seed_has_content(catalog: Catalog, movie_id: int) -> bool:
    """True when the movie carries at least one genre or tag."""
    movie = catalog.get(movie_id)
    return bool(movie.genres) or bool(movie.tags)


def serialize_neighborhood(neighborhood: ItemNeighborhood) -> str:
    """Deterministic JSON for a trained neighborhood model.

    Identical inputs produce byte-identical output: keys are sorted and
    floats rendered by their shortest round-trip repr.
    """
    payload = {
        "format": NEIGHBORHOOD_FORMAT,
        "k": neighborhood.k,
        "min_support": neighborhood.min_support,
        "neighbors": {
            str(movie_id): [[nid, sim] for nid, sim in pairs]
            for movie_id, pairs in sorted(neighborhood.neighbors.items())
        },
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def deserialize_neighborhood(raw: str) -> ItemNeighborhood:
    payload = json.loads(raw)
    if payload.get("format") != NEIGHBORHOOD_FORMAT:
        raise ValueError(f"unsupported model format: {payload.get('format')!r}")
    neighbors = {
        int(movie_id): tuple((int(nid), float(sim)) for nid, sim in pairs)
        for movie_id, pairs in payload["neighbors"].items()
    }
    return ItemNeighborhood(
        k=payload["k"],
        min_support=payload["min_support"],
        neighbors=dict(sorted(neighbors.items())),
    )
