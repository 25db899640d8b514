"""Spoken-response templates.

Every reply the system vocalizes is a deterministic fill of one of the
templates below. Strings carry no trailing punctuation; the voice
channel adds its own prosody. Degenerate situations (nothing to page,
no current movie) get apology lines here too, because speech is the
only error surface the interface has.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

HOME_EXAMPLE_QUERIES: tuple[str, ...] = (
    "show action movies",
    "show me more like Pitch Black",
    "what are some popular comedies?",
    "I'm looking for futuristic movies",
)

HELP = (
    "Sorry, I didn't get that. You can say 'show action movies' "
    "or 'what are some popular comedies'"
)
HOME_WELCOME = (
    "Welcome. Try saying 'show action movies' "
    "or 'show me more like Pitch Black'"
)
FAREWELL = "Goodbye"
REOPEN_PROMPT = "Your session has timed out. Say 'open movielens' to start again"
NO_RESULTS = "I couldn't find any movies matching that"
END_OF_LIST = "That's everything I found"
MORE_RESULTS = "Here are more results"
NOTHING_TO_PAGE = "There are no results to page through yet"
NO_CURRENT_MOVIE = "Which movie do you mean? Try saying its title"
TRAILER_NEEDS_DETAILS = "Open a movie first, then ask for the trailer"
GOING_BACK = "Going back"
ALREADY_HOME = "You're already at the home screen"
PERSON_SEARCH_UNSUPPORTED = "I can't search by people yet"


def join_natural(items: Sequence[str]) -> str:
    """Join words the way they are spoken: "a", "a and b", "a, b and c"."""
    if not items:
        return ""
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


def genre_phrase(genres: Sequence[str]) -> str:
    """Spoken form of a genre set: lowercased, alphabetical."""
    return join_natural(sorted(g.lower() for g in genres))


def find_movies_speech(
    genres: Sequence[str], descriptors: Sequence[str], count: int
) -> str:
    if count == 0:
        return NO_RESULTS
    if descriptors:
        return f"Here are some movies that I think are {join_natural(list(descriptors))}"
    if genres:
        return f"Here are some {genre_phrase(genres)} movies"
    return "Here are some movies"


def similar_movies_speech(title: str, count: int) -> str:
    if count == 0:
        return NO_RESULTS
    return f"Here are movies like {title}"


def unknown_seed_speech(title: str) -> str:
    return f"I don't know enough about {title} to find movies like it"


def details_speech(title: str) -> str:
    return f"Here are the details for {title}"


def trailer_speech(title: str, has_trailer: bool) -> str:
    if has_trailer:
        return f"Playing the trailer for {title}"
    return f"I don't have a trailer for {title}"


@dataclass(frozen=True)
class ResultSummary:
    """What a handled request produced, as far as speech is concerned."""

    count: int = 0
    title: Optional[str] = None
    end_of_list: bool = False
    has_trailer: bool = False


def speech_for(intent: str, slots, summary: ResultSummary) -> str:
    """Template dispatch for the intents with result-driven replies.

    slots needs .genres and .descriptor_terms for FindMovies; other
    intents ignore it. Context-dependent apologies (nothing to page,
    no current movie) are chosen by the dialogue layer instead, since
    they depend on the view stack rather than on the result.
    """
    if intent == "FindMovies":
        return find_movies_speech(
            sorted(slots.genres), list(slots.descriptor_terms), summary.count
        )
    if intent == "SimilarMovies":
        return similar_movies_speech(summary.title or "", summary.count)
    if intent == "MoreResults":
        return END_OF_LIST if summary.end_of_list else MORE_RESULTS
    if intent == "ShowDetails":
        return details_speech(summary.title or "")
    if intent == "PlayTrailer":
        return trailer_speech(summary.title or "", summary.has_trailer)
    if intent == "GoBack":
        return GOING_BACK
    if intent == "Home":
        return HOME_WELCOME
    if intent == "Stop":
        return FAREWELL
    return HELP
