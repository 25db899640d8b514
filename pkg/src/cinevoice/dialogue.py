"""Per-session dialogue state machine.

A session owns a stack of view frames (Home always at the bottom) plus
an activity clock. handle() is a pure function from (state, request,
dependencies, now) to (new state, view update): nothing here mutates,
so every transition is replayable in tests with a simulated clock.

Context queries lean on the stack: "show me more" pages the Explore
frame on top, "play the trailer" needs a Details frame, "go back" pops.
A session idle for more than the timeout only answers with a reopen
prompt until a Home request starts it fresh.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Mapping, Optional

from .catalog import Catalog, QuerySpec, UserProfile, filter_candidates, order_by
from .entities import Lexicons
from .intent import (
    FIND_MOVIES,
    GO_BACK,
    HOME,
    MORE_RESULTS,
    PLAY_TRAILER,
    SHOW_DETAILS,
    SIMILAR_MOVIES,
    STOP,
    StructuredRequest,
)
from .recsys import ItemNeighborhood, rank_topn, seed_has_content, similar_items
from . import speech

HOME_VIEW = "home"
EXPLORE_VIEW = "explore"
DETAILS_VIEW = "details"

DEFAULT_PAGE_SIZE = 8
DEFAULT_SESSION_TIMEOUT_S = 120.0


@dataclass(frozen=True)
class ViewFrame:
    """One entry of the view stack.

    kind "home" uses no other field; "explore" carries the query that
    produced it, the full ranked id list, and the page offset; and
    "details" carries the movie on display. Explore frames born from a
    related-item query record the seed movie.
    """

    kind: str
    origin: Optional[QuerySpec] = None
    ranked: tuple[int, ...] = ()
    page_offset: int = 0
    seed: Optional[int] = None
    movie_id: Optional[int] = None


HOME_FRAME = ViewFrame(kind=HOME_VIEW)


@dataclass(frozen=True)
class SessionState:
    session_id: str
    user_id: str
    view_stack: tuple[ViewFrame, ...] = (HOME_FRAME,)
    last_activity: float = 0.0
    open: bool = True


@dataclass(frozen=True)
class ViewUpdate:
    """What one handled request shows and says."""

    view: str
    payload: Mapping[str, Any]
    speech_text: str


@dataclass(frozen=True)
class Deps:
    """Immutable shared data a transition needs. Safe across threads."""

    catalog: Catalog
    lexicons: Lexicons
    neighborhood: ItemNeighborhood
    profile: Optional[UserProfile] = None
    page_size: int = DEFAULT_PAGE_SIZE
    session_timeout_s: float = DEFAULT_SESSION_TIMEOUT_S


def open_session(session_id: str, user_id: str, now: float) -> SessionState:
    """Fresh session: open, Home on the stack. Reopen resets the same way."""
    return SessionState(
        session_id=session_id,
        user_id=user_id,
        view_stack=(HOME_FRAME,),
        last_activity=now,
        open=True,
    )


def check_expiry(
    state: SessionState, now: float, timeout_s: float = DEFAULT_SESSION_TIMEOUT_S
) -> bool:
    """True when the idle window has passed. Exactly 120 s is still live."""
    return (now - state.last_activity) > timeout_s


def _movie_card(deps: Deps, movie_id: int) -> dict[str, Any]:
    movie = deps.catalog.get(movie_id)
    return {
        "id": movie.id,
        "title": movie.title,
        "year": movie.year,
        "genres": sorted(movie.genres),
        "mean_rating": None if movie.mean_rating is None else round(movie.mean_rating, 2),
    }


def _page_ids(frame: ViewFrame, page_size: int) -> tuple[int, ...]:
    return frame.ranked[frame.page_offset : frame.page_offset + page_size]


def _home_payload(closed: bool = False) -> dict[str, Any]:
    return {"examples": list(speech.HOME_EXAMPLE_QUERIES), "closed": closed}


def _details_payload(deps: Deps, movie_id: int, trailer_event: bool) -> dict[str, Any]:
    movie = deps.catalog.get(movie_id)
    payload: dict[str, Any] = {
        "id": movie.id,
        "title": movie.title,
        "year": movie.year,
        "genres": sorted(movie.genres),
        "tags": list(movie.tags),
        "rating_count": movie.rating_count,
        "mean_rating": None if movie.mean_rating is None else round(movie.mean_rating, 2),
        "trailer_event": trailer_event,
    }
    if movie.trailer_url is not None:
        payload["trailer_url"] = movie.trailer_url
    return payload


def render_frame(
    frame: ViewFrame,
    deps: Deps,
    speech_text: str,
    trailer_event: bool = False,
    closed: bool = False,
) -> ViewUpdate:
    """Build the ViewUpdate a client needs to draw one frame."""
    if frame.kind == HOME_VIEW:
        return ViewUpdate(HOME_VIEW, _home_payload(closed), speech_text)
    if frame.kind == DETAILS_VIEW:
        assert frame.movie_id is not None
        payload = _details_payload(deps, frame.movie_id, trailer_event)
        return ViewUpdate(DETAILS_VIEW, payload, speech_text)
    cards = [_movie_card(deps, m) for m in _page_ids(frame, deps.page_size)]
    payload = {
        "cards": cards,
        "page_offset": frame.page_offset,
        "total_results": len(frame.ranked),
    }
    return ViewUpdate(EXPLORE_VIEW, payload, speech_text)


def _slots_to_query(slots) -> QuerySpec:
    return QuerySpec(
        genre_filter=slots.genres,
        descriptor_terms=slots.descriptor_terms,
        year_min=slots.year_min,
        year_max=slots.year_max,
        sort=slots.sort or "personalized",
        person_filter=slots.person_span,
    )


def _merge_refinement(base: QuerySpec, slots) -> QuerySpec:
    descriptors = list(base.descriptor_terms)
    for term in slots.descriptor_terms:
        if term not in descriptors:
            descriptors.append(term)
    year_min = base.year_min if slots.year_min is None else (
        slots.year_min if base.year_min is None else max(base.year_min, slots.year_min)
    )
    year_max = base.year_max if slots.year_max is None else (
        slots.year_max if base.year_max is None else min(base.year_max, slots.year_max)
    )
    return QuerySpec(
        genre_filter=base.genre_filter | slots.genres,
        descriptor_terms=tuple(descriptors),
        year_min=year_min,
        year_max=year_max,
        sort=slots.sort or base.sort,
        seed_movie=base.seed_movie,
        person_filter=base.person_filter,
    )


def _find_movies(
    state: SessionState, request: StructuredRequest, deps: Deps, now: float
) -> tuple[SessionState, ViewUpdate]:
    slots = request.slots
    has_filters = bool(
        slots.genres
        or slots.descriptor_terms
        or slots.year_min is not None
        or slots.year_max is not None
        or slots.title_match is not None
        or slots.sort is not None
    )
    if slots.person_span and not has_filters:
        # Cast metadata is not in the catalog; admit it rather than
        # answer with an unrelated list.
        new_state = replace(state, last_activity=now)
        top = new_state.view_stack[-1]
        return new_state, render_frame(top, deps, speech.PERSON_SEARCH_UNSUPPORTED)

    top = state.view_stack[-1]
    if slots.refinement and top.kind == EXPLORE_VIEW and top.origin is not None:
        narrowed = _slots_to_query(slots)
        matching = set(filter_candidates(deps.catalog, narrowed))
        kept = [m for m in top.ranked if m in matching]
        if slots.sort is not None:
            kept = order_by(deps.catalog, kept, slots.sort)
        frame = ViewFrame(
            kind=EXPLORE_VIEW,
            origin=_merge_refinement(top.origin, slots),
            ranked=tuple(kept),
            page_offset=0,
        )
    else:
        query = _slots_to_query(slots)
        candidates = filter_candidates(deps.catalog, query)
        ranked = rank_topn(
            deps.profile,
            candidates,
            query,
            deps.neighborhood,
            deps.catalog,
            n=len(candidates),
        )
        frame = ViewFrame(
            kind=EXPLORE_VIEW,
            origin=query,
            ranked=tuple(ranked),
            page_offset=0,
        )
    new_state = replace(
        state, view_stack=state.view_stack + (frame,), last_activity=now
    )
    line = speech.find_movies_speech(
        sorted(slots.genres), list(slots.descriptor_terms), len(frame.ranked)
    )
    return new_state, render_frame(frame, deps, line)


def _similar_movies(
    state: SessionState, request: StructuredRequest, deps: Deps, now: float
) -> tuple[SessionState, ViewUpdate]:
    slots = request.slots
    new_state = replace(state, last_activity=now)
    if slots.title_match is None:
        top = new_state.view_stack[-1]
        return new_state, render_frame(top, deps, speech.HELP)
    seed = slots.title_match.movie_id
    title = deps.catalog.get(seed).title
    if not seed_has_content(deps.catalog, seed):
        top = new_state.view_stack[-1]
        return new_state, render_frame(top, deps, speech.unknown_seed_speech(title))
    ranked = similar_items(seed, deps.catalog.ids(), deps.catalog, n=len(deps.catalog))
    frame = ViewFrame(
        kind=EXPLORE_VIEW,
        origin=QuerySpec(seed_movie=seed),
        ranked=tuple(ranked),
        page_offset=0,
        seed=seed,
    )
    new_state = replace(new_state, view_stack=state.view_stack + (frame,))
    line = speech.similar_movies_speech(title, len(ranked))
    return new_state, render_frame(frame, deps, line)


def _more_results(
    state: SessionState, deps: Deps, now: float
) -> tuple[SessionState, ViewUpdate]:
    top = state.view_stack[-1]
    new_state = replace(state, last_activity=now)
    if top.kind != EXPLORE_VIEW:
        return new_state, render_frame(top, deps, speech.NOTHING_TO_PAGE)
    next_offset = top.page_offset + deps.page_size
    if next_offset >= len(top.ranked):
        # Stay on the last page rather than wrapping or emptying.
        return new_state, render_frame(top, deps, speech.END_OF_LIST)
    advanced = replace(top, page_offset=next_offset)
    new_state = replace(
        new_state, view_stack=state.view_stack[:-1] + (advanced,)
    )
    return new_state, render_frame(advanced, deps, speech.MORE_RESULTS)


def _show_details(
    state: SessionState, request: StructuredRequest, deps: Deps, now: float
) -> tuple[SessionState, ViewUpdate]:
    slots = request.slots
    top = state.view_stack[-1]
    target: Optional[int] = None
    if slots.title_match is not None:
        target = slots.title_match.movie_id
    elif top.kind == DETAILS_VIEW:
        target = top.movie_id
    elif top.kind == EXPLORE_VIEW:
        page = _page_ids(top, deps.page_size)
        if len(page) == 1:
            target = page[0]
    new_state = replace(state, last_activity=now)
    if target is None:
        return new_state, render_frame(top, deps, speech.NO_CURRENT_MOVIE)
    frame = ViewFrame(kind=DETAILS_VIEW, movie_id=target)
    new_state = replace(new_state, view_stack=state.view_stack + (frame,))
    line = speech.details_speech(deps.catalog.get(target).title)
    return new_state, render_frame(frame, deps, line)


def _play_trailer(
    state: SessionState, deps: Deps, now: float
) -> tuple[SessionState, ViewUpdate]:
    top = state.view_stack[-1]
    new_state = replace(state, last_activity=now)
    if top.kind != DETAILS_VIEW or top.movie_id is None:
        return new_state, render_frame(top, deps, speech.TRAILER_NEEDS_DETAILS)
    movie = deps.catalog.get(top.movie_id)
    line = speech.trailer_speech(movie.title, movie.trailer_url is not None)
    return new_state, render_frame(top, deps, line, trailer_event=True)


def _go_back(
    state: SessionState, deps: Deps, now: float
) -> tuple[SessionState, ViewUpdate]:
    if len(state.view_stack) <= 1:
        new_state = replace(state, last_activity=now)
        return new_state, render_frame(HOME_FRAME, deps, speech.ALREADY_HOME)
    new_stack = state.view_stack[:-1]
    new_state = replace(state, view_stack=new_stack, last_activity=now)
    return new_state, render_frame(new_stack[-1], deps, speech.GOING_BACK)


def handle(
    state: SessionState,
    request: StructuredRequest,
    deps: Deps,
    now: float,
) -> tuple[SessionState, ViewUpdate]:
    """Apply one structured request to a session.

    Returns the successor state and the view update to push. Every
    degenerate case (expired session, missing context, empty results)
    resolves to a speech response; nothing raises.
    """
    if state.open and check_expiry(state, now, deps.session_timeout_s):
        state = replace(state, open=False)
    if not state.open:
        if request.intent == HOME:
            fresh = open_session(state.session_id, state.user_id, now)
            return fresh, render_frame(HOME_FRAME, deps, speech.HOME_WELCOME)
        return state, render_frame(
            HOME_FRAME, deps, speech.REOPEN_PROMPT, closed=True
        )

    if request.intent == FIND_MOVIES:
        return _find_movies(state, request, deps, now)
    if request.intent == SIMILAR_MOVIES:
        return _similar_movies(state, request, deps, now)
    if request.intent == MORE_RESULTS:
        return _more_results(state, deps, now)
    if request.intent == SHOW_DETAILS:
        return _show_details(state, request, deps, now)
    if request.intent == PLAY_TRAILER:
        return _play_trailer(state, deps, now)
    if request.intent == GO_BACK:
        return _go_back(state, deps, now)
    if request.intent == HOME:
        new_state = replace(
            state, view_stack=(HOME_FRAME,), last_activity=now, open=True
        )
        return new_state, render_frame(HOME_FRAME, deps, speech.HOME_WELCOME)
    if request.intent == STOP:
        new_state = replace(state, open=False, last_activity=now)
        return new_state, render_frame(
            HOME_FRAME, deps, speech.FAREWELL, closed=True
        )
    new_state = replace(state, last_activity=now)
    return new_state, render_frame(new_state.view_stack[-1], deps, speech.HELP)
