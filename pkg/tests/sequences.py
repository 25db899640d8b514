"""Random dialogue drivers shared by the unit suite and the acceptance
gate. Each step asserts the structural invariants that must hold after
any transition: Home pinned at the bottom of the stack, page offsets
aligned and in range, pagination never mutating the ranked list, closed
sessions only reopened by a Home request, and handle() total and pure."""
from __future__ import annotations

import random

from cinevoice import speech
from cinevoice.dialogue import (
    DEFAULT_SESSION_TIMEOUT_S,
    EXPLORE_VIEW,
    HOME_FRAME,
    HOME_VIEW,
    Deps,
    SessionState,
    handle,
    open_session,
)
from cinevoice.entities import TitleMatch
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
    SlotSet,
    StructuredRequest,
)

GENRE_CHOICES = (frozenset(), frozenset({"Action"}), frozenset({"Comedy"}),
                 frozenset({"Sci-Fi"}), frozenset({"Action", "Sci-Fi"}),
                 frozenset({"Western"}))
SORT_CHOICES = (None, "popular", "recent")
DESCRIPTOR_CHOICES = ((), ("futuristic",), ("space",))
# 14 has tags and genres; 33 has neither; 29 exists with genres only.
SEED_CHOICES = (14, 33, 29)
ADVANCE_CHOICES = (0.0, 1.0, 30.0, 119.0, 120.0, 120.5, 121.0, 150.0)


def request(intent: str, slots: SlotSet | None = None) -> StructuredRequest:
    return StructuredRequest(
        intent=intent, slots=slots or SlotSet(), confidence=0.9,
        raw_text=intent.lower(),
    )


def title_slot(movie_id: int) -> SlotSet:
    return SlotSet(title_match=TitleMatch(movie_id=movie_id,
                                          matched_span=(0, 2), score=1.0))


def random_request(rng: random.Random) -> StructuredRequest:
    intent = rng.choice(
        (FIND_MOVIES, FIND_MOVIES, SIMILAR_MOVIES, MORE_RESULTS, MORE_RESULTS,
         SHOW_DETAILS, PLAY_TRAILER, GO_BACK, GO_BACK, HOME, STOP, UNKNOWN)
    )
    if intent == FIND_MOVIES:
        slots = SlotSet(
            genres=rng.choice(GENRE_CHOICES),
            descriptor_terms=rng.choice(DESCRIPTOR_CHOICES),
            sort=rng.choice(SORT_CHOICES),
            refinement=rng.random() < 0.25,
        )
        return request(FIND_MOVIES, slots)
    if intent == SIMILAR_MOVIES:
        if rng.random() < 0.2:
            return request(SIMILAR_MOVIES)  # no title: help path
        return request(SIMILAR_MOVIES, title_slot(rng.choice(SEED_CHOICES)))
    if intent == SHOW_DETAILS and rng.random() < 0.6:
        return request(SHOW_DETAILS, title_slot(rng.choice((14, 10, 31))))
    return request(intent)


def check_invariants(state: SessionState, deps: Deps) -> None:
    assert len(state.view_stack) >= 1
    assert state.view_stack[0] == HOME_FRAME
    for frame in state.view_stack:
        if frame.kind != EXPLORE_VIEW:
            continue
        assert frame.page_offset >= 0
        assert frame.page_offset % deps.page_size == 0
        if frame.ranked:
            assert frame.page_offset < len(frame.ranked)
        else:
            assert frame.page_offset == 0


def run_random_sequence(deps: Deps, seed: int, steps: int = 8) -> int:
    """Drive one session through random requests, asserting after each
    step. Returns the number of transitions performed."""
    rng = random.Random(seed)
    now = 1000.0
    state = open_session(f"seq-{seed}", "1", now)
    performed = 0
    for _ in range(steps):
        now += rng.choice(ADVANCE_CHOICES)
        req = random_request(rng)
        was_open = state.open
        idle = now - state.last_activity
        timed_out = was_open and idle > deps.session_timeout_s
        unavailable = not was_open or timed_out

        prev_state = state
        state, update = handle(state, req, deps, now)
        performed += 1

        # Purity: replaying the transition gives the identical result.
        again_state, again_update = handle(prev_state, req, deps, now)
        assert again_state == state
        assert again_update == update

        check_invariants(state, deps)

        if unavailable and req.intent != HOME:
            assert update.view == HOME_VIEW
            assert update.payload["closed"] is True
            assert update.speech_text == speech.REOPEN_PROMPT
            assert not state.open
            assert state.view_stack == prev_state.view_stack
        elif unavailable:
            assert state.open
            assert state.view_stack == (HOME_FRAME,)
            assert update.speech_text == speech.HOME_WELCOME
        elif req.intent == MORE_RESULTS:
            top_before = prev_state.view_stack[-1]
            top_after = state.view_stack[-1]
            assert len(state.view_stack) == len(prev_state.view_stack)
            if top_before.kind == EXPLORE_VIEW:
                assert top_after.ranked == top_before.ranked
                end = (top_before.page_offset + deps.page_size
                       >= len(top_before.ranked))
                if end:
                    assert top_after.page_offset == top_before.page_offset
                    assert update.speech_text == speech.END_OF_LIST
                else:
                    assert (top_after.page_offset
                            == top_before.page_offset + deps.page_size)
                    assert update.speech_text == speech.MORE_RESULTS
            else:
                assert update.speech_text == speech.NOTHING_TO_PAGE
        elif req.intent == GO_BACK and len(prev_state.view_stack) > 1:
            assert state.view_stack == prev_state.view_stack[:-1]
        elif req.intent == STOP:
            assert not state.open
            assert update.payload.get("closed") is True

        if state.open and not (unavailable and req.intent != HOME):
            assert state.last_activity == now
    return performed


def paginate_to_end(deps: Deps, state: SessionState, now: float) -> list[tuple[int, ...]]:
    """Collect successive pages of the top explore frame via MoreResults."""
    pages = []
    top = state.view_stack[-1]
    assert top.kind == EXPLORE_VIEW
    while True:
        frame = state.view_stack[-1]
        pages.append(frame.ranked[frame.page_offset:
                                  frame.page_offset + deps.page_size])
        before = state.view_stack[-1].page_offset
        state, update = handle(state, request(MORE_RESULTS), deps, now)
        if state.view_stack[-1].page_offset == before:
            assert update.speech_text in (speech.END_OF_LIST,
                                          speech.NOTHING_TO_PAGE)
            return pages
