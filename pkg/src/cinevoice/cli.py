"""Operator command line: ingest, train, eval, serve, repl.

The repl drives the same Service object the network gateway uses, so a
scripted session exercises the identical parse/dialogue/render path as
POST /skill, with a simulated clock (advanced by @sleep directives)
standing in for wall time.
"""
from __future__ import annotations

import random
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

import click

from .catalog import CatalogError, load_catalog
from .config import AppConfig, load_config
from .entities import load_genre_synonyms
from .gateway import RenderMessage, Service
from .intent import classify, load_corpus, serialize_model, train_intent_model


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON config file; environment variables override it.",
)
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str]) -> None:
    """Voice-driven movie browser tooling."""
    ctx.obj = load_config(config_path)


def _packaged(name: str) -> Path:
    from .server import packaged_data_path

    return packaged_data_path(name)


@main.command()
@click.argument("data_dir", type=click.Path(exists=True, file_okay=False))
@click.pass_obj
def ingest(config: AppConfig, data_dir: str) -> None:
    """Validate a data directory and print corpus counts."""
    base = Path(data_dir)
    tags_path = base / "tags.csv"
    try:
        synonyms = load_genre_synonyms(_packaged("genre_synonyms.tsv"))
        catalog, ratings = load_catalog(
            base / "movies.csv",
            base / "ratings.csv",
            tags_path if tags_path.exists() else None,
            genre_synonyms=synonyms,
        )
    except (CatalogError, OSError) as exc:
        click.echo(f"ingest failed: {exc}", err=True)
        sys.exit(1)
    rating_rows = sum(len(ratings.ratings_of(u)) for u in ratings.users())
    tag_rows = sum(len(catalog.get(m).tags) for m in catalog.ids())
    click.echo(f"movies: {len(catalog)}")
    click.echo(f"ratings: {rating_rows}")
    click.echo(f"tags: {tag_rows}")


@main.command()
@click.option(
    "--corpus",
    "corpus_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Labelled corpus TSV; defaults to the packaged one.",
)
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False),
    default="intent_model.json",
    show_default=True,
)
def train(corpus_path: Optional[str], out_path: str) -> None:
    """Train the intent classifier and write the model file."""
    path = Path(corpus_path) if corpus_path else _packaged("intent_corpus.tsv")
    try:
        corpus = load_corpus(path)
        model = train_intent_model(corpus)
    except ValueError as exc:
        click.echo(f"train failed: {exc}", err=True)
        sys.exit(1)
    Path(out_path).write_text(serialize_model(model) + "\n", encoding="utf-8")
    click.echo(
        f"wrote {out_path} ({len(corpus)} utterances, {len(model.classes)} intents)"
    )


def split_corpus(
    corpus: Sequence[tuple[str, str]], seed: int, train_fraction: float = 0.8
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Deterministic stratified split: per intent, shuffle and cut 80/20."""
    by_label: dict[str, list[tuple[str, str]]] = {}
    for text, label in corpus:
        by_label.setdefault(label, []).append((text, label))
    rng = random.Random(seed)
    train_rows: list[tuple[str, str]] = []
    test_rows: list[tuple[str, str]] = []
    for label in sorted(by_label):
        rows = list(by_label[label])
        rng.shuffle(rows)
        cut = int(len(rows) * train_fraction)
        train_rows.extend(rows[:cut])
        test_rows.extend(rows[cut:])
    return train_rows, test_rows


def evaluate_corpus(
    corpus: Sequence[tuple[str, str]], seed: int
) -> tuple[float, dict[tuple[str, str], int], int, int]:
    """Held-out accuracy and confusion counts for the 80/20 split."""
    train_rows, test_rows = split_corpus(corpus, seed)
    model = train_intent_model(train_rows)
    confusion: dict[tuple[str, str], int] = {}
    correct = 0
    for text, actual in test_rows:
        predicted, _ = classify(model, text)
        confusion[(actual, predicted)] = confusion.get((actual, predicted), 0) + 1
        if predicted == actual:
            correct += 1
    total = len(test_rows)
    accuracy = 1.0 if total == 0 else correct / total
    return accuracy, confusion, correct, total


@main.command("eval")
@click.option(
    "--corpus",
    "corpus_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Labelled corpus TSV; defaults to the packaged one.",
)
@click.option("--seed", type=int, default=42, show_default=True)
def eval_cmd(corpus_path: Optional[str], seed: int) -> None:
    """Hold out 20% of the corpus and report intent accuracy."""
    path = Path(corpus_path) if corpus_path else _packaged("intent_corpus.tsv")
    try:
        corpus = load_corpus(path)
        accuracy, confusion, correct, total = evaluate_corpus(corpus, seed)
    except ValueError as exc:
        click.echo(f"eval failed: {exc}", err=True)
        sys.exit(1)
    click.echo(f"accuracy: {accuracy:.4f} ({correct}/{total})")
    labels = sorted({a for a, _ in confusion} | {p for _, p in confusion})
    if not labels:
        return
    width = max(len(label) for label in labels)
    click.echo("confusion (rows actual, cols predicted):")
    header = " " * (width + 2) + "  ".join(f"{label:>{width}}" for label in labels)
    click.echo(header)
    for actual in labels:
        cells = "  ".join(
            f"{confusion.get((actual, predicted), 0):>{width}}"
            for predicted in labels
        )
        click.echo(f"{actual:>{width}}  {cells}")


@main.command()
@click.option("--host", default=None, help="Bind address override.")
@click.option("--port", type=int, default=None, help="Port override.")
@click.pass_obj
def serve(config: AppConfig, host: Optional[str], port: Optional[int]) -> None:
    """Run the HTTP + push-channel server."""
    import uvicorn

    from .server import create_app

    app = create_app(config)
    uvicorn.run(
        app,
        host=host if host is not None else config.host,
        port=port if port is not None else config.port,
        log_level="warning",
    )


class SimClock:
    """Deterministic clock for scripted sessions; @sleep advances it."""

    def __init__(self, start: float = 1000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


def _format_render(message: RenderMessage, page_size: int) -> list[str]:
    lines = [f"[{message.view}] {message.speech_text}"]
    payload = message.payload
    if message.view == "home":
        lines.append("  examples: " + " | ".join(payload["examples"]))
        if payload.get("closed"):
            lines.append("  (session closed)")
        return lines
    if message.view == "details":
        year = payload["year"] if payload["year"] is not None else "----"
        lines.append(f"  {payload['title']} ({year})")
        genres = ", ".join(payload["genres"]) if payload["genres"] else "no genres"
        lines.append(f"  genres: {genres}")
        if payload["tags"]:
            lines.append("  tags: " + ", ".join(payload["tags"]))
        if payload["mean_rating"] is not None:
            lines.append(
                f"  ratings: {payload['rating_count']} (mean {payload['mean_rating']:.2f})"
            )
        else:
            lines.append(f"  ratings: {payload['rating_count']}")
        if payload["trailer_event"]:
            if payload.get("trailer_url"):
                lines.append("  [trailer playing]")
            else:
                lines.append("  [no trailer available]")
        return lines
    total = payload["total_results"]
    pages = max(1, -(-total // page_size))
    page = payload["page_offset"] // page_size + 1
    lines.append(f"  page {page}/{pages}: {total} results")
    for i, card in enumerate(payload["cards"]):
        year = card["year"] if card["year"] is not None else "----"
        genres = "|".join(card["genres"]) if card["genres"] else "no genres"
        rating = (
            f"{card['mean_rating']:.2f}" if card["mean_rating"] is not None else "unrated"
        )
        index = payload["page_offset"] + i + 1
        lines.append(f"  {index}. {card['title']} ({year}) [{genres}] {rating}")
    return lines


def run_transcript(
    service: Service,
    clock: SimClock,
    lines: Iterable[str],
    session_id: str,
    user_id: str,
    out: TextIO,
) -> None:
    """Feed script lines through the service, writing transcript blocks.

    Blank lines and # comments are skipped; "@sleep N" advances the
    simulated clock by N seconds and is echoed into the transcript.
    """
    first = True
    for raw_line in lines:
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if not first:
            out.write("\n")
        first = False
        if line.startswith("@sleep"):
            parts = line.split()
            seconds = float(parts[1]) if len(parts) > 1 else 0.0
            clock.advance(seconds)
            out.write(f"@sleep {seconds:g}\n")
            continue
        _, message = service.handle_utterance(session_id, user_id, line)
        out.write(f"> {line}\n")
        for text_line in _format_render(message, service.page_size):
            out.write(text_line + "\n")


@main.command()
@click.option(
    "--script",
    "script_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Utterance script; omit to read lines from stdin.",
)
@click.option("--data-dir", default=None, help="Data directory override.")
@click.option("--session", "session_id", default="repl", show_default=True)
@click.option("--user", "user_id", default="1", show_default=True)
@click.pass_obj
def repl(
    config: AppConfig,
    script_path: Optional[str],
    data_dir: Optional[str],
    session_id: str,
    user_id: str,
) -> None:
    """Drive a session from a script or stdin, printing the transcript."""
    from dataclasses import replace

    from .server import build_service

    if data_dir is not None:
        config = replace(config, data_dir=data_dir)
    clock = SimClock()
    try:
        service = build_service(config, clock=clock)
    except (CatalogError, OSError, ValueError) as exc:
        click.echo(f"repl failed to start: {exc}", err=True)
        sys.exit(1)
    if script_path is not None:
        lines = Path(script_path).read_text(encoding="utf-8").splitlines()
    else:
        lines = sys.stdin
    run_transcript(service, clock, lines, session_id, user_id, sys.stdout)


if __name__ == "__main__":
    main()
