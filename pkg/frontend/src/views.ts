import {
  DetailsPayload,
  ExplorePayload,
  HomePayload,
  RenderMessage,
} from "./protocol";

/** View builders. Pure payload -> element; no event handlers, no links,
 * no buttons. Navigation happens only by voice, so every available action
 * is shown as a quoted phrase to say, never as something to click. */

function el(
  doc: Document,
  tag: string,
  className?: string,
  text?: string,
): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function quotedActions(doc: Document, phrases: string[]): HTMLElement {
  const list = el(doc, "ul", "quoted-actions");
  for (const phrase of phrases) {
    list.appendChild(el(doc, "li", "quoted-action", `"${phrase}"`));
  }
  return list;
}

export function renderHome(doc: Document, payload: HomePayload): HTMLElement {
  const root = el(doc, "section", "view view-home");
  root.appendChild(el(doc, "h2", "view-title", "Say what you want to watch"));
  const examples = el(doc, "ul", "example-queries");
  for (const query of payload.examples) {
    examples.appendChild(el(doc, "li", "example-query", `"${query}"`));
  }
  root.appendChild(examples);
  if (payload.closed) {
    root.appendChild(el(doc, "p", "session-closed", "session closed"));
  }
  return root;
}

function ratingText(mean: number | null): string {
  return mean === null ? "unrated" : mean.toFixed(2);
}

export function renderExplore(
  doc: Document,
  payload: ExplorePayload,
): HTMLElement {
  const root = el(doc, "section", "view view-explore");
  if (payload.cards.length === 0) {
    root.appendChild(el(doc, "p", "no-results", "No results"));
    root.appendChild(
      el(
        doc,
        "p",
        "help-hint",
        'Try a genre or a year, like "show action movies from the 90s".',
      ),
    );
    return root;
  }
  const first = payload.page_offset + 1;
  const last = payload.page_offset + payload.cards.length;
  root.appendChild(
    el(
      doc,
      "p",
      "result-count",
      `Showing ${first}-${last} of ${payload.total_results}`,
    ),
  );
  const grid = el(doc, "div", "card-grid");
  for (const card of payload.cards) {
    const item = el(doc, "article", "movie-card");
    item.appendChild(el(doc, "h3", "card-title", card.title));
    item.appendChild(
      el(doc, "p", "card-year", card.year === null ? "----" : String(card.year)),
    );
    item.appendChild(el(doc, "p", "card-genres", card.genres.join(", ")));
    item.appendChild(el(doc, "p", "card-rating", ratingText(card.mean_rating)));
    grid.appendChild(item);
  }
  root.appendChild(grid);
  root.appendChild(quotedActions(doc, ["show me more", "go back"]));
  return root;
}

export function renderDetails(
  doc: Document,
  payload: DetailsPayload,
): HTMLElement {
  const root = el(doc, "section", "view view-details");
  root.appendChild(el(doc, "h2", "details-title", payload.title));
  root.appendChild(
    el(
      doc,
      "p",
      "details-year",
      payload.year === null ? "----" : String(payload.year),
    ),
  );
  root.appendChild(
    el(
      doc,
      "p",
      "details-genres",
      payload.genres.length > 0 ? payload.genres.join(", ") : "no genres",
    ),
  );
  if (payload.tags.length > 0) {
    root.appendChild(el(doc, "p", "details-tags", payload.tags.join(", ")));
  }
  const ratings =
    payload.mean_rating === null
      ? `${payload.rating_count} ratings`
      : `${payload.rating_count} ratings (mean ${payload.mean_rating.toFixed(2)})`;
  root.appendChild(el(doc, "p", "details-ratings", ratings));
  if (payload.trailer_event) {
    const hasUrl = typeof payload.trailer_url === "string" && payload.trailer_url !== "";
    root.appendChild(
      el(
        doc,
        "p",
        hasUrl ? "trailer-indicator" : "trailer-indicator no-trailer",
        hasUrl ? "trailer playing" : "no trailer available",
      ),
    );
  }
  root.appendChild(quotedActions(doc, ["play the trailer", "go back"]));
  return root;
}

export function renderView(doc: Document, message: RenderMessage): HTMLElement {
  switch (message.view) {
    case "home":
      return renderHome(doc, message.payload as HomePayload);
    case "explore":
      return renderExplore(doc, message.payload as ExplorePayload);
    case "details":
      return renderDetails(doc, message.payload as DetailsPayload);
  }
}
