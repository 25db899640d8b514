/** Wire types for the push channel, mirroring the server's JSON exactly. */

export type ViewKind = "home" | "explore" | "details";

export interface MovieCard {
  id: number;
  title: string;
  year: number | null;
  genres: string[];
  mean_rating: number | null;
}

export interface HomePayload {
  examples: string[];
  closed: boolean;
}

export interface ExplorePayload {
  cards: MovieCard[];
  total_results: number;
  page_offset: number;
}

export interface DetailsPayload {
  id: number;
  title: string;
  year: number | null;
  genres: string[];
  tags: string[];
  mean_rating: number | null;
  rating_count: number;
  trailer_event: boolean;
  trailer_url?: string | null;
}

export interface RenderMessage {
  type: "render";
  seq: number;
  view: ViewKind;
  payload: HomePayload | ExplorePayload | DetailsPayload;
  speech_text: string;
  utterance_echo: string;
}

export interface UtteranceMessage {
  type: "utterance";
  text: string;
}

const VIEW_KINDS: ReadonlySet<string> = new Set(["home", "explore", "details"]);

/** Parse one frame; anything that is not a well-formed render is null. */
export function parseRenderMessage(raw: string): RenderMessage | null {
  let body: unknown;
  try {
    body = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof body !== "object" || body === null) return null;
  const msg = body as Record<string, unknown>;
  if (msg.type !== "render") return null;
  if (typeof msg.seq !== "number" || !Number.isFinite(msg.seq)) return null;
  if (typeof msg.view !== "string" || !VIEW_KINDS.has(msg.view)) return null;
  if (typeof msg.speech_text !== "string") return null;
  if (typeof msg.utterance_echo !== "string") return null;
  if (typeof msg.payload !== "object" || msg.payload === null) return null;
  return msg as unknown as RenderMessage;
}

export function utteranceFrame(text: string): string {
  const frame: UtteranceMessage = { type: "utterance", text };
  return JSON.stringify(frame);
}
