import { RenderMessage, parseRenderMessage, utteranceFrame } from "./protocol";

export type ConnectionStatus = "connecting" | "open" | "reconnecting" | "closed";

/** The subset of the DOM WebSocket surface the channel needs; the ws
 * package satisfies it too, so tests can run under node. */
export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((event: unknown) => void) | null;
}

export type SocketFactory = (url: string) => WebSocketLike;

export interface ChannelHandlers {
  onRender(message: RenderMessage): void;
  onStatus(status: ConnectionStatus): void;
}

export interface ChannelOptions {
  socketFactory?: SocketFactory;
  reconnectDelayMs?: number;
}

function defaultFactory(url: string): WebSocketLike {
  return new WebSocket(url) as unknown as WebSocketLike;
}

/**
 * Persistent feed of RenderMessages with a seq watermark.
 *
 * Only messages with seq strictly above the watermark reach the handler,
 * so duplicates and out-of-order pushes can never regress the view. The
 * watermark survives reconnects: the snapshot the server replays on
 * resubscribe is dropped when it is the frame we already rendered.
 */
export class Channel {
  private socket: WebSocketLike | null = null;
  private watermark = 0;
  private status: ConnectionStatus = "closed";
  private stopped = false;
  private readonly factory: SocketFactory;
  private readonly reconnectDelayMs: number;

  constructor(
    private readonly url: string,
    private readonly handlers: ChannelHandlers,
    options: ChannelOptions = {},
  ) {
    this.factory = options.socketFactory ?? defaultFactory;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
  }

  get seqWatermark(): number {
    return this.watermark;
  }

  get connectionStatus(): ConnectionStatus {
    return this.status;
  }

  connect(): void {
    this.stopped = false;
    this.setStatus(this.watermark === 0 ? "connecting" : "reconnecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => this.setStatus("open");
    socket.onmessage = (event) => this.receive(event.data);
    socket.onerror = () => {};
    socket.onclose = () => {
      if (this.stopped) {
        this.setStatus("closed");
        return;
      }
      this.setStatus("reconnecting");
      setTimeout(() => {
        if (!this.stopped) this.connect();
      }, this.reconnectDelayMs);
    };
  }

  /** Send one utterance; false when the channel is not open. */
  send(text: string): boolean {
    if (this.status !== "open" || this.socket === null) return false;
    this.socket.send(utteranceFrame(text));
    return true;
  }

  close(): void {
    this.stopped = true;
    if (this.socket !== null) this.socket.close();
    this.setStatus("closed");
  }

  private receive(data: unknown): void {
    const raw = typeof data === "string" ? data : String(data);
    const message = parseRenderMessage(raw);
    if (message === null) return;
    if (message.seq <= this.watermark) return;
    this.watermark = message.seq;
    this.handlers.onRender(message);
  }

  private setStatus(status: ConnectionStatus): void {
    if (status === this.status) return;
    this.status = status;
    this.handlers.onStatus(status);
  }
}
