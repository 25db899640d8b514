import { Channel, ChannelOptions, ConnectionStatus } from "./client";
import { RenderMessage } from "./protocol";
import { renderView } from "./views";

export interface AppOptions extends ChannelOptions {
  root: HTMLElement;
  url: string;
}

const STATUS_TEXT: Record<ConnectionStatus, string> = {
  connecting: "connecting",
  open: "connected",
  reconnecting: "connection lost, reconnecting",
  closed: "disconnected",
};

/**
 * Single-page shell: a speech banner, the current view, and a text box
 * standing in for the microphone. The page is a pure renderer of pushed
 * state; the only outbound traffic is utterance frames.
 */
export class App {
  readonly channel: Channel;
  /** Every seq rendered, in arrival order; monotonicity is observable. */
  readonly seqLog: number[] = [];

  private readonly doc: Document;
  private readonly viewRoot: HTMLElement;
  private readonly bannerText: HTMLElement;
  private readonly statusLine: HTMLElement;
  private readonly reconnectPrompt: HTMLElement;
  private readonly input: HTMLInputElement;

  constructor(options: AppOptions) {
    const root = options.root;
    this.doc = root.ownerDocument;
    root.textContent = "";

    const header = this.doc.createElement("header");
    const heading = this.doc.createElement("h1");
    heading.textContent = "Voice Movie Browser";
    header.appendChild(heading);

    const banner = this.doc.createElement("div");
    banner.className = "banner";
    const label = this.doc.createElement("span");
    label.className = "banner-label";
    label.textContent = "Alexa says:";
    this.bannerText = this.doc.createElement("span");
    this.bannerText.className = "banner-text";
    banner.appendChild(label);
    banner.appendChild(this.bannerText);
    header.appendChild(banner);

    this.statusLine = this.doc.createElement("p");
    this.statusLine.className = "status-line";
    header.appendChild(this.statusLine);

    this.reconnectPrompt = this.doc.createElement("p");
    this.reconnectPrompt.className = "reconnect-prompt";
    this.reconnectPrompt.textContent =
      "Not connected. Hold on, reconnecting to the session.";
    this.reconnectPrompt.hidden = true;
    header.appendChild(this.reconnectPrompt);

    this.viewRoot = this.doc.createElement("main");
    this.viewRoot.className = "view-root";

    const form = this.doc.createElement("form");
    form.className = "utterance-form";
    this.input = this.doc.createElement("input");
    this.input.className = "utterance-input";
    this.input.type = "text";
    this.input.placeholder = "Type what you would say out loud";
    const submit = this.doc.createElement("button");
    submit.type = "submit";
    submit.textContent = "Say it";
    form.appendChild(this.input);
    form.appendChild(submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.submitUtterance();
    });

    root.appendChild(header);
    root.appendChild(this.viewRoot);
    root.appendChild(form);

    this.channel = new Channel(
      options.url,
      {
        onRender: (message) => this.onRender(message),
        onStatus: (status) => this.onStatus(status),
      },
      options,
    );
  }

  start(): void {
    this.channel.connect();
  }

  stop(): void {
    this.channel.close();
  }

  get lastSeq(): number {
    return this.channel.seqWatermark;
  }

  /** Send the input box content; empty input sends nothing. */
  submitUtterance(): void {
    const text = this.input.value.trim();
    if (text === "") return;
    if (!this.channel.send(text)) {
      this.reconnectPrompt.hidden = false;
      return;
    }
    this.input.value = "";
  }

  private onRender(message: RenderMessage): void {
    this.seqLog.push(message.seq);
    this.bannerText.textContent = message.speech_text;
    this.viewRoot.textContent = "";
    this.viewRoot.appendChild(renderView(this.doc, message));
  }

  private onStatus(status: ConnectionStatus): void {
    this.statusLine.textContent = STATUS_TEXT[status];
    if (status === "open") {
      this.reconnectPrompt.hidden = true;
    } else if (status === "reconnecting") {
      this.reconnectPrompt.hidden = false;
    }
  }
}
