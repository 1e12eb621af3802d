/** Embeddable chat widget speaking the gateway wire protocol. */

import { Channel, ClientOptions, GatewayClient, GatewayError } from "./client.js";
import { SeqBuffer, WireMessage } from "./wire.js";

export interface WidgetOptions extends ClientOptions {
  /** Backoff delays (ms) between session-creation retries. */
  retryDelays?: number[];
}

const ACCEPT_TEXT = "i will watch it";
const REJECT_TEXT = "something different please";

/* All rules are scoped under .mbw so host-page styles are never touched. */
const STYLE = `
.mbw { font-family: system-ui, sans-serif; border: 1px solid var(--mbw-border, #ccc); border-radius: 8px; display: flex; flex-direction: column; max-width: 420px; background: var(--mbw-bg, #fff); }
.mbw-banner { background: #fdd; color: #700; padding: 6px 10px; display: flex; justify-content: space-between; }
.mbw-banner[hidden] { display: none; }
.mbw-transcript { flex: 1; overflow-y: auto; padding: 10px; min-height: 200px; }
.mbw-bubble { margin: 4px 0; padding: 6px 10px; border-radius: 10px; max-width: 85%; }
.mbw-user { background: var(--mbw-user-bg, #d0e8ff); margin-left: auto; }
.mbw-agent { background: var(--mbw-agent-bg, #eee); }
.mbw-card { border: 1px solid #bbb; border-radius: 8px; padding: 8px; margin: 6px 0; }
.mbw-card-title { font-weight: bold; }
.mbw-card button { margin-right: 6px; }
.mbw-composer { display: flex; border-top: 1px solid #ddd; }
.mbw-composer input { flex: 1; border: none; padding: 8px; }
.mbw-panel { border-top: 1px solid #ddd; padding: 8px; }
.mbw-notice { background: #ffd; padding: 4px 8px; margin: 4px 0; display: flex; justify-content: space-between; }
.mbw-ended .mbw-composer { opacity: 0.5; }
`;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class Widget {
  readonly client: GatewayClient;
  /** Resolves once the session exists (or the error banner is up). */
  readonly ready: Promise<void>;
  session: string | null = null;
  loggedInAs: string | null = null;
  ended = false;

  private buffer = new SeqBuffer();
  private channel: Channel | null = null;
  private retryDelays: number[];

  private root: HTMLElement;
  private banner: HTMLElement;
  private transcript: HTMLElement;
  private input: HTMLInputElement;
  private sendButton: HTMLButtonElement;
  private panel: HTMLElement;

  constructor(container: Element, serverUrl: string, options: WidgetOptions = {}) {
    this.client = new GatewayClient(serverUrl, options);
    this.retryDelays = options.retryDelays ?? [500, 1000, 2000];

    this.root = el("div", "mbw");
    const style = document.createElement("style");
    style.textContent = STYLE;
    this.root.appendChild(style);

    this.banner = el("div", "mbw-banner");
    this.banner.hidden = true;
    this.root.appendChild(this.banner);

    this.transcript = el("div", "mbw-transcript");
    this.root.appendChild(this.transcript);

    const composer = el("form", "mbw-composer");
    this.input = el("input");
    this.input.placeholder = "Say something...";
    this.sendButton = el("button", "", "Send");
    this.sendButton.type = "submit";
    composer.append(this.input, this.sendButton);
    composer.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const text = this.input.value.trim();
      if (text) {
        this.input.value = "";
        void this.sendUserText(text);
      }
    });
    this.root.appendChild(composer);

    this.panel = el("div", "mbw-panel");
    this.root.appendChild(this.panel);
    this.renderAuthPanel();

    container.appendChild(this.root);
    this.ready = this.init();
  }

  // ------------------------------------------------------------------
  private async init(): Promise<void> {
    for (let attempt = 0; ; attempt++) {
      try {
        this.session = await this.client.createSession();
        break;
      } catch {
        if (attempt >= this.retryDelays.length) {
          this.showBanner("Cannot reach the recommender service.", () => {
            void this.init();
          });
          return;
        }
        await sleep(this.retryDelays[attempt]);
      }
    }
    this.hideBanner();
    this.channel = new Channel(
      this.client,
      this.session,
      (msg) => this.receive(msg),
      () => (this.channel = null), // drop to REST-only on channel loss
    );
    if (!this.channel.open()) this.channel = null;
  }

  private receive(msg: WireMessage): void {
    for (const ready of this.buffer.push(msg)) this.render(ready);
  }

  // ------------------------------------------------------------------
  async sendUserText(text: string): Promise<void> {
    if (!this.session || this.ended) return;
    const bubble = el("div", "mbw-bubble mbw-user", text);
    this.transcript.appendChild(bubble);
    try {
      if (this.channel && this.channel.sendText(text)) return;
      for (const msg of await this.client.sendText(this.session, text)) this.receive(msg);
    } catch (err) {
      this.notice(err instanceof Error ? err.message : "send failed");
    }
  }

  private render(msg: WireMessage): void {
    switch (msg.type) {
      case "agent_message": {
        this.transcript.appendChild(
          el("div", "mbw-bubble mbw-agent", String(msg.payload.text ?? "")),
        );
        if (msg.payload.intent === "BYE") this.markEnded();
        break;
      }
      case "recommendation":
        this.transcript.appendChild(this.card(msg.payload));
        break;
      case "user_model":
        this.renderUserModel(msg.payload);
        break;
      case "error":
        this.notice(String(msg.payload.text ?? "something went wrong"));
        break;
      case "system":
        this.notice(String(msg.payload.text ?? ""));
        break;
    }
  }

  private card(payload: Record<string, unknown>): HTMLElement {
    const card = el("div", "mbw-card");
    const year = payload.year !== undefined ? ` (${payload.year})` : "";
    card.appendChild(el("div", "mbw-card-title", `${payload.title ?? "?"}${year}`));
    if (Array.isArray(payload.genres)) {
      card.appendChild(el("div", "mbw-card-genres", payload.genres.join(", ")));
    }
    if (payload.explanation) {
      card.appendChild(el("div", "mbw-card-explanation", String(payload.explanation)));
    }
    const accept = el("button", "mbw-accept", "Accept");
    accept.addEventListener("click", () => void this.sendUserText(ACCEPT_TEXT));
    const reject = el("button", "mbw-reject", "Reject");
    reject.addEventListener("click", () => void this.sendUserText(REJECT_TEXT));
    card.append(accept, reject);
    return card;
  }

  private markEnded(): void {
    this.ended = true;
    this.root.classList.add("mbw-ended");
    this.input.disabled = true;
    this.sendButton.disabled = true;
  }

  // ------------------------------------------------------------------
  private renderAuthPanel(): void {
    this.panel.textContent = "";
    const form = el("form", "mbw-login");
    const user = el("input", "mbw-login-user");
    user.placeholder = "user";
    const password = el("input", "mbw-login-password");
    password.type = "password";
    password.placeholder = "password";
    const login = el("button", "", "Log in");
    login.type = "submit";
    const register = el("button", "mbw-register", "Register");
    register.type = "button";
    form.append(user, password, login, register);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.doLogin(user.value, password.value);
    });
    register.addEventListener("click", () => {
      void this.doRegister(user.value, password.value);
    });
    this.panel.appendChild(form);
  }

  private async doRegister(user: string, password: string): Promise<void> {
    try {
      await this.client.register(user, password);
      this.notice(`Registered ${user}. You can log in now.`);
    } catch (err) {
      this.notice(err instanceof Error ? err.message : "registration failed");
    }
  }

  private async doLogin(user: string, password: string): Promise<void> {
    if (!this.session) return;
    try {
      const msg = await this.client.login(this.session, user, password);
      this.loggedInAs = String(msg.payload.user ?? user);
      this.renderModelPanel();
      await this.refreshUserModel("summary");
    } catch (err) {
      this.notice(err instanceof Error ? err.message : "login failed");
    }
  }

  private renderModelPanel(): void {
    this.panel.textContent = "";
    this.panel.appendChild(el("div", "mbw-model-user", `Logged in as ${this.loggedInAs}`));
    const list = el("ul", "mbw-model");
    this.panel.appendChild(list);
    const refresh = el("button", "mbw-model-refresh", "Refresh");
    refresh.addEventListener("click", () => void this.refreshUserModel("summary"));
    const raw = el("button", "mbw-model-raw", "Raw");
    raw.addEventListener("click", () => void this.refreshUserModel("raw"));
    this.panel.append(refresh, raw);
  }

  async refreshUserModel(form: "summary" | "raw"): Promise<void> {
    if (!this.session) return;
    try {
      const msg = await this.client.userModel(this.session, form);
      this.renderUserModel(msg.payload);
    } catch (err) {
      if (err instanceof GatewayError && err.status === 401) {
        this.loggedInAs = null;
        this.renderAuthPanel();
        this.notice("Please log in to see your profile.");
      } else {
        this.notice(err instanceof Error ? err.message : "profile fetch failed");
      }
    }
  }

  private renderUserModel(payload: Record<string, unknown>): void {
    const list = this.panel.querySelector(".mbw-model");
    if (!list) return;
    list.textContent = "";
    if (Array.isArray(payload.statements)) {
      for (const statement of payload.statements) {
        list.appendChild(el("li", "mbw-statement", String(statement)));
      }
    } else if (Array.isArray(payload.pairs)) {
      for (const pair of payload.pairs as Record<string, unknown>[]) {
        list.appendChild(
          el("li", "mbw-pair", `${pair.slot}=${pair.value}: ${pair.polarity}`),
        );
      }
    }
  }

  // ------------------------------------------------------------------
  private showBanner(text: string, retry: () => void): void {
    this.banner.textContent = "";
    this.banner.appendChild(el("span", "", text));
    const button = el("button", "mbw-retry", "Retry");
    button.addEventListener("click", retry);
    this.banner.appendChild(button);
    this.banner.hidden = false;
  }

  private hideBanner(): void {
    this.banner.hidden = true;
  }

  private notice(text: string): void {
    const notice = el("div", "mbw-notice");
    notice.appendChild(el("span", "", text));
    const dismiss = el("button", "mbw-dismiss", "x");
    dismiss.addEventListener("click", () => notice.remove());
    notice.appendChild(dismiss);
    this.transcript.appendChild(notice);
  }

  destroy(): void {
    this.channel?.close();
    this.root.remove();
  }
}

/** Mounts a widget into `container` (element or CSS selector). */
export function mount(
  container: Element | string,
  serverUrl: string,
  options: WidgetOptions = {},
): Widget {
  const node =
    typeof container === "string" ? document.querySelector(container) : container;
  if (!node) throw new Error(`no such container: ${String(container)}`);
  return new Widget(node, serverUrl, options);
}
