/** Gateway client: REST calls plus an optional WebSocket channel. */

import { WireMessage, isWireMessage } from "./wire.js";

export class GatewayError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export interface WebSocketLike {
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type WebSocketCtor = new (url: string) => WebSocketLike;

export interface ClientOptions {
  fetchImpl?: FetchLike;
  webSocketImpl?: WebSocketCtor | null;
}

async function unwrap(response: Response): Promise<unknown> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON error bodies fall through to the status message
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : `HTTP ${response.status}`;
    throw new GatewayError(detail, response.status);
  }
  return body;
}

export class GatewayClient {
  private fetchImpl: FetchLike;
  readonly webSocketImpl: WebSocketCtor | null;

  constructor(
    readonly serverUrl: string,
    options: ClientOptions = {},
  ) {
    this.serverUrl = serverUrl.replace(/\/+$/, "");
    this.fetchImpl =
      options.fetchImpl ??
      (typeof fetch === "function" ? fetch.bind(globalThis) : undefined)!;
    this.webSocketImpl =
      options.webSocketImpl !== undefined
        ? options.webSocketImpl
        : typeof WebSocket === "function"
          ? (WebSocket as unknown as WebSocketCtor)
          : null;
  }

  private async post(path: string, body: unknown): Promise<unknown> {
    const response = await this.fetchImpl(`${this.serverUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return unwrap(response);
  }

  async createSession(): Promise<string> {
    const body = (await this.post("/api/sessions", {})) as { session: string };
    return body.session;
  }

  async sendText(session: string, text: string): Promise<WireMessage[]> {
    const body = await this.post(`/api/sessions/${session}/messages`, { text });
    return (Array.isArray(body) ? body : []).filter(isWireMessage);
  }

  async register(user: string, password: string): Promise<void> {
    await this.post("/api/auth/register", { user, password });
  }

  async login(session: string, user: string, password: string): Promise<WireMessage> {
    const body = await this.post("/api/auth/login", { session, user, password });
    if (!isWireMessage(body)) throw new GatewayError("malformed login reply", 502);
    return body;
  }

  async userModel(session: string, form: "summary" | "raw"): Promise<WireMessage> {
    const response = await this.fetchImpl(
      `${this.serverUrl}/api/sessions/${session}/user-model?form=${form}`,
    );
    const body = await unwrap(response);
    if (!isWireMessage(body)) throw new GatewayError("malformed user model", 502);
    return body;
  }

  wsUrl(): string {
    return this.serverUrl.replace(/^http/, "ws") + "/ws";
  }
}

/**
 * WebSocket channel over the gateway. The first frame for a session flushes
 * its queued messages (the WELCOME), so the channel sends a drain frame on
 * open. Falls back to null when WebSocket is unavailable or fails to open;
 * the widget then stays REST-only.
 */
export class Channel {
  private socket: WebSocketLike | null = null;

  constructor(
    private client: GatewayClient,
    private session: string,
    private onMessage: (msg: WireMessage) => void,
    private onDown: () => void,
  ) {}

  open(): boolean {
    const ctor = this.client.webSocketImpl;
    if (!ctor) return false;
    let socket: WebSocketLike;
    try {
      socket = new ctor(this.client.wsUrl());
    } catch {
      return false;
    }
    socket.onopen = () => {
      socket.send(JSON.stringify({ type: "drain", session: this.session, payload: {}, seq: 0 }));
    };
    socket.onmessage = (ev) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(String(ev.data));
      } catch {
        return;
      }
      if (isWireMessage(parsed)) this.onMessage(parsed);
    };
    socket.onerror = () => this.down();
    socket.onclose = () => this.down();
    this.socket = socket;
    return true;
  }

  sendText(text: string): boolean {
    if (!this.socket) return false;
    try {
      this.socket.send(
        JSON.stringify({
          type: "user_message",
          session: this.session,
          payload: { text },
          seq: 0,
        }),
      );
      return true;
    } catch {
      this.down();
      return false;
    }
  }

  private down(): void {
    if (this.socket) {
      this.socket.onclose = null;
      this.socket = null;
      this.onDown();
    }
  }

  close(): void {
    const socket = this.socket;
    this.socket = null;
    if (socket) {
      socket.onclose = null;
      try {
        socket.close();
      } catch {
        // already closed
      }
    }
  }
}
