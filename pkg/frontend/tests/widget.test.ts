import { beforeEach, describe, expect, it } from "vitest";

import { mount, Widget } from "../src/widget.js";
import { FakeGateway } from "./fake_gateway.js";

const tick = () => new Promise<void>((resolve) => setTimeout(resolve, 0));

async function settle(widget: Widget): Promise<void> {
  await widget.ready;
  await tick();
  await tick();
}

function mountFake(gateway: FakeGateway, container: HTMLElement): Widget {
  return mount(container, "http://fake", {
    fetchImpl: gateway.fetchImpl,
    webSocketImpl: gateway.socketCtor(),
    retryDelays: [],
  });
}

function bubbles(container: HTMLElement): string[] {
  return [...container.querySelectorAll(".mbw-bubble")].map((n) => n.textContent ?? "");
}

async function typeAndSend(widget: Widget, container: HTMLElement, text: string) {
  const input = container.querySelector<HTMLInputElement>(".mbw-composer input")!;
  input.value = text;
  container
    .querySelector("form.mbw-composer")!
    .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
  await tick();
}

let gateway: FakeGateway;
let container: HTMLElement;

beforeEach(() => {
  gateway = new FakeGateway();
  document.body.innerHTML = "";
  container = document.createElement("div");
  document.body.appendChild(container);
});

describe("mount", () => {
  it("creates a session and renders the WELCOME bubble", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    expect(widget.session).toBe("s0");
    expect(bubbles(container)).toEqual(["Hello! I can recommend movies."]);
  });

  it("accepts a CSS selector for the container", async () => {
    container.id = "host";
    const widget = mount("#host", "http://fake", {
      fetchImpl: gateway.fetchImpl,
      webSocketImpl: gateway.socketCtor(),
      retryDelays: [],
    });
    await settle(widget);
    expect(container.querySelector(".mbw")).not.toBeNull();
  });

  it("shows an error banner (no crash) when the server is unreachable", async () => {
    const widget = mount(container, "http://down", {
      fetchImpl: async () => {
        throw new Error("connection refused");
      },
      webSocketImpl: null,
      retryDelays: [],
    });
    await settle(widget);
    const banner = container.querySelector<HTMLElement>(".mbw-banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("Cannot reach");
    expect(banner.querySelector(".mbw-retry")).not.toBeNull();
  });

  it("gives two mounts on one page independent sessions", async () => {
    const other = document.createElement("div");
    document.body.appendChild(other);
    const first = mountFake(gateway, container);
    const second = mountFake(gateway, other);
    await settle(first);
    await settle(second);
    expect(first.session).not.toBe(second.session);

    await typeAndSend(first, container, "hi");
    expect(bubbles(container)).toContain("What genre are you in the mood for?");
    expect(bubbles(other)).toEqual(["Hello! I can recommend movies."]);
  });

  it("scopes all styles inside the widget root", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    const styles = [...document.querySelectorAll("style")];
    expect(styles.length).toBe(1);
    expect(container.contains(styles[0])).toBe(true);
    const text = styles[0].textContent ?? "";
    for (const line of text.split("\n").filter((l) => l.trim().length)) {
      expect(line.trimStart().startsWith(".mbw")).toBe(true);
    }
  });
});

describe("conversation", () => {
  it("renders the user bubble immediately and the agent reply after", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    await typeAndSend(widget, container, "i like comedy movies");
    expect(bubbles(container)).toEqual([
      "Hello! I can recommend movies.",
      "i like comedy movies",
      "How about Funny Film?",
    ]);
  });

  it("renders recommendations as cards with title, year, genres, explanation", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    await typeAndSend(widget, container, "i like comedy movies");
    const card = container.querySelector(".mbw-card")!;
    expect(card.querySelector(".mbw-card-title")!.textContent).toBe("Funny Film (1999)");
    expect(card.querySelector(".mbw-card-genres")!.textContent).toBe("comedy");
    expect(card.querySelector(".mbw-card-explanation")!.textContent).toBe(
      "Because you asked for comedy.",
    );
    expect(card.querySelector(".mbw-accept")).not.toBeNull();
    expect(card.querySelector(".mbw-reject")).not.toBeNull();
  });

  it("accept button sends the accept phrase and ends the session", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    await typeAndSend(widget, container, "i like comedy movies");
    container.querySelector<HTMLButtonElement>(".mbw-accept")!.click();
    await tick();
    expect(bubbles(container)).toContain("i will watch it");
    expect(bubbles(container)).toContain("Enjoy the movie!");
    expect(widget.ended).toBe(true);
    expect(gateway.sessions.get(widget.session!)!.terminated).toBe(true);
    expect(container.querySelector<HTMLInputElement>(".mbw-composer input")!.disabled).toBe(true);
  });

  it("renders out-of-order frames in seq order and drops duplicates", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget); // WELCOME consumed seq 1
    const socket = gateway.lastSocket!;
    const frame = (seq: number, text: string) => ({
      type: "agent_message",
      session: widget.session!,
      payload: { text },
      seq,
    });
    socket.deliver(frame(3, "third"));
    socket.deliver(frame(2, "second"));
    socket.deliver(frame(2, "second again"));
    await tick();
    expect(bubbles(container)).toEqual([
      "Hello! I can recommend movies.",
      "second",
      "third",
    ]);
  });

  it("falls back to REST when no WebSocket is available", async () => {
    const widget = mount(container, "http://fake", {
      fetchImpl: gateway.fetchImpl,
      webSocketImpl: null,
      retryDelays: [],
    });
    await settle(widget);
    await typeAndSend(widget, container, "i like comedy movies");
    // WELCOME was queued server-side and arrives with the first REST reply.
    expect(bubbles(container)).toEqual([
      "i like comedy movies",
      "Hello! I can recommend movies.",
      "How about Funny Film?",
    ]);
  });

  it("surfaces gateway errors as dismissible notices", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    const socket = gateway.lastSocket!;
    socket.deliver({
      type: "error",
      session: widget.session!,
      payload: { text: "I lost track of that." },
      seq: 0,
    });
    await tick();
    const notice = container.querySelector(".mbw-notice")!;
    expect(notice.textContent).toContain("I lost track of that.");
    notice.querySelector<HTMLButtonElement>(".mbw-dismiss")!.click();
    expect(container.querySelector(".mbw-notice")).toBeNull();
  });
});

describe("login and user model", () => {
  async function login(widget: Widget, user = "maria", password = "hunter22") {
    const panel = container.querySelector(".mbw-panel")!;
    panel.querySelector<HTMLInputElement>(".mbw-login-user")!.value = user;
    panel.querySelector<HTMLInputElement>(".mbw-login-password")!.value = password;
    panel
      .querySelector("form.mbw-login")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await tick();
    await tick();
  }

  it("shows the login form while anonymous", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    expect(container.querySelector("form.mbw-login")).not.toBeNull();
    expect(container.querySelector(".mbw-model")).toBeNull();
  });

  it("renders summary statements after login and a comedy reveal", async () => {
    gateway.users.set("maria", "hunter22");
    const widget = mountFake(gateway, container);
    await settle(widget);
    await login(widget);
    expect(widget.loggedInAs).toBe("maria");
    let items = [...container.querySelectorAll(".mbw-statement")].map((n) => n.textContent);
    expect(items).toEqual(["I don't know your preferences yet."]);

    await typeAndSend(widget, container, "i like comedy movies");
    container.querySelector<HTMLButtonElement>(".mbw-model-refresh")!.click();
    await tick();
    items = [...container.querySelectorAll(".mbw-statement")].map((n) => n.textContent);
    expect(items).toEqual(["You like comedy movies."]);
  });

  it("renders raw key-value rows on request", async () => {
    gateway.users.set("maria", "hunter22");
    const widget = mountFake(gateway, container);
    await settle(widget);
    await login(widget);
    await typeAndSend(widget, container, "i like comedy movies");
    container.querySelector<HTMLButtonElement>(".mbw-model-raw")!.click();
    await tick();
    const rows = [...container.querySelectorAll(".mbw-pair")].map((n) => n.textContent);
    expect(rows).toEqual(["genre=comedy: 1"]);
  });

  it("reports bad credentials without leaving the login form", async () => {
    gateway.users.set("maria", "hunter22");
    const widget = mountFake(gateway, container);
    await settle(widget);
    await login(widget, "maria", "wrong");
    expect(widget.loggedInAs).toBeNull();
    expect(container.querySelector("form.mbw-login")).not.toBeNull();
    expect(container.querySelector(".mbw-notice")!.textContent).toContain("bad credentials");
  });

  it("registers a new user through the form", async () => {
    const widget = mountFake(gateway, container);
    await settle(widget);
    const panel = container.querySelector(".mbw-panel")!;
    panel.querySelector<HTMLInputElement>(".mbw-login-user")!.value = "nick";
    panel.querySelector<HTMLInputElement>(".mbw-login-password")!.value = "pw123456";
    panel.querySelector<HTMLButtonElement>(".mbw-register")!.click();
    await tick();
    expect(gateway.users.get("nick")).toBe("pw123456");
    await login(widget, "nick", "pw123456");
    expect(widget.loggedInAs).toBe("nick");
  });
});
