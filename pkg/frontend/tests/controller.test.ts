import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ChatController, alternates } from "../src/controller.js";

type Handler = (url: string, init?: RequestInit) => { status: number; body?: unknown };

function fakeFetch(handler: Handler) {
  return async (url: string, init?: RequestInit): Promise<Response> => {
    const { status, body } = handler(url, init);
    return new Response(JSON.stringify(body ?? {}), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

const TOP_K = [
  { action_id: 3, template: "hello , how may i help you ?", p: 0.61 },
  { action_id: 1, template: "you are welcome", p: 0.2 },
  { action_id: 7, template: "api_call <cuisine> <location> <price>", p: 0.1 },
  { action_id: 2, template: "<name> is a nice restaurant", p: 0.05 },
  { action_id: 5, template: "the phone number of <name> is <phone>", p: 0.02 },
];

function happyServer(): Handler {
  let n = 0;
  return (url, init) => {
    if (url.endsWith("/api/session") && init?.method === "POST") {
      n += 1;
      return { status: 201, body: { session_id: `sess-${n}` } };
    }
    if (url.includes("/message")) {
      return {
        status: 200,
        body: { reply: "hello , how may i help you ?", action_id: 3, top_k: TOP_K },
      };
    }
    return { status: 404 };
  };
}

function makeController(handler: Handler) {
  return new ChatController(new ApiClient("http://test", fakeFetch(handler)));
}

describe("startConversation", () => {
  it("creates a session and clears the transcript", async () => {
    const c = makeController(happyServer());
    await c.startConversation();
    expect(c.state.sessionId).toBe("sess-1");
    expect(c.state.entries).toEqual([]);
    expect(c.state.banner).toBe("none");
  });

  it("new chat yields a fresh session id", async () => {
    const c = makeController(happyServer());
    await c.startConversation();
    await c.send("hi");
    await c.startConversation();
    expect(c.state.sessionId).toBe("sess-2");
    expect(c.state.entries).toEqual([]);
  });

  it("shows a banner on 503 without crashing", async () => {
    const c = makeController(() => ({ status: 503 }));
    await c.startConversation();
    expect(c.state.sessionId).toBeNull();
    expect(c.state.banner).toBe("server-down");
  });
});

describe("send", () => {
  it("appends alternating user and bot entries", async () => {
    const c = makeController(happyServer());
    await c.startConversation();
    await c.send("hello");
    await c.send("i want thai food");
    expect(c.state.entries).toHaveLength(4);
    expect(alternates(c.state.entries)).toBe(true);
    expect(c.state.entries[1].actionId).toBe(3);
  });

  it("empty input is sent as a silence turn and the bot still replies", async () => {
    const sent: string[] = [];
    const base = happyServer();
    const c = makeController((url, init) => {
      if (url.includes("/message")) {
        sent.push(JSON.parse(String(init?.body)).text);
      }
      return base(url, init);
    });
    await c.startConversation();
    await c.send("");
    expect(sent).toEqual([""]);
    expect(c.state.entries[1].author).toBe("bot");
  });

  it("keeps inspector numbers verbatim, sorted, summing to <= 1", async () => {
    const c = makeController(happyServer());
    await c.startConversation();
    await c.send("hi");
    const topK = c.state.entries[1].topK!;
    expect(topK).toEqual(TOP_K);
    const ps = topK.map((e) => e.p);
    expect([...ps].sort((a, b) => b - a)).toEqual(ps);
    expect(ps.reduce((a, b) => a + b, 0)).toBeLessThanOrEqual(1);
  });

  it("prompts for a new conversation on 404", async () => {
    const base = happyServer();
    let expired = false;
    const c = makeController((url, init) => {
      if (url.includes("/message") && expired) {
        return { status: 404 };
      }
      return base(url, init);
    });
    await c.startConversation();
    expired = true;
    await c.send("hello?");
    expect(c.state.banner).toBe("session-expired");
    expect(alternates(c.state.entries)).toBe(true);
    expect(c.state.entries).toHaveLength(0);
  });

  it("ignores sends while a request is in flight", async () => {
    const c = makeController(happyServer());
    await c.startConversation();
    const first = c.send("one");
    await c.send("two"); // dropped: pending
    await first;
    expect(c.state.entries.map((e) => e.text)).toContain("one");
    expect(c.state.entries.map((e) => e.text)).not.toContain("two");
  });
});
