// In-memory stand-in for the dialog service, exposed as a FetchLike.
// It mirrors the server contract: sessions live server-side, each message
// appends a user turn and a system turn, and GET /session/{id} replays them.

import type { FetchLike, MessageReply, TranscriptMessage } from "../src/api.js";

interface FixtureSession {
  transcript: TranscriptMessage[];
  turn: number;
}

export interface FixtureReplyMaker {
  (text: string, turn: number): MessageReply;
}

export const defaultReply: FixtureReplyMaker = (text, turn) => ({
  response: `reply ${turn} to: ${text}`,
  raw_response: `raw reply ${turn}`,
  belief: `<SOB> <DMN> restaurant food = italian <EOB>`,
  domain: "restaurant",
  db_match: turn === 0 ? ">3" : "1",
  template: `the [value_food] option ${turn}`,
  tolerance_events: turn === 1 ? ["belief_repaired"] : [],
});

export class FixtureServer {
  sessions = new Map<string, FixtureSession>();
  down = false;
  private counter = 0;

  constructor(private readonly makeReply: FixtureReplyMaker = defaultReply) {}

  readonly fetch: FetchLike = async (input, init) => {
    if (this.down) throw new TypeError("fetch failed");
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://fixture");
    const parts = url.pathname.split("/").filter(Boolean);

    if (method === "GET" && url.pathname === "/health") {
      return json(200, { status: "ok" });
    }
    if (method === "POST" && url.pathname === "/session") {
      const id = `sess-${++this.counter}`;
      this.sessions.set(id, { transcript: [], turn: 0 });
      return json(200, { session_id: id });
    }
    if (parts[0] === "session" && parts.length >= 2) {
      const session = this.sessions.get(parts[1]);
      if (!session) return json(404, { detail: "unknown session" });
      if (method === "GET" && parts.length === 2) {
        return json(200, { session_id: parts[1], transcript: session.transcript });
      }
      if (method === "DELETE" && parts.length === 2) {
        this.sessions.delete(parts[1]);
        return json(200, { deleted: parts[1] });
      }
      if (method === "POST" && parts[2] === "message") {
        const body = JSON.parse(String(init?.body ?? "{}")) as { text?: string };
        if (!body.text) return json(400, { detail: "empty message" });
        const reply = this.makeReply(body.text, session.turn);
        session.turn += 1;
        session.transcript.push({ role: "user", text: body.text });
        session.transcript.push({ role: "system", text: reply.response });
        return json(200, reply);
      }
    }
    return json(404, { detail: "not found" });
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
