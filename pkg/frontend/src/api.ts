// Typed fetch client for the dialog service HTTP API.
// The server owns all dialog state; this client only transports it.

export interface TurnDebug {
  raw_response: string;
  belief: string;
  domain: string;
  db_match: string;
  template: string;
  tolerance_events: string[];
}

export interface MessageReply extends TurnDebug {
  response: string;
}

export interface TranscriptMessage {
  role: "user" | "system";
  text: string;
}

export interface Transcript {
  session_id: string;
  transcript: TranscriptMessage[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class DialogApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = (await res.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>("/session", {
      method: "POST",
    });
    return body.session_id;
  }

  sendMessage(sessionId: string, text: string): Promise<MessageReply> {
    return this.request<MessageReply>(
      `/session/${encodeURIComponent(sessionId)}/message`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text }),
      },
    );
  }

  getTranscript(sessionId: string): Promise<Transcript> {
    return this.request<Transcript>(`/session/${encodeURIComponent(sessionId)}`);
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.request<{ deleted: boolean }>(
      `/session/${encodeURIComponent(sessionId)}`,
      { method: "DELETE" },
    );
  }

  health(): Promise<{ status: string; backend_info: string }> {
    return this.request<{ status: string; backend_info: string }>("/health");
  }
}
