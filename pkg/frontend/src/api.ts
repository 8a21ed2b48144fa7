/** Thin client for the dialogue manager's HTTP API. All numbers shown in
 * the UI come from these responses verbatim. */

export interface TopKEntry {
  action_id: number;
  template: string;
  p: number;
}

export interface MessageResponse {
  reply: string;
  action_id: number;
  top_k: TopKEntry[];
}

export interface TranscriptEntry {
  user: string;
  action_id: number;
  template: string;
  timestamp: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `cannot reach server: ${err}`);
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, `${resp.status} on ${path}`);
    }
    return (await resp.json()) as T;
  }

  async createSession(): Promise<string> {
    const out = await this.request<{ session_id: string }>("/api/session", { method: "POST" });
    return out.session_id;
  }

  async sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.request<MessageResponse>(`/api/session/${sessionId}/message`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  async transcript(sessionId: string): Promise<TranscriptEntry[]> {
    return this.request<TranscriptEntry[]>(`/api/session/${sessionId}/transcript`);
  }

  async health(): Promise<{ checkpoint: string }> {
    return this.request<{ checkpoint: string }>("/api/health");
  }
}
