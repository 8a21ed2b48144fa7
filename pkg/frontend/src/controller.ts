/** DOM-free chat state machine: one session, strictly alternating
 * user/bot transcript, one in-flight request at a time. */

import { ApiClient, ApiError, TopKEntry } from "./api.js";

export interface UiTranscriptEntry {
  author: "user" | "bot";
  text: string;
  actionId?: number;
  topK?: TopKEntry[];
}

export type BannerKind = "none" | "server-down" | "session-expired";

export interface ChatState {
  sessionId: string | null;
  entries: UiTranscriptEntry[];
  pending: boolean;
  banner: BannerKind;
}

export class ChatController {
  state: ChatState = { sessionId: null, entries: [], pending: false, banner: "none" };

  constructor(
    private api: ApiClient,
    private onChange: (state: ChatState) => void = () => {},
  ) {}

  private update(patch: Partial<ChatState>) {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  /** Start (or restart) a conversation: new session, cleared transcript. */
  async startConversation(): Promise<void> {
    this.update({ pending: true });
    try {
      const sessionId = await this.api.createSession();
      this.update({ sessionId, entries: [], banner: "none", pending: false });
    } catch (err) {
      this.update({ banner: "server-down", pending: false });
    }
  }

  /** Send one user turn; empty text is a valid silence turn. */
  async send(text: string): Promise<void> {
    if (this.state.pending || this.state.sessionId === null) {
      return;
    }
    const entries = [...this.state.entries, { author: "user" as const, text }];
    this.update({ entries, pending: true });
    try {
      const resp = await this.api.sendMessage(this.state.sessionId, text);
      this.update({
        entries: [
          ...entries,
          { author: "bot", text: resp.reply, actionId: resp.action_id, topK: resp.top_k },
        ],
        pending: false,
      });
    } catch (err) {
      // undo the optimistic user bubble so alternation is preserved
      const banner: BannerKind =
        err instanceof ApiError && err.status === 404 ? "session-expired" : "server-down";
      this.update({ entries: this.state.entries.slice(0, -1), pending: false, banner });
    }
  }
}

/** Invariant check used by the view and the tests: entries strictly
 * alternate user/bot, starting with user. */
export function alternates(entries: UiTranscriptEntry[]): boolean {
  return entries.every((e, i) => e.author === (i % 2 === 0 ? "user" : "bot"));
}
