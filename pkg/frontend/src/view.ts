/** DOM rendering for the chat page. */

import { ChatState, UiTranscriptEntry } from "./controller.js";

function el(tag: string, cls: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function inspector(entry: UiTranscriptEntry): HTMLElement {
  const details = document.createElement("details");
  details.className = "inspector";
  const summary = document.createElement("summary");
  summary.textContent = `action ${entry.actionId}`;
  details.appendChild(summary);
  for (const row of entry.topK ?? []) {
    const line = el("div", "topk-row");
    line.appendChild(el("span", "topk-template", `[${row.action_id}] ${row.template}`));
    const track = el("div", "topk-track");
    const bar = el("div", "topk-bar");
    bar.style.width = `${Math.max(1, Math.round(row.p * 100))}%`;
    track.appendChild(bar);
    line.appendChild(track);
    line.appendChild(el("span", "topk-p", row.p.toFixed(3)));
    details.appendChild(line);
  }
  return details;
}

export function render(state: ChatState, root: HTMLElement): void {
  const transcript = root.querySelector("#transcript") as HTMLElement;
  transcript.innerHTML = "";
  for (const entry of state.entries) {
    const bubble = el("div", `bubble ${entry.author}`, entry.text || "(silence)");
    transcript.appendChild(bubble);
    if (entry.author === "bot" && entry.topK) {
      transcript.appendChild(inspector(entry));
    }
  }
  transcript.scrollTop = transcript.scrollHeight;

  const banner = root.querySelector("#banner") as HTMLElement;
  banner.hidden = state.banner === "none";
  banner.textContent =
    state.banner === "server-down"
      ? "Cannot reach the server. Retry with “New chat”."
      : state.banner === "session-expired"
        ? "Session expired. Start a new conversation."
        : "";

  const input = root.querySelector("#message") as HTMLInputElement;
  const sendBtn = root.querySelector("#send") as HTMLButtonElement;
  input.disabled = sendBtn.disabled = state.pending || state.sessionId === null;

  const sid = root.querySelector("#session-id") as HTMLElement;
  sid.textContent = state.sessionId ? `session ${state.sessionId.slice(0, 8)}…` : "no session";
}
