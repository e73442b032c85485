// Chat view: optimistic message list, pending gate, crisis banner, plan panel.
import { CRISIS_BANNER } from "./config";
import type { ApiClient } from "./api";
import type { ChatViewState, TreatmentPlan } from "./types";

export function newChatState(): ChatViewState {
  return {
    sessionId: null,
    messages: [],
    pending: false,
    plan: null,
    risk: "none",
    error: null,
  };
}

export async function ensureSession(state: ChatViewState, client: ApiClient): Promise<void> {
  if (!state.sessionId) {
    const created = await client.createSession();
    state.sessionId = created.session_id;
  }
}

/**
 * Send one user message. The user turn is appended optimistically; on
 * failure it is retained and an error is recorded so the view can offer
 * a retry. At most one request is in flight per session.
 */
export async function sendMessage(
  state: ChatViewState,
  text: string,
  client: ApiClient,
): Promise<ChatViewState> {
  const trimmed = text.trim();
  if (state.pending || !trimmed) return state;
  await ensureSession(state, client);
  state.messages.push({
    speaker: "user",
    text: trimmed,
    stage: "",
    risk: state.risk,
  });
  state.pending = true;
  state.error = null;
  try {
    const reply = await client.postMessage(state.sessionId as string, trimmed);
    state.messages.push({
      speaker: "assistant",
      text: reply.reply,
      stage: reply.stage,
      risk: reply.risk,
    });
    state.risk = reply.risk;
    if (reply.plan) state.plan = reply.plan;
  } catch (err) {
    state.error = err instanceof Error ? err.message : String(err);
  } finally {
    state.pending = false;
  }
  return state;
}

/** The failed turn stays in the transcript; retry just re-sends its text. */
export async function retryLast(
  state: ChatViewState,
  client: ApiClient,
): Promise<ChatViewState> {
  const lastUser = [...state.messages].reverse().find((m) => m.speaker === "user");
  if (!lastUser || state.pending) return state;
  state.messages = state.messages.filter((m) => m !== lastUser);
  return sendMessage(state, lastUser.text, client);
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderPlan(plan: TreatmentPlan, disabled: boolean): HTMLElement {
  const panel = el("section", "plan-panel");
  panel.setAttribute("data-testid", "plan-panel");
  if (disabled) {
    panel.classList.add("disabled");
    panel.setAttribute("aria-disabled", "true");
  }
  panel.appendChild(el("h3", "plan-title", "Suggested next steps"));
  const list = el("ol", "plan-steps");
  for (const step of plan.steps) {
    const item = el("li", "plan-step");
    item.appendChild(el("strong", "plan-node", step.node));
    item.appendChild(el("p", "plan-rationale", step.rationale));
    item.appendChild(el("p", "plan-prompt", step.prompt));
    list.appendChild(item);
  }
  panel.appendChild(list);
  return panel;
}

function renderCrisisBanner(): HTMLElement {
  const banner = el("div", "crisis-banner");
  banner.setAttribute("data-testid", "crisis-banner");
  banner.setAttribute("role", "alert");
  banner.appendChild(el("strong", "crisis-headline", CRISIS_BANNER.headline));
  banner.appendChild(el("p", "crisis-body", CRISIS_BANNER.body));
  const links = el("ul", "crisis-resources");
  for (const resource of CRISIS_BANNER.resources) {
    const item = el("li");
    const anchor = el("a", "crisis-link", resource.label) as HTMLAnchorElement;
    anchor.href = resource.href;
    item.appendChild(anchor);
    links.appendChild(item);
  }
  banner.appendChild(links);
  return banner;
}

export interface ChatHandlers {
  onSend(text: string): void;
  onRetry(): void;
}

export function renderChat(
  state: ChatViewState,
  container: HTMLElement,
  handlers: ChatHandlers,
): void {
  container.replaceChildren();

  if (state.risk === "crisis") {
    container.appendChild(renderCrisisBanner());
  }

  const transcript = el("ul", "transcript");
  transcript.setAttribute("data-testid", "transcript");
  for (const message of state.messages) {
    const item = el("li", `turn ${message.speaker}`);
    item.appendChild(el("span", "speaker", message.speaker));
    item.appendChild(el("span", "text", message.text));
    if (message.speaker === "assistant" && message.stage) {
      item.appendChild(el("span", "stage-tag", message.stage));
    }
    transcript.appendChild(item);
  }
  container.appendChild(transcript);

  if (state.pending) {
    container.appendChild(el("div", "pending-indicator", "thinking..."));
  }

  if (state.error) {
    const row = el("div", "error-row");
    row.appendChild(el("span", "error-text", state.error));
    const retry = el("button", "retry-button", "Retry") as HTMLButtonElement;
    retry.setAttribute("data-testid", "retry");
    retry.addEventListener("click", () => handlers.onRetry());
    row.appendChild(retry);
    container.appendChild(row);
  }

  if (state.plan) {
    container.appendChild(renderPlan(state.plan, state.risk === "crisis"));
  }

  const form = el("form", "composer") as HTMLFormElement;
  const input = el("input", "composer-input") as HTMLInputElement;
  input.type = "text";
  input.placeholder = "Write a message";
  input.setAttribute("data-testid", "chat-input");
  const send = el("button", "send-button", "Send") as HTMLButtonElement;
  send.type = "submit";
  send.setAttribute("data-testid", "send");
  send.disabled = state.pending;
  input.addEventListener("input", () => {
    send.disabled = state.pending || !input.value.trim();
  });
  if (!input.value.trim()) send.disabled = true;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!send.disabled) handlers.onSend(input.value);
  });
  form.appendChild(input);
  form.appendChild(send);
  container.appendChild(form);
}
