// REST client for the service. These five endpoints are the only request
// shapes the UI ever issues.
import { baseUrl } from "./config";
import type { DiagnoseResult, MessageReply, SessionView } from "./types";

export interface ApiClient {
  health(): Promise<{ status: string }>;
  diagnose(
    text: string,
    opts?: { shots?: number; engine?: string; explain?: boolean },
  ): Promise<DiagnoseResult>;
  createSession(): Promise<{ session_id: string }>;
  getSession(sessionId: string): Promise<SessionView>;
  postMessage(sessionId: string, text: string): Promise<MessageReply>;
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(`${baseUrl()}${path}`, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!res.ok) {
    let detail = `${res.status}`;
    try {
      const body = await res.json();
      if (body && body.detail) detail = `${res.status}: ${body.detail}`;
    } catch {
      // non-JSON error body; keep the status code
    }
    throw new Error(`request failed (${detail})`);
  }
  return res.json() as Promise<T>;
}

export const api: ApiClient = {
  health: () => request("/healthz"),

  diagnose: (text, opts = {}) =>
    request("/v1/diagnose", {
      method: "POST",
      body: JSON.stringify({ text, ...opts }),
    }),

  createSession: () => request("/v1/sessions", { method: "POST" }),

  getSession: (sessionId) => request(`/v1/sessions/${sessionId}`),

  postMessage: (sessionId, text) =>
    request(`/v1/sessions/${sessionId}/messages`, {
      method: "POST",
      body: JSON.stringify({ text }),
    }),
};
