// Single base-URL setting; everything else about the backend is opaque
// to the client.
declare global {
  interface Window {
    ILLUMINATE_BASE_URL?: string;
  }
}

export function baseUrl(): string {
  if (typeof window !== "undefined" && window.ILLUMINATE_BASE_URL) {
    return window.ILLUMINATE_BASE_URL.replace(/\/$/, "");
  }
  return "";
}

// Build-time configurable crisis resources; the defaults are placeholders
// a deployment is expected to replace.
export const CRISIS_BANNER = {
  headline: "You deserve immediate support from a real person.",
  body:
    "If you are in danger right now, call your local emergency number. " +
    "You can reach a trained crisis counselor at any time.",
  resources: [
    { label: "Find a local crisis line", href: "https://findahelpline.com" },
    { label: "988 Suicide & Crisis Lifeline (US)", href: "tel:988" },
  ],
};
