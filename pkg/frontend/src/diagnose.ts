// Diagnose view: label badge, probability bar, keyword chips, token heatmap.
import type { DiagnoseResult, DiagnoseViewState } from "./types";

export function newDiagnoseState(): DiagnoseViewState {
  return { input: "", result: null, heatmap: {} };
}

export function heatmapFromResult(result: DiagnoseResult): Record<string, number> {
  if (!result.lime) return {};
  const map: Record<string, number> = {};
  for (const item of result.lime.tokens) {
    map[item.token] = item.weight;
  }
  return map;
}

/**
 * Signed-weight color with a scale symmetric about zero: positive weights
 * (evidence toward "depressed") warm, negative cool, zero neutral.
 */
export function heatColor(weight: number, maxAbs: number): string {
  if (maxAbs <= 0 || weight === 0) return "rgba(0, 0, 0, 0)";
  const intensity = Math.min(1, Math.abs(weight) / maxAbs);
  const alpha = (0.15 + 0.6 * intensity).toFixed(3);
  return weight > 0 ? `rgba(214, 69, 69, ${alpha})` : `rgba(59, 118, 214, ${alpha})`;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderExplanation(result: DiagnoseResult, container: HTMLElement): void {
  container.replaceChildren();

  if (result.label) {
    const badge = el("span", `label-badge ${result.label}`, result.label.replace("_", " "));
    badge.setAttribute("data-testid", "label-badge");
    container.appendChild(badge);
  }

  if (result.p1 !== null) {
    const bar = el("div", "probability-bar");
    bar.setAttribute("data-testid", "probability-bar");
    const fill = el("div", "probability-fill");
    fill.setAttribute("data-testid", "probability-fill");
    fill.style.width = `${(result.p1 * 100).toFixed(1)}%`;
    fill.title = `p(depressed) = ${result.p1.toFixed(3)}`;
    bar.appendChild(fill);
    container.appendChild(bar);
  }

  if (result.explanation) {
    container.appendChild(el("p", "explanation", result.explanation));
  }

  if (result.keywords.length) {
    const chips = el("ul", "keyword-chips");
    chips.setAttribute("data-testid", "keywords");
    for (const keyword of result.keywords) {
      chips.appendChild(el("li", "chip", keyword));
    }
    container.appendChild(chips);
  }

  for (const warning of result.warnings) {
    container.appendChild(el("p", "warning", warning));
  }

  if (result.lime) {
    const heatmap = heatmapFromResult(result);
    const maxAbs = Math.max(0, ...Object.values(heatmap).map(Math.abs));
    const strip = el("div", "heatmap");
    strip.setAttribute("data-testid", "heatmap");
    for (const [token, weight] of Object.entries(heatmap)) {
      const span = el("span", "heat-token", token);
      span.style.backgroundColor = heatColor(weight, maxAbs);
      span.title = weight.toFixed(4);
      span.setAttribute("data-weight", String(weight));
      strip.appendChild(span);
    }
    container.appendChild(strip);
  }
}
