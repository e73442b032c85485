import { api } from "./api";
import { newChatState, renderChat, retryLast, sendMessage } from "./chat";
import { heatmapFromResult, newDiagnoseState, renderExplanation } from "./diagnose";

function mountChat(root: HTMLElement): void {
  const state = newChatState();

  const rerender = () =>
    renderChat(state, root, {
      onSend: (text) => {
        void sendMessage(state, text, api).then(() => {
          rerender();
        });
        rerender(); // show the optimistic user turn and pending state
      },
      onRetry: () => {
        void retryLast(state, api).then(() => rerender());
        rerender();
      },
    });
  rerender();
}

function mountDiagnose(root: HTMLElement): void {
  const state = newDiagnoseState();

  const form = document.createElement("form");
  const input = document.createElement("textarea");
  input.placeholder = "Paste a post to analyze";
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Diagnose";
  const output = document.createElement("div");
  output.className = "diagnose-output";

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    state.input = input.value;
    if (!state.input.trim()) return;
    submit.disabled = true;
    void api
      .diagnose(state.input)
      .then((result) => {
        state.result = result;
        state.heatmap = heatmapFromResult(result);
        renderExplanation(result, output);
      })
      .catch((err) => {
        output.replaceChildren();
        const failure = document.createElement("p");
        failure.className = "error-text";
        failure.textContent = err instanceof Error ? err.message : String(err);
        output.appendChild(failure);
      })
      .finally(() => {
        submit.disabled = false;
      });
  });

  form.appendChild(input);
  form.appendChild(submit);
  root.appendChild(form);
  root.appendChild(output);
}

function mount(): void {
  const chatRoot = document.getElementById("chat-view");
  const diagnoseRoot = document.getElementById("diagnose-view");
  if (chatRoot) mountChat(chatRoot);
  if (diagnoseRoot) mountDiagnose(diagnoseRoot);

  for (const tab of Array.from(document.querySelectorAll("[data-tab]"))) {
    tab.addEventListener("click", () => {
      for (const view of Array.from(document.querySelectorAll(".view"))) {
        view.classList.add("hidden");
      }
      const target = document.getElementById(tab.getAttribute("data-tab") as string);
      target?.classList.remove("hidden");
    });
  }
}

document.addEventListener("DOMContentLoaded", mount);
