// DOM rendering. The whole view is a pure function of UiState plus a
// handler bundle; every interaction goes back through the controller.

import type { UiState } from "./state.js";

export interface ViewHandlers {
  onOptionClick(label: string): void;
  onSubmitText(text: string): void;
  onReflect(): void;
  onBack(): void;
}

export function render(root: HTMLElement, state: UiState, handlers: ViewHandlers): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  const inputSoFar = doc.createElement("div");
  inputSoFar.className = "input-so-far";
  inputSoFar.textContent = `Input So Far: ${state.inputSoFar.join(" ")}`;
  root.appendChild(inputSoFar);

  if (state.error) {
    const banner = doc.createElement("div");
    banner.className = "banner error";
    banner.textContent = state.error;
    root.appendChild(banner);
  }
  if (state.rejected) {
    const banner = doc.createElement("div");
    banner.className = "banner rejected";
    banner.textContent = "That input is not available right now.";
    root.appendChild(banner);
  }

  if (state.completed !== null) {
    const done = doc.createElement("div");
    done.className = "completed";
    const note = doc.createElement("p");
    note.textContent = "Dialog complete. Your page:";
    const link = doc.createElement("a");
    link.className = "completed-page";
    link.href = state.completed;
    link.textContent = state.completed;
    done.appendChild(note);
    done.appendChild(link);
    root.appendChild(done);
  } else {
    root.appendChild(renderOptions(doc, state, handlers));
    root.appendChild(renderOutOfTurn(doc, state, handlers));
  }

  root.appendChild(renderReflector(doc, state, handlers));
}

function renderOptions(doc: Document, state: UiState, handlers: ViewHandlers): HTMLElement {
  const list = doc.createElement("ul");
  list.className = "options";
  for (const option of state.options) {
    const item = doc.createElement("li");
    const link = doc.createElement("a");
    link.href = "#";
    link.className = "option";
    link.dataset.label = option.label;
    link.textContent = option.label;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      if (!state.pending) handlers.onOptionClick(option.label);
    });
    item.appendChild(link);
    list.appendChild(item);
  }
  return list;
}

function renderOutOfTurn(doc: Document, state: UiState, handlers: ViewHandlers): HTMLElement {
  const form = doc.createElement("form");
  form.className = "out-of-turn";
  const box = doc.createElement("input");
  box.type = "text";
  box.name = "utterance";
  box.placeholder = 'say something out of turn, e.g. d s or "ice cream maker"';
  box.disabled = state.pending;
  const say = doc.createElement("button");
  say.type = "submit";
  say.textContent = "Say";
  say.disabled = state.pending;
  form.appendChild(box);
  form.appendChild(say);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!state.pending && box.value.trim()) handlers.onSubmitText(box.value);
  });
  return form;
}

function renderReflector(doc: Document, state: UiState, handlers: ViewHandlers): HTMLElement {
  const section = doc.createElement("div");
  section.className = "reflector";
  const ask = doc.createElement("button");
  ask.type = "button";
  ask.className = "what-may-i-say";
  ask.textContent = "What may I say?";
  ask.disabled = state.pending;
  ask.addEventListener("click", () => {
    if (!state.pending) handlers.onReflect();
  });
  section.appendChild(ask);

  const back = doc.createElement("button");
  back.type = "button";
  back.className = "back";
  back.textContent = "Back";
  back.disabled = state.pending || state.inputSoFar.length === 0;
  back.addEventListener("click", () => {
    if (!state.pending) handlers.onBack();
  });
  section.appendChild(back);

  if (state.reflection !== null) {
    const list = doc.createElement("ul");
    list.className = "reflection";
    if (state.reflection.length === 0) {
      const item = doc.createElement("li");
      item.textContent = state.completed !== null
        ? "Nothing: the dialog has completed."
        : "Nothing is currently sayable.";
      list.appendChild(item);
    }
    for (const token of state.reflection) {
      const item = doc.createElement("li");
      item.textContent = token;
      list.appendChild(item);
    }
    section.appendChild(list);
  }
  return section;
}
