// Controller: one in-flight request per view, every mutation re-renders.

import { ApiError, OutturnClient } from "./api.js";
import { applyError, applyReflection, applyResponse, initialState, withPending } from "./state.js";
import type { UiState } from "./state.js";
import { TokenizeError, tokenizeUtterance } from "./tokenize.js";
import { render, type ViewHandlers } from "./view.js";

export class DialogApp {
  state: UiState = initialState();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: OutturnClient,
  ) {}

  async start(siteId: string): Promise<void> {
    await this.exchange(() => this.client.createSession(siteId));
  }

  async resume(session: string): Promise<void> {
    await this.exchange(() => this.client.getState(session));
  }

  async clickOption(label: string): Promise<void> {
    if (!this.state.session) return;
    await this.exchange(() => this.client.submitInput(this.state.session!, [label]));
  }

  async submitText(text: string): Promise<void> {
    if (!this.state.session) return;
    let utterance: string[];
    try {
      utterance = tokenizeUtterance(text);
    } catch (error) {
      if (error instanceof TokenizeError) {
        this.update(applyError(this.state, error.message));
        return;
      }
      throw error;
    }
    if (utterance.length === 0) return;
    await this.exchange(() => this.client.submitInput(this.state.session!, utterance));
  }

  async showReflection(): Promise<void> {
    if (!this.state.session || this.state.pending) return;
    this.update(withPending(this.state, true));
    try {
      const tokens = await this.client.reflect(this.state.session);
      this.update(applyReflection(withPending(this.state, false), tokens));
    } catch (error) {
      this.update(applyError(withPending(this.state, false), describe(error)));
    }
  }

  async stepBack(): Promise<void> {
    if (!this.state.session) return;
    await this.exchange(() => this.client.stepBack(this.state.session!, 1));
  }

  private async exchange(call: () => Promise<Parameters<typeof applyResponse>[1]>): Promise<void> {
    if (this.state.pending) return;
    this.update(withPending(this.state, true));
    try {
      const response = await call();
      this.update(applyResponse(withPending(this.state, false), response));
    } catch (error) {
      this.update(applyError(withPending(this.state, false), describe(error)));
    }
  }

  private update(state: UiState): void {
    this.state = state;
    render(this.root, state, this.handlers());
  }

  private handlers(): ViewHandlers {
    return {
      onOptionClick: (label) => void this.clickOption(label),
      onSubmitText: (text) => void this.submitText(text),
      onReflect: () => void this.showReflection(),
      onBack: () => void this.stepBack(),
    };
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}

export function boot(win: Window & typeof globalThis): DialogApp | null {
  const params = new URLSearchParams(win.location.search);
  const base = params.get("api") ?? win.location.origin;
  const site = params.get("site");
  const session = params.get("session");
  const root = win.document.getElementById("dialog");
  if (!root) return null;
  const app = new DialogApp(root as HTMLElement, new OutturnClient(base));
  if (session) {
    void app.resume(session);
  } else if (site) {
    void app.start(site);
  } else {
    root.textContent = "Pass ?site=<site_id> (and optionally ?api=<service url>).";
  }
  return app;
}
