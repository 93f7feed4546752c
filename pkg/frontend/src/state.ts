// View state mirrors the most recent InteractionResponse exactly; no
// dialog logic lives on the client.

import type { InteractionResponse, OptionLink } from "./api.js";

export interface UiState {
  session: string | null;
  options: OptionLink[];
  inputSoFar: string[];
  completed: string | null;
  rejected: boolean;
  reflection: string[] | null;
  pending: boolean;
  error: string | null;
}

export function initialState(): UiState {
  return {
    session: null,
    options: [],
    inputSoFar: [],
    completed: null,
    rejected: false,
    reflection: null,
    pending: false,
    error: null,
  };
}

export function applyResponse(state: UiState, response: InteractionResponse): UiState {
  return {
    ...state,
    session: response.session,
    options: response.options,
    inputSoFar: response.input_so_far,
    completed: response.completed ?? null,
    rejected: response.rejected === true,
    reflection: null, // stale once the dialog state may have moved
    error: null,
  };
}

export function applyReflection(state: UiState, validTokens: string[]): UiState {
  return { ...state, reflection: [...validTokens].sort(), error: null };
}

export function applyError(state: UiState, message: string): UiState {
  return { ...state, error: message };
}

export function withPending(state: UiState, pending: boolean): UiState {
  return { ...state, pending };
}
