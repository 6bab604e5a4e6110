import type { FormInfo, GenerateRequest, GenerateResponse } from "./api";

export type HistoryEntry = {
  request: GenerateRequest;
  response: GenerateResponse;
};

export type ComposerState = {
  prompt: string;
  formName: string;
  strict: boolean;
  pending: boolean;
  lastResponse: GenerateResponse | null;
  lastRequest: GenerateRequest | null;
  history: readonly HistoryEntry[];
  error: string | null;
};

export function initialState(forms: FormInfo[]): ComposerState {
  return {
    prompt: "",
    formName: forms[0]?.name ?? "",
    strict: true,
    pending: false,
    lastResponse: null,
    lastRequest: null,
    history: [],
    error: null,
  };
}

export type Action =
  | { type: "set_prompt"; prompt: string }
  | { type: "set_form"; formName: string }
  | { type: "set_strict"; strict: boolean }
  | { type: "submit"; request: GenerateRequest }
  | { type: "succeeded"; request: GenerateRequest; response: GenerateResponse }
  | { type: "failed"; message: string };

export function reduce(state: ComposerState, action: Action): ComposerState {
  switch (action.type) {
    case "set_prompt":
      return { ...state, prompt: action.prompt };
    case "set_form":
      return { ...state, formName: action.formName };
    case "set_strict":
      return { ...state, strict: action.strict };
    case "submit":
      return { ...state, pending: true, error: null, lastRequest: action.request };
    case "succeeded":
      return {
        ...state,
        pending: false,
        lastResponse: action.response,
        // history is append-only for the lifetime of the session
        history: [...state.history, { request: action.request, response: action.response }],
      };
    case "failed":
      return { ...state, pending: false, error: action.message };
  }
}
