// Typed client for the session API. The service is the single source of
// truth for dialog state; this layer only moves JSON.

export interface OptionLink {
  label: string;
  kind: "link";
}

export interface InteractionResponse {
  session: string;
  options: OptionLink[];
  input_so_far: string[];
  completed?: string;
  rejected?: boolean;
}

export interface ReflectionResponse {
  valid_tokens: string[];
}

export class ApiError extends Error {
  constructor(readonly code: string, message: string, readonly status: number) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class OutturnClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async ingestSite(document: string): Promise<string> {
    const body = await this.request("/sites", { method: "POST", body: document });
    return (body as { site_id: string }).site_id;
  }

  createSession(siteId: string): Promise<InteractionResponse> {
    return this.requestJson("/sessions", { site_id: siteId });
  }

  getState(session: string): Promise<InteractionResponse> {
    return this.request(`/sessions/${session}`) as Promise<InteractionResponse>;
  }

  submitInput(session: string, utterance: string[]): Promise<InteractionResponse> {
    return this.requestJson(`/sessions/${session}/input`, { utterance });
  }

  async reflect(session: string): Promise<string[]> {
    const body = await this.request(`/sessions/${session}/reflect`);
    return (body as ReflectionResponse).valid_tokens;
  }

  stepBack(session: string, n: number): Promise<InteractionResponse> {
    return this.requestJson(`/sessions/${session}/back`, { n });
  }

  private requestJson(path: string, payload: unknown): Promise<InteractionResponse> {
    return this.request(path, {
      method: "POST",
      body: JSON.stringify(payload),
      headers: { "Content-Type": "application/json" },
    }) as Promise<InteractionResponse>;
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const { error = "error", message = response.statusText } =
        body as { error?: string; message?: string };
      throw new ApiError(error, message, response.status);
    }
    return body;
  }
}
