// Typed client for the session service. The UI holds no game logic:
// every state change round-trips through these calls.

export interface GamesListing {
  games: Record<string, string[]>;
  warmup_required: number;
  recorded_target: number;
}

export interface SessionInfo {
  session_id: string;
  participant_id: string;
  mode: "warmup" | "recorded";
  game: string;
  difficulty: string;
  seed: number;
  step: number;
  seq: number;
  done: boolean;
  outcome: string | null;
}

export interface VideoRef {
  fps: number;
  frame_urls: string[];
}

export interface Observation {
  done: boolean;
  seq: number;
  step: number;
  outcome?: string;
  prompt?: string;
  system_prompt?: string;
  transcript?: string | null;
  frame_url?: string | null;
  audio_url?: string | null;
  video?: VideoRef | null;
  legal_actions?: LegalActions;
}

export interface LegalActions {
  kind: string;
  form: string;
  [key: string]: unknown;
}

export interface ActionResult {
  accepted: boolean;
  valid: boolean;
  note: string;
  done: boolean;
  outcome: string | null;
  seq: number;
}

export interface GameProgress {
  warmup_count: number;
  recorded_count: number;
  warmup_required: number;
  recorded_target: number;
  recorded_unlocked: boolean;
}

export interface Progress {
  participant_id: string;
  games: Record<string, GameProgress>;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, init);
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(response.status, (body as { error?: string }).error ?? response.statusText);
  }
  return body as T;
}

function post<T>(base: string, path: string, payload: unknown): Promise<T> {
  return request<T>(base, path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class SessionApi {
  constructor(private base: string = "") {}

  games(): Promise<GamesListing> {
    return request<GamesListing>(this.base, "/api/games");
  }

  progress(participantId: string): Promise<Progress> {
    return request<Progress>(this.base, `/api/participants/${encodeURIComponent(participantId)}/progress`);
  }

  createSession(body: {
    game: string;
    difficulty: string;
    participant_id: string;
    mode: "warmup" | "recorded";
    seed?: number;
    step_cap?: number;
  }): Promise<SessionInfo> {
    return post<SessionInfo>(this.base, "/api/sessions", body);
  }

  observation(sessionId: string): Promise<Observation> {
    return request<Observation>(this.base, `/api/sessions/${sessionId}/observation`);
  }

  submitAction(sessionId: string, seq: number, rawText: string): Promise<ActionResult> {
    return post<ActionResult>(this.base, `/api/sessions/${sessionId}/action`, {
      seq,
      raw_text: rawText,
    });
  }

  status(sessionId: string): Promise<SessionInfo> {
    return request<SessionInfo>(this.base, `/api/sessions/${sessionId}/status`);
  }

  close(sessionId: string): Promise<{ closed: boolean; logged: boolean }> {
    return post(this.base, `/api/sessions/${sessionId}/close`, {});
  }

  absolute(url: string): string {
    return this.base + url;
  }
}
