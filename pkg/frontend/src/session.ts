// Per-episode client state machine.
//
// One active episode per browser session, one in-flight action at a time.
// The observation fetch is idempotent (the server caches the pending
// step), so a dropped connection mid-episode resumes by refetching.

import { ActionResult, Observation, SessionApi, SessionInfo } from "./api.js";

export type FlowState =
  | "idle"
  | "loading"
  | "awaiting_input"
  | "submitting"
  | "finished"
  | "error";

export interface FlowEvents {
  onObservation?: (obs: Observation) => void;
  onResult?: (result: ActionResult) => void;
  onStateChange?: (state: FlowState) => void;
  onError?: (message: string) => void;
}

export class EpisodeFlow {
  state: FlowState = "idle";
  session: SessionInfo | null = null;
  observation: Observation | null = null;
  outcome: string | null = null;
  private inFlight = false;

  constructor(private api: SessionApi, private events: FlowEvents = {}) {}

  private setState(state: FlowState): void {
    this.state = state;
    this.events.onStateChange?.(state);
  }

  async start(body: {
    game: string;
    difficulty: string;
    participant_id: string;
    mode: "warmup" | "recorded";
    seed?: number;
    step_cap?: number;
  }): Promise<SessionInfo> {
    this.setState("loading");
    try {
      this.session = await this.api.createSession(body);
    } catch (err) {
      this.setState("error");
      this.events.onError?.(err instanceof Error ? err.message : String(err));
      throw err;
    }
    await this.refresh();
    return this.session;
  }

  /** Fetch (or refetch) the pending observation. Safe to call again after
   * a network drop: the server replays the same step. */
  async refresh(): Promise<Observation> {
    if (!this.session) throw new Error("no active session");
    this.setState("loading");
    const obs = await this.api.observation(this.session.session_id);
    this.observation = obs;
    if (obs.done) {
      this.outcome = obs.outcome ?? null;
      this.setState("finished");
    } else {
      this.setState("awaiting_input");
      this.events.onObservation?.(obs);
    }
    return obs;
  }

  /** Submit one action line. Rejects locally while a submission is
   * in flight; the server's sequence number is authoritative. */
  async submit(rawText: string): Promise<ActionResult> {
    if (!this.session || !this.observation) throw new Error("no pending observation");
    if (this.inFlight) throw new Error("action already in flight");
    if (this.state !== "awaiting_input") throw new Error(`cannot submit in state ${this.state}`);
    this.inFlight = true;
    this.setState("submitting");
    try {
      const result = await this.api.submitAction(
        this.session.session_id,
        this.observation.seq,
        rawText,
      );
      this.events.onResult?.(result);
      if (result.done) {
        this.outcome = result.outcome;
        this.setState("finished");
      } else {
        await this.refresh();
      }
      return result;
    } catch (err) {
      // A stale-sequence rejection means the client is out of sync;
      // refetching the observation resynchronizes without losing state.
      await this.refresh().catch(() => undefined);
      throw err;
    } finally {
      this.inFlight = false;
    }
  }

  async close(): Promise<void> {
    if (this.session) {
      await this.api.close(this.session.session_id).catch(() => undefined);
    }
    this.session = null;
    this.observation = null;
    this.setState("idle");
  }
}
