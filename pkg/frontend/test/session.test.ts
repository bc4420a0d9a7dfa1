import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, SessionApi } from "../src/api.js";
import { EpisodeFlow } from "../src/session.js";

type Route = [method: string, path: RegExp, handler: (body?: unknown) => [number, unknown]];

function mockServer(routes: Route[]): void {
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      const method = init?.method ?? "GET";
      const path = String(url);
      for (const [m, re, handler] of routes) {
        if (m === method && re.test(path)) {
          const body = init?.body ? JSON.parse(String(init.body)) : undefined;
          const [status, payload] = handler(body);
          return new Response(JSON.stringify(payload), { status });
        }
      }
      return new Response(JSON.stringify({ error: `no route ${method} ${path}` }), { status: 404 });
    }),
  );
}

afterEach(() => {
  vi.unstubAllGlobals();
});

const sessionInfo = {
  session_id: "abc",
  participant_id: "p1",
  mode: "warmup",
  game: "melody",
  difficulty: "medium",
  seed: 1,
  step: 0,
  seq: 0,
  done: false,
  outcome: null,
};

function observation(seq: number, done = false) {
  return {
    done,
    seq,
    step: seq,
    outcome: done ? "goal_reached" : undefined,
    prompt: "pick a block",
    transcript: null,
    frame_url: "/api/sessions/abc/assets/frame.png",
    audio_url: null,
    video: null,
    legal_actions: { kind: "click_color", form: "CLICK: <color>", colors: ["red"] },
  };
}

describe("EpisodeFlow", () => {
  it("runs a full episode to completion", async () => {
    let seq = 0;
    mockServer([
      ["POST", /\/api\/sessions$/, () => [201, sessionInfo]],
      ["GET", /\/observation$/, () => [200, observation(seq)]],
      [
        "POST",
        /\/action$/,
        (body) => {
          const request = body as { seq: number; raw_text: string };
          expect(request.seq).toBe(seq);
          seq += 1;
          const done = seq >= 3;
          return [
            200,
            { accepted: true, valid: true, note: "ok", done, outcome: done ? "goal_reached" : null, seq },
          ];
        },
      ],
    ]);
    const states: string[] = [];
    const flow = new EpisodeFlow(new SessionApi(""), { onStateChange: (s) => states.push(s) });
    await flow.start({ game: "melody", difficulty: "medium", participant_id: "p1", mode: "warmup" });
    expect(flow.state).toBe("awaiting_input");
    await flow.submit("CLICK: red");
    await flow.submit("CLICK: red");
    const final = await flow.submit("CLICK: red");
    expect(final.done).toBe(true);
    expect(flow.state).toBe("finished");
    expect(flow.outcome).toBe("goal_reached");
    expect(states[0]).toBe("loading");
  });

  it("rejects concurrent submissions locally", async () => {
    let resolveAction: (() => void) = () => undefined;
    mockServer([
      ["POST", /\/api\/sessions$/, () => [201, sessionInfo]],
      ["GET", /\/observation$/, () => [200, observation(0)]],
      [
        "POST",
        /\/action$/,
        () => [200, { accepted: true, valid: true, note: "", done: true, outcome: "goal_reached", seq: 1 }],
      ],
    ]);
    // Slow the action call down so the second submit overlaps.
    const realFetch = globalThis.fetch;
    vi.stubGlobal("fetch", async (url: string, init?: RequestInit) => {
      if (/\/action$/.test(String(url))) {
        await new Promise<void>((resolve) => {
          resolveAction = resolve;
          setTimeout(resolve, 20);
        });
      }
      return realFetch(url as never, init as never);
    });
    const flow = new EpisodeFlow(new SessionApi(""));
    await flow.start({ game: "melody", difficulty: "medium", participant_id: "p1", mode: "warmup" });
    const first = flow.submit("CLICK: red");
    await expect(flow.submit("CLICK: red")).rejects.toThrow(/in flight|state/);
    resolveAction();
    await first;
  });

  it("resynchronizes after a stale-sequence rejection", async () => {
    let current = 5;
    mockServer([
      ["POST", /\/api\/sessions$/, () => [201, { ...sessionInfo, seq: 5 }]],
      ["GET", /\/observation$/, () => [200, observation(current)]],
      [
        "POST",
        /\/action$/,
        (body) => {
          const request = body as { seq: number };
          if (request.seq !== current) {
            return [409, { error: `stale sequence number ${request.seq}` }];
          }
          current += 1;
          return [200, { accepted: true, valid: true, note: "", done: false, outcome: null, seq: current }];
        },
      ],
    ]);
    const flow = new EpisodeFlow(new SessionApi(""));
    await flow.start({ game: "melody", difficulty: "medium", participant_id: "p1", mode: "warmup" });
    expect(flow.observation?.seq).toBe(5);
    // Fake an out-of-sync client by rolling the local observation back.
    flow.observation = { ...flow.observation!, seq: 4 };
    await expect(flow.submit("CLICK: red")).rejects.toThrow(/stale/);
    // The flow refetched and is usable again at the server's number.
    expect(flow.state).toBe("awaiting_input");
    expect(flow.observation?.seq).toBe(5);
    const ok = await flow.submit("CLICK: red");
    expect(ok.accepted).toBe(true);
  });

  it("surfaces the warm-up gate as an error state", async () => {
    mockServer([
      ["POST", /\/api\/sessions$/, () => [403, { error: "recorded mode locked: 0/10 warm-up" }]],
    ]);
    const errors: string[] = [];
    const flow = new EpisodeFlow(new SessionApi(""), { onError: (m) => errors.push(m) });
    await expect(
      flow.start({ game: "melody", difficulty: "medium", participant_id: "p1", mode: "recorded" }),
    ).rejects.toBeInstanceOf(ApiError);
    expect(flow.state).toBe("error");
    expect(errors[0]).toMatch(/locked/);
  });

  it("finishes immediately when the observation is already terminal", async () => {
    mockServer([
      ["POST", /\/api\/sessions$/, () => [201, sessionInfo]],
      ["GET", /\/observation$/, () => [200, observation(3, true)]],
    ]);
    const flow = new EpisodeFlow(new SessionApi(""));
    await flow.start({ game: "melody", difficulty: "medium", participant_id: "p1", mode: "warmup" });
    expect(flow.state).toBe("finished");
    expect(flow.outcome).toBe("goal_reached");
  });
});
