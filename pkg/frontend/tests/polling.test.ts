import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { JobRecord } from "../src/api.js";
import { JobPoller, POLL_INTERVAL_MS } from "../src/polling.js";

function job(state: string): JobRecord {
  return {
    job_id: "j1", lecture_id: "L", kind: "analyze", state,
    error_message: null, created: "now", finished: null,
  };
}

function jsonResponse(body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status: 200, headers: { "Content-Type": "application/json" },
  });
}

beforeEach(() => vi.useFakeTimers());
afterEach(() => {
  vi.useRealTimers();
  vi.unstubAllGlobals();
});

describe("job polling", () => {
  it("polls at the fixed interval and stops after the terminal state", async () => {
    const states = ["queued", "running", "done"];
    let calls = 0;
    vi.stubGlobal("fetch", vi.fn(async () => {
      const state = states[Math.min(calls, states.length - 1)];
      calls += 1;
      return jsonResponse(job(state));
    }));

    const seen: string[] = [];
    const poller = new JobPoller((j) => seen.push(j.state));
    poller.watch("j1");
    await vi.advanceTimersByTimeAsync(0);          // immediate first poll
    expect(calls).toBe(1);
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS);  // running
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS);  // done -> stops
    expect(calls).toBe(3);
    expect(seen).toEqual(["queued", "running", "done"]);
    expect(poller.pending.size).toBe(0);

    // no further polls after the terminal state
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS * 5);
    expect(calls).toBe(3);
  });

  it("stops immediately when the first poll is already terminal", async () => {
    let calls = 0;
    vi.stubGlobal("fetch", vi.fn(async () => {
      calls += 1;
      return jsonResponse(job("error"));
    }));
    const poller = new JobPoller(() => undefined);
    poller.watch("j1");
    await vi.advanceTimersByTimeAsync(0);
    expect(poller.pending.size).toBe(0);
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS * 3);
    expect(calls).toBe(1);
  });

  it("keeps polling through transient fetch failures", async () => {
    let calls = 0;
    vi.stubGlobal("fetch", vi.fn(async () => {
      calls += 1;
      if (calls === 1) throw new Error("connection reset");
      return jsonResponse(job("done"));
    }));
    const poller = new JobPoller(() => undefined);
    poller.watch("j1");
    await vi.advanceTimersByTimeAsync(0);
    expect(poller.pending.size).toBe(1);  // failure did not stop polling
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS);
    expect(poller.pending.size).toBe(0);
    expect(calls).toBe(2);
  });

  it("watches each job at most once", async () => {
    let calls = 0;
    vi.stubGlobal("fetch", vi.fn(async () => {
      calls += 1;
      return jsonResponse(job("running"));
    }));
    const poller = new JobPoller(() => undefined);
    poller.watch("j1");
    poller.watch("j1");
    await vi.advanceTimersByTimeAsync(0);
    expect(calls).toBe(1);
    poller.stopAll();
  });
});
