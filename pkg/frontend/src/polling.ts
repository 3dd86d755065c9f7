import { JobRecord, api } from "./api.js";

/** Job states that end polling. */
export const TERMINAL_STATES = new Set(["done", "error"]);

export const POLL_INTERVAL_MS = 2000;

/**
 * Polls jobs at a fixed interval and stops each one permanently once it
 * reports a terminal state. At most one in-flight request per job.
 */
export class JobPoller {
  private timers = new Map<string, ReturnType<typeof setInterval>>();
  private inFlight = new Set<string>();

  constructor(private onUpdate: (job: JobRecord) => void) {}

  get pending(): Set<string> {
    return new Set(this.timers.keys());
  }

  watch(jobId: string): void {
    if (this.timers.has(jobId)) return;
    const tick = async () => {
      if (this.inFlight.has(jobId)) return;
      this.inFlight.add(jobId);
      try {
        const job = await api.getJob(jobId);
        if (TERMINAL_STATES.has(job.state)) {
          this.stop(jobId);
        }
        this.onUpdate(job);
      } catch {
        // transient failure: keep polling at the fixed cadence
      } finally {
        this.inFlight.delete(jobId);
      }
    };
    this.timers.set(jobId, setInterval(tick, POLL_INTERVAL_MS));
    void tick();
  }

  stop(jobId: string): void {
    const timer = this.timers.get(jobId);
    if (timer !== undefined) {
      clearInterval(timer);
      this.timers.delete(jobId);
    }
  }

  stopAll(): void {
    for (const jobId of [...this.timers.keys()]) this.stop(jobId);
  }
}
