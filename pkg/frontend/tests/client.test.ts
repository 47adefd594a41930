import { afterEach, describe, expect, it, vi } from "vitest";

import {
  Client,
  LatestWins,
  ServiceError,
  ServiceUnreachable,
  debounce,
} from "../src/client.js";

function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("Client", () => {
  it("returns the payload on success", async () => {
    const fetchImpl = vi.fn(async () => jsonResponse(200, { count: 3, entries: [] }));
    const client = new Client("http://svc.test", fetchImpl);
    const result = await client.search({ priorities: [{ key: "accuracy", slider: 1 }] });
    expect(result.count).toBe(3);
    expect(fetchImpl).toHaveBeenCalledWith(
      "http://svc.test/search",
      expect.objectContaining({ method: "POST" }),
    );
  });

  it("raises ServiceError carrying the error envelope", async () => {
    const fetchImpl = vi.fn(async () =>
      jsonResponse(400, {
        error: {
          type: "ParseError",
          message: "expected a number",
          line: 1,
          column: 12,
          expected: ["number"],
        },
      }),
    );
    const client = new Client("http://svc.test", fetchImpl);
    const failure = await client.search({ priorities: [] }).catch((e) => e);
    expect(failure).toBeInstanceOf(ServiceError);
    expect(failure.type).toBe("ParseError");
    expect(failure.status).toBe(400);
    expect(failure.line).toBe(1);
    expect(failure.column).toBe(12);
    expect(failure.expected).toContain("number");
  });

  it("wraps network failures as ServiceUnreachable", async () => {
    const fetchImpl = vi.fn(async () => {
      throw new TypeError("fetch failed");
    });
    const client = new Client("http://svc.test", fetchImpl);
    await expect(client.properties()).rejects.toBeInstanceOf(ServiceUnreachable);
  });

  it("unwraps the properties listing", async () => {
    const listing = [
      { key: "accuracy", unit: "percent", polarity: "higher", observed_min: 0, observed_max: 1 },
    ];
    const fetchImpl = vi.fn(async () => jsonResponse(200, { properties: listing }));
    const client = new Client("http://svc.test", fetchImpl);
    expect(await client.properties()).toEqual(listing);
  });
});

describe("debounce", () => {
  afterEach(() => {
    vi.useRealTimers();
  });

  it("coalesces a burst into one trailing call with the last arguments", () => {
    vi.useFakeTimers();
    const fn = vi.fn();
    const run = debounce(fn, 200);
    run(1);
    run(2);
    vi.advanceTimersByTime(150);
    run(3);
    vi.advanceTimersByTime(199);
    expect(fn).not.toHaveBeenCalled();
    vi.advanceTimersByTime(1);
    expect(fn).toHaveBeenCalledTimes(1);
    expect(fn).toHaveBeenCalledWith(3);
  });

  it("flush runs the pending call immediately", () => {
    vi.useFakeTimers();
    const fn = vi.fn(() => "ran");
    const run = debounce(fn, 200);
    run("now");
    expect(run.flush()).toBe("ran");
    expect(fn).toHaveBeenCalledWith("now");
    vi.advanceTimersByTime(500);
    expect(fn).toHaveBeenCalledTimes(1);
    expect(run.flush()).toBeUndefined(); // nothing pending
  });

  it("cancel drops the pending call", () => {
    vi.useFakeTimers();
    const fn = vi.fn();
    const run = debounce(fn, 200);
    run(1);
    run.cancel();
    vi.advanceTimersByTime(500);
    expect(fn).not.toHaveBeenCalled();
  });
});

describe("LatestWins", () => {
  it("a superseded request resolves to undefined, the newest wins", async () => {
    const latest = new LatestWins();
    let releaseFirst!: (v: string) => void;
    const first = latest.run(
      () => new Promise<string>((resolve) => (releaseFirst = resolve)),
    );
    const second = latest.run(async () => "second");
    expect(await second).toBe("second");
    releaseFirst("first");
    expect(await first).toBeUndefined();
  });

  it("aborts the signal of the overtaken request", async () => {
    const latest = new LatestWins();
    let seen!: AbortSignal;
    void latest.run((signal) => {
      seen = signal;
      return new Promise<never>(() => {});
    });
    expect(seen.aborted).toBe(false);
    await latest.run(async () => "next");
    expect(seen.aborted).toBe(true);
  });

  it("stale failures are swallowed, fresh ones propagate", async () => {
    const latest = new LatestWins();
    let failFirst!: (e: Error) => void;
    const first = latest.run(
      () => new Promise<string>((_, reject) => (failFirst = reject)),
    );
    await latest.run(async () => "ok");
    failFirst(new Error("stale"));
    expect(await first).toBeUndefined();

    await expect(
      latest.run(async () => {
        throw new Error("fresh");
      }),
    ).rejects.toThrow("fresh");
  });
});
