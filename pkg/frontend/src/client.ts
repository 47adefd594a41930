/** HTTP client for the service, plus the two timing tools the live panel
 * needs: trailing debounce and latest-wins request arbitration.
 */

import type {
  ErrorBody,
  PropertyInfo,
  SearchRequestDoc,
  SearchResponseDoc,
  SimulateOutcomeDoc,
  SimulateRequestDoc,
} from "./wire.js";

/** The service answered with an error envelope. */
export class ServiceError extends Error {
  readonly type: string;
  readonly status: number;
  readonly line?: number;
  readonly column?: number;
  readonly expected?: string[];

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.name = "ServiceError";
    this.type = body.type;
    this.status = status;
    this.line = body.line;
    this.column = body.column;
    this.expected = body.expected;
  }
}

/** The service could not be reached at all. */
export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    super("service unreachable");
    this.name = "ServiceUnreachable";
    this.cause = cause;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async exchange(
    path: string,
    init: RequestInit,
    signal?: AbortSignal,
  ): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, { ...init, signal });
    } catch (cause) {
      if (cause instanceof DOMException && cause.name === "AbortError") throw cause;
      throw new ServiceUnreachable(cause);
    }
    const payload = (await response.json()) as { error?: ErrorBody };
    if (!response.ok) {
      const body = payload.error ?? { type: "Unknown", message: "unknown error" };
      throw new ServiceError(response.status, body);
    }
    return payload;
  }

  private post(path: string, doc: unknown, signal?: AbortSignal): Promise<unknown> {
    return this.exchange(
      path,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(doc),
      },
      signal,
    );
  }

  search(doc: SearchRequestDoc, signal?: AbortSignal): Promise<SearchResponseDoc> {
    return this.post("/search", doc, signal) as Promise<SearchResponseDoc>;
  }

  simulate(doc: SimulateRequestDoc, signal?: AbortSignal): Promise<SimulateOutcomeDoc> {
    return this.post("/simulate", doc, signal) as Promise<SimulateOutcomeDoc>;
  }

  loadCorpus(doc: unknown): Promise<{ snapshot_id: string; count: number }> {
    return this.post("/corpus/load", doc) as Promise<{
      snapshot_id: string;
      count: number;
    }>;
  }

  async properties(): Promise<PropertyInfo[]> {
    const payload = (await this.exchange("/properties", { method: "GET" })) as {
      properties: PropertyInfo[];
    };
    return payload.properties;
  }
}

export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  /** Run the pending call now, if any; returns its result. */
  flush(): unknown;
  cancel(): void;
}

/** Trailing debounce: the call runs once the arguments stop changing. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => unknown,
  waitMs: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: A | null = null;

  const debounced = (...args: A): void => {
    pending = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      const args = pending as A;
      pending = null;
      fn(...args);
    }, waitMs);
  };
  debounced.cancel = (): void => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    pending = null;
  };
  debounced.flush = (): unknown => {
    if (timer === null) return undefined;
    clearTimeout(timer);
    timer = null;
    const args = pending as A;
    pending = null;
    return fn(...args);
  };
  return debounced;
}

/** At most one request wins: starting a new one aborts and disowns the
 * previous, and a response that was overtaken resolves to undefined instead
 * of clobbering newer results.
 */
export class LatestWins {
  private generation = 0;
  private controller: AbortController | null = null;

  async run<T>(work: (signal: AbortSignal) => Promise<T>): Promise<T | undefined> {
    this.controller?.abort();
    this.controller = new AbortController();
    const ticket = ++this.generation;
    let result: T;
    try {
      result = await work(this.controller.signal);
    } catch (error) {
      if (ticket !== this.generation) return undefined; // superseded; stale error
      throw error;
    }
    return ticket === this.generation ? result : undefined;
  }
}
