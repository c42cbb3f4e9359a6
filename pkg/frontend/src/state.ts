// Controller between the form controls and the service.
//
// Slider drags fire many input events; the contract here is that each
// burst of changes produces exactly one /v1/whatif call. Changes reset
// a 300 ms debounce timer, and when the timer does fire any request
// still in flight is aborted before the new one starts, so at most one
// response can ever reach the listeners.

import { ApiError, FetchLike, postWhatif, WhatifRequest, WhatifResponse } from "./api.js";

export const DEBOUNCE_MS = 300;

export interface Listeners {
  onPending?: () => void;
  onResult: (resp: WhatifResponse, req: WhatifRequest) => void;
  onError: (message: string) => void;
}

type Scheduler = {
  set: (fn: () => void, ms: number) => unknown;
  clear: (handle: unknown) => void;
};

const realScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (h) => clearTimeout(h as ReturnType<typeof setTimeout>),
};

export class WhatifController {
  private timer: unknown = null;
  private inflight: AbortController | null = null;
  private request: WhatifRequest = { budget: 0 };

  constructor(
    private readonly base: string,
    private readonly listeners: Listeners,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
    private readonly scheduler: Scheduler = realScheduler,
  ) {}

  current(): WhatifRequest {
    return { ...this.request };
  }

  // merge a control change and (re)start the debounce window
  update(change: Partial<WhatifRequest>): void {
    this.request = { ...this.request, ...change };
    for (const key of ["floors", "target_gap"] as const) {
      if (this.request[key] === undefined) delete this.request[key];
    }
    this.listeners.onPending?.();
    if (this.timer !== null) this.scheduler.clear(this.timer);
    this.timer = this.scheduler.set(() => {
      this.timer = null;
      void this.fire();
    }, DEBOUNCE_MS);
  }

  private async fire(): Promise<void> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const req = this.current();
    try {
      const resp = await postWhatif(this.base, req, this.fetchImpl, controller.signal);
      if (controller.signal.aborted) return;
      this.listeners.onResult(resp, req);
    } catch (err) {
      if (controller.signal.aborted) return; // superseded, not an error
      if (err instanceof ApiError) {
        this.listeners.onError(err.group ? `${err.message} (group: ${err.group})` : err.message);
      } else {
        this.listeners.onError(String(err));
      }
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }
}
