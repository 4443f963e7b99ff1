// Test doubles: a fetch recorder that serves canned responses and logs every
// request the client issues.

import type { FetchLike } from "../src/api.js";

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export class FakeFetch {
  calls: RecordedCall[] = [];
  private routes: { match: (url: string, method: string) => boolean; respond: () => Response }[] = [];

  on(method: string, path: string, status: number, body: unknown): void {
    this.routes.push({
      match: (url, m) =>
        m === method && (url === path || url.startsWith(path + "?")),
      respond: () =>
        new Response(body === undefined ? null : JSON.stringify(body), {
          status,
          headers: { "content-type": "application/json" },
        }),
    });
  }

  fn(): FetchLike {
    return async (url: string, init?: RequestInit) => {
      const method = init?.method ?? "GET";
      this.calls.push({
        url,
        method,
        body: init?.body ? JSON.parse(String(init.body)) : undefined,
      });
      for (const r of this.routes) {
        if (r.match(url, method)) return r.respond();
      }
      throw new Error(`no route for ${method} ${url}`);
    };
  }
}
