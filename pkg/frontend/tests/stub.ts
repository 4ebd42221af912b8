/**
 * Scripted API stand-in. Routes are regex-matched; every exchange is
 * logged so tests can assert that each value shown in the DOM came out
 * of a real response rather than client-side computation.
 */

import type { FetchLike } from '../src/api.js';

export interface LoggedExchange {
  method: string;
  url: string;
  body: unknown;
  status: number;
  response: unknown;
}

export interface StubReply {
  status?: number;
  json: unknown;
}

export type RouteHandler = (ctx: {
  url: string;
  body: unknown;
  match: RegExpMatchArray;
}) => StubReply;

interface Route {
  method: string;
  pattern: RegExp;
  handler: RouteHandler;
}

function fakeResponse(status: number, json: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: String(status),
    json: async () => json,
  } as unknown as Response;
}

export class StubApi {
  readonly log: LoggedExchange[] = [];
  private readonly routes: Route[] = [];

  on(method: string, pattern: RegExp, handler: RouteHandler): this {
    this.routes.push({ method, pattern, handler });
    return this;
  }

  /** Shorthand for a fixed 200 body. */
  json(method: string, pattern: RegExp, body: unknown): this {
    return this.on(method, pattern, () => ({ json: body }));
  }

  readonly fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? 'GET';
    const body =
      typeof init?.body === 'string' ? (JSON.parse(init.body) as unknown) : undefined;
    for (const route of this.routes) {
      if (route.method !== method) continue;
      const match = url.match(route.pattern);
      if (!match) continue;
      const reply = route.handler({ url, body, match });
      const status = reply.status ?? 200;
      this.log.push({ method, url, body, status, response: reply.json });
      return fakeResponse(status, reply.json);
    }
    throw new Error(`no stub route for ${method} ${url}`);
  };

  calls(method: string, pattern: RegExp): LoggedExchange[] {
    return this.log.filter(
      (entry) => entry.method === method && pattern.test(entry.url),
    );
  }

  /**
   * Every level number that appeared anywhere in a logged response,
   * under the server's strict_level / optimistic_level keys.
   */
  levelValuesInResponses(): Set<number> {
    const seen = new Set<number>();
    const walk = (node: unknown): void => {
      if (Array.isArray(node)) {
        for (const item of node) walk(item);
        return;
      }
      if (node === null || typeof node !== 'object') return;
      for (const [key, value] of Object.entries(node as Record<string, unknown>)) {
        if (
          (key === 'strict_level' || key === 'optimistic_level') &&
          typeof value === 'number'
        ) {
          seen.add(value);
        }
        walk(value);
      }
    };
    for (const entry of this.log) walk(entry.response);
    return seen;
  }
}

/** Let queued promise chains from event handlers settle. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
