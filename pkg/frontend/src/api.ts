/**
 * Thin fetch wrapper for the /api/v1 endpoints. Every method maps to
 * exactly one route; errors arrive as {code, message, details?} and are
 * rethrown as ApiError so views can show non-blocking banners.
 */

import type {
  EntryEdits,
  ErrorEnvelope,
  GapDoc,
  InventoryDoc,
  InventoryEntryDoc,
  LevelReport,
  ModelDoc,
  ScanCreated,
  SessionDoc,
  SessionSummary,
  StatusUpdate,
  StatusUpdateResult,
  StatusValue,
  WhatIfDoc,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: unknown;

  constructor(status: number, envelope: ErrorEnvelope) {
    super(envelope.message);
    this.name = 'ApiError';
    this.status = status;
    this.code = envelope.code;
    this.details = envelope.details;
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = '', fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, '');
    this.fetchImpl = fetchImpl ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { 'Content-Type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.base}/api/v1${path}`, init);
    if (!response.ok) {
      let envelope: ErrorEnvelope;
      try {
        envelope = (await response.json()) as ErrorEnvelope;
      } catch {
        envelope = { code: `HTTP_${response.status}`, message: response.statusText };
      }
      throw new ApiError(response.status, envelope);
    }
    return (await response.json()) as T;
  }

  getModel(): Promise<ModelDoc> {
    return this.request('GET', '/model');
  }

  createSession(subject: string): Promise<SessionSummary> {
    return this.request('POST', '/sessions', { subject });
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.request('GET', '/sessions');
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request('GET', `/sessions/${sessionId}`);
  }

  putStatus(
    sessionId: string,
    requirementId: string,
    update: StatusUpdate,
  ): Promise<StatusUpdateResult> {
    return this.request('PUT', `/sessions/${sessionId}/requirements/${requirementId}`, update);
  }

  getLevel(sessionId: string): Promise<LevelReport> {
    return this.request('GET', `/sessions/${sessionId}/level`);
  }

  getGap(sessionId: string, target: number): Promise<GapDoc> {
    return this.request('GET', `/sessions/${sessionId}/gap?target=${target}`);
  }

  whatIf(sessionId: string, overrides: Record<string, StatusValue>): Promise<WhatIfDoc> {
    return this.request('POST', `/sessions/${sessionId}/what-if`, { overrides });
  }

  startScan(root: string, ruleset?: string): Promise<ScanCreated> {
    const body: Record<string, string> = { root };
    if (ruleset !== undefined) body.ruleset = ruleset;
    return this.request('POST', '/scans', body);
  }

  getInventory(scanId: string): Promise<InventoryDoc> {
    return this.request('GET', `/scans/${scanId}/inventory`);
  }

  annotateEntry(
    scanId: string,
    canonical: string,
    edits: EntryEdits,
  ): Promise<InventoryEntryDoc> {
    return this.request('PUT', `/scans/${scanId}/inventory/${encodeURIComponent(canonical)}`, edits);
  }

  reportUrl(sessionId: string, format: 'json' | 'md' | 'html'): string {
    return `${this.base}/api/v1/sessions/${sessionId}/report?format=${format}`;
  }
}
