/**
 * Session client: request/response correlation plus an event stream,
 * over any line-oriented transport.
 *
 * The client also keeps a request log.  The workbench never computes
 * physics of its own, so every displayed number must be traceable to
 * one of these entries; tests use the log to prove that layout toggles
 * and scrubbing cost zero extra requests.
 */

import {
  ErrResponse,
  Request,
  Response,
  SessionEvent,
  ServiceError,
  Verb,
  isEvent,
  isResponse,
} from "./protocol.js";

export interface Transport {
  /** Send one JSON-encoded message (no trailing newline). */
  send(line: string): void;
  /** Register the single receiver for incoming messages. */
  onMessage(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
  close(): void | Promise<void>;
}

export class ServiceCallError extends Error {
  readonly type: string;
  readonly detail: ServiceError;

  constructor(error: ServiceError) {
    super(`${error.type}: ${error.message}`);
    this.name = "ServiceCallError";
    this.type = error.type;
    this.detail = error;
  }
}

export interface RequestLogEntry {
  id: number;
  verb: Verb;
  sentAt: number;
}

/**
 * The one-method surface most workbench parts need.  SessionClient
 * implements it; tests substitute fakes.
 */
export interface ServicePort {
  request(verb: Verb, payload?: Record<string, unknown>): Promise<unknown>;
}

interface Pending {
  resolve: (payload: unknown) => void;
  reject: (err: Error) => void;
}

export class SessionClient implements ServicePort {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private eventHandlers = new Set<(ev: SessionEvent) => void>();
  private closed = false;

  /** Every request ever sent, in order. */
  readonly requestLog: RequestLogEntry[] = [];

  constructor(private transport: Transport) {
    transport.onMessage((line) => this.receive(line));
    transport.onClose(() => this.handleClose());
  }

  request(verb: Verb, payload?: Record<string, unknown>): Promise<unknown> {
    if (this.closed) {
      return Promise.reject(new Error("session client is closed"));
    }
    const id = this.nextId++;
    const req: Request = payload === undefined ? { id, verb } : { id, verb, payload };
    this.requestLog.push({ id, verb, sentAt: Date.now() });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.transport.send(JSON.stringify(req));
    });
  }

  /** Subscribe to session events; returns the unsubscribe function. */
  onEvent(cb: (ev: SessionEvent) => void): () => void {
    this.eventHandlers.add(cb);
    return () => this.eventHandlers.delete(cb);
  }

  requestCount(): number {
    return this.requestLog.length;
  }

  async close(): Promise<void> {
    this.closed = true;
    await this.transport.close();
    this.handleClose();
  }

  private receive(line: string): void {
    if (!line.trim()) return;
    let msg: unknown;
    try {
      msg = JSON.parse(line);
    } catch {
      return; // not ours to crash on; the service writes valid JSON
    }
    if (isEvent(msg)) {
      for (const cb of [...this.eventHandlers]) {
        try {
          cb(msg);
        } catch {
          // one broken listener must not starve the rest
        }
      }
      return;
    }
    if (isResponse(msg)) {
      this.settle(msg);
    }
  }

  private settle(res: Response): void {
    if (res.id === null || typeof res.id !== "number") return;
    const entry = this.pending.get(res.id);
    if (!entry) return;
    this.pending.delete(res.id);
    if (res.ok) {
      entry.resolve(res.payload);
    } else {
      entry.reject(new ServiceCallError((res as ErrResponse).error));
    }
  }

  private handleClose(): void {
    this.closed = true;
    const dropped = [...this.pending.values()];
    this.pending.clear();
    for (const p of dropped) {
      p.reject(new Error("transport closed before a response arrived"));
    }
  }
}
