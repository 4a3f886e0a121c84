/**
 * Transport over a WebSocket connection to `pnet serve`.
 *
 * Typed structurally against the browser WebSocket surface so the core
 * stays buildable without assuming a DOM: the browser passes
 * `new WebSocket(url)`, a test can pass anything with the same shape.
 */

import { Transport } from "../client.js";

export interface WebSocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  addEventListener(
    type: "open" | "message" | "close" | "error",
    cb: (ev: { data?: unknown }) => void,
  ): void;
}

const OPEN = 1;

export class WebSocketTransport implements Transport {
  private queue: string[] = [];
  private messageCb: ((line: string) => void) | null = null;
  private closeCbs: (() => void)[] = [];

  constructor(private socket: WebSocketLike) {
    socket.addEventListener("open", () => {
      for (const line of this.queue.splice(0)) socket.send(line);
    });
    socket.addEventListener("message", (ev) => {
      if (typeof ev.data === "string") this.messageCb?.(ev.data);
    });
    socket.addEventListener("close", () => {
      for (const cb of this.closeCbs) cb();
    });
  }

  send(line: string): void {
    if (this.socket.readyState === OPEN) {
      this.socket.send(line);
    } else {
      this.queue.push(line); // flushed on open
    }
  }

  onMessage(cb: (line: string) => void): void {
    this.messageCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCbs.push(cb);
  }

  close(): void {
    this.socket.close();
  }
}
