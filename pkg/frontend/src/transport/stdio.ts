/**
 * Transport over a child `pnet serve --stdio` process.  Node-only; the
 * browser build uses transport/ws.ts instead.
 */

import { spawn, ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface } from "node:readline";

import { Transport } from "../client.js";

export interface StdioOptions {
  /** Command to run; defaults to `python3 -m pnet.cli serve --stdio`. */
  command?: string;
  args?: string[];
  cwd?: string;
  env?: Record<string, string>;
}

export class StdioTransport implements Transport {
  private child: ChildProcessWithoutNullStreams;
  private messageCb: ((line: string) => void) | null = null;
  private closeCbs: (() => void)[] = [];
  /** Captured stderr, for diagnostics when the process dies. */
  readonly stderr: string[] = [];

  constructor(options: StdioOptions = {}) {
    const command = options.command ?? "python3";
    const args = options.args ?? ["-m", "pnet.cli", "serve", "--stdio"];
    this.child = spawn(command, args, {
      cwd: options.cwd,
      env: options.env ? { ...process.env, ...options.env } : process.env,
      stdio: ["pipe", "pipe", "pipe"],
    });
    const lines = createInterface({ input: this.child.stdout });
    lines.on("line", (line) => this.messageCb?.(line));
    const err = createInterface({ input: this.child.stderr });
    err.on("line", (line) => this.stderr.push(line));
    this.child.on("exit", () => {
      for (const cb of this.closeCbs) cb();
    });
  }

  send(line: string): void {
    this.child.stdin.write(line + "\n");
  }

  onMessage(cb: (line: string) => void): void {
    this.messageCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCbs.push(cb);
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      if (this.child.exitCode !== null) {
        resolve();
        return;
      }
      this.child.once("exit", () => resolve());
      this.child.stdin.end(); // EOF ends the serve loop cleanly
      const killer = setTimeout(() => this.child.kill(), 3000);
      this.child.once("exit", () => clearTimeout(killer));
    });
  }
}
