/**
 * TCP NDJSON client for the session service.
 *
 * Owns a ViewState, feeds every inbound line through the reducer, and
 * invokes onChange after each transition. On drop it reconnects with
 * exponential backoff; each fresh connection starts with the server's
 * snapshot, which resynchronizes the aggregate fields.
 */

import * as net from "node:net";

import { initialState, reduce, reduceLine, ViewState } from "./state.js";
import { ControlAction, controlLine } from "./wire.js";

// A line longer than this is discarded up to the next newline.
export const MAX_LINE_BYTES = 2_000_000;

/** Incremental newline splitter with an oversized-line guard. */
export class LineSplitter {
  private buf = "";
  private discarding = false;

  /** Returns complete lines; an oversized line comes back as null once. */
  push(chunk: string): (string | null)[] {
    this.buf += chunk;
    const out: (string | null)[] = [];
    for (;;) {
      const nl = this.buf.indexOf("\n");
      if (nl < 0) {
        if (this.buf.length > MAX_LINE_BYTES) {
          if (!this.discarding) {
            out.push(null);
            this.discarding = true;
          }
          this.buf = "";
        }
        return out;
      }
      const line = this.buf.slice(0, nl);
      this.buf = this.buf.slice(nl + 1);
      if (this.discarding) {
        this.discarding = false; // tail of the oversized line, already reported
      } else {
        out.push(line);
      }
    }
  }
}

export interface ClientOptions {
  host: string;
  port: number;
  /** Reconnect on drop. On by default. */
  reconnect?: boolean;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  onChange?: (state: ViewState) => void;
}

export class ServiceClient {
  private state: ViewState = initialState();
  private sock: net.Socket | null = null;
  private splitter = new LineSplitter();
  private retryTimer: NodeJS.Timeout | null = null;
  private backoffMs: number;
  private closed = false;

  constructor(private readonly opts: ClientOptions) {
    this.backoffMs = opts.initialBackoffMs ?? 250;
  }

  getState(): ViewState {
    return this.state;
  }

  private setState(next: ViewState): void {
    if (next === this.state) return;
    this.state = next;
    this.opts.onChange?.(next);
  }

  connect(): void {
    if (this.closed || this.sock !== null) return;
    this.setState(reduce(this.state, { kind: "connection", status: "connecting" }));
    const sock = net.createConnection({ host: this.opts.host, port: this.opts.port });
    this.sock = sock;
    sock.setEncoding("utf-8");
    this.splitter = new LineSplitter();

    sock.on("connect", () => {
      this.backoffMs = this.opts.initialBackoffMs ?? 250;
      this.setState(reduce(this.state, { kind: "connection", status: "connected" }));
    });
    sock.on("data", (chunk: string) => {
      let s = this.state;
      for (const line of this.splitter.push(chunk)) {
        s = line === null ? reduce(s, { kind: "skip" }) : reduceLine(s, line);
      }
      this.setState(s);
    });
    sock.on("error", () => {
      // close fires next; reconnect is handled there
    });
    sock.on("close", () => {
      if (this.sock === sock) this.sock = null;
      this.setState(reduce(this.state, { kind: "connection", status: "disconnected" }));
      this.scheduleReconnect();
    });
  }

  private scheduleReconnect(): void {
    if (this.closed || this.opts.reconnect === false || this.retryTimer !== null) return;
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.opts.maxBackoffMs ?? 10_000);
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      this.connect();
    }, delay);
    this.retryTimer.unref?.();
  }

  /**
   * Send a control action. Refused (returns false) while disconnected,
   * while a previous action is unacknowledged, or after the service named
   * another client as operator.
   */
  send(action: ControlAction, protocol?: unknown): boolean {
    if (this.sock === null || this.state.connection !== "connected") return false;
    if (this.state.pendingAction !== null) return false;
    if (this.state.role === "observer_only") return false;
    this.sock.write(controlLine(action, protocol));
    this.setState(reduce(this.state, { kind: "control_sent", action }));
    return true;
  }

  /** Stop for good: no further reconnects. */
  close(): void {
    this.closed = true;
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    this.sock?.destroy();
    this.sock = null;
  }
}

/** Connect and return the live client. */
export function connect(opts: ClientOptions): ServiceClient {
  const client = new ServiceClient(opts);
  client.connect();
  return client;
}
