// Thin WebSocket wrapper: reconnects with a backoff, hands parsed
// messages to a callback, and owns the outbound sequence counter.

import type { ClientMessage, ServerMessage } from "./protocol.js";
import { encodeMessage, parseMessage } from "./protocol.js";

export interface BridgeEvents {
  onMessage: (msg: ServerMessage) => void;
  onOpen?: () => void;
  onClose?: () => void;
}

export class BridgeClient {
  private socket: WebSocket | null = null;
  private seq = 0;
  private closed = false;
  private retryMs = 500;

  constructor(
    private readonly url: string,
    private readonly events: BridgeEvents
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.retryMs = 500;
      this.events.onOpen?.();
    };
    socket.onmessage = (event: MessageEvent) => {
      const msg = parseMessage(String(event.data));
      if (msg) this.events.onMessage(msg);
    };
    socket.onclose = () => {
      this.socket = null;
      this.events.onClose?.();
      if (!this.closed) {
        setTimeout(() => this.open(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 5000);
      }
    };
    socket.onerror = () => {
      socket.close();
    };
  }

  nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  send(msg: ClientMessage): boolean {
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) return false;
    this.socket.send(encodeMessage(msg));
    return true;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
