/**
 * Socket wrapper: one connection, ordered event fan-in, seq-stamped
 * commands, and automatic reconnection with the seat token.
 */

import {
  ClientCommand,
  ServerEvent,
  UnseqCommand,
  decodeServerEvent,
  encodeCommand,
} from "./protocol.js";

export interface SocketHooks {
  onEvent(event: ServerEvent): void;
  onOpen(): void;
  onClose(): void;
}

export class GameSocket {
  private ws: WebSocket | null = null;
  private seq = 0;
  private closedByUs = false;
  private reconnectDelayMs = 500;

  constructor(
    private baseUrl: string, // ws://host:port
    private roomId: string,
    private hooks: SocketHooks,
    public token: string | null = null
  ) {}

  url(): string {
    const token = this.token ? `&token=${encodeURIComponent(this.token)}` : "";
    return `${this.baseUrl}/ws?room=${encodeURIComponent(this.roomId)}${token}`;
  }

  connect(): void {
    this.closedByUs = false;
    const ws = new WebSocket(this.url());
    this.ws = ws;
    ws.onopen = () => {
      this.reconnectDelayMs = 500;
      this.hooks.onOpen();
    };
    ws.onmessage = (message: MessageEvent) => {
      const event = decodeServerEvent(String(message.data));
      if (event.t === "room_state" && event.snapshot.token) {
        this.token = event.snapshot.token;
      }
      this.hooks.onEvent(event);
    };
    ws.onclose = () => {
      this.ws = null;
      this.hooks.onClose();
      if (!this.closedByUs && this.token) {
        setTimeout(() => this.connect(), this.reconnectDelayMs);
        this.reconnectDelayMs = Math.min(this.reconnectDelayMs * 2, 10_000);
      }
    };
  }

  send(command: UnseqCommand): void {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return;
    this.seq += 1;
    this.ws.send(encodeCommand({ ...command, seq: this.seq } as ClientCommand));
  }

  close(): void {
    this.closedByUs = true;
    this.ws?.close();
  }
}
