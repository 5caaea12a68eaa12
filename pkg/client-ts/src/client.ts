/** Blocking single-connection broker client over node:net. */

import * as net from "node:net";

import {
  Frame,
  Opcode,
  ProtocolError,
  Tensor,
  encodeFrame,
  tryDecodeFrame,
} from "./wire.js";

export class TransportError extends Error {}
export class BrokerError extends Error {}

interface Waiter {
  resolve: (frame: Frame) => void;
  reject: (err: Error) => void;
  timer?: NodeJS.Timeout;
}

export class BrokerClient {
  private sock: net.Socket;
  private buf: Buffer = Buffer.alloc(0);
  private waiter: Waiter | null = null;
  private closed = false;

  private constructor(sock: net.Socket) {
    this.sock = sock;
    sock.on("data", (chunk) => this.onData(chunk));
    sock.on("error", (err) => this.fail(new TransportError(String(err))));
    sock.on("close", () => {
      if (!this.closed) this.fail(new TransportError("broker closed the connection"));
    });
  }

  static connect(host: string, port: number, timeoutMs = 10_000): Promise<BrokerClient> {
    return new Promise((resolve, reject) => {
      const sock = net.createConnection({ host, port, noDelay: true });
      const timer = setTimeout(() => {
        sock.destroy();
        reject(new TransportError(`connect timeout to ${host}:${port}`));
      }, timeoutMs);
      sock.once("connect", () => {
        clearTimeout(timer);
        resolve(new BrokerClient(sock));
      });
      sock.once("error", (err) => {
        clearTimeout(timer);
        reject(new TransportError(String(err)));
      });
    });
  }

  static connectAddress(address: string, timeoutMs = 10_000): Promise<BrokerClient> {
    const idx = address.lastIndexOf(":");
    if (idx < 0) return Promise.reject(new TransportError(`bad address ${address}`));
    return BrokerClient.connect(address.slice(0, idx), Number(address.slice(idx + 1)), timeoutMs);
  }

  close(): void {
    this.closed = true;
    this.sock.destroy();
  }

  private fail(err: Error): void {
    const w = this.waiter;
    this.waiter = null;
    if (w) {
      if (w.timer) clearTimeout(w.timer);
      w.reject(err);
    }
  }

  private onData(chunk: Buffer): void {
    this.buf = this.buf.length ? Buffer.concat([this.buf, chunk]) : chunk;
    for (;;) {
      let out: { frame: Frame; used: number } | null;
      try {
        out = tryDecodeFrame(this.buf);
      } catch (err) {
        this.fail(err instanceof Error ? err : new ProtocolError(String(err)));
        this.sock.destroy();
        return;
      }
      if (!out) return;
      this.buf = this.buf.subarray(out.used);
      const w = this.waiter;
      this.waiter = null;
      if (w) {
        if (w.timer) clearTimeout(w.timer);
        w.resolve(out.frame);
      }
    }
  }

  /** One request/response exchange; the protocol is strictly alternating. */
  private request(frame: Frame, timeoutMs: number): Promise<Frame> {
    if (this.waiter) return Promise.reject(new TransportError("request already in flight"));
    return new Promise<Frame>((resolve, reject) => {
      const timer = setTimeout(() => {
        this.waiter = null;
        reject(new TransportError("response timeout"));
        this.sock.destroy();
      }, timeoutMs);
      this.waiter = { resolve, reject, timer };
      this.sock.write(encodeFrame(frame));
    }).then((reply) => {
      if (reply.opcode === Opcode.ERR) {
        throw new BrokerError(reply.message ?? "broker error");
      }
      return reply;
    });
  }

  async ping(): Promise<void> {
    await this.request({ opcode: Opcode.PING, key: "" }, 10_000);
  }

  async putTensor(key: string, tensor: Tensor): Promise<void> {
    const reply = await this.request({ opcode: Opcode.PUT, key, tensor }, 30_000);
    if (reply.opcode !== Opcode.OK) throw new BrokerError(`unexpected reply ${reply.opcode}`);
  }

  /** Blocks server-side until the key exists or timeoutMs elapses (null). */
  async getTensor(key: string, timeoutMs: number): Promise<Tensor | null> {
    const reply = await this.request(
      { opcode: Opcode.GET, key, timeoutMs },
      timeoutMs + 30_000,
    );
    if (reply.opcode === Opcode.NOT_FOUND) return null;
    if (reply.opcode !== Opcode.TENSOR || !reply.tensor) {
      throw new BrokerError(`unexpected reply ${reply.opcode}`);
    }
    return reply.tensor;
  }

  /** Removes every key with the given prefix; idempotent. */
  async delete(prefix: string): Promise<void> {
    const reply = await this.request({ opcode: Opcode.DEL, key: prefix }, 30_000);
    if (reply.opcode !== Opcode.OK) throw new BrokerError(`unexpected reply ${reply.opcode}`);
  }
}
