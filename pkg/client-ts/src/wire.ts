/**
 * Binary wire format of the AFC tensor broker.
 *
 * Every frame starts with: magic "AFCB", version u8 (=1), opcode u8,
 * keylen u16 LE, key (UTF-8). Opcode-specific payload follows:
 *   PUT/TENSOR: dtype u8 (1=f32, 2=f64, 3=i64), ndim u8, ndim x u64 LE dims,
 *               raw little-endian row-major elements
 *   GET:        timeout_ms u32 LE
 *   ERR:        msglen u16 LE, UTF-8 message
 * DEL removes every key with the given prefix. Responses echo the request
 * key (empty for PING).
 */

export const MAGIC = Buffer.from("AFCB", "ascii");
export const VERSION = 1;

export enum Opcode {
  PUT = 1,
  GET = 2,
  DEL = 3,
  PING = 4,
  OK = 128,
  TENSOR = 129,
  NOT_FOUND = 130,
  ERR = 131,
}

export type DType = "f32" | "f64" | "i64";

const DTYPE_CODE: Record<DType, number> = { f32: 1, f64: 2, i64: 3 };
const CODE_DTYPE: Record<number, DType> = { 1: "f32", 2: "f64", 3: "i64" };
const ITEM_SIZE: Record<DType, number> = { f32: 4, f64: 8, i64: 8 };

export type TensorData = Float32Array | Float64Array | BigInt64Array;

export interface Tensor {
  dtype: DType;
  dims: number[];
  data: TensorData;
}

export interface Frame {
  opcode: Opcode;
  key: string;
  tensor?: Tensor;
  timeoutMs?: number;
  message?: string;
}

export class ProtocolError extends Error {}

function elementCount(dims: number[]): number {
  return dims.reduce((a, b) => a * b, 1);
}

function hostIsBigEndian(): boolean {
  return new Uint8Array(new Uint16Array([1]).buffer)[0] !== 1;
}

export function tensorBytes(t: Tensor): Buffer {
  // tensors are little-endian on the wire; typed arrays use host order
  if (hostIsBigEndian()) throw new ProtocolError("big-endian host unsupported");
  return Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength);
}

export function makeTensor(dtype: DType, dims: number[], values: number[]): Tensor {
  const n = elementCount(dims);
  if (values.length !== n) throw new ProtocolError("values do not match dims");
  if (dtype === "f32") return { dtype, dims, data: Float32Array.from(values) };
  if (dtype === "f64") return { dtype, dims, data: Float64Array.from(values) };
  return { dtype, dims, data: BigInt64Array.from(values.map((v) => BigInt(v))) };
}

export function encodeFrame(frame: Frame): Buffer {
  const key = Buffer.from(frame.key, "utf-8");
  if (key.length > 0xffff) throw new ProtocolError(`key too long: ${key.length}`);
  const head = Buffer.alloc(8);
  MAGIC.copy(head, 0);
  head.writeUInt8(VERSION, 4);
  head.writeUInt8(frame.opcode, 5);
  head.writeUInt16LE(key.length, 6);
  const parts: Buffer[] = [head, key];

  if (frame.opcode === Opcode.PUT || frame.opcode === Opcode.TENSOR) {
    const t = frame.tensor;
    if (!t) throw new ProtocolError("PUT/TENSOR frame needs a tensor");
    const th = Buffer.alloc(2 + 8 * t.dims.length);
    th.writeUInt8(DTYPE_CODE[t.dtype], 0);
    th.writeUInt8(t.dims.length, 1);
    t.dims.forEach((d, i) => th.writeBigUInt64LE(BigInt(d), 2 + 8 * i));
    parts.push(th, tensorBytes(t));
  } else if (frame.opcode === Opcode.GET) {
    const tm = Buffer.alloc(4);
    tm.writeUInt32LE(frame.timeoutMs ?? 0, 0);
    parts.push(tm);
  } else if (frame.opcode === Opcode.ERR) {
    const msg = Buffer.from(frame.message ?? "", "utf-8");
    const mh = Buffer.alloc(2);
    mh.writeUInt16LE(msg.length, 0);
    parts.push(mh, msg);
  }
  return Buffer.concat(parts);
}

/** Decode one frame from the buffer head; null when more bytes are needed. */
export function tryDecodeFrame(buf: Buffer): { frame: Frame; used: number } | null {
  if (buf.length < 8) return null;
  if (!buf.subarray(0, 4).equals(MAGIC)) throw new ProtocolError("bad magic");
  if (buf.readUInt8(4) !== VERSION) throw new ProtocolError("unsupported version");
  const op = buf.readUInt8(5) as Opcode;
  if (!(op in Opcode)) throw new ProtocolError(`unknown opcode ${op}`);
  const keyLen = buf.readUInt16LE(6);
  let pos = 8;
  if (buf.length < pos + keyLen) return null;
  const key = buf.subarray(pos, pos + keyLen).toString("utf-8");
  pos += keyLen;
  const frame: Frame = { opcode: op, key };

  if (op === Opcode.PUT || op === Opcode.TENSOR) {
    if (buf.length < pos + 2) return null;
    const code = buf.readUInt8(pos);
    const ndim = buf.readUInt8(pos + 1);
    pos += 2;
    if (buf.length < pos + 8 * ndim) return null;
    const dims: number[] = [];
    for (let i = 0; i < ndim; i++) {
      dims.push(Number(buf.readBigUInt64LE(pos + 8 * i)));
    }
    pos += 8 * ndim;
    const dtype = CODE_DTYPE[code];
    if (!dtype) throw new ProtocolError(`unknown dtype code ${code}`);
    const nbytes = ITEM_SIZE[dtype] * elementCount(dims);
    if (buf.length < pos + nbytes) return null;
    // copy out so the result does not alias the connection buffer
    const raw = Buffer.alloc(nbytes);
    buf.copy(raw, 0, pos, pos + nbytes);
    pos += nbytes;
    const ab = raw.buffer.slice(raw.byteOffset, raw.byteOffset + nbytes);
    const data: TensorData =
      dtype === "f32" ? new Float32Array(ab) : dtype === "f64" ? new Float64Array(ab) : new BigInt64Array(ab);
    frame.tensor = { dtype, dims, data };
  } else if (op === Opcode.GET) {
    if (buf.length < pos + 4) return null;
    frame.timeoutMs = buf.readUInt32LE(pos);
    pos += 4;
  } else if (op === Opcode.ERR) {
    if (buf.length < pos + 2) return null;
    const msgLen = buf.readUInt16LE(pos);
    pos += 2;
    if (buf.length < pos + msgLen) return null;
    frame.message = buf.subarray(pos, pos + msgLen).toString("utf-8");
    pos += msgLen;
  }
  return { frame, used: pos };
}
