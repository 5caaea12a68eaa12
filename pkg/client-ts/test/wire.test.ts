/** Byte-level conformance against the golden corpus recorded by the primary
 * implementation: re-encoded frames must match bit for bit, and decoding the
 * recorded bytes must recover every field. */

import { readFileSync, readdirSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { Frame, Opcode, encodeFrame, makeTensor, tryDecodeFrame } from "../src/wire.js";

const golden = join(dirname(fileURLToPath(import.meta.url)), "golden");

interface ManifestEntry {
  file: string;
  opcode: keyof typeof Opcode;
  key: string;
  bytes: number;
  dtype?: "f32" | "f64" | "i64";
  dims?: number[];
  values?: number[];
  timeout_ms?: number;
  message?: string;
}

const manifest: ManifestEntry[] = JSON.parse(
  readFileSync(join(golden, "manifest.json"), "utf-8"),
);

function frameFromManifest(e: ManifestEntry): Frame {
  const frame: Frame = { opcode: Opcode[e.opcode], key: e.key };
  if (e.dtype !== undefined) {
    frame.tensor = makeTensor(e.dtype, e.dims ?? [], e.values ?? []);
  }
  if (e.timeout_ms !== undefined) frame.timeoutMs = e.timeout_ms;
  if (e.message !== undefined) frame.message = e.message;
  return frame;
}

describe("golden frame corpus", () => {
  it("covers every recorded file", () => {
    const files = readdirSync(golden).filter((f) => f.endsWith(".bin"));
    expect(new Set(manifest.map((e) => e.file))).toEqual(new Set(files));
    expect(manifest.length).toBeGreaterThanOrEqual(10);
  });

  for (const entry of manifest) {
    it(`re-encodes ${entry.file} bit-exactly`, () => {
      const recorded = readFileSync(join(golden, entry.file));
      expect(recorded.length).toBe(entry.bytes);
      const encoded = encodeFrame(frameFromManifest(entry));
      expect(encoded.equals(recorded)).toBe(true);
    });

    it(`decodes ${entry.file} to the recorded fields`, () => {
      const recorded = readFileSync(join(golden, entry.file));
      const out = tryDecodeFrame(recorded);
      expect(out).not.toBeNull();
      const { frame, used } = out!;
      expect(used).toBe(recorded.length);
      expect(frame.opcode).toBe(Opcode[entry.opcode]);
      expect(frame.key).toBe(entry.key);
      if (entry.dtype !== undefined) {
        expect(frame.tensor!.dtype).toBe(entry.dtype);
        expect(frame.tensor!.dims).toEqual(entry.dims);
        const got = Array.from(frame.tensor!.data, Number);
        expect(got).toEqual(entry.values);
      }
      if (entry.timeout_ms !== undefined) expect(frame.timeoutMs).toBe(entry.timeout_ms);
      if (entry.message !== undefined) expect(frame.message).toBe(entry.message);
    });
  }

  it("returns null on truncated frames instead of throwing", () => {
    const recorded = readFileSync(join(golden, "put_f64_85.bin"));
    for (const cut of [3, 7, 9, recorded.length - 1]) {
      expect(tryDecodeFrame(recorded.subarray(0, cut))).toBeNull();
    }
  });

  it("round-trips randomized tensors", () => {
    for (let trial = 0; trial < 500; trial++) {
      const dims = [1 + (trial % 5), 1 + ((trial * 7) % 3)];
      const n = dims[0] * dims[1];
      const dtype = (["f32", "f64", "i64"] as const)[trial % 3];
      const scale = dtype === "i64" ? 2 : 0.5;
      const values = Array.from({ length: n }, (_, i) => (i - trial) * scale);
      const frame: Frame = {
        opcode: Opcode.PUT,
        key: `k${trial}`,
        tensor: makeTensor(dtype, dims, values),
      };
      const out = tryDecodeFrame(encodeFrame(frame));
      expect(out).not.toBeNull();
      expect(Array.from(out!.frame.tensor!.data, Number)).toEqual(values);
    }
  });
});
