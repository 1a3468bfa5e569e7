import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { encodeSemb, readSemb, writeSemb, SembDataset } from "../src/semb.js";

let tmp: string;
beforeEach(() => {
  tmp = fs.mkdtempSync(path.join(os.tmpdir(), "semb-"));
});
afterEach(() => {
  fs.rmSync(tmp, { recursive: true, force: true });
});

function sample(): SembDataset {
  return {
    embeddings: Float32Array.from([0.5, -1.25, 3.0, 0.0, 7.5, -0.125]),
    n: 3,
    p: 2,
    labels: Uint16Array.from([0, 1, 1]),
    nClass: 2,
  };
}

describe("SEMB encoding", () => {
  it("lays out the header byte-exactly", () => {
    const buf = encodeSemb(sample());
    expect(buf.toString("ascii", 0, 4)).toBe("SEMB");
    expect(buf.readUInt8(4)).toBe(1); // version
    expect(buf.readUInt8(5)).toBe(0); // dtype float32
    expect(buf.readUInt16LE(6)).toBe(0); // reserved
    expect(buf.readUInt32LE(8)).toBe(3); // N
    expect(buf.readUInt32LE(12)).toBe(2); // p
    expect(buf.readUInt32LE(16)).toBe(2); // n_class
    expect(buf.length).toBe(20 + 4 * 6 + 2 * 3);
  });

  it("stores float32 little-endian then u16 labels", () => {
    const buf = encodeSemb(sample());
    expect(buf.readFloatLE(20)).toBeCloseTo(0.5, 7);
    expect(buf.readFloatLE(24)).toBeCloseTo(-1.25, 7);
    expect(buf.readUInt16LE(20 + 24)).toBe(0);
    expect(buf.readUInt16LE(20 + 24 + 2)).toBe(1);
  });

  it("round-trips through a file", () => {
    const ds = sample();
    const file = path.join(tmp, "x.semb");
    writeSemb(file, ds);
    const back = readSemb(file);
    expect(back.n).toBe(ds.n);
    expect(back.p).toBe(ds.p);
    expect(back.nClass).toBe(ds.nClass);
    expect([...back.labels]).toEqual([...ds.labels]);
    expect([...back.embeddings]).toEqual([...ds.embeddings]);
  });

  it("rejects labels outside n_class", () => {
    const ds = sample();
    ds.labels = Uint16Array.from([0, 1, 2]);
    expect(() => encodeSemb(ds)).toThrow(/label/);
  });

  it("rejects non-finite embeddings", () => {
    const ds = sample();
    ds.embeddings[2] = Number.NaN;
    expect(() => encodeSemb(ds)).toThrow(/finite/);
  });

  it("rejects shape mismatches", () => {
    const ds = sample();
    ds.n = 4;
    expect(() => encodeSemb(ds)).toThrow(/N\*p/);
  });

  it("reader rejects corrupted files", () => {
    const file = path.join(tmp, "bad.semb");
    fs.writeFileSync(file, Buffer.from("XEMB0000000000000000"));
    expect(() => readSemb(file)).toThrow(/magic/);
    const ds = sample();
    writeSemb(file, ds);
    fs.appendFileSync(file, Buffer.from([0]));
    expect(() => readSemb(file)).toThrow(/size/);
  });
});
