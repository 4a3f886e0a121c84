/**
 * Acceptance checks for the workbench client, one verdict line each:
 *
 *   - LOD table conformance over a 10^4-viewport sweep
 *   - picker selection coherence between UI state and the service
 *   - waveform column fidelity against the exported WAV file
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { computeLod } from "../src/lod.js";
import { PickerEvalResult } from "../src/protocol.js";
import { Workbench } from "../src/workbench.js";
import { LiveSession, mulberry32, pick, startSession, until } from "./helpers.js";

function verdict(name: string, ok: boolean, detail: string): void {
  // straight to stdout so the line survives vitest's console capture
  process.stdout.write(`[acceptance] ${ok ? "PASS" : "FAIL"} ${name}: ${detail}\n`);
}

// -- criterion: LOD table conformance ---------------------------------------

/** The threshold ledger, restated independently of src/lod.ts. */
function oracleTier(glyphPixels: number, visible: number): string {
  if (visible > 20000) return "density";
  if (glyphPixels >= 24) return "detail";
  if (glyphPixels >= 8) return "icon";
  if (glyphPixels >= 2) return "dot";
  return "density";
}

describe("LOD table conformance", () => {
  it("matches the ledger on 10^4 synthetic viewports", () => {
    const rng = mulberry32(0x10d);
    const boundaryZooms = [2, 8, 24, 1.9999999, 7.9999999, 23.9999999, 2.0000001];
    const boundaryCounts = [19999, 20000, 20001];
    let mismatches = 0;
    const sweep = 10000;
    for (let i = 0; i < sweep; i++) {
      // log-uniform zoom spans dust to wall-filling; every tenth case
      // sits exactly on a table boundary
      const zoom =
        i % 10 === 3 ? pick(rng, boundaryZooms) : 10 ** (rng() * 6 - 3);
      const visible =
        i % 10 === 7
          ? pick(rng, boundaryCounts)
          : Math.floor(10 ** (rng() * 5));
      const total = visible + Math.floor(rng() * 1000);
      const viewport = {
        centerX: (rng() - 0.5) * 2000,
        centerY: (rng() - 0.5) * 2000,
        zoom,
        visible,
        total,
      };
      const got = computeLod(viewport);
      const want = oracleTier(zoom * 1.0, visible);
      if (got !== want) mismatches++;
    }
    verdict(
      "LOD table conformance",
      mismatches === 0,
      `${sweep} viewports, ${mismatches} mismatches`,
    );
    expect(mismatches).toBe(0);
  });
});

// -- criteria against a live service ----------------------------------------

const COHERENCE_MODEL = `
model new
for {set s 0} {$s < 3} {incr s} {
  set left [module create SOL]
  label add $left /string$s/left
  set prev $left
  for {set i 0} {$i < 5} {incr i} {
    set m [module create MAS]
    label add $m /string$s/masses/m$i
    set k [module create RES]
    label add $k /string$s/springs/k$i
    link connect $k $prev $m
    set prev $m
  }
}
for {set n 0} {$n < 4} {incr n} {
  set m [module create CEL]
  label add $m /bank/note$n/mass
  set o [module create SOX]
  label add $o /bank/note$n/out
  link attach $o $m
}
module create MAS 5
`;

const SEGMENTS = [
  "string0", "string1", "string2", "bank", "masses", "springs",
  "left", "note0", "note3", "m0", "m4", "k2", "mass", "out",
  "string*", "note*", "m*", "k?", "[mk]*", "[a-m]*", "*", "**",
];

const OPS = [" + ", " & ", " - "];

function randomPattern(rng: () => number): string {
  const depth = 1 + Math.floor(rng() * 3);
  const segs = Array.from({ length: depth }, () => pick(rng, SEGMENTS));
  return "/" + segs.join("/");
}

function randomPicker(rng: () => number): string {
  const terms = 1 + Math.floor(rng() * 3);
  let expr = randomPattern(rng);
  for (let i = 1; i < terms; i++) {
    expr += pick(rng, OPS) + randomPattern(rng);
  }
  if (terms >= 2 && rng() < 0.3) {
    expr = `(${expr})`;
    if (rng() < 0.5) expr += pick(rng, OPS) + randomPattern(rng);
  }
  return expr;
}

describe("live acceptance", () => {
  let live: LiveSession;
  let wb: Workbench;

  beforeAll(async () => {
    live = startSession();
    wb = new Workbench(live.client, { widthPx: 960, heightPx: 640 });
  });

  afterAll(async () => {
    wb.dispose();
    await live.close();
  });

  it("keeps UI picker selections identical to service picker.eval", async () => {
    await wb.runScript(COHERENCE_MODEL);
    expect(wb.mirror.size).toBe(3 * 11 + 8 + 5);

    const rng = mulberry32(0xc0e5);
    let agreed = 0;
    let disagreed = 0;
    const trials = 50;
    for (let i = 0; i < trials; i++) {
      const expr = randomPicker(rng);
      const ok = await wb.selectByPicker(expr);
      expect(ok, `picker ${expr} should parse`).toBe(true);
      const direct = (await live.client.request("picker.eval", {
        expr,
      })) as PickerEvalResult;
      if (
        JSON.stringify(wb.selection.current()) === JSON.stringify(direct.ids)
      ) {
        agreed++;
      } else {
        disagreed++;
      }
    }
    verdict(
      "picker coherence",
      disagreed === 0,
      `${trials} random pickers, ${agreed} agreed, ${disagreed} disagreed`,
    );
    expect(disagreed).toBe(0);
  });

  it("renders waveform columns equal to a decimation of the exported WAV", async () => {
    const fixtures: { name: string; width: number; script: string }[] = [
      {
        name: "f1",
        width: 800,
        script: `
model new
set a [module create SOL]
set m [module create MAS]
set k [module create RES]
link connect $k $a $m
param set $k K [sim tune 440]
state set $m X0 0.8
set o [module create SOX]
link attach $o $m
sim config trace none
sim run 22050
out wav f1.wav
`,
      },
      {
        name: "f2",
        width: 640,
        script: `
model new
set prev [module create SOL]
for {set i 0} {$i < 12} {incr i} {
  set m [module create MAS]
  set s [module create REF]
  link connect $s $prev $m
  param set $s K 0.02
  param set $s Z 0.0008
  set prev $m
}
state set 4 X0 0.7
state set 6 V0 -0.01
set o [module create SOX]
link attach $o 10
sim config trace none
sim run 33075
out wav f2.wav
`,
      },
      {
        name: "f3",
        width: 512,
        script: `
model new
set prev [module create SOL]
for {set i 0} {$i < 6} {incr i} {
  set m [module create MAS]
  set s [module create RES]
  link connect $s $prev $m
  param set $s K 0.015
  set prev $m
}
state set 2 X0 0.5
set o1 [module create SOX]
link attach $o1 2
set o2 [module create SOX]
link attach $o2 12
sim config trace none
sim run 26460
out wav f3.wav
`,
      },
    ];

    let columnsChecked = 0;
    let columnsWrong = 0;
    for (const fixture of fixtures) {
      await wb.runScript(fixture.script);
      const attached = await wb.sim.attachToLastRun();
      expect(attached).toBe(true);

      const wav = readWav(join(live.dir, `${fixture.name}.wav`));
      const names = [...wb.sim.channels.keys()];
      expect(wav.channels.length).toBe(names.length);

      for (let c = 0; c < names.length; c++) {
        const channel = wb.sim.channels.get(names[c])!;
        await channel.ensureAll();
        expect(channel.total).toBe(wav.channels[c].length);
        const rendered = channel.columns(fixture.width);
        const expected = decimateOracle(wav.channels[c], fixture.width);
        expect(rendered.length).toBe(expected.length);
        for (let i = 0; i < rendered.length; i++) {
          columnsChecked++;
          if (
            !Object.is(rendered[i].min, expected[i].min) ||
            !Object.is(rendered[i].max, expected[i].max)
          ) {
            columnsWrong++;
          }
        }
      }
    }
    verdict(
      "waveform fidelity",
      columnsWrong === 0,
      `3 fixtures, ${columnsChecked - columnsWrong}/${columnsChecked} columns bit-identical to the WAV decimation`,
    );
    expect(columnsWrong).toBe(0);
  });

  it("needs nothing beyond the service wire to do all of the above", () => {
    // every verb used is part of the schema; nothing else was spoken
    const verbs = new Set(live.client.requestLog.map((e) => e.verb));
    for (const verb of verbs) {
      expect([
        "model.load", "model.save", "script.run", "picker.eval", "edit.apply",
        "sim.start", "sim.cancel", "result.wave", "result.trace", "info.stats",
      ]).toContain(verb);
    }
  });
});

// -- independent WAV reading and decimation ---------------------------------

/** Minimal RIFF reader for the float32 files the service exports. */
function readWav(path: string): { rate: number; channels: Float32Array[] } {
  const buf = readFileSync(path);
  if (buf.toString("ascii", 0, 4) !== "RIFF" || buf.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error(`${path} is not a RIFF/WAVE file`);
  }
  let offset = 12;
  let format = 0;
  let numChannels = 0;
  let rate = 0;
  let bits = 0;
  let data: Buffer | null = null;
  while (offset + 8 <= buf.length) {
    const id = buf.toString("ascii", offset, offset + 4);
    const size = buf.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (id === "fmt ") {
      format = buf.readUInt16LE(body);
      numChannels = buf.readUInt16LE(body + 2);
      rate = buf.readUInt32LE(body + 4);
      bits = buf.readUInt16LE(body + 14);
    } else if (id === "data") {
      data = buf.subarray(body, body + size);
    }
    offset = body + size + (size % 2);
  }
  if (format !== 3 || bits !== 32 || !data) {
    throw new Error(`expected float32 wav, got format=${format} bits=${bits}`);
  }
  const frames = data.length / 4 / numChannels;
  const channels = Array.from({ length: numChannels }, () => new Float32Array(frames));
  for (let f = 0; f < frames; f++) {
    for (let c = 0; c < numChannels; c++) {
      channels[c][f] = data.readFloatLE((f * numChannels + c) * 4);
    }
  }
  return { rate, channels };
}

/** Plain-loop min/max decimation over the same column partition. */
function decimateOracle(
  samples: Float32Array,
  width: number,
): { min: number; max: number }[] {
  const n = samples.length;
  const out: { min: number; max: number }[] = [];
  for (let i = 0; i < width; i++) {
    let lo = Math.floor((i * n) / width);
    let hi = Math.floor(((i + 1) * n) / width);
    if (hi <= lo) hi = lo + 1;
    if (hi > n) hi = n;
    if (lo >= n) lo = n - 1;
    let min = samples[lo];
    let max = samples[lo];
    for (let j = lo + 1; j < hi; j++) {
      if (samples[j] < min) min = samples[j];
      if (samples[j] > max) max = samples[j];
    }
    out.push({ min, max });
  }
  return out;
}
