/**
 * Integration against a real session service child process.  Everything
 * the workbench knows here arrived over the wire; the tests double as
 * an audit that no view ever computes model state locally.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceCallError } from "../src/client.js";
import { InfoStatsResult, ScriptRunResult } from "../src/protocol.js";
import { Workbench } from "../src/workbench.js";
import { LiveSession, startSession, until } from "./helpers.js";

const STRING_SCRIPT = `
model new
set left [module create SOL]
label add $left /string/left
set prev $left
for {set i 0} {$i < 6} {incr i} {
  set m [module create MAS]
  label add $m /string/masses/$i
  bench move $m [expr 1 + $i] 0
  set s [module create REF]
  label add $s /string/springs/$i
  link connect $s $prev $m
  param set $s K 0.02
  param set $s Z 0.001
  set prev $m
}
set right [module create SOL]
label add $right /string/right
bench move $right 7 0
set end [module create REF]
link connect $end $prev $right
param set $end K 0.02
state set /string/masses/2 X0 0.6
set probe [module create SOX]
link attach $probe /string/masses/4
sim config duration 11025
sim config trace none
`;

describe("workbench against a live service", () => {
  let live: LiveSession;
  let wb: Workbench;

  beforeAll(async () => {
    live = startSession();
    wb = new Workbench(live.client, { widthPx: 800, heightPx: 600 });
    await wb.runScript(STRING_SCRIPT);
  });

  afterAll(async () => {
    wb.dispose();
    await live.close();
  });

  it("mirrors modules, labels and links from service responses only", async () => {
    // 1 SOL + 6x(MAS+REF) + SOL + REF + SOX
    expect(wb.mirror.size).toBe(16);
    const left = [...wb.mirror.modules.values()].find((m) =>
      m.labels.includes("/string/left"),
    );
    expect(left?.kind).toBe("SOL");
    const mas3 = [...wb.mirror.modules.values()].find((m) =>
      m.labels.includes("/string/masses/3"),
    );
    expect(mas3?.x).toBe(4);
    expect(mas3?.family).toBe("MAT");
    // every spring connects two mirrored modules
    const connected = wb.mirror.links.filter((l) => l.a !== null && l.b !== null);
    expect(connected).toHaveLength(7);
    for (const link of connected) {
      expect(wb.mirror.has(link.a!)).toBe(true);
      expect(wb.mirror.has(link.b!)).toBe(true);
    }
  });

  it("keeps the visible count in step with pan and zoom", () => {
    wb.goTo(3.5, 0, 60);
    expect(wb.viewport.total).toBe(16);
    const before = wb.viewport.visible;
    expect(before).toBeGreaterThan(0);
    wb.goTo(1000, 1000, 60); // far away from the model
    expect(wb.viewport.visible).toBe(0);
    wb.goTo(3.5, 0, 60);
    expect(wb.viewport.visible).toBe(before);
  });

  it("selects by rubber band where the tier allows it", () => {
    wb.goTo(3.5, 0, 60); // 60 px glyphs: detail tier
    expect(wb.tier).toBe("detail");
    const result = wb.rubberBandPx(0, 0, wb.widthPx, wb.heightPx);
    expect(result.ok).toBe(true);
    expect(wb.selection.size).toBeGreaterThan(0);

    // all bench positions land on y=0 in a row; a thin band catches fewer
    wb.selection.clear();
    const mid = wb.heightPx / 2;
    wb.rubberBandPx(0, mid - 5, wb.widthPx / 2, mid + 5);
    const partial = wb.selection.size;
    expect(partial).toBeGreaterThan(0);
    expect(partial).toBeLessThan(16);
  });

  it("falls back to pickers in the density tier", () => {
    wb.goTo(3.5, 0, 0.5); // half-pixel glyphs
    expect(wb.tier).toBe("density");
    const result = wb.rubberBandPx(0, 0, 100, 100);
    expect(result.ok).toBe(false);
    expect(result.hint).toMatch(/picker/);
    expect(wb.statusLine).toMatch(/picker/);
    wb.goTo(3.5, 0, 60);
  });

  it("surfaces picker syntax errors inline instead of throwing", async () => {
    const ok = await wb.selectByPicker("/string/(");
    expect(ok).toBe(false);
    expect(wb.statusLine).toMatch(/PickerSyntaxError/);
  });

  it("applies optimistic edits and reconciles failures by re-fetching", async () => {
    const before = wb.mirror.size;
    let optimisticRan = false;
    const created = await wb.edits.submit(
      [
        { op: "create", kind: "MAS", count: 2, pos: [10, 5] },
      ],
      () => {
        optimisticRan = true;
      },
    );
    expect(optimisticRan).toBe(true);
    expect(created?.applied).toBe(1);
    const ids = (created?.results[0] as { ids: number[] }).ids;
    expect(ids).toHaveLength(2);

    // a batch that dies halfway: the server keeps op 0, rejects op 1
    const failed = await wb.edits.submit([
      { op: "label-add", module: ids[0], text: "/scratch/a" },
      { op: "set-param", targets: ids[0], name: "K", value: 1 }, // K illegal on MAS
      { op: "label-add", module: ids[1], text: "/scratch/b" },
    ]);
    expect(failed).toBeNull();
    expect(wb.edits.lastError).toBeInstanceOf(ServiceCallError);
    expect(wb.edits.lastError?.detail.op_index).toBe(1);

    // the queue re-fetched server truth: op 0 landed, op 2 never ran
    await wb.edits.drained();
    await until(() => wb.mirror.size === before + 2, "mirror refresh");
    expect(wb.mirror.get(ids[0])?.labels).toContain("/scratch/a");
    expect(wb.mirror.get(ids[1])?.labels).toHaveLength(0);

    // a follow-up batch replays cleanly on the refreshed state
    const cleanup = await wb.edits.submit([{ op: "delete", targets: ids }]);
    expect(cleanup?.applied).toBe(1);
    await wb.refresh();
    expect(wb.mirror.size).toBe(before);
  });

  it("re-fetches when another writer changes the session", async () => {
    const before = wb.mirror.size;
    // direct request, bypassing the workbench: a second client would look identical
    await live.client.request("script.run", {
      source: "set id [module create MAS]\nlabel add $id /foreign/visitor",
    });
    await until(() => wb.mirror.size === before + 1, "event-driven refresh");
    const visitor = [...wb.mirror.modules.values()].find((m) =>
      m.labels.includes("/foreign/visitor"),
    );
    expect(visitor).toBeDefined();
    await wb.runScript("module delete /foreign/visitor");
  });

  it("renders notes sanitized and dispatches pnet: links through the service", async () => {
    await wb.runScript(
      'note add 2 0 {<p>Pluck <a href="pnet:select?picker=/string/masses/*">the string</a>' +
        '<script>alert(1)</script> or <a href="https://example.org/doc">read</a></p>}',
    );
    await wb.refreshNotes();
    expect(wb.notes.size).toBe(1);
    const html = [...wb.notes.values()][0];
    expect(html).toContain('href="pnet:select?picker=/string/masses/*"');
    expect(html).not.toContain("script>");

    const action = await wb.dispatchNoteLink(
      "pnet:select?picker=/string/masses/*",
      () => {},
    );
    expect(action?.kind).toBe("select");
    const direct = (await live.client.request("picker.eval", {
      expr: "/string/masses/*",
    })) as { ids: number[] };
    expect(wb.selection.current()).toEqual(direct.ids);

    let opened: string | null = null;
    const ext = await wb.dispatchNoteLink("https://example.org/doc", (url) => {
      opened = url;
    });
    expect(ext?.kind).toBe("external");
    expect(opened).toBe("https://example.org/doc");

    const go = await wb.dispatchNoteLink("pnet:goto?x=3&y=1&zoom=48", () => {});
    expect(go?.kind).toBe("goto");
    expect(wb.viewport.centerX).toBe(3);
    expect(wb.viewport.zoom).toBe(48);
  });

  it("runs a simulation, streams progress, and scrubs without extra requests", async () => {
    const start = await wb.startSimulation(11025);
    expect(start.started).toBe(true);
    await until(() => !wb.progress.running, "simulation end");
    expect(wb.progress.error).toBeNull();
    expect(wb.progress.done).toBe(11025);
    await until(() => wb.sim.channels.size > 0, "sim view attach");

    expect(wb.sim.steps).toBe(11025);
    const channel = [...wb.sim.channels.values()][0];
    await channel.ensureAll();
    const columns = channel.columns(400);
    expect(columns).toHaveLength(400);
    const peak = Math.max(...columns.map((c) => Math.abs(c.max)));
    expect(peak).toBeGreaterThan(0); // the pluck made sound

    // scrubbing and layout switches are pure client state
    const requestsBefore = live.client.requestCount();
    wb.sim.scrub(5000);
    wb.sim.setLayout("waveform-only");
    wb.sim.setLayout("motion-only");
    wb.sim.setLayout("full");
    wb.sim.scrub(11025);
    expect(wb.sim.playhead).toBe(11025);
    expect(live.client.requestCount()).toBe(requestsBefore);

    // no trace was recorded, so the motion pane degrades with a reason
    expect(wb.sim.motionVisible).toBe(false);
    expect(wb.sim.motionDisabledReason).toMatch(/trace/);
  });

  it("plays motion frames when the run records a trace", async () => {
    await wb.runScript("sim config trace /string/masses/*\nsim config decimation 64");
    await wb.startSimulation(4096);
    await until(() => !wb.progress.running, "traced run end");
    await until(() => wb.sim.trace.loaded, "trace load");

    expect(wb.sim.motionVisible).toBe(true);
    expect(wb.sim.trace.matIds.length).toBe(6);
    expect(wb.sim.trace.decimation).toBe(64);
    wb.sim.scrub(2048);
    expect(wb.sim.currentFrame()).toBe(32);
    const at = wb.sim.trace.displacementsAt(wb.sim.playhead);
    expect(at?.size).toBe(6);
    // the trace is real motion, not zeros
    expect(wb.sim.trace.peak()).toBeGreaterThan(0);
  });

  it("saves and reloads through the service by path", async () => {
    const bytes = await wb.saveModel("bench.pnet");
    expect(bytes).toBeGreaterThan(0);
    const before = wb.mirror.size;
    await wb.runScript("module create MAS");
    await wb.openModel("bench.pnet");
    expect(wb.mirror.size).toBe(before);
    const stats = (await live.client.request("info.stats", {})) as InfoStatsResult;
    expect(stats.model.modules).toBe(before);
  });

  it("exposes script output alongside results", async () => {
    const res = (await wb.runScript(
      'puts "hello"\nputs "world"\npicker count /string/masses/*',
    )) as ScriptRunResult;
    expect(res.output).toEqual(["hello", "world"]);
    expect(res.result).toBe("6");
  });
});
