/**
 * Browser entry point.  Serve dist/ statically, run `pnet serve` for
 * the WebSocket side, open index.html, connect.
 *
 * The page is deliberately plain DOM: one canvas for the bench, one
 * for the waveform, a toolbar, a script box, and the notes panel.
 */

import { SessionClient } from "../client.js";
import { WebSocketTransport } from "../transport/ws.js";
import { Workbench } from "../workbench.js";
import { drawWaveform, drawWorkbench } from "./canvas.js";

function el<K extends keyof HTMLElementTagNameMap>(tag: K, cls?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  return node;
}

function connect(url: string): void {
  const socket = new WebSocket(url);
  const client = new SessionClient(new WebSocketTransport(socket));
  socket.addEventListener("open", () => boot(client));
  socket.addEventListener("error", () => {
    status.textContent = `cannot reach ${url}; is 'pnet serve' running?`;
  });
}

const root = document.getElementById("app") ?? document.body;
const status = el("div", "status");

function boot(client: SessionClient): void {
  root.textContent = "";

  const bench = el("canvas", "bench");
  bench.width = 960;
  bench.height = 560;
  const wave = el("canvas", "wave");
  wave.width = 960;
  wave.height = 120;

  const toolbar = el("div", "toolbar");
  const picker = el("input");
  picker.placeholder = "picker, e.g. /string/** - /string/extremities/*";
  picker.size = 44;
  const runSim = el("button");
  runSim.textContent = "simulate";
  const cancel = el("button");
  cancel.textContent = "cancel";
  const layout = el("button");
  layout.textContent = "layout: full";
  toolbar.append(picker, runSim, cancel, layout);

  const script = el("textarea", "script");
  script.rows = 6;
  script.cols = 80;
  script.placeholder = "PNSL script; ctrl-enter runs it";
  const scriptOut = el("pre", "script-out");
  const notesPanel = el("div", "notes");

  root.append(toolbar, bench, wave, status, script, scriptOut, notesPanel);

  const wb = new Workbench(client, {
    widthPx: bench.width,
    heightPx: bench.height,
    requestRender: () => requestAnimationFrame(render),
  });

  const benchCtx = bench.getContext("2d")!;
  const waveCtx = wave.getContext("2d")!;

  function render(): void {
    if (!wb.consumeDirty()) return;
    drawWorkbench(benchCtx, wb);
    renderWave();
    renderStatus();
    renderNotes();
  }

  let waveChannel: string | null = null;
  function renderWave(): void {
    if (!wb.sim.waveformVisible || wb.sim.channels.size === 0) {
      waveCtx.clearRect(0, 0, wave.width, wave.height);
      return;
    }
    waveChannel = waveChannel ?? [...wb.sim.channels.keys()][0];
    const channel = wb.sim.channels.get(waveChannel);
    if (!channel) return;
    void channel.ensureAll().then(() => {
      drawWaveform(
        waveCtx,
        channel.columns(wave.width),
        wave.width,
        wave.height,
        wb.sim.steps > 0 ? wb.sim.playhead / wb.sim.steps : null,
      );
    });
  }

  function renderStatus(): void {
    const parts = [];
    const v = wb.viewport;
    parts.push(`${v.visible}/${v.total} visible`);
    parts.push(`tier ${wb.tier}`);
    parts.push(`zoom ${v.zoom.toFixed(1)} px/u`);
    if (wb.progress.running) {
      parts.push(`simulating ${wb.progress.done}/${wb.progress.total}`);
    }
    if (wb.progress.error) parts.push(`sim failed: ${wb.progress.error}`);
    if (wb.statusLine) parts.push(wb.statusLine);
    status.textContent = parts.join("  |  ");
  }

  function renderNotes(): void {
    notesPanel.textContent = "";
    for (const [id, html] of wb.notes) {
      const card = el("div", "note");
      card.innerHTML = html; // sanitized by the workbench
      card.dataset.noteId = String(id);
      notesPanel.append(card);
    }
  }

  // intercept note links so pnet: actions stay inside the app
  notesPanel.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const anchor = target.closest("a");
    if (!anchor) return;
    ev.preventDefault();
    void wb.dispatchNoteLink(anchor.getAttribute("href") ?? "", (url) =>
      window.open(url, "_blank", "noopener"),
    );
  });

  // pan / rubber band / zoom
  let drag: { x: number; y: number; band: boolean } | null = null;
  bench.addEventListener("mousedown", (ev) => {
    drag = { x: ev.offsetX, y: ev.offsetY, band: ev.shiftKey };
  });
  bench.addEventListener("mousemove", (ev) => {
    if (!drag || drag.band) return;
    wb.panBy(ev.offsetX - drag.x, ev.offsetY - drag.y);
    drag = { ...drag, x: ev.offsetX, y: ev.offsetY };
  });
  window.addEventListener("mouseup", (ev) => {
    if (drag?.band) {
      const rect = bench.getBoundingClientRect();
      wb.rubberBandPx(drag.x, drag.y, ev.clientX - rect.left, ev.clientY - rect.top);
    }
    drag = null;
  });
  bench.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    wb.zoomBy(ev.deltaY < 0 ? 1.2 : 1 / 1.2, ev.offsetX, ev.offsetY);
  });

  wave.addEventListener("mousedown", (ev) => {
    if (wb.sim.steps > 0) {
      wb.sim.scrub((ev.offsetX / wave.width) * wb.sim.steps);
      wb.consumeDirty(); // force a direct redraw below
      drawWorkbench(benchCtx, wb);
      renderWave();
    }
  });

  picker.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") void wb.selectByPicker(picker.value);
  });
  script.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter" && (ev.ctrlKey || ev.metaKey)) {
      void wb
        .runScript(script.value)
        .then((res) => {
          scriptOut.textContent =
            (res.output.length ? res.output.join("\n") + "\n" : "") + res.result;
        })
        .catch((err) => {
          scriptOut.textContent = String(err);
        });
    }
  });
  runSim.addEventListener("click", () => {
    void wb.startSimulation().catch((err) => {
      status.textContent = String(err);
    });
  });
  cancel.addEventListener("click", () => void wb.cancelSimulation());
  layout.addEventListener("click", () => {
    const order = ["full", "waveform-only", "motion-only"] as const;
    const next = order[(order.indexOf(wb.sim.layout) + 1) % order.length];
    wb.sim.setLayout(next);
    layout.textContent = `layout: ${next}`;
    wb.consumeDirty();
    drawWorkbench(benchCtx, wb);
    renderWave();
  });

  void wb.refresh().then(() => wb.refreshNotes());
}

const params = new URLSearchParams(window.location.search);
root.append(status);
connect(params.get("ws") ?? "ws://127.0.0.1:8765");
