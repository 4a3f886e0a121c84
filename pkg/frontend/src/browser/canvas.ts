/**
 * Canvas drawing for the workbench draw lists.  Pure output: nothing
 * here mutates workbench state or talks to the service.
 */

import { displacementColor, displacementOffsetPx } from "../motion.js";
import { Column } from "../waveform.js";
import { DensityCell, GlyphDraw, LinkDraw, Workbench } from "../workbench.js";

const FAMILY_FILL: Record<string, string> = {
  MAT: "#4a7fb5",
  LIA: "#c4833a",
  OBS: "#4f9d69",
};

const BACKGROUND = "#1d2126";
const GRID = "#262c33";
const SELECT = "#e8c341";

export function drawWorkbench(ctx: CanvasRenderingContext2D, wb: Workbench): void {
  const { widthPx, heightPx } = wb;
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, widthPx, heightPx);
  drawGrid(ctx, wb);

  const tier = wb.tier;
  if (tier === "density") {
    drawDensity(ctx, wb.densityCells());
    return;
  }

  const motion =
    wb.sim.motionVisible ? wb.sim.trace.displacementsAt(wb.sim.playhead) : null;
  const peak = motion ? wb.sim.trace.peak() : 0;

  for (const link of wb.links()) drawLink(ctx, link);
  for (const glyph of wb.glyphs()) {
    drawGlyph(ctx, glyph, tier === "dot", motion?.get(glyph.id), peak);
  }
}

function drawGrid(ctx: CanvasRenderingContext2D, wb: Workbench): void {
  const step = wb.viewport.zoom;
  if (step < 12) return; // grid becomes noise when finer than this
  ctx.strokeStyle = GRID;
  ctx.lineWidth = 1;
  const offX = ((wb.widthPx / 2 - wb.viewport.centerX * step) % step + step) % step;
  const offY = ((wb.heightPx / 2 - wb.viewport.centerY * step) % step + step) % step;
  ctx.beginPath();
  for (let x = offX; x <= wb.widthPx; x += step) {
    ctx.moveTo(x, 0);
    ctx.lineTo(x, wb.heightPx);
  }
  for (let y = offY; y <= wb.heightPx; y += step) {
    ctx.moveTo(0, y);
    ctx.lineTo(wb.widthPx, y);
  }
  ctx.stroke();
}

function drawLink(ctx: CanvasRenderingContext2D, link: LinkDraw): void {
  ctx.strokeStyle = link.selected ? SELECT : "#5c6670";
  ctx.lineWidth = link.selected ? 2 : 1;
  ctx.beginPath();
  ctx.moveTo(link.x0Px, link.y0Px);
  ctx.lineTo(link.x1Px, link.y1Px);
  ctx.stroke();
}

function drawGlyph(
  ctx: CanvasRenderingContext2D,
  glyph: GlyphDraw,
  asDot: boolean,
  displacement: number | undefined,
  peak: number,
): void {
  const fill =
    displacement !== undefined
      ? displacementColor(displacement, peak)
      : FAMILY_FILL[glyph.family] ?? "#888";
  const yPx =
    displacement !== undefined
      ? glyph.yPx - displacementOffsetPx(displacement, peak, glyph.sizePx)
      : glyph.yPx;

  if (asDot) {
    ctx.fillStyle = fill;
    ctx.beginPath();
    ctx.arc(glyph.xPx, yPx, Math.max(glyph.sizePx / 2, 1), 0, Math.PI * 2);
    ctx.fill();
    return;
  }

  const half = glyph.sizePx / 2;
  ctx.fillStyle = fill;
  if (glyph.family === "LIA") {
    ctx.beginPath(); // diamond, so interactions read differently at a glance
    ctx.moveTo(glyph.xPx, yPx - half);
    ctx.lineTo(glyph.xPx + half, yPx);
    ctx.lineTo(glyph.xPx, yPx + half);
    ctx.lineTo(glyph.xPx - half, yPx);
    ctx.closePath();
    ctx.fill();
  } else if (glyph.family === "OBS") {
    ctx.beginPath();
    ctx.arc(glyph.xPx, yPx, half, 0, Math.PI * 2);
    ctx.fill();
  } else {
    ctx.fillRect(glyph.xPx - half, yPx - half, glyph.sizePx, glyph.sizePx);
  }

  if (glyph.selected) {
    ctx.strokeStyle = SELECT;
    ctx.lineWidth = 2;
    ctx.strokeRect(glyph.xPx - half - 2, yPx - half - 2, glyph.sizePx + 4, glyph.sizePx + 4);
  }

  if (glyph.sizePx >= 24) {
    ctx.fillStyle = "#cfd6dd";
    ctx.font = "10px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(glyph.kind, glyph.xPx, yPx + 3);
    if (glyph.label) {
      ctx.fillStyle = "#8b96a1";
      ctx.fillText(glyph.label, glyph.xPx, yPx + half + 12);
    }
  }
}

function drawDensity(ctx: CanvasRenderingContext2D, cells: DensityCell[]): void {
  let peak = 1;
  for (const cell of cells) peak = Math.max(peak, cell.count);
  for (const cell of cells) {
    const a = 0.2 + 0.8 * Math.min(cell.count / peak, 1);
    ctx.fillStyle = `rgba(92, 140, 190, ${a.toFixed(3)})`;
    ctx.fillRect(cell.xPx, cell.yPx, cell.sizePx, cell.sizePx);
  }
}

/** Waveform pane: min/max columns plus the playhead cursor. */
export function drawWaveform(
  ctx: CanvasRenderingContext2D,
  columns: Column[],
  widthPx: number,
  heightPx: number,
  playheadFrac: number | null,
): void {
  ctx.fillStyle = "#14171b";
  ctx.fillRect(0, 0, widthPx, heightPx);
  const mid = heightPx / 2;
  let peak = 1e-9;
  for (const c of columns) peak = Math.max(peak, Math.abs(c.min), Math.abs(c.max));
  ctx.fillStyle = "#4f9d69";
  for (let i = 0; i < columns.length; i++) {
    const top = mid - (columns[i].max / peak) * (mid - 2);
    const bottom = mid - (columns[i].min / peak) * (mid - 2);
    ctx.fillRect(i, top, 1, Math.max(bottom - top, 1));
  }
  if (playheadFrac !== null) {
    ctx.fillStyle = "#e8c341";
    ctx.fillRect(Math.round(playheadFrac * widthPx), 0, 1, heightPx);
  }
}
