/**
 * Representation tiers: how much of a module to draw at the current
 * zoom.  The whole policy lives in one table so there is exactly one
 * place to tune it, and computeLod is a pure function of the viewport.
 */

import { Viewport, validViewport } from "./viewport.js";

export type Tier = "detail" | "icon" | "dot" | "density";

export interface LodTable {
  /** Glyph footprint in workbench units (glyph px = zoom * this). */
  glyphUnits: number;
  /** Glyph at or above this many pixels: full detail with ports and labels. */
  detailMinPx: number;
  /** At or above this: simplified icon. */
  iconMinPx: number;
  /** At or above this: a bare dot.  Below: density shading. */
  dotMinPx: number;
  /** More visible modules than this forces density regardless of zoom. */
  maxVisibleGlyphs: number;
}

export const LOD_TABLE: LodTable = {
  glyphUnits: 1.0,
  detailMinPx: 24,
  iconMinPx: 8,
  dotMinPx: 2,
  maxVisibleGlyphs: 20000,
};

export function glyphPx(v: Viewport, table: LodTable = LOD_TABLE): number {
  return v.zoom * table.glyphUnits;
}

/**
 * Tier for a viewport.  The visible-count rule wins over glyph size;
 * size intervals are closed at the lower bound (exactly 8 px is icon).
 */
export function computeLod(v: Viewport, table: LodTable = LOD_TABLE): Tier {
  if (!validViewport(v)) {
    throw new RangeError(
      `invalid viewport: zoom=${v.zoom} visible=${v.visible} total=${v.total}`,
    );
  }
  if (v.visible > table.maxVisibleGlyphs) return "density";
  const px = glyphPx(v, table);
  if (px >= table.detailMinPx) return "detail";
  if (px >= table.iconMinPx) return "icon";
  if (px >= table.dotMinPx) return "dot";
  return "density";
}

export interface TierCapabilities {
  /** Rubber-band / click selection works on individual glyphs. */
  pointerSelect: boolean;
  /** Per-glyph kind distinction is drawn. */
  distinctGlyphs: boolean;
  /** Labels and ports are drawn next to glyphs. */
  showsDetail: boolean;
}

/** What direct manipulation each tier supports; pickers always work. */
export function tierCapabilities(tier: Tier): TierCapabilities {
  switch (tier) {
    case "detail":
      return { pointerSelect: true, distinctGlyphs: true, showsDetail: true };
    case "icon":
      return { pointerSelect: true, distinctGlyphs: true, showsDetail: false };
    case "dot":
      return { pointerSelect: true, distinctGlyphs: false, showsDetail: false };
    case "density":
      return { pointerSelect: false, distinctGlyphs: false, showsDetail: false };
  }
}
