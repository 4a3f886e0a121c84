/**
 * The workbench viewport: where the camera is, how far it is zoomed,
 * and how many modules it can currently see.
 *
 * `zoom` is pixels per workbench unit.  Module glyphs are laid out on a
 * nominal 1x1 workbench-unit footprint, so `zoom` is also the on-screen
 * glyph size in pixels; the representation tiers key off that.
 */

export interface Viewport {
  centerX: number;
  centerY: number;
  /** Pixels per workbench unit; must be > 0. */
  zoom: number;
  /** Modules inside the visible world rectangle. */
  visible: number;
  /** Modules in the whole model. */
  total: number;
}

export interface WorldRect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export const MIN_ZOOM = 1e-3;
export const MAX_ZOOM = 1e4;

export function validViewport(v: Viewport): boolean {
  return (
    Number.isFinite(v.centerX) &&
    Number.isFinite(v.centerY) &&
    Number.isFinite(v.zoom) &&
    v.zoom > 0 &&
    Number.isInteger(v.visible) &&
    Number.isInteger(v.total) &&
    v.visible >= 0 &&
    v.visible <= v.total
  );
}

export function worldToScreen(
  v: Viewport,
  wx: number,
  wy: number,
  widthPx: number,
  heightPx: number,
): { x: number; y: number } {
  return {
    x: widthPx / 2 + (wx - v.centerX) * v.zoom,
    y: heightPx / 2 + (wy - v.centerY) * v.zoom,
  };
}

export function screenToWorld(
  v: Viewport,
  px: number,
  py: number,
  widthPx: number,
  heightPx: number,
): { x: number; y: number } {
  return {
    x: v.centerX + (px - widthPx / 2) / v.zoom,
    y: v.centerY + (py - heightPx / 2) / v.zoom,
  };
}

export function visibleRect(v: Viewport, widthPx: number, heightPx: number): WorldRect {
  const halfW = widthPx / 2 / v.zoom;
  const halfH = heightPx / 2 / v.zoom;
  return {
    x0: v.centerX - halfW,
    y0: v.centerY - halfH,
    x1: v.centerX + halfW,
    y1: v.centerY + halfH,
  };
}

export function rectContains(r: WorldRect, x: number, y: number): boolean {
  return x >= r.x0 && x <= r.x1 && y >= r.y0 && y <= r.y1;
}

/** Pan by a screen-space delta (drag follows the pointer). */
export function pan(v: Viewport, dxPx: number, dyPx: number): Viewport {
  return { ...v, centerX: v.centerX - dxPx / v.zoom, centerY: v.centerY - dyPx / v.zoom };
}

/**
 * Zoom by `factor` keeping the world point under the given screen pixel
 * fixed, which is what wheel-zoom at the cursor needs.
 */
export function zoomAt(
  v: Viewport,
  factor: number,
  anchorPx: number,
  anchorPy: number,
  widthPx: number,
  heightPx: number,
): Viewport {
  const zoom = Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, v.zoom * factor));
  const before = screenToWorld(v, anchorPx, anchorPy, widthPx, heightPx);
  const moved = { ...v, zoom };
  const after = screenToWorld(moved, anchorPx, anchorPy, widthPx, heightPx);
  return {
    ...moved,
    centerX: moved.centerX + (before.x - after.x),
    centerY: moved.centerY + (before.y - after.y),
  };
}

/** Count positions inside the rect; the caller feeds mirror positions. */
export function countVisible(
  positions: Iterable<{ x: number; y: number }>,
  rect: WorldRect,
): number {
  let n = 0;
  for (const p of positions) {
    if (rectContains(rect, p.x, p.y)) n++;
  }
  return n;
}

/** Fit the viewport to a bounding box of positions with a pixel margin. */
export function fitToContent(
  positions: { x: number; y: number }[],
  widthPx: number,
  heightPx: number,
  marginPx = 40,
): Viewport {
  if (positions.length === 0) {
    return { centerX: 0, centerY: 0, zoom: 32, visible: 0, total: 0 };
  }
  let x0 = Infinity, y0 = Infinity, x1 = -Infinity, y1 = -Infinity;
  for (const p of positions) {
    x0 = Math.min(x0, p.x); y0 = Math.min(y0, p.y);
    x1 = Math.max(x1, p.x); y1 = Math.max(y1, p.y);
  }
  const spanX = Math.max(x1 - x0, 1e-9);
  const spanY = Math.max(y1 - y0, 1e-9);
  const zoom = Math.min(
    MAX_ZOOM,
    Math.max(
      MIN_ZOOM,
      Math.min((widthPx - 2 * marginPx) / spanX, (heightPx - 2 * marginPx) / spanY),
    ),
  );
  return {
    centerX: (x0 + x1) / 2,
    centerY: (y0 + y1) / 2,
    zoom,
    visible: positions.length,
    total: positions.length,
  };
}
