// Browser-safe surface; node hosts import transport/stdio.js directly.

export * from "./protocol.js";
export { SessionClient, ServiceCallError } from "./client.js";
export type { Transport, RequestLogEntry, ServicePort } from "./client.js";
export { WebSocketTransport } from "./transport/ws.js";
export type { WebSocketLike } from "./transport/ws.js";
export * from "./viewport.js";
export { LOD_TABLE, computeLod, glyphPx, tierCapabilities } from "./lod.js";
export type { Tier, LodTable, TierCapabilities } from "./lod.js";
export { ModelMirror } from "./mirror.js";
export type { ModuleInfo, LinkInfo } from "./mirror.js";
export { SelectionStore } from "./selection.js";
export type { PickerOutcome } from "./selection.js";
export { buildColumns, WaveChannel } from "./waveform.js";
export type { Column } from "./waveform.js";
export {
  MotionTrace,
  displacementOffsetPx,
  displacementColor,
} from "./motion.js";
export { SimulationView } from "./simview.js";
export type { SimLayout } from "./simview.js";
export { sanitizeNoteHtml, parseNoteLink } from "./notes.js";
export type { NoteAction } from "./notes.js";
export { EditQueue } from "./edits.js";
export { Workbench } from "./workbench.js";
export type {
  WorkbenchOptions,
  GlyphDraw,
  LinkDraw,
  DensityCell,
  SimProgress,
} from "./workbench.js";
