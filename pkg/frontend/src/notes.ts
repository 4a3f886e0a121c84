/**
 * Bench notes: HTML annotations pinned to the workbench.  They render
 * through a strict allowlist sanitizer, and their "pnet:" hyperlinks
 * carry application actions (select / goto / run) that the workbench
 * dispatches through the service; every other scheme opens externally.
 */

const ALLOWED_TAGS = new Set([
  "a", "b", "i", "em", "strong", "u", "s", "p", "br", "hr",
  "ul", "ol", "li", "h1", "h2", "h3", "h4", "code", "pre",
  "blockquote", "span", "div", "table", "tr", "td", "th",
]);

/** Tags whose entire content is dropped, not just the markers. */
const DROPPED_CONTENT = new Set(["script", "style", "iframe", "object", "embed"]);

const SAFE_HREF = /^(pnet:|https?:|mailto:)/i;

const TAG_RE = /<\/?([a-zA-Z][a-zA-Z0-9]*)((?:[^>"']|"[^"]*"|'[^']*')*?)\/?>/g;
const HREF_RE = /\bhref\s*=\s*("([^"]*)"|'([^']*)'|([^\s>]+))/i;
const TITLE_RE = /\btitle\s*=\s*("([^"]*)"|'([^']*)')/i;

function attrValue(match: RegExpMatchArray): string {
  return match[2] ?? match[3] ?? match[4] ?? "";
}

/**
 * Reduce note HTML to the allowlist.  Unknown tags lose their markers
 * but keep their text; script-like elements lose everything; the only
 * attributes that survive are a safe href and a title.
 */
export function sanitizeNoteHtml(html: string): string {
  let out = "";
  let pos = 0;
  let dropUntil: string | null = null;
  TAG_RE.lastIndex = 0;
  let m: RegExpExecArray | null;
  while ((m = TAG_RE.exec(html)) !== null) {
    const [raw, nameRaw, attrs] = m;
    const name = nameRaw.toLowerCase();
    const closing = raw.startsWith("</");
    if (dropUntil !== null) {
      if (closing && name === dropUntil) dropUntil = null;
      pos = m.index + raw.length;
      continue;
    }
    out += html.slice(pos, m.index);
    pos = m.index + raw.length;
    if (DROPPED_CONTENT.has(name)) {
      if (!closing) dropUntil = name;
      continue;
    }
    if (!ALLOWED_TAGS.has(name)) continue;
    if (closing) {
      out += `</${name}>`;
      continue;
    }
    let rebuilt = `<${name}`;
    if (name === "a") {
      const href = attrs.match(HREF_RE);
      if (href && SAFE_HREF.test(attrValue(href).trim())) {
        rebuilt += ` href="${attrValue(href).trim().replace(/"/g, "&quot;")}"`;
      }
    }
    const title = attrs.match(TITLE_RE);
    if (title) {
      rebuilt += ` title="${attrValue(title).replace(/"/g, "&quot;")}"`;
    }
    out += rebuilt + (name === "br" || name === "hr" ? "/>" : ">");
  }
  if (dropUntil === null) out += html.slice(pos);
  return out;
}

export type NoteAction =
  | { kind: "select"; picker: string }
  | { kind: "goto"; x: number; y: number; zoom: number | null }
  | { kind: "run"; script: string }
  | { kind: "external"; url: string };

/**
 * Decode a note hyperlink.  pnet: links map to workbench actions:
 *
 *   pnet:select?picker=/string/**     select by picker
 *   pnet:goto?x=4&y=0&zoom=32        move the viewport
 *   pnet:run?script=sim%20run        run a script line
 *
 * Anything else is handed to the host to open externally.  Returns
 * null for a pnet: link that does not decode to an action.
 */
export function parseNoteLink(href: string): NoteAction | null {
  let url: URL;
  try {
    url = new URL(href);
  } catch {
    return null;
  }
  if (url.protocol !== "pnet:") {
    return { kind: "external", url: href };
  }
  const verb = url.pathname.split("?")[0];
  const params = url.searchParams;
  switch (verb) {
    case "select": {
      const picker = params.get("picker");
      return picker ? { kind: "select", picker } : null;
    }
    case "goto": {
      const x = Number(params.get("x"));
      const y = Number(params.get("y"));
      if (!Number.isFinite(x) || !Number.isFinite(y)) return null;
      const zoomText = params.get("zoom");
      const zoom = zoomText === null ? null : Number(zoomText);
      if (zoom !== null && !(Number.isFinite(zoom) && zoom > 0)) return null;
      return { kind: "goto", x, y, zoom };
    }
    case "run": {
      const script = params.get("script");
      return script ? { kind: "run", script } : null;
    }
    default:
      return null;
  }
}
