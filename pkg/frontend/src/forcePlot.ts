import { Attribution, FactualResponse } from "./types.js";
import { signColor, theme } from "./theme.js";

export interface ForceSegment {
  label: string;
  phi: number;
  color: string;
  /** pixel length, proportional to |phi| */
  length: number;
  /** pixel offset of the segment start inside the bar */
  start: number;
}

export interface ForcePlotScene {
  baseValue: number;
  outValue: number;
  segments: ForceSegment[];
  /** true when every attribution is zero; render a flat bar plus notice */
  flat: boolean;
  notice?: string;
}

export function attributionLabel(a: Attribution): string {
  if (a.kind === "node_skill") return `${a.skill} @ node ${a.node}`;
  if (a.kind === "edge") return `edge (${a.edge![0]}, ${a.edge![1]})`;
  return `keyword ${a.skill}`;
}

/**
 * Deterministic force-plot layout: positive attributions (pushing the value
 * from the base toward the output) first, largest first, then negative ones,
 * largest magnitude first. Pixel lengths are proportional to |phi|.
 */
export function buildForcePlot(expl: FactualResponse): ForcePlotScene {
  const base = expl.value_empty;
  const out = expl.value_full;
  const totalAbs = expl.attributions.reduce((acc, a) => acc + Math.abs(a.phi), 0);
  if (totalAbs === 0) {
    return {
      baseValue: base,
      outValue: out,
      segments: [],
      flat: true,
      notice: "all attributions are zero",
    };
  }

  const positives = expl.attributions.filter((a) => a.phi > 0);
  const negatives = expl.attributions.filter((a) => a.phi < 0);
  positives.sort((a, b) => b.phi - a.phi || cmp(attributionLabel(a), attributionLabel(b)));
  negatives.sort(
    (a, b) => Math.abs(b.phi) - Math.abs(a.phi) || cmp(attributionLabel(a), attributionLabel(b))
  );

  const scale = theme.forcePlot.width / totalAbs;
  const segments: ForceSegment[] = [];
  let cursor = 0;
  for (const a of [...positives, ...negatives]) {
    const length = Math.max(Math.abs(a.phi) * scale, theme.forcePlot.minSegmentPx);
    segments.push({
      label: attributionLabel(a),
      phi: a.phi,
      color: signColor(a.phi),
      length,
      start: cursor,
    });
    cursor += length;
  }
  return { baseValue: base, outValue: out, segments, flat: false };
}

function cmp(a: string, b: string): number {
  return a < b ? -1 : a > b ? 1 : 0;
}

export function renderForcePlotSvg(scene: ForcePlotScene): string {
  const h = theme.forcePlot.barHeight;
  const w = theme.forcePlot.width;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${w}" height="${h + 40}">`,
    `<text x="0" y="12" class="fp-base">base ${fmt(scene.baseValue)}</text>`,
    `<text x="${w}" y="12" text-anchor="end" class="fp-out">f(x) ${fmt(scene.outValue)}</text>`,
  ];
  if (scene.flat) {
    parts.push(
      `<rect x="0" y="20" width="${w}" height="${h}" fill="${theme.colors.neutral}"/>`,
      `<text x="${w / 2}" y="${20 + h + 14}" text-anchor="middle">${scene.notice}</text>`
    );
  } else {
    for (const s of scene.segments) {
      parts.push(
        `<rect x="${fmt(s.start)}" y="20" width="${fmt(s.length)}" height="${h}" ` +
          `fill="${s.color}"><title>${s.label}: ${fmt(s.phi)}</title></rect>`
      );
    }
  }
  parts.push("</svg>");
  return parts.join("");
}

function fmt(x: number): string {
  return Number.isInteger(x) ? String(x) : x.toFixed(4);
}
