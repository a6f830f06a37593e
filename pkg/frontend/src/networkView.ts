import { FactualResponse, RankResponse, TeamResponse } from "./types.js";
import { opacityForPhi, radiusForRank, signColor, theme } from "./theme.js";

export interface NodeMark {
  id: number;
  name: string;
  x: number;
  y: number;
  radius: number;
  rank: number;
  fill: string;
  outlined: boolean; // the explanation subject
}

export interface EdgeMark {
  source: number;
  target: number;
  phi: number | null; // null when the edge carries no attribution
  color: string;
  opacity: number;
}

export interface NetworkScene {
  nodes: NodeMark[];
  edges: EdgeMark[];
  width: number;
  height: number;
}

export interface NetworkViewInput {
  /** edges of the displayed slice, from the uploaded network source */
  edges: [number, number][];
  rank: RankResponse;
  subject?: number;
  /** collaboration-facet explanation supplying edge attributions */
  collab?: FactualResponse;
  team?: TeamResponse;
}

const SIZE = 480;
const LAYOUT_ITERATIONS = 120;

/**
 * Deterministic force-directed layout: nodes start on a circle in id order
 * and relax under spring/repulsion forces for a fixed iteration count, so a
 * fixed input always yields the same picture.
 */
export function layout(ids: number[], edges: [number, number][]): Map<number, [number, number]> {
  const pos = new Map<number, [number, number]>();
  const n = ids.length;
  ids.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(n, 1);
    pos.set(id, [
      SIZE / 2 + (SIZE / 3) * Math.cos(angle),
      SIZE / 2 + (SIZE / 3) * Math.sin(angle),
    ]);
  });
  const spring = 90;
  for (let it = 0; it < LAYOUT_ITERATIONS; it++) {
    const force = new Map<number, [number, number]>(ids.map((id) => [id, [0, 0]]));
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const [ax, ay] = pos.get(ids[i])!;
        const [bx, by] = pos.get(ids[j])!;
        const dx = ax - bx;
        const dy = ay - by;
        const d2 = Math.max(dx * dx + dy * dy, 1);
        const rep = 2000 / d2;
        const fa = force.get(ids[i])!;
        const fb = force.get(ids[j])!;
        fa[0] += dx * rep;
        fa[1] += dy * rep;
        fb[0] -= dx * rep;
        fb[1] -= dy * rep;
      }
    }
    for (const [u, v] of edges) {
      const pu = pos.get(u);
      const pv = pos.get(v);
      if (!pu || !pv) continue;
      const dx = pv[0] - pu[0];
      const dy = pv[1] - pu[1];
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const pull = 0.02 * (d - spring);
      const fu = force.get(u)!;
      const fv = force.get(v)!;
      fu[0] += (dx / d) * pull * d;
      fu[1] += (dy / d) * pull * d;
      fv[0] -= (dx / d) * pull * d;
      fv[1] -= (dy / d) * pull * d;
    }
    for (const id of ids) {
      const p = pos.get(id)!;
      const f = force.get(id)!;
      p[0] = clamp(p[0] + 0.05 * f[0], 10, SIZE - 10);
      p[1] = clamp(p[1] + 0.05 * f[1], 10, SIZE - 10);
    }
  }
  return pos;
}

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(Math.max(x, lo), hi);
}

function edgeKey(u: number, v: number): string {
  return u < v ? `${u}-${v}` : `${v}-${u}`;
}

export function buildNetworkScene(input: NetworkViewInput): NetworkScene {
  const byNode = new Map(input.rank.entries.map((e) => [e.node, e]));
  const ids = input.rank.entries.map((e) => e.node).sort((a, b) => a - b);
  const pos = layout(ids, input.edges);
  const n = ids.length;
  const members = new Set(input.team ? input.team.members : []);

  const nodes: NodeMark[] = ids.map((id) => {
    const entry = byNode.get(id)!;
    let fill = theme.colors.nodeFill;
    if (members.has(id)) fill = theme.colors.teamMember;
    else if (entry.relevant) fill = theme.colors.relevantFill;
    const [x, y] = pos.get(id)!;
    return {
      id,
      name: entry.name,
      x,
      y,
      radius: radiusForRank(entry.rank, n),
      rank: entry.rank,
      fill,
      outlined: id === input.subject,
    };
  });

  const phiByEdge = new Map<string, number>();
  if (input.collab) {
    for (const a of input.collab.attributions) {
      if (a.kind === "edge") phiByEdge.set(edgeKey(a.edge![0], a.edge![1]), a.phi);
    }
  }
  const maxAbs = Math.max(0, ...[...phiByEdge.values()].map(Math.abs));

  const edges: EdgeMark[] = input.edges.map(([u, v]) => {
    const phi = phiByEdge.get(edgeKey(u, v));
    if (phi === undefined) {
      return {
        source: u,
        target: v,
        phi: null,
        color: theme.colors.neutral,
        opacity: theme.network.baseEdgeOpacity,
      };
    }
    return {
      source: u,
      target: v,
      phi,
      color: signColor(phi),
      opacity: opacityForPhi(phi, maxAbs),
    };
  });

  return { nodes, edges, width: SIZE, height: SIZE };
}

export function renderNetworkSvg(scene: NetworkScene): string {
  const pos = new Map(scene.nodes.map((m) => [m.id, m]));
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}">`,
  ];
  for (const e of scene.edges) {
    const a = pos.get(e.source)!;
    const b = pos.get(e.target)!;
    parts.push(
      `<line x1="${r1(a.x)}" y1="${r1(a.y)}" x2="${r1(b.x)}" y2="${r1(b.y)}" ` +
        `stroke="${e.color}" stroke-opacity="${e.opacity.toFixed(3)}" stroke-width="2"/>`
    );
  }
  for (const m of scene.nodes) {
    const stroke = m.outlined ? ` stroke="${theme.colors.subjectOutline}" stroke-width="3"` : "";
    parts.push(
      `<circle cx="${r1(m.x)}" cy="${r1(m.y)}" r="${r1(m.radius)}" fill="${m.fill}"${stroke}>` +
        `<title>${m.name} (rank ${m.rank})</title></circle>`
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

function r1(x: number): string {
  return x.toFixed(1);
}
