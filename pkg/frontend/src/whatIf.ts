import { ApiClient, ProbeState } from "./api.js";
import { NetworkSource, Perturbation } from "./types.js";

// nodes.tsv: "id\tname", edges.tsv: "u\tv", skills.tsv: "node\tskill"

function lines(text: string): string[] {
  return text.split("\n").filter((l) => l.length > 0);
}

function joinLines(ls: string[]): string {
  return ls.map((l) => l + "\n").join("");
}

function sameEdge(line: string, u: number, v: number): boolean {
  const [a, b] = line.split("\t").map(Number);
  return (a === u && b === v) || (a === v && b === u);
}

/** Apply graph perturbations to the raw TSV source; keyword perturbations
 * are returned separately since they only touch the query. */
export function perturbSource(
  source: NetworkSource,
  perturbations: Perturbation[]
): { source: NetworkSource; addedKeywords: string[]; networkChanged: boolean } {
  let skills = lines(source.skills);
  let edges = lines(source.edges);
  const addedKeywords: string[] = [];
  let networkChanged = false;
  for (const p of perturbations) {
    if (p.kind === "add_skill") {
      skills = [...skills, `${p.node}\t${p.skill}`];
      networkChanged = true;
    } else if (p.kind === "remove_skill") {
      skills = skills.filter((l) => l !== `${p.node}\t${p.skill}`);
      networkChanged = true;
    } else if (p.kind === "add_edge") {
      edges = [...edges, `${p.edge![0]}\t${p.edge![1]}`];
      networkChanged = true;
    } else if (p.kind === "remove_edge") {
      edges = edges.filter((l) => !sameEdge(l, p.edge![0], p.edge![1]));
      networkChanged = true;
    } else {
      addedKeywords.push(p.skill!);
    }
  }
  return {
    source: { nodes: source.nodes, edges: joinLines(edges), skills: joinLines(skills) },
    addedKeywords,
    networkChanged,
  };
}

/**
 * Install a counterfactual's perturbation set as a fresh probe: graph edits
 * are re-submitted as a new network upload, keyword additions extend the
 * query draft, and the resulting /rank response is pushed on the probe
 * history. The flipped status shown afterwards comes entirely from that
 * response.
 */
export async function applyWhatIf(
  client: ApiClient,
  source: NetworkSource,
  base: ProbeState,
  perturbations: Perturbation[]
): Promise<{ state: ProbeState; source: NetworkSource }> {
  const { source: next, addedKeywords, networkChanged } = perturbSource(source, perturbations);
  let networkId = base.networkId;
  if (networkChanged) {
    const uploaded = await client.uploadNetwork(next);
    networkId = uploaded.network_id;
  }
  const keywords = [...base.keywords, ...addedKeywords];
  const rank = await client.rank(networkId, keywords, base.k);
  const state: ProbeState = {
    networkId,
    keywords,
    k: base.k,
    rank,
    applied: perturbations,
  };
  client.pushProbe(state);
  return { state, source: next };
}
