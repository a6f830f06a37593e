import {
  CounterfactualKind,
  CounterfactualResponse,
  FactualResponse,
  NetworkSource,
  NetworkUploadResponse,
  Perturbation,
  RankResponse,
  SimilarSkillsResponse,
  TeamResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ProbeState {
  networkId: string;
  keywords: string[];
  k: number;
  rank: RankResponse;
  /** perturbations applied relative to the previous probe, for display */
  applied: Perturbation[];
}

/**
 * Thin client over the explanation service. Keeps a probe-history stack so
 * what-if explorations are undoable, and drops stale responses per panel so
 * the last request issued always wins.
 */
export class ApiClient {
  private history: ProbeState[] = [];
  private panelSeq = new Map<string, number>();

  constructor(private baseUrl: string = "", private fetchImpl: FetchLike = fetch) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      const detail = await res.text();
      throw new Error(`${path} failed (${res.status}): ${detail}`);
    }
    return res.json() as Promise<T>;
  }

  async uploadNetwork(source: NetworkSource): Promise<NetworkUploadResponse> {
    const form = new FormData();
    form.append("nodes", new Blob([source.nodes]), "nodes.tsv");
    form.append("edges", new Blob([source.edges]), "edges.tsv");
    form.append("skills", new Blob([source.skills]), "skills.tsv");
    const res = await this.fetchImpl(this.baseUrl + "/networks", {
      method: "POST",
      body: form,
    });
    if (!res.ok) throw new Error(`upload failed (${res.status})`);
    return res.json();
  }

  rank(networkId: string, keywords: string[], k: number): Promise<RankResponse> {
    return this.post("/rank", { network_id: networkId, keywords, k });
  }

  team(networkId: string, keywords: string[], seed: number): Promise<TeamResponse> {
    return this.post("/team", { network_id: networkId, keywords, seed });
  }

  explainFactual(
    networkId: string,
    keywords: string[],
    k: number,
    subject: number,
    facet: "skills" | "query" | "collaborations"
  ): Promise<FactualResponse> {
    return this.post("/explain/factual", {
      network_id: networkId,
      keywords,
      k,
      subject,
      facet,
    });
  }

  explainCounterfactual(
    networkId: string,
    keywords: string[],
    k: number,
    subject: number,
    kind: CounterfactualKind
  ): Promise<CounterfactualResponse> {
    return this.post("/explain/counterfactual", {
      network_id: networkId,
      keywords,
      k,
      subject,
      kind,
    });
  }

  async similarSkills(networkId: string, skill: string, t: number): Promise<SimilarSkillsResponse> {
    const res = await this.fetchImpl(
      `${this.baseUrl}/skills/similar?network_id=${networkId}&q=${encodeURIComponent(skill)}&t=${t}`
    );
    if (!res.ok) throw new Error(`similar skills failed (${res.status})`);
    return res.json();
  }

  // --- probe history -------------------------------------------------------

  pushProbe(state: ProbeState): void {
    this.history.push(state);
  }

  currentProbe(): ProbeState | undefined {
    return this.history[this.history.length - 1];
  }

  /** Pop the latest what-if probe; returns the state now on top, if any. */
  undoProbe(): ProbeState | undefined {
    if (this.history.length > 1) this.history.pop();
    return this.currentProbe();
  }

  historyDepth(): number {
    return this.history.length;
  }

  // --- latest-wins request tracking ---------------------------------------

  /**
   * Wrap an in-flight request for a panel. Resolves to null when a newer
   * request for the same panel was issued before this one settled.
   */
  async latest<T>(panel: string, work: Promise<T>): Promise<T | null> {
    const seq = (this.panelSeq.get(panel) ?? 0) + 1;
    this.panelSeq.set(panel, seq);
    const result = await work;
    return this.panelSeq.get(panel) === seq ? result : null;
  }
}
