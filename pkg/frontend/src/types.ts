// Mirrors the service JSON schemas verbatim. The client never derives phi
// values or ranks itself; every number shown on screen comes from one of
// these payloads.

export interface NetworkUploadResponse {
  network_id: string;
  n_nodes: number;
  n_edges: number;
  n_skills: number;
}

export interface RankEntry {
  node: number;
  name: string;
  score: number;
  rank: number;
  relevant: boolean;
}

export interface RankResponse {
  k: number;
  entries: RankEntry[];
}

export interface TeamResponse {
  members: number[];
  seed_member: number;
  covered: string[];
  join_order: number[];
  fully_covered: boolean;
}

// attribution feature kinds mirror the factual explanation encoding
export interface Attribution {
  kind: "node_skill" | "edge" | "query_keyword";
  node?: number;
  skill?: string;
  edge?: [number, number];
  phi: number;
}

export interface FactualResponse {
  subject: number;
  mode: "search" | "team";
  value_full: number;
  value_empty: number;
  exact: boolean;
  attributions: Attribution[];
}

export interface Perturbation {
  kind: "add_skill" | "remove_skill" | "add_keyword" | "add_edge" | "remove_edge";
  node?: number;
  skill?: string;
  edge?: [number, number];
}

export interface CounterfactualExplanation {
  perturbations: Perturbation[];
  new_rank: number;
  flipped_to: boolean;
}

export interface CounterfactualResponse {
  subject: number;
  kind: string;
  explanations: CounterfactualExplanation[];
  reason?: string;
}

export interface SimilarSkillsResponse {
  skills: string[];
}

export interface JobResponse {
  job_id: string;
  status: "running" | "done" | "error";
  result?: unknown;
  error?: string;
}

export type CounterfactualKind =
  | "skill-add"
  | "skill-rm"
  | "query-promote"
  | "query-demote"
  | "link-add"
  | "link-rm";

/** Raw TSV triple a network was uploaded from; kept so what-if overlays can
 * be re-submitted as a fresh network. */
export interface NetworkSource {
  nodes: string;
  edges: string;
  skills: string;
}
