import { CounterfactualResponse, Perturbation } from "./types.js";

export interface CfRow {
  index: number;
  label: string;
  size: number;
  newRank: number;
  flippedTo: boolean;
  perturbations: Perturbation[];
}

export interface CfPanelModel {
  kind: string;
  subject: number;
  rows: CfRow[];
  /** engine-supplied reason when no explanation exists */
  emptyReason?: string;
}

export function describePerturbation(p: Perturbation): string {
  switch (p.kind) {
    case "add_skill":
      return `add ${p.skill} to node ${p.node}`;
    case "remove_skill":
      return `remove ${p.skill} from node ${p.node}`;
    case "add_keyword":
      return `add keyword ${p.skill}`;
    case "add_edge":
      return `add edge (${p.edge![0]}, ${p.edge![1]})`;
    case "remove_edge":
      return `remove edge (${p.edge![0]}, ${p.edge![1]})`;
  }
}

/** Rows keep the service order (size first, then rank effect); the panel
 * never re-derives ranks. */
export function buildCfPanel(res: CounterfactualResponse): CfPanelModel {
  const rows = res.explanations.map((e, i) => ({
    index: i,
    label: `${e.perturbations.map(describePerturbation).join(" + ")} → rank ${e.new_rank}`,
    size: e.perturbations.length,
    newRank: e.new_rank,
    flippedTo: e.flipped_to,
    perturbations: e.perturbations,
  }));
  return {
    kind: res.kind,
    subject: res.subject,
    rows,
    emptyReason: rows.length === 0 ? res.reason ?? "no explanations found" : undefined,
  };
}

export function renderCfPanelHtml(model: CfPanelModel): string {
  if (model.rows.length === 0) {
    return `<div class="cf-empty">${model.emptyReason}</div>`;
  }
  const items = model.rows
    .map(
      (r) =>
        `<li class="cf-row" data-index="${r.index}">${r.label} ` +
        `<button class="cf-apply" data-index="${r.index}">apply</button></li>`
    )
    .join("");
  return `<ol class="cf-rows">${items}</ol>`;
}
