import { ApiClient, ProbeState } from "./api.js";
import { buildCfPanel, renderCfPanelHtml } from "./cfPanel.js";
import { buildForcePlot, renderForcePlotSvg } from "./forcePlot.js";
import { buildNetworkScene, renderNetworkSvg } from "./networkView.js";
import { CounterfactualKind, NetworkSource } from "./types.js";
import { applyWhatIf } from "./whatIf.js";

const client = new ApiClient("");

interface UiState {
  source: NetworkSource | null;
  subject: number | null;
  facet: "skills" | "query" | "collaborations";
  kind: CounterfactualKind;
}

const state: UiState = { source: null, subject: null, facet: "skills", kind: "skill-add" };

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function edgesOf(source: NetworkSource): [number, number][] {
  return source.edges
    .split("\n")
    .filter((l) => l.length > 0)
    .map((l) => l.split("\t").map(Number) as [number, number]);
}

function renderRank(probe: ProbeState) {
  if (!state.source) return;
  const scene = buildNetworkScene({
    edges: edgesOf(state.source),
    rank: probe.rank,
    subject: state.subject ?? undefined,
  });
  el("network").innerHTML = renderNetworkSvg(scene);
  const rows = probe.rank.entries
    .map(
      (e) =>
        `<tr class="${e.relevant ? "relevant" : ""}" data-node="${e.node}">` +
        `<td>${e.rank}</td><td>${e.name}</td><td>${e.score.toFixed(4)}</td></tr>`
    )
    .join("");
  el("ranking").innerHTML = `<table><tr><th>rank</th><th>name</th><th>score</th></tr>${rows}</table>`;
  el("undo").toggleAttribute("disabled", client.historyDepth() <= 1);
}

async function runQuery() {
  if (!state.source) return;
  const keywords = el<HTMLInputElement>("keywords").value.split(",").map((s) => s.trim());
  const k = Number(el<HTMLInputElement>("topk").value) || 10;
  const uploaded = await client.uploadNetwork(state.source);
  const rank = await client.latest("rank", client.rank(uploaded.network_id, keywords, k));
  if (rank === null) return; // superseded by a newer query
  const probe: ProbeState = {
    networkId: uploaded.network_id,
    keywords,
    k,
    rank,
    applied: [],
  };
  client.pushProbe(probe);
  renderRank(probe);
}

async function explain() {
  const probe = client.currentProbe();
  if (!probe || state.subject === null) return;
  const factual = await client.latest(
    "factual",
    client.explainFactual(probe.networkId, probe.keywords, probe.k, state.subject, state.facet)
  );
  if (factual) {
    el("forceplot").innerHTML = renderForcePlotSvg(buildForcePlot(factual));
    if (state.facet === "collaborations" && state.source) {
      const scene = buildNetworkScene({
        edges: edgesOf(state.source),
        rank: probe.rank,
        subject: state.subject,
        collab: factual,
      });
      el("network").innerHTML = renderNetworkSvg(scene);
    }
  }
  const cf = await client.latest(
    "cf",
    client
      .explainCounterfactual(probe.networkId, probe.keywords, probe.k, state.subject, state.kind)
      .catch((err) => ({
        subject: state.subject!,
        kind: state.kind,
        explanations: [],
        reason: String(err),
      }))
  );
  if (cf) {
    const model = buildCfPanel(cf);
    el("cfpanel").innerHTML = renderCfPanelHtml(model);
    el("cfpanel").querySelectorAll<HTMLButtonElement>(".cf-apply").forEach((btn) =>
      btn.addEventListener("click", async () => {
        const row = model.rows[Number(btn.dataset.index)];
        if (!state.source) return;
        const applied = await applyWhatIf(client, state.source, probe, row.perturbations);
        state.source = applied.source;
        renderRank(applied.state);
      })
    );
  }
}

function wire() {
  el("run").addEventListener("click", () => void runQuery());
  el("explain").addEventListener("click", () => void explain());
  el("undo").addEventListener("click", () => {
    const prev = client.undoProbe();
    if (prev) renderRank(prev);
  });
  el<HTMLSelectElement>("facet").addEventListener("change", (ev) => {
    state.facet = (ev.target as HTMLSelectElement).value as UiState["facet"];
  });
  el<HTMLSelectElement>("kind").addEventListener("change", (ev) => {
    state.kind = (ev.target as HTMLSelectElement).value as CounterfactualKind;
  });
  el("ranking").addEventListener("click", (ev) => {
    const row = (ev.target as HTMLElement).closest("tr[data-node]");
    if (row) state.subject = Number((row as HTMLElement).dataset.node);
  });
  el<HTMLInputElement>("files").addEventListener("change", async (ev) => {
    const files = (ev.target as HTMLInputElement).files;
    if (!files || files.length !== 3) return;
    const byName = new Map<string, string>();
    for (const f of Array.from(files)) byName.set(f.name, await f.text());
    state.source = {
      nodes: byName.get("nodes.tsv") ?? "",
      edges: byName.get("edges.tsv") ?? "",
      skills: byName.get("skills.tsv") ?? "",
    };
  });
}

document.addEventListener("DOMContentLoaded", wire);
