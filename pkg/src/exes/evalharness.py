"""Exhaustive baselines, precision metrics, and the desk-scale evaluation protocol.

The oracle for counterfactual quality is size-ordered subset enumeration with
memoized probes; factual baselines rerun Shapley over the unpruned feature
set.  ``run_protocol`` emits a deterministic report (CSV + JSON) plus a
wall-clock timings sidecar and rendered figures.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import factual
from .corpus import EMPTY_OVERLAY, CollaborationNetwork, Query, neighborhood
from .counterfactual import (
    BeamParams,
    CounterfactualExplanation,
    KINDS,
    add_edge,
    add_keyword,
    add_skill,
    explain_counterfactual,
    probe_with,
    remove_edge,
    remove_skill,
)
from .embedding import SkillEmbedding, fit_embedding, top_similar
from .engine import Probe
from .errors import (
    DirectionMismatch,
    ExplanationTimeout,
    InsufficientPopulation,
    NoCandidates,
    OracleUnavailable,
)
from .factual import STATUS, FactualExplanation, ValueFunction, shapley_values


@dataclass(frozen=True)
class EvalConfig:
    n_queries: int = 10
    keywords_min: int = 3
    keywords_max: int = 5
    k: int = 10
    timeout_seconds: float = 1000.0
    params: BeamParams = field(default_factory=BeamParams)
    seed: int = 0
    mc_samples: int = 32  # permutation count when feature sets exceed the exact threshold

    def __post_init__(self):
        if self.keywords_min > self.keywords_max:
            raise ValueError("keywords_min must not exceed keywords_max")
        if min(self.n_queries, self.keywords_min, self.k) < 1 or self.timeout_seconds < 0:
            raise ValueError("config values must be positive")


class _DeadlineProbe:
    """Probe proxy that aborts with ExplanationTimeout past a wall-clock deadline."""

    def __init__(self, probe: Probe, deadline: float):
        self._probe = probe
        self._deadline = deadline

    def _check(self):
        if time.monotonic() > self._deadline:
            raise ExplanationTimeout("probe budget exhausted")

    def __getattr__(self, name):
        return getattr(self._probe, name)

    def status(self, overlay, q, subject):
        self._check()
        return self._probe.status(overlay, q, subject)

    def rank_list(self, overlay, q):
        self._check()
        return self._probe.rank_list(overlay, q)


def with_timeout(probe: Probe, timeout_seconds: float):
    return _DeadlineProbe(probe, time.monotonic() + timeout_seconds)


def exhaustive_factual(
    probe: Probe,
    q: Query,
    subject: int,
    feature_scope: str = "full",
    vf: ValueFunction = STATUS,
    d: int = 2,
    timeout_seconds: float = 1000.0,
    **shapley_kwargs,
) -> FactualExplanation:
    """Shapley over every feature in scope, with no pruning."""
    base = probe.base
    base.check_node(subject)
    if feature_scope == "full":
        nodes = list(base.node_ids())
        edges = sorted(base.edges)
    elif feature_scope == "neighborhood":
        hood = neighborhood(base, subject, d)
        nodes = sorted(hood)
        edges = sorted(e for e in base.edges if e[0] in hood and e[1] in hood)
    else:
        raise ValueError(f"unknown feature scope {feature_scope!r}")
    features = (
        [factual.node_skill(u, s) for u in nodes for s in sorted(base.skills_of[u])]
        + [factual.edge_feature(*e) for e in edges]
        + [factual.query_keyword(s) for s in q.keywords]
    )
    return shapley_values(
        with_timeout(probe, timeout_seconds), q, subject, features, vf, **shapley_kwargs
    )


@dataclass
class OracleResult:
    """Outcome of size-ordered exhaustive counterfactual enumeration."""

    minimal_size: int | None
    explanations: list[CounterfactualExplanation]
    complete: bool


def _candidate_universe(
    probe: Probe,
    q: Query,
    subject: int,
    kind: str,
    variant: str,
    emb: SkillEmbedding | None,
    t: int,
    d: int,
):
    base = probe.base
    universe = sorted(base.skill_universe)
    if kind in ("skill-add", "skill-rm"):
        if variant == "full":
            nodes = list(base.node_ids())
            skills = universe
        elif variant == "exhaustive_neighborhood":
            nodes = list(base.node_ids())
            skills = top_similar(emb, q.keywords, exclude=frozenset(), t=t)
        elif variant == "exhaustive_skills":
            nodes = sorted(neighborhood(base, subject, d))
            skills = universe
        else:
            raise ValueError(f"unknown variant {variant!r}")
        if kind == "skill-add":
            return [add_skill(u, s) for u in nodes for s in skills if s not in base.skills_of[u]]
        allowed = set(skills)
        return [
            remove_skill(u, s)
            for u in nodes
            for s in sorted(base.skills_of[u])
            if s in allowed
        ]
    if kind in ("query-promote", "query-demote"):
        kw = q.keyword_set()
        return [add_keyword(s) for s in universe if s not in kw]
    if kind == "link-add":
        n = base.n_nodes
        return [
            add_edge(u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if not base.has_edge(u, v)
        ]
    if kind == "link-rm":
        return [remove_edge(*e) for e in sorted(base.edges)]
    raise ValueError(f"unknown counterfactual kind {kind!r}")


def exhaustive_counterfactual(
    probe: Probe,
    q: Query,
    subject: int,
    kind: str,
    gamma: int = 5,
    variant: str = "full",
    emb: SkillEmbedding | None = None,
    t: int = 10,
    d: int = 1,
    timeout_seconds: float = 1000.0,
) -> OracleResult:
    """Enumerate perturbation subsets by increasing size; return all flips of
    the first size that yields any (the minimal size)."""
    base = probe.base
    base.check_node(subject)
    universe = _candidate_universe(probe, q, subject, kind, variant, emb, t, d)
    _, initial_status = probe.initial_status(q, subject)
    deadline = time.monotonic() + timeout_seconds

    found: list[CounterfactualExplanation] = []
    for size in range(1, gamma + 1):
        for combo in itertools.combinations(universe, size):
            if time.monotonic() > deadline:
                return OracleResult(
                    minimal_size=size if found else None,
                    explanations=found,
                    complete=False,
                )
            rank, status = probe_with(probe, q, subject, combo)
            if status != initial_status:
                found.append(
                    CounterfactualExplanation(frozenset(combo), new_rank=rank, flipped_to=status)
                )
        if found:
            return OracleResult(minimal_size=size, explanations=found, complete=True)
    return OracleResult(minimal_size=None, explanations=[], complete=True)


def precision_at_k(pruned: FactualExplanation, exhaustive: FactualExplanation, k: int) -> float:
    """Fraction of the pruned top-k identified (nonzero) features that are
    nonzero in the exhaustive run."""
    identified = pruned.nonzero_features(tol=1e-12)
    top = [f for f in pruned.top_features(k) if f in identified]
    if not top:
        return 0.0
    nonzero = exhaustive.nonzero_features(tol=1e-12)
    denom = min(k, len(identified))
    return sum(1 for f in top if f in nonzero) / denom


def precision_counterfactual(
    pruned: list[CounterfactualExplanation], oracle_minimal_size: int | None
) -> tuple[float, float]:
    if oracle_minimal_size is None:
        raise OracleUnavailable("oracle found no explanations or timed out")
    if not pruned:
        return 0.0, 0.0
    exact = sum(1 for e in pruned if e.size() == oracle_minimal_size) / len(pruned)
    star = sum(1 for e in pruned if e.size() <= oracle_minimal_size + 1) / len(pruned)
    return exact, star


@dataclass
class EvalReport:
    config: dict
    rows: list[dict]

    CSV_COLUMNS = (
        "method",
        "n_instances",
        "n_explanations_exes",
        "n_explanations_baseline",
        "mean_size_exes",
        "mean_size_baseline",
        "precision_at_1",
        "precision_at_5",
        "precision",
        "precision_star",
        "probes_exes",
        "probes_baseline",
        "incomplete_baselines",
    )

    @staticmethod
    def _cell(value) -> str:
        if value is None:
            return "n/a"
        if isinstance(value, float):
            return f"{value:.6f}"
        return str(value)

    def to_csv(self) -> str:
        lines = [",".join(self.CSV_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(self._cell(row.get(col)) for col in self.CSV_COLUMNS))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        def default(o):
            raise TypeError(o)

        def fmt(value):
            if isinstance(value, float):
                return round(value, 6)
            return value

        payload = {
            "config": self.config,
            "rows": [{k: fmt(v) for k, v in row.items()} for row in self.rows],
        }
        return json.dumps(payload, sort_keys=True, indent=2, default=default) + "\n"


def _sample_queries(net: CollaborationNetwork, config: EvalConfig, rng: random.Random) -> list[Query]:
    universe = sorted(net.skill_universe)
    if len(universe) < config.keywords_min:
        raise InsufficientPopulation("skill universe smaller than keywords_min")
    queries = []
    for _ in range(config.n_queries):
        count = rng.randint(config.keywords_min, min(config.keywords_max, len(universe)))
        queries.append(Query(keywords=tuple(rng.sample(universe, count)), k=config.k))
    return queries


def _mean(values) -> float | None:
    values = list(values)
    return sum(values) / len(values) if values else None


def run_protocol(net: CollaborationNetwork, config: EvalConfig):
    """Run every explanation method and its baseline over seeded instances.

    Returns (EvalReport, timings) where timings maps method name to mean
    wall-clock seconds for the pruned and baseline runs.  Wall-clock numbers
    live outside the report so the report itself is reproducible byte-for-byte.
    """
    rng = random.Random(config.seed)
    if net.n_nodes < 2 * config.k:
        raise InsufficientPopulation("network too small to sample experts and non-experts")
    queries = _sample_queries(net, config, rng)
    emb = fit_embedding(net, dimension=min(16, len(net.skill_universe)))
    params = config.params

    # (query, expert-subject, non-expert-subject) triples
    instances = []
    for q in queries:
        ranking = Probe(net).rank_list(EMPTY_OVERLAY, q)
        top = ranking.top(config.k)
        mid = ranking.top(2 * config.k)[config.k :]
        instances.append((q, rng.choice(top), rng.choice(mid)))

    rows: list[dict] = []
    timings: dict[str, dict[str, float]] = {}

    def add_row(method, **kw):
        row = {"method": method, "n_instances": len(instances)}
        row.update(kw)
        rows.append(row)

    # Factual methods: pruned vs full-scope exhaustive.
    factual_specs = [
        ("factual-skills-experts", "skills", True),
        ("factual-skills-nonexperts", "skills", False),
        ("factual-query-experts", "query", True),
        ("factual-collab-experts", "collab", True),
    ]
    for method, facet, use_expert in factual_specs:
        t_exes, t_base = [], []
        sizes_e, sizes_b = [], []
        p1s, p5s = [], []
        probes_e = probes_b = 0
        incomplete = 0
        for q, expert, nonexpert in instances:
            subject = expert if use_expert else nonexpert
            probe = Probe(net)
            kwargs = dict(
                exact_threshold=factual.EXACT_THRESHOLD,
                samples=config.mc_samples,
                seed=config.seed,
            )
            start = time.perf_counter()
            if facet == "skills":
                pruned = factual.explain_skills(probe, q, subject, d=1, **kwargs)
            elif facet == "query":
                pruned = factual.explain_query(probe, q, subject, **kwargs)
            else:
                pruned = factual.explain_collaborations(probe, q, subject, d=2, tau=0.1, **kwargs)
            t_exes.append(time.perf_counter() - start)
            probes_mark = probe.probe_count
            probes_e += probes_mark
            sizes_e.append(len(pruned.nonzero_features(1e-12)))

            if facet == "query":
                continue  # no pruning applies; the baseline is identical
            start = time.perf_counter()
            try:
                full = exhaustive_factual(
                    probe, q, subject, feature_scope="full",
                    timeout_seconds=config.timeout_seconds, **kwargs,
                )
            except ExplanationTimeout:
                incomplete += 1
                t_base.append(time.perf_counter() - start)
                continue
            t_base.append(time.perf_counter() - start)
            probes_b += probe.probe_count - probes_mark
            sizes_b.append(len(full.nonzero_features(1e-12)))
            p1s.append(precision_at_k(pruned, full, 1))
            p5s.append(precision_at_k(pruned, full, 5))
        add_row(
            method,
            n_explanations_exes=len(sizes_e),
            n_explanations_baseline=len(sizes_b) if facet != "query" else None,
            mean_size_exes=_mean(sizes_e),
            mean_size_baseline=_mean(sizes_b) if facet != "query" else None,
            precision_at_1=_mean(p1s) if facet != "query" else None,
            precision_at_5=_mean(p5s) if facet != "query" else None,
            precision=None,
            precision_star=None,
            probes_exes=probes_e,
            probes_baseline=probes_b if facet != "query" else None,
            incomplete_baselines=incomplete if facet != "query" else None,
        )
        timings[method] = {
            "mean_latency_exes": _mean(t_exes) or 0.0,
            "mean_latency_baseline": _mean(t_base) or 0.0,
        }

    # Counterfactual methods: beam vs exhaustive oracle.
    for kind in KINDS:
        use_expert = kind not in ("skill-add", "query-promote", "link-add")
        t_exes, t_base = [], []
        sizes_e, sizes_b = [], []
        precisions, stars = [], []
        n_expl_e = n_expl_b = 0
        probes_e = probes_b = 0
        incomplete = 0
        for q, expert, nonexpert in instances:
            subject = expert if use_expert else nonexpert
            probe = Probe(net)
            start = time.perf_counter()
            try:
                pruned = explain_counterfactual(
                    probe, q, subject, kind, params=params, emb=emb
                )
            except (NoCandidates, DirectionMismatch):
                pruned = []
            t_exes.append(time.perf_counter() - start)
            probes_mark = probe.probe_count
            probes_e += probes_mark
            n_expl_e += len(pruned)
            sizes_e.extend(e.size() for e in pruned)

            start = time.perf_counter()
            oracle = exhaustive_counterfactual(
                probe, q, subject, kind, gamma=params.gamma,
                emb=emb, t=params.t, timeout_seconds=config.timeout_seconds,
            )
            t_base.append(time.perf_counter() - start)
            probes_b += probe.probe_count - probes_mark
            if not oracle.complete:
                incomplete += 1
            n_expl_b += len(oracle.explanations)
            sizes_b.extend(e.size() for e in oracle.explanations)
            if pruned and oracle.complete and oracle.minimal_size is not None:
                p, s = precision_counterfactual(pruned, oracle.minimal_size)
                precisions.append(p)
                stars.append(s)
        add_row(
            f"cf-{kind}",
            n_explanations_exes=n_expl_e,
            n_explanations_baseline=n_expl_b,
            mean_size_exes=_mean(sizes_e),
            mean_size_baseline=_mean(sizes_b),
            precision_at_1=None,
            precision_at_5=None,
            precision=_mean(precisions),
            precision_star=_mean(stars),
            probes_exes=probes_e,
            probes_baseline=probes_b,
            incomplete_baselines=incomplete,
        )
        timings[f"cf-{kind}"] = {
            "mean_latency_exes": _mean(t_exes) or 0.0,
            "mean_latency_baseline": _mean(t_base) or 0.0,
        }

    report = EvalReport(
        config={
            "n_queries": config.n_queries,
            "keywords_min": config.keywords_min,
            "keywords_max": config.keywords_max,
            "k": config.k,
            "seed": config.seed,
            "beam": {"b": params.b, "gamma": params.gamma, "e": params.e, "t": params.t},
            "mc_samples": config.mc_samples,
        },
        rows=rows,
    )
    return report, timings


def write_report(report: EvalReport, timings: dict, out_dir, figures: bool = True) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "timings.json").write_text(
        json.dumps(timings, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    if figures:
        from .report_figs import render_report_figures

        render_report_figures(report, timings, out)
