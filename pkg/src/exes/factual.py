"""Shapley-attribution factual explanations with locality pruning.

A feature is an existing element of the input (a skill at a node, an edge, or
a query keyword); turning it "off" means removing it.  The value of a
coalition is the probed status (or rank margin) of the subject after stripping
every feature outside the coalition.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .corpus import NodeId, PerturbationOverlay, Query, SkillId, neighborhood
from .engine import Probe

EXACT_THRESHOLD = 12
MC_SAMPLES = 2048


@dataclass(frozen=True)
class Feature:
    kind: str  # "node_skill" | "edge" | "query_keyword"
    payload: tuple

    def sort_key(self):
        return (self.kind, self.payload)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "node_skill":
            out["node"], out["skill"] = self.payload
        elif self.kind == "edge":
            out["edge"] = list(self.payload)
        else:
            out["skill"] = self.payload[0]
        return out


def node_skill(u: NodeId, s: SkillId) -> Feature:
    return Feature("node_skill", (u, s))


def edge_feature(u: NodeId, v: NodeId) -> Feature:
    return Feature("edge", (min(u, v), max(u, v)))


def query_keyword(s: SkillId) -> Feature:
    return Feature("query_keyword", (s,))


@dataclass(frozen=True)
class ValueFunction:
    variant: str  # "status" | "margin"

    def __call__(self, rank: int, status: bool, k: int) -> float:
        if self.variant == "status":
            return 1.0 if status else 0.0
        return max(-1.0, min(1.0, (k - rank + 1) / k))


STATUS = ValueFunction("status")
MARGIN = ValueFunction("margin")


@dataclass
class FactualExplanation:
    subject: NodeId
    mode: str
    attributions: dict[Feature, float]
    value_full: float
    value_empty: float
    features_considered: tuple[Feature, ...]
    exact: bool

    def top_features(self, k: int) -> list[Feature]:
        ranked = sorted(
            self.attributions.items(), key=lambda kv: (-abs(kv[1]), kv[0].sort_key())
        )
        return [f for f, _ in ranked[:k]]

    def nonzero_features(self, tol: float = 0.0) -> set[Feature]:
        return {f for f, phi in self.attributions.items() if abs(phi) > tol}

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "mode": self.mode,
            "value_full": self.value_full,
            "value_empty": self.value_empty,
            "exact": self.exact,
            "attributions": [
                {**f.to_json(), "phi": phi}
                for f, phi in sorted(self.attributions.items(), key=lambda kv: kv[0].sort_key())
            ],
        }


def _off_overlay_and_query(q: Query, features, coalition) -> tuple[PerturbationOverlay, Query]:
    """Overlay/query pair with every feature outside the coalition removed."""
    removed_skills = set()
    removed_edges = set()
    dropped_keywords = set()
    for f in features:
        if f in coalition:
            continue
        if f.kind == "node_skill":
            removed_skills.add(f.payload)
        elif f.kind == "edge":
            removed_edges.add(f.payload)
        else:
            dropped_keywords.add(f.payload[0])
    overlay = PerturbationOverlay(
        removed_skills=frozenset(removed_skills),
        removed_edges=frozenset(removed_edges),
    )
    new_q = Query(
        keywords=tuple(s for s in q.keywords if s not in dropped_keywords), k=q.k
    ) if dropped_keywords else q
    return overlay, new_q


def coalition_value(
    probe: Probe, q: Query, subject: NodeId, features, coalition, vf: ValueFunction
) -> float:
    overlay, q2 = _off_overlay_and_query(q, features, coalition)
    rank, status = probe.status(overlay, q2, subject)
    return vf(rank, status, q.k)


def _mode_label(probe: Probe) -> str:
    return "search" if probe.mode == "search" else f"team:{probe.team_seed}"


def shapley_values(
    probe: Probe,
    q: Query,
    subject: NodeId,
    features,
    vf: ValueFunction = STATUS,
    exact_threshold: int = EXACT_THRESHOLD,
    samples: int = MC_SAMPLES,
    seed: int = 0,
) -> FactualExplanation:
    """Exact Shapley by full enumeration up to ``exact_threshold`` features,
    Monte-Carlo permutation sampling above it."""
    features = tuple(features)
    if not features:
        raise ValueError("at least one feature required")
    n = len(features)

    def value(coalition: frozenset) -> float:
        return coalition_value(probe, q, subject, features, coalition, vf)

    v_full = value(frozenset(features))
    v_empty = value(frozenset())

    phis: dict[Feature, float]
    if n <= exact_threshold:
        # One probe per coalition, weighted marginal contributions.
        values = {}
        for mask in range(1 << n):
            coalition = frozenset(features[i] for i in range(n) if mask >> i & 1)
            values[mask] = value(coalition)
        fact = math.factorial
        weights = [fact(c) * fact(n - 1 - c) / fact(n) for c in range(n)]
        phis = {}
        for i, f in enumerate(features):
            acc = 0.0
            for mask in range(1 << n):
                if mask >> i & 1:
                    continue
                c = bin(mask).count("1")
                acc += weights[c] * (values[mask | (1 << i)] - values[mask])
            phis[f] = acc
        exact = True
    else:
        rng = random.Random(seed)
        cache: dict[frozenset, float] = {frozenset(): v_empty, frozenset(features): v_full}
        sums = {f: 0.0 for f in features}
        order = list(features)
        for _ in range(samples):
            rng.shuffle(order)
            coalition: set[Feature] = set()
            prev = v_empty
            for f in order:
                coalition.add(f)
                key = frozenset(coalition)
                cur = cache.get(key)
                if cur is None:
                    cur = value(key)
                    cache[key] = cur
                sums[f] += cur - prev
                prev = cur
        phis = {f: sums[f] / samples for f in features}
        exact = False

    return FactualExplanation(
        subject=subject,
        mode=_mode_label(probe),
        attributions=phis,
        value_full=v_full,
        value_empty=v_empty,
        features_considered=features,
        exact=exact,
    )


def explain_skills(
    probe: Probe,
    q: Query,
    subject: NodeId,
    d: int = 1,
    vf: ValueFunction = STATUS,
    **shapley_kwargs,
) -> FactualExplanation:
    """Attribute the subject's status to the skills in its radius-d neighborhood."""
    base = probe.base
    base.check_node(subject)
    features = [
        node_skill(u, s)
        for u in sorted(neighborhood(base, subject, d))
        for s in sorted(base.skills_of[u])
    ]
    return shapley_values(probe, q, subject, features, vf, **shapley_kwargs)


def explain_query(
    probe: Probe,
    q: Query,
    subject: NodeId,
    vf: ValueFunction = STATUS,
    **shapley_kwargs,
) -> FactualExplanation:
    """Attribute the subject's status to the query keywords (no pruning: queries are small)."""
    features = [query_keyword(s) for s in q.keywords]
    return shapley_values(probe, q, subject, features, vf, **shapley_kwargs)


def explain_collaborations(
    probe: Probe,
    q: Query,
    subject: NodeId,
    d: int = 2,
    tau: float = 0.1,
    vf: ValueFunction = STATUS,
    **shapley_kwargs,
) -> FactualExplanation:
    """Attribute the subject's status to influential edges near it.

    Expands a queue of impactful nodes starting at the subject: each expanded
    node gets a local Shapley run over its incident edges in the radius-d
    induced subgraph, edges clearing |phi| >= tau are kept and their far
    endpoints queued.  The kept edges then get one joint Shapley run.
    """
    base = probe.base
    base.check_node(subject)
    if tau < 0:
        raise ValueError("tau must be non-negative")
    hood = neighborhood(base, subject, d)
    induced = {e for e in base.edges if e[0] in hood and e[1] in hood}

    impactful: set[tuple[NodeId, NodeId]] = set()
    queue = [subject]
    queued = {subject}
    expanded: set[NodeId] = set()
    while queue:
        px = queue.pop(0)
        if px in expanded:
            continue
        expanded.add(px)
        incident = sorted(e for e in induced if px in e)
        if not incident:
            continue
        local = shapley_values(
            probe, q, subject, [edge_feature(*e) for e in incident], vf, **shapley_kwargs
        )
        for f, phi in local.attributions.items():
            if abs(phi) >= tau:
                impactful.add(f.payload)
                far = f.payload[1] if f.payload[0] == px else f.payload[0]
                if far not in queued:
                    queued.add(far)
                    queue.append(far)

    if not impactful:
        rank, status = probe.initial_status(q, subject)
        v = vf(rank, status, q.k)
        return FactualExplanation(
            subject=subject,
            mode=_mode_label(probe),
            attributions={},
            value_full=v,
            value_empty=v,
            features_considered=(),
            exact=True,
        )
    return shapley_values(
        probe, q, subject, [edge_feature(*e) for e in sorted(impactful)], vf, **shapley_kwargs
    )
