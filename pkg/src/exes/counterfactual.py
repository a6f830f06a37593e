"""Counterfactual explanations: beam search over atomic input perturbations.

Six candidate kinds, one kind per run, split by direction: promotion kinds
(skill-add, query-promote, link-add) require a currently non-relevant subject,
demotion kinds (skill-rm, query-demote, link-rm) a relevant one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import EMPTY_OVERLAY, NodeId, PerturbationOverlay, Query, SkillId, neighborhood
from .embedding import SkillEmbedding, centroid, top_similar, _cosine
from .engine import Probe
from .errors import DirectionMismatch, NoCandidates
from .linkpred import top_candidate_edges

KINDS = ("skill-add", "skill-rm", "query-promote", "query-demote", "link-add", "link-rm")
PROMOTION_KINDS = {"skill-add", "query-promote", "link-add"}


@dataclass(frozen=True)
class CandidatePerturbation:
    kind: str  # "add_skill" | "remove_skill" | "add_keyword" | "add_edge" | "remove_edge"
    payload: tuple

    def encoding(self) -> str:
        if self.kind in ("add_skill", "remove_skill"):
            return f"{self.kind}:{self.payload[0]}:{self.payload[1]}"
        if self.kind == "add_keyword":
            return f"{self.kind}:{self.payload[0]}"
        return f"{self.kind}:{self.payload[0]}-{self.payload[1]}"

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind in ("add_skill", "remove_skill"):
            out["node"], out["skill"] = self.payload
        elif self.kind == "add_keyword":
            out["skill"] = self.payload[0]
        else:
            out["edge"] = list(self.payload)
        return out


def add_skill(u: NodeId, s: SkillId) -> CandidatePerturbation:
    return CandidatePerturbation("add_skill", (u, s))


def remove_skill(u: NodeId, s: SkillId) -> CandidatePerturbation:
    return CandidatePerturbation("remove_skill", (u, s))


def add_keyword(s: SkillId) -> CandidatePerturbation:
    return CandidatePerturbation("add_keyword", (s,))


def add_edge(u: NodeId, v: NodeId) -> CandidatePerturbation:
    return CandidatePerturbation("add_edge", (min(u, v), max(u, v)))


def remove_edge(u: NodeId, v: NodeId) -> CandidatePerturbation:
    return CandidatePerturbation("remove_edge", (min(u, v), max(u, v)))


def perturbations_to_overlay(perturbations) -> PerturbationOverlay:
    added_skills, removed_skills, added_edges, removed_edges, added_kw = set(), set(), set(), set(), []
    for p in sorted(perturbations, key=CandidatePerturbation.encoding):
        if p.kind == "add_skill":
            added_skills.add(p.payload)
        elif p.kind == "remove_skill":
            removed_skills.add(p.payload)
        elif p.kind == "add_edge":
            added_edges.add(p.payload)
        elif p.kind == "remove_edge":
            removed_edges.add(p.payload)
        else:
            added_kw.append(p.payload[0])
    return PerturbationOverlay(
        added_skills=frozenset(added_skills),
        removed_skills=frozenset(removed_skills),
        added_edges=frozenset(added_edges),
        removed_edges=frozenset(removed_edges),
        added_keywords=tuple(added_kw),
    )


@dataclass(frozen=True)
class CounterfactualExplanation:
    perturbations: frozenset[CandidatePerturbation]
    new_rank: int
    flipped_to: bool

    def size(self) -> int:
        return len(self.perturbations)

    def sorted_perturbations(self) -> list[CandidatePerturbation]:
        return sorted(self.perturbations, key=CandidatePerturbation.encoding)

    def encoding(self) -> tuple[str, ...]:
        return tuple(p.encoding() for p in self.sorted_perturbations())

    def to_json(self) -> dict:
        return {
            "perturbations": [p.to_json() for p in self.sorted_perturbations()],
            "new_rank": self.new_rank,
            "flipped_to": self.flipped_to,
        }


@dataclass(frozen=True)
class BeamParams:
    b: int = 30  # beam width
    gamma: int = 5  # max explanation size
    e: int = 5  # explanations wanted
    t: int = 10  # candidate count fed to the generators

    def __post_init__(self):
        if min(self.b, self.gamma, self.e, self.t) < 1:
            raise ValueError("all beam parameters must be >= 1")


def _state_key(state: frozenset) -> tuple[str, ...]:
    return tuple(sorted(p.encoding() for p in state))


def probe_with(probe: Probe, q: Query, subject: NodeId, perturbations) -> tuple[int, bool]:
    """Apply a perturbation set from scratch and probe the subject."""
    overlay = perturbations_to_overlay(perturbations)
    q2 = Query(keywords=q.keywords + overlay.added_keywords, k=q.k)
    overlay = PerturbationOverlay(
        added_skills=overlay.added_skills,
        removed_skills=overlay.removed_skills,
        added_edges=overlay.added_edges,
        removed_edges=overlay.removed_edges,
    )
    return probe.status(overlay, q2, subject)


def beam_search(
    probe: Probe,
    q: Query,
    subject: NodeId,
    candidates,
    params: BeamParams,
) -> list[CounterfactualExplanation]:
    """Breadth-first beam over perturbation sets until flips are found.

    Each round extends every frontier state with every absent candidate; the
    top b survivors are picked by probed rank (descending when the subject
    started relevant, ascending otherwise), ties by perturbation encoding.
    Duplicate sets are expanded once.  The search stops as soon as e flips are
    collected, and never descends past the first set size that yields a flip:
    deeper sets are strictly larger, so they cannot be minimal.
    """
    candidates = list(candidates)
    if not candidates:
        raise NoCandidates("empty candidate list")
    probe.base.check_node(subject)
    _, initial_status = probe.initial_status(q, subject)

    found: list[CounterfactualExplanation] = []
    found_sets: list[frozenset] = []
    frontier: list[frozenset] = [frozenset()]
    seen: set[frozenset] = {frozenset()}

    while frontier:
        expanded: list[tuple[int, tuple, frozenset]] = []
        for state in frontier:
            for cand in candidates:
                if cand in state:
                    continue
                new_state = state | {cand}
                if new_state in seen:
                    continue
                seen.add(new_state)
                if any(fs <= new_state for fs in found_sets):
                    continue
                rank, status = probe_with(probe, q, subject, new_state)
                if status != initial_status:
                    found.append(
                        CounterfactualExplanation(
                            perturbations=new_state, new_rank=rank, flipped_to=status
                        )
                    )
                    found_sets.append(new_state)
                    if len(found) >= params.e:
                        return found
                elif len(new_state) < params.gamma:
                    expanded.append((rank, _state_key(new_state), new_state))
        if found:
            break  # larger sets cannot be minimal
        direction = -1 if initial_status else 1
        expanded.sort(key=lambda item: (direction * item[0], item[1]))
        frontier = [state for _, _, state in expanded[: params.b]]
    return found


def candidates_skill_add(
    probe: Probe, q: Query, subject: NodeId, emb: SkillEmbedding, d: int = 1, t: int = 10
) -> list[CandidatePerturbation]:
    """Add query-like skills to the subject's neighborhood (promotion)."""
    base = probe.base
    skills = top_similar(emb, q.keywords, exclude=frozenset(), t=t)
    hood = sorted(neighborhood(base, subject, d))
    out = []
    for s in skills:  # similarity rank first, then node id
        for u in hood:
            if s not in base.skills_of[u]:
                out.append(add_skill(u, s))
    return out


def candidates_skill_remove(
    probe: Probe, q: Query, subject: NodeId, emb: SkillEmbedding, d: int = 1, t: int = 10
) -> list[CandidatePerturbation]:
    """Remove the neighborhood skills most similar to the query (demotion)."""
    base = probe.base
    c = centroid(emb, q.keywords)
    pairs = [
        (u, s)
        for u in sorted(neighborhood(base, subject, d))
        for s in sorted(base.skills_of[u])
    ]
    pairs.sort(key=lambda us: (-_cosine(emb.vector_of(us[1]), c), us[1], us[0]))
    return [remove_skill(u, s) for u, s in pairs[:t]]


def candidates_query_augment(
    probe: Probe,
    q: Query,
    subject: NodeId,
    emb: SkillEmbedding,
    t: int = 10,
    direction: str = "promote",
) -> list[CandidatePerturbation]:
    """Keyword additions: promote pulls the query toward the subject's skills,
    demote pushes it toward skills the subject lacks."""
    base = probe.base
    own = base.skills_of[subject]
    kw = q.keyword_set()
    if direction == "promote":
        skills = top_similar(emb, set(own) | kw, exclude=kw, t=t)
    elif direction == "demote":
        skills = top_similar(emb, kw, exclude=kw | own, t=t)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return [add_keyword(s) for s in skills]


def candidates_link_add(
    probe: Probe, q: Query, subject: NodeId, lp=None, d: int = 1, t: int = 10
) -> list[CandidatePerturbation]:
    """New edges between the subject's neighborhood and the current top-2k (promotion)."""
    base = probe.base
    endpoints_a = neighborhood(base, subject, d)
    endpoints_b = probe.rank_list(EMPTY_OVERLAY, q).top(2 * q.k)
    scored = top_candidate_edges(base, endpoints_a, endpoints_b, t, predictor=lp)
    return [add_edge(*ls.pair) for ls in scored]


def candidates_link_remove(
    probe: Probe, q: Query, subject: NodeId, d: int = 2, t: int = 10
) -> list[CandidatePerturbation]:
    """Edges near the subject whose single removal hurts its rank the most (demotion)."""
    base = probe.base
    hood = neighborhood(base, subject, d)
    induced = sorted(e for e in base.edges if e[0] in hood and e[1] in hood)
    base_rank, _ = probe.initial_status(q, subject)
    deltas = []
    for e in induced:
        rank, _ = probe.status(
            PerturbationOverlay(removed_edges=frozenset([e])), q, subject
        )
        deltas.append((rank - base_rank, e))
    deltas.sort(key=lambda de: (-de[0], de[1]))
    return [remove_edge(*e) for _, e in deltas[:t]]


def generate_candidates(
    probe: Probe,
    q: Query,
    subject: NodeId,
    kind: str,
    t: int,
    emb: SkillEmbedding | None = None,
    lp=None,
    d: int | None = None,
) -> list[CandidatePerturbation]:
    if kind == "skill-add":
        return candidates_skill_add(probe, q, subject, emb, d=d if d is not None else 1, t=t)
    if kind == "skill-rm":
        return candidates_skill_remove(probe, q, subject, emb, d=d if d is not None else 1, t=t)
    if kind == "query-promote":
        return candidates_query_augment(probe, q, subject, emb, t=t, direction="promote")
    if kind == "query-demote":
        return candidates_query_augment(probe, q, subject, emb, t=t, direction="demote")
    if kind == "link-add":
        return candidates_link_add(probe, q, subject, lp, d=d if d is not None else 1, t=t)
    if kind == "link-rm":
        return candidates_link_remove(probe, q, subject, d=d if d is not None else 2, t=t)
    raise ValueError(f"unknown counterfactual kind {kind!r}")


def explain_counterfactual(
    probe: Probe,
    q: Query,
    subject: NodeId,
    kind: str,
    params: BeamParams | None = None,
    emb: SkillEmbedding | None = None,
    lp=None,
    d: int | None = None,
) -> list[CounterfactualExplanation]:
    """Dispatch to the matching candidate generator and run the beam search.

    Results are re-validated from scratch and sorted by (size, rank effect,
    encoding).
    """
    params = params or BeamParams()
    probe.base.check_node(subject)
    initial_rank, initial_status = probe.initial_status(q, subject)
    wants_promotion = kind in PROMOTION_KINDS
    if wants_promotion == initial_status:
        raise DirectionMismatch(
            f"{kind} requires a {'non-relevant' if wants_promotion else 'relevant'} subject"
        )
    candidates = generate_candidates(probe, q, subject, kind, params.t, emb=emb, lp=lp, d=d)
    if not candidates:
        raise NoCandidates(f"no {kind} candidates for node {subject}")
    explanations = beam_search(probe, q, subject, candidates, params)

    validated = []
    for expl in explanations:
        rank, status = probe_with(probe, q, subject, expl.perturbations)
        if status != initial_status:  # never trust the search path
            validated.append(
                CounterfactualExplanation(expl.perturbations, new_rank=rank, flipped_to=status)
            )
    validated.sort(
        key=lambda e: (e.size(), -abs(e.new_rank - initial_rank), e.encoding())
    )
    return validated
