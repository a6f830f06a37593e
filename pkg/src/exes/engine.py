"""The system under explanation: ranker + team former behind a probe interface.

Explainers only ever talk to :class:`Probe`, which treats the underlying
ranker as a black box and memoizes probe calls.  The bundled reference ranker
is a transparent 1-hop propagation scorer; alternative rankers register by
name in :data:`RANKERS`.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction

from .corpus import (
    EMPTY_OVERLAY,
    CollaborationNetwork,
    NetworkLike,
    NetworkView,
    NodeId,
    PerturbationOverlay,
    Query,
    SkillId,
)
from .errors import UnknownNode


@dataclass(frozen=True)
class RankedList:
    """Total ordering of all nodes: scores non-increasing, ties by ascending id."""

    entries: tuple[tuple[NodeId, float], ...]

    def rank_of(self, p: NodeId) -> int:
        for i, (node, _) in enumerate(self.entries):
            if node == p:
                return i + 1
        raise UnknownNode(p)

    def score_of(self, p: NodeId) -> float:
        for node, score in self.entries:
            if node == p:
                return score
        raise UnknownNode(p)

    def top(self, k: int) -> list[NodeId]:
        return [node for node, _ in self.entries[:k]]


@dataclass(frozen=True)
class RelevanceStatus:
    relevant: bool
    rank: int
    k: int


@dataclass(frozen=True)
class Team:
    members: frozenset[NodeId]
    seed_member: NodeId
    covered: frozenset[SkillId]
    join_order: tuple[NodeId, ...]  # seed first

    def join_rank(self, p: NodeId) -> int | None:
        try:
            return self.join_order.index(p) + 1
        except ValueError:
            return None


class Ranker(ABC):
    """Probe interface: deterministic full ordering for a query."""

    @abstractmethod
    def rank(self, net: NetworkLike, q: Query) -> RankedList:
        ...


class ReferenceRanker(Ranker):
    """1-hop propagation scorer.

    score(p) = sum over query keywords s of
        [s held by p] + alpha * |{neighbors holding s}| / (1 + deg(p))

    so a node earns credit both for its own skills and for its collaborators'.
    """

    def __init__(self, alpha: float = 0.5):
        self.alpha = alpha
        self._alpha_exact = Fraction(alpha)

    def rank(self, net: NetworkLike, q: Query) -> RankedList:
        # Scores are small rationals; order on exact integer keys (score times
        # a common denominator) so that float accumulation noise never breaks
        # an intended score tie.
        nodes = net.node_ids()
        skills = {p: net.skills(p) for p in nodes}
        nbrs_of = {p: net.neighbors(p) for p in nodes}
        kws = q.keywords
        a_num = self._alpha_exact.numerator
        a_den = self._alpha_exact.denominator
        denoms = {1 + len(nb) for nb in nbrs_of.values()}
        scale = a_den * (math.lcm(*denoms) if denoms else 1)
        scored = []
        for p in nodes:
            own = skills[p]
            nbrs = nbrs_of[p]
            denom = 1 + len(nbrs)
            held = 0
            hits = 0
            for s in kws:
                if s in own:
                    held += 1
            for u in nbrs:
                sk = skills[u]
                for s in kws:
                    if s in sk:
                        hits += 1
            key = held * scale + a_num * hits * (scale // (a_den * denom))
            # key / scale is one exact big-int division, so the reported float
            # is the correctly rounded value of the rational score.
            scored.append((p, key / scale, key))
        scored.sort(key=lambda e: (-e[2], e[0]))
        return RankedList(entries=tuple((p, s) for p, s, _ in scored))


RANKERS = {
    "reference": ReferenceRanker,
}


def relevance_status(net: NetworkLike, q: Query, p: NodeId, ranker: Ranker | None = None) -> RelevanceStatus:
    net.check_node(p)
    ranker = ranker or ReferenceRanker()
    rank = ranker.rank(net, q).rank_of(p)
    return RelevanceStatus(relevant=rank <= q.k, rank=rank, k=q.k)


def greedy_form_team(net: NetworkLike, q: Query, seed: NodeId, ranker: Ranker | None = None) -> Team:
    """Grow a team around the seed until the query is covered or the frontier dies.

    Each step adds the frontier node maximizing (newly covered keywords, then
    reference score for q, then lowest id).  Uncoverable queries yield the
    best-effort team rather than an error.
    """
    net.check_node(seed)
    ranker = ranker or ReferenceRanker()
    want = q.keyword_set()
    # The ranked list already orders by (score desc, id asc), so its positions
    # stand in for the (score, lowest id) tie-break without float comparisons.
    position = {p: i for i, (p, _) in enumerate(ranker.rank(net, q).entries)}

    members = [seed]
    member_set = {seed}
    covered = set(want & net.skills(seed))
    while covered != want:
        frontier = set()
        for m in member_set:
            frontier.update(u for u in net.neighbors(m) if u not in member_set)
        if not frontier:
            break
        best = min(
            frontier,
            key=lambda u: (-len((want & net.skills(u)) - covered), position[u]),
        )
        members.append(best)
        member_set.add(best)
        covered |= want & net.skills(best)
    return Team(
        members=frozenset(member_set),
        seed_member=seed,
        covered=frozenset(covered),
        join_order=tuple(members),
    )


def membership_status(
    net: NetworkLike, q: Query, seed: NodeId, p: NodeId, ranker: Ranker | None = None
) -> RelevanceStatus:
    """Team-membership analogue of relevance status; rank is join order."""
    net.check_node(p)
    team = greedy_form_team(net, q, seed, ranker)
    jr = team.join_rank(p)
    if jr is None:
        return RelevanceStatus(relevant=False, rank=net.n_nodes + 1, k=q.k)
    return RelevanceStatus(relevant=True, rank=jr, k=q.k)


class Probe:
    """Memoized black-box access to the system under explanation.

    ``mode`` is either ``"search"`` (relevance status) or ``"team"`` (membership
    status, with ``team_seed`` set).  A probe with zero query keywords returns
    rank n (worst) and status False by convention.
    """

    def __init__(
        self,
        base: CollaborationNetwork,
        ranker: Ranker | None = None,
        mode: str = "search",
        team_seed: NodeId | None = None,
    ):
        if mode not in ("search", "team"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "team" and team_seed is None:
            raise ValueError("team mode requires a seed member")
        self.base = base
        self.ranker = ranker or ReferenceRanker()
        self.mode = mode
        self.team_seed = team_seed
        self._rank_cache: dict[tuple, RankedList] = {}
        self._team_cache: dict[tuple, Team] = {}
        self.probe_count = 0

    def reset_cache(self) -> None:
        self._rank_cache.clear()
        self._team_cache.clear()
        self.probe_count = 0

    def _view(self, overlay: PerturbationOverlay) -> NetworkView:
        return NetworkView(self.base, overlay)

    def rank_list(self, overlay: PerturbationOverlay, q: Query) -> RankedList:
        key = (overlay.cache_key(), q.keywords)
        hit = self._rank_cache.get(key)
        if hit is None:
            self.probe_count += 1
            hit = self.ranker.rank(self._view(overlay), q)
            self._rank_cache[key] = hit
        return hit

    def team(self, overlay: PerturbationOverlay, q: Query) -> Team:
        key = (overlay.cache_key(), q.keywords)
        hit = self._team_cache.get(key)
        if hit is None:
            self.probe_count += 1
            hit = greedy_form_team(self._view(overlay), q, self.team_seed, self.ranker)
            self._team_cache[key] = hit
        return hit

    def status(self, overlay: PerturbationOverlay, q: Query, subject: NodeId) -> tuple[int, bool]:
        """Return (rank, status) of the subject under the perturbed input."""
        n = self.base.n_nodes
        if not q.keywords:
            return n, False
        if self.mode == "search":
            rank = self.rank_list(overlay, q).rank_of(subject)
            return rank, rank <= q.k
        team = self.team(overlay, q)
        jr = team.join_rank(subject)
        if jr is not None:
            return jr, True
        # Graded rank for non-members keeps a search gradient in team mode:
        # closer to joining (more uncovered query skills held) means better rank.
        view = self._view(overlay)
        newly = len((q.keyword_set() & view.skills(subject)) - team.covered)
        return n + 1 - newly, False

    def initial_status(self, q: Query, subject: NodeId) -> tuple[int, bool]:
        return self.status(EMPTY_OVERLAY, q, subject)
