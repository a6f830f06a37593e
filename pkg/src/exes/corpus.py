"""Skill-labeled collaboration networks: data model, TSV ingestion, overlays, fixtures.

Networks are immutable after construction.  What-if analysis goes through
:class:`PerturbationOverlay` / :class:`NetworkView`, a copy-on-write delta view
that never touches the base graph.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .errors import (
    DanglingEdge,
    DuplicateNode,
    InfeasibleParameters,
    OverlayConflict,
    ParseError,
    SelfLoop,
    UnknownNode,
    UnknownSkill,
)

NodeId = int
SkillId = str


def _check_skill_token(token: str) -> str:
    if not token or token != token.lower() or any(c.isspace() for c in token):
        raise ValueError(f"bad skill token {token!r}: must be lowercase, non-empty, no whitespace")
    return token


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Query:
    """A set of requested skills plus the top-k cutoff."""

    keywords: tuple[SkillId, ...]
    k: int

    def __post_init__(self):
        if len(self.keywords) != len(set(self.keywords)):
            raise ValueError("duplicate query keywords")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def keyword_set(self) -> frozenset[SkillId]:
        return frozenset(self.keywords)


@dataclass(frozen=True)
class CollaborationNetwork:
    """Undirected graph with per-node skill sets.  Node ids are dense 0..n-1."""

    display_names: tuple[str, ...]
    edges: frozenset[tuple[NodeId, NodeId]]
    skills_of: tuple[frozenset[SkillId], ...]
    skill_universe: frozenset[SkillId]

    @property
    def n_nodes(self) -> int:
        return len(self.display_names)

    @cached_property
    def _adjacency(self) -> tuple[tuple[NodeId, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def check_node(self, p: NodeId) -> None:
        if not 0 <= p < self.n_nodes:
            raise UnknownNode(p)

    def neighbors(self, p: NodeId) -> tuple[NodeId, ...]:
        self.check_node(p)
        return self._adjacency[p]

    def skills(self, p: NodeId) -> frozenset[SkillId]:
        self.check_node(p)
        return self.skills_of[p]

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return _edge(u, v) in self.edges

    def all_edges(self) -> frozenset[tuple[NodeId, NodeId]]:
        return self.edges

    def node_ids(self) -> range:
        return range(self.n_nodes)

    def check_query(self, q: Query) -> None:
        if not q.keywords:
            raise ValueError("query must contain at least one keyword")
        for s in q.keywords:
            if s not in self.skill_universe:
                raise UnknownSkill(s)


def build_network(
    display_names: list[str],
    edges: list[tuple[int, int]],
    skills_of: list[set[str]],
    extra_skills: set[str] = frozenset(),
) -> CollaborationNetwork:
    """Validate and freeze a network; enforces all structural invariants."""
    n = len(display_names)
    edge_set: set[tuple[int, int]] = set()
    for u, v in edges:
        if u == v:
            raise SelfLoop(u)
        if not (0 <= u < n and 0 <= v < n):
            raise DanglingEdge(u, v)
        edge_set.add(_edge(u, v))
    if len(skills_of) != n:
        raise ValueError("skills_of must have one entry per node")
    universe: set[str] = {_check_skill_token(s) for s in extra_skills}
    frozen_skills = []
    for ss in skills_of:
        fs = frozenset(_check_skill_token(s) for s in ss)
        universe |= fs
        frozen_skills.append(fs)
    return CollaborationNetwork(
        display_names=tuple(display_names),
        edges=frozenset(edge_set),
        skills_of=tuple(frozen_skills),
        skill_universe=frozenset(universe),
    )


def _read_tsv(path: Path, n_fields: int):
    """Yield (line_no, fields) from a TSV file, skipping comments and blanks."""
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise ParseError(path, line_no, f"expected {n_fields} tab-separated fields")
            yield line_no, fields


def load_network(nodes_file, edges_file, skills_file) -> CollaborationNetwork:
    """Load a network from the three-file TSV layout (nodes, edges, skills)."""
    nodes_file, edges_file, skills_file = Path(nodes_file), Path(edges_file), Path(skills_file)

    names: dict[int, str] = {}
    for line_no, (id_str, name) in _read_tsv(nodes_file, 2):
        try:
            node_id = int(id_str)
        except ValueError:
            raise ParseError(nodes_file, line_no, f"bad node id {id_str!r}") from None
        if node_id < 0:
            raise ParseError(nodes_file, line_no, f"negative node id {node_id}")
        if node_id in names:
            raise DuplicateNode(node_id)
        names[node_id] = name
    n = len(names)
    if sorted(names) != list(range(n)):
        raise ParseError(nodes_file, 0, "node ids must be dense 0..n-1")
    display_names = [names[i] for i in range(n)]

    edges: list[tuple[int, int]] = []
    for line_no, (u_str, v_str) in _read_tsv(edges_file, 2):
        try:
            u, v = int(u_str), int(v_str)
        except ValueError:
            raise ParseError(edges_file, line_no, "bad edge endpoints") from None
        if u == v:
            raise SelfLoop(u)
        if not (0 <= u < n and 0 <= v < n):
            raise DanglingEdge(u, v)
        edges.append((u, v))

    skills: list[set[str]] = [set() for _ in range(n)]
    for line_no, (id_str, token) in _read_tsv(skills_file, 2):
        try:
            node_id = int(id_str)
        except ValueError:
            raise ParseError(skills_file, line_no, f"bad node id {id_str!r}") from None
        if not 0 <= node_id < n:
            raise ParseError(skills_file, line_no, f"skill references unknown node {node_id}")
        try:
            skills[node_id].add(_check_skill_token(token))
        except ValueError as exc:
            raise ParseError(skills_file, line_no, str(exc)) from None

    return build_network(display_names, edges, skills)


def load_network_dir(directory) -> CollaborationNetwork:
    d = Path(directory)
    return load_network(d / "nodes.tsv", d / "edges.tsv", d / "skills.tsv")


def save_network_dir(net: CollaborationNetwork, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "nodes.tsv", "w", encoding="utf-8") as fh:
        for i, name in enumerate(net.display_names):
            fh.write(f"{i}\t{name}\n")
    with open(d / "edges.tsv", "w", encoding="utf-8") as fh:
        for u, v in sorted(net.edges):
            fh.write(f"{u}\t{v}\n")
    with open(d / "skills.tsv", "w", encoding="utf-8") as fh:
        for i in range(net.n_nodes):
            for s in sorted(net.skills_of[i]):
                fh.write(f"{i}\t{s}\n")


@dataclass(frozen=True)
class PerturbationOverlay:
    """Non-destructive delta over a base network and query.

    ``size()`` counts atomic entries and is the explanation-size metric used
    everywhere downstream.
    """

    added_skills: frozenset[tuple[NodeId, SkillId]] = frozenset()
    removed_skills: frozenset[tuple[NodeId, SkillId]] = frozenset()
    added_edges: frozenset[tuple[NodeId, NodeId]] = frozenset()
    removed_edges: frozenset[tuple[NodeId, NodeId]] = frozenset()
    added_keywords: tuple[SkillId, ...] = ()

    def size(self) -> int:
        return (
            len(self.added_skills)
            + len(self.removed_skills)
            + len(self.added_edges)
            + len(self.removed_edges)
            + len(self.added_keywords)
        )

    def cache_key(self) -> tuple:
        return (
            tuple(sorted(self.added_skills)),
            tuple(sorted(self.removed_skills)),
            tuple(sorted(self.added_edges)),
            tuple(sorted(self.removed_edges)),
            tuple(sorted(self.added_keywords)),
        )

    def validate(self, base: CollaborationNetwork, q: Query) -> None:
        for p, s in self.added_skills:
            base.check_node(p)
            if s in base.skills_of[p]:
                raise OverlayConflict(f"skill {s!r} already held by node {p}")
        for p, s in self.removed_skills:
            base.check_node(p)
            if s not in base.skills_of[p]:
                raise OverlayConflict(f"skill {s!r} not held by node {p}")
        for u, v in self.added_edges:
            if u == v:
                raise OverlayConflict(f"self loop ({u},{v}) in added edges")
            base.check_node(u)
            base.check_node(v)
            if base.has_edge(u, v):
                raise OverlayConflict(f"edge ({u},{v}) already present")
        for u, v in self.removed_edges:
            if _edge(u, v) not in base.edges:
                raise OverlayConflict(f"edge ({u},{v}) not present")
        for s in self.added_keywords:
            if s in q.keyword_set():
                raise OverlayConflict(f"keyword {s!r} already in query")


EMPTY_OVERLAY = PerturbationOverlay()


class NetworkView:
    """Logical network obtained by applying an overlay to a base network.

    The base is never modified; skill and neighbor lookups resolve the delta
    on the fly, so a view costs O(|overlay|) to build.
    """

    __slots__ = ("base", "overlay", "_skill_add", "_skill_rm", "_nbr_add", "_nbr_rm")

    def __init__(self, base: CollaborationNetwork, overlay: PerturbationOverlay):
        self.base = base
        self.overlay = overlay
        skill_add: dict[int, set[str]] = {}
        for p, s in overlay.added_skills:
            skill_add.setdefault(p, set()).add(s)
        skill_rm: dict[int, set[str]] = {}
        for p, s in overlay.removed_skills:
            skill_rm.setdefault(p, set()).add(s)
        nbr_add: dict[int, set[int]] = {}
        nbr_rm: dict[int, set[int]] = {}
        for u, v in overlay.added_edges:
            nbr_add.setdefault(u, set()).add(v)
            nbr_add.setdefault(v, set()).add(u)
        for u, v in overlay.removed_edges:
            e = _edge(u, v)
            nbr_rm.setdefault(e[0], set()).add(e[1])
            nbr_rm.setdefault(e[1], set()).add(e[0])
        self._skill_add = skill_add
        self._skill_rm = skill_rm
        self._nbr_add = nbr_add
        self._nbr_rm = nbr_rm

    @property
    def n_nodes(self) -> int:
        return self.base.n_nodes

    def check_node(self, p: NodeId) -> None:
        self.base.check_node(p)

    def node_ids(self) -> range:
        return self.base.node_ids()

    @property
    def skill_universe(self) -> frozenset[SkillId]:
        return self.base.skill_universe

    @property
    def display_names(self) -> tuple[str, ...]:
        return self.base.display_names

    def skills(self, p: NodeId) -> frozenset[SkillId]:
        base = self.base.skills(p)
        add = self._skill_add.get(p)
        rm = self._skill_rm.get(p)
        if add is None and rm is None:
            return base
        return (base | (add or set())) - (rm or set())

    def neighbors(self, p: NodeId) -> tuple[NodeId, ...]:
        base = self.base.neighbors(p)
        add = self._nbr_add.get(p)
        rm = self._nbr_rm.get(p)
        if add is None and rm is None:
            return base
        return tuple(sorted((set(base) | (add or set())) - (rm or set())))

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        e = _edge(u, v)
        if e in self.overlay.added_edges:
            return True
        if e in self.overlay.removed_edges:
            return False
        return e in self.base.edges

    def all_edges(self) -> frozenset[tuple[NodeId, NodeId]]:
        return (self.base.edges | self.overlay.added_edges) - self.overlay.removed_edges


NetworkLike = CollaborationNetwork | NetworkView


def as_view(net: NetworkLike) -> NetworkView:
    if isinstance(net, NetworkView):
        return net
    return NetworkView(net, EMPTY_OVERLAY)


def apply_overlay(
    base: CollaborationNetwork, q: Query, overlay: PerturbationOverlay
) -> tuple[NetworkView, Query]:
    """Produce the (view, query) pair for an overlay; the base stays untouched."""
    overlay.validate(base, q)
    new_q = Query(keywords=q.keywords + overlay.added_keywords, k=q.k)
    return NetworkView(base, overlay), new_q


def neighborhood(net: NetworkLike, p: NodeId, d: int) -> set[NodeId]:
    """All nodes within hop distance d of p (BFS), including p itself."""
    if d < 0:
        raise ValueError("radius must be non-negative")
    net.check_node(p)
    seen = {p}
    frontier = deque([(p, 0)])
    while frontier:
        node, dist = frontier.popleft()
        if dist == d:
            continue
        for nb in net.neighbors(node):
            if nb not in seen:
                seen.add(nb)
                frontier.append((nb, dist + 1))
    return seen


def is_connected(net: NetworkLike) -> bool:
    return len(neighborhood(net, 0, net.n_nodes)) == net.n_nodes if net.n_nodes else True


def generate_synthetic(
    n_nodes: int,
    n_skills: int,
    avg_degree: float,
    skills_per_node: int,
    seed: int,
) -> CollaborationNetwork:
    """Seeded random connected network, reproducible bit-for-bit per seed."""
    if n_nodes < 1 or n_skills < 1 or skills_per_node < 1 or avg_degree < 0:
        raise InfeasibleParameters("all parameters must be positive (avg_degree may be 0)")
    if skills_per_node > n_skills:
        raise InfeasibleParameters("skills_per_node exceeds the skill universe")
    max_edges = n_nodes * (n_nodes - 1) // 2
    m = round(n_nodes * avg_degree / 2)
    if m > max_edges:
        raise InfeasibleParameters("avg_degree too high for this node count")

    rng = random.Random(seed)
    width = len(str(max(n_skills - 1, 0)))
    universe = [f"skill{str(i).zfill(width)}" for i in range(n_skills)]
    skills = [set(rng.sample(universe, skills_per_node)) for _ in range(n_nodes)]

    edge_set: set[tuple[int, int]] = set()
    attempts = 0
    while len(edge_set) < m and attempts < 20 * m + 100:
        u = rng.randrange(n_nodes)
        v = rng.randrange(n_nodes)
        attempts += 1
        if u != v:
            edge_set.add(_edge(u, v))

    # Stitch components together with a deterministic spanning chain so the
    # result is always connected.
    if n_nodes > 1:
        adj: dict[int, set[int]] = {i: set() for i in range(n_nodes)}
        for u, v in edge_set:
            adj[u].add(v)
            adj[v].add(u)
        seen: set[int] = set()
        components: list[int] = []  # min node of each component, in id order
        for start in range(n_nodes):
            if start in seen:
                continue
            components.append(start)
            stack = [start]
            seen.add(start)
            while stack:
                node = stack.pop()
                for nb in adj[node]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        for a, b in zip(components, components[1:]):
            edge_set.add(_edge(a, b))

    return build_network(
        display_names=[f"p{i}" for i in range(n_nodes)],
        edges=sorted(edge_set),
        skills_of=skills,
        extra_skills=set(universe),
    )
