"""HTTP API exposing the explanation engine.

Responses are canonical JSON (sorted keys, floats rounded to 6 decimals) so
recorded fixtures replay byte-identically.  Interactive explanation paths
respond synchronously; baseline-scale requests can be submitted as background
jobs and polled at /jobs/{id}.
"""

from __future__ import annotations

import difflib
import itertools
import json
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import factual
from .corpus import CollaborationNetwork, Query, load_network
from .counterfactual import BeamParams, KINDS, explain_counterfactual
from .embedding import SkillEmbedding, fit_embedding, top_similar
from .engine import RANKERS, Probe, greedy_form_team
from .jsonio import canonical_dumps
from .errors import (
    DirectionMismatch,
    ExesError,
    NoCandidates,
    UnknownNode,
)


def canonical_json(payload, status_code: int = 200) -> Response:
    return Response(
        content=canonical_dumps(payload), media_type="application/json", status_code=status_code
    )


class _NetworkEntry:
    def __init__(self, net: CollaborationNetwork):
        self.net = net
        self._emb: SkillEmbedding | None = None
        self._lock = threading.Lock()

    @property
    def embedding(self) -> SkillEmbedding:
        with self._lock:
            if self._emb is None:
                dim = min(16, len(self.net.skill_universe))
                self._emb = fit_embedding(self.net, dimension=max(dim, 1))
            return self._emb


class RankRequest(BaseModel):
    network_id: str
    keywords: list[str]
    k: int = Field(ge=1)


class TeamRequest(BaseModel):
    network_id: str
    keywords: list[str]
    seed: int


class FactualRequest(BaseModel):
    network_id: str
    keywords: list[str]
    k: int = Field(default=10, ge=1)
    subject: int
    facet: str = "skills"  # skills | query | collaborations
    mode: str = "search"  # search | team
    team_seed: int | None = None
    d: int | None = None
    tau: float = 0.1
    value_function: str = "status"
    samples: int = 2048
    seed: int = 0
    background: bool = False


class CounterfactualRequest(BaseModel):
    network_id: str
    keywords: list[str]
    k: int = Field(default=10, ge=1)
    subject: int
    kind: str
    mode: str = "search"
    team_seed: int | None = None
    b: int = 30
    gamma: int = 5
    e: int = 5
    t: int = 10
    d: int | None = None
    seed: int = 0
    background: bool = False


def create_app(ranker: str = "reference", workers: int = 2, data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="exes", docs_url="/docs", openapi_url="/openapi.json")
    networks: dict[str, _NetworkEntry] = {}
    ids = itertools.count(1)
    ranker_obj = RANKERS[ranker]()
    executor = ThreadPoolExecutor(max_workers=workers)
    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()
    job_ids = itertools.count(1)

    def entry_of(network_id: str) -> _NetworkEntry:
        entry = networks.get(network_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown network {network_id!r}")
        return entry

    def query_of(net: CollaborationNetwork, keywords: list[str], k: int) -> Query:
        if not keywords:
            raise HTTPException(status_code=422, detail="keywords must be non-empty")
        for s in keywords:
            if s not in net.skill_universe:
                near = difflib.get_close_matches(s, sorted(net.skill_universe), n=3)
                raise HTTPException(
                    status_code=422,
                    detail={"error": f"unknown skill {s!r}", "nearest": near},
                )
        if len(set(keywords)) != len(keywords):
            raise HTTPException(status_code=422, detail="duplicate keywords")
        return Query(keywords=tuple(keywords), k=k)

    def probe_for(entry: _NetworkEntry, mode: str, team_seed: int | None) -> Probe:
        if mode not in ("search", "team"):
            raise HTTPException(status_code=422, detail=f"unknown mode {mode!r}")
        if mode == "team":
            if team_seed is None:
                raise HTTPException(status_code=422, detail="team mode requires team_seed")
            try:
                entry.net.check_node(team_seed)
            except UnknownNode:
                raise HTTPException(status_code=404, detail=f"unknown node {team_seed}") from None
        return Probe(entry.net, ranker=ranker_obj, mode=mode, team_seed=team_seed)

    def submit_job(fn) -> Response:
        job_id = f"job-{next(job_ids)}"
        with jobs_lock:
            jobs[job_id] = {"status": "running"}

        def run():
            try:
                result = fn()
                with jobs_lock:
                    jobs[job_id] = {"status": "done", "result": result}
            except HTTPException as exc:
                with jobs_lock:
                    jobs[job_id] = {"status": "error", "error": str(exc.detail)}
            except Exception as exc:  # pragma: no cover - defensive
                with jobs_lock:
                    jobs[job_id] = {"status": "error", "error": str(exc)}

        executor.submit(run)
        return canonical_json({"job_id": job_id, "status": "running"}, status_code=202)

    @app.get("/spec")
    def openapi_spec():
        return app.openapi()

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        with jobs_lock:
            job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return canonical_json({"job_id": job_id, **job})

    @app.post("/networks")
    async def upload_network(
        nodes: UploadFile = File(...),
        edges: UploadFile = File(...),
        skills: UploadFile = File(...),
    ):
        with tempfile.TemporaryDirectory() as tmp:
            tmp_path = Path(tmp)
            for upload, name in ((nodes, "nodes.tsv"), (edges, "edges.tsv"), (skills, "skills.tsv")):
                (tmp_path / name).write_bytes(await upload.read())
            try:
                net = load_network(
                    tmp_path / "nodes.tsv", tmp_path / "edges.tsv", tmp_path / "skills.tsv"
                )
            except ExesError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        network_id = f"net-{next(ids)}"
        networks[network_id] = _NetworkEntry(net)
        return canonical_json(
            {
                "network_id": network_id,
                "n_nodes": net.n_nodes,
                "n_edges": len(net.edges),
                "n_skills": len(net.skill_universe),
            }
        )

    @app.post("/rank")
    def rank(req: RankRequest):
        entry = entry_of(req.network_id)
        q = query_of(entry.net, req.keywords, req.k)
        ranking = ranker_obj.rank(entry.net, q)
        entries = [
            {
                "node": node,
                "name": entry.net.display_names[node],
                "score": score,
                "rank": i + 1,
                "relevant": i + 1 <= q.k,
            }
            for i, (node, score) in enumerate(ranking.entries)
        ]
        return canonical_json({"k": q.k, "entries": entries})

    @app.post("/team")
    def team(req: TeamRequest):
        entry = entry_of(req.network_id)
        q = query_of(entry.net, req.keywords, k=1)
        try:
            entry.net.check_node(req.seed)
        except UnknownNode:
            raise HTTPException(status_code=404, detail=f"unknown node {req.seed}") from None
        result = greedy_form_team(entry.net, q, req.seed, ranker_obj)
        return canonical_json(
            {
                "members": sorted(result.members),
                "seed_member": result.seed_member,
                "covered": sorted(result.covered),
                "join_order": list(result.join_order),
                "fully_covered": set(q.keywords) <= set(result.covered),
            }
        )

    @app.post("/explain/factual")
    def explain_factual(req: FactualRequest):
        entry = entry_of(req.network_id)
        q = query_of(entry.net, req.keywords, req.k)
        try:
            entry.net.check_node(req.subject)
        except UnknownNode:
            raise HTTPException(status_code=404, detail=f"unknown node {req.subject}") from None
        if req.facet not in ("skills", "query", "collaborations"):
            raise HTTPException(status_code=422, detail=f"unknown facet {req.facet!r}")
        vf = factual.STATUS if req.value_function == "status" else factual.MARGIN

        def compute():
            probe = probe_for(entry, req.mode, req.team_seed)
            kwargs = dict(vf=vf, samples=req.samples, seed=req.seed)
            if req.facet == "skills":
                expl = factual.explain_skills(
                    probe, q, req.subject, d=req.d if req.d is not None else 1, **kwargs
                )
            elif req.facet == "query":
                expl = factual.explain_query(probe, q, req.subject, **kwargs)
            else:
                expl = factual.explain_collaborations(
                    probe, q, req.subject,
                    d=req.d if req.d is not None else 2, tau=req.tau, **kwargs,
                )
            return expl.to_json()

        if req.background:
            return submit_job(compute)
        return canonical_json(compute())

    @app.post("/explain/counterfactual")
    def explain_cf(req: CounterfactualRequest):
        entry = entry_of(req.network_id)
        q = query_of(entry.net, req.keywords, req.k)
        try:
            entry.net.check_node(req.subject)
        except UnknownNode:
            raise HTTPException(status_code=404, detail=f"unknown node {req.subject}") from None
        if req.kind not in KINDS:
            raise HTTPException(status_code=422, detail=f"unknown kind {req.kind!r}")
        params = BeamParams(b=req.b, gamma=req.gamma, e=req.e, t=req.t)

        def compute():
            probe = probe_for(entry, req.mode, req.team_seed)
            try:
                explanations = explain_counterfactual(
                    probe, q, req.subject, req.kind,
                    params=params, emb=entry.embedding, d=req.d,
                )
                reason = None if explanations else "search exhausted without a flip"
            except NoCandidates as exc:
                explanations = []
                reason = str(exc)
            payload = {
                "subject": req.subject,
                "kind": req.kind,
                "explanations": [e.to_json() for e in explanations],
            }
            if reason:
                payload["reason"] = reason
            return payload

        if req.background:
            return submit_job(compute)
        try:
            return canonical_json(compute())
        except DirectionMismatch as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None

    @app.get("/skills/similar")
    def skills_similar(network_id: str, q: str, t: int = 10):
        entry = entry_of(network_id)
        tokens = [s for s in q.split(",") if s]
        if not tokens:
            raise HTTPException(status_code=422, detail="q must list at least one skill token")
        for s in tokens:
            if s not in entry.net.skill_universe:
                raise HTTPException(status_code=422, detail=f"unknown skill {s!r}")
        return canonical_json({"skills": top_similar(entry.embedding, tokens, t=t)})

    ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if data_dir:
        alt = Path(data_dir) / "ui"
        if alt.is_dir():
            ui_dir = alt
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
