import pytest

from exes.corpus import Query, build_network
from exes.counterfactual import (
    BeamParams,
    CandidatePerturbation,
    generate_candidates,
    add_edge,
    add_keyword,
    add_skill,
    beam_search,
    candidates_link_add,
    candidates_link_remove,
    candidates_query_augment,
    candidates_skill_add,
    candidates_skill_remove,
    explain_counterfactual,
    probe_with,
    remove_edge,
    remove_skill,
)
from exes.embedding import fit_embedding
from exes.engine import Probe
from exes.errors import DirectionMismatch, NoCandidates

from oracles import PlainGraph, apply_perturbations, greedy_team, minimal_flips, status_of


@pytest.fixture(scope="module")
def t4_emb(request):
    net = request.getfixturevalue("t4")
    return fit_embedding(net, 2)


def test_beam_params_validation():
    with pytest.raises(ValueError):
        BeamParams(b=0)
    with pytest.raises(ValueError):
        BeamParams(gamma=0)


def test_skill_add_candidates_t4(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    out = candidates_skill_add(probe, q_ml_db, 2, t4_emb, d=1, t=2)
    # top-2 query-similar skills are ml then graphs; hood(p3, 1) = {1, 2, 3}
    assert out[:2] == [add_skill(2, "ml"), add_skill(3, "ml")]
    assert add_skill(1, "ml") not in out  # already held
    assert {c.payload[1] for c in out} == {"ml", "graphs"}


def test_skill_add_flip_t4(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    res = explain_counterfactual(probe, q_ml_db, 2, "skill-add", emb=t4_emb)
    assert res
    best = res[0]
    assert best.perturbations == frozenset({add_skill(2, "ml")})
    assert best.new_rank == 2 and best.flipped_to


def test_skill_remove_candidates_t4(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    out = candidates_skill_remove(probe, q_ml_db, 0, t4_emb, d=1, t=10)
    # ml pairs lead (most query-similar), node id breaks the ml tie
    assert out[:2] == [remove_skill(0, "ml"), remove_skill(1, "ml")]
    assert set(out) == {
        remove_skill(0, "ml"),
        remove_skill(1, "ml"),
        remove_skill(0, "graphs"),
        remove_skill(1, "db"),
    }


def test_skill_remove_flip_t4(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    res = explain_counterfactual(probe, q_ml_db, 0, "skill-rm", emb=t4_emb)
    assert res[0].perturbations == frozenset({remove_skill(0, "ml")})
    assert res[0].new_rank == 3 and not res[0].flipped_to


def test_query_demote_t4(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    cands = candidates_query_augment(probe, q_ml_db, 0, t4_emb, t=10, direction="demote")
    # pool excludes the query and p1's own skills; sql outranks ir
    assert cands == [add_keyword("sql"), add_keyword("ir")]
    res = explain_counterfactual(probe, q_ml_db, 0, "query-demote", emb=t4_emb)
    assert res[0].perturbations == frozenset({add_keyword("sql")})
    assert res[0].new_rank == 3


def test_query_promote_t4(t4, t4_emb, q_ml_db):
    # p3 is rank 3; widening the query with sql lifts it into the top 2
    probe = Probe(t4)
    res = explain_counterfactual(probe, q_ml_db, 2, "query-promote", emb=t4_emb)
    assert frozenset({add_keyword("sql")}) in [e.perturbations for e in res]
    best = res[0]
    assert best.size() == 1 and best.flipped_to


def test_link_add_candidates_t4(t4):
    probe = Probe(t4)
    q = Query(("ml", "db"), 1)
    out = candidates_link_add(probe, q, 3, d=1, t=10)
    # (0,2) and (1,3) tie on score, pair order first; existing edges skipped
    assert out == [add_edge(0, 2), add_edge(1, 3), add_edge(0, 3)]


def test_link_remove_candidates_and_flip_t4(t4, q_ml_db):
    probe = Probe(t4)
    out = candidates_link_remove(probe, q_ml_db, 0, d=2, t=10)
    assert out == [remove_edge(0, 1), remove_edge(1, 2)]
    res = explain_counterfactual(probe, q_ml_db, 0, "link-rm")
    assert res[0].perturbations == frozenset({remove_edge(0, 1)})
    assert res[0].new_rank == 3


def test_direction_mismatch(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    with pytest.raises(DirectionMismatch):
        explain_counterfactual(probe, q_ml_db, 0, "skill-add", emb=t4_emb)  # already relevant
    with pytest.raises(DirectionMismatch):
        explain_counterfactual(probe, q_ml_db, 2, "skill-rm", emb=t4_emb)  # not relevant


def test_no_candidates_on_complete_graph():
    net = build_network(
        ["a", "b", "c"],
        edges=[(0, 1), (0, 2), (1, 2)],
        skills_of=[{"a"}, {"a"}, {"b"}],
    )
    probe = Probe(net)
    with pytest.raises(NoCandidates):
        explain_counterfactual(probe, Query(("a",), 1), 2, "link-add")


def test_validity_against_oracle(t4, t4_emb, q_ml_db):
    # every returned explanation must flip the status when re-applied longhand
    probe = Probe(t4)
    g = PlainGraph.from_network(t4)
    for subject, kind in [(0, "skill-rm"), (0, "link-rm"), (0, "query-demote"),
                          (2, "skill-add"), (2, "query-promote")]:
        res = explain_counterfactual(probe, q_ml_db, subject, kind, emb=t4_emb)
        initial = status_of(g, q_ml_db.keywords, q_ml_db.k, subject)
        for expl in res:
            raw = [(p.kind, p.payload) for p in expl.sorted_perturbations()]
            h, kw = apply_perturbations(g, q_ml_db.keywords, raw)
            assert status_of(h, kw, q_ml_db.k, subject) != initial


def test_minimality_against_oracle(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    g = PlainGraph.from_network(t4)
    wide = BeamParams(b=1000, gamma=3, e=50, t=10)
    for subject, kind in [(0, "skill-rm"), (2, "skill-add"), (0, "query-demote")]:
        res = explain_counterfactual(probe, q_ml_db, subject, kind, params=wide, emb=t4_emb)
        cands = [
            (p.kind, p.payload)
            for p in generate_candidates(probe, q_ml_db, subject, kind, 10, emb=t4_emb)
        ]
        size, hits = minimal_flips(g, q_ml_db.keywords, q_ml_db.k, subject, cands, gamma=3)
        assert res and size is not None
        assert res[0].size() == size
        engine_min = {e.perturbations for e in res if e.size() == size}
        oracle_min = {
            frozenset(CandidatePerturbation(kind=k2, payload=pl) for k2, pl in combo)
            for combo in hits
        }
        assert engine_min == oracle_min


def test_results_sorted_and_deterministic(t4, t4_emb, q_ml_db):
    probe = Probe(t4)
    wide = BeamParams(b=100, gamma=2, e=20, t=10)
    a = explain_counterfactual(probe, q_ml_db, 0, "skill-rm", params=wide, emb=t4_emb)
    b = explain_counterfactual(probe, q_ml_db, 0, "skill-rm", params=wide, emb=t4_emb)
    assert [e.encoding() for e in a] == [e.encoding() for e in b]
    keys = [(e.size(), -abs(e.new_rank - 2), e.encoding()) for e in a]
    assert keys == sorted(keys)


def test_superset_results_pruned(t4, t4_emb, q_ml_db):
    # no returned set may contain another returned set
    probe = Probe(t4)
    wide = BeamParams(b=100, gamma=3, e=50, t=10)
    res = explain_counterfactual(probe, q_ml_db, 0, "skill-rm", params=wide, emb=t4_emb)
    sets = [e.perturbations for e in res]
    assert all(not (s < t) for s in sets for t in sets)


def test_probe_with_matches_scratch_apply(t4, q_ml_db):
    probe = Probe(t4)
    g = PlainGraph.from_network(t4)
    perts = {add_skill(2, "ml"), add_keyword("sql")}
    rank, status = probe_with(probe, q_ml_db, 2, perts)
    raw = sorted((p.kind, p.payload) for p in perts)
    h, kw = apply_perturbations(g, q_ml_db.keywords, raw)
    from oracles import rank_of

    assert rank == rank_of(h, kw, 2)
    assert status == status_of(h, kw, q_ml_db.k, 2)


def test_team_mode_link_removal(t4):
    # p3 joins the team only through the p2 bridge; cutting it drops p3 out
    probe = Probe(t4, mode="team", team_seed=1)
    q = Query(("ml", "sql"), 2)
    _, member = probe.initial_status(q, 2)
    assert member
    res = explain_counterfactual(probe, q, 2, "link-rm")
    assert res[0].perturbations == frozenset({remove_edge(1, 2)})
    assert not res[0].flipped_to
    g = PlainGraph.from_network(t4)
    g.edges.discard((1, 2))
    assert 2 not in greedy_team(g, q.keywords, 1)


def test_beam_search_empty_candidates(t4, q_ml_db):
    with pytest.raises(NoCandidates):
        beam_search(Probe(t4), q_ml_db, 0, [], BeamParams())


def test_unknown_kind(t4, t4_emb, q_ml_db):
    with pytest.raises(ValueError):
        explain_counterfactual(Probe(t4), q_ml_db, 0, "bogus", emb=t4_emb)
