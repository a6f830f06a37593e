import pytest

from exes.corpus import Query, generate_synthetic
from exes.engine import Probe
from exes.factual import (
    MARGIN,
    STATUS,
    coalition_value,
    edge_feature,
    explain_collaborations,
    explain_query,
    explain_skills,
    node_skill,
    query_keyword,
    shapley_values,
)

from oracles import PlainGraph, factual_value_oracle, shapley_by_permutations


def p1_skill_features():
    return [node_skill(0, "graphs"), node_skill(0, "ml")]


def test_coalition_value_t4(t4, q_ml_db):
    probe = Probe(t4)
    feats = p1_skill_features()
    # everything off: p1 keeps only neighbor contributions, drops to rank 3
    assert coalition_value(probe, q_ml_db, 0, feats, frozenset(), STATUS) == 0.0
    full = frozenset(feats)
    assert coalition_value(probe, q_ml_db, 0, feats, full, STATUS) == 1.0


def test_value_functions():
    assert STATUS(1, True, 2) == 1.0
    assert STATUS(3, False, 2) == 0.0
    assert MARGIN(1, True, 2) == 1.0
    assert MARGIN(4, False, 2) == -0.5
    assert MARGIN(100, False, 2) == -1.0  # clamped


def test_exact_shapley_matches_permutation_oracle(t4, q_ml_db):
    probe = Probe(t4)
    feats = [node_skill(0, "graphs"), node_skill(0, "ml"), node_skill(1, "db"), node_skill(1, "ml")]
    exp = shapley_values(probe, q_ml_db, 0, feats)
    assert exp.exact

    g = PlainGraph.from_network(t4)
    raw = [(f.kind, f.payload) for f in feats]
    value = factual_value_oracle(g, q_ml_db.keywords, q_ml_db.k, 0, raw)
    expected = shapley_by_permutations(len(feats), value)
    for f, want in zip(feats, expected):
        assert exp.attributions[f] == pytest.approx(want, abs=1e-12)


def test_efficiency_axiom(t4, q_ml_db):
    probe = Probe(t4)
    exp = explain_skills(probe, q_ml_db, 0, d=1)
    assert sum(exp.attributions.values()) == pytest.approx(
        exp.value_full - exp.value_empty, abs=1e-9
    )


def test_null_player_axiom(t4, q_ml_db):
    # p4's "ir" skill can never change p1's relevance for q={ml, db}
    probe = Probe(t4)
    feats = p1_skill_features() + [node_skill(3, "ir")]
    exp = shapley_values(probe, q_ml_db, 0, feats)
    assert exp.attributions[node_skill(3, "ir")] == pytest.approx(0.0, abs=1e-12)


def test_symmetry_axiom():
    # two leaves holding the same single skill are interchangeable for the hub
    from exes.corpus import build_network

    net = build_network(
        ["h", "l1", "l2"],
        edges=[(0, 1), (0, 2)],
        skills_of=[{"a"}, {"b"}, {"b"}],
    )
    probe = Probe(net)
    q = Query(("a", "b"), 1)
    feats = [node_skill(1, "b"), node_skill(2, "b")]
    exp = shapley_values(probe, q, 0, feats, vf=MARGIN)
    assert exp.attributions[feats[0]] == pytest.approx(exp.attributions[feats[1]], abs=1e-12)


def test_explain_query_t4(t4, q_ml_db):
    probe = Probe(t4)
    exp = explain_query(probe, q_ml_db, 0)
    assert exp.features_considered == (query_keyword("ml"), query_keyword("db"))
    # p1 stays relevant on q={ml} alone and drops without ml
    assert exp.attributions[query_keyword("ml")] == pytest.approx(1.0, abs=1e-12)
    assert exp.attributions[query_keyword("db")] == pytest.approx(0.0, abs=1e-12)
    assert (exp.value_full, exp.value_empty) == (1.0, 0.0)


def test_explain_skills_feature_scope(t4, q_ml_db):
    probe = Probe(t4)
    exp = explain_skills(probe, q_ml_db, 0, d=1)
    nodes = {f.payload[0] for f in exp.features_considered}
    assert nodes == {0, 1}
    assert len(exp.features_considered) == 4


def test_explain_collaborations_t4(t4, q_ml_db):
    probe = Probe(t4)
    exp = explain_collaborations(probe, q_ml_db, 0, d=2, tau=0.1)
    kept = {f.payload for f in exp.features_considered}
    assert kept == {(0, 1), (1, 2)}

    g = PlainGraph.from_network(t4)
    raw = [("edge", e) for e in sorted(kept)]
    value = factual_value_oracle(g, q_ml_db.keywords, q_ml_db.k, 0, raw)
    expected = shapley_by_permutations(len(raw), value)
    for (kind, payload), want in zip(raw, expected):
        assert exp.attributions[edge_feature(*payload)] == pytest.approx(want, abs=1e-12)


def test_explain_collaborations_no_impact(t4):
    # p4 is already relevant at k=4 no matter what; nothing clears tau
    probe = Probe(t4)
    exp = explain_collaborations(probe, Query(("ml", "db"), 4), 3, d=2, tau=0.1)
    assert exp.attributions == {}
    assert exp.value_full == exp.value_empty


def test_monte_carlo_close_to_exact():
    net = generate_synthetic(10, 6, 3, 3, seed=11)
    q = Query(tuple(sorted(net.skill_universe)[:3]), 3)
    probe = Probe(net)
    feats = [
        node_skill(u, s)
        for u in range(5)
        for s in sorted(net.skills_of[u])
    ][:13]
    assert len(feats) == 13
    exact = shapley_values(probe, q, 0, feats, exact_threshold=20)
    assert exact.exact
    mc = shapley_values(probe, q, 0, feats, exact_threshold=1, samples=2048, seed=0)
    assert not mc.exact
    for f in feats:
        assert mc.attributions[f] == pytest.approx(exact.attributions[f], abs=0.05)
    assert sum(mc.attributions.values()) == pytest.approx(
        mc.value_full - mc.value_empty, abs=1e-9
    )


def test_monte_carlo_seeded_determinism(t4, q_ml_db):
    probe = Probe(t4)
    feats = [node_skill(u, s) for u in range(4) for s in sorted(t4.skills_of[u])]
    a = shapley_values(probe, q_ml_db, 0, feats, exact_threshold=1, samples=64, seed=9)
    b = shapley_values(probe, q_ml_db, 0, feats, exact_threshold=1, samples=64, seed=9)
    assert a.attributions == b.attributions


def test_empty_features_rejected(t4, q_ml_db):
    with pytest.raises(ValueError):
        shapley_values(Probe(t4), q_ml_db, 0, [])


def test_to_json_shape(t4, q_ml_db):
    exp = explain_query(Probe(t4), q_ml_db, 0)
    payload = exp.to_json()
    assert payload["subject"] == 0
    assert payload["mode"] == "search"
    kinds = {a["kind"] for a in payload["attributions"]}
    assert kinds == {"query_keyword"}
    assert all("phi" in a for a in payload["attributions"])


def test_top_features_ordering(t4, q_ml_db):
    exp = explain_query(Probe(t4), q_ml_db, 0)
    assert exp.top_features(1) == [query_keyword("ml")]
    assert exp.nonzero_features() == {query_keyword("ml")}
