import numpy as np
import pytest

from exes.corpus import generate_synthetic
from exes.embedding import (
    fit_embedding,
    load_embedding,
    save_embedding,
    top_similar,
)
from exes.errors import DimensionTooLarge, EmptyVocabulary

from oracles import PlainGraph, ppmi_matrix


def test_fit_deterministic(t4):
    a = fit_embedding(t4, 3)
    b = fit_embedding(t4, 3)
    assert a.tokens == b.tokens
    assert np.array_equal(a.vectors, b.vectors)


def test_dimension_too_large(t4):
    with pytest.raises(DimensionTooLarge):
        fit_embedding(t4, 6)


def test_ppmi_matches_oracle(t4):
    # recompute the PPMI input longhand and factor it independently; the
    # vectors' gram must equal the positive-spectrum part of the PPMI matrix
    emb = fit_embedding(t4, 5)
    g = PlainGraph.from_network(t4)
    ppmi = ppmi_matrix(g, list(emb.tokens))
    w, v = np.linalg.eigh(ppmi)
    gram_expected = (v * np.maximum(w, 0.0)) @ v.T
    gram_engine = emb.vectors @ emb.vectors.T
    assert np.allclose(gram_engine, gram_expected, atol=1e-9)


def test_cooccurring_skills_more_similar(t4):
    emb = fit_embedding(t4, 2)
    assert emb.similarity("ml", "db") > emb.similarity("ml", "ir")


def test_cosine_symmetry(t4):
    emb = fit_embedding(t4, 3)
    for a in emb.tokens:
        for b in emb.tokens:
            assert abs(emb.similarity(a, b) - emb.similarity(b, a)) < 1e-12


def test_self_most_similar(t4):
    emb = fit_embedding(t4, 4)
    for s in emb.tokens:
        assert top_similar(emb, {s}, t=1) == [s]


def test_top_similar_excluding_target(t4):
    emb = fit_embedding(t4, 4)
    lead = top_similar(emb, {"ml"}, exclude={"ml"}, t=2)
    assert lead[0] in {"db", "graphs"}


def test_top_similar_full_ordering(t4):
    emb = fit_embedding(t4, 4)
    out = top_similar(emb, {"ml"}, exclude={"ml"}, t=99)
    assert sorted(out) == sorted(set(emb.tokens) - {"ml"})
    assert len(out) == len(set(out))


def test_empty_vocabulary(t4):
    emb = fit_embedding(t4, 2)
    with pytest.raises(EmptyVocabulary):
        top_similar(emb, {"ml"}, exclude=set(emb.tokens), t=1)


def test_dangling_skill_zero_vector():
    net = generate_synthetic(6, 8, 2, 2, seed=5)
    missing = sorted(net.skill_universe - set().union(*net.skills_of))
    if not missing:
        pytest.skip("all skills assigned for this seed")
    emb = fit_embedding(net, 3)
    for s in missing:
        assert np.array_equal(emb.vector_of(s), np.zeros(3))
        for other in emb.tokens:
            assert emb.similarity(s, other) == 0.0


def test_identical_rows_identical_vectors():
    # x and y each co-occur only with z, so their co-occurrence rows coincide
    from exes.corpus import build_network

    net = build_network(
        ["a", "b", "c"],
        edges=[(0, 1), (1, 2)],
        skills_of=[{"x", "z"}, {"y", "z"}, {"z"}],
    )
    emb = fit_embedding(net, 3)
    assert np.allclose(emb.vector_of("x"), emb.vector_of("y"), atol=1e-9)


def test_cache_roundtrip(t4, tmp_path):
    emb = fit_embedding(t4, 3)
    path = tmp_path / "emb.tsv"
    save_embedding(emb, path)
    loaded = load_embedding(path)
    assert loaded.tokens == emb.tokens
    assert np.array_equal(loaded.vectors, emb.vectors)
