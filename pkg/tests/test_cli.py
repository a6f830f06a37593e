import json
import subprocess
import sys

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from exes.cli import main
from exes.service import create_app

from conftest import T4_DIR


@pytest.fixture()
def runner():
    return CliRunner()


def test_rank_table(runner):
    res = runner.invoke(main, ["rank", "--net", str(T4_DIR), "--q", "ml,db", "--k", "2"])
    assert res.exit_code == 0
    lines = res.output.strip().split("\n")
    assert lines[0].split()[:2] == ["rank", "node"]
    first = lines[1].split()
    assert first[0] == "1" and first[1] == "1" and first[3] == "yes"
    assert "p2" in lines[1]


def test_rank_json_matches_service(runner):
    res = runner.invoke(
        main, ["rank", "--net", str(T4_DIR), "--q", "ml,db", "--k", "2", "--json"]
    )
    assert res.exit_code == 0

    client = TestClient(create_app())
    files = {
        "nodes": ("nodes.tsv", (T4_DIR / "nodes.tsv").read_bytes()),
        "edges": ("edges.tsv", (T4_DIR / "edges.tsv").read_bytes()),
        "skills": ("skills.tsv", (T4_DIR / "skills.tsv").read_bytes()),
    }
    nid = client.post("/networks", files=files).json()["network_id"]
    http = client.post("/rank", json={"network_id": nid, "keywords": ["ml", "db"], "k": 2})
    assert res.output.strip() == http.content.decode()


def test_team_json(runner):
    res = runner.invoke(
        main, ["team", "--net", str(T4_DIR), "--q", "ml,sql", "--seed", "0", "--json"]
    )
    assert res.exit_code == 0
    body = json.loads(res.output)
    assert body["join_order"] == [0, 1, 2]
    assert body["fully_covered"]


def test_explain_factual_text(runner):
    res = runner.invoke(main, [
        "explain", "factual", "--net", str(T4_DIR),
        "--q", "ml,db", "--k", "2", "--subject", "0", "--facet", "query",
    ])
    assert res.exit_code == 0
    assert "value(full) = 1.0000" in res.output
    assert "query_keyword" in res.output


def test_explain_cf_json_matches_service(runner, tmp_path):
    cache = tmp_path / "emb.tsv"
    args = [
        "explain", "cf", "--net", str(T4_DIR),
        "--q", "ml,db", "--k", "2", "--subject", "2", "--kind", "skill-add",
        "--embedding-cache", str(cache), "--json",
    ]
    res = runner.invoke(main, args)
    assert res.exit_code == 0
    assert cache.exists()

    client = TestClient(create_app())
    files = {
        "nodes": ("nodes.tsv", (T4_DIR / "nodes.tsv").read_bytes()),
        "edges": ("edges.tsv", (T4_DIR / "edges.tsv").read_bytes()),
        "skills": ("skills.tsv", (T4_DIR / "skills.tsv").read_bytes()),
    }
    nid = client.post("/networks", files=files).json()["network_id"]
    http = client.post("/explain/counterfactual", json={
        "network_id": nid, "keywords": ["ml", "db"], "k": 2,
        "subject": 2, "kind": "skill-add",
    })
    assert res.output.strip() == http.content.decode()

    # second run reads the cache and produces the same bytes
    res2 = runner.invoke(main, args)
    assert res2.output == res.output


def test_fixtures_gen_deterministic(runner, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        res = runner.invoke(main, [
            "fixtures", "gen", "--n", "12", "--skills", "6", "--deg", "3",
            "--spn", "2", "--seed", "5", "--out", str(out),
        ])
        assert res.exit_code == 0
    for name in ("nodes.tsv", "edges.tsv", "skills.tsv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_fixtures_roundtrip_loads(runner, tmp_path):
    out = tmp_path / "net"
    runner.invoke(main, ["fixtures", "gen", "--n", "8", "--skills", "4", "--deg", "2",
                         "--spn", "2", "--seed", "1", "--out", str(out)])
    res = runner.invoke(main, ["rank", "--net", str(out), "--q", "skill0", "--k", "3"])
    assert res.exit_code == 0


def test_eval_run_writes_outputs(runner, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "n_queries": 1, "keywords_min": 2, "keywords_max": 2, "k": 2,
        "mc_samples": 4, "seed": 3,
        "beam": {"b": 8, "gamma": 2, "e": 3, "t": 5},
    }))
    out = tmp_path / "report"
    res = runner.invoke(main, [
        "eval", "run", "--net", str(T4_DIR), "--config", str(config),
        "--out", str(out), "--no-figures",
    ])
    assert res.exit_code == 0, res.output
    assert (out / "report.csv").exists()
    assert (out / "report.json").exists()
    assert (out / "timings.json").exists()
    assert not list(out.glob("*.png"))
    header = (out / "report.csv").read_text().split("\n")[0]
    assert header.startswith("method,n_instances")


def test_env_var_supplies_net(runner):
    res = runner.invoke(
        main, ["rank", "--q", "ml", "--k", "1"], env={"EXES_DATA_DIR": str(T4_DIR)}
    )
    assert res.exit_code == 0


def test_missing_net_usage_error(runner):
    res = runner.invoke(main, ["rank", "--q", "ml", "--k", "1"], env={"EXES_DATA_DIR": None})
    assert res.exit_code != 0
    assert "--net" in res.output


def test_exit_code_validation_error():
    proc = subprocess.run(
        [sys.executable, "-m", "exes.cli", "rank", "--net", str(T4_DIR), "--q", "nope"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2


def test_exit_code_ok():
    proc = subprocess.run(
        [sys.executable, "-m", "exes.cli", "rank", "--net", str(T4_DIR), "--q", "ml"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
