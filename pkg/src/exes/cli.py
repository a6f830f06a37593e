"""Command-line driver for the explanation engine.

Flag names mirror the HTTP service field names; ``--json`` emits the same
canonical schema the service serves.  Exit codes: 0 success, 2 validation
error, 3 timeout.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import factual
from .corpus import (
    Query,
    generate_synthetic,
    load_network_dir,
    save_network_dir,
)
from .counterfactual import BeamParams, KINDS, explain_counterfactual
from .embedding import fit_embedding, load_embedding, save_embedding
from .engine import RANKERS, Probe, greedy_form_team
from .errors import ExesError, ExplanationTimeout
from .evalharness import EvalConfig, run_protocol, write_report
from .jsonio import canonical_dumps


def _load_net(net_dir):
    if net_dir is None:
        raise click.UsageError("--net is required (or set EXES_DATA_DIR)")
    return load_network_dir(net_dir)


def _parse_query(q: str, k: int) -> Query:
    keywords = tuple(s for s in q.split(",") if s)
    if not keywords:
        raise click.UsageError("--q must list at least one skill token")
    return Query(keywords=keywords, k=k)


def _embedding_for(net, cache_path):
    if cache_path and Path(cache_path).exists():
        return load_embedding(cache_path)
    emb = fit_embedding(net, dimension=max(1, min(16, len(net.skill_universe))))
    if cache_path:
        save_embedding(emb, cache_path)
    return emb


net_option = click.option(
    "--net", envvar="EXES_DATA_DIR", type=click.Path(exists=True, file_okay=False),
    help="Directory with nodes.tsv / edges.tsv / skills.tsv.",
)
json_option = click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
ranker_option = click.option(
    "--ranker", default="reference", type=click.Choice(sorted(RANKERS)), show_default=True
)


@click.group()
def main():
    """Explain expert search and team formation over collaboration networks."""


@main.command()
@net_option
@click.option("--q", required=True, help="Comma-separated query skills.")
@click.option("--k", default=10, show_default=True)
@ranker_option
@json_option
def rank(net, q, k, ranker, as_json):
    """Rank all nodes for a query."""
    network = _load_net(net)
    query = _parse_query(q, k)
    network.check_query(query)
    ranking = RANKERS[ranker]().rank(network, query)
    if as_json:
        payload = {
            "k": query.k,
            "entries": [
                {
                    "node": node,
                    "name": network.display_names[node],
                    "score": score,
                    "rank": i + 1,
                    "relevant": i + 1 <= query.k,
                }
                for i, (node, score) in enumerate(ranking.entries)
            ],
        }
        click.echo(canonical_dumps(payload))
        return
    click.echo(f"{'rank':>4}  {'node':>4}  {'score':>10}  relevant  name")
    for i, (node, score) in enumerate(ranking.entries):
        mark = "yes" if i + 1 <= query.k else "no"
        click.echo(f"{i + 1:>4}  {node:>4}  {score:>10.4f}  {mark:>8}  {network.display_names[node]}")


@main.command()
@net_option
@click.option("--q", required=True)
@click.option("--seed", "seed_member", required=True, type=int, help="Seed team member.")
@ranker_option
@json_option
def team(net, q, seed_member, ranker, as_json):
    """Form a team around a seed member."""
    network = _load_net(net)
    query = _parse_query(q, k=1)
    network.check_query(query)
    result = greedy_form_team(network, query, seed_member, RANKERS[ranker]())
    if as_json:
        click.echo(
            canonical_dumps(
                {
                    "members": sorted(result.members),
                    "seed_member": result.seed_member,
                    "covered": sorted(result.covered),
                    "join_order": list(result.join_order),
                    "fully_covered": set(query.keywords) <= set(result.covered),
                }
            )
        )
        return
    names = ", ".join(f"{p} ({network.display_names[p]})" for p in result.join_order)
    click.echo(f"team: {names}")
    click.echo(f"covered: {', '.join(sorted(result.covered)) or '(nothing)'}")


@main.group()
def explain():
    """Factual and counterfactual explanations."""


def _mode_options(fn):
    fn = click.option("--mode", default="search", type=click.Choice(["search", "team"]),
                      show_default=True)(fn)
    fn = click.option("--team-seed", type=int, default=None)(fn)
    return fn


@explain.command("factual")
@net_option
@click.option("--q", required=True)
@click.option("--k", default=10, show_default=True)
@click.option("--subject", required=True, type=int)
@click.option("--facet", default="skills", show_default=True,
              type=click.Choice(["skills", "query", "collaborations"]))
@click.option("--d", type=int, default=None, help="Neighborhood radius (facet default otherwise).")
@click.option("--tau", default=0.1, show_default=True)
@click.option("--vf", default="status", type=click.Choice(["status", "margin"]), show_default=True)
@click.option("--samples", default=2048, show_default=True)
@click.option("--seed", default=0, show_default=True)
@ranker_option
@_mode_options
@json_option
def explain_factual(net, q, k, subject, facet, d, tau, vf, samples, seed, ranker, mode,
                    team_seed, as_json):
    """Shapley attribution of the subject's status."""
    network = _load_net(net)
    query = _parse_query(q, k)
    network.check_query(query)
    if mode == "team" and team_seed is None:
        raise click.UsageError("--team-seed is required with --mode team")
    probe = Probe(network, RANKERS[ranker](), mode=mode, team_seed=team_seed)
    value_fn = factual.STATUS if vf == "status" else factual.MARGIN
    kwargs = dict(vf=value_fn, samples=samples, seed=seed)
    if facet == "skills":
        expl = factual.explain_skills(probe, query, subject, d=d if d is not None else 1, **kwargs)
    elif facet == "query":
        expl = factual.explain_query(probe, query, subject, **kwargs)
    else:
        expl = factual.explain_collaborations(
            probe, query, subject, d=d if d is not None else 2, tau=tau, **kwargs
        )
    if as_json:
        click.echo(canonical_dumps(expl.to_json()))
        return
    click.echo(f"subject {subject} ({network.display_names[subject]}), mode {expl.mode}")
    click.echo(f"value(full) = {expl.value_full:.4f}, value(empty) = {expl.value_empty:.4f}")
    for item in sorted(expl.attributions.items(), key=lambda kv: -abs(kv[1])):
        feature, phi = item
        click.echo(f"  {phi:>+9.4f}  {feature.kind}  {feature.payload}")


@explain.command("cf")
@net_option
@click.option("--q", required=True)
@click.option("--k", default=10, show_default=True)
@click.option("--subject", required=True, type=int)
@click.option("--kind", required=True, type=click.Choice(list(KINDS)))
@click.option("--b", default=30, show_default=True)
@click.option("--gamma", default=5, show_default=True)
@click.option("--e", default=5, show_default=True)
@click.option("--t", default=10, show_default=True)
@click.option("--d", type=int, default=None)
@click.option("--embedding-cache", type=click.Path(), default=None)
@ranker_option
@_mode_options
@json_option
def explain_cf(net, q, k, subject, kind, b, gamma, e, t, d, embedding_cache, ranker, mode,
               team_seed, as_json):
    """Minimal perturbation sets that flip the subject's status."""
    network = _load_net(net)
    query = _parse_query(q, k)
    network.check_query(query)
    if mode == "team" and team_seed is None:
        raise click.UsageError("--team-seed is required with --mode team")
    probe = Probe(network, RANKERS[ranker](), mode=mode, team_seed=team_seed)
    emb = _embedding_for(network, embedding_cache)
    explanations = explain_counterfactual(
        probe, query, subject, kind,
        params=BeamParams(b=b, gamma=gamma, e=e, t=t), emb=emb, d=d,
    )
    if as_json:
        click.echo(
            canonical_dumps(
                {
                    "subject": subject,
                    "kind": kind,
                    "explanations": [x.to_json() for x in explanations],
                }
            )
        )
        return
    if not explanations:
        click.echo("no flip found within the search budget")
        return
    for i, x in enumerate(explanations, start=1):
        steps = "; ".join(p.encoding() for p in x.sorted_perturbations())
        click.echo(f"{i}. size {x.size()}, new rank {x.new_rank}: {steps}")


@main.group("eval")
def eval_group():
    """Evaluation protocol."""


@eval_group.command("run")
@net_option
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON file overriding EvalConfig fields.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=True, show_default=True)
def eval_run(net, config_path, out_dir, figures):
    """Run every method and baseline; write report.csv/json, timings, figures."""
    network = _load_net(net)
    overrides = {}
    if config_path:
        overrides = json.loads(Path(config_path).read_text(encoding="utf-8"))
    beam = BeamParams(**overrides.pop("beam", {}))
    config = EvalConfig(params=beam, **overrides)
    report, timings = run_protocol(network, config)
    write_report(report, timings, out_dir, figures=figures)
    click.echo(f"wrote {Path(out_dir) / 'report.csv'}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--workers", default=2, show_default=True)
@click.option("--data-dir", type=click.Path(), default=None)
@ranker_option
def serve(port, workers, data_dir, ranker):
    """Start the HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(ranker=ranker, workers=workers, data_dir=data_dir),
                host="127.0.0.1", port=port)


@main.group()
def fixtures():
    """Fixture generation."""


@fixtures.command("gen")
@click.option("--n", default=100, show_default=True)
@click.option("--skills", "n_skills", default=30, show_default=True)
@click.option("--deg", "avg_degree", default=6.0, show_default=True)
@click.option("--spn", "skills_per_node", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def fixtures_gen(n, n_skills, avg_degree, skills_per_node, seed, out_dir):
    """Write a seeded synthetic network as TSV files."""
    net = generate_synthetic(n, n_skills, avg_degree, skills_per_node, seed)
    save_network_dir(net, out_dir)
    click.echo(f"wrote {net.n_nodes} nodes, {len(net.edges)} edges to {out_dir}")


def run_main():
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(2)
    except ExplanationTimeout as exc:
        click.echo(f"timeout: {exc}", err=True)
        sys.exit(3)
    except ExesError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    run_main()
