"""Factual and counterfactual explanations for expert search and team formation."""

from .corpus import (
    CollaborationNetwork,
    NetworkView,
    PerturbationOverlay,
    Query,
    apply_overlay,
    generate_synthetic,
    load_network,
    load_network_dir,
    neighborhood,
)
from .counterfactual import BeamParams, CounterfactualExplanation, explain_counterfactual
from .embedding import SkillEmbedding, fit_embedding, top_similar
from .engine import Probe, RankedList, ReferenceRanker, greedy_form_team, relevance_status
from .factual import (
    FactualExplanation,
    explain_collaborations,
    explain_query,
    explain_skills,
    shapley_values,
)

__all__ = [
    "BeamParams",
    "CollaborationNetwork",
    "CounterfactualExplanation",
    "FactualExplanation",
    "NetworkView",
    "PerturbationOverlay",
    "Probe",
    "Query",
    "RankedList",
    "ReferenceRanker",
    "SkillEmbedding",
    "apply_overlay",
    "explain_collaborations",
    "explain_counterfactual",
    "explain_query",
    "explain_skills",
    "fit_embedding",
    "generate_synthetic",
    "greedy_form_team",
    "load_network",
    "load_network_dir",
    "neighborhood",
    "relevance_status",
    "shapley_values",
    "top_similar",
]
