"""Entity alignment engine built on two-dimensional truth-value inference."""

from .config import ConfigError, RunConfig, load_config
from .inference import (
    AlignmentSnapshot,
    InferenceEngine,
    InferenceParams,
    PathEvidence,
    SimilaritySentence,
    aggregate_candidate,
    bridge_truth,
    replay_path,
)
from .kg import KnowledgeGraph, TermStore, inject_seed_label_triples, load_kg, load_links
from .matching import CandidateList, MatchResult, MatchSentence, rbmat, swap_refine
from .pipeline import EvaluationReport, Pipeline, bootstrap_unsupervised, evaluate, run
from .sideinfo import EmbeddingTable, NameEvidenceConfig, SideInfo, load_embeddings
from .truth import Evidence, TruthValue

__all__ = [
    "AlignmentSnapshot",
    "CandidateList",
    "ConfigError",
    "EmbeddingTable",
    "Evidence",
    "EvaluationReport",
    "InferenceEngine",
    "InferenceParams",
    "KnowledgeGraph",
    "MatchResult",
    "MatchSentence",
    "NameEvidenceConfig",
    "PathEvidence",
    "Pipeline",
    "RunConfig",
    "SideInfo",
    "SimilaritySentence",
    "TermStore",
    "TruthValue",
    "aggregate_candidate",
    "bootstrap_unsupervised",
    "bridge_truth",
    "evaluate",
    "inject_seed_label_triples",
    "load_config",
    "load_embeddings",
    "load_kg",
    "load_links",
    "rbmat",
    "replay_path",
    "run",
    "swap_refine",
]

__version__ = "0.1.0"
