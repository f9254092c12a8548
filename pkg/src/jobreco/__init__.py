"""Talent-to-job recommendation: attribute scoring, language-model ranking and a hybrid of both."""

from .backend import (
    CompletionRequest,
    CompletionResponse,
    LiveBackend,
    ScriptedBackend,
    TranscriptBackend,
    estimate_tokens,
    live_backend,
    load_script,
    scripted_backend,
)
from .config import AppConfig, load_config
from .domain import (
    ATTRIBUTES,
    JobRequirement,
    MatchConfig,
    Recommendation,
    SkillLevel,
    TalentProfile,
    validate_catalog,
    validate_job,
    validate_profile,
)
from .errors import BackendError, DataError, JobRecoError, JobRecoWarning
from .estimators import DeterministicRecommender, HybridRecommender, LLMRecommender
from .evaluate import (
    EvaluationReport,
    ReferenceScores,
    RunInputs,
    evaluate_ranked,
    evaluate_scored,
    measure_run,
)
from .extract import extract_job, extract_talent, generate_cv_from_jd
from .hybrid import rate_org_and_role, recommend_hybrid, run_hybrid
from .llm import (
    ChunkParams,
    ChunkPlan,
    GuidedCriteria,
    chunked_recommend,
    parse_guided,
    parse_unguided,
    plan_chunks,
    recommend_guided,
    recommend_unguided,
)
from .scoring import ScoreBreakdown, rank_jobs, recommend_deterministic, score_job
from .synth import (
    AttributeCatalog,
    DeviationSpec,
    generate_dataset,
    generate_jd_set,
    load_catalog,
    render_unstructured,
    sample_talent,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
