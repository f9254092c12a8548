"""Estimator-style wrappers: ``fit`` on a job catalog, ``predict`` for talents."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_catalog, check_config, check_positive_int, check_raw_jds, check_talent
from .backend import Backend
from .domain import JobRequirement, MatchConfig, Recommendation, TalentProfile
from .errors import BackendMissingError, InvalidInputError
from .hybrid import HybridResult, run_hybrid
from .llm import DEFAULT_TOKEN_BUDGET, ChunkParams, GuidedCriteria, chunked_recommend, criteria_from_config, job_text
from .scoring import recommend_deterministic, score_job


def _config(directions, weights, top_n) -> MatchConfig:
    return check_config(MatchConfig(directions or {}, weights or {}, top_n))


class DeterministicRecommender(BaseEstimator):
    """Attribute-matching recommender.

    Parameters
    ----------
    directions, weights : dict, optional
        Per-attribute overrides; missing attributes use the defaults.
    top_n : int
        Number of recommendations per talent.

    Examples
    --------
    >>> rec = DeterministicRecommender(top_n=3).fit(jobs)        # doctest: +SKIP
    >>> [r.job_id for r in rec.recommend(talent)]                 # doctest: +SKIP
    ['JD7', 'JD2', 'JD9']
    """

    def __init__(self, directions=None, weights=None, top_n: int = 10):
        self.directions = directions
        self.weights = weights
        self.top_n = top_n

    def fit(self, X: Sequence[JobRequirement], y=None):
        self.config_ = _config(self.directions, self.weights, self.top_n)
        self.jobs_ = check_catalog(X)
        self.job_ids_ = np.array([j.job_id for j in self.jobs_], dtype=object)
        return self

    def recommend(self, talent: TalentProfile) -> list[Recommendation]:
        check_is_fitted(self, "jobs_")
        return recommend_deterministic(talent, self.jobs_, self.config_)

    def predict(self, X: Sequence[TalentProfile]) -> list[list[Recommendation]]:
        return [self.recommend(t) for t in X]

    def transform(self, X: Sequence[TalentProfile]) -> np.ndarray:
        """Total scores, one row per talent and one column per fitted job."""
        check_is_fitted(self, "jobs_")
        out = np.empty((len(X), len(self.jobs_)))
        for i, talent in enumerate(X):
            check_talent(talent)
            out[i] = [score_job(talent, job, self.config_).total for job in self.jobs_]
        return out


def _as_pairs(X) -> list[tuple[str, str]]:
    pairs = []
    for item in X:
        if isinstance(item, JobRequirement):
            pairs.append((item.job_id, job_text(item)))
        else:
            pairs.append(tuple(item))
    return check_raw_jds(pairs)


class LLMRecommender(BaseEstimator):
    """Language-model recommender over raw job texts, guided or unguided.

    ``fit`` takes ``(job_id, text)`` pairs or ``JobRequirement`` objects;
    ``predict`` takes raw CV strings. Large catalogs are split into
    token-budget-sized subsets automatically.
    """

    def __init__(
        self,
        backend: Backend | None = None,
        mode: str = "unguided",
        top_n: int = 3,
        criteria: GuidedCriteria | None = None,
        token_budget: int = DEFAULT_TOKEN_BUDGET,
        per_subset_top_k: int | None = None,
        parallelism: int = 4,
    ):
        self.backend = backend
        self.mode = mode
        self.top_n = top_n
        self.criteria = criteria
        self.token_budget = token_budget
        self.per_subset_top_k = per_subset_top_k
        self.parallelism = parallelism

    def fit(self, X, y=None):
        if self.mode not in ("guided", "unguided"):
            raise InvalidInputError(f"mode must be 'guided' or 'unguided', got {self.mode!r}")
        check_positive_int("top_n", self.top_n)
        check_positive_int("token_budget", self.token_budget)
        criteria = self.criteria
        if self.mode == "guided" and criteria is None:
            criteria = criteria_from_config(MatchConfig(), self.top_n)
        self.params_ = ChunkParams(self.top_n, self.token_budget, self.per_subset_top_k, criteria, self.parallelism)
        self.jds_ = _as_pairs(X)
        return self

    def recommend(self, talent_raw: str) -> list[Recommendation]:
        check_is_fitted(self, "jds_")
        if self.backend is None:
            raise BackendMissingError(f"{self.mode} mode needs a backend")
        return chunked_recommend(talent_raw, self.jds_, self.mode, self.params_, self.backend)

    def predict(self, X: Sequence[str]) -> list[list[Recommendation]]:
        return [self.recommend(cv) for cv in X]


class HybridRecommender(BaseEstimator):
    def __init__(
        self,
        backend: Backend | None = None,
        directions=None,
        weights=None,
        shortlist_k: int = 5,
        final_n: int = 3,
        token_budget: int = DEFAULT_TOKEN_BUDGET,
        parallelism: int = 4,
    ):
        self.backend = backend
        self.directions = directions
        self.weights = weights
        self.shortlist_k = shortlist_k
        self.final_n = final_n
        self.token_budget = token_budget
        self.parallelism = parallelism

    def fit(self, X: Sequence[JobRequirement], y=None):
        self.config_ = _config(self.directions, self.weights, max(1, int(self.shortlist_k)))
        self.jobs_ = check_catalog(X)
        return self

    def run(self, talent: TalentProfile, talent_raw: str = "") -> HybridResult:
        """Full two-stage result, including the shortlist and timings."""
        check_is_fitted(self, "jobs_")
        if self.backend is None:
            raise BackendMissingError("hybrid mode needs a backend")
        return run_hybrid(
            talent,
            talent_raw,
            self.jobs_,
            self.config_,
            self.backend,
            self.shortlist_k,
            self.final_n,
            self.token_budget,
            self.parallelism,
        )

    def recommend(self, talent: TalentProfile, talent_raw: str = "") -> list[Recommendation]:
        return self.run(talent, talent_raw).recommendations

    def predict(self, X: Sequence[TalentProfile]) -> list[list[Recommendation]]:
        # The CV text embedded in each profile feeds the rerank stage.
        return [self.recommend(t) for t in X]
