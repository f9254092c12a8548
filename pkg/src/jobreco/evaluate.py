"""Quality estimates against manual reference scores, and token/time accounting."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .backend import Backend, CompletionRequest, CompletionResponse, _SharedBackend
from .domain import JobRequirement, MatchConfig, Recommendation, TalentProfile, read_json
from .errors import EvaluationError, InvalidInputError, SchemaError


class ReferenceScores:
    """Manual reference scores per (talent_id, job_id), each in [0, 1]."""

    def __init__(self, scores: Mapping[tuple[str, str], float]):
        self.scores: dict[tuple[str, str], float] = {}
        for key, value in scores.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise SchemaError(f"reference score for {key} must be in [0, 1], got {value!r}")
            self.scores[key] = float(value)

    @classmethod
    def from_nested(cls, data: Mapping[str, Mapping[str, float]]) -> ReferenceScores:
        if not isinstance(data, Mapping):
            raise SchemaError("reference scores: expected an object of talent_id -> {job_id -> score}")
        flat = {}
        for talent_id, jobs in data.items():
            if not isinstance(jobs, Mapping):
                raise SchemaError(f"reference scores for {talent_id!r}: expected an object")
            for job_id, score in jobs.items():
                flat[(str(talent_id), str(job_id))] = score
        return cls(flat)

    @classmethod
    def load(cls, path) -> ReferenceScores:
        return cls.from_nested(read_json(path))

    def get(self, talent_id: str, job_id: str) -> float:
        try:
            return self.scores[(talent_id, job_id)]
        except KeyError:
            raise EvaluationError(f"no reference score for talent {talent_id!r}, job {job_id!r}") from None

    def for_talent(self, talent_id: str) -> dict[str, float]:
        return {j: s for (t, j), s in self.scores.items() if t == talent_id}

    def reference_ranking(self, talent_id: str) -> list[str]:
        """Job ids by descending reference score, ties by job id."""
        refs = self.for_talent(talent_id)
        return sorted(refs, key=lambda j: (-refs[j], j))


@dataclass(frozen=True)
class Deviation:
    talent_id: str
    job_id: str
    rank: int
    algorithm_score: float
    reference_score: float

    @property
    def deviation(self) -> float:
        return abs(self.algorithm_score - self.reference_score)


@dataclass
class EvaluationReport:
    deviations: list[Deviation]
    usage: dict[str, RunMeasurement] = field(default_factory=dict)

    @property
    def mean_abs_deviation_by_talent(self) -> dict[str, float]:
        groups: dict[str, list[float]] = {}
        for d in self.deviations:
            groups.setdefault(d.talent_id, []).append(d.deviation)
        return {t: sum(v) / len(v) for t, v in groups.items()}

    @property
    def mean_abs_deviation(self) -> float:
        if not self.deviations:
            return 0.0
        return sum(d.deviation for d in self.deviations) / len(self.deviations)

    @property
    def accuracy_pct(self) -> float:
        return 100.0 * (1.0 - self.mean_abs_deviation)

    @property
    def accuracy_by_talent(self) -> dict[str, float]:
        return {t: 100.0 * (1.0 - m) for t, m in self.mean_abs_deviation_by_talent.items()}

    def to_dict(self) -> dict[str, Any]:
        return {
            "deviations": [
                {
                    "talent_id": d.talent_id,
                    "job_id": d.job_id,
                    "rank": d.rank,
                    "algorithm_score": d.algorithm_score,
                    "reference_score": d.reference_score,
                    "deviation": d.deviation,
                }
                for d in self.deviations
            ],
            "mean_abs_deviation_by_talent": self.mean_abs_deviation_by_talent,
            "accuracy_pct_by_talent": self.accuracy_by_talent,
            "mean_abs_deviation": self.mean_abs_deviation,
            "accuracy_pct": self.accuracy_pct,
            "usage": {m: u.to_dict() for m, u in self.usage.items()},
        }


def _by_rank(recs: Sequence[Recommendation]) -> list[Recommendation]:
    return sorted(recs, key=lambda r: r.rank)


def evaluate_scored(
    recs_by_talent: Mapping[str, Sequence[Recommendation]], refs: ReferenceScores
) -> EvaluationReport:
    """Deviation of each recommendation's own score from its reference score."""
    out = []
    for talent_id, recs in recs_by_talent.items():
        for r in _by_rank(recs):
            if r.score is None:
                raise EvaluationError(f"{talent_id}/{r.job_id} has no score; use ranked evaluation")
            out.append(Deviation(talent_id, r.job_id, r.rank, r.score, refs.get(talent_id, r.job_id)))
    return EvaluationReport(out)


def evaluate_ranked(
    recs_by_talent: Mapping[str, Sequence[Recommendation]], refs: ReferenceScores
) -> EvaluationReport:
    """Evaluation for rank-only output.

    The job at algorithm rank k is credited with the reference score of the
    job a human ranked k-th; its deviation is the distance from that credit
    to the job's own reference score.
    """
    out = []
    for talent_id, recs in recs_by_talent.items():
        human = refs.reference_ranking(talent_id)
        ordered = _by_rank(recs)
        if len(ordered) > len(human):
            raise EvaluationError(
                f"{talent_id}: {len(ordered)} recommendations but only {len(human)} reference scores"
            )
        for k, r in enumerate(ordered):
            own = refs.get(talent_id, r.job_id)
            assigned = refs.get(talent_id, human[k])
            out.append(Deviation(talent_id, r.job_id, r.rank, assigned, own))
    return EvaluationReport(out)


# ---------------------------------------------------------------------------
# run accounting


class MeteredBackend(_SharedBackend):
    """Counts tokens and calls passing through to another backend (thread-safe)."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.name = getattr(inner, "name", "backend")
        self.calls = 0
        self.input_tokens = 0
        self.output_tokens = 0
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        response = self.inner.complete(request)
        with self._lock:
            self.calls += 1
            self.input_tokens += response.input_tokens
            self.output_tokens += response.output_tokens
        return response


@dataclass
class RunMeasurement:
    method: str
    calls: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    stage_seconds: dict[str, float] = field(default_factory=dict)
    result: Any = None

    @property
    def total_tokens(self) -> int:
        return self.input_tokens + self.output_tokens

    @property
    def total_seconds(self) -> float:
        return sum(self.stage_seconds.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "calls": self.calls,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "stage_seconds": dict(self.stage_seconds),
        }


@dataclass
class RunInputs:
    talent_raw: str = ""
    jds_raw: Sequence[tuple[str, str]] = ()
    talent: TalentProfile | None = None
    jobs: Sequence[JobRequirement] = ()
    config: MatchConfig | None = None
    top_n: int = 3
    shortlist_k: int = 5
    token_budget: int = 8192
    criteria: Any = None
    parallelism: int = 4


def measure_run(method: str, inputs: RunInputs, backend: Backend | None = None) -> RunMeasurement:
    """Run one recommendation method, recording tokens and per-stage wall-clock.

    Errors from the run itself propagate; accounting never adds failures.
    """
    from .hybrid import run_hybrid
    from .llm import ChunkParams, chunked_recommend, criteria_from_config
    from .scoring import recommend_deterministic

    meter = MeteredBackend(backend) if backend is not None else None
    m = RunMeasurement(method)
    t0 = time.perf_counter()
    if method == "deterministic":
        config = (inputs.config or MatchConfig()).with_top_n(inputs.top_n)
        m.result = recommend_deterministic(inputs.talent, inputs.jobs, config)
        m.stage_seconds["deterministic"] = time.perf_counter() - t0
    elif method in ("guided", "unguided"):
        if meter is None:
            raise InvalidInputError(f"{method} mode needs a backend")
        criteria = inputs.criteria
        if method == "guided" and criteria is None:
            criteria = criteria_from_config(inputs.config or MatchConfig(), inputs.top_n)
        params = ChunkParams(inputs.top_n, inputs.token_budget, None, criteria, inputs.parallelism)
        m.result = chunked_recommend(inputs.talent_raw, inputs.jds_raw, method, params, meter)
        m.stage_seconds["llm"] = time.perf_counter() - t0
    elif method == "hybrid":
        if meter is None:
            raise InvalidInputError("hybrid mode needs a backend")
        result = run_hybrid(
            inputs.talent,
            inputs.talent_raw,
            inputs.jobs,
            inputs.config,
            meter,
            inputs.shortlist_k,
            inputs.top_n,
            inputs.token_budget,
            inputs.parallelism,
        )
        m.result = result.recommendations
        m.stage_seconds.update(result.stage_seconds)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    if meter is not None:
        m.calls, m.input_tokens, m.output_tokens = meter.calls, meter.input_tokens, meter.output_tokens
    return m
