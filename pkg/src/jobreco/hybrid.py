"""Two-stage recommendation: deterministic shortlist, then LLM rerank with ratings."""

from __future__ import annotations

import re
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

from ._validation import check_catalog, check_config, check_positive_int, check_talent, check_text
from .backend import Backend, CompletionRequest
from .domain import JobRequirement, MatchConfig, Recommendation, TalentProfile
from .errors import ClampWarning, InvalidInputError, JobRecoError, RatingError, RatingWarning, annotate
from .llm import DEFAULT_TOKEN_BUDGET, SYSTEM_PROMPT, job_text, recommend_unguided
from .scoring import recommend_deterministic

RATING_PROMPT = """Give an independent view of the employer and the position below, based on what is generally known about the organization and roles of this kind, not only on the job description.

Rate the ORGANIZATION from 1 to 10 considering work culture, growth and learning opportunities, compensation reputation, job security and work-life balance.
Rate the ROLE within that organization from 1 to 10 considering its responsibilities, skill development, career progression and market demand.

Answer in exactly this form:
ORGANIZATION_RATING: <number from 1 to 10>
ROLE_RATING: <number from 1 to 10>
RATIONALE: <two or three sentences>

Organization: {organization}
Role: {role}

JOB DESCRIPTION:
{text}"""

RATING_REPROMPT = "Your answer did not contain both ratings. Reply with the ORGANIZATION_RATING and ROLE_RATING lines."

_NUM = r"(\d+(?:\.\d+)?)"
_ORG = re.compile(rf"(?:organi[sz]ation|org|company|employer)[ _-]?(?:rating|score)[*_\s]*[:=-]?[*_\s]*{_NUM}", re.IGNORECASE)
_ROLE = re.compile(rf"(?:role|position|job)[ _-]?(?:rating|score)[*_\s]*[:=-]?[*_\s]*{_NUM}", re.IGNORECASE)
_ANY = re.compile(rf"{_NUM}(\s*/\s*10(?!\d)|\s+(?:out\s+)?of\s+10(?!\d))?")
_RATIONALE = re.compile(r"rationale\s*:\s*(.*)", re.IGNORECASE | re.DOTALL)


@dataclass(frozen=True)
class Rating:
    org_rating: float
    role_rating: float
    rationale: str


def _clamp_rating(value: float, what: str) -> float:
    if not 1.0 <= value <= 10.0:
        clamped = min(10.0, max(1.0, value))
        warnings.warn(ClampWarning(f"{what} rating {value:g} clamped to {clamped:g}"), stacklevel=3)
        return clamped
    return value


def parse_rating(text: str) -> Rating:
    """Read organization and role ratings from a reply.

    Labelled values ("ORGANIZATION_RATING: 8.7") are preferred; otherwise the
    first two numbers in the text are taken in order, skipping "/10" scales.
    """
    org = _ORG.search(text)
    role = _ROLE.search(text)
    if org and role:
        values = [float(org.group(1)), float(role.group(1))]
    else:
        values = [float(m.group(1)) for m in _ANY.finditer(text)][:2]
    if len(values) < 2:
        raise RatingError("reply does not contain two ratings", text)
    m = _RATIONALE.search(text)
    rationale = (m.group(1) if m else text).strip()
    return Rating(_clamp_rating(values[0], "organization"), _clamp_rating(values[1], "role"), rationale)


def rate_org_and_role(job: JobRequirement, backend: Backend) -> tuple[float, float, str]:
    """Organization and role ratings on 1-10 plus the model's rationale."""
    check_text("organization", job.organization)
    prompt = RATING_PROMPT.format(organization=job.organization, role=job.required_role, text=job_text(job).strip())
    request = CompletionRequest(SYSTEM_PROMPT, prompt, 400, 0.0)
    try:
        rating = parse_rating(backend.complete(request).text)
    except RatingError:
        retry = replace(request, user_prompt=prompt + "\n\n" + RATING_REPROMPT)
        rating = parse_rating(backend.complete(retry).text)
    return rating.org_rating, rating.role_rating, rating.rationale


@dataclass
class HybridResult:
    recommendations: list[Recommendation]
    shortlist: list[Recommendation]
    rerank_order: list[str]
    rationales: dict[str, str] = field(default_factory=dict)
    stage_seconds: dict[str, float] = field(default_factory=dict)

    def stages(self) -> dict:
        return {
            "deterministic": [{"job_id": r.job_id, "rank": r.rank, "score": r.score} for r in self.shortlist],
            "llm": {"order": list(self.rerank_order), "rationales": dict(self.rationales)},
        }


def run_hybrid(
    talent: TalentProfile,
    talent_raw: str,
    jobs: Sequence[JobRequirement],
    config: MatchConfig | None,
    backend: Backend,
    shortlist_k: int = 5,
    final_n: int = 3,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    parallelism: int = 4,
) -> HybridResult:
    check_talent(talent)
    jobs = check_catalog(jobs)
    config = check_config(config)
    check_positive_int("shortlist_k", shortlist_k)
    check_positive_int("final_n", final_n)
    if not final_n <= shortlist_k <= len(jobs):
        raise InvalidInputError(
            f"need final_n <= shortlist_k <= number of jobs, got {final_n}, {shortlist_k}, {len(jobs)}"
        )
    if not talent_raw.strip():
        talent_raw = talent.raw_text
    check_text("talent_raw", talent_raw)
    by_id = {j.job_id: j for j in jobs}
    timings = {}

    t0 = time.perf_counter()
    try:
        shortlist = recommend_deterministic(talent, jobs, config.with_top_n(shortlist_k))
    except JobRecoError as exc:
        raise annotate(exc, "stage 1 (deterministic)")
    timings["deterministic"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    # Stage 2 sees only the JD texts, never the stage-1 scores.
    shortlisted = [(r.job_id, job_text(by_id[r.job_id])) for r in shortlist]
    try:
        picks = recommend_unguided(talent_raw, shortlisted, final_n, backend, token_budget)
    except JobRecoError as exc:
        raise annotate(exc, "stage 2 (llm rerank)")

    def rate(job_id):
        try:
            return rate_org_and_role(by_id[job_id], backend)
        except JobRecoError as exc:
            warnings.warn(RatingWarning(f"no ratings for {job_id}: {exc}"), stacklevel=2)
            return None

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        ratings = list(pool.map(rate, [p.job_id for p in picks]))
    timings["llm"] = time.perf_counter() - t0

    stage1 = {r.job_id: r for r in shortlist}
    final, rationales = [], {}
    for pick, rating in zip(picks, ratings):
        org = role = None
        if rating is not None:
            org, role, rationales[pick.job_id] = rating
        final.append(
            replace(
                pick,
                source_method="hybrid",
                score=stage1[pick.job_id].score,
                org_rating=org,
                role_rating=role,
            )
        )
    return HybridResult(final, shortlist, [p.job_id for p in picks], rationales, timings)


def recommend_hybrid(
    talent: TalentProfile,
    talent_raw: str,
    jobs: Sequence[JobRequirement],
    config: MatchConfig | None,
    shortlist_k: int,
    final_n: int,
    backend: Backend,
    **kwargs,
) -> list[Recommendation]:
    return run_hybrid(talent, talent_raw, jobs, config, backend, shortlist_k, final_n, **kwargs).recommendations
