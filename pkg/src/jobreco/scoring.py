"""Deterministic content-based scoring of jobs against a talent profile.

Six attribute scores, each in [0, 1], are combined by a weighted mean. The
objective direction of an attribute selects how a talent value is compared
with the required value:

``closer``  full score at zero deviation, decaying as the deviation grows
``exact``   1 for equality (or a covered certification set), else 0
``higher``  a talent value at or above the requirement is a full match
``lower``   a talent value at or below the requirement is a full match
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ._validation import check_catalog, check_config, check_talent
from .domain import (
    ATTRIBUTES,
    DEFAULT_DIRECTIONS,
    JobRequirement,
    MatchConfig,
    Recommendation,
    SkillLevel,
    TalentProfile,
    canonicalize,
)
from .errors import InvalidInputError, ScoringError

TIMEZONE_SPAN_HOURS = 26.0


def _reciprocal(d: float) -> float:
    return 1.0 if d == 0 else min(1.0, 1.0 / d)


def level_score(talent_value: float, required_value: float, direction: str = "closer") -> float:
    """Compare two values on an ordinal scale (proficiency, education level)."""
    if direction == "closer":
        return _reciprocal(abs(talent_value - required_value))
    if direction == "exact":
        return 1.0 if talent_value == required_value else 0.0
    if direction == "higher":
        return 1.0 if talent_value >= required_value else _reciprocal(required_value - talent_value)
    if direction == "lower":
        return 1.0 if talent_value <= required_value else _reciprocal(talent_value - required_value)
    raise InvalidInputError(f"unknown direction {direction!r}")


def _as_skill_map(skills) -> dict[str, int]:
    if isinstance(skills, Mapping):
        return {canonicalize(k): v for k, v in skills.items()}
    return {s.skill_name: s.proficiency for s in skills}


def score_skills(
    talent_skills: Mapping[str, int] | Iterable[SkillLevel],
    required_skills: Mapping[str, int] | Iterable[SkillLevel],
    direction: str = "closer",
) -> float | None:
    """Mean per-skill match over the required skills; ``None`` if none are required.

    A required skill the talent lacks contributes 0 but still counts in the
    denominator.
    """
    held = _as_skill_map(talent_skills)
    required = _as_skill_map(required_skills)
    if not required:
        return None
    total = 0.0
    for name, level in required.items():
        if name in held:
            total += level_score(held[name], level, direction)
    return total / len(required)


def score_timezone(talent_tz: float, job_tz: float, direction: str = "closer") -> float:
    gap = talent_tz - job_tz
    if direction == "exact":
        return 1.0 if gap == 0 else 0.0
    if direction == "higher" and gap >= 0 or direction == "lower" and gap <= 0:
        return 1.0
    if direction not in ("closer", "higher", "lower"):
        raise InvalidInputError(f"unknown direction {direction!r}")
    return min(1.0, max(0.0, 1.0 - abs(gap) / TIMEZONE_SPAN_HOURS))


def score_certifications(talent_certs: Iterable[str], required_certs: Iterable[str], direction: str = "exact") -> float:
    """All-or-nothing coverage under ``exact``; the covered fraction otherwise."""
    held = {canonicalize(c) for c in talent_certs}
    required = {canonicalize(c) for c in required_certs}
    if not required:
        return 1.0
    if direction == "exact":
        return 1.0 if required <= held else 0.0
    if direction not in ("closer", "higher", "lower"):
        raise InvalidInputError(f"unknown direction {direction!r}")
    return len(required & held) / len(required)


def score_education(talent_level: int, required_level: int, direction: str = "closer") -> float:
    return level_score(talent_level, required_level, direction)


def score_experience(talent_years: float, required_years: float, direction: str = "higher") -> float:
    """Ratio of held to required years in the required role."""
    if required_years < 0:
        raise InvalidInputError("required_years must be >= 0")
    if required_years == 0:
        return 1.0
    ratio = talent_years / required_years
    if direction == "higher":
        return min(1.0, ratio)
    if direction == "closer":
        # over-qualification is penalised symmetrically
        return min(ratio, 1.0 / ratio) if ratio > 0 else 0.0
    if direction == "exact":
        return 1.0 if talent_years == required_years else 0.0
    if direction == "lower":
        return 1.0 if ratio <= 1 else 1.0 / ratio
    raise InvalidInputError(f"unknown direction {direction!r}")


def score_role(role_preferences: Sequence[str], required_role: str, direction: str = "closer") -> float:
    """Reciprocal of the 1-based preference position of the required role."""
    prefs = [canonicalize(r) for r in role_preferences]
    if not prefs:
        raise InvalidInputError("role_preferences must be non-empty")
    role = canonicalize(required_role)
    if role not in prefs:
        return 0.0
    k = prefs.index(role) + 1
    if direction == "exact":
        return 1.0 if k == 1 else 0.0
    return 1.0 / k


@dataclass(frozen=True)
class ScoreBreakdown:
    per_attribute: Mapping[str, float | None]
    total: float

    def rounded(self, digits: int = 2) -> float:
        return round(self.total, digits)


def attribute_scores(talent: TalentProfile, job: JobRequirement, directions: Mapping[str, str]) -> dict[str, float | None]:
    d = {**DEFAULT_DIRECTIONS, **directions}
    return {
        "skills": score_skills(talent.skills, job.required_skills, d["skills"]),
        "timezone": score_timezone(talent.timezone_offset_hours, job.timezone_offset_hours, d["timezone"]),
        "certifications": score_certifications(talent.certifications, job.required_certifications, d["certifications"]),
        "education": score_education(talent.education_level, job.required_education_level, d["education"]),
        "experience": score_experience(
            talent.years_in(job.required_role), job.required_experience_years, d["experience"]
        ),
        "role": score_role(talent.role_preferences, job.required_role, d["role"]),
    }


def combine(per_attribute: Mapping[str, float | None], weights: Mapping[str, float]) -> float:
    """Weighted mean over defined attributes; undefined ones leave both sums."""
    num = den = 0.0
    for name in ATTRIBUTES:
        s = per_attribute.get(name)
        if s is None:
            continue
        w = weights.get(name, 1.0)
        num += w * s
        den += w
    if den == 0:
        raise ScoringError("no weighted attribute is defined for this talent/job pair")
    return num / den


def score_job(talent: TalentProfile, job: JobRequirement, config: MatchConfig | None = None) -> ScoreBreakdown:
    config = check_config(config)
    per = attribute_scores(talent, job, config.directions)
    try:
        total = combine(per, config.weights)
    except ScoringError as exc:
        raise ScoringError(f"job {job.job_id!r}: {exc}") from None
    return ScoreBreakdown(per, total)


def _notes(b: ScoreBreakdown) -> tuple[str, ...]:
    return tuple(
        f"{name}: {'n/a' if b.per_attribute[name] is None else format(b.per_attribute[name], '.2f')}"
        for name in ATTRIBUTES
    )


def rank_jobs(talent: TalentProfile, jobs: Sequence[JobRequirement], config: MatchConfig) -> list[tuple[JobRequirement, ScoreBreakdown]]:
    """Score and order the whole catalog: total descending, then job_id ascending."""
    scored = [(j, score_job(talent, j, config)) for j in jobs]
    scored.sort(key=lambda pair: (-pair[1].total, pair[0].job_id))
    return scored


def recommend_deterministic(
    talent: TalentProfile, jobs: Sequence[JobRequirement], config: MatchConfig | None = None
) -> list[Recommendation]:
    """Top ``config.top_n`` jobs by deterministic score."""
    check_talent(talent)
    jobs = check_catalog(jobs)
    config = check_config(config)
    ranked = rank_jobs(talent, jobs, config)[: config.top_n]
    return [
        Recommendation(
            job_id=job.job_id,
            rank=i,
            source_method="deterministic",
            score=b.total,
            qualitative_notes=_notes(b),
        )
        for i, (job, b) in enumerate(ranked, start=1)
    ]
