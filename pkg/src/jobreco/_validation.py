"""Input checks shared by the recommenders and estimators."""

from __future__ import annotations

from typing import Iterable, Sequence

from .domain import (
    JobRequirement,
    MatchConfig,
    TalentProfile,
    validate_catalog,
    validate_profile,
)
from .errors import InvalidInputError


def check_talent(talent) -> TalentProfile:
    if not isinstance(talent, TalentProfile):
        raise InvalidInputError(f"expected a TalentProfile, got {type(talent).__name__}")
    problems = validate_profile(talent)
    if problems:
        raise InvalidInputError(f"talent {talent.talent_id!r} is invalid: " + "; ".join(problems))
    return talent


def check_catalog(jobs: Iterable[JobRequirement], allow_empty: bool = False) -> list[JobRequirement]:
    jobs = list(jobs)
    if not jobs and not allow_empty:
        raise InvalidInputError("job catalog is empty")
    for j in jobs:
        if not isinstance(j, JobRequirement):
            raise InvalidInputError(f"expected JobRequirement items, got {type(j).__name__}")
    problems = validate_catalog(jobs)
    if problems:
        raise InvalidInputError("job catalog is invalid: " + "; ".join(problems))
    return jobs


def check_config(config) -> MatchConfig:
    if config is None:
        return MatchConfig()
    if not isinstance(config, MatchConfig):
        raise InvalidInputError(f"expected a MatchConfig, got {type(config).__name__}")
    problems = config.violations()
    if problems:
        raise InvalidInputError("match config is invalid: " + "; ".join(problems))
    return config


def check_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
    return value


def check_raw_jds(jds_raw: Sequence[tuple[str, str]]) -> list[tuple[str, str]]:
    """Validate ``(job_id, text)`` pairs: non-empty, unique ids, non-empty texts."""
    pairs = [(str(i), t) for i, t in jds_raw]
    if not pairs:
        raise InvalidInputError("no job descriptions given")
    seen = set()
    for job_id, text in pairs:
        if job_id in seen:
            raise InvalidInputError(f"duplicate job id {job_id!r}")
        seen.add(job_id)
        if not isinstance(text, str) or not text.strip():
            raise InvalidInputError(f"job {job_id!r} has empty text")
    return pairs


def check_text(name: str, text) -> str:
    if not isinstance(text, str) or not text.strip():
        raise InvalidInputError(f"{name} must be non-empty text")
    return text
