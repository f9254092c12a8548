"""Attribute model shared by talents, jobs, match configuration and results."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import SchemaError

ATTRIBUTES = ("skills", "timezone", "certifications", "education", "experience", "role")
DIRECTIONS = ("closer", "exact", "higher", "lower")
SOURCE_METHODS = ("deterministic", "guided", "unguided", "hybrid")

DEFAULT_DIRECTIONS = {
    "skills": "closer",
    "timezone": "closer",
    "certifications": "exact",
    "education": "closer",
    "experience": "higher",
    "role": "closer",
}

MIN_PROFICIENCY, MAX_PROFICIENCY = 0, 5
MIN_EDUCATION, MAX_EDUCATION = 1, 5
MIN_TZ, MAX_TZ = -12.0, 14.0

_WS = re.compile(r"\s+")


def canonicalize(s: str) -> str:
    """Lowercase, trim, and collapse internal whitespace runs to one space."""
    return _WS.sub(" ", s).strip().lower()


@dataclass(frozen=True, order=True)
class SkillLevel:
    skill_name: str
    proficiency: int

    def __post_init__(self):
        object.__setattr__(self, "skill_name", canonicalize(self.skill_name))


def _skill_tuple(skills: Iterable[SkillLevel]) -> tuple[SkillLevel, ...]:
    return tuple(sorted(skills, key=lambda s: (s.skill_name, s.proficiency)))


@dataclass(frozen=True)
class TalentProfile:
    talent_id: str
    role_preferences: tuple[str, ...]
    skills: tuple[SkillLevel, ...] = ()
    certifications: frozenset[str] = frozenset()
    education_level: int = 1
    experience_by_role: Mapping[str, float] = field(default_factory=dict)
    timezone_offset_hours: float = 0.0
    preferred_location: str | None = None
    raw_text: str = ""

    def __post_init__(self):
        # Names are canonical on every instance, so scoring can compare directly.
        object.__setattr__(self, "role_preferences", tuple(canonicalize(r) for r in self.role_preferences))
        object.__setattr__(self, "skills", _skill_tuple(self.skills))
        object.__setattr__(self, "certifications", frozenset(canonicalize(c) for c in self.certifications))
        object.__setattr__(
            self,
            "experience_by_role",
            {canonicalize(k): v for k, v in dict(self.experience_by_role).items()},
        )

    @property
    def skill_map(self) -> dict[str, int]:
        return {s.skill_name: s.proficiency for s in self.skills}

    def years_in(self, role: str) -> float:
        return float(self.experience_by_role.get(canonicalize(role), 0.0))


@dataclass(frozen=True)
class JobRequirement:
    job_id: str
    organization: str
    required_role: str
    required_skills: tuple[SkillLevel, ...] = ()
    required_certifications: frozenset[str] = frozenset()
    required_education_level: int = 1
    required_experience_years: float = 0.0
    timezone_offset_hours: float = 0.0
    location: str | None = None
    raw_text: str = ""

    def __post_init__(self):
        object.__setattr__(self, "required_role", canonicalize(self.required_role))
        object.__setattr__(self, "required_skills", _skill_tuple(self.required_skills))
        object.__setattr__(
            self, "required_certifications", frozenset(canonicalize(c) for c in self.required_certifications)
        )

    @property
    def skill_map(self) -> dict[str, int]:
        return {s.skill_name: s.proficiency for s in self.required_skills}


@dataclass(frozen=True)
class MatchConfig:
    """Per-attribute objective directions and weights plus the result count."""

    directions: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_DIRECTIONS))
    weights: Mapping[str, float] = field(default_factory=lambda: {a: 1.0 for a in ATTRIBUTES})
    top_n: int = 10

    def __post_init__(self):
        # Partial maps are completed from the defaults.
        object.__setattr__(self, "directions", {**DEFAULT_DIRECTIONS, **dict(self.directions)})
        object.__setattr__(self, "weights", {**{a: 1.0 for a in ATTRIBUTES}, **dict(self.weights)})

    def violations(self) -> list[str]:
        out = []
        for name in set(self.directions) | set(self.weights):
            if name not in ATTRIBUTES:
                out.append(f"unknown attribute {name!r}; expected one of {', '.join(ATTRIBUTES)}")
        for name, d in self.directions.items():
            if d not in DIRECTIONS:
                out.append(f"directions.{name}: {d!r} is not one of {', '.join(DIRECTIONS)}")
        for name, w in self.weights.items():
            if not _is_number(w) or w < 0 or not math.isfinite(w):
                out.append(f"weights.{name}: must be a non-negative number, got {w!r}")
        if not any(_is_number(w) and w > 0 for w in self.weights.values()):
            out.append("weights: at least one weight must be > 0")
        if not isinstance(self.top_n, int) or isinstance(self.top_n, bool) or self.top_n < 1:
            out.append(f"top_n: must be a positive integer, got {self.top_n!r}")
        return out

    def with_top_n(self, top_n: int) -> MatchConfig:
        return MatchConfig(self.directions, self.weights, top_n)


@dataclass(frozen=True)
class Recommendation:
    job_id: str
    rank: int
    source_method: str
    score: float | None = None
    benefits: tuple[str, ...] = ()
    drawbacks: tuple[str, ...] = ()
    qualitative_notes: tuple[str, ...] = ()
    org_rating: float | None = None
    role_rating: float | None = None

    def __post_init__(self):
        for name in ("benefits", "drawbacks", "qualitative_notes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


# ---------------------------------------------------------------------------
# validation


def validate_profile(p: TalentProfile) -> list[str]:
    """Return one description per violated invariant; empty when valid."""
    out = []
    if not p.role_preferences:
        out.append("role_preferences: must be non-empty")
    if len(set(p.role_preferences)) != len(p.role_preferences):
        out.append("role_preferences: contains duplicate roles")
    if any(not r for r in p.role_preferences):
        out.append("role_preferences: role names must be non-empty")
    out.extend(_skill_violations("skills", p.skills))
    if any(not c for c in p.certifications):
        out.append("certifications: names must be non-empty")
    if not _is_int(p.education_level) or not MIN_EDUCATION <= p.education_level <= MAX_EDUCATION:
        out.append(f"education_level: must be an integer in [1, 5], got {p.education_level!r}")
    for role, years in p.experience_by_role.items():
        if not _is_number(years) or not years >= 0:
            out.append(f"experience_by_role[{role!r}]: must be >= 0, got {years!r}")
    out.extend(_tz_violations("timezone_offset_hours", p.timezone_offset_hours))
    return out


def validate_job(j: JobRequirement) -> list[str]:
    out = []
    if not str(j.job_id).strip():
        out.append("job_id: must be non-empty")
    if not j.required_role:
        out.append("required_role: must be non-empty")
    out.extend(_skill_violations("required_skills", j.required_skills))
    if not _is_int(j.required_education_level) or not MIN_EDUCATION <= j.required_education_level <= MAX_EDUCATION:
        out.append(f"required_education_level: must be an integer in [1, 5], got {j.required_education_level!r}")
    if not _is_number(j.required_experience_years) or not j.required_experience_years >= 0:
        out.append(f"required_experience_years: must be >= 0, got {j.required_experience_years!r}")
    out.extend(_tz_violations("timezone_offset_hours", j.timezone_offset_hours))
    return out


def validate_catalog(jobs: Iterable[JobRequirement]) -> list[str]:
    out = []
    seen = set()
    for j in jobs:
        if j.job_id in seen:
            out.append(f"job_id: {j.job_id!r} is not unique within the catalog")
        seen.add(j.job_id)
        out.extend(f"{j.job_id}: {v}" for v in validate_job(j))
    return out


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _skill_violations(name, skills) -> list[str]:
    out = []
    names = [s.skill_name for s in skills]
    if len(set(names)) != len(names):
        out.append(f"{name}: duplicate skill names")
    for s in skills:
        if not s.skill_name:
            out.append(f"{name}: skill_name must be non-empty")
        if not _is_int(s.proficiency) or not MIN_PROFICIENCY <= s.proficiency <= MAX_PROFICIENCY:
            out.append(f"{name}[{s.skill_name!r}].proficiency: must be an integer in [0, 5], got {s.proficiency!r}")
    return out


def _tz_violations(name, tz) -> list[str]:
    if not _is_number(tz) or not MIN_TZ <= tz <= MAX_TZ:
        return [f"{name}: must be within [-12, +14], got {tz!r}"]
    return []


# ---------------------------------------------------------------------------
# JSON


def _fmt_number(x):
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def _skills_to_json(skills):
    return [{"skill_name": s.skill_name, "proficiency": s.proficiency} for s in skills]


def _skills_from_json(data, where) -> tuple[SkillLevel, ...]:
    if isinstance(data, Mapping):
        data = [{"skill_name": k, "proficiency": v} for k, v in data.items()]
    if not isinstance(data, list):
        raise SchemaError(f"{where}: expected a list of skills")
    out = []
    for i, item in enumerate(data):
        item = _check_fields(item, {"skill_name", "proficiency"}, f"{where}[{i}]")
        out.append(SkillLevel(_str(item["skill_name"], f"{where}[{i}].skill_name"), item["proficiency"]))
    return tuple(out)


def _check_fields(data, allowed: set[str], where: str, required: Iterable[str] | None = None) -> dict:
    if not isinstance(data, Mapping):
        raise SchemaError(f"{where}: expected a JSON object")
    for k in data:
        if k not in allowed:
            raise SchemaError(f"{where}: unknown field {k!r}")
    for k in allowed if required is None else required:
        if k not in data:
            raise SchemaError(f"{where}: missing field {k!r}")
    return dict(data)


def _str(v, where) -> str:
    if not isinstance(v, str):
        raise SchemaError(f"{where}: expected a string, got {type(v).__name__}")
    return v


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def talent_to_dict(p: TalentProfile) -> dict[str, Any]:
    return {
        "talent_id": p.talent_id,
        "role_preferences": list(p.role_preferences),
        "skills": _skills_to_json(p.skills),
        "certifications": sorted(p.certifications),
        "education_level": p.education_level,
        "experience_by_role": {k: _fmt_number(v) for k, v in p.experience_by_role.items()},
        "timezone_offset_hours": _fmt_number(p.timezone_offset_hours),
        "preferred_location": p.preferred_location,
        "raw_text": p.raw_text,
    }


def talent_from_dict(data, where: str = "talent") -> TalentProfile:
    d = _check_fields(
        data, _field_names(TalentProfile), where, required=("talent_id", "role_preferences", "education_level")
    )
    roles = d["role_preferences"]
    if not isinstance(roles, list):
        raise SchemaError(f"{where}.role_preferences: expected a list")
    exp = d.get("experience_by_role", {})
    if not isinstance(exp, Mapping):
        raise SchemaError(f"{where}.experience_by_role: expected an object")
    return TalentProfile(
        talent_id=str(d["talent_id"]),
        role_preferences=tuple(_str(r, f"{where}.role_preferences") for r in roles),
        skills=_skills_from_json(d.get("skills", []), f"{where}.skills"),
        certifications=frozenset(_str(c, f"{where}.certifications") for c in d.get("certifications", [])),
        education_level=d["education_level"],
        experience_by_role=dict(exp),
        timezone_offset_hours=d.get("timezone_offset_hours", 0.0),
        preferred_location=d.get("preferred_location"),
        raw_text=d.get("raw_text", "") or "",
    )


def job_to_dict(j: JobRequirement) -> dict[str, Any]:
    return {
        "job_id": j.job_id,
        "organization": j.organization,
        "required_role": j.required_role,
        "required_skills": _skills_to_json(j.required_skills),
        "required_certifications": sorted(j.required_certifications),
        "required_education_level": j.required_education_level,
        "required_experience_years": _fmt_number(j.required_experience_years),
        "timezone_offset_hours": _fmt_number(j.timezone_offset_hours),
        "location": j.location,
        "raw_text": j.raw_text,
    }


def job_from_dict(data, where: str = "job") -> JobRequirement:
    d = _check_fields(
        data,
        _field_names(JobRequirement),
        where,
        required=("job_id", "organization", "required_role", "required_education_level"),
    )
    return JobRequirement(
        job_id=str(d["job_id"]),
        organization=_str(d["organization"], f"{where}.organization"),
        required_role=_str(d["required_role"], f"{where}.required_role"),
        required_skills=_skills_from_json(d.get("required_skills", []), f"{where}.required_skills"),
        required_certifications=frozenset(
            _str(c, f"{where}.required_certifications") for c in d.get("required_certifications", [])
        ),
        required_education_level=d["required_education_level"],
        required_experience_years=d.get("required_experience_years", 0.0),
        timezone_offset_hours=d.get("timezone_offset_hours", 0.0),
        location=d.get("location"),
        raw_text=d.get("raw_text", "") or "",
    )


def config_to_dict(c: MatchConfig) -> dict[str, Any]:
    return {"directions": dict(c.directions), "weights": dict(c.weights), "top_n": c.top_n}


def config_from_dict(data, where: str = "config") -> MatchConfig:
    d = _check_fields(data, {"directions", "weights", "top_n"}, where, required=())
    for section in ("directions", "weights"):
        for k in d.get(section, {}) or {}:
            if k not in ATTRIBUTES:
                raise SchemaError(f"{where}.{section}: unknown field {k!r}")
    cfg = MatchConfig(d.get("directions", {}) or {}, d.get("weights", {}) or {}, d.get("top_n", 10))
    problems = cfg.violations()
    if problems:
        raise SchemaError(f"{where}: " + "; ".join(problems))
    return cfg


def recommendation_to_dict(r: Recommendation) -> dict[str, Any]:
    return {
        "job_id": r.job_id,
        "rank": r.rank,
        "score": r.score,
        "benefits": list(r.benefits),
        "drawbacks": list(r.drawbacks),
        "qualitative_notes": list(r.qualitative_notes),
        "org_rating": r.org_rating,
        "role_rating": r.role_rating,
        "source_method": r.source_method,
    }


def recommendation_from_dict(data, where: str = "recommendation") -> Recommendation:
    d = _check_fields(data, _field_names(Recommendation), where, required=("job_id", "rank", "source_method"))
    if d["source_method"] not in SOURCE_METHODS:
        raise SchemaError(f"{where}.source_method: {d['source_method']!r} is not one of {', '.join(SOURCE_METHODS)}")
    return Recommendation(**d)


def check_ranked(recs: list[Recommendation]) -> None:
    """Raise if ranks are not 1..n or a score/rating is out of range."""
    ranks = sorted(r.rank for r in recs)
    if ranks != list(range(1, len(recs) + 1)):
        raise SchemaError(f"ranks must be consecutive from 1, got {ranks}")
    for r in recs:
        if r.score is not None and not 0.0 <= r.score <= 1.0:
            raise SchemaError(f"{r.job_id}: score {r.score} outside [0, 1]")
        for name in ("org_rating", "role_rating"):
            v = getattr(r, name)
            if v is not None and not 1.0 <= v <= 10.0:
                raise SchemaError(f"{r.job_id}: {name} {v} outside [1, 10]")


# ---------------------------------------------------------------------------
# files


def read_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def write_json(path, data) -> None:
    Path(path).write_text(dumps(data) + "\n", encoding="utf-8")


def dumps(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


def load_talent(path) -> TalentProfile:
    return talent_from_dict(read_json(path), where=str(path))


def load_jobs(path) -> list[JobRequirement]:
    """Load structured jobs from a JSON file (object or list) or a directory of them."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".json")
    else:
        files = [path]
    jobs = []
    for f in files:
        data = read_json(f)
        items = data if isinstance(data, list) else [data]
        jobs.extend(job_from_dict(item, where=f"{f}[{i}]") for i, item in enumerate(items))
    return jobs


def load_match_config(path) -> MatchConfig:
    return config_from_dict(read_json(path), where=str(path))
