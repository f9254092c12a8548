"""Turning free-text CVs and job descriptions into structured profiles via a backend."""

from __future__ import annotations

import hashlib
import json
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Iterable

from ._validation import check_text
from .backend import Backend, CompletionRequest
from .domain import (
    MAX_EDUCATION,
    MAX_PROFICIENCY,
    MAX_TZ,
    MIN_EDUCATION,
    MIN_PROFICIENCY,
    MIN_TZ,
    JobRequirement,
    SkillLevel,
    TalentProfile,
    canonicalize,
    job_to_dict,
    talent_to_dict,
    write_json,
)
from .errors import ClampWarning, ExtractionError, JobRecoWarning

PROFICIENCY_WORDS = {"beginner": 1, "intermediate": 3, "advanced": 5}

EXTRACTION_SYSTEM = (
    "You convert resumes and job descriptions into structured JSON records. "
    "Report only facts stated in the text."
)

_LEGEND = (
    "Proficiency is an integer from 0 to 5. Map textual levels as beginner -> 1, "
    "intermediate -> 3, advanced -> 5."
)

TALENT_PROMPT = """Extract the candidate profile from the CV below as a single JSON object with exactly these fields:
- "role_preferences": list of role names the candidate is seeking, most preferred first
- "skills": list of {{"skill_name": string, "proficiency": integer 0-5}}
- "certifications": list of certification names
- "education_level": integer 1-5 (1 = high school, 2 = diploma, 3 = bachelor, 4 = master, 5 = doctorate)
- "experience_by_role": object mapping role name to years of experience
- "timezone_offset_hours": UTC offset in hours (number between -12 and 14)
- "preferred_location": string or null
{legend}
Return only the JSON object.

CV:
{text}"""

JOB_PROMPT = """Extract the job requirements from the job description below as a single JSON object with exactly these fields:
- "organization": name of the hiring organization
- "required_role": the role being hired for
- "required_skills": list of {{"skill_name": string, "proficiency": integer 0-5}}
- "required_certifications": list of certification names (empty list if none)
- "required_education_level": integer 1-5 (1 = high school, 2 = diploma, 3 = bachelor, 4 = master, 5 = doctorate)
- "required_experience_years": years of experience required in the role
- "timezone_offset_hours": UTC offset in hours (number between -12 and 14)
- "location": string or null
{legend}
Return only the JSON object.

JOB DESCRIPTION:
{text}"""

CV_FROM_JD_PROMPT = """Write a realistic resume, in plain text, for a fictional candidate who would be a strong applicant for the job below.
Include a name, a short summary, the role they are seeking, work history with years per role, skills with their level
(beginner, intermediate or advanced), education, certifications, location and time zone. Do not copy the job description.

JOB DESCRIPTION:
{text}"""

JSON_ONLY = "Return only the JSON object, with no explanation or code fences."


def _find_json_object(text: str) -> dict | None:
    text = re.sub(r"```(?:json)?", "", text)
    start = text.find("{")
    while start != -1:
        depth = 0
        in_str = esc = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_str:
                if esc:
                    esc = False
                elif ch == "\\":
                    esc = True
                elif ch == '"':
                    in_str = False
            elif ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        data = json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
                    if isinstance(data, dict):
                        return data
                    break
        start = text.find("{", start + 1)
    return None


def _ask_json(backend: Backend, prompt: str) -> dict:
    request = CompletionRequest(EXTRACTION_SYSTEM, prompt, 1500, 0.0)
    text = backend.complete(request).text
    data = _find_json_object(text)
    if data is None:
        text = backend.complete(replace(request, user_prompt=prompt + "\n\n" + JSON_ONLY)).text
        data = _find_json_object(text)
    if data is None:
        raise ExtractionError("backend did not return a JSON object", text)
    return data


class _Normalizer:
    """Coerces model-emitted values, clamping numerics and warning once per clamp."""

    def __init__(self, kind: str):
        self.kind = kind

    def clamp(self, value, lo, hi, where, integer=False):
        if isinstance(value, str):
            try:
                value = float(value.strip().rstrip("+"))
            except ValueError:
                raise ExtractionError(f"{where}: not a number: {value!r}") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ExtractionError(f"{where}: not a number: {value!r}")
        if value < lo or value > hi:
            clamped = lo if value < lo else hi
            warnings.warn(ClampWarning(f"{self.kind} {where}: {value!r} clamped to {clamped}"), stacklevel=4)
            value = clamped
        if integer:
            return int(round(value))
        return float(value)

    def proficiency(self, value, where):
        if isinstance(value, str) and canonicalize(value) in PROFICIENCY_WORDS:
            return PROFICIENCY_WORDS[canonicalize(value)]
        return self.clamp(value, MIN_PROFICIENCY, MAX_PROFICIENCY, where, integer=True)

    def skills(self, data, where) -> tuple[SkillLevel, ...]:
        if data is None:
            return ()
        if isinstance(data, dict):
            data = [{"skill_name": k, "proficiency": v} for k, v in data.items()]
        if not isinstance(data, list):
            raise ExtractionError(f"{where}: expected a list of skills")
        out = {}
        for i, item in enumerate(data):
            if not isinstance(item, dict) or "skill_name" not in item:
                raise ExtractionError(f"{where}[{i}]: expected an object with skill_name")
            name = canonicalize(str(item["skill_name"]))
            if not name:
                continue
            out[name] = SkillLevel(name, self.proficiency(item.get("proficiency", 0), f"{where}.{name}"))
        return tuple(out.values())

    def names(self, data, where) -> list[str]:
        if data is None:
            return []
        if isinstance(data, str):
            data = [data]
        if not isinstance(data, list):
            raise ExtractionError(f"{where}: expected a list of strings")
        return [canonicalize(str(x)) for x in data if canonicalize(str(x))]


def _require(data: dict, key: str, kind: str):
    if data.get(key) in (None, "", []):
        raise ExtractionError(f"{kind} response is missing {key!r}", json.dumps(data))
    return data[key]


def _warn_extra(data: dict, allowed: Iterable[str], kind: str):
    extra = sorted(set(data) - set(allowed))
    if extra:
        warnings.warn(JobRecoWarning(f"{kind} response: ignored unknown fields {extra}"), stacklevel=3)


def _default_id(prefix: str, text: str) -> str:
    return f"{prefix}-{hashlib.sha1(text.encode('utf-8')).hexdigest()[:8]}"


TALENT_FIELDS = (
    "role_preferences",
    "skills",
    "certifications",
    "education_level",
    "experience_by_role",
    "timezone_offset_hours",
    "preferred_location",
)
JOB_FIELDS = (
    "organization",
    "required_role",
    "required_skills",
    "required_certifications",
    "required_education_level",
    "required_experience_years",
    "timezone_offset_hours",
    "location",
)


def talent_from_response(data: dict, raw_cv: str, talent_id: str | None = None) -> TalentProfile:
    n = _Normalizer("talent")
    _warn_extra(data, TALENT_FIELDS + ("talent_id", "raw_text"), "talent")
    roles = list(dict.fromkeys(n.names(_require(data, "role_preferences", "talent"), "role_preferences")))
    if not roles:
        raise ExtractionError("talent response has no usable role_preferences", json.dumps(data))
    exp = data.get("experience_by_role") or {}
    if not isinstance(exp, dict):
        raise ExtractionError("experience_by_role: expected an object", json.dumps(data))
    experience = {}
    for role, years in exp.items():
        experience[canonicalize(role)] = n.clamp(years, 0, float("inf"), f"experience_by_role.{role}")
    tz = data.get("timezone_offset_hours")
    return TalentProfile(
        talent_id=talent_id or str(data.get("talent_id") or _default_id("talent", raw_cv)),
        role_preferences=tuple(roles),
        skills=n.skills(data.get("skills"), "skills"),
        certifications=frozenset(n.names(data.get("certifications"), "certifications")),
        education_level=n.clamp(
            _require(data, "education_level", "talent"), MIN_EDUCATION, MAX_EDUCATION, "education_level", integer=True
        ),
        experience_by_role=experience,
        timezone_offset_hours=0.0 if tz is None else n.clamp(tz, MIN_TZ, MAX_TZ, "timezone_offset_hours"),
        preferred_location=data.get("preferred_location") or None,
        raw_text=raw_cv,
    )


def job_from_response(data: dict, raw_jd: str, job_id: str | None = None) -> JobRequirement:
    n = _Normalizer("job")
    _warn_extra(data, JOB_FIELDS + ("job_id", "raw_text"), "job")
    tz = data.get("timezone_offset_hours")
    years = data.get("required_experience_years")
    return JobRequirement(
        job_id=job_id or str(data.get("job_id") or _default_id("job", raw_jd)),
        organization=str(_require(data, "organization", "job")).strip(),
        required_role=canonicalize(str(_require(data, "required_role", "job"))),
        required_skills=n.skills(data.get("required_skills"), "required_skills"),
        required_certifications=frozenset(n.names(data.get("required_certifications"), "required_certifications")),
        required_education_level=n.clamp(
            _require(data, "required_education_level", "job"),
            MIN_EDUCATION,
            MAX_EDUCATION,
            "required_education_level",
            integer=True,
        ),
        required_experience_years=0.0 if years is None else n.clamp(years, 0, float("inf"), "required_experience_years"),
        timezone_offset_hours=0.0 if tz is None else n.clamp(tz, MIN_TZ, MAX_TZ, "timezone_offset_hours"),
        location=data.get("location") or None,
        raw_text=raw_jd,
    )


def extract_talent(raw_cv: str, backend: Backend, talent_id: str | None = None) -> TalentProfile:
    """Structured profile for a CV. Missing timezone defaults to UTC+0."""
    check_text("raw_cv", raw_cv)
    data = _ask_json(backend, TALENT_PROMPT.format(legend=_LEGEND, text=raw_cv.strip()))
    return talent_from_response(data, raw_cv, talent_id)


def extract_job(raw_jd: str, backend: Backend, job_id: str | None = None) -> JobRequirement:
    check_text("raw_jd", raw_jd)
    data = _ask_json(backend, JOB_PROMPT.format(legend=_LEGEND, text=raw_jd.strip()))
    return job_from_response(data, raw_jd, job_id)


def generate_cv_from_jd(raw_jd: str, backend: Backend) -> str:
    check_text("raw_jd", raw_jd)
    request = CompletionRequest(EXTRACTION_SYSTEM, CV_FROM_JD_PROMPT.format(text=raw_jd.strip()), 1500, 0.7)
    return backend.complete(request).text


def structured_path(path) -> Path:
    """``cv3.txt`` -> ``cv3.structured.json`` in the same directory."""
    path = Path(path)
    return path.with_name(path.stem + ".structured.json")


def extract_files(paths, kind: str, backend: Backend, parallelism: int = 4) -> list[Path]:
    """Extract every text file and write the structured JSON next to it."""
    paths = [Path(p) for p in paths]
    convert: Callable[[Path], Any]
    if kind == "cv":

        def convert(p):
            return talent_to_dict(extract_talent(p.read_text(encoding="utf-8"), backend, talent_id=p.stem))

    else:

        def convert(p):
            return job_to_dict(extract_job(p.read_text(encoding="utf-8"), backend, job_id=p.stem))

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        results = list(pool.map(convert, paths))
    out = []
    for p, data in zip(paths, results):
        target = structured_path(p)
        write_json(target, data)
        out.append(target)
    return out
