"""Seeded synthetic talents and graded job-description sets.

Each talent gets ten jobs in four tiers: one exact match, three with a small
deviation, three with a large deviation and three that are quite different.
Perturbation sizes are chosen so that the deterministic scorer (default
configuration) separates the tiers strictly:

* exact      total 1.0
* small      1-2 attributes, each losing 0.08-0.5 of its score   -> total >= 0.83
* large      3-4 attributes, each losing 0.4-0.67 of its score   -> total in [0.55, 0.8]
* different  role, skills and certifications all unmatched       -> total <= 0.5

A one-level proficiency shift scores the same as an exact match under the
reciprocal rule, so "one step" for skills and education means two levels.
"""

from __future__ import annotations

import json
import math
import random
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .backend import Backend, CompletionRequest
from .domain import JobRequirement, SkillLevel, TalentProfile, canonicalize, job_to_dict, talent_to_dict
from .errors import InvalidInputError, RenderIncompleteWarning

PRNG_ALGORITHM = "python-random-mt19937"
TIER_COUNTS = {"exact": 1, "small": 3, "large": 3, "different": 3}
TIERS = tuple(TIER_COUNTS)


@dataclass(frozen=True)
class AttributeCatalog:
    roles: tuple[str, ...]
    skills: tuple[str, ...]
    certifications: tuple[str, ...]
    education_levels: tuple[int, ...] = (1, 2, 3, 4, 5)
    timezone_offsets: tuple[float, ...] = (0.0,)
    experience_range: tuple[int, int] = (0, 15)
    organizations: tuple[str, ...] = ("Example Corp",)
    version: str = "custom"

    def __post_init__(self):
        for name in ("roles", "skills", "certifications", "education_levels", "timezone_offsets", "organizations"):
            if not getattr(self, name):
                raise InvalidInputError(f"catalog.{name} must be non-empty")
        lo, hi = self.experience_range
        if lo < 0 or hi < lo:
            raise InvalidInputError(f"catalog.experience_range must satisfy 0 <= min <= max, got {self.experience_range}")

    @classmethod
    def from_dict(cls, data: dict) -> AttributeCatalog:
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - allowed
        if unknown:
            raise InvalidInputError(f"catalog: unknown fields {sorted(unknown)}")
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        for key in ("roles", "skills", "certifications"):
            if key in kwargs:
                kwargs[key] = tuple(canonicalize(x) for x in kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class DeviationSpec:
    counts: dict[str, int] = field(default_factory=lambda: dict(TIER_COUNTS))

    def __post_init__(self):
        if set(self.counts) != set(TIERS) or sum(self.counts.values()) != 10:
            raise InvalidInputError("deviation tiers must be exact/small/large/different totalling 10 jobs")


def load_catalog(path=None) -> AttributeCatalog:
    """Read a catalog JSON file; the bundled IT-domain catalog by default."""
    if path is None:
        text = resources.files("jobreco").joinpath("data/it_catalog.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return AttributeCatalog.from_dict(json.loads(text))


def _int_range(catalog):
    lo, hi = catalog.experience_range
    return int(math.ceil(lo)), int(math.floor(hi))


def sample_talent(catalog: AttributeCatalog, seed: int, talent_id: str | None = None) -> TalentProfile:
    rng = random.Random(seed)
    roles = rng.sample(catalog.roles, min(len(catalog.roles), rng.randint(2, 3)))
    skill_names = rng.sample(catalog.skills, min(len(catalog.skills), rng.randint(4, 6)))
    skills = [SkillLevel(s, rng.randint(1, 5)) for s in skill_names]
    certs = rng.sample(catalog.certifications, min(len(catalog.certifications), rng.randint(0, 2)))
    lo, hi = _int_range(catalog)
    return TalentProfile(
        talent_id=talent_id or f"CV{seed}",
        role_preferences=tuple(roles),
        skills=tuple(skills),
        certifications=frozenset(certs),
        education_level=rng.choice(catalog.education_levels),
        experience_by_role={r: rng.randint(lo, hi) for r in roles},
        timezone_offset_hours=rng.choice(catalog.timezone_offsets),
    )


# ---------------------------------------------------------------------------
# perturbations, each operating on a mutable dict of job fields


def _shift_two(level: int, lo: int = 1, hi: int = 5) -> int:
    return level + 2 if level + 2 <= hi else level - 2


def _tz_within(current, offsets, lo_h, hi_h):
    return [o for o in offsets if lo_h <= abs(o - current) <= hi_h]


def _skill_dev(job, talent, catalog, rng):
    skills = job["skills"]
    i = rng.randrange(len(skills))
    name, level = skills[i]
    skills[i] = (name, _shift_two(level))


def _education(job, talent, catalog, rng):
    levels = [l for l in catalog.education_levels if abs(l - job["education"]) == 2]
    job["education"] = rng.choice(levels)


def _education_ok(job, talent, catalog):
    return any(abs(l - job["education"]) == 2 for l in catalog.education_levels)


def _tz_near(job, talent, catalog, rng):
    job["tz"] = rng.choice(_tz_within(job["tz"], catalog.timezone_offsets, 2.6, 13.0))


def _tz_far(job, talent, catalog, rng):
    job["tz"] = rng.choice(_tz_within(job["tz"], catalog.timezone_offsets, 10.4, 17.3))


def _role(ranks):
    def apply(job, talent, catalog, rng):
        role = talent.role_preferences[rng.choice([r for r in ranks if r < len(talent.role_preferences)])]
        job["role"] = role
        job["years"] = talent.years_in(role)

    return apply


def _skills_replace(job, talent, catalog, rng):
    skills = job["skills"]
    n = math.ceil(len(skills) / 2)
    idx = rng.sample(range(len(skills)), n)
    unheld = [s for s in catalog.skills if s not in talent.skill_map and s not in {x for x, _ in skills}]
    for i, name in zip(idx, rng.sample(unheld, n)):
        skills[i] = (name, rng.randint(1, 5))


def _unheld_count(talent, catalog):
    return sum(1 for s in catalog.skills if s not in talent.skill_map)


def _experience_double(job, talent, catalog, rng):
    job["years"] = job["years"] * 2


def _experience_ok(job, talent, catalog):
    return 1 <= job["years"] and job["years"] * 2 <= _int_range(catalog)[1]


# name -> (eligible(job, talent, catalog), apply)
SMALL_STEPS = {
    "role": (lambda j, t, c: len(t.role_preferences) >= 2, _role([1])),
    "skill": (lambda j, t, c: bool(j["skills"]), _skill_dev),
    "education": (_education_ok, _education),
    "timezone": (lambda j, t, c: bool(_tz_within(j["tz"], c.timezone_offsets, 2.6, 13.0)), _tz_near),
}
LARGE_STEPS = {
    # role first: the experience step reads the years for the (possibly new) role
    "role": (lambda j, t, c: len(t.role_preferences) >= 2, _role([1, 2])),
    "skills": (lambda j, t, c: len(j["skills"]) >= 2 and _unheld_count(t, c) >= math.ceil(len(j["skills"]) / 2), _skills_replace),
    "education": (_education_ok, _education),
    "experience": (_experience_ok, _experience_double),
    "timezone": (lambda j, t, c: bool(_tz_within(j["tz"], c.timezone_offsets, 10.4, 17.3)), _tz_far),
}


def _exact_state(talent):
    role = talent.role_preferences[0]
    return {
        "role": role,
        "skills": [(s.skill_name, s.proficiency) for s in talent.skills],
        "certs": set(talent.certifications),
        "education": talent.education_level,
        "years": talent.years_in(role),
        "tz": talent.timezone_offset_hours,
    }


def _apply_steps(state, steps, count_range, talent, catalog, rng):
    names = list(steps)
    eligible = [n for n in names if steps[n][0](state, talent, catalog)]
    n = min(len(eligible), rng.randint(*count_range))
    chosen = set(rng.sample(eligible, n))
    applied = 0
    for name in names:  # fixed application order
        if name in chosen and steps[name][0](state, talent, catalog):
            steps[name][1](state, talent, catalog, rng)
            applied += 1
    # a role change can make the experience step inapplicable; top up from the rest.
    # role is never a top-up: it resets the required years set by earlier steps
    spare = [name for name in names if name not in chosen and name != "role"]
    rng.shuffle(spare)
    for name in spare:
        if applied >= n:
            break
        if steps[name][0](state, talent, catalog):
            steps[name][1](state, talent, catalog, rng)
            applied += 1


def _exact(talent, catalog, rng):
    state = _exact_state(talent)
    if state["skills"] and rng.random() < 0.5:
        i = rng.randrange(len(state["skills"]))
        name, level = state["skills"][i]
        state["skills"][i] = (name, level + 1 if level < 5 else level - 1)
    return state


def _small(talent, catalog, rng):
    state = _exact_state(talent)
    _apply_steps(state, SMALL_STEPS, (1, 2), talent, catalog, rng)
    return state


def _large(talent, catalog, rng):
    state = _exact_state(talent)
    _apply_steps(state, LARGE_STEPS, (3, 4), talent, catalog, rng)
    return state


def _different(talent, catalog, rng):
    other_roles = [r for r in catalog.roles if r not in talent.role_preferences]
    role = rng.choice(other_roles or list(catalog.roles))
    unheld = [s for s in catalog.skills if s not in talent.skill_map] or list(catalog.skills)
    skills = [(s, rng.randint(1, 5)) for s in rng.sample(unheld, min(len(unheld), rng.randint(4, 6)))]
    unheld_certs = [c for c in catalog.certifications if c not in talent.certifications]
    certs = set()
    if unheld_certs:
        certs.add(rng.choice(unheld_certs))
        if rng.random() < 0.5:
            certs.add(rng.choice(catalog.certifications))
    lo, hi = _int_range(catalog)
    return {
        "role": role,
        "skills": skills,
        "certs": certs,
        "education": rng.choice(catalog.education_levels),
        "years": rng.randint(lo, hi),
        "tz": rng.choice(catalog.timezone_offsets),
    }


_TIER_BUILDERS = {"exact": _exact, "small": _small, "large": _large, "different": _different}


def generate_jd_set(
    talent: TalentProfile, catalog: AttributeCatalog, seed: int, return_tiers: bool = False
):
    """Ten jobs JD1..JD10 graded against ``talent``; tier order is shuffled by ``seed``.

    With ``return_tiers`` the result is ``(jobs, {job_id: tier})``.
    """
    rng = random.Random(seed)
    spec = DeviationSpec()
    order = [t for t in TIERS for _ in range(spec.counts[t])]
    rng.shuffle(order)
    jobs, tiers = [], {}
    for i, tier in enumerate(order, start=1):
        state = _TIER_BUILDERS[tier](talent, catalog, rng)
        job_id = f"JD{i}"
        jobs.append(
            JobRequirement(
                job_id=job_id,
                organization=rng.choice(catalog.organizations),
                required_role=state["role"],
                required_skills=tuple(SkillLevel(n, p) for n, p in state["skills"]),
                required_certifications=frozenset(state["certs"]),
                required_education_level=state["education"],
                required_experience_years=float(state["years"]),
                timezone_offset_hours=state["tz"],
            )
        )
        tiers[job_id] = tier
    return (jobs, tiers) if return_tiers else jobs


@dataclass
class SyntheticCase:
    talent: TalentProfile
    jobs: list[JobRequirement]
    tiers: dict[str, str]
    seed: int


def generate_dataset(catalog: AttributeCatalog, n_cvs: int, seed: int) -> list[SyntheticCase]:
    rng = random.Random(seed)
    cases = []
    for i in range(1, n_cvs + 1):
        case_seed = rng.randrange(2**32)
        talent = sample_talent(catalog, case_seed, talent_id=f"CV{i}")
        jobs, tiers = generate_jd_set(talent, catalog, case_seed, return_tiers=True)
        cases.append(SyntheticCase(talent, jobs, tiers, case_seed))
    return cases


# ---------------------------------------------------------------------------
# unstructured rendering

RENDER_SYSTEM = "You write realistic resumes and job postings from structured records."

RENDER_CV_PROMPT = """Write a realistic plain-text resume for the candidate described by this JSON record.
Mention every role preference, every skill with its level, every certification, the education level,
the years of experience per role and the time zone. Use natural prose and bullet points; do not output JSON.

{record}"""

RENDER_JD_PROMPT = """Write a realistic plain-text job description for the opening described by this JSON record.
Mention the organization, the role, every required skill with its level, every required certification,
the education level, the years of experience and the time zone. Add a short, plausible description
of the team and its culture. Do not output JSON.

{record}"""


def _fmt(x: float) -> str:
    return f"{x:g}"


def required_mentions(structured: TalentProfile | JobRequirement) -> list[str]:
    """Values a faithful rendering must mention (canonical form)."""
    if isinstance(structured, TalentProfile):
        items = list(structured.role_preferences)
        items += [s.skill_name for s in structured.skills]
        items += sorted(structured.certifications)
        items += [_fmt(y) for y in structured.experience_by_role.values()]
    else:
        items = [canonicalize(structured.organization), structured.required_role]
        items += [s.skill_name for s in structured.required_skills]
        items += sorted(structured.required_certifications)
        items.append(_fmt(structured.required_experience_years))
    return list(dict.fromkeys(items))


def missing_mentions(text: str, structured: TalentProfile | JobRequirement) -> list[str]:
    canon = canonicalize(text)
    missing = []
    for item in required_mentions(structured):
        if re.fullmatch(r"[\d.]+", item):
            found = re.search(rf"(?<![\d.]){re.escape(item)}(?![\d])", canon)
        else:
            found = item in canon
        if not found:
            missing.append(item)
    return missing


def render_unstructured(structured: TalentProfile | JobRequirement, backend: Backend) -> str:
    """Narrative CV or JD text for a structured record; warns about omitted values."""
    if isinstance(structured, TalentProfile):
        record = talent_to_dict(structured)
        template = RENDER_CV_PROMPT
    elif isinstance(structured, JobRequirement):
        record = job_to_dict(structured)
        template = RENDER_JD_PROMPT
    else:
        raise InvalidInputError(f"cannot render {type(structured).__name__}")
    record.pop("raw_text", None)
    prompt = template.format(record=json.dumps(record, indent=2))
    text = backend.complete(CompletionRequest(RENDER_SYSTEM, prompt, 1200, 0.7)).text
    missing = missing_mentions(text, structured)
    if missing:
        warnings.warn(RenderIncompleteWarning(f"rendered text omits: {', '.join(missing)}"), stacklevel=2)
    return text


def tier_of(tiers: dict[str, str], job_ids: Sequence[str]) -> list[str]:
    return [tiers[j] for j in job_ids]
