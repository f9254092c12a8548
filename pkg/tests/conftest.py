from __future__ import annotations

import pytest

from jobreco.domain import JobRequirement, SkillLevel, TalentProfile


def skills(**levels):
    return tuple(SkillLevel(name.replace("_", " "), lvl) for name, lvl in levels.items())


def job(job_id, role, skill_levels, *, org="Acme", certs=(), edu=3, years=0.0, tz=5.5, text=""):
    return JobRequirement(
        job_id=job_id,
        organization=org,
        required_role=role,
        required_skills=skill_levels,
        required_certifications=frozenset(certs),
        required_education_level=edu,
        required_experience_years=float(years),
        timezone_offset_hours=tz,
        raw_text=text,
    )


CV3_TEXT = """Priya Raman
Full stack developer with six years building web products, the last two also leading a small team.
Seeking: full stack developer roles, or technical lead.
Skills: Java (advanced), JavaScript (advanced), React (intermediate), SQL (intermediate), AWS (beginner+).
Certifications: AWS Certified Developer.
Education: Bachelor of Engineering in Computer Science.
Based in Bengaluru (UTC+5:30)."""


@pytest.fixture
def cv3() -> TalentProfile:
    return TalentProfile(
        talent_id="CV3",
        role_preferences=("full stack developer", "technical lead"),
        skills=skills(java=4, javascript=4, react=3, sql=3, aws=2),
        certifications=frozenset({"aws certified developer"}),
        education_level=3,
        experience_by_role={"full stack developer": 6.0, "technical lead": 2.0},
        timezone_offset_hours=5.5,
        raw_text=CV3_TEXT,
    )


# Hand-computed totals (unit weights, default directions):
#   JD7 1.0 | JD9 11/12 | JD10 0.8958 | JD6 0.8718 | JD2 0.8333 | JD3 0.7667
#   JD5 0.75 | JD1 0.5833 | JD4 0.5556 | JD8 0.5481
CV3_TOTALS = {
    "JD7": 1.0,
    "JD9": 11 / 12,
    "JD10": (0.875 + 1 + 1 + 1 + 0.5 + 1) / 6,
    "JD6": (0.75 + (1 - 13.5 / 26) + 1 + 1 + 1 + 1) / 6,
    "JD2": (1 + 0.5 + 1 + 0.5 + 1 + 1) / 6,
    "JD3": (1 + 1 + 0 + 1 + 0.6 + 1) / 6,
    "JD5": (0.75 + 1 + 1 + 1 + 0.25 + 0.5) / 6,
    "JD1": (0.5 + 1 + 1 + 1 + 0 + 0) / 6,
    "JD4": (1 / 3 + 1 + 1 + 1 + 0 + 0) / 6,
    "JD8": (0.5 + (1 - 5.5 / 26) + 1 + 1 + 0 + 0) / 6,
}
CV3_ORDER = sorted(CV3_TOTALS, key=lambda j: -CV3_TOTALS[j])

FULL = skills(java=4, javascript=4, react=3, sql=3, aws=2)
CERT = {"aws certified developer"}


@pytest.fixture
def cv3_jobs() -> list[JobRequirement]:
    return [
        job("JD1", "data scientist", skills(python=4, sql=3), org="Infosys", edu=4, years=3,
            text="Infosys seeks a data scientist with strong Python and SQL."),
        job("JD2", "full stack developer", FULL, org="Wipro", certs=CERT, edu=5, years=5, tz=-7.5,
            text="Wipro: full stack developer, PhD preferred, US Pacific hours."),
        job("JD3", "full stack developer", FULL, org="TCS", certs=CERT | {"pmp"}, years=10,
            text="TCS hires a senior full stack developer holding PMP, ten years of experience."),
        job("JD4", "devops engineer", skills(docker=4, kubernetes=3, aws=2), org="Flipkart", years=3,
            text="Flipkart needs a devops engineer fluent in Docker and Kubernetes."),
        job("JD5", "technical lead", skills(java=5, sql=5), org="SAP", years=8,
            text="SAP looks for a technical lead with deep Java and SQL, eight years leading teams."),
        job("JD6", "full stack developer", skills(react=5, javascript=4), org="Zoho", certs=CERT, years=5, tz=-8,
            text="Zoho: full stack developer with expert React, working Pacific hours."),
        job("JD7", "full stack developer", FULL, org="Google", certs=CERT, years=6,
            text="Google is hiring a full stack developer: Java, JavaScript, React, SQL, some AWS."),
        job("JD8", "qa engineer", skills(python=4, sql=3), org="Accenture", edu=2, years=2, tz=0,
            text="Accenture wants a QA engineer for test automation in Python."),
        job("JD9", "technical lead", FULL, org="Microsoft", certs=CERT, years=2,
            text="Microsoft: technical lead for a web team using Java, JavaScript and React."),
        job("JD10", "full stack developer", skills(java=2, javascript=4, react=3, sql=3), org="Amazon",
            certs=CERT, edu=4, years=12,
            text="Amazon: full stack developer, twelve years of experience expected."),
    ]


UNGUIDED_REPLY = """Here are my picks.

JD4
- The role builds on the candidate's AWS exposure, a clear advantage
- However, the candidate lacks Docker and Kubernetes experience

JD6
- Strong alignment with the React and JavaScript stack
- Pacific hours are a drawback for someone in India

JD7
- Matches the candidate's first preference exactly
- Large, well-known engineering organization
"""

GUIDED_REPLY = """JOB_ID: JD7
SCORE: 0.95
BENEFITS:
- First-preference role with an identical skill set
DRAWBACKS:
- None of note
QUALITATIVE:
- Well-known employer

JOB_ID: JD9
SCORE: 0.9
BENEFITS:
- Second-preference role
DRAWBACKS:
- Lead experience is short
QUALITATIVE:
- Large web team

JOB_ID: JD3
SCORE: 0.7
BENEFITS:
- Same stack
DRAWBACKS:
- Requires PMP
QUALITATIVE:
- Senior position
"""

HYBRID_RERANK = """JD7
- Matches the preferred role and every skill

JD10
- Good stack match
- However it expects far more years than the candidate has

JD9
- A step into leadership, an advantage for growth
"""


def rating_script():
    return [
        ("Organization: Google", "ORGANIZATION_RATING: 9\nROLE_RATING: 9\nRATIONALE: Strong engineering culture."),
        ("Organization: Amazon", "ORGANIZATION_RATING: 8.2\nROLE_RATING: 7.9\nRATIONALE: Demanding pace."),
        ("Organization: Microsoft", "ORGANIZATION_RATING: 8.8\nROLE_RATING: 8.5\nRATIONALE: Stable growth."),
        ("Organization: Zoho", "ORGANIZATION_RATING: 7.5\nROLE_RATING: 7\nRATIONALE: Product focus."),
        ("Organization: Wipro", "ORGANIZATION_RATING: 6.8\nROLE_RATING: 6.5\nRATIONALE: Services firm."),
    ]


@pytest.fixture
def hybrid_script():
    return [("using your own judgement", HYBRID_RERANK), *rating_script()]


def worked_example():
    """Talent/job pair whose attribute scores are (0.5, 1, 1, 1, 0.6, 0.5)."""
    talent = TalentProfile(
        talent_id="T1",
        role_preferences=("data engineer", "full stack developer"),
        skills=skills(python=3, sql=5, spark=1),
        certifications=frozenset({"aws certified developer", "scrum master"}),
        education_level=4,
        experience_by_role={"data engineer": 2.0, "full stack developer": 6.0},
        timezone_offset_hours=1.0,
    )
    target = job(
        "J1",
        "full stack developer",
        skills(python=3, sql=3, spark=3, scala=2),
        certs={"aws certified developer"},
        edu=4,
        years=10,
        tz=1.0,
    )
    return talent, target
