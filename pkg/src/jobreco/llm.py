"""LLM-driven recommendation: guided and unguided prompting, response parsing,
and splitting oversized job catalogs into budget-sized subsets.
"""

from __future__ import annotations

import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from ._validation import check_positive_int, check_raw_jds, check_text
from .backend import Backend, CompletionRequest, effective_budget, request_tokens
from .domain import ATTRIBUTES, JobRequirement, MatchConfig, Recommendation
from .errors import (
    BudgetExceededError,
    ChunkingError,
    ClampWarning,
    InvalidInputError,
    JobRecoError,
    OversizeInputError,
    ParseError,
    PartialResultWarning,
    UnknownJobIdError,
    annotate,
)

DEFAULT_TOKEN_BUDGET = 8192
DEFAULT_MAX_OUTPUT_TOKENS = 1500

SYSTEM_PROMPT = (
    "You are an experienced technical recruiter. You match candidates to job openings "
    "and explain every recommendation in plain language."
)

PROFICIENCY_LEGEND = (
    "Skill proficiency uses a 0-5 scale where beginner = 1, intermediate = 3 and "
    "advanced = 5; 0 means no working knowledge. Treat textual levels and numbers "
    "as equivalent under this mapping."
)

EXAMPLE_BLOCK = """JOB_ID: JD1
SCORE: 0.8
BENEFITS:
- The role is the candidate's first preference
DRAWBACKS:
- The job asks for a certification the candidate does not hold
QUALITATIVE:
- The team advertises mentoring and a collaborative culture"""

REPROMPT = (
    "Your previous answer could not be parsed ({reason}). Answer again in exactly "
    "the requested format and nothing else."
)

_DIRECTION_TEXT = {
    "closer": "should be as close as possible to the requirement; both shortfall and excess count against the match",
    "exact": "must match the requirement exactly",
    "higher": "should meet or exceed the requirement",
    "lower": "should not exceed the requirement",
}

_ATTRIBUTE_TEXT = {
    "skills": "proficiency in each required skill",
    "timezone": "the candidate's time zone relative to the job's",
    "certifications": "the set of required certifications",
    "education": "education level (1-5)",
    "experience": "years of experience in the required role",
    "role": "how highly the candidate ranks the job's role among their preferences",
}


def format_instruction(top_n: int) -> str:
    return (
        f"Answer with at most {top_n} recommendation blocks, best match first. Start every "
        "block with a JOB_ID line carrying the job id exactly as given, then a SCORE line "
        "(match quality between 0 and 1), then BENEFITS, DRAWBACKS and QUALITATIVE sections "
        "with one bullet per point. Example block:\n\n" + EXAMPLE_BLOCK
    )


@dataclass(frozen=True)
class GuidedCriteria:
    criteria_text: str
    top_n: int = 3
    output_format_instruction: str | None = None

    def __post_init__(self):
        check_text("criteria_text", self.criteria_text)
        check_positive_int("top_n", self.top_n)

    @property
    def instruction(self) -> str:
        return self.output_format_instruction or format_instruction(self.top_n)


def criteria_from_config(config: MatchConfig, top_n: int | None = None) -> GuidedCriteria:
    """Spell out a match configuration as prose criteria for the guided prompt."""
    lines = ["Judge every job against the candidate on these attributes:"]
    for name in ATTRIBUTES:
        w = config.weights[name]
        if w == 0:
            continue
        lines.append(f"- {_ATTRIBUTE_TEXT[name]} {_DIRECTION_TEXT[config.directions[name]]} (weight {w:g})")
    return GuidedCriteria("\n".join(lines), top_n or config.top_n)


# ---------------------------------------------------------------------------
# prompts


def _jobs_block(jds: Sequence[tuple[str, str]]) -> str:
    return "\n\n".join(f"[JOB_ID: {job_id}]\n{text.strip()}\n[END OF {job_id}]" for job_id, text in jds)


def guided_request(talent_raw: str, jds: Sequence[tuple[str, str]], criteria: GuidedCriteria) -> CompletionRequest:
    prompt = (
        f"Recommend the {criteria.top_n} best job openings for the candidate below.\n\n"
        f"MATCHING CRITERIA\n{criteria.criteria_text.strip()}\n\n{PROFICIENCY_LEGEND}\n\n"
        f"CANDIDATE CV\n{talent_raw.strip()}\n\nJOB DESCRIPTIONS\n{_jobs_block(jds)}\n\n"
        f"OUTPUT FORMAT\n{criteria.instruction}"
    )
    return CompletionRequest(SYSTEM_PROMPT, prompt, DEFAULT_MAX_OUTPUT_TOKENS, 0.0)


def unguided_request(talent_raw: str, jds: Sequence[tuple[str, str]], top_n: int) -> CompletionRequest:
    prompt = (
        f"Below are a candidate's CV and a set of job descriptions. Pick the {top_n} jobs "
        "that would suit this candidate best, best first, using your own judgement. For each "
        "pick write a paragraph that starts with the job id on its own line, followed by a "
        "bulleted list explaining why it is a good choice and what its drawbacks are.\n\n"
        f"{PROFICIENCY_LEGEND}\n\nCANDIDATE CV\n{talent_raw.strip()}\n\n"
        f"JOB DESCRIPTIONS\n{_jobs_block(jds)}"
    )
    return CompletionRequest(SYSTEM_PROMPT, prompt, DEFAULT_MAX_OUTPUT_TOKENS, 0.0)


def check_budget(request: CompletionRequest, token_budget: int) -> int:
    tokens = request_tokens(request)
    limit = effective_budget(token_budget)
    if tokens > limit:
        raise BudgetExceededError(
            f"prompt needs ~{tokens} tokens but the budget allows {limit}; split the catalog first"
        )
    return tokens


# ---------------------------------------------------------------------------
# parsing

_BULLET = re.compile(r"^\s*(?:[-*•+–]|\d{1,2}[.)])\s+")
_DASH_BULLET = re.compile(r"^\s*[-*•+–]\s+")
_NUMBER = r"[-+]?\d+(?:\.\d+)?"

_CATEGORY_WORDS = {
    "benefits": r"benefits?|pros|advantages?|strengths?|why it fits",
    "drawbacks": r"drawbacks?|cons|disadvantages?|concerns?|gaps?|risks?",
    "qualitative_notes": r"qualitative(?:[ _]aspects?|[ _]notes)?|other notes|notes",
}
_CATEGORY_LINE = re.compile(
    r"^\s*(?:[-*•+]\s+)?[*_#>\s]*(?P<label>"
    + "|".join(f"(?P<{k}>{v})" for k, v in _CATEGORY_WORDS.items())
    + r")\s*[*_]*\s*:\s*[*_]*\s*(?P<rest>.*)$",
    re.IGNORECASE,
)
_GUIDED_JOB = re.compile(
    r"^\s*(?:[#>]+\s*)?(?:\d{1,2}[.)]\s*)?[*_`\s]*job[ _-]?id\s*[*_`]*\s*[:#\-–]?\s*[*_`]*\s*(?P<rest>.*)$",
    re.IGNORECASE,
)
_GUIDED_LABEL = re.compile(
    r"^\s*(?:[#>]+\s*)?(?:\d{1,2}[.)]\s*)?(?:[-*•+]\s+)?[*_`\s]*"
    r"(?P<label>score|match[ _]score|benefits?|drawbacks?|qualitative(?:[ _]aspects?|[ _]notes)?)"
    r"\s*[*_`]*\s*(?:[:\-–]|$)\s*[*_`]*\s*(?P<rest>.*)$",
    re.IGNORECASE,
)

_DRAWBACK_CUES = re.compile(
    r"\b(drawbacks?|disadvantages?|however|lacks?|lacking|missing|downside|concerns?|"
    r"does not|doesn't|not a|no mention|shortfall|below the required|gap)\b",
    re.IGNORECASE,
)
_BENEFIT_CUES = re.compile(
    r"\b(benefits?|advantages?|perks?|strengths?|strong|aligns?|matches|excellent|great fit|good fit)\b",
    re.IGNORECASE,
)


def classify_explanation(line: str) -> str:
    """Assign a free-text explanation to benefits, drawbacks or qualitative notes by cue words."""
    if _DRAWBACK_CUES.search(line):
        return "drawbacks"
    if _BENEFIT_CUES.search(line):
        return "benefits"
    return "qualitative_notes"


def _strip_markup(s: str) -> str:
    return s.strip().strip("*_`").strip()


class _Catalog:
    """Resolves job ids mentioned by the model against the ids actually offered."""

    def __init__(self, job_ids: Sequence[str]):
        self.ids = list(job_ids)
        self._lower = {i.lower(): i for i in self.ids}
        self._squashed = {re.sub(r"[\s_-]", "", i.lower()): i for i in self.ids}
        shapes = sorted({_shape(i) for i in self.ids}, key=len, reverse=True)
        self.id_pattern = "(?:" + "|".join(shapes) + ")"

    def resolve(self, token: str, text: str) -> str:
        token = _strip_markup(token).strip(".,:;()[]\"'")
        if token in self.ids:
            return token
        if token.lower() in self._lower:
            return self._lower[token.lower()]
        squashed = re.sub(r"[\s_-]", "", token.lower())
        if squashed in self._squashed:
            return self._squashed[squashed]
        raise UnknownJobIdError(token, text)


def _shape(job_id: str) -> str:
    # JD7 -> JD\d+, so "JD99" is recognised as an id (and rejected) rather than ignored
    # "jd 7" and "JD-7" are accepted too; the resolver squashes separators
    parts = [p for p in re.split(r"(\d+)", job_id) if p]
    return r"[\s_-]?".join(r"\d+" if p.isdigit() else re.escape(p) for p in parts)


def parse_score(text: str) -> float | None:
    """Read a match score written as 0.8, 80%, 8/10 or 8 (out of 10), mapped to [0, 1]."""
    m = re.search(rf"({_NUMBER})\s*(%|/\s*({_NUMBER})|out of\s*({_NUMBER}))?", text)
    if not m:
        return None
    value = float(m.group(1))
    denom = m.group(3) or m.group(4)
    if m.group(2) == "%":
        value /= 100
    elif denom:
        value /= float(denom)
    elif value > 10:
        value /= 100
    elif value > 1:
        value /= 10
    if not 0.0 <= value <= 1.0:
        warnings.warn(ClampWarning(f"score {m.group(0)!r} clamped to [0, 1]"), stacklevel=2)
        value = min(1.0, max(0.0, value))
    return value


class _Block:
    def __init__(self, job_id):
        self.job_id = job_id
        self.score = None
        self.items = {"benefits": [], "drawbacks": [], "qualitative_notes": []}
        self.category = None

    def add(self, text, category=None):
        text = _strip_markup(_BULLET.sub("", text))
        if text:
            self.items[category or self.category or classify_explanation(text)].append(text)

    @property
    def has_items(self):
        return any(self.items.values())

    def to_recommendation(self, rank, method):
        return Recommendation(
            job_id=self.job_id,
            rank=rank,
            source_method=method,
            score=self.score,
            benefits=self.items["benefits"],
            drawbacks=self.items["drawbacks"],
            qualitative_notes=self.items["qualitative_notes"],
        )


def _guided_category(label: str) -> str | None:
    label = label.lower()
    if label.startswith("benefit"):
        return "benefits"
    if label.startswith("drawback"):
        return "drawbacks"
    if label.startswith("qualitative"):
        return "qualitative_notes"
    return None


def _finish(blocks: list[_Block], top_n: int, method: str) -> list[Recommendation]:
    unique, seen = [], set()
    for b in blocks:
        if b.job_id in seen:
            continue
        seen.add(b.job_id)
        unique.append(b)
    unique = unique[:top_n]
    if len(unique) < top_n:
        warnings.warn(
            PartialResultWarning(f"{method} response gave {len(unique)} of {top_n} requested recommendations"),
            stacklevel=3,
        )
    return [b.to_recommendation(i, method) for i, b in enumerate(unique, start=1)]


def parse_guided(text: str, job_ids: Sequence[str], top_n: int) -> list[Recommendation]:
    """Parse labelled JOB_ID / SCORE / BENEFITS / DRAWBACKS / QUALITATIVE blocks.

    Prose before the first block and after a finished section is ignored.
    Section order inside a block is free.
    """
    catalog = _Catalog(job_ids)
    blocks: list[_Block] = []
    current: _Block | None = None
    after_blank = False
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line.strip():
            after_blank = True
            continue
        job = _GUIDED_JOB.match(line)
        if job:
            tokens = _strip_markup(job.group("rest")).split()
            if not tokens:
                raise ParseError("JOB_ID line without a job id", text)
            current = _Block(catalog.resolve(tokens[0], text))
            blocks.append(current)
            after_blank = False
            continue
        m = _GUIDED_LABEL.match(line)
        if m:
            label = m.group("label").lower().replace("_", " ")
            rest = m.group("rest").strip()
            if current is not None and "score" in label:
                current.score = parse_score(rest)
            elif current is not None:
                current.category = _guided_category(label)
                if rest:
                    current.add(rest)
            after_blank = False
            continue
        if current is not None and current.category is not None:
            if after_blank and not _BULLET.match(line) and current.items[current.category]:
                # trailing prose closes the section
                current.category = None
            else:
                current.add(line)
        after_blank = False
    if not blocks:
        raise ParseError("no JOB_ID blocks found in the response", text)
    return _finish(blocks, top_n, "guided")


def _header_regex(catalog: _Catalog) -> re.Pattern:
    return re.compile(
        r"^\s*(?:[#>]+\s*)?(?:\d{1,2}\s*[.)]\s*)?[*_`\s]*"
        r"(?:(?:recommended\s+)?(?:job(?:[ _-]?id)?|recommendation|pick|rank|option|choice)"
        r"\s*(?:#?\s*\d{1,2})?\s*[:#.)\-–]\s*[*_`\s]*)?"
        r"(?:job(?:[ _-]?id)?\s*[:#\-–]?\s*)?[*_`\"'(\[\s]*"
        rf"(?P<id>{catalog.id_pattern})(?![\w])",
        re.IGNORECASE,
    )


def parse_unguided(text: str, job_ids: Sequence[str], top_n: int) -> list[Recommendation]:
    """Parse free-form paragraphs that each open with a job id followed by bullets.

    Explanation lines are sorted into benefits / drawbacks / qualitative notes,
    either by an explicit label line ("Drawbacks:") or by cue words. A bulleted
    paragraph without a recognisable job id is an error while fewer than
    ``top_n`` recommendations have been read; after that it is taken as closing
    commentary (e.g. why other jobs were left out) and ignored. Text before
    the first recommendation is ignored.
    """
    catalog = _Catalog(job_ids)
    header = _header_regex(catalog)
    blocks: list[_Block] = []
    current: _Block | None = None
    paragraph_start = True
    orphan_open = False
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line.strip():
            paragraph_start = True
            continue
        is_bullet = bool(_BULLET.match(line))
        m = None if _DASH_BULLET.match(line) else header.match(line)
        if m:
            current = _Block(catalog.resolve(m.group("id"), text))
            blocks.append(current)
            paragraph_start = orphan_open = False
            continue
        cat = _CATEGORY_LINE.match(line)
        if paragraph_start:
            orphan_open = False
            if current is not None and not is_bullet and not cat and current.has_items:
                # a prose paragraph after explanations ends the recommendation
                current = None
            if current is None and not cat:
                orphan_open = True
        paragraph_start = False
        if current is None:
            if is_bullet and orphan_open and 0 < len(blocks) < top_n:
                raise ParseError("a bulleted paragraph has no recognisable job id", text)
            continue
        if cat:
            category = next(k for k in _CATEGORY_WORDS if cat.group(k))
            if cat.group("rest").strip():
                current.add(cat.group("rest"), category)
            if not is_bullet:
                current.category = category
            continue
        current.add(line)
    if not blocks:
        raise ParseError("no recognisable job id in the response", text)
    return _finish(blocks, top_n, "unguided")


def _ask(backend: Backend, request: CompletionRequest, parse: Callable[[str], list[Recommendation]]):
    """One call, one reprompt on a malformed answer. Unknown ids fail immediately."""
    response = backend.complete(request)
    try:
        return parse(response.text)
    except UnknownJobIdError:
        raise
    except ParseError as exc:
        retry = replace(
            request,
            user_prompt=request.user_prompt + "\n\n" + REPROMPT.format(reason=str(exc)),
        )
        response = backend.complete(retry)
        return parse(response.text)


def recommend_guided(
    talent_raw: str,
    jds_raw: Sequence[tuple[str, str]],
    criteria: GuidedCriteria,
    backend: Backend,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
) -> list[Recommendation]:
    check_text("talent_raw", talent_raw)
    pairs = check_raw_jds(jds_raw)
    request = guided_request(talent_raw, pairs, criteria)
    check_budget(request, token_budget)
    ids = [i for i, _ in pairs]
    return _ask(backend, request, lambda text: parse_guided(text, ids, criteria.top_n))


def recommend_unguided(
    talent_raw: str,
    jds_raw: Sequence[tuple[str, str]],
    top_n: int,
    backend: Backend,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
) -> list[Recommendation]:
    check_text("talent_raw", talent_raw)
    check_positive_int("top_n", top_n)
    pairs = check_raw_jds(jds_raw)
    request = unguided_request(talent_raw, pairs, top_n)
    check_budget(request, token_budget)
    ids = [i for i, _ in pairs]
    return _ask(backend, request, lambda text: parse_unguided(text, ids, top_n))


# ---------------------------------------------------------------------------
# chunking


def natural_key(job_id: str):
    return [(0, int(p), "") if p.isdigit() else (1, 0, p) for p in re.split(r"(\d+)", job_id) if p]


@dataclass(frozen=True)
class ChunkPlan:
    subsets: tuple[tuple[str, ...], ...]
    per_subset_top_k: int
    token_budget: int


def plan_chunks(
    jds_raw: Sequence[tuple[str, str]],
    talent_raw: str,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    per_subset_top_k: int = 3,
    prompt_builder: Callable[[str, list[tuple[str, str]], int], CompletionRequest] | None = None,
) -> ChunkPlan:
    """Greedy first-fit split of the catalog, in natural job-id order.

    JDs are added to the current subset while the rendered prompt stays within
    the budget (after the safety margin).
    """
    pairs = sorted(check_raw_jds(jds_raw), key=lambda p: natural_key(p[0]))
    check_positive_int("token_budget", token_budget)
    check_positive_int("per_subset_top_k", per_subset_top_k)
    build = prompt_builder or unguided_request
    limit = effective_budget(token_budget)

    def fits(subset):
        return request_tokens(build(talent_raw, subset, per_subset_top_k)) <= limit

    subsets, current = [], []
    for pair in pairs:
        if fits(current + [pair]):
            current.append(pair)
            continue
        if current:
            subsets.append(current)
        current = [pair]
        if not fits(current):
            raise OversizeInputError(pair[0], request_tokens(build(talent_raw, current, per_subset_top_k)), limit)
    subsets.append(current)
    return ChunkPlan(tuple(tuple(i for i, _ in s) for s in subsets), per_subset_top_k, token_budget)


@dataclass(frozen=True)
class ChunkParams:
    top_n: int = 3
    token_budget: int = DEFAULT_TOKEN_BUDGET
    per_subset_top_k: int | None = None
    criteria: GuidedCriteria | None = None
    parallelism: int = 4

    @property
    def subset_k(self) -> int:
        return self.per_subset_top_k or self.top_n


def _mode_functions(mode: str, params: ChunkParams, talent_raw: str, backend: Backend):
    if mode == "guided":
        if params.criteria is None:
            raise InvalidInputError("guided mode needs criteria")

        def builder(cv, jds, k):
            return guided_request(cv, jds, replace(params.criteria, top_n=k))

        def run(jds, k):
            return recommend_guided(talent_raw, jds, replace(params.criteria, top_n=k), backend, params.token_budget)

    elif mode == "unguided":
        builder = unguided_request

        def run(jds, k):
            return recommend_unguided(talent_raw, jds, k, backend, params.token_budget)

    else:
        raise InvalidInputError(f"mode must be 'guided' or 'unguided', got {mode!r}")
    return builder, run


def chunked_recommend(
    talent_raw: str,
    jds_raw: Sequence[tuple[str, str]],
    mode: str,
    params: ChunkParams,
    backend: Backend,
) -> list[Recommendation]:
    """Recommend over a catalog of any size.

    If the catalog fits one prompt this is the direct call. Otherwise each
    subset yields its top ``per_subset_top_k`` and a final call over the
    winners' texts picks the overall ``top_n`` (recursing if the winners
    still overflow). Jobs ranked just below a subset's cut-off never reach
    the final call, which can miss a better job from a crowded subset.
    """
    check_text("talent_raw", talent_raw)
    check_positive_int("top_n", params.top_n)
    pairs = check_raw_jds(jds_raw)
    builder, run = _mode_functions(mode, params, talent_raw, backend)
    k = params.subset_k
    plan = plan_chunks(pairs, talent_raw, params.token_budget, max(k, params.top_n), builder)
    if len(plan.subsets) == 1:
        return run(pairs, params.top_n)

    by_id = dict(pairs)
    jobs_per_subset = [[(i, by_id[i]) for i in subset] for subset in plan.subsets]
    with ThreadPoolExecutor(max_workers=max(1, params.parallelism)) as pool:
        futures = [pool.submit(run, jds, k) for jds in jobs_per_subset]
        results = []
        for idx, fut in enumerate(futures):
            try:
                results.append(fut.result())
            except JobRecoError as exc:
                raise annotate(exc, f"subset {idx}")

    winners = list(dict.fromkeys(r.job_id for recs in results for r in recs))
    if len(winners) >= len(pairs):
        raise ChunkingError(
            f"subset winners ({len(winners)}) do not shrink the catalog ({len(pairs)}); lower per_subset_top_k"
        )
    try:
        return chunked_recommend(talent_raw, [(i, by_id[i]) for i in winners], mode, params, backend)
    except JobRecoError as exc:
        raise annotate(exc, "merge")


def describe_job(job: JobRequirement) -> str:
    """Plain-text rendering of a structured job, used when no original JD text exists."""
    lines = [
        f"Organization: {job.organization}",
        f"Role: {job.required_role}",
        "Required skills: "
        + (", ".join(f"{s.skill_name} (proficiency {s.proficiency}/5)" for s in job.required_skills) or "none"),
        "Required certifications: " + (", ".join(sorted(job.required_certifications)) or "none"),
        f"Required education level: {job.required_education_level}/5",
        f"Required experience: {job.required_experience_years:g} years",
        f"Time zone: UTC{job.timezone_offset_hours:+g}",
    ]
    if job.location:
        lines.append(f"Location: {job.location}")
    return "\n".join(lines)


def job_text(job: JobRequirement) -> str:
    return job.raw_text if job.raw_text.strip() else describe_job(job)
