"""Acceptance gate.

Each test prints one line, ``PASS`` or ``FAIL``, with the criterion number,
the measured value and the tolerance it was held to. Offline criteria run with
outbound sockets blocked. The live smoke test runs only when both
``JOBRECO_ENDPOINT`` and ``JOBRECO_API_KEY`` are set.

    pytest tests/test_acceptance.py -v
"""

import math
import os
import socket
import time
import warnings
from statistics import mean

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import CV3_TEXT, UNGUIDED_REPLY, worked_example
from parser_corpus import ACCEPTED, IDS, REJECTED
from jobreco.backend import ScriptedBackend, effective_budget, request_tokens
from jobreco.cli import make_backend, run
from jobreco.config import load_config
from jobreco.domain import MatchConfig, Recommendation, check_ranked, dumps, job_to_dict, recommendation_to_dict, talent_to_dict, write_json
from jobreco.errors import ParseError, PartialResultWarning, UnknownJobIdError
from jobreco.evaluate import ReferenceScores, evaluate_ranked
from jobreco.hybrid import run_hybrid
from jobreco.llm import ChunkParams, chunked_recommend, criteria_from_config, parse_guided, parse_unguided, plan_chunks, recommend_unguided, unguided_request
from jobreco.scoring import attribute_scores, recommend_deterministic, score_job, score_skills
from jobreco.synth import generate_jd_set, load_catalog, sample_talent

PARSERS = {"guided": parse_guided, "unguided": parse_unguided}


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def best_of(fn, repeats=7):
    """Fastest of several timed calls, in seconds, plus the last result."""
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


@pytest.fixture
def offline(monkeypatch):
    def refuse(*args, **kwargs):
        raise OSError("network disabled for the offline acceptance run")

    monkeypatch.setattr(socket.socket, "connect", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)


def test_criterion_1_worked_example(offline, capsys):
    talent, job = worked_example()
    per = attribute_scores(talent, job, MatchConfig().directions)
    seconds, b = best_of(lambda: score_job(talent, job))
    ok = (
        tuple(per.values()) == pytest.approx((0.5, 1, 1, 1, 0.6, 0.5))
        and abs(b.total - 4.6 / 6) <= 1e-6
        and f"{b.total:.4f}" == "0.7667"
        and f"{b.total:.2f}" == "0.77"
        and seconds < 1e-3
    )
    report(capsys, 1, ok, f"total={b.total:.7f} vs 4.6/6 within 1e-6, shown {b.total:.4f} / {b.total:.2f} (want 0.7667 / 0.77), {seconds * 1e3:.3f} ms (< 1 ms)")


def test_criterion_2_skill_formula(offline, capsys):
    held = {"python": 3, "sql": 5, "spark": 1}
    required = {"python": 3, "sql": 3, "spark": 3, "scala": 2}
    value = score_skills(held, required)
    report(capsys, 2, value == 0.5, f"skills score={value} for deviations (0, 2, 2) plus one missing (want exactly 0.5)")


def test_criterion_3_tier_ordering(offline, capsys):
    catalog = load_catalog()
    first, ordered = 0, 0
    t0 = time.perf_counter()
    for seed in range(50):
        talent = sample_talent(catalog, seed)
        jobs, tiers = generate_jd_set(talent, catalog, seed, return_tiers=True)
        recs = recommend_deterministic(talent, jobs, MatchConfig(top_n=len(jobs)))
        first += tiers[recs[0].job_id] == "exact"
        by_tier = {}
        for r in recs:
            by_tier.setdefault(tiers[r.job_id], []).append(r.score)
        m = [mean(by_tier[t]) for t in ("exact", "small", "large", "different")]
        ordered += m[0] > m[1] > m[2] > m[3]
    seconds = time.perf_counter() - t0
    ok = first == 50 and ordered == 50 and seconds < 5
    report(capsys, 3, ok, f"exact first {first}/50, tier means ordered {ordered}/50, {seconds:.2f} s (< 5 s)")


def test_criterion_4_hybrid_subset(offline, capsys, cv3, cv3_jobs, hybrid_script):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        result = run_hybrid(cv3, cv3.raw_text, cv3_jobs, MatchConfig(), ScriptedBackend(hybrid_script), 5, 3)
    seconds = time.perf_counter() - t0
    stage1 = [r.job_id for r in result.shortlist]
    final = result.recommendations
    ratings = [v for r in final for v in (r.org_rating, r.role_rating)]
    check_ranked(final)
    ok = (
        len(stage1) == 5
        and len(final) == 3
        and {r.job_id for r in final} <= set(stage1)
        and all(v is not None and 1 <= v <= 10 for v in ratings)
        and seconds < 1
    )
    report(
        capsys, 4, ok,
        f"stage 1 {stage1} -> stage 2 {[r.job_id for r in final]}, ratings {ratings} in [1, 10], {seconds * 1e3:.1f} ms (< 1 s)",
    )


def _equal_jds(n, size=400):
    return [(f"JD{i}", (f"Job {i} description. " * 40)[:size]) for i in range(1, n + 1)]


def _budget_for(k, jds, cv):
    need = request_tokens(unguided_request(cv, jds[:k], 3))
    budget = math.ceil(need / 0.9)
    while effective_budget(budget) < need:
        budget += 1
    return budget


def test_criterion_5_chunk_and_merge(offline, capsys, cv3_jobs):
    t0 = time.perf_counter()
    jds = [(j.job_id, j.raw_text) for j in cv3_jobs]
    script = [("own judgement", UNGUIDED_REPLY)]
    direct = recommend_unguided(CV3_TEXT, jds, 3, ScriptedBackend(script))
    chunked = chunked_recommend(CV3_TEXT, jds, "unguided", ChunkParams(top_n=3), ScriptedBackend(script))
    as_bytes = lambda recs: dumps([recommendation_to_dict(r) for r in recs]).encode()  # noqa: E731
    identical = as_bytes(direct) == as_bytes(chunked)

    cv = "A candidate CV."
    big = _equal_jds(10)
    budget = _budget_for(6, big, cv)
    plan = plan_chunks(big, cv, budget)
    script = [
        ("[END OF JD3]\n\n[JOB_ID: JD7]", "JD7\n- best overall\n\nJD2\n- close second\n\nJD9\n- third"),
        ("[JOB_ID: JD4]", "JD1\n- a\n\nJD2\n- b\n\nJD3\n- c"),
        ("[JOB_ID: JD10]", "JD7\n- a\n\nJD8\n- b\n\nJD9\n- c"),
    ]
    backend = ScriptedBackend(script)
    final = chunked_recommend(cv, big, "unguided", ChunkParams(top_n=3, token_budget=budget), backend)
    union = {"JD1", "JD2", "JD3", "JD7", "JD8", "JD9"}
    seconds = time.perf_counter() - t0
    ok = identical and len(plan.subsets) == 2 and {r.job_id for r in final} <= union and len(backend.requests) == 3 and seconds < 1
    report(
        capsys, 5, ok,
        f"single chunk byte-identical={identical}; 2-chunk final {[r.job_id for r in final]} within winners "
        f"{sorted(union, key=lambda s: int(s[2:]))}, {seconds * 1e3:.1f} ms (< 1 s)",
    )


def test_criterion_6_evaluation_oracle(offline, capsys):
    # Worked by hand beforehand: rank k gets the k-th best human score,
    # (0.9, 0.7, 0.5) against own (0.7, 0.9, 0.5) -> |.2|+|.2|+0 = 0.4, mean 0.1333.
    hand = 100 * (1 - (abs(0.9 - 0.7) + abs(0.7 - 0.9) + abs(0.5 - 0.5)) / 3)
    refs = ReferenceScores.from_nested({"T": {"A": 0.9, "B": 0.7, "C": 0.5}})
    recs = {"T": [Recommendation(j, k, "unguided") for k, j in enumerate("BAC", start=1)]}
    seconds, rep = best_of(lambda: evaluate_ranked(recs, refs))
    ok = abs(rep.accuracy_pct - 86.67) <= 0.01 and abs(rep.accuracy_pct - hand) < 1e-9 and seconds < 1e-3
    report(capsys, 6, ok, f"accuracy={rep.accuracy_pct:.4f}% (want 86.67 +- 0.01, hand {hand:.4f}), {seconds * 1e3:.3f} ms (< 1 ms)")


known = st.sampled_from(IDS)
unknown = st.integers(11, 999).map(lambda i: f"JD{i}")


def _unguided_text(ids):
    return "\n\n".join(f"{i}\n- Benefit: fits the stack" for i in ids)


def _guided_text(ids):
    return "\n\n".join(
        f"JOB_ID: {i}\nSCORE: 0.{n + 5}\nBENEFITS:\n- fits\nDRAWBACKS:\n- none\nQUALITATIVE:\n- ok" for n, i in enumerate(ids)
    )


RENDER = {"guided": _guided_text, "unguided": _unguided_text}


def test_criterion_7_parser_robustness(offline, capsys):
    failures = []
    for name, mode, text, top_n, expected in ACCEPTED:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", PartialResultWarning)
                got = [r.job_id for r in PARSERS[mode](text, IDS, top_n)]
            if got != expected or not set(got) <= set(IDS):
                failures.append(f"{name}: {got}")
        except ParseError as exc:
            failures.append(f"{name}: {exc}")
    for name, mode, text, top_n in REJECTED:
        try:
            PARSERS[mode](text, IDS, top_n)
            failures.append(f"{name}: accepted")
        except ParseError:
            pass

    @settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.sampled_from(sorted(PARSERS)), st.lists(known, min_size=1, max_size=4, unique=True), unknown, st.integers(0, 4))
    def unknown_always_errors(mode, ids, bad, at):
        ids = list(ids)
        ids.insert(at % (len(ids) + 1), bad)
        with pytest.raises(UnknownJobIdError):
            PARSERS[mode](RENDER[mode](ids), IDS, len(ids))

    @settings(max_examples=150, deadline=None)
    @given(st.sampled_from(sorted(PARSERS)), st.lists(known, min_size=1, max_size=5, unique=True))
    def never_fabricates(mode, ids):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PartialResultWarning)
            got = [r.job_id for r in PARSERS[mode](RENDER[mode](ids), IDS, 3)]
        assert got == ids[:3]

    for prop in (unknown_always_errors, never_fabricates):
        try:
            prop()
        except Exception as exc:  # hypothesis re-raises the shrunk failure
            failures.append(f"{prop.__name__}: {exc}")
    variants = len(ACCEPTED)
    ok = variants >= 20 and not failures
    report(
        capsys, 7, ok,
        f"{variants} accepted variants (>= 20), {len(REJECTED)} rejected, unknown-id and fabrication properties"
        + ("" if ok else f"; failures: {failures}"),
    )


LIVE = bool(os.environ.get("JOBRECO_ENDPOINT") and os.environ.get("JOBRECO_API_KEY"))


def test_criterion_8_offline_suite_has_no_network(offline, capsys):
    try:
        socket.create_connection(("example.com", 80), timeout=1)
        blocked = False
    except OSError:
        blocked = True
    report(capsys, 8, blocked, "offline criteria 1-7 and 9 run with outbound connections refused")


@pytest.mark.skipif(not LIVE, reason="set JOBRECO_ENDPOINT and JOBRECO_API_KEY to run the live smoke test")
def test_criterion_8_live_smoke(capsys, cv3, cv3_jobs):
    backend = make_backend(load_config(env=os.environ))
    jds = [(j.job_id, j.raw_text) for j in cv3_jobs]
    ids = {j.job_id for j in cv3_jobs}
    criteria = criteria_from_config(MatchConfig(), 3)
    guided = chunked_recommend(cv3.raw_text, jds, "guided", ChunkParams(top_n=3, criteria=criteria), backend)
    unguided = chunked_recommend(cv3.raw_text, jds, "unguided", ChunkParams(top_n=3), backend)
    hybrid = run_hybrid(cv3, cv3.raw_text, cv3_jobs, MatchConfig(), backend, 5, 3)
    for recs in (guided, unguided, hybrid.recommendations):
        check_ranked(recs)
    ok = (
        {r.job_id for r in guided + unguided} <= ids
        and {r.job_id for r in hybrid.recommendations} <= {r.job_id for r in hybrid.shortlist}
        and all(r.org_rating is not None for r in hybrid.recommendations)
    )
    report(
        capsys, 8, ok,
        f"live guided {[r.job_id for r in guided]}, unguided {[r.job_id for r in unguided]}, "
        f"hybrid {[r.job_id for r in hybrid.recommendations]}",
    )


def test_criterion_9_cli_reproducible(offline, capsys, tmp_path, cv3, cv3_jobs, monkeypatch):
    for var in ("JOBRECO_ENDPOINT", "JOBRECO_SCRIPT"):
        monkeypatch.delenv(var, raising=False)
    (tmp_path / "jobs").mkdir()
    for j in cv3_jobs:
        write_json(tmp_path / "jobs" / f"{j.job_id}.json", job_to_dict(j))
    write_json(tmp_path / "talent.json", talent_to_dict(cv3))
    outputs = []
    for n in (1, 2):
        out = tmp_path / f"run{n}.json"
        code = run(["recommend", "--mode", "deterministic", "--structured-talent", str(tmp_path / "talent.json"),
                    "--jobs", str(tmp_path / "jobs"), "--out", str(out)])
        outputs.append((code, out.read_bytes()))
    ok = outputs[0][0] == outputs[1][0] == 0 and outputs[0][1] == outputs[1][1]
    report(capsys, 9, ok, f"two deterministic CLI runs, {len(outputs[0][1])} bytes each, identical={outputs[0][1] == outputs[1][1]}")
