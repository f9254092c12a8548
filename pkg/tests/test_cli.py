import json

import pytest

from conftest import GUIDED_REPLY, UNGUIDED_REPLY, rating_script, HYBRID_RERANK
from jobreco.cli import run
from jobreco.domain import job_to_dict, talent_to_dict, write_json


@pytest.fixture
def workspace(tmp_path, cv3, cv3_jobs, monkeypatch):
    for var in ("JOBRECO_API_KEY", "JOBRECO_ENDPOINT", "JOBRECO_SCRIPT", "JOBRECO_TOKEN_BUDGET"):
        monkeypatch.delenv(var, raising=False)
    jobs = tmp_path / "jobs"
    jobs.mkdir()
    for j in cv3_jobs:
        write_json(jobs / f"{j.job_id}.json", job_to_dict(j))
    write_json(tmp_path / "talent.json", talent_to_dict(cv3))
    (tmp_path / "cv3.txt").write_text(cv3.raw_text, encoding="utf-8")
    script = [["MATCHING CRITERIA", GUIDED_REPLY], ["own judgement", UNGUIDED_REPLY], *map(list, rating_script())]
    write_json(tmp_path / "script.json", script)
    write_json(tmp_path / "hybrid.json", [["own judgement", HYBRID_RERANK], *map(list, rating_script())])
    monkeypatch.chdir(tmp_path)
    return tmp_path


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


DET = ("recommend", "--mode", "deterministic", "--structured-talent", "talent.json", "--jobs", "jobs")


def test_no_arguments_prints_usage(capsys):
    code, out, err = call(capsys)
    assert code == 1 and "usage:" in err and out == ""


def test_unknown_flag_is_usage_error(workspace, capsys):
    code, _, err = call(capsys, *DET, "--frobnicate")
    assert code == 1 and "unrecognized arguments" in err


def test_deterministic_cv3(workspace, capsys):
    code, out, _ = call(capsys, *DET, "--top", "3")
    assert code == 0
    payload = json.loads(out)
    assert payload["talent_id"] == "CV3"
    assert [r["job_id"] for r in payload["recommendations"]] == ["JD7", "JD9", "JD10"]


def test_deterministic_is_byte_identical(workspace, capsys):
    first = call(capsys, *DET)[1]
    second = call(capsys, *DET)[1]
    assert first == second and first


def test_out_file(workspace, capsys):
    code, out, _ = call(capsys, *DET, "--out", "recs.json")
    assert code == 0 and out == ""
    assert json.loads((workspace / "recs.json").read_text(encoding="utf-8"))["mode"] == "deterministic"


def test_pretty_table(workspace, capsys):
    out = call(capsys, *DET, "--top", "2", "--pretty")[1]
    assert out.splitlines()[0].split() == ["rank", "job_id", "score", "org", "role", "benefits", "drawbacks"]
    assert "JD7" in out.splitlines()[2]


def test_guided_without_backend(workspace, capsys):
    code, _, err = call(capsys, "recommend", "--mode", "guided", "--talent", "cv3.txt", "--jobs", "jobs")
    assert code == 3 and "no backend configured" in err


def test_guided_with_script(workspace, capsys):
    argv = ("recommend", "--mode", "guided", "--talent", "cv3.txt", "--jobs", "jobs", "--scripted-backend", "script.json")
    code, out, _ = call(capsys, *argv)
    assert code == 0
    assert "JD3" in [r["job_id"] for r in json.loads(out)["recommendations"]]
    assert call(capsys, *argv)[1] == out


def test_unguided_with_transcript(workspace, capsys):
    code, out, _ = call(
        capsys, "--scripted-backend", "script.json", "recommend", "--mode", "unguided",
        "--talent", "cv3.txt", "--jobs", "jobs", "--transcript", "calls",
    )
    assert code == 0
    assert [r["job_id"] for r in json.loads(out)["recommendations"]] == ["JD4", "JD6", "JD7"]
    assert [p.name for p in (workspace / "calls").iterdir()] == ["call-0001.json"]


def test_raw_text_directory(workspace, capsys):
    raw = workspace / "raw"
    raw.mkdir()
    for i in (4, 6, 7):
        (raw / f"JD{i}.txt").write_text(f"Job description number {i}.", encoding="utf-8")
    code, out, _ = call(
        capsys, "recommend", "--mode", "unguided", "--talent", "cv3.txt", "--jobs", "raw",
        "--scripted-backend", "script.json",
    )
    assert code == 0 and len(json.loads(out)["recommendations"]) == 3


def test_hybrid_output_has_stages(workspace, capsys):
    code, out, _ = call(
        capsys, "recommend", "--mode", "hybrid", "--talent", "cv3.txt", "--structured-talent", "talent.json",
        "--jobs", "jobs", "--shortlist", "5", "--top", "3", "--scripted-backend", "hybrid.json",
    )
    assert code == 0
    payload = json.loads(out)
    assert [r["job_id"] for r in payload["recommendations"]] == ["JD7", "JD10", "JD9"]
    assert len(payload["stages"]["deterministic"]) == 5
    assert payload["stages"]["llm"]["order"] == ["JD7", "JD10", "JD9"]


def test_parse_failure_is_data_error(workspace, capsys):
    write_json(workspace / "bad.json", [["", "JD99\n- nope"]])
    code, _, err = call(
        capsys, "recommend", "--mode", "unguided", "--talent", "cv3.txt", "--jobs", "jobs",
        "--scripted-backend", "bad.json",
    )
    assert code == 2 and "JD99" in err


def test_missing_file_is_data_error(workspace, capsys):
    code, _, err = call(capsys, "recommend", "--mode", "deterministic", "--structured-talent", "nope.json", "--jobs", "jobs")
    assert code == 2 and "nope.json" in err


def test_show_config_hides_key(workspace, capsys, monkeypatch):
    monkeypatch.setenv("JOBRECO_API_KEY", "sk-very-secret")
    write_json(workspace / "cfg.json", {"limits": {"token_budget": 4096}})
    code, out, _ = call(capsys, "--config", "cfg.json", "--budget", "2048", "--show-config")
    assert code == 0 and "sk-very-secret" not in out
    assert json.loads(out)["limits"]["token_budget"] == 2048


def test_show_config_empty_file(workspace, capsys):
    (workspace / "empty.json").write_text("", encoding="utf-8")
    assert json.loads(call(capsys, "--config", "empty.json", "--show-config")[1]) == json.loads(
        call(capsys, "--show-config")[1]
    )


def test_unknown_config_key(workspace, capsys):
    write_json(workspace / "cfg.json", {"limits": {"tokens": 1}})
    code, _, err = call(capsys, "--config", "cfg.json", *DET)
    assert code == 2 and "limits.tokens" in err


def test_rate(workspace, capsys):
    code, out, _ = call(capsys, "rate", "--jobs", "jobs", "--job-id", "JD7", "--scripted-backend", "script.json")
    assert code == 0 and json.loads(out)[0]["org_rating"] == 9.0


def test_evaluate_ranked(workspace, capsys):
    recs = {"talent_id": "T", "recommendations": [
        {"job_id": j, "rank": k, "source_method": "unguided"} for k, j in enumerate("BAC", start=1)
    ]}
    write_json(workspace / "recs.json", recs)
    write_json(workspace / "refs.json", {"T": {"A": 0.9, "B": 0.7, "C": 0.5}})
    code, out, _ = call(capsys, "evaluate", "--recs", "recs.json", "--refs", "refs.json", "--ranked")
    assert code == 0 and json.loads(out)["accuracy_pct"] == pytest.approx(86.67, abs=0.01)


def test_evaluate_missing_reference(workspace, capsys):
    call(capsys, *DET, "--out", "recs.json")
    write_json(workspace / "refs.json", {"CV3": {"JD7": 1.0}})
    code, _, err = call(capsys, "evaluate", "--recs", "recs.json", "--refs", "refs.json")
    assert code == 2 and "JD9" in err


def test_bench(workspace, capsys):
    code, out, _ = call(
        capsys, "bench", "--mode", "deterministic", "--mode", "hybrid", "--talent", "cv3.txt",
        "--structured-talent", "talent.json", "--jobs", "jobs", "--scripted-backend", "hybrid.json", "--json",
    )
    assert code == 0
    det, hyb = json.loads(out)
    assert det["input_tokens"] == 0 and len(hyb["stage_seconds"]) == 2 and hyb["calls"] == 4


def test_synth(workspace, capsys):
    code, out, _ = call(capsys, "synth", "--cvs", "2", "--seed", "5", "--out", "data")
    assert code == 0
    meta = json.loads(out)
    assert meta["prng"] and len(meta["cases"]) == 2
    jobs = sorted(p.name for p in (workspace / "data" / "CV1" / "jobs").iterdir())
    assert len(jobs) == 10
    code, out, _ = call(
        capsys, "recommend", "--mode", "deterministic", "--structured-talent", "data/CV1/talent.json",
        "--jobs", "data/CV1/jobs", "--top", "1",
    )
    tiers = json.loads((workspace / "data" / "CV1" / "tiers.json").read_text(encoding="utf-8"))
    assert tiers[json.loads(out)["recommendations"][0]["job_id"]] == "exact"


def test_extract(workspace, capsys):
    jd = {
        "organization": "Google", "required_role": "full stack developer", "required_skills": [],
        "required_certifications": [], "required_education_level": 3, "required_experience_years": 6,
        "timezone_offset_hours": 5.5, "location": None,
    }
    write_json(workspace / "extract.json", [["", json.dumps(jd)]])
    raw = workspace / "raw"
    raw.mkdir()
    (raw / "JD7.txt").write_text("Google is hiring.", encoding="utf-8")
    code, out, _ = call(capsys, "extract", "--kind", "jd", "raw", "--scripted-backend", "extract.json")
    assert code == 0 and json.loads(out)[0].endswith("JD7.structured.json")
