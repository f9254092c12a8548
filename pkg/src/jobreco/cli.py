"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data or parse error, 3 backend error.
Results go to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .backend import LiveBackend, TranscriptBackend, load_script
from .config import API_KEY_ENV, AppConfig, load_config
from .domain import (
    dumps,
    load_jobs,
    load_talent,
    recommendation_from_dict,
    recommendation_to_dict,
    talent_to_dict,
    job_to_dict,
    write_json,
    read_json,
)
from .errors import BackendError, BackendMissingError, DataError, InvalidInputError, SchemaError
from .evaluate import ReferenceScores, RunInputs, evaluate_ranked, evaluate_scored, measure_run
from .extract import extract_files
from .hybrid import rate_org_and_role, run_hybrid
from .llm import ChunkParams, GuidedCriteria, chunked_recommend, criteria_from_config, job_text, natural_key
from .scoring import recommend_deterministic
from .synth import PRNG_ALGORITHM, generate_dataset, load_catalog, render_unstructured

MODES = ("deterministic", "guided", "unguided", "hybrid")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# input helpers


def _read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def load_job_dir(path) -> tuple[list, list[tuple[str, str]]]:
    """Structured jobs (``*.json``) and raw texts (``*.txt``, id = file stem) under ``path``.

    A structured job with no embedded text picks up ``<job_id>.txt`` when present.
    """
    path = Path(path)
    if path.is_dir():
        txt = sorted(path.glob("*.txt"), key=lambda p: natural_key(p.stem))
        has_json = any(p.suffix == ".json" for p in path.iterdir())
    elif path.suffix == ".txt":
        txt, has_json = [path], False
    else:
        txt, has_json = [], True
    if not path.exists():
        raise FileNotFoundError(f"no such file or directory: {path}")
    raw = [(p.stem, _read_text(p)) for p in txt]
    jobs = load_jobs(path) if has_json else []
    texts = dict(raw)
    jobs = [replace(j, raw_text=texts[j.job_id]) if not j.raw_text.strip() and j.job_id in texts else j for j in jobs]
    jobs.sort(key=lambda j: natural_key(j.job_id))
    return jobs, raw


def _structured_talent(args):
    if args.structured_talent:
        return load_talent(args.structured_talent)
    if args.talent and Path(args.talent).suffix == ".json":
        return load_talent(args.talent)
    return None


def _talent_text(args, talent) -> str:
    if args.talent and Path(args.talent).suffix != ".json":
        return _read_text(args.talent)
    if talent is not None and talent.raw_text.strip():
        return talent.raw_text
    raise InvalidInputError("this mode needs the CV text: pass --talent <cv.txt>")


def _raw_pairs(jobs, raw):
    if raw:
        return raw
    if jobs:
        return [(j.job_id, job_text(j)) for j in jobs]
    raise InvalidInputError("no job descriptions found")


def make_backend(cfg: AppConfig, transcript=None, required: bool = True):
    backend = None
    if cfg.script:
        backend = load_script(cfg.script)
    elif cfg.endpoint:
        if not cfg.api_key:
            raise BackendMissingError(f"backend endpoint is set but {API_KEY_ENV} is not")
        backend = LiveBackend(cfg.endpoint, cfg.api_key, cfg.model, cfg.timeout_s, cfg.max_retries)
    if backend is None:
        if required:
            raise BackendMissingError(
                "no backend configured: set backend.endpoint (with " + API_KEY_ENV + ") or pass --scripted-backend"
            )
        return None
    if transcript:
        backend = TranscriptBackend(backend, transcript)
    return backend


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(h) for h in headers]] + [["" if c is None else str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(x):
    return None if x is None else f"{x:.2f}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_recommend(args, cfg: AppConfig) -> int:
    jobs, raw = load_job_dir(args.jobs)
    mode = args.mode
    top = args.top
    talent = _structured_talent(args)
    payload: dict = {"mode": mode}
    if mode == "deterministic":
        if talent is None:
            raise InvalidInputError("deterministic mode needs a structured talent (--structured-talent)")
        if not jobs:
            raise InvalidInputError(f"no structured jobs (*.json) under {args.jobs}")
        recs = recommend_deterministic(talent, jobs, cfg.match.with_top_n(top or 10))
    elif mode in ("guided", "unguided"):
        backend = make_backend(cfg, args.transcript)
        cv = _talent_text(args, talent)
        top = top or 3
        criteria = None
        if mode == "guided":
            if args.criteria:
                criteria = GuidedCriteria(_read_text(args.criteria).strip(), top)
            else:
                criteria = criteria_from_config(cfg.match, top)
        params = ChunkParams(top, cfg.token_budget, args.per_subset_top_k, criteria, cfg.parallelism)
        recs = chunked_recommend(cv, _raw_pairs(jobs, raw), mode, params, backend)
    else:
        backend = make_backend(cfg, args.transcript)
        if talent is None:
            raise InvalidInputError("hybrid mode needs a structured talent (--structured-talent)")
        if not jobs:
            raise InvalidInputError(f"no structured jobs (*.json) under {args.jobs}")
        cv = _talent_text(args, talent)
        result = run_hybrid(
            talent, cv, jobs, cfg.match, backend, args.shortlist, top or 3, cfg.token_budget, cfg.parallelism
        )
        recs = result.recommendations
        payload["stages"] = result.stages()
    if talent is not None:
        payload["talent_id"] = talent.talent_id
    elif args.talent:
        payload["talent_id"] = Path(args.talent).stem
    payload["recommendations"] = [recommendation_to_dict(r) for r in recs]

    if args.pretty:
        rows = [
            (r.rank, r.job_id, _fmt(r.score), _fmt(r.org_rating), _fmt(r.role_rating), len(r.benefits), len(r.drawbacks))
            for r in recs
        ]
        _emit(args, _table(("rank", "job_id", "score", "org", "role", "benefits", "drawbacks"), rows))
    else:
        _emit(args, dumps(payload))
    return 0


def cmd_rate(args, cfg: AppConfig) -> int:
    jobs, _ = load_job_dir(args.jobs)
    if args.job_id:
        wanted = set(args.job_id)
        missing = wanted - {j.job_id for j in jobs}
        if missing:
            raise InvalidInputError(f"unknown job ids: {', '.join(sorted(missing))}")
        jobs = [j for j in jobs if j.job_id in wanted]
    if not jobs:
        raise InvalidInputError(f"no structured jobs (*.json) under {args.jobs}")
    backend = make_backend(cfg, args.transcript)
    out = []
    for job in jobs:
        org, role, rationale = rate_org_and_role(job, backend)
        out.append(
            {
                "job_id": job.job_id,
                "organization": job.organization,
                "role": job.required_role,
                "org_rating": org,
                "role_rating": role,
                "rationale": rationale,
            }
        )
    _emit(args, dumps(out))
    return 0


def _load_recs(paths) -> dict[str, list]:
    """Recommendations by talent from recommend outputs or a ``{talent_id: [recs]}`` map."""
    by_talent: dict[str, list] = {}
    for path in paths:
        data = read_json(path)
        items = data if isinstance(data, list) else [data]
        for item in items:
            if isinstance(item, dict) and "recommendations" in item:
                if "talent_id" not in item:
                    raise SchemaError(f"{path}: recommendation set has no talent_id")
                by_talent.setdefault(item["talent_id"], []).extend(
                    recommendation_from_dict(r, where=str(path)) for r in item["recommendations"]
                )
            elif isinstance(item, dict):
                for talent_id, recs in item.items():
                    by_talent.setdefault(talent_id, []).extend(
                        recommendation_from_dict(r, where=str(path)) for r in recs
                    )
            else:
                raise SchemaError(f"{path}: expected recommendation output objects")
    return by_talent


def cmd_evaluate(args, cfg: AppConfig) -> int:
    recs = _load_recs(args.recs)
    refs = ReferenceScores.load(args.refs)
    report = (evaluate_ranked if args.ranked else evaluate_scored)(recs, refs)
    if args.pretty:
        rows = [(t, f"{m:.4f}", f"{100 * (1 - m):.2f}") for t, m in sorted(report.mean_abs_deviation_by_talent.items())]
        rows.append(("overall", f"{report.mean_abs_deviation:.4f}", f"{report.accuracy_pct:.2f}"))
        _emit(args, _table(("talent", "mean_abs_dev", "accuracy_pct"), rows))
    else:
        _emit(args, dumps(report.to_dict()))
    return 0


def cmd_bench(args, cfg: AppConfig) -> int:
    jobs, raw = load_job_dir(args.jobs)
    talent = _structured_talent(args)
    modes = MODES if "all" in args.mode else tuple(dict.fromkeys(args.mode))
    needs_backend = any(m != "deterministic" for m in modes)
    backend = make_backend(cfg, args.transcript, required=needs_backend)
    cv = ""
    if any(m in ("guided", "unguided", "hybrid") for m in modes):
        cv = _talent_text(args, talent)
    top = args.top or 3
    inputs = RunInputs(
        talent_raw=cv,
        jds_raw=_raw_pairs(jobs, raw) if any(m in ("guided", "unguided") for m in modes) else (),
        talent=talent,
        jobs=jobs,
        config=cfg.match,
        top_n=top,
        shortlist_k=args.shortlist,
        token_budget=cfg.token_budget,
        criteria=GuidedCriteria(_read_text(args.criteria).strip(), top) if args.criteria else None,
        parallelism=cfg.parallelism,
    )
    rows, results = [], []
    for mode in modes:
        m = measure_run(mode, inputs, None if mode == "deterministic" else backend)
        results.append(m.to_dict())
        for stage, seconds in m.stage_seconds.items():
            rows.append((mode, stage, m.calls, m.input_tokens, m.output_tokens, f"{seconds:.4f}"))
    if args.json:
        _emit(args, dumps(results))
    else:
        _emit(args, _table(("method", "stage", "calls", "input_tokens", "output_tokens", "seconds"), rows))
    return 0


def cmd_extract(args, cfg: AppConfig) -> int:
    backend = make_backend(cfg, args.transcript)
    paths = []
    for p in map(Path, args.paths):
        if p.is_dir():
            paths.extend(sorted(p.glob("*.txt"), key=lambda q: natural_key(q.stem)))
        elif p.exists():
            paths.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    if not paths:
        raise InvalidInputError("no .txt files to extract")
    written = extract_files(paths, args.kind, backend, cfg.parallelism)
    _emit(args, dumps([str(p) for p in written]))
    return 0


def cmd_synth(args, cfg: AppConfig) -> int:
    catalog = load_catalog(args.catalog)
    backend = make_backend(cfg, args.transcript, required=False)
    cases = generate_dataset(catalog, args.cvs, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for case in cases:
        case_dir = out / case.talent.talent_id
        jobs_dir = case_dir / "jobs"
        jobs_dir.mkdir(parents=True, exist_ok=True)
        write_json(case_dir / "talent.json", talent_to_dict(case.talent))
        write_json(case_dir / "tiers.json", case.tiers)
        for job in case.jobs:
            write_json(jobs_dir / f"{job.job_id}.json", job_to_dict(job))
        if backend is not None:
            (case_dir / "cv.txt").write_text(render_unstructured(case.talent, backend) + "\n", encoding="utf-8")
            for job in case.jobs:
                text = render_unstructured(job, backend)
                (jobs_dir / f"{job.job_id}.txt").write_text(text + "\n", encoding="utf-8")
    meta = {
        "prng": PRNG_ALGORITHM,
        "seed": args.seed,
        "catalog_version": catalog.version,
        "cases": [{"talent_id": c.talent.talent_id, "seed": c.seed} for c in cases],
    }
    write_json(out / "metadata.json", meta)
    sys.stdout.write(dumps(meta) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps an unset subcommand flag from clobbering the top-level one.
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON config file with backend/match/limits sections")
    p.add_argument("--scripted-backend", metavar="FILE", help="JSON list of [matcher, response] pairs")
    p.add_argument("--endpoint", help="chat-completion endpoint URL")
    p.add_argument("--model", help="model name sent to the endpoint")
    p.add_argument("--timeout", type=float, help="request timeout in seconds")
    p.add_argument("--max-retries", type=int)
    p.add_argument("--budget", type=int, help="prompt token budget (default 8192)")
    p.add_argument("--parallelism", type=int, help="concurrent backend calls (default 4)")
    p.add_argument("--transcript", metavar="DIR", help="write each backend call to DIR")
    p.add_argument("--show-config", action="store_true", help="print the resolved configuration and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _talent_args(p):
    p.add_argument("--talent", help="CV text file (or structured talent .json)")
    p.add_argument("--structured-talent", help="structured talent JSON")
    p.add_argument("--jobs", required=True, help="directory of job .json and/or .txt files")
    p.add_argument("--criteria", help="text file with matching criteria for guided mode")
    p.add_argument("--top", type=int, help="number of final recommendations")
    p.add_argument("--shortlist", type=int, default=5, help="hybrid stage-1 size (default 5)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="jobreco", description="Talent-to-job recommendation.", parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("recommend", parents=[common], help="recommend jobs for one talent")
    p.add_argument("--mode", choices=MODES, required=True)
    _talent_args(p)
    p.add_argument("--per-subset-top-k", type=int)
    p.add_argument("--pretty", action="store_true", help="print a table instead of JSON")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("rate", parents=[common], help="rate organizations and roles")
    p.add_argument("--jobs", required=True)
    p.add_argument("--job-id", action="append")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("evaluate", parents=[common], help="compare recommendations with reference scores")
    p.add_argument("--recs", required=True, nargs="+")
    p.add_argument("--refs", required=True)
    p.add_argument("--ranked", action="store_true", help="use rank-mapped scores (for unscored output)")
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", parents=[common], help="token and time accounting per method")
    p.add_argument("--mode", choices=MODES + ("all",), action="append", required=True)
    _talent_args(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("extract", parents=[common], help="structure CV or JD text files")
    p.add_argument("--kind", choices=("cv", "jd"), required=True)
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--catalog", help="attribute catalog JSON (default: bundled IT catalog)")
    p.add_argument("--cvs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def _resolve(args) -> AppConfig:
    overrides = {
        "backend.endpoint": getattr(args, "endpoint", None),
        "backend.model": getattr(args, "model", None),
        "backend.timeout_s": getattr(args, "timeout", None),
        "backend.max_retries": getattr(args, "max_retries", None),
        "backend.script": getattr(args, "scripted_backend", None),
        "limits.token_budget": getattr(args, "budget", None),
        "limits.parallelism": getattr(args, "parallelism", None),
    }
    return load_config(getattr(args, "config", None), overrides=overrides)


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_help(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
        for name in ("top", "shortlist", "cvs", "per_subset_top_k"):
            value = getattr(args, name, None)
            if value is not None and value < 1:
                parser.error(f"--{name.replace('_', '-')} must be >= 1")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING)
    if getattr(args, "transcript", None) is None:
        args.transcript = None

    try:
        cfg = _resolve(args)
        if getattr(args, "show_config", False):
            sys.stdout.write(dumps(cfg.public_dict()) + "\n")
            return 0
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return args.func(args, cfg)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 3


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
