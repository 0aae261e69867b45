"""Command-line entry points.

Subcommands:

  index      scan a source tree and list the entities found
  enrich     combine a bundle's sanitizer report with its call trace
  repair     run the agent loop over one or more bundles
  validate   apply a patch file to a bundle and build/reproduce
  evaluate   aggregate results.jsonl records into summary tables
  metrics    one-off metric computations (ochiai, codebleu,
             point-biserial)

Exit status reflects whether the command itself ran: a repair that
ends without a plausible patch still exits 0, because plausibility is
recorded data, not a driver failure.  Batch repair never aborts on a
single bad bundle; the failure becomes a record.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import statistics
import sys
import traceback
from typing import List, Optional, Tuple

from .agent import AgentConfig, RepairResult, run_repair
from .backends import LiveBackend, ModelBackend, ReplayBackend
from .callgraph import (
    EnrichedReport,
    enrich,
    filter_graph,
    ingest_trace,
    load_symbol_table,
    render_enriched,
    symbolize,
)
from .config import CONFIG_ENV, PipelineConfig, apply_overrides, load_config
from .diffs import render_unified
from .edits import CandidatePatch, _apply_one, parse_edit_blocks, render_edits
from .errors import RoverError
from .index import SearchIndex, build_index, dump_entities
from .metrics.aggregate import aggregate, load_records, render_report
from .metrics.codebleu import codebleu
from .metrics.sbfl import load_coverage_dir, ochiai_rank, render_ranking
from .metrics.stats import point_biserial
from .patchlab import (
    DEVELOPER_PATCH_FILE,
    PatchStatus,
    RepairTask,
    load_task,
    validate,
)
from .report import classify_cwe, parse_report

PROG = "rover"


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_report(task: RepairTask):
    return parse_report(_read(task.report_path))


def _enriched_for_task(
    task: RepairTask, index: SearchIndex, config: PipelineConfig
) -> Tuple[EnrichedReport, Optional[str]]:
    """Build the enriched report for a bundle.  Returns the report plus
    an optional passthrough note for bundles without a trace."""
    report = _load_report(task)
    trace_path = task.trace_path()
    if trace_path is None:
        return EnrichedReport(report, []), "(no trace available for this bug)"
    graph = ingest_trace(_read(trace_path))
    symbols_path = task.symbols_path()
    if symbols_path is not None:
        graph = symbolize(graph, load_symbol_table(symbols_path))
    graph = filter_graph(graph, index, config.denylist)
    return enrich(report, graph, cap=config.enrichment_cap), None


def _make_backend(spec: str, config: PipelineConfig, bug_id: str) -> ModelBackend:
    """Build a backend from a --backend spec.

    ``replay:<path>`` replays a recorded script; when <path> is a
    directory the script is <path>/<bug_id>.json so batch runs can pair
    each bundle with its own recording.  ``live`` talks to the API
    configured via ROVER_API_BASE / ROVER_API_KEY.
    """
    if spec.startswith("replay:"):
        path = spec[len("replay:") :]
        if os.path.isdir(path):
            path = os.path.join(path, f"{bug_id}.json")
        if not os.path.isfile(path):
            raise RoverError(f"replay script not found: {path}")
        return ReplayBackend(path)
    if spec == "live":
        return LiveBackend(
            config.agent.model_id, temperature=config.agent.temperature
        )
    raise RoverError(f"unknown backend spec {spec!r} (use live or replay:<path>)")


def _unified_from_edits(src_root: str, patch: CandidatePatch) -> str:
    """Render a candidate patch as a unified diff against src_root,
    applying the edits to in-memory copies of the touched files."""
    chunks = []
    for rel in patch.touched_files():
        before = _read(os.path.join(src_root, rel))
        after = before
        for edit in patch.edits:
            if edit.file == rel:
                after = _apply_one(after, edit)
        chunks.append(render_unified(rel, before, after))
    return "".join(chunks)


def _repair_one(
    bundle_dir: str, backend_spec: str, config: PipelineConfig
) -> dict:
    """Run the full loop on one bundle and persist its outputs.

    Returns the results.jsonl record.  Driver failures (bad bundle,
    exhausted replay script, IO errors) are caught by the caller.
    """
    task = load_task(bundle_dir)
    out_dir = os.path.join(config.out_dir, task.bug_id)
    os.makedirs(out_dir, exist_ok=True)

    index = build_index(task.src_root, suffixes=config.suffixes,
                        max_result_chars=config.tool_result_max_chars)
    enriched, note = _enriched_for_task(task, index, config)
    backend = _make_backend(backend_spec, config, task.bug_id)

    result = run_repair(
        task, index, enriched, backend, config.agent, config.scratch_dir
    )

    final_patch_path = None
    if result.patch is not None:
        if result.status == PatchStatus.NO_PATCH:
            # The best attempt never applied cleanly; keep the raw edit
            # blocks for inspection but do not advertise a patch.
            _write(os.path.join(out_dir, "attempt.edits"),
                   render_edits(result.patch.edits))
        else:
            diff_text = _unified_from_edits(task.src_root, result.patch)
            final_patch_path = os.path.join(out_dir, "final.patch")
            _write(final_patch_path, diff_text)

    record = {
        "bug_id": task.bug_id,
        "project": task.project_name,
        "status": result.status.value,
        "rounds_used": result.round,
        "attempts_used": result.attempt,
        "wall_time_secs": round(result.wall_time_secs, 3),
        "cost_usd": round(
            config.cost_usd(
                config.agent.model_id, result.tokens_in, result.tokens_out
            ),
            6,
        ),
        "tokens_in": result.tokens_in,
        "tokens_out": result.tokens_out,
        "generation_calls": result.generation_calls,
        "retrieval_calls": result.retrieval_calls,
        "tool_calls": result.tool_calls,
        "final_patch_path": final_patch_path,
        "bundle_dir": os.path.abspath(bundle_dir),
    }
    try:
        label = classify_cwe(_load_report(task))
        record["cwe"] = label.cwe_id
    except RoverError:
        pass
    if task.year is not None:
        record["year"] = task.year

    transcript_doc = {
        "bug_id": task.bug_id,
        "status": result.status.value,
        "round": result.round,
        "attempt": result.attempt,
        "locations": [
            {"function": loc.function, "file": loc.file}
            for loc in result.locations
        ],
        "enrichment_note": note,
        "events": result.transcript,
    }
    _write(os.path.join(out_dir, "transcript.json"),
           json.dumps(transcript_doc, indent=2, sort_keys=True) + "\n")
    return record


def cmd_index(args, config: PipelineConfig) -> int:
    index = build_index(args.root, suffixes=config.suffixes,
                        max_result_chars=config.tool_result_max_chars)
    if args.json:
        doc = [
            {
                "kind": ent.kind.value,
                "name": ent.qualified_name(),
                "file": ent.file,
                "start_line": ent.span[0],
                "end_line": ent.span[1],
            }
            for ent in index.entity_list
        ]
        print(json.dumps(doc, indent=2))
    else:
        print(dump_entities(index))
    return 0


def cmd_enrich(args, config: PipelineConfig) -> int:
    task = load_task(args.bundle)
    index = build_index(task.src_root, suffixes=config.suffixes,
                        max_result_chars=config.tool_result_max_chars)
    enriched, note = _enriched_for_task(task, index, config)
    text = render_enriched(enriched, note=note)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_repair(args, config: PipelineConfig) -> int:
    os.makedirs(config.out_dir, exist_ok=True)
    results_path = os.path.join(config.out_dir, "results.jsonl")
    records: List[Optional[dict]] = [None] * len(args.bundles)

    def work(slot: int, bundle: str) -> None:
        try:
            records[slot] = _repair_one(bundle, args.backend, config)
        except Exception as exc:  # noqa: BLE001 - batch must not abort
            records[slot] = {
                "bug_id": os.path.basename(os.path.normpath(bundle)),
                "status": "Error",
                "error": f"{type(exc).__name__}: {exc}",
                "bundle_dir": os.path.abspath(bundle),
            }
            if args.debug:
                traceback.print_exc()

    if config.parallelism > 1 and len(args.bundles) > 1:
        with concurrent.futures.ThreadPoolExecutor(
            max_workers=config.parallelism
        ) as pool:
            futures = [
                pool.submit(work, slot, bundle)
                for slot, bundle in enumerate(args.bundles)
            ]
            for fut in futures:
                fut.result()
    else:
        for slot, bundle in enumerate(args.bundles):
            work(slot, bundle)

    with open(results_path, "a", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    for record in records:
        status = record.get("status", "?")
        extra = f" ({record['error']})" if "error" in record else ""
        print(f"{record.get('bug_id', '?')}: {status}{extra}")
    print(f"results: {results_path}")
    return 0


def cmd_validate(args, config: PipelineConfig) -> int:
    task = load_task(args.bundle)
    text = _read(args.patch)
    try:
        edits = parse_edit_blocks(text)
        patch = CandidatePatch(edits=edits, raw_response=text)
    except RoverError as exc:
        print(json.dumps({"status": "Unparsable", "detail": str(exc)}))
        return 0
    try:
        outcome = validate(task, patch, config.scratch_dir, tag=args.tag)
    except RoverError as exc:
        print(json.dumps({"status": "ApplyFailed", "detail": str(exc)}))
        return 0
    doc = {
        "status": outcome.status.value,
        "wall_time_secs": round(outcome.wall_time_secs, 3),
        "timed_out": outcome.timed_out,
    }
    if outcome.build_log_excerpt:
        doc["build_log_excerpt"] = outcome.build_log_excerpt
    if outcome.crash_report is not None:
        doc["crash_bug_type"] = outcome.crash_report.bug_type
    print(json.dumps(doc, indent=2))
    return 0


def _patched_function_pair(record: dict) -> Optional[Tuple[str, str]]:
    """Candidate and reference texts of the function a developer patch
    touches, for similarity scoring.  Returns None when the bundle has
    no developer patch or the texts cannot be recovered."""
    import shutil
    import tempfile

    from .diffs import apply_unified, changed_files, parse_unified
    from .index import entity_text
    from .index import EntityKind

    bundle_dir = record.get("bundle_dir")
    patch_path = record.get("final_patch_path")
    if not bundle_dir or not patch_path:
        return None
    dev_path = os.path.join(bundle_dir, DEVELOPER_PATCH_FILE)
    if not os.path.isfile(dev_path):
        return None
    task = load_task(bundle_dir)
    dev_diff = _read(dev_path)
    cand_diff = _read(patch_path)
    hunks = parse_unified(dev_diff)
    if not hunks:
        return None
    first_file, first_hunks = hunks[0]
    anchor_line = 1
    if first_hunks:
        # Anchor on the first changed line, not the hunk start: leading
        # context regularly begins above the function being patched.
        h = first_hunks[0]
        k = 0
        while (k < len(h.before) and k < len(h.after)
               and h.before[k] == h.after[k]):
            k += 1
        anchor_line = h.start + k

    with tempfile.TemporaryDirectory(prefix="rover-cb-") as tmp:
        ref_root = os.path.join(tmp, "ref")
        cand_root = os.path.join(tmp, "cand")
        shutil.copytree(task.src_root, ref_root)
        shutil.copytree(task.src_root, cand_root)
        apply_unified(ref_root, dev_diff)
        try:
            apply_unified(cand_root, cand_diff)
        except RoverError:
            return None

        def function_at(root: str, name: Optional[str]):
            idx = build_index(root)
            ents = [
                e
                for e in idx.entity_list
                if e.file == first_file
                and e.kind in (EntityKind.FUNCTION, EntityKind.METHOD)
            ]
            if name is not None:
                for ent in ents:
                    if ent.name == name:
                        return ent, entity_text(idx, ent)
                return None
            for ent in ents:
                if ent.span[0] <= anchor_line <= ent.span[1]:
                    return ent, entity_text(idx, ent)
            return None

        ref = function_at(ref_root, None)
        if ref is None:
            return None
        cand = function_at(cand_root, ref[0].name)
        if cand is None:
            return None
        return cand[1], ref[1]


def cmd_evaluate(args, config: PipelineConfig) -> int:
    path = args.results
    if os.path.isdir(path):
        path = os.path.join(path, "results.jsonl")
    records = load_records(path)

    if args.codebleu:
        for record in records:
            try:
                pair = _patched_function_pair(record)
            except RoverError:
                pair = None
            if pair is None:
                continue
            try:
                record["codebleu"] = round(codebleu(*pair).total, 6)
            except RoverError:
                continue

    report = aggregate(records)
    text = render_report(report)
    doc = report.to_dict()

    scored = [
        r
        for r in records
        if r.get("codebleu") is not None and r.get("status") in (
            PatchStatus.PLAUSIBLE.value,
            PatchStatus.IMPLAUSIBLE.value,
        )
    ]
    if scored:
        values = [r["codebleu"] for r in scored]
        doc["codebleu"] = {
            "n": len(values),
            "mean": round(statistics.mean(values), 6),
            "median": round(statistics.median(values), 6),
        }
        text += (
            "\n\ncodebleu vs developer patch, mean (median): "
            f"{statistics.mean(values):.4f} "
            f"({statistics.median(values):.4f}) over {len(values)}"
        )
    if len(scored) >= 3:
        labels = [
            1 if r["status"] == PatchStatus.PLAUSIBLE.value else 0
            for r in scored
        ]
        try:
            pb = point_biserial([r["codebleu"] for r in scored], labels)
            doc["similarity_vs_plausibility"] = pb.to_dict()
            text += (
                "\n\nsimilarity vs plausibility: "
                f"r={pb.r:.3f} p={pb.p_value:.4f} (n={pb.n})"
            )
        except RoverError:
            pass

    if args.out:
        _write(os.path.join(args.out, "report.txt"), text + "\n")
        _write(
            os.path.join(args.out, "report.json"),
            json.dumps(doc, indent=2, sort_keys=True) + "\n",
        )
        print(f"report: {os.path.join(args.out, 'report.txt')}")
    else:
        print(text)
    return 0


def cmd_metrics(args, config: PipelineConfig) -> int:
    if args.metric == "ochiai":
        matrix = load_coverage_dir(args.coverage)
        ranking = ochiai_rank(matrix)
        print(render_ranking(ranking, top=args.top))
        return 0
    if args.metric == "codebleu":
        score = codebleu(_read(args.candidate), _read(args.reference))
        print(json.dumps(score.to_dict(), indent=2))
        return 0
    if args.metric == "point-biserial":
        doc = json.loads(_read(args.data))
        result = point_biserial(doc["scores"], doc["labels"])
        print(json.dumps(result.to_dict(), indent=2))
        return 0
    raise RoverError(f"unknown metric {args.metric!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Repair fuzzer-discovered C/C++ vulnerabilities.",
    )
    parser.add_argument(
        "--config",
        help=f"JSON config file (default: ${CONFIG_ENV} when set)",
    )
    parser.add_argument("--scratch", dest="scratch_dir",
                        help="scratch directory for build/validate trees")
    parser.add_argument("--out", dest="out_dir",
                        help="output directory for repair artifacts")
    parser.add_argument("--debug", action="store_true",
                        help="print tracebacks for per-bundle failures")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="scan a source tree")
    p.add_argument("root")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("enrich", help="render an enriched report")
    p.add_argument("bundle")
    p.add_argument("--out", dest="out", default=None,
                   help="write to a file instead of stdout")
    p.set_defaults(fn=cmd_enrich)

    p = sub.add_parser("repair", help="run the repair loop on bundles")
    p.add_argument("bundles", nargs="+")
    p.add_argument("--backend", default="live",
                   help="'live' or 'replay:<script-or-dir>'")
    p.add_argument("--rounds", type=int, default=None,
                   help="max main rounds per bug")
    p.add_argument("--retries", type=int, default=None,
                   help="max patch attempts per round")
    p.add_argument("--model", default=None, help="model id for live runs")
    p.add_argument("--parallelism", type=int, default=None)
    p.add_argument("--fixed-location", action="append", default=None,
                   metavar="FUNC[@FILE]",
                   help="skip retrieval; patch this location (repeatable)")
    p.set_defaults(fn=cmd_repair)

    p = sub.add_parser("validate", help="build and reproduce with a patch")
    p.add_argument("bundle")
    p.add_argument("--patch", required=True,
                   help="file containing edit blocks")
    p.add_argument("--tag", default="validate")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("evaluate", help="summarize repair results")
    p.add_argument("results", help="results.jsonl file or its directory")
    p.add_argument("--codebleu", action="store_true",
                   help="score final patches against developer patches")
    p.add_argument("--out", dest="out", default=None,
                   help="directory for report.txt / report.json")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("metrics", help="one-off metric computations")
    msub = p.add_subparsers(dest="metric", required=True)
    m = msub.add_parser("ochiai", help="rank lines from coverage files")
    m.add_argument("--coverage", required=True,
                   help="directory of per-run coverage files")
    m.add_argument("--top", type=int, default=0, help="limit output rows")
    m = msub.add_parser("codebleu", help="score one snippet against another")
    m.add_argument("candidate")
    m.add_argument("reference")
    m = msub.add_parser("point-biserial",
                        help="correlate scores with binary labels")
    m.add_argument("data", help='JSON file {"scores": [...], "labels": [...]}')
    p.set_defaults(fn=cmd_metrics)

    return parser


def _config_from_args(args) -> PipelineConfig:
    config = load_config(args.config)
    overrides = {
        "scratch_dir": getattr(args, "scratch_dir", None),
        "out_dir": getattr(args, "out_dir", None),
        "parallelism": getattr(args, "parallelism", None),
        "max_main_rounds": getattr(args, "rounds", None),
        "max_patch_retries": getattr(args, "retries", None),
        "model_id": getattr(args, "model", None),
        "fixed_locations": getattr(args, "fixed_location", None),
    }
    return apply_overrides(config, overrides)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return args.fn(args, config)
    except RoverError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
