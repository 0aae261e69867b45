"""Checks for the vulnerability fixture corpus.

The corpus invariants are empirical, so most of what matters here needs
a C toolchain: every bundle must build quickly, crash on its exploit
with the advertised bug type, and stop crashing under its developer
patch.  Those tests skip cleanly on machines without gcc; the layout
and replay-script checks run everywhere.

The pipeline is exercised the way an operator would use it: through the
command line entry point and the bundle file formats, never by reaching
into its internals.
"""

import importlib.util
import json
import pathlib
import re
import shutil
import subprocess
import time

import pytest

from rover.cli import main

FIXTURES = pathlib.Path(__file__).resolve().parent.parent
SCRIPTS = FIXTURES.parent / "scripts"

BUNDLES = sorted(
    p for p in FIXTURES.iterdir() if (p / "task.json").is_file()
)

needs_gcc = pytest.mark.skipif(
    shutil.which("gcc") is None, reason="needs a C toolchain"
)


def bundle_param():
    return pytest.mark.parametrize(
        "bundle", BUNDLES, ids=[p.name for p in BUNDLES]
    )


def load_task_doc(bundle: pathlib.Path) -> dict:
    return json.loads((bundle / "task.json").read_text())


def load_regen_module():
    spec = importlib.util.spec_from_file_location(
        "regen_fixtures", SCRIPTS / "regen_fixtures.py"
    )
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def copy_bundle(bundle: pathlib.Path, tmp_path: pathlib.Path) -> pathlib.Path:
    dest = tmp_path / bundle.name
    shutil.copytree(bundle, dest)
    return dest


def run_shell(cmd: str, cwd: pathlib.Path, env=None) -> subprocess.CompletedProcess:
    import os

    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        cmd, shell=True, cwd=cwd, env=full_env, timeout=60,
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
    )


def repro_cmd(task: dict, exploit: pathlib.Path) -> str:
    cmd = task["repro_cmd"]
    if "{exploit}" in cmd:
        return cmd.replace("{exploit}", str(exploit))
    return cmd + " " + str(exploit)


# ------------------------------------------------------------- layout


def test_corpus_has_enough_bundles():
    assert len(BUNDLES) >= 5


@bundle_param()
def test_bundle_layout(bundle):
    for name in ("task.json", "report.txt", "exploit.bin",
                 "developer.patch", "replay.json"):
        assert (bundle / name).is_file(), name
    assert (bundle / "exploit.bin").stat().st_size > 0
    task = load_task_doc(bundle)
    for key in ("project_name", "bug_id", "src_root", "build_cmd",
                "repro_cmd", "expected_bug_type", "expected_cwe"):
        assert key in task, key
    assert (bundle / task["src_root"]).is_dir()


def test_bug_types_cover_the_big_five():
    types = {load_task_doc(b)["expected_bug_type"] for b in BUNDLES}
    assert {"heap-buffer-overflow", "stack-buffer-overflow",
            "heap-use-after-free"} <= types
    assert any("double-free" in t for t in types)
    assert "SEGV" in types
    cwes = {load_task_doc(b)["expected_cwe"] for b in BUNDLES}
    assert {"CWE-121", "CWE-122", "CWE-415", "CWE-416", "CWE-476"} <= cwes


@bundle_param()
def test_report_is_real_sanitizer_output(bundle):
    task = load_task_doc(bundle)
    text = (bundle / "report.txt").read_text(errors="replace")
    assert re.search(r"==\d+==ERROR: \w+Sanitizer", text)
    assert task["expected_bug_type"] in text
    assert task["expected_crash_function"] in text


@bundle_param()
def test_replay_script_is_a_locate_then_fix_recording(bundle):
    entries = json.loads((bundle / "replay.json").read_text())
    assert isinstance(entries, list) and len(entries) >= 2
    task = load_task_doc(bundle)
    assert "LOCATION: %s@" % task["fix_function"] in entries[0]["content"]
    assert "### EDIT" in entries[-1]["content"]
    assert "<<<<<<< SEARCH" in entries[-1]["content"]


@bundle_param()
def test_developer_patch_is_a_unified_diff(bundle):
    text = (bundle / "developer.patch").read_text()
    assert text.startswith("--- a/")
    assert "\n+++ b/" in text
    assert "\n@@ " in text


# --------------------------------------------------- trace enrichment


def extras_section(out: str) -> str:
    marker = "Other functions executed by the bug-triggering input"
    assert marker in out
    return out.split(marker, 1)[1]


def test_trace_surfaces_off_stack_fix_function(capsys):
    bundle = FIXTURES / "contact_parser"
    assert (bundle / "trace.txt").is_file()
    assert (bundle / "symbols.txt").is_file()
    assert main(["enrich", str(bundle)]) == 0
    extras = extras_section(capsys.readouterr().out)
    # The fix lives in skip_name, which is NOT on the crash stack; the
    # trace is what brings it in, and recency puts it first.
    assert extras.splitlines()[1].startswith("1. skip_name")
    for stack_fn in ("parse_quoted_param", "parse_params",
                     "parse_contacts", "main"):
        assert stack_fn not in extras


# ------------------------------------------------- toolchain-backed


@needs_gcc
@bundle_param()
def test_unpatched_bundle_crashes_as_advertised(bundle, tmp_path):
    task = load_task_doc(bundle)
    src = tmp_path / "src"
    shutil.copytree(bundle / task["src_root"], src)

    started = time.monotonic()
    built = run_shell(task["build_cmd"], cwd=src)
    build_secs = time.monotonic() - started
    assert built.returncode == 0, built.stdout.decode(errors="replace")
    assert build_secs < 30

    ran = run_shell(repro_cmd(task, bundle / "exploit.bin"), cwd=src)
    out = ran.stdout.decode(errors="replace")
    assert ran.returncode != 0
    assert task["expected_bug_type"] in out


@needs_gcc
@bundle_param()
def test_developer_patch_stops_the_crash(bundle, tmp_path):
    task = load_task_doc(bundle)
    src = tmp_path / "src"
    shutil.copytree(bundle / task["src_root"], src)
    applied = subprocess.run(
        ["git", "apply", str(bundle / "developer.patch")],
        cwd=src, capture_output=True,
    )
    assert applied.returncode == 0, applied.stderr.decode(errors="replace")

    built = run_shell(task["build_cmd"], cwd=src)
    assert built.returncode == 0, built.stdout.decode(errors="replace")
    ran = run_shell(repro_cmd(task, bundle / "exploit.bin"), cwd=src)
    assert ran.returncode == 0, ran.stdout.decode(errors="replace")


@needs_gcc
def test_replayed_repair_fixes_every_bundle(tmp_path):
    replay_dir = tmp_path / "recordings"
    replay_dir.mkdir()
    for bundle in BUNDLES:
        bug_id = load_task_doc(bundle)["bug_id"]
        shutil.copy(bundle / "replay.json", replay_dir / (bug_id + ".json"))

    out_dir = tmp_path / "out"
    rc = main(
        ["--out", str(out_dir), "--scratch", str(tmp_path / "scratch"),
         "repair"] + [str(b) for b in BUNDLES]
        + ["--backend", "replay:" + str(replay_dir)]
    )
    assert rc == 0

    lines = (out_dir / "results.jsonl").read_text().splitlines()
    records = {r["bug_id"]: r for r in map(json.loads, lines)}
    assert len(records) == len(BUNDLES)
    for bundle in BUNDLES:
        task = load_task_doc(bundle)
        rec = records[task["bug_id"]]
        assert rec["status"] == "Plausible", rec
        assert rec["cwe"] == task["expected_cwe"]
        assert rec["generation_calls"] >= 1
        assert pathlib.Path(rec["final_patch_path"]).is_file()

    # The replayed edits ARE the developer fixes, so similarity scoring
    # must pair every bundle and come out at exactly 1.0.
    report_dir = tmp_path / "report"
    rc = main(["evaluate", str(out_dir), "--codebleu",
               "--out", str(report_dir)])
    assert rc == 0
    doc = json.loads((report_dir / "report.json").read_text())
    assert doc["codebleu"]["n"] == len(BUNDLES)
    assert doc["codebleu"]["mean"] == 1.0


@needs_gcc
def test_reports_regenerate_to_the_same_bug_type(tmp_path):
    regen = load_regen_module()
    bundle = copy_bundle(FIXTURES / "use_after_free", tmp_path)
    (bundle / "report.txt").unlink()
    regen.regen_report(str(bundle))
    text = (bundle / "report.txt").read_text(errors="replace")
    assert "heap-use-after-free" in text
    assert re.search(r"==\d+==ERROR: AddressSanitizer", text)


@needs_gcc
def test_trace_regenerates_and_still_finds_skip_name(tmp_path, capsys):
    regen = load_regen_module()
    bundle = copy_bundle(FIXTURES / "contact_parser", tmp_path)
    (bundle / "trace.txt").unlink()
    (bundle / "symbols.txt").unlink()
    regen.regen_trace(str(bundle))
    assert main(["enrich", str(bundle)]) == 0
    extras = extras_section(capsys.readouterr().out)
    assert extras.splitlines()[1].startswith("1. skip_name")
