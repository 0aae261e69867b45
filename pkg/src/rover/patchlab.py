"""Exploit-based patch validation.

A task bundle pins down one reproducible vulnerability: sources, the
crashing input, a build command, and a repro command. Candidate patches
are applied to a throwaway copy of the tree, built, and run against the
exploit; the outcome taxonomy is the usual one for security repair:

    NoPatch       nothing to evaluate
    CompileError  patched tree does not build (or build timed out)
    Implausible   builds, but the exploit still crashes (or repro hung)
    Plausible     builds and the exploit runs clean
"""

import json
import os
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from .edits import CandidatePatch, apply_edits
from .errors import BundleInvalid
from .report import Sanitizer, SanitizerReport, parse_report

DEFAULT_BUILD_TIMEOUT = 900
DEFAULT_REPRO_TIMEOUT = 120

TASK_FILE = "task.json"
REPORT_FILE = "report.txt"
EXPLOIT_FILE = "exploit.bin"
TRACE_FILE = "trace.txt"
SYMBOLS_FILE = "symbols.txt"
DEVELOPER_PATCH_FILE = "developer.patch"


@dataclass
class RepairTask:
    project_name: str
    bug_id: str
    src_root: str
    report_path: str
    exploit_path: str
    build_cmd: str
    repro_cmd: str
    build_timeout_secs: int = DEFAULT_BUILD_TIMEOUT
    repro_timeout_secs: int = DEFAULT_REPRO_TIMEOUT
    bundle_dir: Optional[str] = None
    year: Optional[int] = None  # disclosure year, for the evaluation tables

    def trace_path(self) -> Optional[str]:
        if self.bundle_dir:
            p = os.path.join(self.bundle_dir, TRACE_FILE)
            if os.path.isfile(p):
                return p
        return None

    def symbols_path(self) -> Optional[str]:
        if self.bundle_dir:
            p = os.path.join(self.bundle_dir, SYMBOLS_FILE)
            if os.path.isfile(p):
                return p
        return None


def load_task(bundle_dir: str) -> RepairTask:
    """Read and validate a task bundle directory.

    Layout: task.json, report.txt, exploit.bin, optional trace.txt /
    symbols.txt / developer.patch. Paths in task.json are relative to
    the bundle directory unless absolute.
    """
    bundle_dir = os.path.abspath(bundle_dir)
    task_path = os.path.join(bundle_dir, TASK_FILE)
    if not os.path.isfile(task_path):
        raise BundleInvalid(f"{bundle_dir}: missing {TASK_FILE}")
    try:
        with open(task_path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleInvalid(f"{task_path}: {exc}")

    def resolve(p, default=None):
        if not p:
            return default
        return p if os.path.isabs(p) else os.path.join(bundle_dir, p)

    task = RepairTask(
        project_name=data.get("project_name", os.path.basename(bundle_dir)),
        bug_id=data.get("bug_id", os.path.basename(bundle_dir)),
        src_root=resolve(data.get("src_root", "src")),
        report_path=resolve(data.get("report_path", REPORT_FILE)),
        exploit_path=resolve(data.get("exploit_path", EXPLOIT_FILE)),
        build_cmd=data.get("build_cmd", ""),
        repro_cmd=data.get("repro_cmd", ""),
        build_timeout_secs=int(
            data.get("build_timeout_secs", DEFAULT_BUILD_TIMEOUT)
        ),
        repro_timeout_secs=int(
            data.get("repro_timeout_secs", DEFAULT_REPRO_TIMEOUT)
        ),
        bundle_dir=bundle_dir,
        year=data.get("year"),
    )
    if not task.build_cmd.strip() or not task.repro_cmd.strip():
        raise BundleInvalid(f"{bundle_dir}: build_cmd/repro_cmd must be non-empty")
    for label, p in (
        ("src_root", task.src_root),
        ("report", task.report_path),
        ("exploit", task.exploit_path),
    ):
        if not p or not os.path.exists(p):
            raise BundleInvalid(f"{bundle_dir}: {label} path missing: {p}")
    return task


class PatchStatus(Enum):
    NO_PATCH = "NoPatch"
    COMPILE_ERROR = "CompileError"
    IMPLAUSIBLE = "Implausible"
    PLAUSIBLE = "Plausible"


@dataclass
class PatchOutcome:
    status: PatchStatus
    build_log_excerpt: str = ""
    crash_report: Optional[SanitizerReport] = None
    wall_time_secs: float = 0.0
    timed_out: bool = False  # which phase is named in build_log_excerpt


_EXCERPT_CHARS = 2000


def _tail(text: str, limit: int = _EXCERPT_CHARS) -> str:
    return text if len(text) <= limit else "..." + text[-limit:]


def _run(cmd: str, cwd: str, timeout: int, extra_env=None):
    env = os.environ.copy()
    if extra_env:
        env.update(extra_env)
    return subprocess.run(
        cmd,
        shell=True,
        cwd=cwd,
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        timeout=timeout,
    )


def _looks_like_crash(returncode: int, output: str) -> Optional[SanitizerReport]:
    """A repro run crashed when it died on a signal, or exited nonzero
    with a parseable sanitizer banner in its output."""
    if returncode == 0:
        return None
    banner = "ERROR:" in output and "Sanitizer" in output
    if returncode < 0 or banner:
        try:
            return parse_report(output)
        except Exception:
            if returncode < 0:
                return SanitizerReport(
                    sanitizer=Sanitizer.UNKNOWN,
                    bug_type=f"signal {-returncode}",
                    access=None,
                    frames=[],
                    raw_text=output,
                )
            return None
    return None


def fresh_workdir(task: RepairTask, scratch_dir: str, tag: str) -> str:
    """Copy the pristine sources into scratch_dir/<bug_id>/<tag>.

    The same tag maps to the same path, which is wiped first -- rerunning
    a validation is deterministic about where it works.
    """
    dest = os.path.join(scratch_dir, task.bug_id, tag)
    if os.path.exists(dest):
        shutil.rmtree(dest)
    shutil.copytree(task.src_root, dest)
    return dest


def validate(task: RepairTask, patch: Optional[CandidatePatch],
             scratch_dir: str, tag: str = "validate") -> PatchOutcome:
    """Apply, build, and run the exploit. Plausible means the exploit no
    longer crashes; nothing more. Apply failures propagate as
    SearchTextNotFound/AmbiguousMatch -- the caller decides what a
    non-applying patch means for its bookkeeping.
    """
    started = time.monotonic()
    if patch is None or not patch.edits:
        return PatchOutcome(PatchStatus.NO_PATCH)

    workdir = fresh_workdir(task, scratch_dir, tag)
    apply_edits(workdir, patch)

    try:
        build = _run(task.build_cmd, workdir, task.build_timeout_secs)
    except subprocess.TimeoutExpired:
        return PatchOutcome(
            PatchStatus.COMPILE_ERROR,
            build_log_excerpt=f"[build timed out after {task.build_timeout_secs}s]",
            wall_time_secs=time.monotonic() - started,
            timed_out=True,
        )
    build_out = (build.stdout or b"").decode("utf-8", errors="replace")
    if build.returncode != 0:
        return PatchOutcome(
            PatchStatus.COMPILE_ERROR,
            build_log_excerpt=_tail(build_out),
            wall_time_secs=time.monotonic() - started,
        )

    repro_cmd = task.repro_cmd
    if "{exploit}" in repro_cmd:
        repro_cmd = repro_cmd.replace("{exploit}", task.exploit_path)
    else:
        repro_cmd = f"{repro_cmd} {task.exploit_path}"
    try:
        repro = _run(repro_cmd, workdir, task.repro_timeout_secs)
    except subprocess.TimeoutExpired:
        return PatchOutcome(
            PatchStatus.IMPLAUSIBLE,
            build_log_excerpt=f"[repro timed out after {task.repro_timeout_secs}s]",
            wall_time_secs=time.monotonic() - started,
            timed_out=True,
        )
    repro_out = (repro.stdout or b"").decode("utf-8", errors="replace")
    crash = _looks_like_crash(repro.returncode, repro_out)
    if crash is not None:
        return PatchOutcome(
            PatchStatus.IMPLAUSIBLE,
            build_log_excerpt=_tail(build_out),
            crash_report=crash,
            wall_time_secs=time.monotonic() - started,
        )
    return PatchOutcome(
        PatchStatus.PLAUSIBLE,
        build_log_excerpt=_tail(build_out),
        wall_time_secs=time.monotonic() - started,
    )


def select_final(outcomes: List[PatchOutcome]) -> Optional[PatchOutcome]:
    """Final-answer rule over a validation sequence: the first Plausible
    outcome, else the first Implausible, else the first CompileError,
    else None."""
    for wanted in (PatchStatus.PLAUSIBLE, PatchStatus.IMPLAUSIBLE,
                   PatchStatus.COMPILE_ERROR):
        for outcome in outcomes:
            if outcome.status == wanted:
                return outcome
    return None
