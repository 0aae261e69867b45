import itertools
import json
import pathlib

import pytest

from rover.edits import CandidatePatch, parse_edit_blocks
from rover.errors import BundleInvalid, SearchTextNotFound
from rover.patchlab import (
    PatchOutcome,
    PatchStatus,
    fresh_workdir,
    load_task,
    select_final,
    validate,
)
from tests.conftest import (
    STUB_BROKEN_RESPONSE,
    STUB_FIX_RESPONSE,
    STUB_USELESS_RESPONSE,
    make_bundle,
)


def patch_from(text):
    return CandidatePatch(parse_edit_blocks(text), raw_response=text)


def test_load_task_resolves_paths(bundle_dir):
    task = load_task(bundle_dir)
    assert task.bug_id == "demo-001"
    assert task.project_name == "demo"
    assert pathlib.Path(task.src_root).is_dir()
    assert pathlib.Path(task.report_path).is_file()
    assert pathlib.Path(task.exploit_path).is_file()
    assert task.year == 2024
    assert task.trace_path() is None


def test_load_task_missing_manifest(tmp_path):
    with pytest.raises(BundleInvalid):
        load_task(str(tmp_path))


def test_load_task_rejects_empty_cmds(tmp_path):
    bundle = make_bundle(tmp_path)
    manifest = json.loads((pathlib.Path(bundle) / "task.json").read_text())
    manifest["build_cmd"] = "  "
    (pathlib.Path(bundle) / "task.json").write_text(json.dumps(manifest))
    with pytest.raises(BundleInvalid):
        load_task(bundle)


def test_load_task_missing_exploit(tmp_path):
    bundle = make_bundle(tmp_path)
    (pathlib.Path(bundle) / "exploit.bin").unlink()
    with pytest.raises(BundleInvalid):
        load_task(bundle)


def test_fresh_workdir_is_wiped(bundle_dir, tmp_path):
    task = load_task(bundle_dir)
    scratch = str(tmp_path / "scratch")
    work = fresh_workdir(task, scratch, "t1")
    marker = pathlib.Path(work) / "leftover.txt"
    marker.write_text("stale")
    work2 = fresh_workdir(task, scratch, "t1")
    assert work2 == work
    assert not marker.exists()


def test_validate_none_patch_is_no_patch(bundle_dir, tmp_path):
    task = load_task(bundle_dir)
    outcome = validate(task, None, str(tmp_path / "s"))
    assert outcome.status is PatchStatus.NO_PATCH


def test_validate_plausible(bundle_dir, tmp_path):
    task = load_task(bundle_dir)
    outcome = validate(task, patch_from(STUB_FIX_RESPONSE), str(tmp_path / "s"))
    assert outcome.status is PatchStatus.PLAUSIBLE
    assert outcome.crash_report is None
    assert not outcome.timed_out


def test_validate_compile_error(bundle_dir, tmp_path):
    task = load_task(bundle_dir)
    outcome = validate(
        task, patch_from(STUB_BROKEN_RESPONSE), str(tmp_path / "s")
    )
    assert outcome.status is PatchStatus.COMPILE_ERROR
    assert "error" in outcome.build_log_excerpt


def test_validate_implausible_carries_crash_report(bundle_dir, tmp_path):
    task = load_task(bundle_dir)
    outcome = validate(
        task, patch_from(STUB_USELESS_RESPONSE), str(tmp_path / "s")
    )
    assert outcome.status is PatchStatus.IMPLAUSIBLE
    assert outcome.crash_report is not None
    assert outcome.crash_report.bug_type == "global-buffer-overflow"


def test_validate_apply_failure_propagates(bundle_dir, tmp_path):
    task = load_task(bundle_dir)
    patch = patch_from(
        "### EDIT app.c\n<<<<<<< SEARCH\nnot in the file\n=======\nx\n"
        ">>>>>>> REPLACE\n"
    )
    with pytest.raises(SearchTextNotFound):
        validate(task, patch, str(tmp_path / "s"))


def test_validate_pristine_sources_untouched(bundle_dir, tmp_path):
    task = load_task(bundle_dir)
    before = pathlib.Path(task.src_root, "app.c").read_text()
    validate(task, patch_from(STUB_FIX_RESPONSE), str(tmp_path / "s"))
    assert pathlib.Path(task.src_root, "app.c").read_text() == before


def test_validate_repro_timeout_is_implausible(tmp_path):
    bundle = make_bundle(tmp_path)
    src = pathlib.Path(bundle) / "src"
    (src / "repro.sh").write_text("#!/bin/sh\nsleep 30\n")
    manifest = json.loads((pathlib.Path(bundle) / "task.json").read_text())
    manifest["repro_timeout_secs"] = 1
    (pathlib.Path(bundle) / "task.json").write_text(json.dumps(manifest))
    task = load_task(bundle)
    outcome = validate(task, patch_from(STUB_FIX_RESPONSE), str(tmp_path / "s"))
    assert outcome.status is PatchStatus.IMPLAUSIBLE
    assert outcome.timed_out


def test_validate_signal_counts_as_crash(tmp_path):
    bundle = make_bundle(tmp_path)
    src = pathlib.Path(bundle) / "src"
    (src / "repro.sh").write_text("#!/bin/sh\nkill -SEGV $$\n")
    # exec so the signal kills the process validate() itself waits on,
    # rather than an inner shell whose parent would report exit 139
    manifest = json.loads((pathlib.Path(bundle) / "task.json").read_text())
    manifest["repro_cmd"] = "exec sh repro.sh {exploit}"
    (pathlib.Path(bundle) / "task.json").write_text(json.dumps(manifest))
    task = load_task(bundle)
    outcome = validate(task, patch_from(STUB_FIX_RESPONSE), str(tmp_path / "s"))
    assert outcome.status is PatchStatus.IMPLAUSIBLE
    assert outcome.crash_report is not None
    assert "signal" in outcome.crash_report.bug_type


# --- select_final against a brute-force oracle ---


def _oracle(statuses):
    for wanted in (PatchStatus.PLAUSIBLE, PatchStatus.IMPLAUSIBLE,
                   PatchStatus.COMPILE_ERROR):
        for i, s in enumerate(statuses):
            if s is wanted:
                return i
    return None


def test_select_final_exhaustive():
    pool = [PatchStatus.PLAUSIBLE, PatchStatus.IMPLAUSIBLE,
            PatchStatus.COMPILE_ERROR]
    checked = 0
    for length in range(0, 5):
        for combo in itertools.product(pool, repeat=length):
            outcomes = [PatchOutcome(s) for s in combo]
            got = select_final(outcomes)
            want = _oracle(list(combo))
            if want is None:
                assert got is None
            else:
                assert got is outcomes[want]
            checked += 1
    assert checked == 1 + 3 + 9 + 27 + 81


def test_select_final_ignores_no_patch():
    outcomes = [PatchOutcome(PatchStatus.NO_PATCH),
                PatchOutcome(PatchStatus.COMPILE_ERROR)]
    assert select_final(outcomes) is outcomes[1]
    assert select_final([PatchOutcome(PatchStatus.NO_PATCH)]) is None
