import json
import os
import pathlib
import stat
import time

import pytest

DATA = pathlib.Path(__file__).parent / "data"

# Populated by the acceptance tests; rendered once at the end of the
# session so every headline check gets a visible PASS/FAIL line.
ACCEPTANCE_LINES = []

_SESSION_T0 = None
_SUITE_TIME_LIMIT_SECS = 300.0


def pytest_sessionstart(session):
    global _SESSION_T0
    _SESSION_T0 = time.monotonic()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    lines = list(ACCEPTANCE_LINES)
    if _SESSION_T0 is not None:
        elapsed = time.monotonic() - _SESSION_T0
        verdict = "PASS" if elapsed < _SUITE_TIME_LIMIT_SECS else "FAIL"
        lines.append(
            f"{verdict}  suite-runtime: {elapsed:.1f} s offline "
            f"(limit {_SUITE_TIME_LIMIT_SECS:.0f} s)"
        )
    terminalreporter.write_sep("=", "acceptance gate")
    for line in lines:
        terminalreporter.write_line(line)

STUB_REPORT = """==77==ERROR: AddressSanitizer: global-buffer-overflow on address 0x000000a01234 at pc 0x0000004011b2 bp 0x7ffc10 sp 0x7ffc08
WRITE of size 1 at 0x000000a01234 thread T0
    #0 0x4011b2 in copy_input app.c:13:14
    #1 0x401290 in process app.c:22:9
    #2 0x4012f1 in main driver.c:9:10

SUMMARY: AddressSanitizer: global-buffer-overflow app.c:13:14 in copy_input
"""

STUB_APP_C = """\
#include <string.h>

#include "app.h"

static char scratch[64];

int copy_input(const char* data, int len)
{
	int i;

	for (i = 0; i <= len; i++) {
		scratch[i] = data[i];
	}

	return len;
}

int process(const char* data, int len)
{
	if (len > 64) {
		len = 64;
	}

	return copy_input(data, len);
}
"""

STUB_APP_H = """\
#ifndef app_h
#define app_h

int copy_input(const char* data, int len);
int process(const char* data, int len);

#endif
"""

# Stand-in build: no compiler needed. It fails when a patch introduced
# the poison token, which lets tests force the CompileError path.
STUB_BUILD_SH = """\
#!/bin/sh
if grep -q 'SYNTAX_ERROR' app.c; then
	echo 'app.c:12:1: error: expected expression' >&2
	exit 1
fi
echo 'build ok'
exit 0
"""

# Stand-in reproducer: "crashes" with a sanitizer report while the
# off-by-one loop bound survives in app.c.
STUB_REPRO_SH = """\
#!/bin/sh
test -f "$1" || exit 2
if grep -q 'i <= len' app.c; then
	cat <<'REPORT'
{report}REPORT
	exit 1
fi
exit 0
"""

# The developer's fix, as the agent would have to produce it.
STUB_FIX_RESPONSE = """\
The copy loop writes one byte past the requested length because the
bound uses <=. Make the bound strict.

### EDIT app.c
<<<<<<< SEARCH
	for (i = 0; i <= len; i++) {
=======
	for (i = 0; i < len; i++) {
>>>>>>> REPLACE
"""

# A patch that applies but trips the stand-in compiler.
STUB_BROKEN_RESPONSE = """\
Clamp harder.

### EDIT app.c
<<<<<<< SEARCH
	if (len > 64) {
=======
	if (len > 63) { SYNTAX_ERROR
>>>>>>> REPLACE
"""

# A patch that applies and compiles but does not remove the crash.
STUB_USELESS_RESPONSE = """\
Tighten the clamp; the loop is fine.

### EDIT app.c
<<<<<<< SEARCH
	if (len > 64) {
		len = 64;
	}
=======
	if (len > 63) {
		len = 63;
	}
>>>>>>> REPLACE
"""


def make_bundle(root: pathlib.Path, bug_id: str = "demo-001") -> str:
    """Write a self-contained task bundle whose build/repro steps are
    plain shell, so validation runs without a compiler."""
    bundle = root / bug_id
    src = bundle / "src"
    src.mkdir(parents=True)
    (src / "app.c").write_text(STUB_APP_C)
    (src / "app.h").write_text(STUB_APP_H)
    (src / "build.sh").write_text(STUB_BUILD_SH)
    (src / "repro.sh").write_text(STUB_REPRO_SH.format(report=STUB_REPORT))
    for script in ("build.sh", "repro.sh"):
        p = src / script
        p.chmod(p.stat().st_mode | stat.S_IXUSR)
    (bundle / "report.txt").write_text(STUB_REPORT)
    (bundle / "exploit.bin").write_bytes(b"A" * 200)
    (bundle / "developer.patch").write_text(
        "--- a/app.c\n"
        "+++ b/app.c\n"
        "@@ -10,7 +10,7 @@\n"
        " {\n"
        " \tint i;\n"
        " \n"
        "-\tfor (i = 0; i <= len; i++) {\n"
        "+\tfor (i = 0; i < len; i++) {\n"
        " \t\tscratch[i] = data[i];\n"
        " \t}\n"
        " \n"
    )
    (bundle / "task.json").write_text(json.dumps({
        "project_name": "demo",
        "bug_id": bug_id,
        "src_root": "src",
        "build_cmd": "sh build.sh",
        "repro_cmd": "sh repro.sh {exploit}",
        "build_timeout_secs": 60,
        "repro_timeout_secs": 30,
        "year": 2024,
    }, indent=2))
    return str(bundle)


@pytest.fixture
def bundle_dir(tmp_path):
    return make_bundle(tmp_path)


@pytest.fixture
def kamailio_root():
    return str(DATA / "kamailio")


@pytest.fixture
def kamailio_report_text():
    return (DATA / "kamailio_report.txt").read_text()


def make_tree(root: pathlib.Path, files: dict) -> str:
    """Materialize {relative-path: content} under root."""
    for rel, content in files.items():
        p = root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(content)
    return str(root)
