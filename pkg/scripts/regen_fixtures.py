"""Regenerate the derived files in the fixture corpus.

Every bundle's report.txt is the captured output of actually building
the vulnerable program and running it on its exploit; nothing in there
is written by hand, so after any source or toolchain change this script
is the way to bring the corpus back in sync:

    python3 scripts/regen_fixtures.py            # all bundles
    python3 scripts/regen_fixtures.py --only kvlite-001

Bundles whose src/ contains a trace_build.sh additionally get trace.txt
(function entry/exit events from the hook runtime in fixtures/hookrt/)
and symbols.txt (an address-to-name map distilled from nm + addr2line).
Builds run in a scratch copy of src/ so the checked-in tree never
accumulates objects or binaries.
"""

import argparse
import json
import os
import re
import shutil
import subprocess
import sys
import tempfile

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                            os.pardir, "fixtures")
HOOKRT_SRC = os.path.join(FIXTURES_DIR, "hookrt", "hook.c")

# Binary produced by each traced bundle's trace_build.sh, for nm.
TRACED_BINARIES = {"sipmini-001": "sipmini"}

_NM_LINE = re.compile(r"^([0-9a-fA-F]+)\s+[Tt]\s+(\S+)$")


def _sh(cmd, cwd, env=None, timeout=120):
    """Run a shell command, merging stderr into stdout (sanitizer
    reports go to stderr; the checked-in report keeps both streams in
    arrival order, the way a fuzzing harness log would)."""
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        cmd, shell=True, cwd=cwd, env=full_env, timeout=timeout,
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
    )


def _load_task(bundle_dir):
    with open(os.path.join(bundle_dir, "task.json"), encoding="utf-8") as fh:
        return json.load(fh)


def _scratch_src(bundle_dir, workdir):
    scratch = os.path.join(workdir, "src")
    shutil.copytree(os.path.join(bundle_dir, "src"), scratch)
    return scratch


def _repro_cmd(task, exploit_path):
    cmd = task["repro_cmd"]
    if "{exploit}" in cmd:
        return cmd.replace("{exploit}", exploit_path)
    return cmd + " " + exploit_path


def regen_report(bundle_dir):
    """Build the bundle in a scratch dir, crash it on its exploit, and
    write the verbatim output to report.txt."""
    task = _load_task(bundle_dir)
    exploit = os.path.join(bundle_dir, "exploit.bin")
    with tempfile.TemporaryDirectory() as workdir:
        scratch = _scratch_src(bundle_dir, workdir)
        built = _sh(task["build_cmd"], cwd=scratch,
                    timeout=task.get("build_timeout_secs", 120))
        if built.returncode != 0:
            raise RuntimeError(
                "%s: build failed\n%s" % (task["bug_id"],
                                          built.stdout.decode(errors="replace")))
        ran = _sh(_repro_cmd(task, exploit), cwd=scratch,
                  timeout=task.get("repro_timeout_secs", 60))
        if ran.returncode == 0:
            raise RuntimeError("%s: exploit did not crash" % task["bug_id"])
    out = os.path.join(bundle_dir, "report.txt")
    with open(out, "wb") as fh:
        fh.write(ran.stdout)
    return out


def _symbol_lines(binary_path, scratch_src):
    """nm + addr2line, filtered to functions defined in the bundle's own
    sources and rewritten relative to src/.  Addresses are printed the
    way the hook runtime prints them (0x-prefixed, no zero padding) so
    the trace and the table agree byte for byte."""
    nm = subprocess.run(["nm", "--defined-only", binary_path],
                        stdout=subprocess.PIPE, check=True, text=True)
    syms = []
    for line in nm.stdout.splitlines():
        m = _NM_LINE.match(line.strip())
        if m:
            syms.append((int(m.group(1), 16), m.group(2)))
    if not syms:
        return []
    locate = subprocess.run(
        ["addr2line", "-e", binary_path] + ["0x%x" % a for a, _ in syms],
        stdout=subprocess.PIPE, check=True, text=True)
    rows = []
    for (addr, name), loc in zip(syms, locate.stdout.splitlines()):
        path, _, lineno = loc.partition(":")
        lineno = lineno.split()[0] if lineno else ""
        if not path.startswith(scratch_src + os.sep):
            continue  # runtime scaffolding: _start, the hooks, and friends
        rel = os.path.relpath(path, scratch_src)
        rows.append("0x%x %s %s:%s" % (addr, name, rel, lineno))
    return rows


def regen_trace(bundle_dir):
    """Rebuild with function hooks, crash on the exploit, and write the
    captured trace.txt plus a matching symbols.txt."""
    task = _load_task(bundle_dir)
    binary = TRACED_BINARIES[task["bug_id"]]
    exploit = os.path.join(bundle_dir, "exploit.bin")
    with tempfile.TemporaryDirectory() as workdir:
        scratch = _scratch_src(bundle_dir, workdir)
        built = _sh("sh trace_build.sh", cwd=scratch,
                    env={"HOOKRT_SRC": HOOKRT_SRC},
                    timeout=task.get("build_timeout_secs", 120))
        if built.returncode != 0:
            raise RuntimeError(
                "%s: instrumented build failed\n%s"
                % (task["bug_id"], built.stdout.decode(errors="replace")))
        trace_out = os.path.join(workdir, "trace.out")
        ran = _sh(_repro_cmd(task, exploit), cwd=scratch,
                  env={"HOOKRT_OUT": trace_out},
                  timeout=task.get("repro_timeout_secs", 60))
        if ran.returncode == 0:
            raise RuntimeError(
                "%s: instrumented exploit did not crash" % task["bug_id"])
        with open(trace_out, "r", encoding="ascii") as fh:
            trace_text = fh.read()
        sym_rows = _symbol_lines(os.path.join(scratch, binary), scratch)
    with open(os.path.join(bundle_dir, "trace.txt"), "w",
              encoding="ascii") as fh:
        fh.write(trace_text)
    with open(os.path.join(bundle_dir, "symbols.txt"), "w",
              encoding="ascii") as fh:
        fh.write("\n".join(sym_rows) + "\n")
    return os.path.join(bundle_dir, "trace.txt")


def bundle_dirs(root=None):
    root = root or FIXTURES_DIR
    out = []
    for name in sorted(os.listdir(root)):
        path = os.path.join(root, name)
        if os.path.isfile(os.path.join(path, "task.json")):
            out.append(path)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", metavar="BUG_ID",
                    help="regenerate a single bundle")
    args = ap.parse_args(argv)
    count = 0
    for bundle in bundle_dirs():
        task = _load_task(bundle)
        if args.only and task["bug_id"] != args.only:
            continue
        print("regenerating %s" % task["bug_id"])
        regen_report(bundle)
        if os.path.isfile(os.path.join(bundle, "src", "trace_build.sh")):
            regen_trace(bundle)
        count += 1
    if count == 0:
        print("no bundle matched", file=sys.stderr)
        return 1
    print("%d bundle(s) regenerated" % count)
    return 0


if __name__ == "__main__":
    sys.exit(main())
