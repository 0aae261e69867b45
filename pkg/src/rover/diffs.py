"""Unified-diff rendering and application.

Rendering serializes a validated candidate patch for archival; the
applier is just enough of `patch -p1` to replay single-file developer
patches (context hunks, exact or relocated matching, no fuzz within a
hunk).
"""

import difflib
import os
import re
from dataclasses import dataclass
from typing import List, Tuple

from .errors import RoverError


def render_unified(rel_path: str, before: str, after: str) -> str:
    diff = difflib.unified_diff(
        before.splitlines(keepends=True),
        after.splitlines(keepends=True),
        fromfile="a/" + rel_path,
        tofile="b/" + rel_path,
    )
    out = []
    for line in diff:
        out.append(line)
        if not line.endswith("\n"):
            # a final line without its newline; mark it the way diff(1) does
            out.append("\n\\ No newline at end of file\n")
    return "".join(out)


@dataclass
class _Hunk:
    start: int  # 1-based line in the pre-image
    before: List[str]
    after: List[str]


_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_FILE_RE = re.compile(r"^(?:---|\+\+\+)\s+(?:[ab]/)?(\S+)")


def parse_unified(diff_text: str) -> List[Tuple[str, List[_Hunk]]]:
    files: List[Tuple[str, List[_Hunk]]] = []
    cur_path = None
    hunks: List[_Hunk] = []
    hunk = None
    for line in diff_text.splitlines():
        if line.startswith("--- "):
            continue
        if line.startswith("+++ "):
            if cur_path is not None:
                files.append((cur_path, hunks))
            m = _FILE_RE.match(line)
            cur_path = m.group(1) if m else None
            hunks = []
            hunk = None
            continue
        m = _HUNK_RE.match(line)
        if m:
            hunk = _Hunk(int(m.group(1)), [], [])
            hunks.append(hunk)
            continue
        if hunk is None:
            continue
        if line.startswith(" "):
            hunk.before.append(line[1:])
            hunk.after.append(line[1:])
        elif line.startswith("-"):
            hunk.before.append(line[1:])
        elif line.startswith("+"):
            hunk.after.append(line[1:])
        elif line.startswith("\\"):
            pass  # "\ No newline at end of file"
        elif not line.strip():
            # some tools emit bare empty lines for empty context
            hunk.before.append("")
            hunk.after.append("")
    if cur_path is not None:
        files.append((cur_path, hunks))
    if not files:
        raise RoverError("no file sections in unified diff")
    return files


def _apply_hunks(text: str, hunks: List[_Hunk], path: str) -> str:
    lines = text.split("\n")
    offset = 0
    for hunk in hunks:
        want = hunk.before
        pos = hunk.start - 1 + offset
        window = lines[pos : pos + len(want)]
        if window != want:
            # relocated hunk: the pre-image must occur exactly once
            hits = [
                k
                for k in range(len(lines) - len(want) + 1)
                if lines[k : k + len(want)] == want
            ]
            if len(hits) != 1:
                raise RoverError(
                    f"{path}: hunk @@ -{hunk.start} does not apply "
                    f"({len(hits)} candidate positions)"
                )
            pos = hits[0]
        lines[pos : pos + len(want)] = hunk.after
        offset += len(hunk.after) - len(want)
    return "\n".join(lines)


def apply_unified(root: str, diff_text: str) -> List[str]:
    """Apply a unified diff to the tree at root. Returns the root-relative
    paths written; raises RoverError (tree untouched) when any hunk fails."""
    staged = {}
    for rel, hunks in parse_unified(diff_text):
        full = os.path.normpath(os.path.join(root, rel))
        if not os.path.isfile(full):
            raise RoverError(f"{rel}: no such file under {root}")
        with open(full, encoding="utf-8", errors="replace") as fh:
            staged[rel] = _apply_hunks(fh.read(), hunks, rel)
    for rel, text in staged.items():
        full = os.path.normpath(os.path.join(root, rel))
        with open(full, "w", encoding="utf-8") as fh:
            fh.write(text)
    return sorted(staged)


def changed_files(diff_text: str) -> List[str]:
    return [rel for rel, _ in parse_unified(diff_text)]
