"""Search/replace edit blocks: the patch exchange format.

A patch is one or more fenced blocks:

    ### EDIT <relative-file-path>
    <<<<<<< SEARCH
    ...verbatim original lines...
    =======
    ...replacement lines...
    >>>>>>> REPLACE

Application is all-or-nothing per patch: every block must match its
file exactly once (exact substring first, whitespace-normalized line
matching as the fallback) or nothing is written at all.
"""

import os
from dataclasses import dataclass, field
from typing import Dict, List

from .errors import AmbiguousMatch, SearchTextNotFound, UnparsablePatch

EDIT_MARKER = "### EDIT "
SEARCH_MARKER = "<<<<<<< SEARCH"
DIVIDER_MARKER = "======="
REPLACE_MARKER = ">>>>>>> REPLACE"


@dataclass
class Edit:
    file: str
    search_text: str
    replace_text: str


@dataclass
class CandidatePatch:
    edits: List[Edit]
    raw_response: str = ""
    notes: str = ""  # model's reasoning, kept for the transcript

    def touched_files(self) -> List[str]:
        seen = []
        for e in self.edits:
            if e.file not in seen:
                seen.append(e.file)
        return seen


def parse_edit_blocks(text: str) -> List[Edit]:
    """Extract edit blocks from model output.

    Raises UnparsablePatch when no block parses or a started block is
    malformed (missing markers, divider out of order).
    """
    lines = text.splitlines()
    edits: List[Edit] = []
    i = 0
    saw_marker = False
    while i < len(lines):
        line = lines[i].rstrip()
        if not line.startswith(EDIT_MARKER.rstrip() + " ") and line != EDIT_MARKER.rstrip():
            if line == SEARCH_MARKER:
                raise UnparsablePatch("SEARCH block without an EDIT header")
            i += 1
            continue
        saw_marker = True
        file = line[len(EDIT_MARKER.rstrip()):].strip()
        if not file:
            raise UnparsablePatch("EDIT header without a file path")
        i += 1
        if i >= len(lines) or lines[i].rstrip() != SEARCH_MARKER:
            raise UnparsablePatch(f"missing {SEARCH_MARKER!r} after EDIT header")
        i += 1
        search_lines: List[str] = []
        while i < len(lines) and lines[i].rstrip() != DIVIDER_MARKER:
            if lines[i].rstrip() == REPLACE_MARKER:
                raise UnparsablePatch("REPLACE marker before the ======= divider")
            search_lines.append(lines[i])
            i += 1
        if i >= len(lines):
            raise UnparsablePatch("unterminated SEARCH section")
        i += 1
        replace_lines: List[str] = []
        while i < len(lines) and lines[i].rstrip() != REPLACE_MARKER:
            replace_lines.append(lines[i])
            i += 1
        if i >= len(lines):
            raise UnparsablePatch("unterminated replacement section")
        i += 1
        edits.append(
            Edit(file, "\n".join(search_lines), "\n".join(replace_lines))
        )
    if not edits:
        raise UnparsablePatch(
            "no edit block found" if not saw_marker else "empty edit block"
        )
    return edits


def render_edits(edits: List[Edit]) -> str:
    out = []
    for e in edits:
        out.append(EDIT_MARKER + e.file)
        out.append(SEARCH_MARKER)
        if e.search_text:
            out.append(e.search_text)
        out.append(DIVIDER_MARKER)
        if e.replace_text:
            out.append(e.replace_text)
        out.append(REPLACE_MARKER)
    return "\n".join(out) + "\n"


def _normalize(line: str) -> str:
    return " ".join(line.split())


def _apply_one(text: str, edit: Edit) -> str:
    search = edit.search_text
    if not search.strip():
        raise SearchTextNotFound(f"{edit.file}: empty search text")
    count = text.count(search)
    if count == 1:
        return text.replace(search, edit.replace_text, 1)
    if count > 1:
        raise AmbiguousMatch(
            f"{edit.file}: search text matches {count} locations"
        )
    # whitespace-normalized fallback, line by line
    file_lines = text.split("\n")
    target = [_normalize(l) for l in search.split("\n")]
    while target and not target[0]:
        target.pop(0)
    while target and not target[-1]:
        target.pop()
    if not target:
        raise SearchTextNotFound(f"{edit.file}: empty search text")
    hits = []
    for k in range(len(file_lines) - len(target) + 1):
        if all(
            _normalize(file_lines[k + m]) == target[m]
            for m in range(len(target))
        ):
            hits.append(k)
    if not hits:
        raise SearchTextNotFound(
            f"{edit.file}: search text not found (even whitespace-normalized)"
        )
    if len(hits) > 1:
        raise AmbiguousMatch(
            f"{edit.file}: search text matches {len(hits)} locations "
            "after whitespace normalization"
        )
    k = hits[0]
    new_lines = (
        file_lines[:k]
        + edit.replace_text.split("\n")
        + file_lines[k + len(target):]
    )
    return "\n".join(new_lines)


def apply_edits(workdir: str, patch: CandidatePatch) -> List[str]:
    """Apply every edit of the patch under workdir, atomically.

    All edits are staged in memory first; the tree is only written when
    every block matched exactly once. Returns the files written.

    Raises SearchTextNotFound / AmbiguousMatch, leaving the tree
    untouched.
    """
    staged: Dict[str, str] = {}
    for edit in patch.edits:
        rel = edit.file.replace("\\", "/").lstrip("/")
        full = os.path.normpath(os.path.join(workdir, rel))
        if not full.startswith(os.path.normpath(workdir) + os.sep):
            raise SearchTextNotFound(
                f"{edit.file}: path escapes the working copy"
            )
        if full not in staged:
            if not os.path.isfile(full):
                raise SearchTextNotFound(f"{edit.file}: no such file")
            with open(full, encoding="utf-8", errors="replace") as fh:
                staged[full] = fh.read()
        staged[full] = _apply_one(staged[full], edit)
    for full, text in staged.items():
        with open(full, "w", encoding="utf-8") as fh:
            fh.write(text)
    return sorted(staged)
