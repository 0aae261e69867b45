"""Sanitizer crash-report parsing and CWE classification.

Understands the textual reports emitted by ASan/MSan/UBSan-instrumented
binaries: the ERROR banner, the access line, and the numbered stack
frames of the faulting thread.
"""

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from .errors import MalformedReport


class Sanitizer(Enum):
    ADDRESS = "Address"
    MEMORY = "Memory"
    UNDEFINED_BEHAVIOR = "UndefinedBehavior"
    UNKNOWN = "Unknown"


@dataclass
class StackFrame:
    """One `#N 0xADDR in func file:line:col` line of a stack trace."""

    index: int
    address: str
    function: str
    file: str = ""
    line: Optional[int] = None
    column: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "address": self.address,
            "function": self.function,
            "file": self.file,
            "line": self.line,
            "column": self.column,
        }


@dataclass
class SanitizerReport:
    sanitizer: Sanitizer
    bug_type: str
    access: Optional[str]
    frames: List[StackFrame]
    raw_text: str

    def to_dict(self) -> dict:
        return {
            "sanitizer": self.sanitizer.value,
            "bug_type": self.bug_type,
            "access": self.access,
            "frames": [f.to_dict() for f in self.frames],
            "raw_text": self.raw_text,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class CweLabel:
    cwe_id: str
    name: str


_BANNER_RE = re.compile(
    r"ERROR:\s*(\w+)Sanitizer:?\s+([^\n]*)"
)

_ACCESS_RE = re.compile(r"^\s*(READ|WRITE) of size (\d+)", re.MULTILINE)

# `#0 0x4f1e37 in q_memchr src/core/parser/../ut.h:422:7` and degenerate
# variants without `in` or without a source location.
_FRAME_RE = re.compile(
    r"^\s*#(\d+)\s+(0x[0-9a-fA-F]+)\s+(?:in\s+(.*)|(\(.*\)))\s*$"
)

_SANITIZER_BY_TOKEN = {
    "Address": Sanitizer.ADDRESS,
    "Memory": Sanitizer.MEMORY,
    "UndefinedBehavior": Sanitizer.UNDEFINED_BEHAVIOR,
}

# Cut points marking the end of the bug-type phrase inside the banner.
_BUG_TYPE_END = re.compile(
    r"\s+(?:on address\b|on unknown address\b|on 0x|at 0x|at pc\b|in thread\b).*$"
)


def _split_location(blob: str):
    """Split `path:line:col` from the right, tolerating colons in the path."""
    parts = blob.rsplit(":", 2)
    if len(parts) == 3 and parts[1].isdigit() and parts[2].isdigit():
        return parts[0], int(parts[1]), int(parts[2])
    parts = blob.rsplit(":", 1)
    if len(parts) == 2 and parts[1].isdigit():
        return parts[0], int(parts[1]), None
    return blob, None, None


def parse_frame_line(line: str) -> Optional[StackFrame]:
    """Parse one stack-frame line, or None if the line is not a frame."""
    m = _FRAME_RE.match(line)
    if not m:
        return None
    index = int(m.group(1))
    address = m.group(2)
    if m.group(3) is None:
        # `#2 0x7f.. (/lib/libc.so.6+0x21b97)` -- no symbol, keep the module blob.
        return StackFrame(index, address, m.group(4))
    rest = m.group(3).strip()
    # Function name runs up to the last whitespace gap before the location;
    # demangled C++ names may themselves contain spaces and parentheses.
    if " " in rest:
        func, loc = rest.rsplit(None, 1)
        if "/" in loc or (":" in loc and not loc.endswith("::")) or "." in loc:
            file, lineno, col = _split_location(loc)
            return StackFrame(index, address, func, file, lineno, col)
    return StackFrame(index, address, rest)


def format_frame(frame: StackFrame) -> str:
    """Render a frame back to its report line form (inverse of parse)."""
    out = f"    #{frame.index} {frame.address} in {frame.function}"
    if frame.file:
        out += f" {frame.file}"
        if frame.line is not None:
            out += f":{frame.line}"
            if frame.column is not None:
                out += f":{frame.column}"
    return out


def parse_report(text) -> SanitizerReport:
    """Parse a sanitizer crash report.

    Args:
        text: report text (str, or bytes decoded with invalid sequences
            replaced rather than rejected).

    Returns:
        SanitizerReport with the faulting thread's stack trace. Only the
        first frame run (indices increasing from #0) is kept; allocation
        and free traces restart numbering and are left in raw_text only.

    Raises:
        MalformedReport: neither an ERROR banner nor any frame line found.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")

    sanitizer = Sanitizer.UNKNOWN
    bug_type = "unknown"
    banner = _BANNER_RE.search(text)
    if banner:
        sanitizer = _SANITIZER_BY_TOKEN.get(banner.group(1), Sanitizer.UNKNOWN)
        bug_type = _BUG_TYPE_END.sub("", banner.group(2).strip()).strip()
        bug_type = bug_type.rstrip(".: ") or "unknown"

    access_m = _ACCESS_RE.search(text)
    access = f"{access_m.group(1)} of size {access_m.group(2)}" if access_m else None

    frames: List[StackFrame] = []
    last_index = -1
    for line in text.splitlines():
        frame = parse_frame_line(line)
        if frame is None:
            continue
        if frames and frame.index <= last_index:
            break  # second trace (alloc/free site), numbering restarted
        if not frames and frame.index != 0:
            continue
        frames.append(frame)
        last_index = frame.index

    if banner is None and not frames:
        raise MalformedReport("no sanitizer ERROR banner and no stack frames")

    return SanitizerReport(sanitizer, bug_type, access, frames, text)


_CWE_TABLE = [
    ("heap-buffer-overflow", CweLabel("CWE-122", "Heap-based Buffer Overflow")),
    ("stack-buffer-overflow", CweLabel("CWE-121", "Stack-based Buffer Overflow")),
    ("heap-use-after-free", CweLabel("CWE-416", "Use After Free")),
    ("use-of-uninitialized-value", CweLabel("CWE-457", "Use of Uninitialized Variable")),
    ("double-free", CweLabel("CWE-415", "Double Free")),
]

CWE_UNKNOWN = CweLabel("CWE-unknown", "Unclassified")


def classify_cwe(report: SanitizerReport) -> CweLabel:
    """Map the report's bug type (and access direction, where it
    disambiguates) onto a CWE label. Unmapped types get CWE-unknown,
    never a guess."""
    bt = report.bug_type.lower()
    if bt.startswith("segv") or "null-dereference" in bt:
        return CweLabel("CWE-476", "NULL Pointer Dereference")
    for token, label in _CWE_TABLE:
        if token in bt:
            return label
    if ("global-buffer-overflow" in bt or "container-overflow" in bt) and (
        report.access or ""
    ).startswith("READ"):
        return CweLabel("CWE-125", "Out-of-bounds Read")
    return CWE_UNKNOWN
