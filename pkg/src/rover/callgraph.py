"""Dynamic call-graph capture and crash-report enrichment.

Function entry/exit hooks in the target binary emit a flat event stream
(`E <addr>` / `X <addr>`, or pre-symbolized `C caller callee` edges).
Stack replay turns that into caller->callee edges; symbolization and an
index/denylist filter reduce it to project functions; enrichment then
appends the functions the crashing input executed that the sanitizer's
stack trace does not already show -- the prime suspects when the fix
belongs outside the crash stack.
"""

import fnmatch
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import EmptyTrace
from .report import SanitizerReport

DEFAULT_CAP = 50

# Names that survive index membership but are never repair targets.
DEFAULT_DENYLIST = (
    "std::*",
    "__*",
    "operator new*",
    "operator delete*",
    "log_*",
    "LOG*",
    "*sanitizer*",
)


@dataclass
class FunctionRef:
    name: str
    address: Optional[str] = None
    file: Optional[str] = None
    line: Optional[int] = None

    def location(self) -> str:
        if self.file and self.line:
            return f"{self.file}:{self.line}"
        return self.file or ""


@dataclass
class CallEdge:
    caller: FunctionRef
    callee: FunctionRef
    first_trace_position: int
    last_trace_position: int  # dedup keeps the edge, ordering wants this


@dataclass
class DynamicCallGraph:
    edges: List[CallEdge] = field(default_factory=list)
    crash_position: int = 0


@dataclass
class EnrichedReport:
    base: SanitizerReport
    extra_functions: List[FunctionRef] = field(default_factory=list)


# --- trace ingestion ---

_LOC_RE = re.compile(r"^(?P<name>.+?)@(?P<file>[^@]+):(?P<line>\d+)$")


def _parse_ref(blob: str) -> FunctionRef:
    m = _LOC_RE.match(blob)
    if m:
        return FunctionRef(
            m.group("name"), file=m.group("file"), line=int(m.group("line"))
        )
    return FunctionRef(blob)


def ingest_trace(lines) -> DynamicCallGraph:
    """Build the call graph from trace lines.

    Two wire forms may be mixed:
      `E <hex-addr>` / `X <hex-addr>`   raw entry/exit events (an optional
          trailing token is a thread id; each thread replays its own stack)
      `C <caller> <callee>`             pre-symbolized edge, where each end
          is `name` or `name@file:line`

    Edges are deduplicated on (caller, callee): the first occurrence
    fixes first_trace_position, later ones only advance
    last_trace_position. crash_position is the event count, the trace is
    assumed to end where the target died.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    graph = DynamicCallGraph()
    seen: Dict[Tuple[str, str], CallEdge] = {}
    stacks: Dict[str, List[str]] = {}
    position = 0

    def add_edge(caller: FunctionRef, callee: FunctionRef, pos: int):
        key = (caller.name, callee.name)
        edge = seen.get(key)
        if edge is None:
            edge = CallEdge(caller, callee, pos, pos)
            seen[key] = edge
            graph.edges.append(edge)
        else:
            edge.last_trace_position = pos

    for raw in lines:
        parts = raw.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "C" and len(parts) >= 3:
            position += 1
            add_edge(_parse_ref(parts[1]), _parse_ref(parts[2]), position)
        elif tag in ("E", "X") and len(parts) >= 2:
            position += 1
            addr = parts[1].lower()
            tid = parts[2] if len(parts) > 2 else "T0"
            stack = stacks.setdefault(tid, [])
            if tag == "E":
                if stack:
                    add_edge(
                        FunctionRef(stack[-1], address=stack[-1]),
                        FunctionRef(addr, address=addr),
                        position,
                    )
                stack.append(addr)
            else:
                # tolerate unbalanced exits from longjmp and friends
                if addr in stack:
                    while stack and stack[-1] != addr:
                        stack.pop()
                    if stack:
                        stack.pop()
        # anything else is noise and is skipped

    if position == 0:
        raise EmptyTrace("trace contained no events")
    graph.crash_position = position
    return graph


# --- symbolization ---


def load_symbol_table(path_or_lines) -> Dict[str, Tuple[str, str, Optional[int]]]:
    """Parse a symbol table: `<hex-addr> <mangled-name> [<file>:<line>]`
    per line. Returns addr -> (name, file, line)."""
    if isinstance(path_or_lines, str):
        with open(path_or_lines, encoding="utf-8", errors="replace") as fh:
            lines = fh.readlines()
    else:
        lines = path_or_lines
    table = {}
    for raw in lines:
        parts = raw.split()
        if len(parts) < 2 or not re.match(r"^(0x)?[0-9a-fA-F]+$", parts[0]):
            continue
        addr = parts[0].lower()
        if not addr.startswith("0x"):
            addr = "0x" + addr
        name = parts[1]
        file = None
        line = None
        if len(parts) >= 3 and ":" in parts[2]:
            file, _, ln = parts[2].rpartition(":")
            if ln.isdigit():
                line = int(ln)
            else:
                file = parts[2]
        table[addr] = (name, file, line)
    return table


def demangle(name: str) -> str:
    """Best-effort Itanium demangling down to a qualified function name.

    Handles plain and nested source names plus internal-linkage `L`
    markers and std:: substitution; parameters are dropped. Anything the
    subset cannot parse comes back unchanged, which also makes the
    function idempotent (demangled output never starts with _Z).
    """
    if not name.startswith("_Z"):
        return name
    s = name[2:]
    i = 0
    if i < len(s) and s[i] == "L":
        i += 1

    def read_source_name(k):
        m = re.match(r"\d+", s[k:])
        if not m:
            return None, k
        n = int(m.group())
        k += m.end()
        if k + n > len(s):
            return None, k
        return s[k : k + n], k + n

    if i < len(s) and s[i] == "N":
        i += 1
        while i < len(s) and s[i] in "rVKRO":
            i += 1
        parts = []
        while i < len(s) and s[i] != "E":
            if s[i].isdigit():
                part, i = read_source_name(i)
                if part is None:
                    return name
                parts.append(part)
            elif s.startswith("St", i):
                parts.append("std")
                i += 2
            elif s[i] in "CD" and i + 1 < len(s) and s[i + 1].isdigit():
                if not parts:
                    return name
                parts.append(
                    parts[-1] if s[i] == "C" else "~" + parts[-1]
                )
                i += 2
            else:
                return name  # templates/operators: out of subset
        return "::".join(parts) if parts else name
    if s.startswith("St", i):
        part, j = read_source_name(i + 2)
        return f"std::{part}" if part else name
    if i < len(s) and s[i].isdigit():
        part, _ = read_source_name(i)
        return part if part else name
    return name


def symbolize(graph: DynamicCallGraph, symbol_table) -> DynamicCallGraph:
    """Resolve raw addresses through the symbol table and demangle.

    Unresolvable addresses become `unknown@0x<addr>` rather than being
    dropped; after this pass every FunctionRef has a non-empty name.
    """
    if isinstance(symbol_table, (str,)) or (
        isinstance(symbol_table, list) and symbol_table
        and isinstance(symbol_table[0], str)
    ):
        symbol_table = load_symbol_table(symbol_table)

    def fix(ref: FunctionRef):
        if ref.address and re.match(r"^0x[0-9a-f]+$", ref.name):
            hit = symbol_table.get(ref.address)
            if hit:
                ref.name, ref.file, ref.line = demangle(hit[0]), hit[1], hit[2]
            else:
                ref.name = f"unknown@{ref.address}"
        else:
            ref.name = demangle(ref.name)

    for edge in graph.edges:
        fix(edge.caller)
        fix(edge.callee)
    return graph


# --- filtering and enrichment ---


def filter_graph(graph: DynamicCallGraph, index, denylist=DEFAULT_DENYLIST
                 ) -> DynamicCallGraph:
    """Keep edges whose callee is defined in the index and not denied.

    Callers outside the codebase survive as context anchors when their
    callee does. Idempotent for a fixed index and denylist.
    """
    kept = []
    for edge in graph.edges:
        name = edge.callee.name
        if any(fnmatch.fnmatchcase(name, pat) for pat in denylist):
            continue
        if not index.has_function(name):
            continue
        kept.append(edge)
    return DynamicCallGraph(kept, graph.crash_position)


def enrich(report: SanitizerReport, graph: DynamicCallGraph,
           cap: int = DEFAULT_CAP) -> EnrichedReport:
    """Attach the executed-but-not-on-stack functions to the report.

    Callees already present in the stack trace are excluded; the rest
    are ordered most-recently-executed first (closest to the crash) and
    truncated to `cap`.
    """
    stack_names = {f.function for f in report.frames}
    stack_names.update(f.function.rsplit("::", 1)[-1] for f in report.frames)
    latest: Dict[str, Tuple[int, FunctionRef]] = {}
    for edge in graph.edges:
        ref = edge.callee
        if ref.name in stack_names:
            continue
        pos = edge.last_trace_position
        prev = latest.get(ref.name)
        if prev is None or pos > prev[0]:
            latest[ref.name] = (pos, ref)
    ordered = sorted(latest.values(), key=lambda pr: -pr[0])
    return EnrichedReport(report, [ref for _, ref in ordered[:cap]])


ENRICHMENT_TITLE = "Other functions executed by the bug-triggering input"
_DELIMITER = "-" * 60


def render_enriched(enriched: EnrichedReport,
                    note: Optional[str] = None) -> str:
    """Serialized enriched report: the raw sanitizer text, a delimiter,
    and the numbered extra-function list (or a passthrough note)."""
    out = [enriched.base.raw_text.rstrip("\n"), _DELIMITER]
    if note is not None:
        out.append(note)
        return "\n".join(out) + "\n"
    out.append(ENRICHMENT_TITLE)
    for i, ref in enumerate(enriched.extra_functions, start=1):
        loc = ref.location()
        out.append(f"{i}. {ref.name}" + (f" ({loc})" if loc else ""))
    if not enriched.extra_functions:
        out.append("(none beyond the stack trace)")
    return "\n".join(out) + "\n"
