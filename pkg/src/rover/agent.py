"""The retrieve -> patch -> review loop.

Each main round re-runs retrieval from scratch (stale search context is
worse than none) but carries forward one-line summaries of every failed
patch so the model does not retry dead ends. Within a round the model
gets max_patch_retries attempts; each rejected attempt feeds the
reviewer's suggestion back into the next prompt.
"""

import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from .backends import FinalText, ModelBackend, ToolRequest
from .callgraph import EnrichedReport, render_enriched
from .edits import CandidatePatch, parse_edit_blocks, render_edits
from .errors import (
    AmbiguousMatch,
    FunctionNotFound,
    MalformedArgs,
    NoLocationsProposed,
    SearchTextNotFound,
    UnknownTool,
    UnparsablePatch,
)
from .index import (
    CodeEntity,
    EntityKind,
    SearchIndex,
    TOOL_SPECS,
    ToolCall,
    entity_text,
    execute_tool,
)
from .patchlab import PatchOutcome, PatchStatus, RepairTask, validate
from .typegraph import (
    build_type_graph,
    render_type_prompt,
    variables_in_scope,
)


@dataclass
class AgentConfig:
    model_id: str = "gpt-4o-2024-08-06"
    temperature: float = 0.2
    max_main_rounds: int = 3
    max_patch_retries: int = 6
    max_tool_calls_per_round: int = 10
    context_char_budget: int = 4000
    fixed_locations: Optional[List[str]] = None  # "function@file" entries


@dataclass
class BuggyLocation:
    function: str
    file: str
    entity: CodeEntity


class VerdictStatus(Enum):
    ACCEPTED = "Accepted"
    REJECTED_COMPILE = "RejectedCompile"
    REJECTED_STILL_CRASHES = "RejectedStillCrashes"
    REJECTED_APPLY_FAILED = "RejectedApplyFailed"


@dataclass
class ReviewVerdict:
    status: VerdictStatus
    suggestion: str = ""
    outcome: Optional[PatchOutcome] = None


@dataclass
class RepairResult:
    status: PatchStatus
    patch: Optional[CandidatePatch]
    outcome: Optional[PatchOutcome]
    round: int = 0
    attempt: int = 0
    locations: List[BuggyLocation] = field(default_factory=list)
    transcript: List[dict] = field(default_factory=list)
    generation_calls: int = 0  # patch-phase model calls
    retrieval_calls: int = 0  # retrieval-phase model calls
    tool_calls: int = 0  # tool requests actually executed
    tokens_in: int = 0
    tokens_out: int = 0
    wall_time_secs: float = 0.0


_SYSTEM_PROMPT = (
    "You repair fuzzer-discovered security vulnerabilities in C/C++ "
    "codebases. Ground every conclusion in code you have actually seen."
)

_LOCATION_RE = re.compile(
    r"^\s*(?:[-*]\s*)?LOCATION:\s*([A-Za-z_~][\w:~]*)\s*(?:@\s*(\S+))?\s*$",
    re.MULTILINE,
)

_EDIT_FORMAT_HELP = (
    "Reply with one or more edit blocks in exactly this format (the "
    "SEARCH text must be copied verbatim from the file):\n"
    "### EDIT <relative-file-path>\n"
    "<<<<<<< SEARCH\n"
    "...original lines...\n"
    "=======\n"
    "...replacement lines...\n"
    ">>>>>>> REPLACE"
)

_FUNCTION_KINDS = (
    EntityKind.FUNCTION, EntityKind.METHOD, EntityKind.MACRO_FUNCTION,
)


class _Counters:
    def __init__(self):
        self.generation_calls = 0
        self.retrieval_calls = 0
        self.tool_calls = 0
        self.tokens_in = 0
        self.tokens_out = 0

    def absorb(self, usage):
        self.tokens_in += usage.tokens_in
        self.tokens_out += usage.tokens_out


def _clip(text: str, budget: int) -> str:
    if len(text) <= budget:
        return text
    return text[:budget] + "\n... [truncated]"


def _resolve_location(index: SearchIndex, function: str,
                      file: Optional[str]) -> Optional[BuggyLocation]:
    base = function.rsplit("::", 1)[-1]
    cands = [
        e for e in index.entities.get(base, []) if e.kind in _FUNCTION_KINDS
    ]
    if file:
        rel = file.replace("\\", "/")
        cands = [
            e for e in cands
            if e.file == rel or e.file.endswith("/" + rel)
            or e.file.rsplit("/", 1)[-1] == rel
        ]
    if not cands:
        return None
    ent = cands[0]
    return BuggyLocation(function=ent.name, file=ent.file, entity=ent)


def _tool_instructions() -> str:
    lines = ["You may inspect the codebase with these tools:"]
    for name, spec in TOOL_SPECS.items():
        args = ", ".join(spec["args"])
        lines.append(f"- {name}({args}): {spec['doc']}")
    lines.append("")
    lines.append(
        'Call a tool by replying with a single JSON object, e.g. '
        '{"tool": "search_function", "args": {"name": "parse_header"}}.'
    )
    lines.append(
        "When you have seen enough, reply with the buggy locations, one "
        "per line:\nLOCATION: <function>@<file>"
    )
    return "\n".join(lines)


def retrieve_context(task: RepairTask, index: SearchIndex,
                     enriched: EnrichedReport, backend: ModelBackend,
                     config: AgentConfig, transcript: List[dict],
                     counters: _Counters,
                     prior_failures: Optional[List[str]] = None
                     ) -> List[BuggyLocation]:
    """Tool-call loop ending in at least one validated buggy location.

    Invalid proposals are rejected and re-prompted (each re-prompt spends
    retrieval budget); raises NoLocationsProposed when the budget runs
    out first.
    """
    opening = [
        f"Project {task.project_name}, bug {task.bug_id}. A fuzzer input "
        "crashes the target; the sanitizer report (enriched with runtime "
        "context) follows.",
        "",
        render_enriched(enriched).rstrip("\n"),
        "",
        _tool_instructions(),
    ]
    if prior_failures:
        opening.append("")
        opening.append("Patches already tried and rejected:")
        opening.extend(f"- {s}" for s in prior_failures)
    messages = [
        {"role": "system", "content": _SYSTEM_PROMPT},
        {"role": "user", "content": "\n".join(opening)},
    ]
    transcript.append({"event": "retrieval_prompt",
                       "content": messages[1]["content"]})

    for _ in range(config.max_tool_calls_per_round):
        reply = backend.chat(messages, tools=TOOL_SPECS)
        counters.retrieval_calls += 1
        counters.absorb(reply.usage)

        if isinstance(reply, ToolRequest):
            counters.tool_calls += 1
            try:
                result = execute_tool(index, ToolCall(reply.tool, reply.args))
                content = result.message
                if result.text:
                    content += "\n\n" + result.text
            except (UnknownTool, MalformedArgs) as exc:
                content = f"tool error: {exc}"
            transcript.append({
                "event": "tool_call", "tool": reply.tool,
                "args": reply.args, "result": content,
            })
            messages.append({
                "role": "assistant",
                "content": f'{{"tool": "{reply.tool}"}}',
            })
            messages.append({"role": "user", "content": content})
            continue

        text = reply.content if isinstance(reply, FinalText) else ""
        transcript.append({"event": "model_text", "content": text})
        proposals = _LOCATION_RE.findall(text)
        locations = []
        rejected = []
        for function, file in proposals:
            loc = _resolve_location(index, function, file or None)
            if loc is not None:
                locations.append(loc)
            else:
                rejected.append(f"{function}@{file}" if file else function)
        if locations:
            if rejected:
                transcript.append({
                    "event": "rejection", "invalid": rejected,
                    "note": "partially accepted",
                })
            transcript.append({
                "event": "locations",
                "accepted": [f"{l.function}@{l.file}" for l in locations],
            })
            return locations
        if proposals:
            note = (
                "None of those functions exist in the index: "
                + ", ".join(rejected)
                + ". Use the search tools and propose locations that "
                "actually appear in the codebase."
            )
        else:
            note = (
                "No tool call and no LOCATION lines were recognized. "
                "Either call one tool as a JSON object or finish with "
                "LOCATION: <function>@<file> lines."
            )
        transcript.append({"event": "rejection", "invalid": rejected,
                           "note": note})
        messages.append({"role": "assistant", "content": text})
        messages.append({"role": "user", "content": note})

    raise NoLocationsProposed(
        f"no valid location within {config.max_tool_calls_per_round} calls"
    )


def _fixed_locations(index: SearchIndex, entries: List[str],
                     transcript: List[dict]) -> List[BuggyLocation]:
    locations = []
    for entry in entries:
        function, _, file = entry.partition("@")
        loc = _resolve_location(index, function.strip(), file.strip() or None)
        if loc is None:
            raise FunctionNotFound(entry)
        locations.append(loc)
    transcript.append({
        "event": "locations",
        "accepted": [f"{l.function}@{l.file}" for l in locations],
        "note": "fixed by configuration",
    })
    return locations


def _patch_prompt(index, graph, locations, suggestion, prior_failures,
                  config) -> str:
    parts = ["Write the fix for the vulnerability at the locations below."]
    for loc in locations:
        parts.append("")
        parts.append(f"### {loc.file}: {loc.function}")
        parts.append("```c")
        parts.append(entity_text(index, loc.entity))
        parts.append("```")
        try:
            bindings = variables_in_scope(index, graph, loc.entity)
            parts.append("")
            parts.append(render_type_prompt(bindings, graph, loc.function))
        except Exception:
            pass  # scope extraction is best effort in the prompt
    if prior_failures:
        parts.append("")
        parts.append("Patches already tried and rejected:")
        parts.extend(f"- {s}" for s in prior_failures)
    if suggestion:
        parts.append("")
        parts.append("Reviewer feedback on the previous attempt:")
        parts.append(_clip(suggestion, config.context_char_budget))
    parts.append("")
    parts.append(_EDIT_FORMAT_HELP)
    parts.append("")
    parts.append("First explain the reasoning, and then write the actual patch.")
    return "\n".join(parts)


def generate_patch(index, graph, locations, backend, config, transcript,
                   counters, suggestion=None, prior_failures=None
                   ) -> Optional[CandidatePatch]:
    """One patch attempt: a model call plus at most one reformat
    re-prompt. None when both outputs were unparsable."""
    prompt = _patch_prompt(index, graph, locations, suggestion,
                           prior_failures, config)
    messages = [
        {"role": "system", "content": _SYSTEM_PROMPT},
        {"role": "user", "content": prompt},
    ]
    transcript.append({"event": "patch_prompt", "content": prompt})

    for round_two in (False, True):
        reply = backend.chat(messages)
        counters.generation_calls += 1
        counters.absorb(reply.usage)
        text = reply.content if isinstance(reply, FinalText) else ""
        transcript.append({"event": "patch_response", "content": text})
        try:
            edits = parse_edit_blocks(text)
            return CandidatePatch(edits, raw_response=text)
        except UnparsablePatch as exc:
            if round_two:
                transcript.append({"event": "unparsable", "error": str(exc)})
                return None
            reminder = (
                f"That reply could not be parsed as a patch ({exc}).\n"
                + _EDIT_FORMAT_HELP
            )
            transcript.append({"event": "reformat_reprompt",
                               "error": str(exc)})
            messages.append({"role": "assistant", "content": text})
            messages.append({"role": "user", "content": reminder})
    return None


def review(task: RepairTask, patch: CandidatePatch, scratch_dir: str,
           tag: str, config: AgentConfig) -> ReviewVerdict:
    """Validate the patch and turn the outcome into actionable feedback.

    Accepted if and only if patch_lab classifies it Plausible.
    """
    try:
        outcome = validate(task, patch, scratch_dir, tag)
    except (SearchTextNotFound, AmbiguousMatch) as exc:
        return ReviewVerdict(
            VerdictStatus.REJECTED_APPLY_FAILED,
            suggestion=(
                f"The edit could not be applied: {exc}. Copy the SEARCH "
                "text verbatim from the current file content."
            ),
        )
    if outcome.status == PatchStatus.PLAUSIBLE:
        return ReviewVerdict(VerdictStatus.ACCEPTED, outcome=outcome)
    if outcome.status == PatchStatus.COMPILE_ERROR:
        return ReviewVerdict(
            VerdictStatus.REJECTED_COMPILE,
            suggestion="The patched tree failed to compile:\n"
            + _clip(outcome.build_log_excerpt, config.context_char_budget),
            outcome=outcome,
        )
    excerpt = ""
    if outcome.crash_report is not None:
        excerpt = _clip(outcome.crash_report.raw_text,
                        config.context_char_budget)
    return ReviewVerdict(
        VerdictStatus.REJECTED_STILL_CRASHES,
        suggestion="The exploit still crashes after the patch:\n" + excerpt,
        outcome=outcome,
    )


# best-so-far tiers: a patch that builds but fails the exploit beats one
# that does not build, which beats one that never applied
_TIER = {
    VerdictStatus.REJECTED_STILL_CRASHES: 3,
    VerdictStatus.REJECTED_COMPILE: 2,
    VerdictStatus.REJECTED_APPLY_FAILED: 1,
}

_TIER_STATUS = {
    3: PatchStatus.IMPLAUSIBLE,
    2: PatchStatus.COMPILE_ERROR,
    1: PatchStatus.NO_PATCH,  # a patch that never applied is no patch
    0: PatchStatus.NO_PATCH,
}


def run_repair(task: RepairTask, index: SearchIndex,
               enriched: EnrichedReport, backend: ModelBackend,
               config: AgentConfig, scratch_dir: str) -> RepairResult:
    """Full agent loop for one task. Stops at the first Accepted patch;
    otherwise reports the best rejected attempt (latest within a tier)."""
    started = time.monotonic()
    graph = build_type_graph(index)
    transcript: List[dict] = []
    counters = _Counters()
    prior_failures: List[str] = []
    best = None  # (tier, patch, verdict, round, attempt)
    last_locations: List[BuggyLocation] = []

    for rnd in range(1, config.max_main_rounds + 1):
        transcript.append({"event": "round", "round": rnd})
        try:
            if config.fixed_locations:
                locations = _fixed_locations(
                    index, config.fixed_locations, transcript
                )
            else:
                locations = retrieve_context(
                    task, index, enriched, backend, config, transcript,
                    counters, prior_failures,
                )
        except NoLocationsProposed as exc:
            transcript.append({"event": "no_locations", "error": str(exc)})
            continue
        last_locations = locations

        suggestion = None
        for attempt in range(1, config.max_patch_retries + 1):
            patch = generate_patch(
                index, graph, locations, backend, config, transcript,
                counters, suggestion, prior_failures,
            )
            if patch is None:
                prior_failures.append(
                    f"round {rnd} attempt {attempt}: unparsable output"
                )
                suggestion = None
                continue
            verdict = review(task, patch, scratch_dir,
                             f"r{rnd}a{attempt}", config)
            transcript.append({
                "event": "verdict", "round": rnd, "attempt": attempt,
                "status": verdict.status.value,
                "suggestion": verdict.suggestion,
            })
            if verdict.status == VerdictStatus.ACCEPTED:
                return RepairResult(
                    status=PatchStatus.PLAUSIBLE,
                    patch=patch,
                    outcome=verdict.outcome,
                    round=rnd,
                    attempt=attempt,
                    locations=locations,
                    transcript=transcript,
                    generation_calls=counters.generation_calls,
                    retrieval_calls=counters.retrieval_calls,
                    tool_calls=counters.tool_calls,
                    tokens_in=counters.tokens_in,
                    tokens_out=counters.tokens_out,
                    wall_time_secs=time.monotonic() - started,
                )
            tier = _TIER[verdict.status]
            if best is None or tier >= best[0]:
                best = (tier, patch, verdict, rnd, attempt)
            prior_failures.append(
                f"round {rnd} attempt {attempt}: {verdict.status.value}"
            )
            suggestion = verdict.suggestion

    tier = best[0] if best else 0
    return RepairResult(
        status=_TIER_STATUS[tier],
        patch=best[1] if best else None,
        outcome=best[2].outcome if best else None,
        round=best[3] if best else 0,
        attempt=best[4] if best else 0,
        locations=last_locations,
        transcript=transcript,
        generation_calls=counters.generation_calls,
        retrieval_calls=counters.retrieval_calls,
        tool_calls=counters.tool_calls,
        tokens_in=counters.tokens_in,
        tokens_out=counters.tokens_out,
        wall_time_secs=time.monotonic() - started,
    )


def final_patch_text(result: RepairResult) -> Optional[str]:
    """The surviving patch in its exchange form, if any."""
    if result.patch is None:
        return None
    return render_edits(result.patch.edits)
