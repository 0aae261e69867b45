"""Structural search index over a C/C++ source tree.

Entities (functions, methods, records, enums, typedefs, macro-wrapped
functions) are recovered from token structure alone: brace matching and
declarator shapes, no preprocessing and no semantic analysis. That keeps
indexing total on real-world trees at the cost of ignoring conditional
compilation, which is the intended trade-off.
"""

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .clex import (
    KIND_IDENT,
    KIND_PP,
    KIND_PUNCT,
    Token,
    match_brace,
    tokenize,
)
from .errors import (
    EmptyCodebase,
    FileNotIndexed,
    LineOutOfRange,
    MalformedArgs,
    UnknownTool,
)

DEFAULT_SUFFIXES = (".c", ".h", ".cc", ".cpp", ".cxx", ".hpp", ".hh")
DEFAULT_RESULT_CHARS = 4000


class EntityKind(Enum):
    FUNCTION = "Function"
    METHOD = "Method"
    RECORD = "Record"
    ENUM = "Enum"
    TYPEDEF = "Typedef"
    MACRO_FUNCTION = "MacroFunction"


_SEARCHABLE_FUNCTIONS = (
    EntityKind.FUNCTION,
    EntityKind.METHOD,
    EntityKind.MACRO_FUNCTION,
)
_SEARCHABLE_TYPES = (EntityKind.RECORD, EntityKind.ENUM, EntityKind.TYPEDEF)


@dataclass
class CodeEntity:
    kind: EntityKind
    name: str
    qualifier: str  # enclosing namespace/record path, "" at file scope
    file: str  # path relative to the index root, posix separators
    span: Tuple[int, int]  # 1-based inclusive line range
    signature: str

    def qualified_name(self) -> str:
        return f"{self.qualifier}::{self.name}" if self.qualifier else self.name


@dataclass
class SearchIndex:
    root: str
    files: Dict[str, str]
    entities: Dict[str, List[CodeEntity]]
    entity_list: List[CodeEntity] = field(default_factory=list)
    max_result_chars: int = DEFAULT_RESULT_CHARS

    def has_function(self, name: str) -> bool:
        base = name.rsplit("::", 1)[-1]
        return any(
            e.kind in _SEARCHABLE_FUNCTIONS for e in self.entities.get(base, [])
        )


@dataclass
class ToolCall:
    tool: str
    args: dict


@dataclass
class ToolResult:
    matches: List[CodeEntity]
    text: str
    message: str  # never empty; explains misses
    truncated: bool = False


# Keywords that can never be a declared function name.
_TYPE_KEYWORDS = {
    "void", "int", "char", "short", "long", "float", "double", "signed",
    "unsigned", "bool", "_Bool", "auto", "const", "volatile", "static",
    "inline", "extern", "register", "restrict", "typename",
}

# Identifiers whose trailing paren group is not a parameter list.
_NON_ANCHOR = {
    "__attribute__", "decltype", "noexcept", "alignas", "alignof", "typeof",
    "__typeof__", "sizeof", "if", "while", "for", "switch", "return",
    "defined", "_Static_assert", "static_assert", "asm", "__asm__", "throw",
    "catch", "case",
}

_BETWEEN_IDENTS = {
    "const", "volatile", "noexcept", "throw", "override", "final", "mutable",
    "restrict", "__restrict", "__restrict__", "__attribute__", "asm",
    "__asm__", "try",
}

_RECORD_KEYWORDS = ("struct", "class", "union")


class _Scanner:
    """Single-file entity extraction over a token list."""

    def __init__(self, tokens: List[Token], path: str):
        self.toks = tokens
        self.path = path
        self.out: List[CodeEntity] = []

    def scan(self) -> List[CodeEntity]:
        self._scope(0, len(self.toks), [], in_record=False)
        return self.out

    # -- scope walking --

    def _scope(self, i, end, qualifier, in_record):
        toks = self.toks
        while i < end:
            t = toks[i]
            if t.kind == KIND_PP or (t.kind == KIND_PUNCT and t.text in (";", "}")):
                i += 1
                continue
            if t.kind == KIND_IDENT:
                w = t.text
                if w == "namespace":
                    i = self._namespace(i, end, qualifier)
                    continue
                if (
                    w == "extern"
                    and i + 2 < end
                    and toks[i + 1].kind == "string"
                    and toks[i + 2].text == "{"
                ):
                    close = match_brace(toks, i + 2)
                    self._scope(i + 3, close, qualifier, in_record)
                    i = close + 1
                    continue
                if w == "typedef":
                    i = self._typedef(i, end, qualifier)
                    continue
                if w == "using":
                    i = self._using(i, end)
                    continue
                if w == "template":
                    i = self._skip_template(i, end)
                    continue
                if w in _RECORD_KEYWORDS and self._is_record_def(i, end):
                    i = self._record(i, end, qualifier)
                    continue
                if w == "enum" and self._is_record_def(i, end):
                    i = self._enum(i, end, qualifier)
                    continue
                if (
                    in_record
                    and w in ("public", "private", "protected")
                    and i + 1 < end
                    and toks[i + 1].text == ":"
                ):
                    i += 2
                    continue
            i = self._declaration(i, end, qualifier, in_record)

    def _namespace(self, i, end, qualifier):
        toks = self.toks
        j = i + 1
        parts = []
        while j < end and (
            toks[j].kind == KIND_IDENT or toks[j].text == "::"
        ):
            if toks[j].kind == KIND_IDENT:
                parts.append(toks[j].text)
            j += 1
        if j < end and toks[j].text == "{":
            close = match_brace(toks, j)
            self._scope(j + 1, close, qualifier + parts, in_record=False)
            return close + 1
        return self._skip_to_semi(j, end)

    def _skip_template(self, i, end):
        toks = self.toks
        j = i + 1
        if j >= end or toks[j].text != "<":
            return j
        depth = 0
        while j < end:
            t = toks[j]
            if t.kind == KIND_PUNCT:
                if t.text == "<":
                    depth += 1
                elif t.text == ">":
                    depth -= 1
                    if depth == 0:
                        return j + 1
                elif t.text == ">>":
                    depth -= 2
                    if depth <= 0:
                        return j + 1
                elif t.text in "([{":
                    j = match_brace(toks, j)
                elif t.text == ";":
                    return j  # malformed header, bail
            j += 1
        return end

    def _skip_to_semi(self, i, end):
        toks = self.toks
        j = i
        while j < end:
            t = toks[j]
            if t.kind == KIND_PUNCT:
                if t.text in "([{":
                    j = match_brace(toks, j) + 1
                    continue
                if t.text == ";":
                    return j + 1
            j += 1
        return end

    # -- record / enum / typedef --

    def _is_record_def(self, j, end):
        toks = self.toks
        k = j + 1
        in_bases = False
        while k < end:
            t = toks[k]
            if t.kind == KIND_IDENT or t.kind == KIND_PP:
                k += 1
                continue
            if t.kind == KIND_PUNCT:
                if t.text == "{":
                    return True
                if t.text in ("::", ","):
                    k += 1
                    continue
                if t.text == ":":
                    in_bases = True
                    k += 1
                    continue
                return False
            return False
        return False

    def _record(self, i, end, qualifier):
        toks = self.toks
        kw = toks[i].text
        j = i + 1
        name = ""
        while j < end and toks[j].text != "{" and toks[j].text != ":":
            if toks[j].kind == KIND_IDENT and toks[j].text != "final":
                name = toks[j].text
            j += 1
        while j < end and toks[j].text != "{":
            j += 1
        close = match_brace(toks, j)
        end_line = toks[min(close, len(toks) - 1)].line
        if name:
            self._emit(
                EntityKind.RECORD, name, qualifier, toks[i].line, end_line,
                f"{kw} {name}",
            )
        inner = qualifier + [name] if name else qualifier
        self._scope(j + 1, close, inner, in_record=True)
        return self._skip_to_semi(close + 1, end)

    def _enum(self, i, end, qualifier):
        toks = self.toks
        j = i + 1
        name = ""
        while j < end and toks[j].text not in ("{", ":"):
            if toks[j].kind == KIND_IDENT and toks[j].text not in (
                "class", "struct",
            ):
                name = toks[j].text
            j += 1
        while j < end and toks[j].text != "{":
            j += 1
        close = match_brace(toks, j)
        if name:
            self._emit(
                EntityKind.ENUM, name, qualifier, toks[i].line,
                toks[min(close, len(toks) - 1)].line, f"enum {name}",
            )
        return self._skip_to_semi(close + 1, end)

    def _typedef(self, i, end, qualifier):
        toks = self.toks
        j = i + 1
        semi = -1
        while j < end:
            t = toks[j]
            if t.kind == KIND_PUNCT:
                if t.text in "([{":
                    j = match_brace(toks, j) + 1
                    continue
                if t.text == ";":
                    semi = j
                    break
            j += 1
        if semi < 0:
            semi = end
        seg = toks[i + 1 : semi]
        start_line = toks[i].line
        end_line = toks[min(semi, len(toks) - 1)].line

        kw_idx = next(
            (k for k, t in enumerate(seg)
             if t.kind == KIND_IDENT and t.text in _RECORD_KEYWORDS + ("enum",)),
            None,
        )
        open_idx = next(
            (k for k, t in enumerate(seg) if t.text == "{"), None
        )
        if kw_idx is not None and open_idx is not None:
            kw = seg[kw_idx].text
            tag = ""
            if kw_idx + 1 < len(seg) and seg[kw_idx + 1].kind == KIND_IDENT:
                tag = seg[kw_idx + 1].text
            body_close = match_brace(seg, open_idx)
            aliases = [
                _declarator_name(part)
                for part in _split_commas(seg[body_close + 1 :])
                if part
            ]
            aliases = [a for a in aliases if a]
            rec_kind = EntityKind.ENUM if kw == "enum" else EntityKind.RECORD
            rec_name = tag or (aliases[0] if aliases else "")
            if rec_name:
                self._emit(
                    rec_kind, rec_name, qualifier, start_line, end_line,
                    f"{kw} {tag}".strip() if tag else f"{kw} {rec_name}",
                )
                if kw != "enum":
                    inner = qualifier + [rec_name]
                    base = i + 1  # seg offset -> toks offset
                    self._scope(
                        base + open_idx + 1, base + body_close, inner, True
                    )
            named = aliases if tag else aliases[1:]
            for alias in named:
                self._emit(
                    EntityKind.TYPEDEF, alias, qualifier, start_line, end_line,
                    f"typedef {kw} {tag or rec_name} {alias}",
                )
        else:
            for part in _split_commas(seg):
                name = _declarator_name(part)
                if name:
                    self._emit(
                        EntityKind.TYPEDEF, name, qualifier, start_line,
                        end_line, "typedef " + _spell(part),
                    )
        return semi + 1

    def _using(self, i, end):
        toks = self.toks
        j = self._skip_to_semi(i, end)
        seg = toks[i + 1 : j - 1]
        if len(seg) >= 2 and seg[0].kind == KIND_IDENT and seg[1].text == "=":
            self._emit(
                EntityKind.TYPEDEF, seg[0].text, [], toks[i].line,
                toks[min(j - 1, len(toks) - 1)].line,
                "using " + _spell(seg),
            )
        return j

    # -- generic declaration (function definitions live here) --

    def _declaration(self, i, end, qualifier, in_record):
        toks = self.toks
        j = i
        groups = []  # top-level paren groups, as (open, close)
        saw_eq = False
        body = -1
        while j < end:
            t = toks[j]
            if t.kind == KIND_PP:
                j += 1
                continue
            if t.kind == KIND_IDENT and j > i:
                if t.text in _RECORD_KEYWORDS and self._is_record_def(j, end):
                    return self._record(j, end, qualifier)
                if t.text == "enum" and self._is_record_def(j, end):
                    return self._enum(j, end, qualifier)
            if t.kind == KIND_PUNCT:
                if t.text == ";":
                    return j + 1
                if t.text == "=":
                    saw_eq = True
                elif t.text == "(":
                    c = match_brace(toks, j)
                    groups.append((j, c))
                    j = c + 1
                    continue
                elif t.text == "[":
                    j = match_brace(toks, j) + 1
                    continue
                elif t.text == "{":
                    if saw_eq:
                        j = match_brace(toks, j) + 1
                        continue
                    body = j
                    emitted = self._classify_body(
                        i, groups, body, qualifier, in_record
                    )
                    if emitted >= 0:
                        return emitted
                    # not a function body: initializer-like, skip the group
                    j = match_brace(toks, j) + 1
                    continue
            j += 1
        return end

    def _classify_body(self, stmt_start, groups, body, qualifier, in_record):
        """Emit a Function/Method/MacroFunction if the brace at `body`
        is a definition body. Returns the resume index, or -1 if the
        brace is not a function body."""
        toks = self.toks
        anchor = None
        for (o, c) in groups:
            if o <= stmt_start:
                continue
            p = o - 1
            prev = toks[p]
            if prev.kind == KIND_IDENT:
                if prev.text in _NON_ANCHOR or prev.text in _TYPE_KEYWORDS:
                    continue
                if prev.text == "operator":
                    # operator()(params): name group then params group
                    anchor = (o, c, p, "operator()")
                    nxt = next(
                        ((o2, c2) for (o2, c2) in groups if o2 == c + 1), None
                    )
                    if nxt:
                        anchor = (nxt[0], nxt[1], p, "operator()")
                    break
                anchor = (o, c, p, None)
                break
            if prev.kind == KIND_PUNCT and prev.text not in (")", "]", "}", ">"):
                # possible punctuation operator: operator== and friends
                q = p
                while q > stmt_start and toks[q].kind == KIND_PUNCT:
                    q -= 1
                if toks[q].kind == KIND_IDENT and toks[q].text == "operator":
                    op = "".join(t.text for t in toks[q + 1 : o])
                    anchor = (o, c, q, "operator" + op)
                    break
        if anchor is None:
            return -1
        o, c, p, opname = anchor
        if not self._between_ok(c + 1, body):
            return -1

        close = match_brace(toks, body)
        end_line = toks[min(close, len(toks) - 1)].line

        if opname:
            name, name_start, qual_parts = opname, p, []
        else:
            name = toks[p].text
            name_start = p
            if p - 1 >= stmt_start and toks[p - 1].text == "~":
                name = "~" + name
                name_start = p - 1
            qual_parts = []
            m = name_start
            while (
                m - 2 >= stmt_start
                and toks[m - 1].text == "::"
                and toks[m - 2].kind == KIND_IDENT
            ):
                qual_parts.insert(0, toks[m - 2].text)
                m -= 2
            name_start = m

        # Macro wrapper: ALL_CAPS lone identifier applied at file scope,
        # body follows the argument list directly.
        if (
            not in_record
            and not qual_parts
            and name_start == stmt_start
            and _is_all_caps(name)
            and toks[c + 1].text == "{" if c + 1 < len(toks) else False
        ):
            arg = next(
                (t.text for t in toks[o + 1 : c] if t.kind == KIND_IDENT),
                None,
            )
            if arg:
                self._emit(
                    EntityKind.MACRO_FUNCTION, arg, qualifier,
                    toks[stmt_start].line, end_line,
                    _spell(toks[stmt_start : c + 1]),
                )
                return close + 1

        # A qualified declarator (Class::name) outside any record body is
        # an out-of-line member definition; the class itself is usually in
        # a header this per-file pass never sees, so the qualifier is the
        # only signal. Namespace-qualified free functions get swept in,
        # which is harmless for search.
        kind = (
            EntityKind.METHOD
            if in_record or qual_parts
            else EntityKind.FUNCTION
        )
        self._emit(
            kind, name, qualifier + qual_parts, toks[stmt_start].line,
            end_line, _spell(toks[stmt_start : c + 1]),
        )
        return close + 1

    def _between_ok(self, a, b):
        toks = self.toks
        k = a
        ctor_zone = False
        while k < b:
            t = toks[k]
            if t.kind == KIND_PUNCT:
                if t.text == "(":
                    k = match_brace(toks, k) + 1
                    continue
                if t.text == ":":
                    ctor_zone = True
                elif t.text == "->":
                    return True  # trailing return type, rest is the type
                elif t.text not in ("&", "&&", ",", "::"):
                    return False
                k += 1
                continue
            if t.kind == KIND_IDENT:
                if ctor_zone or t.text in _BETWEEN_IDENTS:
                    k += 1
                    continue
                return False
            if t.kind == KIND_PP:
                k += 1
                continue
            if t.kind == "string" and k > a and toks[k - 1].text in (
                "asm", "__asm__",
            ):
                k += 1
                continue
            return False
        return True

    def _emit(self, kind, name, qualifier, start, end_line, signature):
        if isinstance(qualifier, list):
            qualifier = "::".join(q for q in qualifier if q)
        self.out.append(
            CodeEntity(kind, name, qualifier, self.path, (start, end_line),
                       signature)
        )


def _is_all_caps(name):
    return bool(name) and name[0].isalpha() and name.upper() == name \
        and any(ch.isupper() for ch in name)


def _split_commas(seq):
    parts = []
    cur = []
    depth = 0
    for t in seq:
        if t.kind == KIND_PUNCT:
            if t.text in "([{":
                depth += 1
            elif t.text in ")]}":
                depth -= 1
            elif t.text == "," and depth == 0:
                parts.append(cur)
                cur = []
                continue
        cur.append(t)
    if cur:
        parts.append(cur)
    return parts


def _declarator_name(seq):
    """Declared name of a declarator token run: handles `(*name)(..)`,
    `name[..]`, and plain `type name` shapes."""
    for k, t in enumerate(seq):
        if t.text == "(" and k + 1 < len(seq):
            m = k + 1
            stars = 0
            while m < len(seq) and seq[m].text in ("*", "&"):
                stars += 1
                m += 1
            if stars and m < len(seq) and seq[m].kind == KIND_IDENT:
                return seq[m].text
    for k, t in enumerate(seq):
        if t.text == "[" and k > 0 and seq[k - 1].kind == KIND_IDENT:
            return seq[k - 1].text
    for t in reversed(seq):
        if t.kind == KIND_IDENT:
            return t.text
    return ""


def _spell(tokens):
    """Compact one-line rendering of a token run (for signatures)."""
    out = []
    for t in tokens:
        if t.kind == KIND_PP:
            continue
        if out and t.kind == KIND_PUNCT and t.text in (
            ")", "]", ",", ";", "::", "*", "&",
        ):
            out.append(t.text)
        elif out and out[-1] in ("(", "[", "::", "*", "~"):
            out.append(t.text)
        else:
            if out:
                out.append(" ")
            out.append(t.text)
    return "".join(out).replace("( ", "(").replace("* ", "*")


# --- index construction ---


def build_index(
    root: str,
    suffixes=DEFAULT_SUFFIXES,
    max_result_chars: int = DEFAULT_RESULT_CHARS,
) -> SearchIndex:
    """Walk `root`, tokenize every C/C++ source file, and extract entities.

    Deterministic: files are visited in sorted order, entities appear in
    file order. Raises EmptyCodebase when no file with a matching suffix
    exists under root.
    """
    files: Dict[str, str] = {}
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith("."))
        for fn in sorted(filenames):
            if not fn.endswith(tuple(suffixes)):
                continue
            full = os.path.join(dirpath, fn)
            rel = os.path.relpath(full, root).replace(os.sep, "/")
            try:
                with open(full, encoding="utf-8", errors="replace") as fh:
                    files[rel] = fh.read()
            except OSError:
                continue
    if not files:
        raise EmptyCodebase(f"no C/C++ sources under {root!r}")

    index = SearchIndex(root=str(root), files=files, entities={},
                        max_result_chars=max_result_chars)
    for rel in sorted(files):
        for ent in _Scanner(tokenize(files[rel]), rel).scan():
            index.entities.setdefault(ent.name, []).append(ent)
            index.entity_list.append(ent)
    return index


def entity_text(index: SearchIndex, entity: CodeEntity) -> str:
    """Verbatim source lines of the entity (soundness: a contiguous
    slice of the indexed file)."""
    lines = index.files[entity.file].splitlines()
    lo, hi = entity.span
    return "\n".join(lines[lo - 1 : hi])


# --- lookups ---


def _match_qualified(index, name, kinds):
    parts = name.split("::")
    base = parts[-1]
    prefix = parts[:-1]
    found = []
    for ent in index.entities.get(base, []):
        if ent.kind not in kinds:
            continue
        if prefix:
            q = ent.qualifier.split("::") if ent.qualifier else []
            if q[-len(prefix):] != prefix:
                continue
        found.append(ent)
    return found


def _render(index, matches, header):
    pieces = []
    for ent in matches:
        pieces.append(
            f"// {ent.file}:{ent.span[0]}-{ent.span[1]} "
            f"[{ent.kind.value}] {ent.qualified_name()}\n"
            + entity_text(index, ent)
        )
    text = "\n\n".join(pieces)
    truncated = False
    limit = index.max_result_chars
    if len(text) > limit:
        total = len(text)
        text = text[:limit] + (
            f"\n... [result truncated: showing first {limit} of {total} chars]"
        )
        truncated = True
    return ToolResult(matches, text, header, truncated)


def search_function(index: SearchIndex, name: str) -> ToolResult:
    matches = _match_qualified(index, name, _SEARCHABLE_FUNCTIONS)
    if not matches:
        return ToolResult([], "", f"no function named {name!r} in the index")
    return _render(index, matches,
                   f"{len(matches)} definition(s) found for {name!r}")


def search_record(index: SearchIndex, name: str) -> ToolResult:
    matches = _match_qualified(index, name, _SEARCHABLE_TYPES)
    if not matches:
        return ToolResult(
            [], "", f"no record, enum, or typedef named {name!r} in the index"
        )
    return _render(index, matches,
                   f"{len(matches)} type definition(s) found for {name!r}")


def search_method_in_file(index: SearchIndex, name: str, file: str) -> ToolResult:
    rel = file.replace(os.sep, "/")
    candidates = [
        f for f in index.files
        if f == rel or f.endswith("/" + rel) or os.path.basename(f) == rel
    ]
    if not candidates:
        return ToolResult([], "", f"file {file!r} is not in the index")
    matches = [
        e
        for e in _match_qualified(index, name, _SEARCHABLE_FUNCTIONS)
        if e.file in candidates
    ]
    if not matches:
        return ToolResult(
            [], "", f"no function named {name!r} in file {file!r}"
        )
    return _render(index, matches,
                   f"{len(matches)} definition(s) of {name!r} in {file!r}")


def snippet_at(index: SearchIndex, file: str, line: int, radius: int = 10) -> str:
    """Code around file:line -- the enclosing function when one covers
    the line, otherwise a +/-radius window."""
    rel = file.replace(os.sep, "/")
    if rel not in index.files:
        hit = next(
            (f for f in index.files if f.endswith("/" + rel)), None
        )
        if hit is None:
            raise FileNotIndexed(file)
        rel = hit
    lines = index.files[rel].splitlines()
    if line < 1 or line > max(len(lines), 1):
        raise LineOutOfRange(f"{file}:{line}")
    for ent in index.entity_list:
        if ent.file != rel or ent.kind not in _SEARCHABLE_FUNCTIONS:
            continue
        if ent.span[0] <= line <= ent.span[1]:
            return f"// {rel}:{line}\n" + entity_text(index, ent)
    lo = max(1, line - radius)
    hi = min(len(lines), line + radius)
    return f"// {rel}:{line}\n" + "\n".join(lines[lo - 1 : hi])


def search_snippet_at(index: SearchIndex, file: str, line: int) -> ToolResult:
    try:
        text = snippet_at(index, file, line)
    except (FileNotIndexed, LineOutOfRange) as exc:
        return ToolResult([], "", f"cannot read snippet: {exc}")
    limit = index.max_result_chars
    truncated = len(text) > limit
    if truncated:
        total = len(text)
        text = text[:limit] + (
            f"\n... [result truncated: showing first {limit} of {total} chars]"
        )
    return ToolResult([], text, f"snippet at {file}:{line}", truncated)


# Exposed tool surface. Deliberately small: no file-scoped record search,
# mirroring the constrained API the retrieval agent is allowed to use.
TOOL_SPECS = {
    "search_function": {
        "args": {"name": str},
        "doc": "Find function/method definitions by name; qualified "
               "names like A::B are matched across namespaces and records.",
    },
    "search_record": {
        "args": {"name": str},
        "doc": "Find a struct/class/union/enum/typedef definition by name.",
    },
    "search_method_in_file": {
        "args": {"name": str, "file": str},
        "doc": "Find a function definition restricted to one file.",
    },
    "search_snippet_at": {
        "args": {"file": str, "line": int},
        "doc": "Show the code around file:line (the enclosing function "
               "when there is one).",
    },
}


def execute_tool(index: SearchIndex, call: ToolCall) -> ToolResult:
    """Dispatch a tool call against the index.

    Raises UnknownTool / MalformedArgs for calls that do not fit the tool
    surface; lookup misses come back as ordinary results whose message
    explains the miss.
    """
    spec = TOOL_SPECS.get(call.tool)
    if spec is None:
        raise UnknownTool(call.tool)
    if not isinstance(call.args, dict):
        raise MalformedArgs(f"{call.tool}: args must be a mapping")
    args = {}
    for key, typ in spec["args"].items():
        if key not in call.args:
            raise MalformedArgs(f"{call.tool}: missing argument {key!r}")
        val = call.args[key]
        if typ is int:
            try:
                val = int(val)
            except (TypeError, ValueError):
                raise MalformedArgs(f"{call.tool}: {key!r} must be an integer")
        elif not isinstance(val, str):
            raise MalformedArgs(f"{call.tool}: {key!r} must be a string")
        args[key] = val

    if call.tool == "search_function":
        return search_function(index, args["name"])
    if call.tool == "search_record":
        return search_record(index, args["name"])
    if call.tool == "search_method_in_file":
        return search_method_in_file(index, args["name"], args["file"])
    return search_snippet_at(index, args["file"], args["line"])


def dump_entities(index: SearchIndex) -> str:
    """Human-readable entity table (the `index` CLI subcommand)."""
    rows = [
        f"{e.kind.value:<13} {e.qualified_name():<40} "
        f"{e.file}:{e.span[0]}-{e.span[1]}"
        for e in index.entity_list
    ]
    return "\n".join(rows)
