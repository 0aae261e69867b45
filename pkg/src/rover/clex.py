"""Minimal C/C++ lexer.

Tokenizes source text at the syntax level, without preprocessing:
comments are dropped, string/char literals become single tokens, and
each preprocessor directive (including backslash continuations) is
swallowed into one `pp` token so stray braces inside macros never
corrupt brace matching downstream.
"""

import re
from dataclasses import dataclass
from typing import List

KIND_IDENT = "ident"
KIND_NUMBER = "number"
KIND_STRING = "string"
KIND_CHAR = "char"
KIND_PUNCT = "punct"
KIND_PP = "pp"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int

    def __repr__(self):  # compact, the default is painful in test diffs
        return f"Token({self.kind!r}, {self.text!r}, L{self.line})"


_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
# C "pp-number": a digit (maybe after a dot), then identifier chars, dots,
# digit separators, and sign characters when they follow an exponent letter.
# Deliberately loose; it keeps 0x1fULL and 1.5e-3 whole without a grammar.
_NUMBER_RE = re.compile(r"\.?\d(?:[eEpP][+-]|[\w.'])*")

# Longest-first so `>>=` wins over `>>` wins over `>`.
_PUNCTS = sorted(
    [
        "<<=", ">>=", "...", "->*", "::", "->", "++", "--", "<<", ">>",
        "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
        "&=", "|=", "^=", "##", ".*",
        "{", "}", "(", ")", "[", "]", ";", ",", ".", ":", "?", "~", "!",
        "+", "-", "*", "/", "%", "<", ">", "=", "&", "|", "^", "#", "@",
    ],
    key=len,
    reverse=True,
)


def tokenize(text: str) -> List[Token]:
    toks: List[Token] = []
    i = 0
    n = len(text)
    line = 1
    at_line_start = True

    def bump(upto):
        nonlocal line, i
        line += text.count("\n", i, upto)
        i = upto

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            at_line_start = True
            continue
        if c in " \t\r\f\v":
            i += 1
            continue

        if c == "/" and i + 1 < n:
            if text[i + 1] == "/":
                j = text.find("\n", i)
                bump(n if j < 0 else j)
                continue
            if text[i + 1] == "*":
                j = text.find("*/", i + 2)
                bump(n if j < 0 else j + 2)
                continue

        if c == "#" and at_line_start:
            # Swallow the whole directive, honoring backslash continuations.
            start = i
            j = i
            while j < n:
                k = text.find("\n", j)
                if k < 0:
                    j = n
                    break
                back = k - 1
                while back >= start and text[back] in " \t\r":
                    back -= 1
                if back >= start and text[back] == "\\":
                    j = k + 1
                    continue
                j = k
                break
            first = text[start:j].split(None, 1)[0] if text[start:j].split() else "#"
            toks.append(Token(KIND_PP, first, line))
            bump(j)
            continue

        at_line_start = False

        if c in "\"'" or (
            c in "LuUR" and _string_prefix(text, i)
        ):
            j, kind = _scan_literal(text, i)
            toks.append(Token(kind, text[i:j], line))
            bump(j)
            continue

        m = _IDENT_RE.match(text, i)
        if m:
            toks.append(Token(KIND_IDENT, m.group(), line))
            i = m.end()
            continue

        m = _NUMBER_RE.match(text, i)
        if m and (c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit())):
            toks.append(Token(KIND_NUMBER, m.group(), line))
            i = m.end()
            continue

        for p in _PUNCTS:
            if text.startswith(p, i):
                toks.append(Token(KIND_PUNCT, p, line))
                i += len(p)
                break
        else:
            i += 1  # stray byte, drop it
    return toks


def _string_prefix(text, i):
    """True when position i starts a prefixed literal like L"..", u8'..', R"(..".."""
    m = re.match(r"(?:u8|[LuU])?R?[\"']", text[i : i + 4])
    return bool(m) and text[i] in "LuUR"


def _scan_literal(text, i):
    n = len(text)
    j = i
    while j < n and text[j] not in "\"'":
        j += 1
    quote = text[j]
    raw = j > i and text[j - 1] == "R"
    kind = KIND_STRING if quote == '"' else KIND_CHAR
    if raw and quote == '"':
        m = re.match(r'R"([^()\s\\]*)\(', text[j - 1 :])
        if m:
            closer = ")" + m.group(1) + '"'
            end = text.find(closer, j + 1)
            return (n if end < 0 else end + len(closer)), kind
    j += 1
    while j < n:
        if text[j] == "\\":
            j += 2
            continue
        if text[j] == quote:
            return j + 1, kind
        if text[j] == "\n":
            return j, kind  # unterminated, stop at the line break
        j += 1
    return n, kind


def match_brace(tokens: List[Token], open_idx: int) -> int:
    """Index of the punct closing the bracket at open_idx, or len(tokens)."""
    pairs = {"{": "}", "(": ")", "[": "]"}
    opener = tokens[open_idx].text
    closer = pairs[opener]
    depth = 0
    for k in range(open_idx, len(tokens)):
        t = tokens[k]
        if t.kind != KIND_PUNCT:
            continue
        if t.text == opener:
            depth += 1
        elif t.text == closer:
            depth -= 1
            if depth == 0:
                return k
    return len(tokens)
