"""Patch similarity scoring for C/C++ snippets.

The score blends four equally weighted views of a candidate snippet
against a reference snippet:

  * token n-gram precision (BLEU-style, n = 1..4, brevity penalty),
  * the same with language keywords weighted more heavily,
  * statement-tree production overlap, and
  * def-use pair overlap.

Identical inputs score exactly 1.0.  When the statement tree cannot be
built (unbalanced braces, truncated snippet) the two structural
components fall back to plain token-set overlap and the result is
flagged ``degraded``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Sequence, Set, Tuple

from ..clex import KIND_IDENT, KIND_PP, KIND_PUNCT, Token, match_brace, tokenize
from ..errors import EmptyInput

# Keywords shared by C and the C++ subset we care about, plus the usual
# fixed-width aliases.  Used both for n-gram weighting and to keep type
# names out of def-use pairs.
KEYWORDS = frozenset(
    """
    alignas alignof auto bool break case catch char class const constexpr
    const_cast continue default delete do double dynamic_cast else enum
    explicit extern false float for friend goto if inline int long
    mutable namespace new noexcept nullptr operator private protected
    public register reinterpret_cast restrict return short signed sizeof
    static static_assert static_cast struct switch template this throw
    true try typedef typeid typename union unsigned using virtual void
    volatile wchar_t while
    int8_t int16_t int32_t int64_t uint8_t uint16_t uint32_t uint64_t
    size_t ssize_t ptrdiff_t intptr_t uintptr_t
    """.split()
)

KEYWORD_WEIGHT = 5.0
MAX_NGRAM = 4

_ASSIGN_OPS = frozenset(
    ("=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=")
)
_CONTROL = frozenset(
    ("if", "else", "for", "while", "do", "switch", "case", "default",
     "return", "break", "continue", "goto")
)


@dataclass
class CodeBleuScore:
    ngram: float
    weighted_ngram: float
    ast_match: float
    dataflow_match: float
    total: float
    degraded: bool = False

    def to_dict(self) -> dict:
        return {
            "ngram": self.ngram,
            "weighted_ngram": self.weighted_ngram,
            "ast_match": self.ast_match,
            "dataflow_match": self.dataflow_match,
            "total": self.total,
            "degraded": self.degraded,
        }


def metric_tokens(code: str) -> List[str]:
    """Token texts used for n-gram scoring; preprocessor lines collapse
    to their directive word."""
    return [tok.text for tok in tokenize(code)]


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
    )


def _token_weight(token: str) -> float:
    return KEYWORD_WEIGHT if token in KEYWORDS else 1.0


def _ngram_weight(gram: Tuple[str, ...]) -> float:
    return max(_token_weight(tok) for tok in gram)


def _bleu(
    candidate: Sequence[str], reference: Sequence[str], weighted: bool
) -> float:
    """Modified n-gram precision with brevity penalty.

    Orders with no candidate n-grams are skipped rather than zeroed;
    orders above 1 get add-one smoothing so a single missing 4-gram does
    not collapse the score.
    """
    log_sum = 0.0
    used = 0
    for n in range(1, MAX_NGRAM + 1):
        cand = _ngrams(candidate, n)
        if not cand:
            continue
        ref = _ngrams(reference, n)
        if weighted:
            matched = sum(
                min(count, ref[gram]) * _ngram_weight(gram)
                for gram, count in cand.items()
            )
            total = sum(
                count * _ngram_weight(gram) for gram, count in cand.items()
            )
        else:
            matched = float(
                sum(min(count, ref[gram]) for gram, count in cand.items())
            )
            total = float(sum(cand.values()))
        if n > 1:
            matched += 1.0
            total += 1.0
        if matched == 0.0:
            return 0.0
        log_sum += math.log(matched / total)
        used += 1
    if used == 0:
        return 0.0
    precision = math.exp(log_sum / used)
    if len(candidate) >= len(reference):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(reference) / len(candidate))
    return brevity * precision


class _TreeError(Exception):
    pass


def _body_tokens(tokens: List[Token]) -> List[Token]:
    """Tokens inside the outermost brace pair when the snippet is a
    whole function; the snippet itself otherwise."""
    for i, tok in enumerate(tokens):
        if tok.kind == KIND_PUNCT and tok.text == "{":
            close = match_brace(tokens, i)
            if close >= len(tokens):
                raise _TreeError("unbalanced braces")
            # Only treat it as a function body when the brace pair spans
            # the rest of the snippet (allowing a trailing semicolon).
            tail = [t for t in tokens[close + 1 :] if t.text != ";"]
            if not tail:
                return tokens[i + 1 : close]
            break
    return tokens


def _stmt_label(stmt: List[Token]) -> str:
    words = [t for t in stmt if t.kind != KIND_PP]
    if not words:
        return "empty"
    first = words[0].text
    if first in _CONTROL:
        return first
    depth = 0
    for tok in words:
        if tok.kind != KIND_PUNCT:
            continue
        if tok.text in ("(", "["):
            depth += 1
        elif tok.text in (")", "]"):
            depth -= 1
        elif depth == 0 and tok.text in _ASSIGN_OPS:
            return "assign"
    if (
        len(words) >= 2
        and words[0].kind == KIND_IDENT
        and words[0].text not in KEYWORDS
        and words[1].text == "("
    ):
        return "call"
    return "expr"


def _productions(tokens: List[Token]) -> Counter:
    """Statement-tree productions as a multiset of strings.

    Every block contributes ``block(<label>,...)`` over its statement
    labels, and every statement that owns a nested block contributes
    ``<label>(block)``.  Raises _TreeError on unbalanced braces.
    """
    prods: Counter = Counter()

    def walk(toks: List[Token]) -> None:
        labels: List[str] = []
        stmt: List[Token] = []
        i = 0
        while i < len(toks):
            tok = toks[i]
            if tok.kind == KIND_PUNCT and tok.text == "{":
                close = match_brace(toks, i)
                if close >= len(toks):
                    raise _TreeError("unbalanced braces")
                walk(toks[i + 1 : close])
                label = _stmt_label(stmt) if stmt else "block"
                labels.append(label)
                prods[f"{label}(block)"] += 1
                stmt = []
                i = close + 1
                continue
            if tok.kind == KIND_PUNCT and tok.text == "}":
                raise _TreeError("unbalanced braces")
            if tok.kind == KIND_PUNCT and tok.text == ";":
                if stmt:
                    labels.append(_stmt_label(stmt))
                    stmt = []
                i += 1
                continue
            stmt.append(tok)
            i += 1
        if stmt:
            labels.append(_stmt_label(stmt))
        prods[f"block({','.join(labels)})"] += 1

    walk(_body_tokens(tokens))
    return prods


def _multiset_overlap(cand: Counter, ref: Counter) -> float:
    """Fraction of the reference multiset reproduced by the candidate."""
    total = sum(ref.values())
    if total == 0:
        return 1.0 if sum(cand.values()) == 0 else 0.0
    matched = sum(min(count, ref[item]) for item, count in cand.items())
    return matched / total


def _def_use_pairs(tokens: List[Token]) -> Set[Tuple[str, str]]:
    """(used-identifier, defined-identifier) pairs, one set per snippet.

    A statement with a top-level assignment defines its first
    non-keyword left-hand identifier; every other identifier in the
    statement counts as a use feeding that definition.  Compound
    assignments also pair the target with itself.
    """
    pairs: Set[Tuple[str, str]] = set()

    def statement(stmt: List[Token]) -> None:
        depth = 0
        op_idx = -1
        op_text = ""
        for idx, tok in enumerate(stmt):
            if tok.kind != KIND_PUNCT:
                continue
            if tok.text in ("(", "["):
                depth += 1
            elif tok.text in (")", "]"):
                depth -= 1
            elif depth == 0 and tok.text in _ASSIGN_OPS:
                op_idx = idx
                op_text = tok.text
                break
        if op_idx < 0:
            return
        lhs = [
            t.text
            for t in stmt[:op_idx]
            if t.kind == KIND_IDENT and t.text not in KEYWORDS
        ]
        rhs = [
            t.text
            for t in stmt[op_idx + 1 :]
            if t.kind == KIND_IDENT and t.text not in KEYWORDS
        ]
        if not lhs:
            return
        target = lhs[0]
        uses = set(lhs[1:]) | set(rhs)
        if op_text != "=":
            uses.add(target)
        for use in uses:
            pairs.add((use, target))

    stmt: List[Token] = []
    for tok in tokens:
        if tok.kind == KIND_PUNCT and tok.text in (";", "{", "}"):
            if stmt:
                statement(stmt)
                stmt = []
            continue
        stmt.append(tok)
    if stmt:
        statement(stmt)
    return pairs


def _set_overlap(cand: Set, ref: Set) -> float:
    if not ref:
        return 1.0 if not cand else 0.0
    return len(cand & ref) / len(ref)


def _token_set_fallback(cand: Sequence[str], ref: Sequence[str]) -> float:
    cset, rset = set(cand), set(ref)
    if not rset:
        return 1.0 if not cset else 0.0
    return len(cset & rset) / len(rset)


def codebleu(
    candidate: str,
    reference: str,
    weights: Tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
) -> CodeBleuScore:
    """Score a candidate snippet against a reference snippet.

    Raises ``EmptyInput`` when either snippet has no tokens.
    """
    if not candidate.strip() or not reference.strip():
        raise EmptyInput("codebleu needs two non-empty snippets")
    cand_toks = tokenize(candidate)
    ref_toks = tokenize(reference)
    cand_texts = [t.text for t in cand_toks]
    ref_texts = [t.text for t in ref_toks]
    if not cand_texts or not ref_texts:
        raise EmptyInput("codebleu needs two non-empty snippets")

    ngram = _bleu(cand_texts, ref_texts, weighted=False)
    weighted = _bleu(cand_texts, ref_texts, weighted=True)

    degraded = False
    try:
        ast_match = _multiset_overlap(
            _productions(cand_toks), _productions(ref_toks)
        )
        dataflow = _set_overlap(
            _def_use_pairs(cand_toks), _def_use_pairs(ref_toks)
        )
    except _TreeError:
        degraded = True
        fallback = _token_set_fallback(cand_texts, ref_texts)
        ast_match = fallback
        dataflow = fallback

    w1, w2, w3, w4 = weights
    total = w1 * ngram + w2 * weighted + w3 * ast_match + w4 * dataflow
    return CodeBleuScore(
        ngram=ngram,
        weighted_ngram=weighted,
        ast_match=ast_match,
        dataflow_match=dataflow,
        total=total,
        degraded=degraded,
    )
