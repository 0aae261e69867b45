"""Type graph and variable-scope extraction for patch prompts.

Builds a graph of record/union/enum/typedef declarations from the code
index, resolves typedef chains, and recovers the variables visible
inside one function (parameters, then locals, in declaration order) so
the patching model can be told exactly which names exist and what they
really are under the aliases.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from .clex import KIND_IDENT, KIND_PP, KIND_PUNCT, Token, match_brace, tokenize
from .errors import CyclicAlias, FunctionNotFound
from .index import CodeEntity, EntityKind, SearchIndex, entity_text


class TypeKind(Enum):
    RECORD = "RecordType"
    UNION = "UnionType"
    ENUM = "EnumType"
    ALIAS = "Alias"
    PRIMITIVE = "Primitive"
    POINTER = "PointerTo"
    ARRAY = "ArrayOf"


@dataclass
class TypeNode:
    kind: TypeKind
    name: str  # display spelling: "struct param", "param_t", "int"
    underlying: Optional["TypeNode"] = None  # alias target / element type
    external: bool = False  # referenced but not defined in the tree
    variants: List["TypeNode"] = field(default_factory=list)

    def display(self) -> str:
        if self.kind == TypeKind.POINTER:
            return (self.underlying.display() if self.underlying else "?") + "*"
        if self.kind == TypeKind.ARRAY:
            return (self.underlying.display() if self.underlying else "?") + "[]"
        return self.name + (" (external)" if self.external else "")


@dataclass
class TypeGraph:
    nodes: Dict[str, TypeNode] = field(default_factory=dict)

    def lookup(self, spelling: str) -> Optional[TypeNode]:
        node = self.nodes.get(spelling)
        if node is not None:
            return node
        # bare tag fallback: "param" finds "struct param" when unambiguous
        hits = [
            n for key, n in self.nodes.items()
            if key.split(" ")[-1] == spelling
        ]
        return hits[0] if len(hits) == 1 else None


class Origin(Enum):
    PARAMETER = "Parameter"
    LOCAL = "Local"
    FILE_STATIC_VISIBLE = "FileStaticVisible"


@dataclass
class VariableBinding:
    name: str
    type_spelling: str  # as declared, e.g. "param_t*"
    node: Optional[TypeNode]  # base type node (pointers/arrays peeled)
    origin: Origin
    shadows: bool = False


_PRIMITIVE_SPELLINGS = {
    "void", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "bool", "_Bool", "size_t", "ssize_t", "ptrdiff_t", "wchar_t",
    "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t", "uint16_t",
    "uint32_t", "uint64_t", "intptr_t", "uintptr_t", "intmax_t", "uintmax_t",
}

_DECL_QUALIFIERS = {"const", "volatile", "static", "register", "restrict",
                    "inline", "extern", "__restrict", "__restrict__"}


def _register(graph: TypeGraph, key: str, node: TypeNode):
    if key in graph.nodes:
        graph.nodes[key].variants.append(node)
    else:
        graph.nodes[key] = node


def build_type_graph(index: SearchIndex) -> TypeGraph:
    """Two passes: create shells for every record/enum/typedef entity,
    then parse typedef underlying types (which may reference nodes from
    any file). Duplicate names across files become variants."""
    graph = TypeGraph()
    typedef_entities: List[CodeEntity] = []

    for ent in index.entity_list:
        if ent.kind == EntityKind.RECORD:
            kw = ent.signature.split(" ", 1)[0]
            kind = TypeKind.UNION if kw == "union" else TypeKind.RECORD
            display = f"{kw} {ent.name}" if kw in ("struct", "union") else ent.name
            # anonymous-typedef records were emitted under the alias name;
            # their signature spells the kw + alias, register bare.
            key = display if kw in ("struct", "union") else ent.name
            _register(graph, key, TypeNode(kind, display))
        elif ent.kind == EntityKind.ENUM:
            display = f"enum {ent.name}"
            _register(graph, display, TypeNode(TypeKind.ENUM, display))
        elif ent.kind == EntityKind.TYPEDEF:
            node = TypeNode(TypeKind.ALIAS, ent.name)
            _register(graph, ent.name, node)
            typedef_entities.append(ent)

    for ent in typedef_entities:
        node = graph.nodes.get(ent.name)
        if node is None or node.kind != TypeKind.ALIAS:
            continue
        node.underlying = _parse_underlying(graph, index, ent)
    return graph


def _parse_underlying(graph, index, ent) -> Optional[TypeNode]:
    toks = [t for t in tokenize(entity_text(index, ent))
            if t.kind != KIND_PP]
    start = next(
        (k for k, t in enumerate(toks) if t.text == "typedef"), None
    )
    if start is None:  # `using X = ...`
        eq = next((k for k, t in enumerate(toks) if t.text == "="), None)
        seg = toks[eq + 1 :] if eq is not None else []
        return _node_for(graph, seg, declared=None)
    seg = toks[start + 1 :]
    if seg and seg[-1].text == ";":
        seg = seg[:-1]

    # typedef with a body: underlying is the tagged (or primary) record
    open_idx = next((k for k, t in enumerate(seg) if t.text == "{"), None)
    if open_idx is not None:
        kw = next(
            (t.text for t in seg
             if t.text in ("struct", "class", "union", "enum")),
            "struct",
        )
        kwpos = next(
            (k for k, t in enumerate(seg) if t.text == kw), 0
        )
        tag = None
        if kwpos + 1 < len(seg) and seg[kwpos + 1].kind == KIND_IDENT:
            tag = seg[kwpos + 1].text
        if tag:
            key = f"{kw} {tag}" if kw != "class" else tag
            hit = graph.nodes.get(key) or graph.lookup(tag)
            if hit:
                return hit
        # anonymous: the record node was registered under the first alias
        close = match_brace(seg, open_idx)
        first = _first_ident(seg[close + 1 :])
        if first and first != ent.name:
            return graph.nodes.get(first)
        return None  # this entity IS the record; nothing to chain to

    # plain alias: find this entity's declarator among comma parts
    part = None
    for cand in _split_top_commas(seg):
        if any(t.kind == KIND_IDENT and t.text == ent.name for t in cand):
            part = cand
            break
    if part is None:
        part = seg
    return _node_for(graph, part, declared=ent.name)


def _first_ident(seq):
    for t in seq:
        if t.kind == KIND_IDENT:
            return t.text
    return None


def _split_top_commas(seq):
    parts, cur, depth = [], [], 0
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


def _node_for(graph, part, declared):
    """TypeNode for a declarator token run, pointers and arrays wrapped,
    the declared name itself excluded."""
    # function pointer: typedef int (*fp)(args)
    for k, t in enumerate(part):
        if t.text == "(" and k + 1 < len(part) and part[k + 1].text == "*":
            elem = TypeNode(TypeKind.PRIMITIVE, "<function>", external=True)
            return TypeNode(TypeKind.POINTER, "", underlying=elem)

    base = []
    stars = 0
    array = False
    for t in part:
        if t.kind == KIND_PUNCT:
            if t.text == "*":
                stars += 1
            elif t.text == "[":
                array = True
            continue
        if t.kind != KIND_IDENT:
            continue
        if declared is not None and t.text == declared and base:
            continue
        if t.text in _DECL_QUALIFIERS:
            continue
        base.append(t.text)
    if declared is None and base and stars == 0 and not array:
        pass  # `using X = y` keeps full base
    elif declared is not None and base and base[-1] == declared:
        base = base[:-1]
    spelling = " ".join(base)
    node = _base_node(graph, spelling)
    for _ in range(stars):
        node = TypeNode(TypeKind.POINTER, "", underlying=node)
    if array:
        node = TypeNode(TypeKind.ARRAY, "", underlying=node)
    return node


def _base_node(graph, spelling):
    if not spelling:
        return None
    hit = graph.nodes.get(spelling) or graph.lookup(spelling)
    if hit:
        return hit
    words = spelling.split(" ")
    if all(w in _PRIMITIVE_SPELLINGS or w in _DECL_QUALIFIERS for w in words):
        node = TypeNode(TypeKind.PRIMITIVE, spelling)
    elif words[0] in ("struct", "class"):
        node = TypeNode(TypeKind.RECORD, spelling, external=True)
    elif words[0] == "union":
        node = TypeNode(TypeKind.UNION, spelling, external=True)
    elif words[0] == "enum":
        node = TypeNode(TypeKind.ENUM, spelling, external=True)
    else:
        node = TypeNode(TypeKind.PRIMITIVE, spelling, external=True)
    graph.nodes[spelling] = node
    return node


def resolve(graph: TypeGraph, name_or_node) -> TypeNode:
    """Follow an alias chain to its non-alias end.

    Raises CyclicAlias on a typedef loop and FunctionNotFound -- well,
    KeyError semantics -- when a string name is unknown.
    """
    node = name_or_node
    if isinstance(node, str):
        found = graph.lookup(node)
        if found is None:
            raise KeyError(name_or_node)
        node = found
    seen = set()
    while node is not None and node.kind == TypeKind.ALIAS:
        if id(node) in seen:
            raise CyclicAlias(node.name)
        seen.add(id(node))
        if node.underlying is None:
            node = TypeNode(TypeKind.PRIMITIVE, node.name, external=True)
            break
        node = node.underlying
    return node


# --- variable scope extraction ---


def variables_in_scope(
    index: SearchIndex,
    graph: TypeGraph,
    function,
    include_file_statics: bool = False,
) -> List[VariableBinding]:
    """Parameters (declaration order) then locals (declaration order)
    of one function, purely syntactically. `function` may be a
    CodeEntity or a name to look up.

    Declaration statements are recognized by their leading tokens: a
    primitive spelling, struct/union/enum + tag, or a name present in
    the type graph. Shadowed names yield both bindings, the inner one
    flagged.
    """
    if isinstance(function, str):
        cands = [
            e for e in index.entities.get(function.rsplit("::", 1)[-1], [])
            if e.kind in (EntityKind.FUNCTION, EntityKind.METHOD,
                          EntityKind.MACRO_FUNCTION)
        ]
        if not cands:
            raise FunctionNotFound(function)
        function = cands[0]

    toks = [t for t in tokenize(entity_text(index, function))
            if t.kind != KIND_PP]
    out: List[VariableBinding] = []
    declared_stack: List[set] = [set()]

    # parameter list: the group following the ident spelled like the name
    open_idx = None
    base_name = function.name.lstrip("~")
    for k, t in enumerate(toks):
        if (
            t.kind == KIND_IDENT
            and t.text == base_name
            and k + 1 < len(toks)
            and toks[k + 1].text == "("
        ):
            open_idx = k + 1
            break
    if open_idx is None:
        open_idx = next(
            (k for k, t in enumerate(toks) if t.text == "("), None
        )
    body_open = None
    params_close = None
    if open_idx is not None:
        params_close = match_brace(toks, open_idx)
        for part in _split_top_commas(toks[open_idx + 1 : params_close]):
            b = _param_binding(graph, part)
            if b:
                declared_stack[0].add(b.name)
                out.append(b)
        body_open = next(
            (k for k in range(params_close, len(toks))
             if toks[k].text == "{"),
            None,
        )
    if body_open is not None:
        body_close = match_brace(toks, body_open)
        _walk_block(graph, toks, body_open + 1, body_close, declared_stack, out)

    if include_file_statics:
        body_names = {t.text for t in toks if t.kind == KIND_IDENT}
        for b in _file_statics(graph, index, function.file):
            if b.name in body_names and all(
                b.name != o.name for o in out
            ):
                out.append(b)
    return out


def _param_binding(graph, part):
    part = [t for t in part if t.kind != KIND_PP]
    if not part:
        return None
    if len(part) == 1 and part[0].text in ("void", "..."):
        return None
    if part[0].text == "...":
        return None
    name = _declared_name(part)
    if not name or name in _PRIMITIVE_SPELLINGS:
        return None
    spelling, node = _spell_type(graph, part, name)
    return VariableBinding(name, spelling, node, Origin.PARAMETER)


def _declared_name(part):
    for k, t in enumerate(part):
        if t.text == "(" and k + 1 < len(part) and part[k + 1].text == "*":
            m = k + 1
            while m < len(part) and part[m].text in ("*", "&"):
                m += 1
            if m < len(part) and part[m].kind == KIND_IDENT:
                return part[m].text
    name = None
    for k, t in enumerate(part):
        if t.text in ("[", "="):
            break
        if t.kind == KIND_IDENT and t.text not in _DECL_QUALIFIERS:
            name = t.text
    return name


def _spell_type(graph, part, name):
    """Type spelling (declared form, e.g. `const param_t*`) and base node.

    Storage-class words (static, extern, ...) are dropped: they say nothing
    about the value's type. const/volatile are kept in the spelling because
    a patch that writes through a const pointer will not compile, but the
    graph lookup still uses the bare base so `const char*` resolves `char`.
    """
    base = []
    quals = []
    stars = 0
    array = False
    seen_name = False
    for t in part:
        if t.kind == KIND_PUNCT:
            if t.text == "*" and not seen_name:
                stars += 1
            elif t.text == "[":
                array = True
            elif t.text == "=":
                break
            continue
        if t.kind != KIND_IDENT:
            continue
        if t.text == name and not seen_name and base:
            seen_name = True
            continue
        if t.text in _DECL_QUALIFIERS:
            if t.text in ("const", "volatile") and not seen_name and not stars:
                quals.append(t.text)
            continue
        if not seen_name:
            base.append(t.text)
    spelling = " ".join(quals + base) + "*" * stars + ("[]" if array else "")
    node = _base_node(graph, " ".join(base)) if base else None
    return spelling, node


_STMT_KEYWORDS = {
    "return", "goto", "break", "continue", "if", "else", "while", "do",
    "switch", "case", "default", "for", "sizeof", "typedef",
}


def _is_decl_start(graph, tok, nxt):
    w = tok.text
    if w in _STMT_KEYWORDS:
        return False
    if w in _PRIMITIVE_SPELLINGS or w in _DECL_QUALIFIERS:
        return True
    if w in ("struct", "union", "enum"):
        return nxt is not None and nxt.kind == KIND_IDENT
    node = graph.nodes.get(w)
    return node is not None and node.kind in (
        TypeKind.ALIAS, TypeKind.RECORD, TypeKind.UNION, TypeKind.ENUM,
    )


def _walk_block(graph, toks, start, end, declared_stack, out):
    j = start
    stmt: List[Token] = []
    marker = Token(KIND_PUNCT, "()", 0)
    while j < end:
        t = toks[j]
        if t.kind == KIND_PUNCT:
            if t.text == "{":
                close = match_brace(toks, j)
                if any(x.kind == KIND_PUNCT and x.text == "=" for x in stmt):
                    # brace initializer `str s = {0};` -- not a block
                    j = close + 1
                    continue
                declared_stack.append(set())
                _walk_block(graph, toks, j + 1, close, declared_stack, out)
                declared_stack.pop()
                j = close + 1
                stmt = []
                continue
            if t.text == ";":
                _maybe_local(graph, stmt, declared_stack, out)
                stmt = []
                j += 1
                continue
            if t.text == "(":
                close = match_brace(toks, j)
                if stmt and stmt[0].text == "for":
                    header = toks[j + 1 : close]
                    first = header
                    for k, ht in enumerate(header):
                        if ht.text == ";":
                            first = header[:k]
                            break
                    declared_stack.append(set())
                    _maybe_local(graph, first, declared_stack, out)
                    # the loop body brace that follows shares this scope;
                    # close enough for shadow flagging
                    declared_stack.pop()
                    stmt = []
                else:
                    stmt.append(marker)
                j = close + 1
                continue
        stmt.append(t)
        j += 1
    _maybe_local(graph, stmt, declared_stack, out)


def _maybe_local(graph, stmt, declared_stack, out):
    stmt = [t for t in stmt if t.kind != KIND_PP]
    if len(stmt) < 2 or stmt[0].kind != KIND_IDENT:
        return
    nxt = stmt[1] if len(stmt) > 1 else None
    if not _is_decl_start(graph, stmt[0], nxt):
        return
    # second token sanity: `param_t make_param(...)` is a prototype, and
    # `x * y;` where x names a type is a statement-vs-decl ambiguity we
    # resolve in favor of the declaration, as a compiler would.
    base_spelling = None
    base_node = None
    for pos, part in enumerate(_split_top_commas(stmt)):
        name = _declared_name(part)
        if not name or name in _PRIMITIVE_SPELLINGS or name in _DECL_QUALIFIERS:
            continue
        idx = next(
            (k for k, t in enumerate(part)
             if t.kind == KIND_IDENT and t.text == name),
            None,
        )
        if idx is not None and idx + 1 < len(part) and part[idx + 1].text == "()":
            continue  # function declaration or call-style initializer
        if pos == 0:
            if idx is not None and idx == 0:
                continue  # no base type before the name
            spelling, node = _spell_type(graph, part, name)
            base_spelling = spelling.rstrip("*").replace("[]", "")
            base_node = node
        else:
            # `char *a, *b;` -- later declarators reuse the first base
            stars = sum(1 for t in part if t.text == "*")
            array = any(t.text == "[" for t in part)
            spelling = (base_spelling or "") + "*" * stars + (
                "[]" if array else ""
            )
            node = base_node
        if not spelling:
            continue
        shadows = any(name in scope for scope in declared_stack)
        declared_stack[-1].add(name)
        out.append(
            VariableBinding(name, spelling, node, Origin.LOCAL, shadows)
        )


def _file_statics(graph, index, path):
    toks = [t for t in tokenize(index.files[path]) if t.kind != KIND_PP]
    out = []
    j = 0
    stmt: List[Token] = []
    while j < len(toks):
        t = toks[j]
        if t.kind == KIND_PUNCT and t.text in "({[":
            close = match_brace(toks, j)
            if t.text == "(":
                stmt.append(Token(KIND_PUNCT, "()", 0))
            j = close + 1
            continue
        if t.kind == KIND_PUNCT and t.text == ";":
            if stmt and stmt[0].text == "static":
                rest = stmt[1:]
                if rest and not any(tok.text == "()" for tok in rest):
                    name = _declared_name(rest)
                    if name and _is_decl_start(
                        graph, rest[0], rest[1] if len(rest) > 1 else None
                    ):
                        spelling, node = _spell_type(graph, rest, name)
                        out.append(
                            VariableBinding(
                                name, spelling, node,
                                Origin.FILE_STATIC_VISIBLE,
                            )
                        )
            stmt = []
            j += 1
            continue
        stmt.append(t)
        j += 1
    return out


# --- prompt rendering ---

_PROMPT_PREAMBLE = (
    "To ensure the patch is compilable, please use only existing variables "
    "at the specified bug locations.\n"
    "Here's a list of available variables and their types:"
)

_PROMPT_RULES = (
    "When writing your patch, make sure to:\n"
    "    1. Use variables in a way that's consistent with their types.\n"
    "    2. Do not introduce imaginary variables that do not exist within "
    "the existing code snippet or the provided context."
)


def render_type_prompt(bindings: List[VariableBinding],
                       graph: Optional[TypeGraph] = None,
                       function_name: Optional[str] = None) -> str:
    """Variable-context block for the patch prompt.

    Every binding gets a `- name: x , type: t` line; bindings whose base
    type is an alias get an indented typedef line showing the alias and
    the fully resolved type.
    """
    lines = [_PROMPT_PREAMBLE, ""]
    if function_name:
        lines.append(f"variables in method: {function_name}")
    lines.append("Variables declarations:")
    if not bindings:
        lines.append("(no local variables)")
    for b in bindings:
        lines.append(f"- name: {b.name} , type: {b.type_spelling}")
        if b.node is not None and b.node.kind == TypeKind.ALIAS:
            try:
                final = resolve(graph, b.node) if graph else b.node.underlying
            except CyclicAlias:
                final = None
            target = final.display() if final is not None else "(unresolved)"
            lines.append(
                f"       typedef: {b.node.name} original_type:{target}"
            )
    lines.append("")
    lines.append(_PROMPT_RULES)
    return "\n".join(lines)
