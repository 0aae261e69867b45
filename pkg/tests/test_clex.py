from rover.clex import (
    KIND_CHAR,
    KIND_IDENT,
    KIND_NUMBER,
    KIND_PP,
    KIND_PUNCT,
    KIND_STRING,
    match_brace,
    tokenize,
)


def texts(code):
    return [t.text for t in tokenize(code)]


def test_idents_and_puncts():
    assert texts("a->b :: c <<= 2;") == ["a", "->", "b", "::", "c", "<<=", "2", ";"]


def test_comments_are_skipped():
    toks = tokenize("int x; // trailing\n/* block\n comment */ int y;")
    assert [t.text for t in toks] == ["int", "x", ";", "int", "y", ";"]


def test_line_numbers():
    toks = tokenize("int a;\nint b;\n")
    assert toks[0].line == 1
    assert toks[3].line == 2


def test_string_and_char_literals():
    toks = tokenize('f("a;b", \'\\\'\');')
    kinds = [t.kind for t in toks]
    assert KIND_STRING in kinds and KIND_CHAR in kinds
    assert texts('x = "quote \\" inside";')[2] == '"quote \\" inside"'


def test_raw_string():
    toks = tokenize('auto s = R"(no " escape)";')
    lit = [t for t in toks if t.kind == KIND_STRING]
    assert len(lit) == 1
    assert lit[0].text == 'R"(no " escape)"'


def test_pp_directive_single_token():
    toks = tokenize("#define PAIR(a, b) { a, b }\nint x;")
    assert toks[0].kind == KIND_PP
    assert toks[1].text == "int"
    # braces inside the directive must not affect matching
    assert "{" not in [t.text for t in toks[1:]]


def test_pp_continuation():
    toks = tokenize("#define LONG \\\n  more\nint y;")
    assert toks[0].kind == KIND_PP
    assert toks[1].text == "int"


def test_number_forms():
    toks = tokenize("0x1fULL 1.5e-3 042")
    assert all(t.kind == KIND_NUMBER for t in toks)


def test_match_brace():
    toks = tokenize("{ a { b } c } d")
    assert toks[0].text == "{"
    close = match_brace(toks, 0)
    assert toks[close].text == "}"
    assert toks[close + 1].text == "d"


def test_match_brace_unbalanced():
    toks = tokenize("{ a { b }")
    assert match_brace(toks, 0) == len(toks)
