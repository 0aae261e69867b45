import pathlib

import pytest

from rover.edits import (
    CandidatePatch,
    Edit,
    apply_edits,
    parse_edit_blocks,
    render_edits,
)
from rover.errors import AmbiguousMatch, SearchTextNotFound, UnparsablePatch
from tests.conftest import DATA, make_tree

GOOD = """\
Reasoning first, as requested.

### EDIT src/a.c
<<<<<<< SEARCH
int x = 1;
=======
int x = 2;
>>>>>>> REPLACE

### EDIT src/b.c
<<<<<<< SEARCH
return 0;
=======
return rc;
>>>>>>> REPLACE
"""


def test_parse_two_blocks():
    edits = parse_edit_blocks(GOOD)
    assert [e.file for e in edits] == ["src/a.c", "src/b.c"]
    assert edits[0].search_text == "int x = 1;"
    assert edits[0].replace_text == "int x = 2;"


def test_parse_preserves_interior_lines():
    text = (
        "### EDIT f.c\n<<<<<<< SEARCH\nif (a) {\n\tb();\n}\n=======\n"
        "if (a && c) {\n\tb();\n}\n>>>>>>> REPLACE\n"
    )
    (edit,) = parse_edit_blocks(text)
    assert edit.search_text == "if (a) {\n\tb();\n}"
    assert edit.replace_text == "if (a && c) {\n\tb();\n}"


@pytest.mark.parametrize(
    "bad",
    [
        "no blocks here at all",
        "### EDIT f.c\nint x;\n",  # no SEARCH fence
        "### EDIT f.c\n<<<<<<< SEARCH\nx\n=======\ny\n",  # unterminated
        "### EDIT f.c\n<<<<<<< SEARCH\nx\n>>>>>>> REPLACE\n",  # no divider
        "### EDIT \n<<<<<<< SEARCH\nx\n=======\ny\n>>>>>>> REPLACE\n",  # empty path
    ],
)
def test_parse_rejects(bad):
    with pytest.raises(UnparsablePatch):
        parse_edit_blocks(bad)


def test_render_round_trips():
    edits = parse_edit_blocks(GOOD)
    again = parse_edit_blocks(render_edits(edits))
    assert again == edits


def make_workdir(tmp_path):
    return make_tree(tmp_path, {
        "src/a.c": "int main(void)\n{\n\tint x = 1;\n\treturn x;\n}\n",
        "src/b.c": "int f(void)\n{\n\treturn 0;\n}\n",
    })


def test_apply_exact(tmp_path):
    root = make_workdir(tmp_path)
    patch = CandidatePatch(parse_edit_blocks(GOOD))
    changed = apply_edits(root, patch)
    assert len(changed) == 2
    assert "int x = 2;" in pathlib.Path(root, "src/a.c").read_text()
    assert "return rc;" in pathlib.Path(root, "src/b.c").read_text()


def test_apply_whitespace_fallback(tmp_path):
    root = make_workdir(tmp_path)
    # four spaces instead of the file's tab: exact match fails, the
    # normalized line-window match must find it
    patch = CandidatePatch([Edit("src/a.c", "    int x = 1;", "\tint x = 9;")])
    apply_edits(root, patch)
    assert "int x = 9;" in pathlib.Path(root, "src/a.c").read_text()


def test_apply_missing_text(tmp_path):
    root = make_workdir(tmp_path)
    patch = CandidatePatch([Edit("src/a.c", "int y = 1;", "int y = 2;")])
    with pytest.raises(SearchTextNotFound):
        apply_edits(root, patch)


def test_apply_ambiguous(tmp_path):
    root = make_tree(tmp_path, {"d.c": "a();\nb();\na();\n"})
    patch = CandidatePatch([Edit("d.c", "a();", "c();")])
    with pytest.raises(AmbiguousMatch):
        apply_edits(root, patch)


def test_apply_all_or_nothing(tmp_path):
    root = make_workdir(tmp_path)
    before_a = pathlib.Path(root, "src/a.c").read_text()
    patch = CandidatePatch([
        Edit("src/a.c", "int x = 1;", "int x = 2;"),
        Edit("src/b.c", "not present anywhere", "whatever"),
    ])
    with pytest.raises(SearchTextNotFound):
        apply_edits(root, patch)
    assert pathlib.Path(root, "src/a.c").read_text() == before_a


def test_apply_missing_file(tmp_path):
    root = make_workdir(tmp_path)
    patch = CandidatePatch([Edit("src/nope.c", "x", "y")])
    with pytest.raises(SearchTextNotFound):
        apply_edits(root, patch)


def test_apply_blocks_path_escape(tmp_path):
    root = make_workdir(tmp_path)
    outside = tmp_path / "victim.txt"
    outside.write_text("precious")
    patch = CandidatePatch([Edit("../victim.txt", "precious", "gone")])
    with pytest.raises(Exception):
        apply_edits(str(pathlib.Path(root, "src")), patch)
    assert outside.read_text() == "precious"


def test_kamailio_fix_reproduces_golden(tmp_path):
    import shutil

    root = tmp_path / "kamailio"
    shutil.copytree(DATA / "kamailio", root)
    edits = parse_edit_blocks((DATA / "kamailio_fix.edits").read_text())
    apply_edits(str(root), CandidatePatch(edits))
    got = (root / "src/core/parser/contact/contact.c").read_text()
    assert got == (DATA / "kamailio_contact_fixed.c").read_text()
