import pathlib

import pytest

from rover.diffs import apply_unified, changed_files, parse_unified, render_unified
from rover.errors import RoverError
from tests.conftest import make_tree

BEFORE = "int f(void)\n{\n\tint x = 1;\n\treturn x;\n}\n"
AFTER = "int f(void)\n{\n\tint x = 2;\n\treturn x;\n}\n"


def test_render_then_apply_round_trip(tmp_path):
    diff = render_unified("m.c", BEFORE, AFTER)
    assert diff.startswith("--- a/m.c")
    assert "+++ b/m.c" in diff
    root = make_tree(tmp_path, {"m.c": BEFORE})
    changed = apply_unified(root, diff)
    assert changed == ["m.c"]
    assert pathlib.Path(root, "m.c").read_text() == AFTER


def test_changed_files():
    diff = render_unified("a.c", BEFORE, AFTER) + render_unified(
        "b/c.h", "x\n", "y\n"
    )
    assert changed_files(diff) == ["a.c", "b/c.h"]


def test_parse_unified_hunks():
    diff = render_unified("m.c", BEFORE, AFTER)
    parsed = parse_unified(diff)
    assert len(parsed) == 1
    path, hunks = parsed[0]
    assert path == "m.c"
    assert len(hunks) == 1


def test_apply_with_offset(tmp_path):
    # same change, but the file gained two lines above the hunk
    diff = render_unified("m.c", BEFORE, AFTER)
    shifted = "// new\n// lines\n" + BEFORE
    root = make_tree(tmp_path, {"m.c": shifted})
    apply_unified(root, diff)
    assert pathlib.Path(root, "m.c").read_text() == "// new\n// lines\n" + AFTER


def test_apply_rejects_nonmatching_context(tmp_path):
    diff = render_unified("m.c", BEFORE, AFTER)
    root = make_tree(tmp_path, {"m.c": "completely different\n"})
    with pytest.raises(RoverError):
        apply_unified(root, diff)


def test_no_newline_marker_tolerated(tmp_path):
    before = "a\nb"
    after = "a\nc"
    diff = render_unified("n.c", before, after)
    assert "\\ No newline at end of file" in diff
    root = make_tree(tmp_path, {"n.c": before})
    apply_unified(root, diff)
    assert pathlib.Path(root, "n.c").read_text() == after
