from __future__ import annotations

import json
from contextlib import nullcontext as does_not_raise

import pytest

from pruningfront import __version__
from pruningfront.cli import EXIT_BUDGET
from pruningfront.cli import EXIT_DIFFERENT
from pruningfront.cli import EXIT_ERROR
from pruningfront.cli import EXIT_OK
from pruningfront.cli import EXIT_REJECTED
from pruningfront.cli import RunConfig
from pruningfront.cli import build_parser
from pruningfront.cli import main
from pruningfront.folding import FoldingPattern
from pruningfront.io import dump_artifact
from pruningfront.io import loads_json
from pruningfront.kneading import KneadingSequence
from pruningfront.kneading import KneadingSet
from pruningfront.symbols import TwoSidedWindow

ROOT_ONLY = KneadingSet.from_mapping({0: KneadingSequence.from_text("", "+-+--")})


def run(capsys, *argv: str):
    """Runs the command line and returns the exit code with the captured streams."""
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def kneading_file(tmp_path):
    """Kneading file holding a single root sequence."""
    path = tmp_path / "root.json"
    path.write_text(dump_artifact(ROOT_ONLY), encoding="utf-8")
    return path


@pytest.fixture()
def folding_file(tmp_path, gen4_pattern):
    """Folding file of the four generation window."""
    path = tmp_path / "gen4.json"
    path.write_text(dump_artifact(gen4_pattern), encoding="utf-8")
    return path


def test_version(capsys):
    """Tests the version flag."""
    with pytest.raises(SystemExit):
        main(["--version"])
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["check"], {"map": "lozi", "a": 1.8, "b": 0.3, "misiurewicz": True}),
        (["check", "--a", "1.7", "--b", "0.5"], {"map": "lozi", "a": 1.7, "b": 0.5, "misiurewicz": False}),
    ],
)
def test_check_lozi(capsys, argv, expected):
    """Tests the Misiurewicz check and its exit code."""
    code, out, _ = run(capsys, *argv)
    data = json.loads(out)

    assert code == (EXIT_OK if expected["misiurewicz"] else EXIT_ERROR)
    assert data["kind"] == "check"
    assert {k: data[k] for k in expected} == expected


def test_check_henon(capsys):
    """Tests the Hénon check, flagged as heuristic."""
    code, out, _ = run(capsys, "check", "--map", "henon")
    data = json.loads(out)

    assert code == EXIT_OK
    assert data["ok"] is True
    assert data["plausible"] is True
    assert data["heuristic"] is True


def test_kneading_is_deterministic(capsys):
    """Tests that two runs print byte identical kneading sets."""
    argv = ("kneading", "--count", "4", "--depth", "8")
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)

    assert code == EXIT_OK
    assert first == second
    kind, kset = loads_json(first)
    assert kind == "kneading"
    assert kset.indices == (-2, -1, 0, 1)
    assert kset.depth == 8


def test_folding_from_kneading_file(capsys, tmp_path):
    """Tests that the folding pattern built from a kneading file matches the one read off the engine."""
    path = tmp_path / "kneading.json"
    assert main(["kneading", "--count", "40", "--depth", "20", "--out", str(path)]) == EXIT_OK

    _, from_file, _ = run(capsys, "folding", "--kneading", str(path), "--generations", "5")
    _, from_engine, _ = run(capsys, "folding", "--generations", "5")
    assert loads_json(from_file) == loads_json(from_engine)


def test_tree_command(capsys, folding_file, gen4_tree):
    """Tests the tree of a folding file, as JSON and as Graphviz text."""
    code, out, _ = run(capsys, "tree", "--folding", str(folding_file))
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["levels"] == [list(level) for level in gen4_tree.levels]
    assert "marks" in data

    _, dot, _ = run(capsys, "tree", "--folding", str(folding_file), "--dot")
    assert dot.startswith("digraph pruned_tree {")


def test_convert_roundtrip(capsys, tmp_path, folding_file, gen4_pattern, gen4_kneading):
    """Tests conversions between the three artifact kinds."""
    tree_path = tmp_path / "tree.json"
    assert main(["convert", "--from", "folding", "--to", "tree", str(folding_file), "--out", str(tree_path)]) == 0

    _, out, _ = run(capsys, "convert", "--from", "tree", "--to", "folding", str(tree_path))
    assert loads_json(out) == ("folding", gen4_pattern)

    _, out, _ = run(capsys, "convert", "--from", "folding", "--to", "kneading", str(folding_file), "--depth", "5")
    assert loads_json(out) == ("kneading", gen4_kneading)

    code, _, err = run(capsys, "convert", "--from", "kneading", "--to", "tree", str(folding_file))
    assert code == EXIT_ERROR
    assert "expected kneading" in json.loads(err)["message"]


@pytest.mark.parametrize(
    "window, extra, expected_code, expected",
    [
        ("^.+++", [], EXIT_OK, {"verdict": "admissible"}),
        ("^-.+--", [], EXIT_REJECTED, {"verdict": "rejected", "index": 0}),
        ("-.+", ["--radius", "0"], EXIT_OK, {"radius": 0}),
    ],
)
def test_admissible(capsys, kneading_file, window, extra, expected_code, expected):
    """Tests the admissibility command and its exit codes."""
    code, out, _ = run(capsys, "admissible", window, "--kneading", str(kneading_file), *extra)
    data = json.loads(out)

    assert code == expected_code
    assert data["kind"] == "verdict"
    assert {k: data[k] for k in expected} == expected


@pytest.mark.parametrize(
    "argv, expected_window",
    [
        (["admissible", "-.+", "--radius", "0"], "-.+"),
        (["admissible", "--radius", "0", "-.+"], "-.+"),
        (["admissible", "--window=-.+", "--radius", "0"], "-.+"),
        (["admissible", "--window", "^-.+--", "--radius", "0"], "^-.+--"),
    ],
)
def test_admissible_leading_minus_window(capsys, kneading_file, argv, expected_window):
    """Tests that windows starting with '-' reach the command instead of the option parser."""
    code, out, _ = run(capsys, *argv, "--kneading", str(kneading_file))

    assert code in (EXIT_OK, EXIT_REJECTED)
    assert json.loads(out)["window"] == str(TwoSidedWindow.from_text(expected_window))


def test_region_leading_minus_window(capsys):
    """Tests the region command on a window starting with '-'."""
    code, out, _ = run(capsys, "region", "--.-", "--format", "csv")

    assert code == EXIT_OK
    assert out.splitlines()[0] == "polygon,vertex,x,y"


def test_window_required(capsys):
    """Tests that the window commands fail cleanly without a window."""
    code, _, err = run(capsys, "region")

    assert code == EXIT_ERROR
    assert "needs a window" in json.loads(err)["message"]


def test_compare_files(capsys, tmp_path, folding_file):
    """Tests file comparison with equal and different artifacts."""
    code, out, _ = run(capsys, "compare", str(folding_file), str(folding_file))
    assert code == EXIT_OK
    assert json.loads(out)["result"] == "equal"

    flipped = tmp_path / "flipped.json"
    flipped.write_text(
        dump_artifact(FoldingPattern.from_text("1 0 1 0 1 0 . 1 0 1 0 1 0 1 0 1")),
        encoding="utf-8",
    )
    code, out, _ = run(capsys, "compare", str(folding_file), str(flipped))
    assert code == EXIT_DIFFERENT
    assert json.loads(out)["coordinate"] == 6

    code, _, err = run(capsys, "compare", str(folding_file))
    assert code == EXIT_ERROR
    assert "needs two files" in json.loads(err)["message"]


def test_compare_params(capsys):
    """Tests batch comparison, sequential and with worker processes."""
    argv = ("compare", "--params", "1.8,0.3", "--params", "1.8,0.3", "--count", "4", "--depth", "10")
    code, sequential, _ = run(capsys, *argv)
    _, parallel, _ = run(capsys, *argv, "--jobs", "2")

    assert code == EXIT_OK
    assert sequential == parallel
    assert json.loads(sequential)["comparisons"][0]["result"] == "equal"

    code, _, err = run(capsys, "compare", "--params", "1.8,0.3")
    assert code == EXIT_ERROR
    assert "at least two" in json.loads(err)["message"]


def test_region_and_manifold_csv(capsys):
    """Tests the CSV outputs of the geometric commands."""
    code, out, _ = run(capsys, "region", "+.++", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "polygon,vertex,x,y"

    code, out, _ = run(capsys, "manifold", "--target-arclength", "1.0", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "index,x,y,arclength,marker_kind,i,j"

    code, _, err = run(capsys, "region", "+.++", "--map", "henon")
    assert code == EXIT_ERROR
    assert json.loads(err)["error"] == "ValueError"


@pytest.mark.parametrize(
    "argv, expected_code, error",
    [
        (["admissible", "^-x.+", "--kneading", "missing.json"], EXIT_ERROR, "ParseError"),
        (["kneading", "--depth", "0"], EXIT_ERROR, "ValueError"),
        (["kneading", "--a", "1.7", "--b", "0.5"], EXIT_ERROR, "NotMisiurewiczError"),
    ],
)
def test_error_objects(capsys, argv, expected_code, error):
    """Tests exit codes and the machine readable error printed on stderr."""
    code, out, err = run(capsys, *argv)

    assert code == expected_code
    assert out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == error


@pytest.mark.parametrize(
    "overrides, context",
    [
        ({}, does_not_raise()),
        ({"map_kind": "logistic"}, pytest.raises(ValueError, match="`map` must be one of")),
        ({"output_format": "xml"}, pytest.raises(ValueError, match="`format` must be one of")),
        ({"seg_tol": 0.0}, pytest.raises(ValueError, match="must be strictly positive")),
        ({"jobs": 0}, pytest.raises(ValueError, match="must be at least 1")),
    ],
)
def test_run_config(overrides, context):
    """Tests the validation of the run configuration."""
    config = RunConfig.from_namespace(build_parser().parse_args(["check"]))
    with context:
        RunConfig(**{**config.as_dict(), **overrides})


def test_run_config_defaults():
    """Tests the map dependent defaults."""
    henon = RunConfig.from_namespace(build_parser().parse_args(["check", "--map", "henon"]))
    assert (henon.a, henon.b, henon.seg_tol) == (1.9, 0.025, 1e-3)
    assert henon.heuristic

    lozi = RunConfig.from_namespace(build_parser().parse_args(["check", "--b", "0.25"]))
    assert (lozi.a, lozi.b, lozi.seg_tol) == (1.8, 0.25, 1e-2)
    assert lozi.with_params(1.7, 0.35).a == 1.7
    assert not lozi.heuristic


def test_search_budget_exit_code(capsys, kneading_file):
    """Tests that an exhausted prelude search exits with the budget code."""
    argv = ("admissible", "--.--", "--kneading", str(kneading_file), "--radius", "1", "--prelude-length", "40")
    code, _, err = run(capsys, *argv)

    assert code == EXIT_BUDGET
    error = json.loads(err.strip().splitlines()[-1])
    assert error["error"] == "SearchBudgetExceededError"
    assert error["budget"] == 1 << 16
