import json

import pytest

from centralleaf import cli, serialize
from centralleaf.affine import element, simple_element, translation_element
from centralleaf.leaves import leaf_report
from centralleaf.rootdata import build_classical

GL2 = build_classical("GL", 2)


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_report_example(capsys):
    code, out, _ = run_cli(capsys, [
        "report", "--group", "GL2", "--element", "{lambda:[1,0],w:s}"])
    assert code == 0
    header, rows = serialize.parse_csv(out)
    assert list(header) == list(serialize.LEAF_HEADER)
    assert len(rows) == 1
    row = dict(zip(header, rows[0]))
    assert row["nu"] == "1/2,1/2"
    assert row["leaf_dim"] == "0"
    assert row["basic"] == "true"
    assert out.startswith(serialize.SCHEMA_COMMENT)


def test_adm_example(capsys):
    code, out, _ = run_cli(capsys, [
        "adm", "--group", "GL2", "--mu", "1,0", "--level", "iwahori"])
    assert code == 0
    _, rows = serialize.parse_csv(out)
    assert len(rows) == 3


def test_witt_selfcheck_example(capsys):
    code, out, _ = run_cli(capsys, [
        "witt-selfcheck", "--p", "2", "--length", "3", "--count", "50"])
    assert code == 0
    document = json.loads(out)
    assert document["passed"] is True


def test_adlv_command(capsys):
    code, out, _ = run_cli(capsys, [
        "adlv", "--matrix", "0,1;2,0", "--mu", "1,0", "--p", "2",
        "--depth", "1"])
    assert code == 0
    header, rows = serialize.parse_csv(out)
    assert list(header) == list(serialize.ADLV_HEADER)
    assert rows and all(r[3] == "true" for r in rows)


def test_crosscheck_command(capsys):
    code, out, _ = run_cli(capsys, ["crosscheck", "--group", "Sp4", "--cap", "1"])
    assert code == 0
    _, rows = serialize.parse_csv(out)
    assert rows and all(r[3] == "true" for r in rows)


def test_validation_exit_code(capsys):
    code, _, err = run_cli(capsys, ["adm", "--group", "GL2", "--mu", "0,1"])
    assert code == 1 and "error" in err
    code2, _, _ = run_cli(capsys, ["report", "--group", "E9",
                                   "--element", "{lambda:[1,0],w:s}"])
    assert code2 == 1


def test_budget_exit_code(capsys):
    code, _, err = run_cli(capsys, ["classes", "--group", "GL3", "--cap", "6",
                                    "--bound", "6"])
    assert code == 3 and "budget" in err


def test_consistency_exit_code(monkeypatch, capsys):
    from centralleaf.errors import ConsistencyError

    def boom(spec):
        raise ConsistencyError("forced oracle mismatch")

    monkeypatch.setitem(cli._COMMANDS, "crosscheck", boom)
    code, _, err = run_cli(capsys, ["crosscheck", "--group", "GL2"])
    assert code == 2 and "consistency" in err


def test_spec_file(tmp_path, capsys):
    spec = {"command": "report", "group": "GL2",
            "elements": [{"lambda": [1, 0], "w": "s1"}]}
    path = tmp_path / "job.json"
    path.write_text(json.dumps(spec), encoding="utf-8")
    code, out, _ = run_cli(capsys, ["report", "--spec", str(path)])
    assert code == 0 and "1/2,1/2" in out


def test_unknown_spec_keys_rejected(tmp_path, capsys):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"command": "report", "grp": "GL2"}),
                    encoding="utf-8")
    code, _, err = run_cli(capsys, ["report", "--spec", str(path)])
    assert code == 1 and "unknown" in err


def test_output_file_and_determinism(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        code = cli.main(["classes", "--group", "GL2", "--cap", "1",
                         "--output", str(out)])
        capsys.readouterr()
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_structured_text_format(capsys):
    code, out, _ = run_cli(capsys, [
        "report", "--group", "GL2", "--element", "{lambda:[1,0],w:s}",
        "--format", "structured-text"])
    assert code == 0
    document = json.loads(out)
    assert document[0]["nu"] == "1/2,1/2"


def test_leaf_report_round_trip():
    xs = element(GL2, (1, 0), simple_element(GL2, 1).finite)
    report = leaf_report(GL2, xs)
    row = serialize.leaf_report_row(report)
    back = serialize.leaf_report_from_row(GL2, row)
    assert back == report
    t = translation_element(GL2, (1, 0))
    report2 = leaf_report(GL2, t)
    assert serialize.leaf_report_from_row(
        GL2, serialize.leaf_report_row(report2)) == report2


def test_word_round_trip():
    for datum in (GL2, build_classical("GL", 3), build_classical("Sp", 4)):
        for w in datum.weyl_elements:
            word = serialize.word_of_finite(datum, w)
            assert serialize.parse_word(datum, word) == w


def test_element_doc_tolerant_parse():
    x = serialize.element_from_doc(GL2, "{lambda:[1,0],w:s}")
    assert x.translation == (1, 0)
    x2 = serialize.element_from_doc(GL2, '{"lambda": [0, 1], "w": "e"}')
    assert x2.translation == (0, 1)
    with pytest.raises(Exception):
        serialize.element_from_doc(GL2, "{lambda:[1,0],w:s,extra:1}")
