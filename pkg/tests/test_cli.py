import json

import pytest

from motivix.cli import EXIT_ERROR, EXIT_OK, EXIT_UNDECIDED, build_parser, main, run_motive
from motivix.errors import InvalidInput


def test_decide_indecomposable(models_dir, capsys):
    assert main(["decide", str(models_dir / "g3-lattice.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "status: INDECOMPOSABLE (prooftrace)" in out
    assert "[hypothesis]: holds" in out


def test_decide_undecided_exit_code(tmp_path, capsys):
    path = tmp_path / "axiomatic-g2.json"
    path.write_text(json.dumps({"d": 1, "g": 2, "mode": "axiomatic", "exponents": [5, 5]}), encoding="utf-8")
    assert main(["decide", str(path), "--trace", "none"]) == EXIT_UNDECIDED
    assert "status: UNDECIDED" in capsys.readouterr().out


def test_decide_hypothesis_failure(models_dir, capsys):
    assert main(["decide", str(models_dir / "bad-exponents.json")]) == 3
    assert "hypothesis not satisfied" in capsys.readouterr().err


def test_missing_model_file(tmp_path, capsys):
    assert main(["decide", str(tmp_path / "nope.json")]) == EXIT_ERROR
    assert "error: InvalidInput" in capsys.readouterr().err


def test_json_report_on_stdout(models_dir, capsys):
    assert main(["decide", str(models_dir / "g2-lattice.json"), "--mode", "exhaustive", "--json", "-"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "decide"
    assert report["results"]["status"] == "INDECOMPOSABLE"
    assert report["results"]["stats"]["free_cells"] == 2
    assert "timing_ms" not in report
    assert len(report["inputs_digest"]) == 64


def test_json_report_to_file_is_reproducible(models_dir, tmp_path, capsys):
    paths = [tmp_path / "first.json", tmp_path / "second.json"]
    for path in paths:
        assert main(["decide", str(models_dir / "g3-lattice.json"), "--json", str(path), "--threads", "2"]) == 0
    capsys.readouterr()
    assert paths[0].read_text(encoding="utf-8") == paths[1].read_text(encoding="utf-8")


def test_timing_is_opt_in(models_dir, capsys):
    main(["av", "exponents", str(models_dir / "g2-lattice.json"), "--json", "-", "--timing"])
    assert "timing_ms" in json.loads(capsys.readouterr().out)


def test_motive_product(capsys):
    assert main(["motive", "product", "--g", "10", "--json", "-"]) == EXIT_OK
    results = json.loads(capsys.readouterr().out)["results"]
    assert results["M2tr"] == 200
    assert results["M2alg"] == 202


def test_motive_elliptic_curve(capsys):
    assert main(["motive", "elliptic-curve", "--g", "3", "--json", "-"]) == EXIT_OK
    results = json.loads(capsys.readouterr().out)["results"]
    assert results == {"M1xM1": 12, "M2tr": 6, "M2alg_from_M1xM1": 6}


def test_motive_blowup_arguments(capsys):
    argv = ["motive", "blowup", "--points", "1", "--curves", "2", "--surface", "6:4:1", "--json", "-"]
    assert main(argv) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)["results"]
    assert rows["M1"] == [0, 0, 1, 4, 2, 4, 1, 0, 0]


def test_motive_bad_parameters():
    with pytest.raises(InvalidInput):
        run_motive("product", {"genus": 3})
    with pytest.raises(InvalidInput):
        run_motive("threefold", {})


def test_av_exponents_with_scan(models_dir, capsys):
    assert main(["av", "exponents", str(models_dir / "g3-lattice.json"), "--scan", "--json", "-"]) == EXIT_OK
    results = json.loads(capsys.readouterr().out)["results"]
    assert results["floor"] == 5
    assert len(results["exponents"]) == 6
    assert all(row["n_K"] == row["scan"] for row in results["exponents"])


def test_av_integral(models_dir, capsys):
    matrix = json.dumps([[5, 0], [0, 0]])
    assert main(["av", "integral", str(models_dir / "g2-lattice.json"), "--matrix", matrix, "--json", "-"]) == 0
    assert json.loads(capsys.readouterr().out)["results"] == {"integral": True}


def test_av_integral_unsupported_on_axiomatic_models(models_dir, tmp_path, capsys):
    swap = [[0] * 10 for _ in range(10)]
    swap[0][1] = swap[1][0] = 1
    for k in range(2, 10):
        swap[k][k] = 1
    matrix_file = tmp_path / "swap.json"
    matrix_file.write_text(json.dumps(swap), encoding="utf-8")
    argv = ["av", "integral", str(models_dir / "c6.json"), "--matrix", f"@{matrix_file}", "--json", "-"]
    assert main(argv) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["results"]["integral"] is None


def test_av_liverpool_rejects_indices_outside_the_model(models_dir, capsys):
    assert main(["av", "liverpool", str(models_dir / "g2-lattice.json"), "--A", "1", "--B", "3"]) == EXIT_ERROR
    assert "not inside" in capsys.readouterr().err


def test_conv_table_summary(models_dir, capsys):
    assert main(["conv-table", str(models_dir / "g2-lattice.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "theta (1,1): 2/1 E11" in out


def test_fermat_pullback(capsys):
    assert main(["fermat", "pullback", "--phi", "3", "--json", "-"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "fermat pullback"
    assert report["results"]["rep"] == "V111"


def test_parser_rejects_unknown_phi():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["fermat", "pullback", "--phi", "4"])
