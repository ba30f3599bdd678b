import json
import math
import os

import pytest

from nodal_lab.cli import (
    RunConfig,
    build_config,
    main,
    parse_config_text,
    parse_mode_spec,
    parse_range,
)


def _read(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_canonical_config_round_trips():
    cfg = RunConfig(
        mode="k=2,3",
        identity="nodal,coarea",
        fit=("l1:lambda", "grad_sup:lambda"),
        band=("l1:lambda:-0.25:0.03",),
        tol=("nodal=1e-4",),
        level=0.5,
        resolution=640,
        threads=4,
    )
    text = cfg.canonical()
    again = build_config(parse_config_text(text), {})
    assert again == cfg
    assert again.canonical() == text
    # defaults are written out explicitly
    assert "resolution=640" in text
    assert "ambiguity_policy=subdivide" in text
    default = RunConfig()
    assert build_config(parse_config_text(default.canonical()), {}) == default


def test_parse_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        parse_config_text("no_such_key=1\n")
    with pytest.raises(ValueError):
        parse_config_text("just a line without equals\n")


def test_parse_range():
    assert parse_range("20:60:20") == [20, 40, 60]
    assert parse_range("1:5") == [1, 2, 3, 4, 5]
    for bad in ("5", "5:1", "1:5:0", "a:b"):
        with pytest.raises(ValueError):
            parse_range(bad)


def test_parse_mode_specs():
    assert parse_mode_spec("k=2,3").describe()["manifold"] == "torus2"
    assert parse_mode_spec("k=1,1,0").describe()["manifold"] == "torus3"
    assert parse_mode_spec("k=4").describe()["manifold"] == "circle"
    assert parse_mode_spec("zonal:5").describe()["degree"] == 5
    assert parse_mode_spec("sectoral:7").describe()["family"] == "sectoral"
    for bad in ("", "q=1", "k=", "k=1,2,3,4", "zonal:x"):
        with pytest.raises(ValueError):
            parse_mode_spec(bad)
    with pytest.raises(ValueError):
        parse_mode_spec("zonal:5", manifold="torus2")
    with pytest.raises(ValueError):
        parse_mode_spec("k=1,0", manifold="circle")


def test_verify_passes_and_writes_document(tmp_path, capsys):
    out = str(tmp_path / "run")
    code = main(
        [
            "verify",
            "--manifold",
            "torus2",
            "--mode",
            "k=1,0",
            "--identity",
            "nodal",
            "--resolution",
            "128",
            "--out",
            out,
        ]
    )
    assert code == 0
    assert "PASS nodal" in capsys.readouterr().out
    doc = _read(os.path.join(out, "verify.json"))
    assert set(doc) == {"config", "environment", "reports", "tables", "fits"}
    assert doc["reports"][0]["passed"] is True
    assert "mode=k=1,0" in doc["config"]
    assert "resolution=128" in doc["config"]
    assert doc["environment"]["version"]


def test_verify_fails_on_tight_tolerance(tmp_path, capsys):
    code = main(
        [
            "verify",
            "--mode",
            "k=2,3",
            "--identity",
            "nodal",
            "--resolution",
            "128",
            "--tol",
            "nodal=1e-12",
            "--out",
            str(tmp_path / "run"),
        ]
    )
    assert code == 1
    captured = capsys.readouterr()
    assert "FAIL nodal" in captured.out
    assert "FAIL" in captured.err


def test_verify_multiple_identities(tmp_path):
    out = str(tmp_path / "run")
    code = main(
        [
            "verify",
            "--mode",
            "k=1,0",
            "--identity",
            "nodal,corollary",
            "--level",
            "0.1",
            "--resolution",
            "128",
            "--tol",
            "corollary=1e-2",
            "--out",
            out,
        ]
    )
    assert code == 0
    doc = _read(os.path.join(out, "verify.json"))
    assert [r["identity_name"] for r in doc["reports"]] == ["nodal", "corollary"]


def test_verify_pair_flags(tmp_path):
    code = main(
        [
            "verify",
            "--identity",
            "curious",
            "--mode-j",
            "k=3,4",
            "--mode-k",
            "k=5,0",
            "--resolution",
            "128",
            "--out",
            str(tmp_path / "run"),
        ]
    )
    assert code == 0


def test_invalid_configs_exit_2(tmp_path):
    out = str(tmp_path / "x")
    assert main(["verify", "--mode", "k=0,0", "--identity", "nodal", "--out", out]) == 2
    assert main(["verify", "--mode", "k=1,0", "--identity", "bogus", "--out", out]) == 2
    assert main(["verify", "--identity", "pair", "--mode-j", "k=1,0", "--out", out]) == 2
    assert main(["scan", "--family", "circle", "--range", "9:1", "--out", out]) == 2
    assert main(["scan", "--family", "circle", "--range", "1:8", "--threads", "-2", "--out", out]) == 2
    assert main(["verify", "--mode", "k=1,0", "--identity", "nodal", "--tol", "nodal=", "--out", out]) == 2
    assert main(["nosuchcommand"]) == 2
    assert main(["scan", "--family", "hexagonal", "--out", out]) == 2


def test_scan_writes_table_fits_and_bands(tmp_path, capsys):
    out = str(tmp_path / "scan")
    code = main(
        [
            "scan",
            "--family",
            "circle",
            "--range",
            "1:10",
            "--resolution",
            "512",
            "--fit",
            "l1:lambda",
            "--band",
            "nodal_measure:lambda:1.0:0.05",
            "--out",
            out,
        ]
    )
    assert code == 0
    assert "[PASS]" in capsys.readouterr().out
    doc = _read(os.path.join(out, "scan.json"))
    assert doc["tables"][0]["family"] == "circle"
    assert len(doc["tables"][0]["rows"]) == 10
    assert doc["tables"][0]["bounds"]["passed"] is True
    fitted = {(f["y_column"], f["x_column"]) for f in doc["fits"]}
    assert fitted == {("l1", "lambda"), ("nodal_measure", "lambda")}
    band_fit = next(f for f in doc["fits"] if f["y_column"] == "nodal_measure")
    assert band_fit["band_ok"] is True
    assert os.path.exists(os.path.join(out, "scan.csv"))


def test_scan_band_failure_exits_1(tmp_path, capsys):
    code = main(
        [
            "scan",
            "--family",
            "circle",
            "--range",
            "1:6",
            "--resolution",
            "256",
            "--band",
            "nodal_measure:lambda:0.0:0.01",
            "--out",
            str(tmp_path / "scan"),
        ]
    )
    assert code == 1
    assert "FAIL" in capsys.readouterr().err


def test_extract_writes_mesh_files(tmp_path, capsys):
    out = str(tmp_path / "mesh")
    code = main(
        [
            "extract",
            "--mode",
            "k=2,3",
            "--level",
            "0.0",
            "--resolution",
            "128",
            "--out",
            out,
        ]
    )
    assert code == 0
    stdout = capsys.readouterr().out
    assert "measure=" in stdout and "vertices=" in stdout
    doc = _read(os.path.join(out, "mesh.json"))
    expected = 4.0 * math.pi * math.sqrt(13.0)
    assert math.isclose(doc["mesh"]["metadata"]["measure"], expected, rel_tol=1e-2)
    header = open(os.path.join(out, "mesh.txt"), encoding="utf-8").readline()
    assert header.startswith("# level-set dim=2")


def test_report_merges_prior_documents(tmp_path, capsys):
    out = str(tmp_path / "all")
    assert (
        main(["verify", "--mode", "k=1,0", "--identity", "nodal", "--resolution", "64", "--out", out])
        == 0
    )
    assert (
        main(
            [
                "scan",
                "--family",
                "circle",
                "--range",
                "1:8",
                "--resolution",
                "256",
                "--fit",
                "nodal_measure:lambda",
                "--out",
                out,
            ]
        )
        == 0
    )
    capsys.readouterr()
    assert main(["report", "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "1/1 passed" in stdout
    summary = _read(os.path.join(out, "summary.json"))
    assert {r["source"] for r in summary["reports"]} == {"verify.json"}
    assert {t["source"] for t in summary["tables"]} == {"scan.json"}
    dat = os.path.join(out, "nodal_measure_vs_lambda.dat")
    assert os.path.exists(dat)
    rows = [line.split() for line in open(dat, encoding="utf-8")]
    assert len(rows) == 8 and all(len(r) == 2 for r in rows)
    # slope of the two-column data is the fitted exponent
    assert os.path.exists(os.path.join(out, "nodal_measure_vs_lambda.png"))
    assert os.path.exists(os.path.join(out, "residuals.png"))


def test_report_on_empty_directory_exits_2(tmp_path, capsys):
    code = main(["report", "--out", str(tmp_path / "nothing")])
    assert code == 2
    assert "no reports found" in capsys.readouterr().err


def test_reruns_are_byte_identical(tmp_path):
    out = str(tmp_path / "det")
    args = [
        "scan",
        "--family",
        "circle",
        "--range",
        "1:6",
        "--resolution",
        "256",
        "--fit",
        "l1:lambda",
        "--out",
        out,
    ]
    assert main(args) == 0
    first_json = open(os.path.join(out, "scan.json"), "rb").read()
    first_csv = open(os.path.join(out, "scan.csv"), "rb").read()
    assert main(args) == 0
    assert open(os.path.join(out, "scan.json"), "rb").read() == first_json
    assert open(os.path.join(out, "scan.csv"), "rb").read() == first_csv


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("NODAL_LAB_THREADS", "2")
    out = str(tmp_path / "thr")
    args = ["scan", "--family", "circle", "--range", "1:6", "--resolution", "128", "--out", out]
    assert main(args) == 0
    serial = _read(os.path.join(out, "scan.json"))
    monkeypatch.setenv("NODAL_LAB_THREADS", "bad")
    assert main(args) == 2
    monkeypatch.delenv("NODAL_LAB_THREADS")
    assert main(args) == 0
    assert _read(os.path.join(out, "scan.json"))["tables"] == serial["tables"]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mode=k=1,0\nidentity=nodal\nresolution=64\nout=%s\n" % (tmp_path / "a"))
    assert main(["verify", "--config", str(cfg)]) == 0
    doc = _read(str(tmp_path / "a" / "verify.json"))
    assert "resolution=64" in doc["config"]
    assert main(["verify", "--config", str(cfg), "--resolution", "128"]) == 0
    doc = _read(str(tmp_path / "a" / "verify.json"))
    assert "resolution=128" in doc["config"]
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == 2
