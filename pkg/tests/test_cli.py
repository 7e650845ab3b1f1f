import csv
import json
import re
from pathlib import Path

import pytest

from pcsio import __version__
from pcsio.cli import parse_overrides, run

FIX = Path(__file__).parent / "fixtures"


def _run(cmd, fixture, out, *extra):
    code = run([cmd, "--input", str(FIX / fixture), "--out", str(out), *extra])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report


def test_fredholm_ratio_i(tmp_path):
    code, rep = _run("fredholm", "ratio_i.json", tmp_path)
    assert code == 0
    assert rep["status"] == 0 and rep["result"]["fredholm"] is True
    assert rep["result"]["margins"][0]["margin"] == pytest.approx(0.25)
    assert rep["input"] == "ratio_i.json"


def test_fredholm_ratio_minus_one(tmp_path):
    code, rep = _run("fredholm", "ratio_minus1.json", tmp_path)
    assert code == 1 and rep["result"]["fredholm"] is False


def test_closed_image(tmp_path):
    assert _run("closed-image", "ratio_i.json", tmp_path)[0] == 0
    assert _run("closed-image", "ratio_minus1.json", tmp_path)[0] == 1


def test_bounded_power06(tmp_path):
    code, rep = _run("bounded", "power06.json", tmp_path)
    assert code == 1
    assert rep["result"]["bounded"] is False
    assert rep["result"]["slacks"][0]["slack"] <= 0


def test_command_without_symbol_exit_2(tmp_path):
    code, rep = _run("fredholm", "power06.json", tmp_path)
    assert code == 2 and rep["error"].startswith("input error")


def _write(tmp_path, doc):
    path = tmp_path / "in.json"
    path.write_text(json.dumps(doc))
    return path


def test_unbounded_fredholm_exit_3(tmp_path):
    doc = json.loads((FIX / "power06.json").read_text())
    doc["symbol"] = {"constant": [2, 0]}
    code = run(["fredholm", "--input", str(_write(tmp_path, doc)), "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "report.json").read_text())
    assert code == 3 and rep["error"].startswith("precondition failed")


def test_nonconverged_indices_exit_4(tmp_path):
    doc = json.loads((FIX / "power06.json").read_text())
    csv_path = str((FIX / "slow_oscillation.csv").resolve())
    doc["weight"]["nodes"][0]["profile"] = {"type": "csv", "path": csv_path}
    code = run(["indices", "--input", str(_write(tmp_path, doc)), "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "report.json").read_text())
    assert code == 4 and rep["error"].startswith("did not converge")


def test_missing_input_no_artifacts(tmp_path):
    out = tmp_path / "out"
    code = run(["fredholm", "--input", str(tmp_path / "nope.json"), "--out", str(out)])
    assert code == 2
    assert not out.exists()


def test_bad_json_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["bounded", "--input", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert run(["nonsense", "--input", str(bad)]) == 2


def test_schema_violation_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"curve": {"builder": {"type": "unit_circle", "n": 64}}, "exponent": 0.5}))
    assert run(["bounded", "--input", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_indices_and_validate(tmp_path):
    code, rep = _run("indices", "node_horn.json", tmp_path)
    assert code == 0
    node = rep["result"]["nodes"][0]
    assert (node["m"], node["M"]) == (0.1, 0.3)
    code, rep = _run("validate", "node_horn.json", tmp_path)
    assert code == 0
    assert rep["result"]["log_holder"]["holds"]
    assert {"delta": 1.0, "source": "declared", "t": [1.0, 0.0]} in rep["result"]["spirality"]


def test_symbol_det(tmp_path):
    code, rep = _run("symbol-det", "node_horn.json", tmp_path)
    assert code == 0 and rep["result"]["fredholm"] is True
    assert rep["result"]["semifredholm_equals_fredholm"] is True
    code, rep = _run("symbol-det", "ratio_minus1.json", tmp_path)
    assert code == 1


def test_local_spectrum_outputs(tmp_path):
    code, rep = _run("local-spectrum", "node_horn.json", tmp_path, "t=1,0", "levels=8")
    assert code == 0
    assert rep["result"]["horn"]["shape"] == "spiralic_horn"
    svg = (tmp_path / "spectra.svg").read_text()
    assert len(re.findall(r"<path ", svg)) == 8
    assert "spiralic_horn" in re.findall(r'<text class="legend"[^>]*>([^<]*)<', svg)[0]
    with (tmp_path / "spectra.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["re", "im", "c"]
    assert len({r[2] for r in rows[1:]}) == 8


def test_ess_spectrum_svg_paths_and_legend(tmp_path):
    code, rep = _run("ess-spectrum", "node_horn.json", tmp_path, "levels=16", "check_grid_mode=1")
    assert code == 0
    assert rep["result"]["grid"]["modes_agree"] is True
    svg = (tmp_path / "spectra.svg").read_text()
    # a horn with a < b draws one path per level, the segment a single one
    assert len(re.findall(r"<path ", svg)) == 16 + 1
    legends = re.findall(r'<text class="legend"[^>]*>([^<]*)<', svg)
    assert legends == ["t=(1, 0): spiralic_horn", "t=(-1, 0): segment"]


def test_regeneration_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        _run("ess-spectrum", "ratio_i.json", out)
    for name in ("report.json", "spectra.csv", "spectra.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    json.loads((a / "report.json").read_text())


def test_oracle_small(tmp_path):
    code, rep = _run(
        "oracle", "ratio_i.json", tmp_path,
        "--section-n", "64", "--fft-size", "1024", "--grid-z", "11", "min_agreement=0.5",
    )
    assert code == 0
    assert rep["config"]["section_n"] == 64
    with (tmp_path / "sweep.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["re", "im", "sigma_min", "predicted_member"]
    assert len(rows) == 1 + 11 * 11


def test_parse_overrides():
    ov = parse_overrides(["t=1,0", "threshold=0.05", "mode=grid"])
    assert ov == {"t": 1 + 0j, "threshold": 0.05, "mode": "grid"}


def test_version(capsys):
    assert run(["--version"]) == 0
    assert __version__ in capsys.readouterr().out
