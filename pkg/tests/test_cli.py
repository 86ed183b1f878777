import csv
import io
import json
import subprocess
import sys

import pytest

from hirota import records
from hirota.cli import ConfigError, RunConfig, load_config_file, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ") and "schema_version=1" in lines[0]
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_verify_default_passes(capsys):
    code, out, _ = run(["verify"], capsys)
    rows = read_csv(out)
    assert code == 0
    assert rows and all(r["passed"] == "1" for r in rows)
    names = {r["check"] for r in rows}
    for prefix in ("weyl.", "transfer.", "dynamics.", "aux.", "quasilocality.", "mps."):
        assert any(n.startswith(prefix) for n in names)


def test_verify_json(capsys):
    code, out, _ = run(["verify", "--format", "json", "--n-half", "1"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert set(doc) >= {"config", "schema_version", "rows"}
    assert list(doc["rows"][0]) == list(records.LEGENDS["verify"])


def test_odd_ell_is_config_error(capsys):
    code, _, err = run(["verify", "--ell", "3"], capsys)
    assert code == 2 and "ell" in err


def test_memory_cap_refusal(capsys):
    code, _, err = run(["verify", "--ell", "2", "--m", "7", "--n-half", "4"], capsys)
    assert code == 3 and "cap" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nm = 5\nkappa-re = 1.5\nlambda = 0.4\n", encoding="utf-8")
    out = tmp_path / "out.json"
    code = main(["verify", "--config", str(cfg), "--n-half", "1", "--format", "json", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert code == 0
    assert doc["config"]["m"] == 5 and doc["config"]["kappa_re"] == 1.5 and doc["config"]["n_half"] == 1
    cfg.write_text("m = 5\nn_half = 1\n", encoding="utf-8")
    code = main(["verify", "--config", str(cfg), "--m", "3", "--out", str(tmp_path / "o.csv")])
    assert code == 0


def test_config_unknown_field_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("m = 3\n\nbogus = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="line 3.*bogus"):
        load_config_file(str(cfg))


def test_config_bad_value(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n_half = two\n", encoding="utf-8")
    code, _, err = run(["verify", "--config", str(cfg)], capsys)
    assert code == 2 and "line 1" in err


def test_json_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 5, "lambda": [[0.4, 0.1]], "n_list": [1, 2]}), encoding="utf-8")
    vals = load_config_file(str(cfg))
    assert vals["lambdas"] == [0.4 + 0.1j] and vals["n_list"] == [1, 2]


@pytest.mark.parametrize("kwargs", [{"n_half": 0}, {"format": "xml"}, {"workers": 0}, {"n_list": [3, 2]},
                                    {"kappa_re": 0.0}, {"m": 4}])
def test_validation(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs).validate()


def test_wedge_scan_rows_and_symmetry(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["wedge-scan", "--r-list", "1.5", "--phi-count", "24"]
    assert main(base + ["--kappa-re", "3", "--m", "5", "--ell", "4", "--out", str(a)]) == 0
    assert main(base + ["--kappa-re", str(1 / 3), "--m", "5", "--ell", "4", "--out", str(b)]) == 0
    rows_a, rows_b = read_csv(a.read_text()), read_csv(b.read_text())
    assert list(rows_a[0]) == list(records.LEGENDS["wedge-scan"])
    assert len(rows_a) == 24
    assert [r["leading"] for r in rows_a] == [r["leading"] for r in rows_b]
    for r in rows_a:
        if r["leading"] != r["predicted"]:
            # only within the tie region at the edge
            assert abs(abs(float(r["phi"]) % 3.141592653589793) - 3.141592653589793 / 10) < 0.05


def test_wedge_scan_deterministic_with_workers(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["wedge-scan", "--phi-count", "12", "--out", str(a)]) == 0
    assert main(["wedge-scan", "--phi-count", "12", "--workers", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_kernel_check(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["kernel-check", "--kappa-re", "1", "--lambda", "0.5,0.5j", "--n-list", "1,2", "--out", str(out)]) == 0
    rows = read_csv(out.read_text())
    assert len(rows) == 4
    for r in rows:
        assert abs(float(r["norm2"]) - float(r["norm2_aux"])) < 1e-8 * float(r["norm2"])
    assert [r["in_wedge"] for r in rows] == ["1", "1", "0", "0"]


def test_kernel_check_memory(capsys):
    code, _, _ = run(["kernel-check", "--m", "7", "--n-list", "4"], capsys)
    assert code == 3


def test_dynamics(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["dynamics", "--out", str(out)]) == 0
    rows = read_csv(out.read_text())
    assert len(rows) == 11
    for r in rows:
        assert all(float(r[k]) < 1e-8 for k in ("closed_vs_conj", "i_even", "i_odd", "transfer"))
        assert float(r["unitarity"]) < 1e-12
    code, _, err = run(["dynamics", "--kappa-im", "0.5"], capsys)
    assert code == 2 and "real kappa" in err


def test_mps_export_round_trip(tmp_path, capsys):
    from hirota import mps
    from hirota.weyl import ChainGeometry

    out = tmp_path / "t.json"
    assert main(["mps-export", "--kappa-re", "1", "--lambda", "0.5", "--r-max", "3", "--n-half", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["oracle"]["n_half"] == 3 and doc["oracle"]["relative_deviation"] < 1
    ws = [w for r, w in doc["decay_profile"] if r >= 2]
    assert all(a > b for a, b in zip(ws, ws[1:]))
    table = mps.table_from_json(out.read_text())
    direct = mps.coefficient_table(0.5, 1.0, table.root, 3)
    geom = ChainGeometry(3, 3)
    assert (mps.assemble_truncated(table, geom) == mps.assemble_truncated(direct, geom)).all()
    code, _, _ = run(["mps-export", "--lambda", "0.5j"], capsys)
    assert code == 2


def test_output_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "--n-half", "1", "--format", "json", "--out"]
    main(args + [str(a)])
    main(args + [str(b)])
    assert a.read_text().replace(str(a), "") == b.read_text().replace(str(b), "")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hirota", "verify", "--ell", "1"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_format_value():
    assert records.format_value(0.1) == "0.10000000000000001"
    assert records.format_value(True) == "1"
    assert records.format_value(None) == ""
    assert records.format_value(float("nan")) == "nan"
