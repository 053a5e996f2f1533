import json
from pathlib import Path

import pytest

from rectsurf.cli import decode_trace, main
from rectsurf.experiments import ChannelSpec, default_kappa_grid, pseudo_threshold, sweep_curve
from rectsurf.io import (
    CSV_COLUMNS,
    META_PREFIX,
    report_to_json,
    sweep_from_json,
    sweep_to_csv,
    sweep_to_json,
    sweeps_from_csv,
    sweeps_to_csv,
)
from rectsurf.lattice import build_code

GOLDEN = Path(__file__).parent / "golden" / "sweep_3x5_delta10.csv"


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_code_info(capsys):
    rc, out, _ = run(capsys, "code", "info", "--dx", "3", "--dz", "5")
    assert rc == 0
    assert "8 X-stabilizers, 6 Z-stabilizers" in out
    assert "t_x=1 t_z=2" in out
    assert "X_L[0]: 0 5 10" in out
    assert "Z_L[0]: 0 1 2 3 4" in out


def test_code_info_savings(capsys):
    _, out, _ = run(capsys, "code", "info", "--dx", "3", "--dz", "7")
    assert "57.14%" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("sweep", "--dx", "4", "--dz", "5"),
        ("sweep", "--dx", "3", "--dz", "5", "--trials", "0"),
        ("sweep", "--dx", "3", "--dz", "5", "--delta", "0.5"),
        ("sweep", "--dx", "3", "--dz", "5", "--kappa-min", "0.1", "--kappa-max", "0.01"),
        ("threshold", "--dx", "3", "--dz-list", "5"),
        ("code", "info", "--dx", "3", "--dz", "2"),
    ],
)
def test_validation_errors_exit_2(capsys, argv):
    rc, _, err = run(capsys, *argv)
    assert rc == 2
    assert "error" in err


def test_decode_one_worked_example(capsys):
    rc, out, _ = run(capsys, "decode-one", "--dx", "3", "--dz", "5", "--error", "Y6,Z3")
    assert rc == 0
    assert "Z defects (2): Z1 Z2" in out
    assert "X defects (4): X1 X2 X3 X4" in out
    assert "x-syndrome: [0, 1, 1, 1, 1, 0, 0, 0]" in out
    assert "z-syndrome: [0, 1, 1, 0, 0, 0]" in out
    assert "logical failure: x=False z=False" in out


def test_decode_one_identity():
    text = decode_trace(3, 5, "")
    assert "error: I" in text
    assert "x-syndrome: [0, 0, 0, 0, 0, 0, 0, 0]" in text
    assert "z-syndrome: [0, 0, 0, 0, 0, 0]" in text
    assert "correction: I" in text


def test_decode_one_parse_error(capsys):
    rc, _, err = run(capsys, "decode-one", "--dx", "3", "--dz", "5", "--error", "Q9")
    assert rc == 2
    assert "Q9" in err


def test_decode_one_reports_logical_failure():
    text = decode_trace(3, 5, "X0,X5,X10")
    assert "logical failure: x=True z=False" in text


def test_csv_golden(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc, _, _ = run(
        capsys, "sweep", "--dx", "3", "--dz", "5", "--delta", "10", "--points", "4",
        "--trials", "2000", "--seed", "7", "--out", str(out),
    )
    assert rc == 0
    assert out.read_text() == GOLDEN.read_text()
    header = [line for line in GOLDEN.read_text().splitlines() if not line.startswith("#")][0]
    assert header == "dx,dz,delta,kappa,p,trials,x_failures,z_failures,any_failures,p_logical,stderr"
    assert tuple(header.split(",")) == CSV_COLUMNS


def test_csv_metadata_is_sufficient_to_reproduce(tmp_path):
    meta_line = GOLDEN.read_text().splitlines()[0]
    meta = json.loads(meta_line[len(META_PREFIX):])
    res = sweep_curve(
        build_code(meta["dx"], meta["dz"]), ChannelSpec(float(meta["delta"]), meta["channel"]),
        meta["kappa_grid"], meta["trials"], meta["seed"],
    )
    assert sweep_to_csv(res) == GOLDEN.read_text()


def test_csv_round_trip():
    curves = [
        sweep_curve(build_code(3, 3), ChannelSpec(kind="x_only"), default_kappa_grid(points=3), 500, 4),
        sweep_curve(build_code(3, 5), "inf", default_kappa_grid(points=3), 500, 4),
    ]
    back = sweeps_from_csv(sweeps_to_csv(curves))
    assert back == curves
    assert back[1].points[0].counted == "z"


def test_json_round_trip():
    res = sweep_curve(build_code(3, 5), 3.5, default_kappa_grid(points=5), 1000, 11)
    assert sweep_from_json(sweep_to_json(res)) == res
    doc = json.loads(sweep_to_json(res))
    assert doc["metadata"]["delta"] == 3.5
    assert doc["metadata"]["seed"] == 11


def test_report_json_contains_estimate():
    res = sweep_curve(build_code(3, 3), 1, default_kappa_grid(), 3000, 2)
    est = pseudo_threshold(res)
    doc = json.loads(report_to_json(est, [res]))
    assert doc["estimate"]["value"] == pytest.approx(est.value)
    assert doc["curves"][0]["metadata"]["dx"] == 3


def test_sweep_json_to_file(tmp_path, capsys):
    out = tmp_path / "s.json"
    rc, _, _ = run(capsys, "sweep", "--dx", "3", "--dz", "3", "--delta", "inf", "--points", "3",
                   "--trials", "500", "--format", "json", "--out", str(out))
    assert rc == 0
    res = sweep_from_json(out.read_text())
    assert res.metadata()["delta"] == "inf"


def test_pseudo_threshold_command(tmp_path, capsys):
    out = tmp_path / "r.json"
    rc, text, _ = run(capsys, "pseudo-threshold", "--dx", "3", "--dz", "3", "--trials", "3000",
                      "--format", "json", "--out", str(out))
    assert rc == 0
    assert text.startswith("gamma[3,3]")
    assert "value" in json.loads(out.read_text())["estimate"]


def test_no_crossing_exit_3(capsys):
    # over a tiny kappa range the [3,3] curve stays below p = P_L
    rc, _, err = run(capsys, "pseudo-threshold", "--dx", "3", "--dz", "3", "--trials", "500",
                     "--kappa-min", "1e-4", "--kappa-max", "2e-4", "--points", "3")
    assert rc == 3
    assert "crossing" in err.lower()


def test_io_error_exit_4(capsys, tmp_path):
    rc, _, _ = run(capsys, "sweep", "--dx", "3", "--dz", "3", "--points", "2", "--trials", "100",
                   "--out", str(tmp_path / "missing" / "x.csv"))
    assert rc == 4


def test_threshold_command(tmp_path, capsys):
    out = tmp_path / "t.csv"
    rc, text, _ = run(capsys, "threshold", "--dx", "3", "--dz-list", "5,7", "--delta", "inf",
                      "--trials", "3000", "--points", "10", "--out", str(out))
    assert rc == 0
    assert "gamma*" in text
    assert len(sweeps_from_csv(out.read_text())) == 2


def test_crossover_scan_command(capsys):
    rc, text, _ = run(capsys, "crossover-scan", "--deltas", "1,10", "--codes", "3x3,3x5",
                      "--trials", "1000", "--points", "10")
    assert rc == 0
    assert "crossover delta" in text
