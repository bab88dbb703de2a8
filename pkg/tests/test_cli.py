import csv
import io
import math
import subprocess
import sys

import pytest

import expected as E
from weakcap.cli import grid_values, main, parse_grid, read_config, UsageError


def read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_grid_parsing():
    assert parse_grid("-30:10:2") == (-30.0, 10.0, 2.0)
    assert grid_values(-30, 10, 2)[-1] == 10.0 and len(grid_values(-30, 10, 2)) == 21
    assert grid_values(0.1, 0.3, 0.1) == [0.1, 0.2, 0.3]
    for bad in ("1:0:1", "0:1:0", "0:1", "a:b:c", "0:inf:1"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_read_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# sweep\nunits = nats  # inline\n\ngrid=-20:-10:10\n")
    assert read_config(p) == {"units": "nats", "grid": "-20:-10:10"}
    p.write_text("units nats\n")
    with pytest.raises(UsageError):
        read_config(p)


def test_fig2a_row_values(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["fig2a", "--grid", "-20:0:20", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["snr_db", "delta_theta", "c_exact_oracle", "c_high", "c_bin", "c_low"]
    r20 = dict(zip(rows[0], map(float, rows[1])))
    assert r20["c_high"] == pytest.approx(E.FIG2A_CHIGH_BITS_M20, rel=1e-15)
    r0 = dict(zip(rows[0], map(float, rows[2])))
    assert r0["c_low"] == pytest.approx(E.awgn_c_low(1.0) / E.LN2, rel=1e-12) and r0["c_low"] < 0
    for r in (r20, r0):
        assert r["c_bin"] <= r["c_exact_oracle"] + 1e-3 / E.LN2


def test_fig2b_rows_and_units(tmp_path):
    out = tmp_path / "b.csv"
    k1 = E.GAMMA_KAPPA_ONE_NAT
    assert main(["fig2b", "--grid", f"1:{k1}:{k1 - 1}", "--units", "nats", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["kappa", "c_high", "c_bin", "c_low"]
    first = dict(zip(rows[0], map(float, rows[1])))
    assert first["c_high"] == pytest.approx(81 / 242, rel=1e-12)
    last = dict(zip(rows[0], map(float, rows[-1])))
    assert last["c_high"] == pytest.approx(1.0, rel=1e-11)
    for r in rows[1:]:
        assert float(r[2]) <= math.log(2.0)


def test_fig3_columns(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["fig3", "--grid", "0:0.5:0.5", "--n", "200", "--units", "nats", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["rho", "c_per_p_ar1", "c_per_p_ar1_numeric", "c_per_p_ma1_numeric"]
    assert [float(x) for x in rows[1]] == [0.0, 0.5, 0.5, 0.5]
    assert float(rows[2][1]) == pytest.approx(1.5, abs=1e-12)
    assert rows[2][3] == ""


def test_fig3_bits_default(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["fig3", "--grid", "-0.1:0:0.1", "--n", "50", "--out", str(out)]) == 0
    assert float(read(out)[2][1]) == pytest.approx(0.5 / math.log(2.0), rel=1e-15)


def test_exit_code_when_every_row_fails(tmp_path, caplog):
    out = tmp_path / "c.csv"
    assert main(["fig3", "--grid", "0.6:0.8:0.1", "--n", "20", "--out", str(out)]) == 2
    rows = read(out)
    assert all(r[3] == "" for r in rows[1:])
    assert "every row" in caplog.text


def test_partial_failure_is_success_with_warning(tmp_path, caplog):
    out = tmp_path / "c.csv"
    assert main(["fig3", "--grid", "0.3:0.6:0.3", "--n", "20", "--out", str(out)]) == 0
    err = caplog.text
    assert "rho=0.6" in err or "rho=0.59999999999999998" in err
    assert "1 of 2 rows" in err


def test_invalid_arguments_exit_1(capsys):
    assert_exit = [
        ["fig9"],
        ["fig2a", "--units", "furlongs"],
        ["fig2a", "--threads", "-1"],
        ["fig3", "--n", "0"],
        ["fig3", "--grid", "0:1.5:0.5"],
        ["fi-structure", "--model", "ma1", "--rho", "0.6"],
        ["fig2b", "--grid", "1:0:1"],
    ]
    for argv in assert_exit:
        try:
            rc = main(argv)
        except SystemExit as exc:
            rc = exc.code
        assert rc == 1, argv


def test_config_then_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("units = nats\ngrid = 0:0.2:0.1\nn = 30\n")
    out = tmp_path / "c.csv"
    assert main(["fig3", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read(out)
    assert len(rows) == 4 and float(rows[1][1]) == 0.5
    assert main(["fig3", "--config", str(cfg), "--units", "bits", "--grid", "0:0.1:0.1",
                 "--out", str(out)]) == 0
    rows = read(out)
    assert len(rows) == 3 and float(rows[1][1]) == pytest.approx(0.5 / math.log(2.0))
    cfg.write_text("colour = red\n")
    assert main(["fig3", "--config", str(cfg)]) == 1


def test_output_identical_across_thread_counts(tmp_path):
    texts = []
    for t in ("1", "3"):
        out = tmp_path / f"t{t}.csv"
        assert main(["fig2b", "--grid", "0.75:4.5:0.75", "--threads", t, "--out", str(out)]) == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_stdout_streaming(capsys):
    assert main(["fig3", "--grid", "0:0.2:0.2", "--n", "10", "--out", "-"]) == 0
    text = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][0] == "rho" and len(rows) == 3
    # 17 significant digits survive a round trip
    for r in rows[1:]:
        for cell in r:
            assert repr(float(cell)) == repr(float(format(float(cell), ".17g")))


def test_fi_structure_files(tmp_path):
    out = tmp_path / "fi.csv"
    assert main(["fi-structure", "--model", "ma1", "--rho", "-0.3", "--n", "12", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["i"] + [str(k) for k in range(1, 13)]
    assert all(float(x) > 0 for r in rows[1:] for x in r[1:])
    prof = read(tmp_path / "fi_profile.csv")
    assert prof[0] == ["k", "j_1_1pk", "abs_j_1_1pk"]
    mags = [float(r[2]) for r in prof[1:]]
    assert all(b <= a for a, b in zip(mags, mags[1:]))

    assert main(["fi-structure", "--model", "ma1", "--rho", "0.3", "--n", "12", "--out", str(out)]) == 0
    signed = [float(r[1]) for r in read(tmp_path / "fi_profile.csv")[1:]]
    assert all(a * b < 0 for a, b in zip(signed, signed[1:]))

    assert main(["fi-structure", "--model", "ar1", "--rho", "0.5", "--n", "6", "--out", str(out)]) == 0
    rows = read(out)
    assert all(float(rows[i][j]) == 0.0 for i in range(1, 7) for j in range(1, 7) if abs(i - j) > 1)


def test_colored_with_covariance_file(tmp_path):
    import numpy as np
    from weakcap.channels import ar1_covariance
    covf = tmp_path / "c.csv"
    np.savetxt(covf, ar1_covariance(0.5, 8).matrix, delimiter=",", fmt="%.17g")
    out = tmp_path / "w.csv"
    assert main(["colored", "--cov", str(covf), "--grid", "0.0001:0.0002:0.0001", "--units", "nats",
                 "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["P", "c_exact", "c_smallP"]
    ratio = float(rows[1][1]) / float(rows[1][2])
    assert 0.99 <= ratio <= 1.0
    covf.write_text("1,2\n3,4\n")
    assert main(["colored", "--cov", str(covf)]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "weakcap", "fig3", "--grid", "0:0.1:0.1",
                           "--n", "10", "--out", "-"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("rho,")
    assert proc.stderr == ""
