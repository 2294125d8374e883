import csv
import json

import numpy as np
import pytest

from imexdimsim.cli import main


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_verify_ssp_only(tmp_path, capsys):
    assert main(["verify", "DIMSIM2L", "--ssp", "--out", str(tmp_path)]) == 0
    certs = json.loads((tmp_path / "ssp.json").read_text())
    assert abs(certs["DIMSIM2L"]["C"] - 1.17) <= 0.01
    assert (tmp_path / "manifest.json").exists()
    assert "DIMSIM2L" in capsys.readouterr().out


def test_unknown_method_exits_with_error(tmp_path, capsys):
    assert main(["verify", "BOGUS", "--out", str(tmp_path)]) == 1
    assert "BOGUS" in capsys.readouterr().err


def test_verify_without_methods_is_an_error(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("alpha", ["0", "120"])
def test_region_rejects_bad_alpha(tmp_path, alpha):
    assert main(["region", "--method", "DIMSIM2A", "--kind", "Salpha", "--alpha", alpha, "--out", str(tmp_path)]) == 1


def test_region_writes_boundary(tmp_path):
    assert main(["region", "--method", "DIMSIM1A", "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "region_DIMSIM1A_SE.csv")
    assert header == ["theta", "boundary_re", "boundary_im"]
    z = data[:, 1] + 1j * data[:, 2]
    assert np.allclose(np.abs(z + 1), 1.0, atol=1e-4)
    summary = json.loads((tmp_path / "region_DIMSIM1A_SE.json").read_text())
    assert summary["area"] == pytest.approx(np.pi, abs=2e-3)


def test_solve_backward_euler_recurrence(tmp_path):
    # with f = 0 the 1L method is backward Euler: y_n = (1 + h)^-n
    argv = ["solve", "--method", "DIMSIM1L", "--problem", "test", "--lambda1", "-1", "--h", "0.1", "--out", str(tmp_path)]
    assert main(argv) == 0
    csv_path = next(tmp_path.glob("solve_DIMSIM1L_*.csv"))
    header, data = read_csv(csv_path)
    y = data[:, 1]
    n = np.arange(len(y))
    assert np.allclose(data[:, 0], 0.1 * n, atol=1e-14)
    assert np.allclose(y, 1.1**-n, rtol=1e-13, atol=0)


def test_converge_on_zero_error_problem(tmp_path, capsys):
    # lambda = 0 keeps y constant, so every method is exact
    argv = ["converge", "--method", "DIMSIM3A", "--problem", "test", "--h", "0.1", "--halvings", "2", "--out", str(tmp_path)]
    assert main(argv) == 0
    summary = json.loads(next(tmp_path.glob("converge_*.json")).read_text())
    assert all(row["error"] <= 1e-14 for row in summary["rows"])


def test_halvings_need_a_single_step(tmp_path):
    argv = ["converge", "--method", "DIMSIM3A", "--problem", "test", "--h", "0.1", "0.05", "--halvings", "2", "--out", str(tmp_path)]
    assert main(argv) == 1


def test_expect_published_and_mismatch(tmp_path, capsys):
    assert main(["verify", "DIMSIM1A", "--expect", "published", "--out", str(tmp_path / "a")]) == 0
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"DIMSIM1A": {"C": {"value": 2.0, "tol": 0.01}, "L_stable": True}}))
    assert main(["verify", "DIMSIM1A", "--expect", str(wrong), "--out", str(tmp_path / "b")]) == 2
    out = capsys.readouterr().out
    assert out.count("MISMATCH") == 2
    assert len(json.loads((tmp_path / "b" / "mismatches.json").read_text())) == 2


def test_replay_reproduces_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "DIMSIM3L", "--ssp", "--out", str(a)]) == 0
    assert main(["replay", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert (a / "ssp.json").read_text() == (b / "ssp.json").read_text()


@pytest.mark.slow
def test_region_alpha_wedge_area(tmp_path):
    argv = ["region", "--method", "DIMSIM4A", "--kind", "Salpha", "--alpha", "90", "--out", str(tmp_path)]
    assert main(argv) == 0
    summary = json.loads((tmp_path / "region_DIMSIM4A_Salpha.json").read_text())
    assert abs(summary["area"] - 0.15) <= 0.02
