import json

import numpy as np
import pytest

from pescat.cli import dumps_stable, exit_code_for, main
from pescat.errors import LimitNotConverged, NotAdmissible, NotContractive, RealSpectrumUnresolved


def write_problem(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def worked_reflection_file(tmp_path):
    return write_problem(
        tmp_path / "reflection.json",
        {
            "kind": "reflection",
            "m1": 1,
            "m2": 1,
            "A": [[[0.0, -3.0]]],
            "B": [[[1.0, 0.0]]],
            "C": [[[0.0, -np.sqrt(5.0)]]],
        },
    )


@pytest.fixture
def worked_params_file(tmp_path):
    return write_problem(
        tmp_path / "params.json",
        {
            "kind": "parameters",
            "m1": 1,
            "m2": 1,
            "alpha": [[[0.0, -2.0]]],
            "S0": [[[1.0, 0.0]]],
            "gamma1": [[[1.0, 0.0]]],
            "gamma": [[[np.sqrt(5.0), 0.0]]],
        },
    )


@pytest.fixture
def positon_params_file(tmp_path):
    return write_problem(
        tmp_path / "positon.json",
        {
            "kind": "parameters",
            "m1": 1,
            "m2": 1,
            "alpha": [[[0.0, 0.0]]],
            "S0": [[[1.0, 0.0]]],
            "gamma1": [[[1.0, 0.0]]],
            "gamma": [[[0.0, -1.0]]],
        },
    )


class TestComplete:
    def test_worked_reflection(self, tmp_path, worked_reflection_file):
        out = tmp_path / "out"
        assert main(["complete", worked_reflection_file, "--out-dir", str(out)]) == 0
        params = json.loads((out / "parameters.json").read_text())
        assert params["kind"] == "parameters"
        a = params["alpha"][0][0]
        assert a[0] == pytest.approx(0.0, abs=1e-9)
        assert a[1] == pytest.approx(-2.0, abs=1e-9)
        checks = json.loads((out / "checks.json").read_text())
        assert checks["passed"] is True
        assert checks["mcmillan_degree_W"] == checks["mcmillan_degree_R"] == 1

    def test_zero_reflection_gives_identity_W(self, tmp_path):
        problem = write_problem(
            tmp_path / "zero.json",
            {"kind": "reflection", "m1": 1, "m2": 1, "A": [], "B": [], "C": []},
        )
        out = tmp_path / "out"
        assert main(["complete", problem, "--out-dir", str(out)]) == 0
        W = json.loads((out / "W_realization.json").read_text())
        assert W["n"] == 0
        assert W["D"] == [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
        params = json.loads((out / "parameters.json").read_text())
        assert params["alpha"] == []

    def test_expansive_reflection_exits_2(self, tmp_path, capsys):
        problem = write_problem(
            tmp_path / "big.json",
            {
                "kind": "reflection",
                "m1": 1,
                "m2": 1,
                "A": [[[0.0, -1.0]]],
                "B": [[[1.0, 0.0]]],
                "C": [[[2.0, 0.0]]],
            },
        )
        assert main(["complete", problem, "--out-dir", str(tmp_path / "o")]) == 2
        assert "not contractive on real line" in capsys.readouterr().err

    def test_byte_stable(self, tmp_path, worked_reflection_file):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["complete", worked_reflection_file, "--out-dir", str(out1)])
        main(["complete", worked_reflection_file, "--out-dir", str(out2)])
        for name in ("parameters.json", "W_realization.json", "checks.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_emitted_json_is_fixed_point(self, tmp_path, worked_reflection_file):
        out = tmp_path / "o"
        main(["complete", worked_reflection_file, "--out-dir", str(out)])
        text = (out / "parameters.json").read_text()
        assert dumps_stable(json.loads(text)) + "\n" == text


class TestScatter:
    def test_worked_grid_and_report(self, tmp_path, worked_params_file):
        out = tmp_path / "out"
        code = main(
            ["scatter", worked_params_file, "--out-dir", str(out), "--grid-lpoints", "21"]
        )
        assert code == 0
        coeffs = json.loads((out / "coefficients.json").read_text())
        assert coeffs["passed"] is True
        assert coeffs["unitarity_max_defect"] <= 1e-8
        assert coeffs["kappa"]["mode"] == "ClosedForm"
        assert coeffs["kappa"]["value"][0][0][0] == pytest.approx(0.8)
        lines = (out / "scattering_grid.csv").read_text().strip().splitlines()
        assert lines[0] == "lambda,block,row,col,re,im"
        assert len(lines) == 1 + 21 * 4

    def test_positon_modes_and_symmetry(self, tmp_path, positon_params_file):
        out = tmp_path / "out"
        assert main(["scatter", positon_params_file, "--out-dir", str(out)]) == 0
        coeffs = json.loads((out / "coefficients.json").read_text())
        assert coeffs["kappa"]["mode"] == "ZeroRealSpectrum"
        rows = (out / "scattering_grid.csv").read_text().strip().splitlines()[1:]
        tl = [r.split(",") for r in rows if r.split(",")[1] == "T_L"]
        tr = [r.split(",") for r in rows if r.split(",")[1] == "T_R"]
        for a, b in zip(tl, tr):
            assert float(a[4]) == pytest.approx(float(b[4]), abs=1e-12)
            assert float(a[5]) == pytest.approx(float(b[5]), abs=1e-12)

    def test_non_admissible_exits_2(self, tmp_path):
        problem = write_problem(
            tmp_path / "bad.json",
            {
                "kind": "parameters",
                "m1": 1,
                "m2": 1,
                "alpha": [[[0.0, -1.0]]],
                "S0": [[[1.0, 0.0]]],
                "gamma1": [[[1.0, 0.0]]],
                "gamma": [[[0.0, 0.0]]],
            },
        )
        assert main(["scatter", problem, "--out-dir", str(tmp_path / "o")]) == 2


class TestPotential:
    def test_positon_column(self, tmp_path, positon_params_file):
        out = tmp_path / "out"
        code = main(
            [
                "potential",
                positon_params_file,
                "--out-dir",
                str(out),
                "--xmax",
                "4",
                "--xpoints",
                "41",
            ]
        )
        assert code == 0
        rows = (out / "potential.csv").read_text().strip().splitlines()[1:]
        assert len(rows) == 41
        for row in rows:
            x, _, _, re, im = row.split(",")
            assert float(re) == pytest.approx(-2.0 / (1.0 + 2.0 * float(x)), abs=1e-12)
            assert float(im) == pytest.approx(0.0, abs=1e-12)
        sing = json.loads((out / "singularities.json").read_text())
        assert sing["singularities"] == []

    def test_indefinite_reports_singularity(self, tmp_path):
        s0 = -(2.0 - np.sqrt(3.0))
        problem = write_problem(
            tmp_path / "indef.json",
            {
                "kind": "parameters",
                "m1": 1,
                "m2": 1,
                "alpha": [[[0.0, -np.sqrt(3.0) / 2.0]]],
                "S0": [[[s0, 0.0]]],
                "gamma1": [[[2.0 ** -0.5, 0.0]]],
                "gamma": [[[0.0, -s0 * 2.0 ** -0.5]]],
            },
        )
        out = tmp_path / "out"
        assert main(["potential", problem, "--out-dir", str(out), "--xmax", "3"]) == 0
        sing = json.loads((out / "singularities.json").read_text())
        assert len(sing["singularities"]) == 1
        bracket = sing["singularities"][0]["bracket"]
        assert bracket[1] - bracket[0] <= 1e-8


class TestInvertRoundtripVerify:
    def test_invert_positon_reflection(self, tmp_path):
        problem = write_problem(
            tmp_path / "r.json",
            {
                "kind": "reflection",
                "m1": 1,
                "m2": 1,
                "A": [[[0.0, -1.0]]],
                "B": [[[1.0, 0.0]]],
                "C": [[[1.0, 0.0]]],
            },
        )
        out = tmp_path / "out"
        assert main(
            ["invert", problem, "--out-dir", str(out), "--xmax", "4", "--xpoints", "9"]
        ) == 0
        rows = (out / "potential.csv").read_text().strip().splitlines()[1:]
        for row in rows:
            x, _, _, re, im = row.split(",")
            assert float(re) == pytest.approx(-2.0 / (1.0 + 2.0 * float(x)), abs=1e-9)
        report = json.loads((out / "report.json").read_text())
        assert report["passed"] is True

    def test_roundtrip_worked(self, tmp_path, worked_params_file):
        out = tmp_path / "out"
        assert main(["roundtrip", worked_params_file, "--out-dir", str(out)]) == 0
        rep = json.loads((out / "roundtrip.json").read_text())
        assert rep["passed"] is True
        s = np.array(rep["similarity"][0][0])
        assert np.hypot(*s) == pytest.approx(1.0, abs=1e-8)

    def test_verify_worked(self, tmp_path, worked_params_file):
        out = tmp_path / "out"
        code = main(
            [
                "verify",
                worked_params_file,
                "--out-dir",
                str(out),
                "--grid-lpoints",
                "3",
                "--xmax",
                "10",
            ]
        )
        assert code == 0
        rep = json.loads((out / "verify.json").read_text())
        assert rep["passed"] is True
        assert rep["max_reflection_gap"] <= 1e-4


class TestPlumbing:
    def test_exit_code_classification(self):
        assert exit_code_for(NotContractive("x")) == 2
        assert exit_code_for(NotAdmissible("x")) == 2
        assert exit_code_for(ValueError("x")) == 2
        assert exit_code_for(RealSpectrumUnresolved("x")) == 3
        assert exit_code_for(LimitNotConverged("x")) == 3

    def test_malformed_file_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["scatter", str(bad), "--out-dir", str(tmp_path)]) == 2
        capsys.readouterr()

    def test_missing_matrix_exits_2(self, tmp_path, capsys):
        problem = write_problem(
            tmp_path / "m.json", {"kind": "reflection", "m1": 1, "m2": 1, "A": []}
        )
        assert main(["complete", problem, "--out-dir", str(tmp_path)]) == 2
        capsys.readouterr()

    def test_tolerance_flag_wins_over_file(self, tmp_path):
        problem = write_problem(
            tmp_path / "p.json",
            {
                "kind": "parameters",
                "m1": 1,
                "m2": 1,
                "alpha": [[[0.0, 0.0]]],
                "S0": [[[1.0, 0.0]]],
                "gamma1": [[[1.0, 0.0]]],
                "gamma": [[[0.0, -1.0]]],
                "tolerances": {"grid": 1e-30},
            },
        )
        out1 = tmp_path / "strict"
        assert main(["scatter", problem, "--out-dir", str(out1)]) == 0
        assert json.loads((out1 / "coefficients.json").read_text())["passed"] is False
        out2 = tmp_path / "loose"
        assert (
            main(["scatter", problem, "--out-dir", str(out2), "--tol-grid", "1e-8"]) == 0
        )
        assert json.loads((out2 / "coefficients.json").read_text())["passed"] is True
