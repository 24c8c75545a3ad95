import json
import math

import numpy as np
import pytest

from gaussmeter.cli import format_sweep_csv, load_matrix_file, main
from gaussmeter.capacity import sweep_one_mode

ER_UNIT = 0.9182958340544896


def write_matrix(path, re, im=None, s=1):
    doc = {"s": s, "re": re}
    if im is not None:
        doc["im"] = im
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def unit_files(tmp_path):
    lam = write_matrix(tmp_path / "lam.json", [[1.0]])
    noise = write_matrix(tmp_path / "noise.json", [[1.0]])
    return lam, noise


class TestErGauge:
    def test_unit_case(self, unit_files, capsys):
        lam, noise = unit_files
        assert main(["er-gauge", "--lambda", lam, "--noise", noise]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["schema"] == "1"
        assert doc["base"] == "bits"
        assert doc["er"] == pytest.approx(ER_UNIT, abs=1e-6)
        assert doc["ntilde"]["re"][0][0] == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert doc["k"]["re"][0][0] == pytest.approx(math.sqrt(2.0) / 3.0, abs=1e-12)

    def test_vacuum_input(self, tmp_path, capsys):
        lam = write_matrix(tmp_path / "lam.json", [[0.0]])
        noise = write_matrix(tmp_path / "noise.json", [[5.0]])
        assert main(["er-gauge", "--lambda", lam, "--noise", noise]) == 0
        assert json.loads(capsys.readouterr().out)["er"] == 0.0

    def test_two_decoupled_modes(self, tmp_path, capsys):
        lam = write_matrix(tmp_path / "lam.json", [[1.0, 0.0], [0.0, 1.0]], s=2)
        noise = write_matrix(tmp_path / "noise.json", [[1.0, 0.0], [0.0, 1.0]], s=2)
        assert main(["er-gauge", "--lambda", lam, "--noise", noise]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["er"] == pytest.approx(2.0 * ER_UNIT, abs=1e-6)

    def test_nats_flag(self, unit_files, capsys):
        lam, noise = unit_files
        assert main(["er-gauge", "--lambda", lam, "--noise", noise,
                     "--base", "nats"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["er"] == pytest.approx(ER_UNIT * math.log(2.0), abs=1e-6)

    def test_invalid_matrix_exits_2(self, tmp_path, capsys):
        lam = tmp_path / "bad.json"
        lam.write_text('{"s": 1, "re": [[1.0, 2.0]]}')
        noise = write_matrix(tmp_path / "noise.json", [[1.0]])
        assert main(["er-gauge", "--lambda", str(lam), "--noise", noise]) == 2
        assert "row 0" in capsys.readouterr().err

    def test_unparsable_json_exits_2(self, tmp_path, capsys):
        lam = tmp_path / "bad.json"
        lam.write_text("{not json")
        noise = write_matrix(tmp_path / "noise.json", [[1.0]])
        assert main(["er-gauge", "--lambda", str(lam), "--noise", noise]) == 2
        assert "line" in capsys.readouterr().err


class TestErGeneral:
    def test_matched_isotropic(self, tmp_path, capsys):
        alpha = write_matrix(tmp_path / "a.json", (1.5 * np.eye(2)).tolist())
        beta = write_matrix(tmp_path / "b.json", (1.5 * np.eye(2)).tolist())
        assert main(["er-general", "--alpha", alpha, "--beta", beta]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["er"] == pytest.approx(ER_UNIT, abs=1e-9)
        assert doc["spectrum_alpha"] == pytest.approx([1.5])
        assert doc["alpha_tilde"]["re"][0][0] == pytest.approx(5.0 / 6.0, abs=1e-9)

    def test_vacuum_input(self, tmp_path, capsys):
        alpha = write_matrix(tmp_path / "a.json", (0.5 * np.eye(2)).tolist())
        beta = write_matrix(tmp_path / "b.json", (1.5 * np.eye(2)).tolist())
        assert main(["er-general", "--alpha", alpha, "--beta", beta]) == 0
        assert json.loads(capsys.readouterr().out)["er"] == pytest.approx(
            0.0, abs=1e-9
        )

    def test_squeezed_regression(self, tmp_path, capsys):
        alpha = write_matrix(tmp_path / "a.json", [[2.0, 0.0], [0.0, 0.5]])
        beta = write_matrix(tmp_path / "b.json", (1.5 * np.eye(2)).tolist())
        assert main(["er-general", "--alpha", alpha, "--beta", beta]) == 0
        doc = json.loads(capsys.readouterr().out)
        # pinned after validation against the Fock engine (oracle agreement 3e-3)
        assert doc["er"] == pytest.approx(0.6466166348885304, abs=1e-9)

    def test_inadmissible_exits_2(self, tmp_path, capsys):
        alpha = write_matrix(tmp_path / "a.json", (0.25 * np.eye(2)).tolist())
        beta = write_matrix(tmp_path / "b.json", (1.5 * np.eye(2)).tolist())
        assert main(["er-general", "--alpha", alpha, "--beta", beta]) == 2

    def test_singular_sum_exits_3(self, tmp_path, capsys):
        # extreme squeezing: admissible, but alpha + beta is numerically singular
        squeezed = np.diag([1e6, 0.25 / 1e6]).tolist()
        alpha = write_matrix(tmp_path / "a.json", squeezed)
        beta = write_matrix(tmp_path / "b.json", squeezed)
        assert main(["er-general", "--alpha", alpha, "--beta", beta]) == 3
        assert "condition" in capsys.readouterr().err


class TestCapacity:
    def test_one_mode(self, unit_files, capsys):
        _, noise = unit_files
        assert main(["capacity", "--noise", noise, "--epsilon", noise,
                     "--energy", "1.0"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["cea"] == pytest.approx(ER_UNIT, abs=1e-6)
        assert doc["optimizer_lambda"]["re"][0][0] == pytest.approx(1.0, abs=1e-9)
        assert doc["energy_used"] == pytest.approx(1.0, abs=1e-9)
        assert doc["converged"] is True

    def test_two_mode_decoupled(self, tmp_path, capsys):
        noise = write_matrix(tmp_path / "n.json", np.eye(2).tolist(), s=2)
        eps = write_matrix(tmp_path / "e.json", np.eye(2).tolist(), s=2)
        assert main(["capacity", "--noise", noise, "--epsilon", eps,
                     "--energy", "2.0", "--seed", "0"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["cea"] == pytest.approx(2.0 * ER_UNIT, abs=1e-6)
        assert doc["c_unassisted"] is None

    def test_zero_energy_exits_2(self, unit_files, capsys):
        _, noise = unit_files
        assert main(["capacity", "--noise", noise, "--epsilon", noise,
                     "--energy", "0.0"]) == 2


class TestSweep:
    def write_spec(self, tmp_path, **overrides):
        doc = {
            "N": [0.0, 1.0, 10.0],
            "E": {"min": 1e-2, "max": 1e2, "count": 13, "scale": "log"},
            "base": "bits",
        }
        doc.update(overrides)
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(doc))
        return str(path)

    def test_csv_and_svg(self, tmp_path, capsys):
        spec = self.write_spec(tmp_path)
        out = tmp_path / "sweep.csv"
        svg = tmp_path / "sweep.svg"
        assert main(["sweep", "--spec", spec, "--out", str(out),
                     "--svg", str(svg)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "N,E,C_ea,C,G"
        assert len(lines) == 1 + 3 * 13
        assert svg.read_text().startswith("<svg")
        for line in lines[1:]:
            noise, energy, cea, c, g = (float(v) for v in line.split(","))
            assert cea >= c

    def test_round_trip_idempotent(self, tmp_path):
        spec = self.write_spec(tmp_path)
        out = tmp_path / "sweep.csv"
        main(["sweep", "--spec", spec, "--out", str(out)])
        text = out.read_text()
        lines = text.splitlines()
        rebuilt = [lines[0]]
        for line in lines[1:]:
            values = [float(v) for v in line.split(",")]
            rebuilt.append(",".join(f"{v:.11e}" for v in values))
        assert "\n".join(rebuilt) + "\n" == text

    def test_single_row(self, tmp_path, capsys):
        spec = self.write_spec(
            tmp_path, N=[0.0], E={"min": 1.0, "max": 1.0, "count": 1}
        )
        assert main(["sweep", "--spec", spec]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        noise, energy, cea, c, g = (float(v) for v in lines[1].split(","))
        assert (cea, c, g) == pytest.approx((2.0, 1.0, 2.0), abs=1e-9)

    def test_stdout_matches_formatter(self, tmp_path, capsys):
        spec = self.write_spec(
            tmp_path, N=[1.0], E={"min": 0.5, "max": 2.0, "count": 3}
        )
        assert main(["sweep", "--spec", spec]) == 0
        expected = format_sweep_csv(
            sweep_one_mode([1.0], list(np.geomspace(0.5, 2.0, 3)))
        )
        assert capsys.readouterr().out == expected

    def test_bad_grid_exits_2(self, tmp_path, capsys):
        spec = self.write_spec(tmp_path, E={"min": 0.0, "max": 1.0, "count": 3})
        assert main(["sweep", "--spec", spec]) == 2


class TestVerify:
    def test_cp_case(self, capsys):
        assert main(["verify", "--case", "cp", "--seed", "7"]) == 0
        out = capsys.readouterr().out
        assert "cp" in out and "PASS" in out

    def test_posterior_case(self, capsys):
        assert main(["verify", "--case", "lemma1", "--seed", "7"]) == 0
        out = capsys.readouterr().out
        assert "lemma1" in out and "PASS" in out

    def test_thread_cap_env(self, monkeypatch):
        from gaussmeter.verify import thread_cap

        monkeypatch.setenv("GAUSSMETER_THREADS", "2")
        assert thread_cap() == 2
        monkeypatch.setenv("GAUSSMETER_THREADS", "not-a-number")
        assert thread_cap() == 1
        monkeypatch.delenv("GAUSSMETER_THREADS")
        assert thread_cap(default=1) == 1

    def test_correspondence_case(self, capsys):
        assert main(["verify", "--case", "correspondence", "--seed", "7"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_deterministic_report(self, capsys):
        assert main(["verify", "--case", "cp", "--seed", "3"]) == 0
        first = capsys.readouterr().out
        assert main(["verify", "--case", "cp", "--seed", "3"]) == 0
        assert capsys.readouterr().out == first


def test_load_matrix_file_complex(tmp_path):
    path = write_matrix(
        tmp_path / "m.json", [[1.0, 0.3], [0.3, 2.0]], im=[[0.0, 0.2], [-0.2, 0.0]],
        s=2,
    )
    matrix, modes = load_matrix_file(path, side=1)
    assert modes == 2
    assert matrix[0, 1] == pytest.approx(0.3 + 0.2j)


def test_load_matrix_file_size_mismatch(tmp_path):
    path = write_matrix(tmp_path / "m.json", [[1.0]], s=2)
    with pytest.raises(ValueError, match="requires"):
        load_matrix_file(path, side=1)
