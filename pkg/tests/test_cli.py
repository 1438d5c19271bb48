import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from projbound.cli import TABLE12_HEADER, TABLE34_HEADER, main
from projbound.report import format_matrix


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "A": write(tmp_path / "A.txt", "2 2 real\n1 0\n0 0\n"),
        "B41": write(tmp_path / "B41.txt", "2 2 real\n1/3 0\n0 1/20\n"),
        "Bintro": write(tmp_path / "Bintro.txt", "2 2 real\n1/2 1\n0 1\n"),
        "wide": write(tmp_path / "wide.txt", "2 3 real\n1 0 0\n0 0 0\n"),
        "bad": write(tmp_path / "bad.txt", "2 2 real\n1 0\n0\n"),
    }


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestVerify:
    def test_example_pair(self, files, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["verify", "--a", files["A"], "--b", files["B41"], "--out", str(out), "--format", "csv,json"]) == 0
        rows = read_csv(out / "identities.csv")
        assert len(rows) == 10
        assert {r["status"] for r in rows} == {"ok", "n/a"}
        payload = json.loads((out / "identities.json").read_text())
        assert payload["schema_version"] and len(payload["rows"]) == 10
        assert payload["aggregates"]["primal"] == pytest.approx(1.0)

    def test_malformed(self, files, tmp_path, capsys):
        assert main(["verify", "--a", files["A"], "--b", files["bad"], "--out", str(tmp_path)]) == 2
        assert "row" in capsys.readouterr().err

    def test_shape_mismatch(self, files, tmp_path, capsys):
        assert main(["verify", "--a", files["A"], "--b", files["wide"], "--out", str(tmp_path)]) == 2
        assert "shape mismatch" in capsys.readouterr().err

    def test_missing_file(self, files, tmp_path, capsys):
        assert main(["verify", "--a", files["A"], "--b", str(tmp_path / "nope.txt"), "--out", str(tmp_path)]) == 2

    def test_argparse_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["verify", "--a", "x"])
        assert info.value.code == 2
        with pytest.raises(SystemExit) as info:
            main(["bounds", "--a", "x", "--b", "y", "--format", "pdf"])
        assert info.value.code == 2

    def test_violation_exit_1(self, files, tmp_path):
        # rtol=0 turns ordinary rounding residue into a reported violation.
        rng = np.random.default_rng(0)
        A = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        B = A + 0.3 * (rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5)))
        a = write(tmp_path / "ra.txt", format_matrix(A))
        b = write(tmp_path / "rb.txt", format_matrix(B))
        assert main(["verify", "--a", a, "--b", b, "--out", str(tmp_path), "-q"]) == 0
        assert main(["verify", "--a", a, "--b", b, "--out", str(tmp_path), "-q", "--rtol", "0"]) == 1


class TestBounds:
    def test_intro_pair(self, files, tmp_path):
        out = tmp_path / "o"
        assert main(["bounds", "--a", files["A"], "--b", files["Bintro"], "--out", str(out), "-q"]) == 0
        rows = {r["key"]: r for r in read_csv(out / "bounds.csv")}
        assert float(rows["CHEN_UP"]["value"]) == 6.25
        assert rows["CHEN_UP"]["status"] == "ok"
        assert rows["NEW_UP1_EQRANK"]["status"] == "n/a"

    def test_unperturbed_gaps_zero(self, files, tmp_path):
        out = tmp_path / "o"
        assert main(["bounds", "--a", files["Bintro"], "--b", files["Bintro"], "--out", str(out), "-q"]) == 0
        for r in read_csv(out / "bounds.csv"):
            if r["applicable"] == "true" and not r["key"].startswith("RANK"):
                assert abs(float(r["rel_gap"])) < 1e-12

    def test_random_pair_all_ok(self, tmp_path):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((5, 4)) @ np.diag([1, 1, 0, 0]) @ rng.standard_normal((4, 4))
        B = rng.standard_normal((5, 4))
        a = write(tmp_path / "a.txt", format_matrix(A))
        b = write(tmp_path / "b.txt", format_matrix(B))
        out = tmp_path / "o"
        assert main(["bounds", "--a", a, "--b", b, "--out", str(out), "-q", "--format", "csv,json"]) == 0
        rows = read_csv(out / "bounds.csv")
        assert {r["status"] for r in rows} <= {"ok", "n/a"}
        payload = json.loads((out / "bounds.json").read_text())
        assert len(rows) == len(payload["rows"])
        assert "beta2" in payload["config"]["formula_notes"]

    def test_force_general_rank(self, files, tmp_path):
        out = tmp_path / "o"
        assert main(["bounds", "--a", files["A"], "--b", files["A"], "--out", str(out), "-q",
                     "--force-general-rank"]) == 0
        rows = {r["key"]: r for r in read_csv(out / "bounds.csv")}
        assert rows["CHEN_UP_EQRANK"]["reason"] == "general-rank formulas forced"

    def test_bad_param_grid(self, files, tmp_path):
        assert main(["bounds", "--a", files["A"], "--b", files["B41"], "--out", str(tmp_path),
                     "--grid", "0:2:3"]) == 2


class TestReproduce:
    def test_manifest_and_values(self, tmp_path):
        out = tmp_path / "r"
        assert main(["reproduce", "--out", str(out), "-q"]) == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["fig1_left.svg", "fig1_right.svg", "fig2_left.svg", "fig2_right.svg",
                         "tables1-2.csv", "tables3-4.csv"]
        t12 = read_csv(out / "tables1-2.csv")
        assert list(t12[0]) == TABLE12_HEADER
        assert list(read_csv(out / "tables3-4.csv")[0]) == TABLE34_HEADER
        assert len(t12) == 90

    def test_half_row(self, tmp_path):
        out = tmp_path / "r"
        assert main(["reproduce", "--out", str(out), "--grid", "0.5", "-q", "--format", "csv"]) == 0
        row = read_csv(out / "tables1-2.csv")[0]
        e = 0.5
        assert float(row["CHEN_UP"]) == pytest.approx(1 + 1 / e ** 2 + 1 / (1 + e) ** 2, rel=1e-10)
        assert float(row["LI_UP"]) == pytest.approx(0.99 + 1 / (1 + e) ** 2, rel=1e-10)

    def test_figure_series_match_csv(self, tmp_path):
        out = tmp_path / "r"
        assert main(["reproduce", "--out", str(out), "-q"]) == 0
        t12 = read_csv(out / "tables1-2.csv")
        svg = (out / "fig1_left.svg").read_text()
        ys = {m.group(1): [float(v) for v in m.group(2).split()]
              for m in re.finditer(r'data-name="([^"]+)" data-x="[^"]*" data-y="([^"]*)"', svg)}
        assert ys["CHEN_UP"] == [float(r["CHEN_UP"]) for r in t12]
        assert all(c > n for c, n in zip(ys["CHEN_UP"], ys["NEW_UP1"]))

    def test_bad_grid(self, tmp_path):
        assert main(["reproduce", "--out", str(tmp_path), "--grid", "0.05:0.5:3"]) == 2


class TestSweep:
    @pytest.mark.parametrize("scenario", ["example-4.1", "example-4.2", "intro"])
    def test_scenarios(self, scenario, tmp_path):
        out = tmp_path / "s"
        args = ["sweep", "--scenario", scenario, "--out", str(out), "-q", "--format", "csv,json"]
        if scenario != "intro":
            args += ["--grid", "0.2:0.8:4"]
        assert main(args) == 0
        csvs = list(out.glob("sweep_*.csv"))
        assert len(csvs) == 1
        assert {r["status"] for r in read_csv(csvs[0])} <= {"ok", "n/a"}

    def test_param_grid(self, tmp_path):
        out = tmp_path / "s"
        assert main(["sweep", "--scenario", "example-4.2", "--grid", "0.5", "--param-grid", "0,1",
                     "--out", str(out), "-q"]) == 0
        keys = {r["key"] for r in read_csv(out / "sweep_example_4_2.csv")}
        assert "COMB_UP_WEIGHTED[lambda=0,mu=1]" in keys


class TestBench:
    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["bench", "--samples", "40", "--seed", "1", "-q", "--format", "csv,json"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b), "--workers", "2"]) == 0
        assert (a / "bench.csv").read_bytes() == (b / "bench.csv").read_bytes()
        ja, jb = json.loads((a / "bench.json").read_text()), json.loads((b / "bench.json").read_text())
        ja.pop("metadata"), jb.pop("metadata")
        assert ja == jb
        assert ja["aggregates"]["violations"] == 0

    def test_custom_ensemble(self, tmp_path):
        out = tmp_path / "c"
        assert main(["bench", "--ensemble", "custom", "--m", "5", "--n", "3", "--rank-a", "2", "--rank-b", "3",
                     "--profile", "geometric:4", "--samples", "5", "--out", str(out), "-q"]) == 0
        assert json.loads((out / "bench.json").read_text())["config"]["spec"]["profile"] == "geometric:4"

    def test_invalid(self, tmp_path):
        assert main(["bench", "--ensemble", "custom", "--m", "2", "--n", "2", "--rank-a", "3",
                     "--out", str(tmp_path), "-q"]) == 2
        assert main(["bench", "--samples", "0", "--out", str(tmp_path), "-q"]) == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "projbound", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "projbound" in res.stdout
