import csv
import io
import json
import math
import subprocess
import sys

import pytest

from renyi_sdpi import cli, verify


@pytest.fixture
def files(tmp_path):
    paths = {
        "z05": ('{"rows": [[1, 0], [0.5, 0.5]]}', "z05.json"),
        "dirac0": ('{"weights": [1, 0]}', "dirac0.json"),
        "uniform2": ('{"weights": [0.5, 0.5]}', "uniform2.json"),
        "uniform3": ('{"weights": [0.2, 0.3, 0.5]}', "uniform3.json"),
        "bsc_csv": ("0.9,0.1\n0.1,0.9\n", "bsc.csv"),
        "broken": ('{"rows": [[1, 0], [0.5', "broken.json"),
        "unnormalized": ('{"rows": [[0.6, 0.6], [0.5, 0.5]]}', "unnormalized.json"),
    }
    out = {}
    for key, (text, name) in paths.items():
        p = tmp_path / name
        p.write_text(text)
        out[key] = str(p)
    return out


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestExamples:
    def test_z_channel_order_infinity(self, files, capsys):
        code, out, _ = run(["sdpi", "--kind", "renyi", "--alpha", "inf", "--kernel", files["z05"]], capsys)
        assert code == 0
        (est,) = json.loads(out)
        assert est["value"] == 1.0
        assert est["certificate"]["type"] == "RowPair"
        assert est["method"] == "ClosedForm"

    def test_order_two_divergence(self, files, capsys):
        code, out, _ = run(["div", "--alpha", "2", "--nu", files["dirac0"], "--mu", files["uniform2"]], capsys)
        assert code == 0
        (res,) = json.loads(out)
        assert res["value"] == pytest.approx(math.log(2), rel=1e-15)

    def test_figure_three(self, capsys):
        code, out, _ = run(["figure", "fig3"], capsys)
        assert code == 0
        data = rows(out)
        assert list(data[0]) == ["eps", "eta_infty", "eta_tv", "eta_chi2"]
        for r in data:
            e = float(r["eps"])
            assert float(r["eta_tv"]) == pytest.approx(abs(1 - 2 * e), abs=1e-12)
            assert float(r["eta_infty"]) == pytest.approx(1 - min(e / (1 - e), (1 - e) / e), abs=1e-12)
            assert float(r["eta_chi2"]) == pytest.approx((1 - 2 * e) ** 2, abs=1e-9)
        assert "0.98999999999999999" in out  # 17 significant digits


class TestFigures:
    def test_figure_one_regimes(self, capsys):
        code, out, _ = run(["figure", "fig1"], capsys)
        assert code == 0
        data = rows(out)
        assert len(data) == 200 and float(data[-1]["alpha"]) == 10.0
        for r in data:
            a, ren, hel, chi = (float(r[k]) for k in ("alpha", "eta_renyi", "eta_hellinger", "eta_chi2"))
            if a < 1:
                assert ren <= hel + 1e-6
            elif a > 1:
                assert ren >= hel - 1e-6
            assert ren >= chi - 1e-9 and hel >= chi - 1e-9

    def test_figure_two_sandwich(self, capsys):
        code, out, _ = run(["figure", "fig2"], capsys)
        assert code == 0
        for r in rows(out):
            lo, v, hi = float(r["tv_lower"]), float(r["eta_infty"]), float(r["tv_upper"])
            assert lo <= v + 1e-12 and v <= hi + 1e-12 and hi <= 1.0

    def test_figure_four(self, capsys):
        code, out, _ = run(["figure", "fig4"], capsys)
        data = rows(out)
        assert code == 0 and len(data) == 201
        assert data[0] == {"n": "0", "true_dev_sq": "7", "linear_bound": "7", "nonlinear_bound": "7"}

    def test_json_format(self, capsys):
        code, out, _ = run(["figure", "fig3", "--format", "json"], capsys)
        assert code == 0 and len(json.loads(out)) == 99


class TestDeterminism:
    @pytest.mark.parametrize("argv", [["figure", "fig1"], ["sdpi", "--kernel", "bsc:0.2", "--alpha", "3"],
                                      ["sdpi", "--kernel", "bsc:0.2", "--alpha", "3", "--mu", "0.3,0.7"]])
    def test_byte_identical(self, argv, capsys):
        assert run(argv, capsys)[1] == run(argv, capsys)[1]

    def test_env_seed_overrides_flag(self, monkeypatch, capsys):
        argv = ["sdpi", "--kernel", "bsc:0.2", "--mu", "0.2,0.8", "--alpha", "3", "--restarts", "4"]
        want = run(argv + ["--seed", "5"], capsys)[1]
        monkeypatch.setenv("SDPI_SEED", "5")
        assert run(argv + ["--seed", "0"], capsys)[1] == want


class TestCommands:
    def test_div_many_kinds_csv(self, files, capsys):
        argv = ["div", "--nu", "0.5,0.5", "--mu", files["dirac0"], "--kind", "renyi", "--kind", "tv",
                "--kind", "chi2", "--alpha", "0.5", "--alpha", "2", "--format", "csv"]
        code, out, _ = run(argv, capsys)
        assert code == 0
        got = {r["kind"]: r["value"] for r in rows(out)}
        assert got == {"renyi(0.5)": got["renyi(0.5)"], "renyi(2.0)": "inf", "tv": "0.5", "chi2": "inf"}

    def test_infinite_values_in_json(self, files, capsys):
        code, out, _ = run(["div", "--nu", files["uniform2"], "--mu", files["dirac0"]], capsys)
        assert json.loads(out)[0]["value"] == "inf"

    def test_csv_kernel_and_output_file(self, files, tmp_path, capsys):
        target = tmp_path / "out.json"
        code, out, _ = run(["sdpi", "--kernel", files["bsc_csv"], "--kind", "tv", "-o", str(target)], capsys)
        assert code == 0 and out == ""
        assert json.loads(target.read_text())[0]["value"] == pytest.approx(0.8, abs=1e-15)

    def test_sdpi_at_measure_uses_exact_routes(self, capsys):
        argv = ["sdpi", "--kernel", "bsc:0.25", "--mu", "0.5,0.5", "--kind", "renyi", "--alpha", "inf",
                "--kind", "chi2"]
        code, out, _ = run(argv, capsys)
        inf, chi = json.loads(out)
        assert inf["method"] == "SubsetEnumeration" and chi["method"] == "Spectral"
        assert chi["value"] == pytest.approx(0.25, abs=1e-12)

    def test_sweep_eps(self, capsys):
        code, out, _ = run(["sweep", "eps", "--values", "0.1:0.4:4", "--family", "tv"], capsys)
        assert code == 0
        assert [float(r["value"]) for r in rows(out)] == pytest.approx([0.8, 0.6, 0.4, 0.2], abs=1e-12)

    def test_sweep_alpha(self, capsys):
        argv = ["sweep", "alpha", "--kernel", "z:0.5", "--values", "1.5,2,inf", "--restarts", "4"]
        code, out, _ = run(argv, capsys)
        assert code == 0
        data = rows(out)
        assert [r["alpha"] for r in data] == ["1.5", "2", "inf"]
        assert all(float(r["value"]) >= 1 - 1e-6 for r in data)

    def test_mixing(self, capsys):
        argv = ["mixing", "--kernel", "bsc:0.1", "--start", "1,0", "--steps", "10", "--format", "csv"]
        code, out, _ = run(argv, capsys)
        data = rows(out)
        assert code == 0 and len(data) == 11
        assert float(data[0]["true_dev_sq"]) == 1.0

    def test_verify_small(self, capsys):
        code, out, _ = run(["verify", "-n", "5", "--suite", "sandwich", "--suite", "characterization"], capsys)
        report = json.loads(out)
        assert code == 0 and report["ok"]
        assert [s["suite"] for s in report["suites"]] == ["sandwich", "characterization"]

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "renyi_sdpi", "div", "--nu", "1,0", "--mu", "0.5,0.5",
                              "--format", "csv"], capture_output=True, text=True)
        assert out.returncode == 0
        assert out.stdout.splitlines()[1] == "renyi(2.0),0.69314718055994529"


class TestExitCodes:
    def test_usage(self, capsys):
        assert run([], capsys)[0] == 1
        assert run(["figure", "fig9"], capsys)[0] == 1
        assert run(["sdpi", "--kernel", "bsc:0.1", "--restarts", "0"], capsys)[0] == 1
        assert run(["sweep", "alpha", "--values", "1,2"], capsys)[0] == 1

    def test_parse_errors(self, files, capsys):
        assert run(["sdpi", "--kernel", files["broken"]], capsys)[0] == 2
        assert run(["sdpi", "--kernel", "missing.json"], capsys)[0] == 2
        assert run(["div", "--nu", "a,b", "--mu", "1"], capsys)[0] == 2
        assert run(["sdpi", "--kernel", files["unnormalized"]], capsys)[0] == 2
        assert run(["div", "--nu", "1,0", "--mu", "1,0", "--alpha", "x"], capsys)[0] == 2

    def test_dimension_mismatch(self, files, capsys):
        code, _, err = run(["sdpi", "--kernel", files["z05"], "--mu", files["uniform3"]], capsys)
        assert code == 2 and "kernel" in err

    def test_bad_env_seed(self, monkeypatch, capsys):
        monkeypatch.setenv("SDPI_SEED", "abc")
        assert run(["sdpi", "--kernel", "bsc:0.1", "--mu", "0.5,0.5"], capsys)[0] == 2

    def test_verify_failure(self, monkeypatch, capsys):
        monkeypatch.setitem(verify.SUITES, "sandwich", lambda rng, max_dim, config: (False, {"x": 1.0}))
        code, out, _ = run(["verify", "-n", "3", "--suite", "sandwich"], capsys)
        assert code == 3
        report = json.loads(out)
        assert not report["ok"] and report["suites"][0]["passed"] == 0


def test_verify_thousand_instances_per_suite(capsys):
    code, out, _ = run(["verify", "-n", "1000", "--max-dim", "6", "--format", "csv"], capsys)
    assert code == 0, out
    for r in rows(out):
        assert r["passed"] == r["total"] == "1000"
