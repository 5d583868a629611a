"""The command-line interface: formats, stability, exit codes."""

import csv
import io
import json
from contextlib import redirect_stdout
from pathlib import Path

import pytest

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from dustcocycle.cli import CSV_COLUMNS, main

REPO_ROOT = Path(__file__).resolve().parent.parent


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


class TestConverge:
    def test_csv_shape_and_values(self):
        code, out = run_cli(
            "converge", "--preset", "cantor-dust", "--functions", "const-xy",
            "--n", "1..4", "--workers", "1",
        )
        assert code == 0
        assert out.endswith("\n") and "\r" not in out
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0].keys()) == list(CSV_COLUMNS)
        assert [int(r["n"]) for r in rows] == [1, 2, 3, 4]
        got = float(rows[0]["phi_re"])
        assert got == pytest.approx(2.0 * 4.0 / 9.0, rel=1e-12)
        assert float(rows[2]["err_ratio"]) == pytest.approx(4.0 / 9.0, rel=1e-9)

    def test_seventeen_significant_digits(self):
        code, out = run_cli(
            "converge", "--functions", "const-xy", "--n", "2", "--workers", "1",
        )
        row = list(csv.DictReader(io.StringIO(out)))[0]
        # %.17g round-trips doubles: parsing and re-formatting is the identity
        assert row["phi_re"] == format(float(row["phi_re"]), ".17g")
        assert float(row["phi_re"]) == pytest.approx(2.0 * (4.0 / 9.0) ** 2, rel=1e-14)

    def test_flux_error_column_shrinks(self):
        code, out = run_cli(
            "converge", "--preset", "cantor-dust", "--functions", "bott-flux",
            "--n", "4..8", "--workers", "2",
        )
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        errs = [float(r["abs_err"]) for r in rows]
        assert errs == sorted(errs, reverse=True)
        assert errs[-1] < 0.25

    def test_bytes_stable_across_worker_counts(self, tmp_path):
        paths = []
        for w in (1, 2):
            p = tmp_path / f"w{w}.csv"
            code, _ = run_cli(
                "converge", "--functions", "bott-flux", "--n", "3..6",
                "--workers", str(w), "--no-timing", "--out", str(p),
            )
            assert code == 0
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]

    @pytest.mark.skipif(jsonschema is None, reason="jsonschema not installed")
    def test_json_validates_against_shipped_schema(self, tmp_path):
        p = tmp_path / "report.json"
        code, _ = run_cli(
            "converge", "--functions", "bott-flux", "--n", "2..4",
            "--format", "json", "--workers", "2", "--out", str(p),
        )
        assert code == 0
        payload = json.loads(p.read_text())
        schema = json.loads((REPO_ROOT / "schemas" / "report.schema.json").read_text())
        jsonschema.validate(payload, schema)
        assert payload["meta"]["command"] == "converge"
        assert len(payload["records"]) == 3


class TestLipschitz:
    def test_riemann_preset_closed_form(self):
        code, out = run_cli("lipschitz", "--n", "1..6", "--workers", "1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        for row in rows:
            n = int(row["n"])
            assert float(row["abs_phi"]) == pytest.approx(2.0 * (4.0 / 9.0) ** n, rel=1e-12)
            assert row["within_bound"] == "1"

    def test_pullback_preset_rejected(self):
        code, _ = run_cli("lipschitz", "--functions", "bott-flux", "--n", "1..2")
        assert code == 2


class TestPairing:
    def test_small_run_reports_oracle(self):
        code, out = run_cli(
            "pairing", "--degree", "1", "--n", "6", "--grid", "128", "--workers", "2",
        )
        assert code == 0
        row = list(csv.DictReader(io.StringIO(out)))[0]
        assert float(row["target_re"]) == pytest.approx(2.0, abs=1e-3)
        assert float(row["phi_re"]) == pytest.approx(2.0, abs=0.05)


class TestPointCommands:
    def test_cantor_prints_fraction_and_float(self):
        code, out = run_cli("cantor", "--p", "1", "--n", "1")
        assert code == 0
        assert out.strip() == "1/2 0.5"

    def test_cantor_json(self):
        code, out = run_cli("cantor", "--p", "2", "--n", "2", "--format", "json")
        payload = json.loads(out)
        assert payload == {"p": 2, "n": 2, "fraction": "1/4", "value": 0.25}

    def test_dimension(self):
        code, out = run_cli("dimension", "--preset", "cantor-dust")
        assert code == 0
        assert out.strip() == "1.261859507"

    def test_oracle_quadrature(self):
        code, out = run_cli("oracle", "--functions", "bott-flux", "--grid", "128")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("quadrature 19.739208802")
        assert lines[1].startswith("closed-form 19.739208802")


class TestExitCodes:
    def test_unknown_preset(self):
        code, _ = run_cli("dimension", "--preset", "menger-sponge")
        assert code == 2

    def test_unknown_functions(self):
        code, _ = run_cli("converge", "--functions", "nope", "--n", "1..2")
        assert code == 2

    def test_budget_exceeded(self):
        code, _ = run_cli("phi", "--functions", "const-xy", "--n", "13")
        assert code == 2

    def test_bad_range(self):
        code, _ = run_cli("converge", "--functions", "const-xy", "--n", "5..3")
        assert code == 2

    def test_mode_mismatch(self):
        code, _ = run_cli("phi", "--functions", "const-xy", "--n", "2", "--mode", "pullback")
        assert code == 2

    def test_selftest_passes(self):
        code, out = run_cli("selftest")
        assert code == 0
        assert "selftest passed" in out
