import json
import subprocess
import sys
import warnings

import pytest

from fracstrip import cli, suites
from fracstrip.errors import ConvergenceWarning


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    data = json.loads(out.out) if out.out.strip() else None
    return code, data, out.err


class TestSeminorm:
    def test_indicator_close(self, capsys):
        code, data, _ = run(capsys, "seminorm", "--kind", "close", "--fn", "heaviside",
                            "--s", "0.75", "--p", "2", "--screen", "1")
        assert code == 0
        assert data["value_p"] == pytest.approx(4.0, rel=2e-2)
        assert data["config"]["s"] == 0.75

    def test_indicator_far(self, capsys):
        code, data, _ = run(capsys, "seminorm", "--kind", "far", "--fn", "heaviside",
                            "--s", "0.75", "--p", "2", "--screen", "1")
        assert code == 0
        assert data["value_p"] == pytest.approx(4 / 3, rel=2e-2)

    def test_config_file_and_override(self, capsys, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[common]\np = 2\n[seminorm]\nkind = close\nfn = heaviside\ns = 0.6\n")
        code, data, _ = run(capsys, "seminorm", "--config", str(ini), "--s", "0.75")
        assert code == 0
        assert data["config"]["s"] == 0.75 and data["config"]["kind"] == "close"
        assert data["value_p"] == pytest.approx(4.0, rel=2e-2)

    def test_unknown_config_key(self, capsys, tmp_path):
        ini = tmp_path / "bad.ini"
        ini.write_text("[seminorm]\ncolour = red\n")
        code, _, err = run(capsys, "seminorm", "--config", str(ini))
        assert code == 64 and "colour" in err

    def test_grid_input(self, capsys, tmp_path):
        from fracstrip import catalog
        from fracstrip.domain import Box, GridFunction

        path = tmp_path / "g.csv"
        GridFunction.sample(catalog.get("gaussian"), Box.centered(1, 6.0), (481,)).to_csv(path)
        code, data, _ = run(capsys, "seminorm", "--kind", "close", "--grid", str(path),
                            "--s", "0.75", "--screen", "1")
        code2, ref, _ = run(capsys, "seminorm", "--kind", "close", "--fn", "gaussian",
                            "--s", "0.75", "--screen", "1", "--half-width", "6")
        assert code == code2 == 0
        assert data["value_p"] == pytest.approx(ref["value_p"], rel=1e-2)


class TestExitCodes:
    def test_unknown_command(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 64 and "usage" in err

    def test_missing_s(self, capsys):
        code, _, _ = run(capsys, "seminorm", "--kind", "close", "--fn", "gaussian")
        assert code == 64

    def test_extend_flat_needs_b(self, capsys):
        code, _, err = run(capsys, "extend", "--s", "0.75", "--f-plus", "gaussian",
                           "--f-minus", "bump")
        assert code == 64 and "--b" in err

    def test_library_error(self, capsys):
        code, data, _ = run(capsys, "seminorm", "--kind", "close", "--fn", "nope", "--s", "0.75")
        assert code == 1 and data["error"] == "CatalogLookupError"

    def test_regime_error(self, capsys):
        code, data, _ = run(capsys, "extend", "--s", "0.3", "--b", "1", "--f-plus", "gaussian",
                            "--f-minus", "bump")
        assert code == 1 and data["error"] == "RegimeError"

    def test_convergence_warning_exit(self, capsys, monkeypatch):
        def noisy(args):
            warnings.warn("not converged", ConvergenceWarning)
            return {"ok": True}, cli.EXIT_OK

        monkeypatch.setitem(cli.COMMANDS, "catalog", noisy)
        code, data, _ = run(capsys, "catalog")
        assert code == 2 and data["warnings"] == ["not converged"]

    def test_verify_failure_exit(self, capsys, monkeypatch):
        monkeypatch.setattr(suites, "run_suite", lambda *a, **k: [
            suites.Check("broken", 2.0, 1.0, 1.0, False)])
        code, data, _ = run(capsys, "verify", "flat", "--s", "0.6")
        assert code == 3 and data["failed"] == ["broken"]

    def test_unknown_suite(self, capsys):
        code, _, _ = run(capsys, "verify", "everything")
        assert code == 64


class TestOtherCommands:
    def test_catalog_list(self, capsys):
        code, data, _ = run(capsys, "catalog", "list")
        assert code == 0 and any(f["name"] == "heaviside" for f in data["functions"])

    def test_catalog_show(self, capsys):
        code, data, _ = run(capsys, "catalog", "show", "chi")
        assert code == 0 and data["name"] == "heaviside"

    def test_extend_writes_grid(self, capsys, tmp_path):
        code, data, _ = run(capsys, "extend", "--s", "0.75", "--b", "1", "--f-plus", "constant",
                            "--f-plus-param", "c=0", "--f-minus", "gaussian",
                            "--out", str(tmp_path), "--grid-dims", "41x11")
        assert code == 0
        assert data["budget_ratio"] > 0 and data["budget_ratio"] < float("inf")
        lines = (tmp_path / "extension.csv").read_text().splitlines()
        assert lines[0] == "dims,spacing,origin" and len(lines) == 2 + 41 * 11

    def test_rates(self, capsys, tmp_path):
        code, data, _ = run(capsys, "rates", "--fn", "heaviside", "--s", "0.75", "--kind",
                            "unscreened", "--out", str(tmp_path))
        assert code == 0 and data["slope"] == pytest.approx(0.5, abs=0.1)
        assert (tmp_path / "rates_heaviside_unscreened.csv").exists()

    def test_verify_containment(self, capsys):
        code, data, _ = run(capsys, "verify", "containment", "--s", "0.75")
        assert code == 0 and data["pass"]
        assert data["verdicts"]["indicator"]["unscreened"] == "divergent"

    def test_json_keys_sorted(self, capsys):
        cli.main(["catalog", "show", "gaussian"])
        text = capsys.readouterr().out
        data = json.loads(text)
        assert list(data) == sorted(data)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracstrip", "catalog", "list"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and json.loads(proc.stdout)["functions"]
