"""명령행 테스트 - 목록, 종료 코드, 진단"""

import json


class TestList:
    def test_table(self, cli):
        code, out, _ = cli("list")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 8
        assert lines[1].startswith("residual-scaling")

    def test_json(self, cli):
        code, out, _ = cli("list", "--json")
        assert code == 0
        rows = json.loads(out)
        assert len(rows) == 7
        assert {"name", "description", "anchor"} <= set(rows[0])


class TestUsageErrors:
    def test_unknown_experiment(self, cli):
        code, _, err = cli("nothing")
        assert code == 2
        assert "unknown experiment" in err

    def test_unknown_key(self, cli):
        code, _, err = cli("expr-selftest", "--colour", "red")
        assert code == 2
        assert "colour" in err

    def test_missing_value(self, cli):
        code, _, err = cli("expr-selftest", "--seed")
        assert code == 2
        assert "missing value" in err

    def test_missing_config_file(self, cli, tmp_path):
        code, _, err = cli("expr-selftest", "--config", str(tmp_path / "absent.conf"))
        assert code == 2
        assert err.startswith("endcalc: expr-selftest:")

    def test_not_elliptic(self, cli):
        code, _, err = cli("residual-scaling", "--z", "1", "--N", "0", "--weight", "one", "--hbars", "1/8")
        assert code == 5
        assert "z too close to symbol range" in err

    def test_series_order_budget(self, cli):
        code, _, _ = cli("residual-scaling", "--N", "7")
        assert code == 2


class TestRun:
    def test_config_file_and_pass(self, cli, tmp_path, output_dir):
        config = tmp_path / "selftest.conf"
        config.write_text("# 자체 점검\nexperiment = expr-selftest\nseed = 3\n", encoding="utf-8")
        code, out, _ = cli("expr-selftest", "--config", str(config), "--plot=false")
        assert code == 0
        assert out.startswith("expr-selftest: pass")
        summary = json.loads((output_dir / "expr-selftest" / "summary.json").read_text(encoding="utf-8"))
        assert summary["config"]["seed"] == 3
