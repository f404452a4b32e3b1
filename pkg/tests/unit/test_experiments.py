"""실험 설정, 목록, 결과 저장, 그래프 테스트"""

import json
from pathlib import Path

import pytest

from src.config import Settings, get_settings
from src.experiments.plot import render_loglog
from src.experiments.registry import EXPERIMENTS, build_config, get_experiment, render_table
from src.experiments.repository import ResultRepository, format_cell, jsonable
from src.experiments.schemas import ExperimentConfig, ExperimentResult, PlotSeries, parse_config_text
from src.shared.exceptions import ValidationException

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


# ──────────────────────────────────────────────
# 설정
# ──────────────────────────────────────────────
class TestSettings:
    def test_env_prefix(self, monkeypatch):
        monkeypatch.setenv("ENDCALC_NODE_BUDGET", "1234")
        monkeypatch.setenv("ENDCALC_THREADS", "3")
        settings = Settings()
        assert settings.node_budget == 1234
        assert settings.worker_count == 3

    def test_test_environment(self):
        assert get_settings().app_env == "test"
        assert get_settings().max_series_order == 4


class TestConfigText:
    def test_comments_and_blank_lines(self):
        values = parse_config_text("# header\n\nN = 3  # order\nhbars = 1/8, 1/16\n")
        assert values == {"N": "3", "hbars": "1/8, 1/16"}

    def test_dashes_become_underscores(self):
        assert parse_config_text("n-theta = 16") == {"n_theta": "16"}

    def test_missing_equals(self):
        with pytest.raises(ValidationException) as exc_info:
            parse_config_text("N = 1\nnonsense\n")
        assert exc_info.value.details["line"] == 2

    def test_duplicate_key(self):
        with pytest.raises(ValidationException):
            parse_config_text("N = 1\nN = 2\n")


class TestExperimentConfig:
    def test_fractions_and_complex(self):
        config = ExperimentConfig.from_text("experiment = selfadjoint\nhbars = 1/8,1/16\nz = 0+1i\nt = 1/2\n")
        assert config.hbars == [0.125, 0.0625]
        assert config.z == 1j
        assert config.t == 0.5

    def test_unknown_key(self):
        with pytest.raises(ValidationException) as exc_info:
            ExperimentConfig.from_text("experiment = l2-bound\ncolour = red\n")
        assert exc_info.value.details["keys"] == ["colour"]

    def test_invalid_value(self):
        with pytest.raises(ValidationException) as exc_info:
            ExperimentConfig.from_text("experiment = l2-bound\nhbars = 2\n")
        assert exc_info.value.exit_code == 2
        assert exc_info.value.details["field"] == "hbars"

    def test_text_round_trip(self):
        config = ExperimentConfig.from_text("experiment = residual-scaling\nz = -1+0.5j\nhbars = 1/8\nplot = false\n")
        again = ExperimentConfig.from_text(config.to_text())
        assert again == config


class TestRegistry:
    def test_seven_experiments(self):
        assert len(EXPERIMENTS) == 7
        assert get_experiment("block-decay").defaults["weight"] == "one"

    def test_unknown_experiment(self):
        with pytest.raises(ValidationException):
            get_experiment("nothing")

    def test_merge_order(self):
        """기본값 < 설정 파일 < 명령행"""
        config = build_config("l2-bound", "n_r = 32\nseed = 4\n", {"seed": "9"})
        assert config.n_theta == 16
        assert config.n_r == 32
        assert config.seed == 9

    def test_config_for_other_experiment(self):
        with pytest.raises(ValidationException):
            build_config("l2-bound", "experiment = selfadjoint\n")

    def test_render_table(self):
        lines = render_table().splitlines()
        assert len(lines) == 8
        rows = json.loads(render_table(as_json=True))
        assert [row["name"] for row in rows] == [spec.name for spec in EXPERIMENTS]


# ──────────────────────────────────────────────
# 결과 저장
# ──────────────────────────────────────────────
@pytest.fixture
def sample_result():
    return ExperimentResult(
        experiment="l2-bound",
        columns=["hbar", "value", "ok"],
        rows=[[0.125, 1e-3, True], [0.0625, 2.5e-4, False]],
        metrics={"z": 1j, "worst": float("inf")},
        checks={"bounded": True},
        thresholds={"cv_ratio": 2.0},
        plot=[PlotSeries(label="N=0", xs=[0.125, 0.0625], ys=[1e-3, 2.5e-4])],
    )


class TestResultRepository:
    def test_format_cell(self):
        assert format_cell(True) == "true"
        assert format_cell(0.1) == "0.1"
        assert format_cell(1 - 2j) == "1.0-2.0j"
        assert format_cell(None) == ""

    def test_jsonable(self):
        assert jsonable({"z": 1j, "x": [float("nan")]}) == {"z": {"re": 0.0, "im": 1.0}, "x": ["nan"]}

    def test_save_and_load(self, tmp_path, sample_result):
        config = build_config("l2-bound", overrides={"output_dir": str(tmp_path)})
        repo = ResultRepository(tmp_path)
        paths = repo.save(sample_result, config)
        assert set(paths) == {"results", "summary", "plot"}
        rows = repo.load_rows("l2-bound")
        assert rows[0] == {"hbar": "0.125", "value": "0.001", "ok": "true"}
        summary = repo.load_summary("l2-bound")
        assert summary["pass"] is True
        assert summary["metrics"]["worst"] == "inf"
        assert summary["config"]["experiment"] == "l2-bound"

    def test_plot_disabled(self, tmp_path, sample_result):
        config = build_config("l2-bound", overrides={"plot": "false"})
        paths = ResultRepository(tmp_path).save(sample_result, config)
        assert "plot" not in paths
        assert not (tmp_path / "l2-bound" / "plot.svg").exists()


class TestPlot:
    def test_svg_document(self):
        svg = render_loglog([PlotSeries(label="a<b", xs=[0.1, 0.01], ys=[1e-2, 1e-4])], "hbar", "residual")
        assert svg.startswith("<svg")
        assert svg.rstrip().endswith("</svg>")
        assert "a&lt;b" in svg
        assert svg.count("<circle") == 2

    def test_non_positive_values_skipped(self):
        svg = render_loglog([PlotSeries(label="zero", xs=[0.1, 0.01], ys=[0.0, 1e-3])], "x", "y")
        assert svg.count("<circle") == 1

    def test_empty_series(self):
        svg = render_loglog([], "x", "y")
        assert "<polyline" not in svg


class TestShippedConfigs:
    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.conf")), ids=lambda p: p.stem)
    def test_parses(self, path):
        text = path.read_text(encoding="utf-8")
        name = parse_config_text(text)["experiment"]
        config = build_config(name, text)
        assert config.experiment == name
