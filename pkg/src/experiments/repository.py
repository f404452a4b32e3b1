"""Experiment Repository - results.csv, summary.json, plot.svg 기록"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any

from src.experiments.plot import render_loglog
from src.experiments.schemas import ExperimentConfig, ExperimentResult

logger = logging.getLogger(__name__)


def format_cell(value: Any) -> str:
    """재실행 시 바이트 단위로 같은 CSV 셀"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j"
    if value is None:
        return ""
    return str(value)


def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


class ResultRepository:
    """<output_dir>/<experiment>/ 아래 산출물"""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def directory(self, experiment: str) -> Path:
        return self.root / experiment

    def save(self, result: ExperimentResult, config: ExperimentConfig) -> dict[str, Path]:
        target = self.directory(result.experiment)
        target.mkdir(parents=True, exist_ok=True)
        paths = {
            "results": self._write_csv(target / "results.csv", result),
            "summary": self._write_summary(target / "summary.json", result, config),
        }
        if config.plot and result.plot:
            svg = render_loglog(result.plot, result.x_label, result.y_label, title=result.experiment)
            paths["plot"] = target / "plot.svg"
            paths["plot"].write_text(svg, encoding="utf-8")
        logger.info(f"{result.experiment}: wrote {', '.join(p.name for p in paths.values())} to {target}")
        return paths

    @staticmethod
    def _write_csv(path: Path, result: ExperimentResult) -> Path:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(result.columns)
            writer.writerows([format_cell(v) for v in row] for row in result.rows)
        return path

    @staticmethod
    def _write_summary(path: Path, result: ExperimentResult, config: ExperimentConfig) -> Path:
        summary = {
            "experiment": result.experiment,
            "pass": result.passed,
            "checks": result.checks,
            "thresholds": result.thresholds,
            "metrics": jsonable(result.metrics),
            "config": jsonable(config.model_dump()),
        }
        path.write_text(json.dumps(summary, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        return path

    def load_summary(self, experiment: str) -> dict[str, Any]:
        return json.loads((self.directory(experiment) / "summary.json").read_text(encoding="utf-8"))

    def load_rows(self, experiment: str) -> list[dict[str, str]]:
        with (self.directory(experiment) / "results.csv").open(encoding="utf-8") as handle:
            return list(csv.DictReader(handle))
