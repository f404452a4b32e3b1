"""Integration test fixtures"""

from collections.abc import Callable
from pathlib import Path

import pytest

from src.main import main


@pytest.fixture
def output_dir(tmp_path) -> Path:
    """실험 산출물 디렉터리"""
    return tmp_path / "results"


@pytest.fixture
def cli(capsys, output_dir) -> Callable[..., tuple[int, str, str]]:
    """main(argv) 실행 후 (종료 코드, stdout, stderr); 실험 실행에는 --output-dir 를 붙인다"""

    def run(*argv: str) -> tuple[int, str, str]:
        args = list(argv)
        if args and args[0] != "list":
            args[1:1] = ["--output-dir", str(output_dir)]
        code = main(args)
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run
