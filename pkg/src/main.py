"""endcalc 명령행 엔트리포인트

    endcalc list [--json]
    endcalc <experiment> [--config FILE] [--key value]...
"""

import argparse
import logging
import sys
from pathlib import Path

from src.config import get_settings
from src.experiments.registry import build_config, render_table
from src.experiments.repository import ResultRepository
from src.experiments.service import run
from src.shared.exceptions import CalcException, ValidationException

logger = logging.getLogger("main")

EXIT_CHECKS_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="endcalc",
        allow_abbrev=False,
        description="semiclassical pseudodifferential calculus on ℝ×S¹: experiment runner",
    )
    parser.add_argument("experiment", help="experiment name, or 'list'")
    parser.add_argument("--config", type=Path, help="flat key=value config file")
    parser.add_argument("--json", action="store_true", help="machine-readable list output")
    return parser


def parse_overrides(extra: list[str]) -> dict[str, str]:
    """--key value 또는 --key=value 쌍"""
    overrides: dict[str, str] = {}
    i = 0
    while i < len(extra):
        token = extra[i]
        if not token.startswith("--") or token == "--":
            raise ValidationException("expected --key value", details={"token": token})
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        elif i + 1 < len(extra):
            value = extra[i + 1]
            i += 2
        else:
            raise ValidationException("missing value for override", details={"key": key})
        overrides[key.replace("-", "_")] = value
    return overrides


def main(argv: list[str] | None = None) -> int:
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
    )
    args, extra = build_parser().parse_known_args(argv)

    if args.experiment == "list":
        print(render_table(as_json=args.json))
        return 0

    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        config = build_config(args.experiment, text, parse_overrides(extra))
        logger.debug(f"config:\n{config.to_text()}")
        result = run(config)
        ResultRepository(config.output_dir).save(result, config)
    except CalcException as exc:
        print(f"endcalc: {args.experiment}: {exc.one_line()}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"endcalc: {args.experiment}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    status = "pass" if result.passed else "FAIL"
    print(f"{config.experiment}: {status} ({', '.join(f'{k}={v}' for k, v in result.checks.items())})")
    return 0 if result.passed else EXIT_CHECKS_FAILED


if __name__ == "__main__":
    sys.exit(main())
