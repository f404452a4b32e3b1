"""설정 관리 모듈"""

import os
from functools import lru_cache
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """애플리케이션 설정 (환경변수 ENDCALC_* 또는 .env)"""

    model_config = SettingsConfigDict(
        env_prefix="ENDCALC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_env: Literal["development", "production", "test"] = "development"
    log_level: str = "INFO"
    output_dir: str = "./results"

    # Parallelism (0 = CPU 개수)
    threads: int = 0

    # Expression engine
    node_budget: int = 200_000
    max_series_order: int = 4

    # Seminorm / ellipticity sampling
    max_seminorm_order: int = 4
    momentum_bound: float = 8.0
    p_samples: int = 33
    q_samples: int = 9

    # Quantization kernels
    chunk_points: int = 64

    @property
    def worker_count(self) -> int:
        """실제 사용할 스레드 수"""
        if self.threads > 0:
            return self.threads
        return os.cpu_count() or 1


@lru_cache
def get_settings() -> Settings:
    """설정 싱글톤 반환"""
    return Settings()
