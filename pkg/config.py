"""Application configuration via environment variables."""

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix SETOPT_)."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="SETOPT_",
        extra="ignore",
    )

    # Application
    debug: bool = False
    log_level: str = "INFO"

    # Outputs
    output_dir: Path = Path("runs")  # default directory for traces and bench files

    # Randomness
    default_seed: int = 20240101

    # Solver
    partition_cap: int = 1024  # max elements of P_x enumerated per iteration

    # Benchmarking
    bench_workers: int = 1  # >1 runs batch entries on a thread pool


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
