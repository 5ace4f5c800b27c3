"""Configuration management using pydantic-settings."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Parallelism
    fairmetric_threads: int = Field(
        default=4,
        ge=1,
        description="Maximum number of worker threads used by verification suites",
    )

    # Reproducibility and tolerances
    default_seed: int = Field(default=7, description="Seed used when none is given")
    default_tol: float = Field(
        default=1e-8,
        gt=0,
        description="Relative tolerance for axiom verification",
    )

    # Suite sizes
    schur_trials: int = Field(
        default=10_000,
        ge=1,
        description="Random Robin Hood operations in the Schur-concavity suite",
    )
    axiom_samples: int = Field(
        default=100,
        ge=1,
        description="Random vectors per beta in the axiom suite",
    )
    alpha_trials: int = Field(
        default=1_000,
        ge=1,
        description="Random trials in the alpha-fairness suite",
    )
    bounds_trials: int = Field(
        default=10_000,
        ge=1,
        description="Random trials in the diagnostics suite",
    )

    # Tradeoff solver
    solver_starts: int = Field(default=16, ge=1, description="Multi-start count")
    solver_max_iterations: int = Field(
        default=10_000,
        ge=1,
        description="Iteration cap for projected gradient ascent",
    )
    solver_tol: float = Field(
        default=1e-10,
        gt=0,
        description="Relative objective improvement below which ascent stops",
    )
    solver_grid_pitch: float = Field(
        default=1e-3,
        gt=0,
        description="Grid pitch of the dense oracle used for n <= 3",
    )

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: str | None = Field(
        default=None,
        description="Optional rotating log file path (loguru format tokens allowed)",
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
