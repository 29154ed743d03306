from contextlib import contextmanager
from typing import Iterator

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="QPC_", env_file=".env", case_sensitive=False, extra="ignore"
    )

    app_name: str = "GHZ QPC Simulator"
    log_level: str = "WARNING"
    schema_version: str = "ghz-qpc/1"

    # Protocol defaults
    default_decoy_count: int = 16
    default_threshold: float = 0.0
    default_max_attempts: int = 1

    # Statevector engine
    max_qubits: int = 20
    norm_tolerance: float = 1e-12
    normalization_slack: float = 1e-8
    unitary_tolerance: float = 1e-10
    constraint_tolerance: float = 1e-10

    # Monte Carlo
    default_trials: int = 10_000
    min_trials: int = 100
    sigma_multiplier: float = 3.0
    default_jobs: int = 1

    # Exhaustive correctness
    exhaustive_max_n: int = 8
    exhaustive_full_up_to: int = 5
    exhaustive_sample_pairs: int = 1000

    # Transcript persistence
    transcript_dir: str = "transcripts"


class FlagSettings(Settings):
    """Settings built only from explicit values; environment and .env are ignored"""

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        return (init_settings,)


settings = Settings()


@contextmanager
def applied(values: Settings) -> Iterator[Settings]:
    """Copy every field of `values` onto the shared settings, restoring on exit"""
    saved = settings.model_dump()
    for name in Settings.model_fields:
        setattr(settings, name, getattr(values, name))
    try:
        yield settings
    finally:
        for name, value in saved.items():
            setattr(settings, name, value)
