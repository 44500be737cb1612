"""
Configuration Management for lattice-multiscale
"""

from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Ambient settings loaded from environment variables or a .env file.

    None of these knobs changes a computed coefficient or verdict; results
    depend only on explicit arguments and CLI flags.
    """

    # Logging
    log_level: str = "WARNING"

    # Oracle suite
    selfcheck_trials: int = 100
    selfcheck_seed: int = 0

    # Deepest order run when a caller does not ask for one
    default_order: int = 9

    # Tool server responses above this size are summarized
    max_response_bytes: int = 900_000

    class Config:
        env_prefix = "LATTICE_MULTISCALE_"
        env_file = ".env"
        case_sensitive = False


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance (singleton pattern)."""
    return Settings()
