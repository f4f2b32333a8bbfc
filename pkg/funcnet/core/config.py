"""
Configuration settings for the functional network toolkit
"""

from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict
from decouple import config


class Settings(BaseSettings):
    """Process-level settings"""

    model_config = SettingsConfigDict(env_file=".env", env_prefix="FUNCNET_", extra="ignore")

    # Logging
    log_level: str = config("FUNCNET_LOG_LEVEL", default="INFO")

    # Parallelism (benchmark cells)
    threads: int = config("FUNCNET_THREADS", default=1, cast=int)

    # Serialization
    csv_digits: int = 17
    model_format_version: int = 1

    # Long-running reproduction tests
    run_slow: bool = config("FUNCNET_RUN_SLOW", default=False, cast=bool)

    # Environment
    environment: str = config("FUNCNET_ENVIRONMENT", default="development")


@lru_cache()
def get_settings() -> Settings:
    return Settings()
