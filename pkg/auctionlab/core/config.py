from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file
env_path = Path(__file__).parent.parent.parent / ".env"
load_dotenv(dotenv_path=env_path)


class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = "auctionlab"
    APP_ENV: str = "development"  # development, test, production
    SCHEMA_VERSION: int = 1

    # Logging
    LOG_LEVEL: str = "INFO"  # DEBUG, INFO, WARNING, ERROR, CRITICAL
    LOG_FORMAT: str = "json"  # json, text
    LOG_FILE: Optional[str] = None

    # Execution
    N_JOBS: int = Field(default=1, ge=1)
    OUTPUT_DIR: str = "runs"
    MC_SHARD_SIZE: int = Field(default=65536, ge=1)

    # Numerical grids
    IRONING_GRID: int = Field(default=4096, ge=16)
    PROFIT_GRID: int = Field(default=100001, ge=16)
    STRATEGY_GRID: int = Field(default=4096, ge=16)
    QUANTILE_CAP: float = Field(default=1e-9, gt=0.0, lt=1e-2)

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        level = str(v).upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator("LOG_FORMAT", mode="before")
    @classmethod
    def normalize_log_format(cls, v: str) -> str:
        fmt = str(v).lower()
        if fmt not in {"json", "text"}:
            raise ValueError(f"Unknown log format: {v}")
        return fmt

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_prefix="AUCTIONLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


# Create settings instance
settings = Settings()
