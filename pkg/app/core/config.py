"""
Configuration Management Module

Centralized configuration using Pydantic Settings for environment variables.

Author: Development Team
Version: 1.0.0
"""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.

    Every field can be overridden with an ``MX_AUDIT_`` prefixed variable or
    from a .env file in the working directory.

    Example .env file:
        MX_AUDIT_RESOLVER=9.9.9.9
        MX_AUDIT_CONCURRENCY=128
        MX_AUDIT_LOG_LEVEL=DEBUG
    """

    # Resolution
    resolver: str = Field(default="8.8.8.8", description="Upstream recursive resolver address")
    timeout_ms: int = Field(default=5000, gt=0, description="Per-query timeout in milliseconds")
    retries: int = Field(default=0, ge=0, description="Retries on timeout (0 = single pass)")
    concurrency: int = Field(default=64, gt=0, description="Domains resolved concurrently")

    # Classification
    hosting_rules_path: Optional[str] = Field(
        default=None,
        description="JSON file with hosting provider suffix rules",
    )

    # Output
    output_dir: str = Field(default="out", description="Directory for scan artifacts")
    error_exit_threshold: float = Field(
        default=0.5,
        ge=0.0,
        le=1.0,
        description="Errored-domain share above which a scan exits with code 2",
    )

    # Logging
    log_level: str = Field(default="INFO", description="Logging level: DEBUG, INFO, WARNING, ERROR")
    log_format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="logging.basicConfig format string",
    )

    model_config = SettingsConfigDict(
        env_prefix="MX_AUDIT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


# Global settings instance
settings = Settings()
