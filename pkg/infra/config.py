import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator


class Settings(BaseModel):
    """Process-level settings read from QCS_* environment variables"""

    log_level: str = "WARNING"
    log_dir: Optional[str] = None
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    quad_tol: Optional[float] = Field(None, gt=0)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level {value}")
        return value

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "Settings":
        """Load an optional .env file, then read the environment"""
        load_dotenv(env_file, override=False)
        values = {
            "log_level": os.getenv("QCS_LOG_LEVEL"),
            "log_dir": os.getenv("QCS_LOG_DIR"),
            "threads": os.getenv("QCS_THREADS"),
            "quad_tol": os.getenv("QCS_QUAD_TOL"),
        }
        return cls(**{key: value for key, value in values.items() if value})
