from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SPANRAY_", env_file=".env", extra="ignore")

    output_dir: str = Field(default="artifacts", description="Where samples, reports and renderings are written")
    log_level: str = "INFO"
    constructions_dir: str = "constructions"
    templates_dir: str = "templates"
    workers: Optional[int] = Field(default=None, ge=1, description="Process count when the config sets none")


@lru_cache
def get_settings() -> Settings:
    return Settings()
