from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from ol_index_ident_core.engine.options import EngineOptions
from ol_index_ident_core.models import G_KINDS, KERNEL_KINDS, SCENARIO_MODES


def _level_names_mapping() -> dict[str, int]:
    # logging.getLevelNamesMapping() is Python 3.11+; same mapping on 3.10.
    getter = getattr(logging, "getLevelNamesMapping", None)
    if getter is not None:
        return getter()
    return dict(logging._nameToLevel)

Command = Literal["gen", "audit", "identify", "verify", "kernel-test", "replay"]


class RunConfig(BaseSettings):
    """
    One CLI invocation. Precedence: explicit values > INDEX_IDENT_* environment >
    the JSON file named by `config_path` > defaults.
    """

    model_config = SettingsConfigDict(
        env_prefix="INDEX_IDENT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    command: Command = "identify"
    config_path: Path | None = None
    scenario_path: Path | None = None
    result_path: Path | None = None
    out: Path | None = None

    seed: int = 0
    mode: str = "connected"
    J: int = Field(default=2, ge=1)
    dX: int = Field(default=1, ge=1)
    nX: int = Field(default=6, ge=1)
    nZ: int = Field(default=2, ge=1)
    kernel: str | None = None
    g_kind: str = "identity"
    draws: int = Field(default=20_000, ge=1)

    tol_match: float = 1e-9
    tol_h: float | None = None
    tol_lambda: float | None = None
    starts_per_box: int | None = None
    budget: int | None = None
    workers: int = 1
    lambda_samples: int = Field(default=100, ge=0)
    probe_samples: int = Field(default=64, ge=2)

    log_level: str = "INFO"
    report_format_version: int = 1

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        if v.upper() not in _level_names_mapping():
            raise ValueError(f"unknown log level {v!r}")
        return v.upper()

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, v: str) -> str:
        if v not in SCENARIO_MODES:
            raise ValueError(f"mode must be one of {', '.join(SCENARIO_MODES)}")
        return v

    @field_validator("kernel")
    @classmethod
    def _known_kernel(cls, v: str | None) -> str | None:
        if v is not None and v not in KERNEL_KINDS:
            raise ValueError(f"kernel must be one of {', '.join(KERNEL_KINDS)}")
        return v

    @field_validator("g_kind")
    @classmethod
    def _known_g(cls, v: str) -> str:
        if v not in G_KINDS:
            raise ValueError(f"g_kind must be one of {', '.join(G_KINDS)}")
        return v

    @field_validator("tol_match", "tol_h", "tol_lambda")
    @classmethod
    def _positive(cls, v: float | None) -> float | None:
        if v is not None and v <= 0:
            raise ValueError("tolerances must be > 0")
        return v

    @field_validator("workers")
    @classmethod
    def _workers(cls, v: int) -> int:
        if v < 1:
            raise ValueError("workers must be >= 1")
        return v

    @field_validator("budget", "starts_per_box")
    @classmethod
    def _at_least_one(cls, v: int | None) -> int | None:
        if v is not None and v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("report_format_version")
    @classmethod
    def _format_version(cls, v: int) -> int:
        if v != 1:
            raise ValueError("only report format version 1 is supported")
        return v

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        sources: list[PydanticBaseSettingsSource] = [init_settings, env_settings, dotenv_settings]
        config_path = getattr(init_settings, "init_kwargs", {}).get("config_path")
        if config_path is not None:
            sources.append(JsonConfigSettingsSource(settings_cls, json_file=Path(config_path)))
        return tuple(sources)

    def engine_options(self) -> EngineOptions:
        return EngineOptions(
            tol_match=self.tol_match,
            starts_per_box=self.starts_per_box,
            budget=self.budget,
            workers=self.workers,
        )


def load_run_config(**overrides: object) -> RunConfig:
    # unset CLI flags arrive as None and must not shadow env or file values
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})
