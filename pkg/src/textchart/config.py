"""Configuration loading: JSON file plus environment overrides.

The config file (path via ``TEXTCHART_CONFIG`` or passed explicitly) may
carry ``backend`` settings, ``uncertainty`` score defaults and
``recommender`` rule thresholds. The live backend's API key is looked up at
request time from the environment variable named by ``backend.api_key_env``;
it never lands in records or traces.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .backend import BackendConfig
from .pipeline import PipelineOptions, UncertaintyDefaults
from .recommend import Thresholds


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8008
    data_dir: str = "./data"
    max_doc_bytes: int = 1_000_000
    workers: int = 2
    cors_origins: tuple[str, ...] = ("*",)
    backend: BackendConfig = field(default_factory=BackendConfig)


def _file_settings(path: str | Path | None) -> dict:
    if path is None:
        path = os.environ.get("TEXTCHART_CONFIG")
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_backend_config(path: str | Path | None = None, env=None) -> BackendConfig:
    env = env if env is not None else os.environ
    settings = _file_settings(path).get("backend", {})
    return BackendConfig(
        url=env.get("BACKEND_URL", settings.get("url", BackendConfig.url)),
        model=env.get("BACKEND_MODEL", settings.get("model", BackendConfig.model)),
        api_key_env=env.get("BACKEND_API_KEY_ENV",
                            settings.get("api_key_env", BackendConfig.api_key_env)),
        max_retries=int(env.get("BACKEND_MAX_RETRIES",
                                settings.get("max_retries", BackendConfig.max_retries))),
        temperature=float(env.get("BACKEND_TEMPERATURE",
                                  settings.get("temperature", BackendConfig.temperature))),
        max_input_chars=int(env.get("BACKEND_MAX_INPUT_CHARS",
                                    settings.get("max_input_chars",
                                                 BackendConfig.max_input_chars))),
    )


def _dataclass_from(settings: dict, cls):
    known = {f.name for f in dataclasses.fields(cls)}
    return cls(**{k: v for k, v in settings.items() if k in known})


def load_pipeline_options(granularity: str = "fine",
                          path: str | Path | None = None, env=None) -> PipelineOptions:
    """Pipeline options with uncertainty defaults and rule thresholds from config."""
    settings = _file_settings(path)
    backend = load_backend_config(path, env)
    return PipelineOptions(
        granularity=granularity,
        max_retries=backend.max_retries,
        uncertainty=_dataclass_from(settings.get("uncertainty", {}), UncertaintyDefaults),
        thresholds=_dataclass_from(settings.get("recommender", {}), Thresholds),
        decoding=(("temperature", backend.temperature),),
    )


def load_service_config(path: str | Path | None = None, env=None) -> ServiceConfig:
    env = env if env is not None else os.environ
    settings = _file_settings(path)
    cors = env.get("CORS_ORIGINS", settings.get("cors_origins", "*"))
    if isinstance(cors, str):
        cors = tuple(o.strip() for o in cors.split(",") if o.strip())
    return ServiceConfig(
        port=int(env.get("PORT", settings.get("port", ServiceConfig.port))),
        data_dir=env.get("DATA_DIR", settings.get("data_dir", ServiceConfig.data_dir)),
        max_doc_bytes=int(env.get("MAX_DOC_BYTES",
                                  settings.get("max_doc_bytes", ServiceConfig.max_doc_bytes))),
        workers=int(env.get("WORKERS", settings.get("workers", ServiceConfig.workers))),
        cors_origins=tuple(cors),
        backend=load_backend_config(path, env),
    )
