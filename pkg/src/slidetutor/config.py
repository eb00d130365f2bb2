"""Service configuration: JSON file plus environment-variable overrides.

Secrets and service URLs never travel on the command line; the config file
(path given by flag) carries them, and ``SLIDETUTOR_*`` environment
variables override individual entries for deployment tweaks. Unknown keys
are ignored for forward compatibility.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaViolationError

ENV_PREFIX = "SLIDETUTOR_"

EMBEDDER_MODES = ("hash", "external")
RERANK_MODES = ("lexical", "external")
GENERATOR_MODES = ("passthrough", "external")
TTS_MODES = ("null", "external")


@dataclass
class AdapterConfig:
    mode: str
    url: str | None = None
    dim: int | None = None


@dataclass
class AppConfig:
    listen_addr: str = "127.0.0.1:8000"
    corpus_dir: str = "corpus"
    index_path: str = "index"
    db_path: str = "slidetutor.db"
    k: int = 10
    max_input_chars: int = 2048
    session_lifetime_hours: float = 24.0
    static_dir: str | None = None
    embedder: AdapterConfig = field(
        default_factory=lambda: AdapterConfig(mode="hash", dim=256)
    )
    rerank: AdapterConfig = field(default_factory=lambda: AdapterConfig(mode="lexical"))
    generator: AdapterConfig = field(
        default_factory=lambda: AdapterConfig(mode="passthrough")
    )
    tts: AdapterConfig = field(default_factory=lambda: AdapterConfig(mode="null"))

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])


def _adapter_from(raw: dict, name: str, modes: tuple[str, ...], default_mode: str,
                  default_dim: int | None = None) -> AdapterConfig:
    section = raw.get(name, {})
    if not isinstance(section, dict):
        raise SchemaViolationError(f"config {name!r} section must be an object")
    mode = section.get("mode", default_mode)
    if mode not in modes:
        raise SchemaViolationError(
            f"config {name}.mode must be one of {list(modes)}, got {mode!r}"
        )
    url = section.get("url")
    url = os.environ.get(f"{ENV_PREFIX}{name.upper()}_URL", url)
    if mode == "external" and not url:
        raise SchemaViolationError(f"config {name}.url required for external mode")
    dim = section.get("dim", default_dim)
    return AdapterConfig(mode=mode, url=url, dim=dim)


def load_config(path: str | Path | None = None) -> AppConfig:
    """Build an AppConfig from a JSON file and the environment.

    With no path, defaults plus environment overrides apply (useful for
    tests and local bootstrap).

    Raises:
        SchemaViolationError: unreadable JSON or invalid values.
    """
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise SchemaViolationError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise SchemaViolationError("config root must be a JSON object")

    def scalar(key: str, default, cast):
        value = raw.get(key, default)
        env = os.environ.get(f"{ENV_PREFIX}{key.upper()}")
        if env is not None:
            value = env
        try:
            return cast(value) if value is not None else None
        except (TypeError, ValueError) as exc:
            raise SchemaViolationError(f"config {key!r}: {exc}") from exc

    defaults = AppConfig()
    cfg = AppConfig(
        listen_addr=scalar("listen_addr", defaults.listen_addr, str),
        corpus_dir=scalar("corpus_dir", defaults.corpus_dir, str),
        index_path=scalar("index_path", defaults.index_path, str),
        db_path=scalar("db_path", defaults.db_path, str),
        k=scalar("k", defaults.k, int),
        max_input_chars=scalar("max_input_chars", defaults.max_input_chars, int),
        session_lifetime_hours=scalar(
            "session_lifetime_hours", defaults.session_lifetime_hours, float
        ),
        static_dir=scalar("static_dir", None, str),
        embedder=_adapter_from(raw, "embedder", EMBEDDER_MODES, "hash", 256),
        rerank=_adapter_from(raw, "rerank", RERANK_MODES, "lexical"),
        generator=_adapter_from(raw, "generator", GENERATOR_MODES, "passthrough"),
        tts=_adapter_from(raw, "tts", TTS_MODES, "null"),
    )
    if cfg.k <= 0 or cfg.max_input_chars <= 0:
        raise SchemaViolationError("k and max_input_chars must be positive")
    if cfg.embedder.mode == "external" and not cfg.embedder.dim:
        raise SchemaViolationError("config embedder.dim required for external mode")
    return cfg
