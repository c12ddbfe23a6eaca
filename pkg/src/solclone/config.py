"""Pipeline configuration: one dataclass, JSON file + flag overrides.

Defaults are the methodology's published parameters (activity filter 10 tx /
2024 cutoff, 6-token comment filter, 0.8/0.8 similarity thresholds, 95%/5%
sampling, 26-word LLM gate). Every artifact records the config that produced
it via `config_hash`.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from .util import canonical_dumps, sha256_hex


class ConfigError(ValueError):
    pass


def _default_code_embedder() -> dict:
    return {"kind": "code_baseline", "model_id": "hashed-subword-v1", "dim": 128}


def _default_comment_embedder() -> dict:
    return {"kind": "comment_baseline", "model_id": "hashed-tf-v1", "dim": 128}


def _default_provider() -> dict:
    return {"kind": "stub", "model_id": "stub-model", "temperature": 0.0}


@dataclass
class PipelineConfig:
    out_dir: str = "out"
    corpus_dir: Optional[str] = None  # defaults to <out_dir>/corpus
    addresses_csv: Optional[str] = None
    sources_dir: Optional[str] = None

    min_tx: int = 10
    cutoff: str = "2024-01-01T00:00:00Z"
    min_comment_tokens: int = 6

    code_embedder: dict = field(default_factory=_default_code_embedder)
    comment_embedder: dict = field(default_factory=_default_comment_embedder)
    code_threshold: float = 0.8
    comment_threshold: float = 0.8
    pairing_policy: str = "same-name"

    confidence: float = 0.95
    margin: float = 0.05
    proportion: float = 0.5
    seed: int = 42

    min_words: int = 26
    top_contracts: int = 100
    scan_threshold: float = 0.8
    provider: dict = field(default_factory=_default_provider)

    service_port: int = 8000
    run_timestamp: Optional[str] = None  # fixes artifact timestamps for reproducible runs

    def to_json(self) -> dict:
        return asdict(self)

    @property
    def config_hash(self) -> str:
        return sha256_hex(canonical_dumps(self.to_json()))[:16]

    def resolved_corpus_dir(self) -> Path:
        return Path(self.corpus_dir) if self.corpus_dir else Path(self.out_dir) / "corpus"

    def path(self, name: str) -> Path:
        return Path(self.out_dir) / name

    def meta(self, stage: str) -> dict:
        return {"stage": stage, "config_hash": self.config_hash, "config": self.to_json()}

    def validate(self) -> None:
        if self.min_tx < 0:
            raise ConfigError("min_tx must be >= 0")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError("confidence must be in (0,1)")
        if not 0.0 < self.margin <= 1.0:
            raise ConfigError("margin must be in (0,1]")
        if not 0.0 <= self.proportion <= 1.0:
            raise ConfigError("proportion must be in [0,1]")
        for name in ("code_threshold", "comment_threshold", "scan_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0,1]")
        if self.min_comment_tokens < 0:
            raise ConfigError("min_comment_tokens must be >= 0")
        if self.min_words < 0:
            raise ConfigError("min_words must be >= 0")
        if self.pairing_policy not in ("all-pairs", "same-name", "signature", "same-name-signature"):
            raise ConfigError(f"unknown pairing policy {self.pairing_policy!r}")
        if self.provider.get("kind") not in ("stub", "http", "replay"):
            raise ConfigError(f"unknown provider kind {self.provider.get('kind')!r}")


def load_config(path: Optional[str | Path] = None, overrides: Optional[dict[str, Any]] = None) -> PipelineConfig:
    """Precedence: flag overrides > config file > defaults."""
    values: dict[str, Any] = {}
    if path:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        values.update(loaded)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    config = PipelineConfig(**values)
    config.validate()
    return config
