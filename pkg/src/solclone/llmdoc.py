"""LLM-backed documentation: summary generation, the zero-shot clone probe,
gating of expensive calls, and the hidden-clone scan for uncommented functions.

Providers come in three flavors (HTTP chat-completion client, replayable
cache, deterministic stub) so every test runs offline.
"""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol

from . import embed as embed_mod
from .extractor import FunctionRecord, signature_of
from .util import format_rfc3339, read_jsonl, sha256_hex, utc_now, write_jsonl

logger = logging.getLogger(__name__)

DEFAULT_MIN_WORDS = 26
DEFAULT_SCAN_THRESHOLD = 0.8

BASE_PROMPT_PREFIX = "Create a summary(no additional feedback) of this Solidity function: "
STRUCTURED_TEMPLATE = (
    "Response plain-text template: a brief overview of the function’s purpose, "
    "implementation details, and noteworthy behaviors, brief parameters description, "
    "a brief description of the return value."
)
CLASSIFY_SYSTEM_MESSAGE = (
    "You are a helpful software engineering assistant, "
    "your task is to say if the Solidity functions are semantic clones."
)
CLASSIFY_USER_TEMPLATE = (
    "Here are the two code functions:\n"
    "First function: {first}\n"
    "Second function: {second}\n"
    "Your response is just YES or NO."
)


class PromptStyle(str, Enum):
    BASE = "base"
    STRUCTURED = "structured"
    DIRECT_CLASSIFICATION = "direct"


class ProviderError(Exception):
    pass


class UnparseableVerdict(ProviderError):
    pass


def render_summary_prompt(code: str, style: PromptStyle) -> str:
    if style == PromptStyle.BASE:
        return BASE_PROMPT_PREFIX + code
    if style == PromptStyle.STRUCTURED:
        return BASE_PROMPT_PREFIX + code + "\n" + STRUCTURED_TEMPLATE
    raise ValueError(f"{style} is not a summarization style")


def render_classification_messages(first_code: str, second_code: str) -> list[dict]:
    return [
        {"role": "system", "content": CLASSIFY_SYSTEM_MESSAGE},
        {
            "role": "user",
            "content": CLASSIFY_USER_TEMPLATE.format(first=first_code, second=second_code),
        },
    ]


@dataclass(frozen=True)
class LlmProviderSpec:
    endpoint: str
    model_id: str
    temperature: float = 0.0
    auth_env: Optional[str] = None  # env var holding the key; never stored


class ChatProvider(Protocol):
    model_id: str

    def complete(self, messages: list[dict]) -> str: ...


class HttpChatProvider:
    """JSON chat-completion client: POST {model, temperature, messages}."""

    def __init__(self, spec: LlmProviderSpec):
        self.spec = spec
        self.model_id = spec.model_id

    def complete(self, messages: list[dict]) -> str:
        import os

        import requests

        headers = {}
        if self.spec.auth_env:
            key = os.environ.get(self.spec.auth_env)
            if not key:
                raise ProviderError(f"auth variable {self.spec.auth_env} is not set")
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = requests.post(
                self.spec.endpoint,
                json={
                    "model": self.spec.model_id,
                    "temperature": self.spec.temperature,
                    "messages": messages,
                },
                headers=headers,
                timeout=120,
            )
            resp.raise_for_status()
            payload = resp.json()
        except Exception as exc:  # noqa: BLE001
            raise ProviderError(f"provider {self.model_id}: {exc}") from exc
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"provider {self.model_id}: malformed response") from exc


_FN_NAME_RE = re.compile(r"\bfunction\s+([A-Za-z_$][A-Za-z0-9_$]*)")


class StubProvider:
    """Deterministic offline provider.

    Summaries describe the function by name and parameter count, so
    homonymous pairs produce near-identical summaries; classification answers
    YES when both function names match. Responses can be pinned per prompt.
    """

    def __init__(self, responses: Optional[dict[str, str]] = None, model_id: str = "stub-model"):
        self.model_id = model_id
        self.responses = responses or {}
        self.calls = 0

    def complete(self, messages: list[dict]) -> str:
        self.calls += 1
        prompt = messages[-1]["content"]
        if prompt in self.responses:
            return self.responses[prompt]
        if messages[0].get("content") == CLASSIFY_SYSTEM_MESSAGE:
            names = _FN_NAME_RE.findall(prompt)
            return "YES" if len(names) >= 2 and names[0] == names[1] else "NO"
        m = _FN_NAME_RE.search(prompt)
        name = m.group(1) if m else "anonymous"
        params = prompt.count(",")
        return (
            f"The {name} function performs the {name} operation on its inputs "
            f"and updates contract state accordingly (arity hint {min(params, 9)})."
        )


class ReplayProvider:
    """Serves recorded responses; refuses to go to the network."""

    def __init__(self, recordings: dict[str, str], model_id: str):
        self.model_id = model_id
        self.recordings = recordings

    def complete(self, messages: list[dict]) -> str:
        key = sha256_hex(json.dumps(messages, sort_keys=True, ensure_ascii=False))
        if key not in self.recordings:
            raise ProviderError(f"no recorded response for prompt {key[:12]}")
        return self.recordings[key]


def _call_with_retries(
    provider: ChatProvider,
    messages: list[dict],
    retries: int = 3,
    backoff: float = 0.2,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    last: Optional[Exception] = None
    for attempt in range(retries):
        try:
            return provider.complete(messages)
        except ProviderError as exc:
            last = exc
            if attempt + 1 < retries:
                sleep(backoff * (2**attempt))
    raise ProviderError(f"provider failed after {retries} attempts: {last}")


@dataclass(frozen=True)
class SummaryRecord:
    function_id: str
    style: str
    model_id: str
    summary_text: str
    created_at: str
    cache_key: str

    def to_json(self) -> dict:
        return {
            "function_id": self.function_id,
            "style": self.style,
            "model_id": self.model_id,
            "summary_text": self.summary_text,
            "created_at": self.created_at,
            "cache_key": self.cache_key,
        }


def summary_cache_key(code: str, style: PromptStyle, model_id: str) -> str:
    return sha256_hex(f"{style.value}\x1f{model_id}\x1f{code}")


class SummaryCache:
    """Immutable summary store keyed by (normalized code, style, model_id)."""

    def __init__(self, path: Optional[str | Path] = None):
        self.path = Path(path) if path else None
        self._store: dict[str, SummaryRecord] = {}
        if self.path and self.path.exists():
            for rec in read_jsonl(self.path):
                record = SummaryRecord(
                    function_id=rec["function_id"],
                    style=rec["style"],
                    model_id=rec["model_id"],
                    summary_text=rec["summary_text"],
                    created_at=rec.get("created_at", ""),
                    cache_key=rec["cache_key"],
                )
                self._store[record.cache_key] = record

    def get(self, cache_key: str) -> Optional[SummaryRecord]:
        return self._store.get(cache_key)

    def put(self, record: SummaryRecord) -> None:
        if record.cache_key in self._store:
            return  # summaries are immutable once stored
        self._store[record.cache_key] = record
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_json(), sort_keys=True, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self._store)


def summarize(
    function: FunctionRecord,
    style: PromptStyle,
    provider: ChatProvider,
    cache: Optional[SummaryCache] = None,
    clock: Optional[Callable[[], str]] = None,
) -> SummaryRecord:
    """Render the style's exact prompt and obtain a summary, going to the
    provider only on cache misses."""
    if not function.function_code:
        raise ValueError(f"{function.function_id}: cannot summarize empty code")
    if style not in (PromptStyle.BASE, PromptStyle.STRUCTURED):
        raise ValueError(f"{style} is not a summarization style")
    key = summary_cache_key(function.function_code, style, provider.model_id)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    prompt = render_summary_prompt(function.function_code, style)
    text = _call_with_retries(provider, [{"role": "user", "content": prompt}])
    if not text or not text.strip():
        raise ProviderError(f"provider returned an empty summary for {function.function_id}")
    record = SummaryRecord(
        function_id=function.function_id,
        style=style.value,
        model_id=provider.model_id,
        summary_text=text,
        created_at=(clock or (lambda: format_rfc3339(utc_now())))(),
        cache_key=key,
    )
    if cache is not None:
        cache.put(record)
    return record


def classify_pair_llm(a: FunctionRecord, b: FunctionRecord, provider: ChatProvider) -> bool:
    """Zero-shot clone probe; only a trimmed, case-insensitive YES/NO parses."""
    if not a.function_code or not b.function_code:
        raise ValueError("cannot classify empty functions")
    messages = render_classification_messages(a.function_code, b.function_code)
    answer = _call_with_retries(provider, messages).strip().lower()
    if answer == "yes":
        return True
    if answer == "no":
        return False
    raise UnparseableVerdict(f"expected YES or NO, got {answer[:60]!r}")


def word_count(record: FunctionRecord) -> int:
    """The length gate counts whitespace-separated words of normalized code."""
    return len(record.function_code.split())


def gate_candidates(
    pairs: Iterable,
    functions_by_id: dict[str, FunctionRecord],
    min_words: int = DEFAULT_MIN_WORDS,
    code_threshold: float = 0.8,
) -> list:
    """Cheap heuristics in front of the LLM: homonymy, compatible signatures,
    low code similarity, and a minimum function length on both sides."""
    eligible = []
    for score in pairs:
        if not score.same_name or not score.signature_compatible:
            continue
        if not score.cd_s < code_threshold:
            continue
        a = functions_by_id[score.function_id_a]
        b = functions_by_id[score.function_id_b]
        if word_count(a) < min_words or word_count(b) < min_words:
            continue
        eligible.append(score)
    return eligible


@dataclass(frozen=True)
class ScanHit:
    pair_id: str
    function_id_a: str
    function_id_b: str
    cd_s: float
    cm_s: float
    summary_a: SummaryRecord
    summary_b: SummaryRecord

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "function_id_a": self.function_id_a,
            "function_id_b": self.function_id_b,
            "cd_s": self.cd_s,
            "cm_s": self.cm_s,
            "summary_a": self.summary_a.to_json(),
            "summary_b": self.summary_b.to_json(),
        }


def hidden_clone_scan(
    functions: list[FunctionRecord],
    comment_spec: embed_mod.EmbedderSpec,
    provider: ChatProvider,
    code_spec: Optional[embed_mod.EmbedderSpec] = None,
    embedding_cache: Optional[embed_mod.EmbeddingCache] = None,
    summary_cache: Optional[SummaryCache] = None,
    threshold: float = DEFAULT_SCAN_THRESHOLD,
    min_words: int = DEFAULT_MIN_WORDS,
    clock: Optional[Callable[[], str]] = None,
) -> list[ScanHit]:
    """Surface semantic-clone candidates among uncommented functions.

    Homonymous, signature-compatible, low-code-similarity pairs of long-enough
    functions get Base-style summaries for both sides; pairs whose summary
    embeddings exceed the comment-similarity threshold are returned, each
    carrying its summaries for human review. Provider failures skip the pair,
    not the scan.
    """
    from .pairs import PairingPolicy, generate_pairs

    code_spec = code_spec or embed_mod.EmbedderSpec(
        kind=embed_mod.CODE_BASELINE, model_id="hashed-subword-v1"
    )
    cache = embedding_cache or embed_mod.EmbeddingCache()
    summaries = summary_cache if summary_cache is not None else SummaryCache()
    functions_by_id = {f.function_id: f for f in functions}

    scores = []
    for a, b in generate_pairs(functions, PairingPolicy.SAME_NAME_AND_SIGNATURE):
        code_a = cache.embed(a.function_code, code_spec)
        code_b = cache.embed(b.function_code, code_spec)
        cd_s = embed_mod.code_similarity(code_a, code_b)
        scores.append(
            _GatedPair(
                function_id_a=a.function_id,
                function_id_b=b.function_id,
                cd_s=cd_s,
                same_name=True,
                signature_compatible=True,
            )
        )
    eligible = gate_candidates(scores, functions_by_id, min_words=min_words)

    hits: list[ScanHit] = []
    for score in eligible:
        a = functions_by_id[score.function_id_a]
        b = functions_by_id[score.function_id_b]
        try:
            summary_a = summarize(a, PromptStyle.BASE, provider, cache=summaries, clock=clock)
            summary_b = summarize(b, PromptStyle.BASE, provider, cache=summaries, clock=clock)
        except ProviderError as exc:
            logger.warning("skipping pair %s|%s: %s", a.function_id, b.function_id, exc)
            continue
        emb_a = cache.embed(summary_a.summary_text, comment_spec)
        emb_b = cache.embed(summary_b.summary_text, comment_spec)
        try:
            cm_s = embed_mod.comment_similarity(emb_a, emb_b)
        except embed_mod.UndefinedSimilarity:
            logger.warning("skipping pair %s|%s: degenerate summaries", a.function_id, b.function_id)
            continue
        if cm_s > threshold:
            hits.append(
                ScanHit(
                    pair_id=f"{a.function_id}|{b.function_id}",
                    function_id_a=a.function_id,
                    function_id_b=b.function_id,
                    cd_s=score.cd_s,
                    cm_s=cm_s,
                    summary_a=summary_a,
                    summary_b=summary_b,
                )
            )
    hits.sort(key=lambda h: h.pair_id)
    return hits


@dataclass(frozen=True)
class _GatedPair:
    function_id_a: str
    function_id_b: str
    cd_s: float
    same_name: bool
    signature_compatible: bool


def write_scan(path: str | Path, hits: list[ScanHit], meta: Optional[dict] = None) -> Path:
    return write_jsonl(path, (h.to_json() for h in hits), meta=meta)
