"""Working-corpus management for Solidity sources.

Ingests exported address/activity CSVs, filters for contracts that are still in
use, retrieves source files through a pluggable fetcher, deduplicates sources
whose only differences are whitespace, and computes dataset statistics.
"""

from __future__ import annotations

import csv
import logging
import re
import statistics
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Optional, Protocol

from .util import (
    format_rfc3339,
    md5_hex,
    parse_rfc3339,
    read_jsonl,
    sha256_hex,
    write_jsonl,
)

logger = logging.getLogger(__name__)

DEFAULT_MIN_TX = 10
DEFAULT_CUTOFF = datetime(2024, 1, 1, tzinfo=timezone.utc)

REQUIRED_ADDRESS_COLUMNS = ("address", "tx_count", "last_transaction_time")

_ADDRESS_RE = re.compile(r"^0x[0-9a-f]{40}$")
_WS_RE = re.compile(r"\s+")


class SchemaError(ValueError):
    """The input file is missing required columns."""


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass(frozen=True)
class AddressRecord:
    address: str
    tx_count: int
    last_tx_time: datetime


@dataclass(frozen=True)
class SourceFile:
    file_id: str
    raw_text: str
    normalized_checksum: str
    address: Optional[str] = None


@dataclass(frozen=True)
class DuplicateGroup:
    checksum: str
    survivor: str
    members: tuple[str, ...]


@dataclass
class DatasetStats:
    file_count: int
    contract_count: int
    function_count: int
    public_external_count: int
    commented_function_count: int
    median_function_length: Optional[float]
    longest_function_length: Optional[int]
    shortest_function_length: Optional[int]
    median_comment_length: Optional[float]
    longest_comment_length: Optional[int]
    shortest_comment_length: Optional[int]
    version_distribution: dict[str, tuple[int, float]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "file_count": self.file_count,
            "contract_count": self.contract_count,
            "function_count": self.function_count,
            "public_external_count": self.public_external_count,
            "commented_function_count": self.commented_function_count,
            "median_function_length": self.median_function_length,
            "longest_function_length": self.longest_function_length,
            "shortest_function_length": self.shortest_function_length,
            "median_comment_length": self.median_comment_length,
            "longest_comment_length": self.longest_comment_length,
            "shortest_comment_length": self.shortest_comment_length,
            "version_distribution": {
                k: {"count": c, "percentage": p} for k, (c, p) in self.version_distribution.items()
            },
        }


def ingest_address_list(stream: IO[str]) -> tuple[list[AddressRecord], list[RowError]]:
    """Parse an exported address/activity CSV.

    Returns well-formed rows as AddressRecords and malformed rows as RowErrors
    (reported, never silently dropped). A missing required column raises
    SchemaError.
    """
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    missing = [col for col in REQUIRED_ADDRESS_COLUMNS if col not in header]
    if missing:
        raise SchemaError(f"address CSV is missing required columns: {', '.join(missing)}")

    records: list[AddressRecord] = []
    errors: list[RowError] = []
    seen: set[str] = set()
    for line_no, row in enumerate(reader, start=2):
        address = (row.get("address") or "").strip().lower()
        if not _ADDRESS_RE.match(address):
            errors.append(RowError(line_no, f"invalid address {address!r}"))
            continue
        if address in seen:
            errors.append(RowError(line_no, f"duplicate address {address}"))
            continue
        try:
            tx_count = int((row.get("tx_count") or "").strip())
        except ValueError:
            errors.append(RowError(line_no, f"unparseable tx_count {row.get('tx_count')!r}"))
            continue
        if tx_count < 0:
            errors.append(RowError(line_no, f"negative tx_count {tx_count}"))
            continue
        try:
            last_tx = parse_rfc3339(row.get("last_transaction_time") or "")
        except ValueError:
            errors.append(
                RowError(line_no, f"unparseable last_transaction_time {row.get('last_transaction_time')!r}")
            )
            continue
        seen.add(address)
        records.append(AddressRecord(address=address, tx_count=tx_count, last_tx_time=last_tx))
    return records, errors


def filter_active(
    records: Iterable[AddressRecord],
    min_tx: int = DEFAULT_MIN_TX,
    cutoff: datetime = DEFAULT_CUTOFF,
) -> list[AddressRecord]:
    """Keep contracts with at least `min_tx` transactions whose last activity
    is not older than `cutoff`."""
    if min_tx < 0:
        raise ValueError("min_tx must be >= 0")
    return [r for r in records if r.tx_count >= min_tx and r.last_tx_time >= cutoff]


def normalize_for_checksum(text: str) -> str:
    """Remove every whitespace character ahead of duplicate hashing."""
    return _WS_RE.sub("", text)


def make_source_file(raw_text: str, address: Optional[str] = None) -> SourceFile:
    return SourceFile(
        file_id=sha256_hex(raw_text),
        raw_text=raw_text,
        normalized_checksum=md5_hex(normalize_for_checksum(raw_text)),
        address=address,
    )


def dedup(files: Iterable[SourceFile]) -> tuple[list[SourceFile], list[DuplicateGroup]]:
    """Collapse files with equal whitespace-stripped MD5 checksums.

    Keeps the lexicographically smallest file_id per group, so the survivor is
    independent of input order.
    """
    by_checksum: dict[str, list[SourceFile]] = {}
    for f in files:
        by_checksum.setdefault(f.normalized_checksum, []).append(f)

    unique: list[SourceFile] = []
    groups: list[DuplicateGroup] = []
    for checksum in sorted(by_checksum):
        members = sorted(by_checksum[checksum], key=lambda f: f.file_id)
        deduped: list[SourceFile] = []
        seen_ids: set[str] = set()
        for m in members:
            if m.file_id not in seen_ids:
                seen_ids.add(m.file_id)
                deduped.append(m)
        unique.append(deduped[0])
        if len(members) > 1:
            groups.append(
                DuplicateGroup(
                    checksum=checksum,
                    survivor=deduped[0].file_id,
                    members=tuple(m.file_id for m in members),
                )
            )
    unique.sort(key=lambda f: f.file_id)
    return unique, groups


def corpus_stats(files: Iterable[SourceFile], functions: Iterable) -> DatasetStats:
    """Dataset-level statistics over a corpus and its extracted functions.

    Comment length statistics only consider comments with at least two
    whitespace-separated words; version distribution is computed per contract.
    """
    from . import extractor  # local import: extractor depends on this module

    files = list(files)
    functions = list(functions)

    contract_count = 0
    version_counts: dict[str, int] = {}
    for f in files:
        scan = extractor.extract_file(f)
        contract_count += len(scan.contracts)
        for _contract in scan.contracts:
            key = scan.version.value
            version_counts[key] = version_counts.get(key, 0) + 1

    fn_lengths = [fn.char_length for fn in functions]
    comments = [fn.function_comment for fn in functions if fn.function_comment]
    eligible_comment_lengths = [len(c) for c in comments if len(c.split()) >= 2]

    version_distribution: dict[str, tuple[int, float]] = {}
    if contract_count:
        for key in sorted(version_counts):
            count = version_counts[key]
            version_distribution[key] = (count, 100.0 * count / contract_count)

    def _median(values: list) -> Optional[float]:
        return float(statistics.median(values)) if values else None

    return DatasetStats(
        file_count=len(files),
        contract_count=contract_count,
        function_count=len(functions),
        public_external_count=sum(
            1 for fn in functions if fn.function_visibility in ("public", "external")
        ),
        commented_function_count=len(comments),
        median_function_length=_median(fn_lengths),
        longest_function_length=max(fn_lengths) if fn_lengths else None,
        shortest_function_length=min(fn_lengths) if fn_lengths else None,
        median_comment_length=_median(eligible_comment_lengths),
        longest_comment_length=max(eligible_comment_lengths) if eligible_comment_lengths else None,
        shortest_comment_length=min(eligible_comment_lengths) if eligible_comment_lengths else None,
        version_distribution=version_distribution,
    )


class SourceFetcher(Protocol):
    """Explorer-API role: resolves a contract address to its source text."""

    def fetch(self, address: str) -> Optional[str]: ...


class FilesystemFetcher:
    """Test/offline fetcher: reads `<root>/<address>.sol`."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def fetch(self, address: str) -> Optional[str]:
        path = self.root / f"{address}.sol"
        if not path.exists():
            return None
        return path.read_text(encoding="utf-8")


def save_corpus(
    files: Iterable[SourceFile],
    corpus_dir: str | Path,
    retrieved_at: Optional[str] = None,
    meta: Optional[dict] = None,
) -> Path:
    """Persist sources as content-addressed blobs plus a JSONL manifest."""
    corpus_dir = Path(corpus_dir)
    blob_dir = corpus_dir / "blobs"
    blob_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for f in sorted(files, key=lambda f: f.file_id):
        blob = blob_dir / f"{f.file_id}.sol"
        if not blob.exists():
            blob.write_text(f.raw_text, encoding="utf-8")
        records.append(
            {
                "file_id": f.file_id,
                "address": f.address,
                "normalized_checksum": f.normalized_checksum,
                "byte_length": len(f.raw_text.encode("utf-8")),
                "retrieved_at": retrieved_at,
            }
        )
    return write_jsonl(corpus_dir / "manifest.jsonl", records, meta=meta)


def load_corpus(corpus_dir: str | Path) -> list[SourceFile]:
    corpus_dir = Path(corpus_dir)
    manifest = corpus_dir / "manifest.jsonl"
    if not manifest.exists():
        raise FileNotFoundError(f"no corpus manifest at {manifest}")
    files = []
    for rec in read_jsonl(manifest):
        blob = corpus_dir / "blobs" / f"{rec['file_id']}.sol"
        raw = blob.read_text(encoding="utf-8")
        f = SourceFile(
            file_id=rec["file_id"],
            raw_text=raw,
            normalized_checksum=rec["normalized_checksum"],
            address=rec.get("address"),
        )
        if f.file_id != sha256_hex(raw):
            raise ValueError(f"corpus blob {blob} does not match its file_id")
        files.append(f)
    return files


def load_manifest(corpus_dir: str | Path) -> list[dict]:
    return list(read_jsonl(Path(corpus_dir) / "manifest.jsonl"))
