"""Pair generation, scoring, three-set classification and stripe assignment.

Pairs stream through scoring without being materialized; stripe counters
aggregate as the stream is consumed, which keeps the all-pairs counting pass
usable on large function sets.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional

from .embed import Embedding, code_similarity, comment_similarity
from .extractor import FunctionRecord, signature_of

logger = logging.getLogger(__name__)

PAIR_SEPARATOR = "|"


class PairingPolicy(str, Enum):
    ALL_PAIRS = "all-pairs"
    SAME_NAME = "same-name"
    SIGNATURE_COMPATIBLE = "signature"
    SAME_NAME_AND_SIGNATURE = "same-name-signature"


class SetLabel(str, Enum):
    CANDIDATE = "candidate"
    BASELINE = "baseline"
    SUPPLEMENTARY = "supplementary"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Thresholds:
    code: float = 0.8
    comment: float = 0.8
    # scores exactly at the code threshold stay on the candidate/baseline side
    # by default; flip to put the boundary in the supplementary set instead
    # (keeps the three sets a partition either way)
    boundary_in_supplementary: bool = False


@dataclass(frozen=True)
class PairScore:
    function_id_a: str
    function_id_b: str
    cd_s: float
    cm_s: Optional[float]
    same_name: bool
    signature_compatible: bool
    degenerate: bool = False

    @property
    def pair_id(self) -> str:
        return f"{self.function_id_a}{PAIR_SEPARATOR}{self.function_id_b}"


@dataclass(frozen=True)
class StripeId:
    scheme: str  # candidate_grid | baseline_bands | supplementary_bands
    cd_bin: tuple[float, float]
    cm_bin: Optional[tuple[float, float]] = None

    def key(self) -> str:
        """Stable string form used in JSON artifacts and allocation maps."""
        cd = f"cd({self.cd_bin[0]:.2f},{self.cd_bin[1]:.2f}]"
        if self.scheme == "baseline_bands" and self.cd_bin[0] == 0.0:
            cd = f"cd[{self.cd_bin[0]:.2f},{self.cd_bin[1]:.2f}]"
        if self.cm_bin is None:
            return f"{self.scheme}:{cd}"
        return f"{self.scheme}:cm({self.cm_bin[0]:.2f},{self.cm_bin[1]:.2f}]:{cd}"


class StripeRangeError(ValueError):
    pass


_CM_EDGES = [0.80, 0.85, 0.90, 0.95, 1.00]
_CD_CANDIDATE_EDGES = [0.0, 0.2, 0.4, 0.6, 0.8]
_CD_SUPPLEMENTARY_EDGES = [0.80, 0.85, 0.90, 0.95, 1.00]
_CD_BASELINE_EDGES = [0.0, 0.2, 0.4, 0.6, 0.8]


def _bin_of(x: float, edges: list[float], closed_bottom: bool) -> tuple[float, float]:
    """Lower-open/upper-closed bins; the bottom bin optionally includes its
    lower edge so the scheme tiles a closed range."""
    for lo, hi in zip(edges, edges[1:]):
        if lo < x <= hi:
            return (lo, hi)
    if closed_bottom and x == edges[0]:
        return (edges[0], edges[1])
    raise StripeRangeError(f"score {x} outside bins {edges}")


def candidate_stripes() -> list[StripeId]:
    out = []
    for cm_lo, cm_hi in zip(_CM_EDGES, _CM_EDGES[1:]):
        for cd_lo, cd_hi in zip(_CD_CANDIDATE_EDGES, _CD_CANDIDATE_EDGES[1:]):
            out.append(StripeId("candidate_grid", (cd_lo, cd_hi), (cm_lo, cm_hi)))
    return out


def supplementary_stripes() -> list[StripeId]:
    return [
        StripeId("supplementary_bands", (lo, hi))
        for lo, hi in zip(_CD_SUPPLEMENTARY_EDGES, _CD_SUPPLEMENTARY_EDGES[1:])
    ]


def baseline_stripes() -> list[StripeId]:
    return [
        StripeId("baseline_bands", (lo, hi))
        for lo, hi in zip(_CD_BASELINE_EDGES, _CD_BASELINE_EDGES[1:])
    ]


def generate_pairs(
    functions: Iterable[FunctionRecord], policy: PairingPolicy
) -> Iterator[tuple[FunctionRecord, FunctionRecord]]:
    """Emit each unordered pair exactly once, in canonical (id_a < id_b) order.

    Blocking policies group by function name and/or canonical signature before
    pairing, so the emitted stream is a subset of the all-pairs stream.
    """
    records = sorted(functions, key=lambda r: r.function_id)

    def block_key(record: FunctionRecord):
        if policy == PairingPolicy.SAME_NAME:
            return record.function_name
        if policy == PairingPolicy.SIGNATURE_COMPATIBLE:
            return signature_of(record)
        if policy == PairingPolicy.SAME_NAME_AND_SIGNATURE:
            return (record.function_name, signature_of(record))
        return None

    if policy == PairingPolicy.ALL_PAIRS:
        for i in range(len(records)):
            for j in range(i + 1, len(records)):
                yield records[i], records[j]
        return

    blocks: dict = {}
    for record in records:
        blocks.setdefault(block_key(record), []).append(record)
    for key in sorted(blocks, key=repr):
        block = blocks[key]
        for i in range(len(block)):
            for j in range(i + 1, len(block)):
                yield block[i], block[j]


class EmbeddingLookup:
    """Resolves a function to its cached code/comment embeddings."""

    def __init__(self, cache, code_spec, comment_spec, min_comment_tokens: int = 6):
        self.cache = cache
        self.code_spec = code_spec
        self.comment_spec = comment_spec
        self.min_comment_tokens = min_comment_tokens

    def code(self, record: FunctionRecord) -> Optional[Embedding]:
        return self.cache.get(record.function_code, self.code_spec)

    def comment(self, record: FunctionRecord) -> Optional[Embedding]:
        if not record.function_comment:
            return None
        return self.cache.get(record.function_comment, self.comment_spec)


def score_pair(
    a: FunctionRecord, b: FunctionRecord, embeddings: EmbeddingLookup
) -> PairScore:
    """Score one pair: cd_s always, cm_s only when both sides have comment
    embeddings. Missing code embeddings are a hard error."""
    if a.function_id > b.function_id:
        a, b = b, a
    code_a = embeddings.code(a)
    code_b = embeddings.code(b)
    if code_a is None or code_b is None:
        missing = a.function_id if code_a is None else b.function_id
        raise KeyError(f"no code embedding for {missing}; run the embed stage first")
    cm_s = None
    comment_a = embeddings.comment(a)
    comment_b = embeddings.comment(b)
    if comment_a is not None and comment_b is not None:
        cm_s = comment_similarity(comment_a, comment_b)
    return PairScore(
        function_id_a=a.function_id,
        function_id_b=b.function_id,
        cd_s=code_similarity(code_a, code_b),
        cm_s=cm_s,
        same_name=a.function_name == b.function_name,
        signature_compatible=signature_of(a) == signature_of(b),
        degenerate=code_a.is_degenerate or code_b.is_degenerate,
    )


def classify_pair(score: PairScore, thresholds: Thresholds = Thresholds()) -> SetLabel:
    """Three-set classification: low code similarity with high comment
    similarity is a clone candidate; high code similarity goes to the
    supplementary (false-negative probe) set; the rest is baseline."""
    if score.degenerate:
        return SetLabel.DEGENERATE
    if thresholds.boundary_in_supplementary:
        high_code = score.cd_s >= thresholds.code
    else:
        high_code = score.cd_s > thresholds.code
    if high_code:
        return SetLabel.SUPPLEMENTARY
    if score.cm_s is not None and score.cm_s > thresholds.comment:
        return SetLabel.CANDIDATE
    return SetLabel.BASELINE


def stripe_of(score: PairScore, label: SetLabel) -> StripeId:
    if label == SetLabel.DEGENERATE:
        raise StripeRangeError("degenerate pairs are not striped")
    if label == SetLabel.CANDIDATE:
        if score.cm_s is None:
            raise StripeRangeError("candidate pair without comment similarity")
        return StripeId(
            "candidate_grid",
            _bin_of(score.cd_s, _CD_CANDIDATE_EDGES, closed_bottom=False),
            _bin_of(score.cm_s, _CM_EDGES, closed_bottom=False),
        )
    if label == SetLabel.SUPPLEMENTARY:
        return StripeId(
            "supplementary_bands",
            _bin_of(score.cd_s, _CD_SUPPLEMENTARY_EDGES, closed_bottom=False),
        )
    return StripeId("baseline_bands", _bin_of(score.cd_s, _CD_BASELINE_EDGES, closed_bottom=True))


def function_name_of(function_id: str) -> str:
    """Recover the function name from a `<contract_id>#<name>#<ordinal>` id."""
    parts = function_id.split("#")
    if len(parts) < 3:
        raise ValueError(f"malformed function id {function_id!r}")
    return parts[-2]


def top_cloned_functions(
    candidate_pairs: Iterable[PairScore], k: Optional[int] = None
) -> list[tuple[str, int]]:
    """Rank shared function names by candidate-pair count (homonymous mode).

    Only same-name pairs count; ties break lexicographically so reports are
    reproducible.
    """
    counts: dict[str, int] = {}
    for score in candidate_pairs:
        if not score.same_name:
            continue
        name = function_name_of(score.function_id_a)
        counts[name] = counts.get(name, 0) + 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked if k is None else ranked[:k]


def score_stream(
    functions: list[FunctionRecord],
    policy: PairingPolicy,
    embeddings: EmbeddingLookup,
    thresholds: Thresholds = Thresholds(),
) -> Iterator[tuple[PairScore, SetLabel, Optional[StripeId]]]:
    """Generate, score, classify and stripe pairs as one stream."""
    for a, b in generate_pairs(functions, policy):
        score = score_pair(a, b, embeddings)
        label = classify_pair(score, thresholds)
        stripe = None if label == SetLabel.DEGENERATE else stripe_of(score, label)
        yield score, label, stripe


def pair_record(score: PairScore, label: SetLabel, stripe: Optional[StripeId]) -> dict:
    return {
        "pair_id": score.pair_id,
        "cd_s": score.cd_s,
        "cm_s": score.cm_s,
        "set": label.value,
        "stripe": stripe.key() if stripe else None,
        "same_name": score.same_name,
        "signature_compatible": score.signature_compatible,
    }
