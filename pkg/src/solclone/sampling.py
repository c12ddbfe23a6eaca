"""Sample-size math and reproducible stratified draws.

Sample sizes use the infinite-population formula n = ceil(z^2 p(1-p) / e^2);
allocation across strata is largest-remainder (Hamilton) apportionment; draws
are seeded and independent of input order.
"""

from __future__ import annotations

import hashlib
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

logger = logging.getLogger(__name__)

DRAW_ALGORITHM = "mt19937-sample-v1"

# Acklam's rational approximation of the standard normal quantile,
# |relative error| < 1.15e-9 over (0, 1).
_ICDF_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ICDF_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ICDF_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ICDF_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)


def normal_quantile(p: float) -> float:
    """Inverse standard-normal CDF via Acklam's rational approximation."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must be in (0,1), got {p}")
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return _tail(q)
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -_tail(q)
    q = p - 0.5
    r = q * q
    a, b = _ICDF_A, _ICDF_B
    num = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
    den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
    return num / den


def _tail(q: float) -> float:
    c, d = _ICDF_C, _ICDF_D
    num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]
    den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
    return num / den


def z_for_confidence(confidence: float) -> float:
    """Two-sided critical value: z(0.95) = 1.959964."""
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0,1), got {confidence}")
    return normal_quantile(1.0 - (1.0 - confidence) / 2.0)


def sample_size(confidence: float, margin: float, proportion: float = 0.5) -> int:
    """n = ceil(z^2 p(1-p) / e^2); (0.95, 0.05, 0.5) -> 385."""
    if not 0.0 < margin <= 1.0:
        raise ValueError(f"margin must be in (0,1], got {margin}")
    if not 0.0 <= proportion <= 1.0:
        raise ValueError(f"proportion must be in [0,1], got {proportion}")
    z = z_for_confidence(confidence)
    return math.ceil(z * z * proportion * (1.0 - proportion) / (margin * margin))


def allocate(populations: Mapping, n: int) -> dict:
    """Largest-remainder apportionment of `n` proportional to populations.

    Empty strata get zero; `n` beyond the total population is capped with a
    warning. Remainder ties break by stratum order (the mapping's iteration
    order).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    keys = list(populations.keys())
    total = sum(populations[k] for k in keys)
    if any(populations[k] < 0 for k in keys):
        raise ValueError("stratum populations must be >= 0")
    if total == 0:
        raise ValueError("total population must be > 0")
    if n > total:
        logger.warning("requested %d samples from a population of %d; capping", n, total)
        n = total

    quotas = {k: n * populations[k] / total for k in keys}
    result = {k: math.floor(quotas[k]) for k in keys}
    leftover = n - sum(result.values())
    by_remainder = sorted(
        range(len(keys)),
        key=lambda i: (-(quotas[keys[i]] - result[keys[i]]), i),
    )
    for i in by_remainder[:leftover]:
        result[keys[i]] += 1
    return result


@dataclass
class SamplePlan:
    confidence: float
    margin: float
    proportion: float
    z: float
    total_n: int
    allocations: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "confidence": self.confidence,
            "margin": self.margin,
            "proportion": self.proportion,
            "z": self.z,
            "total_n": self.total_n,
            "allocations": dict(self.allocations),
            "draw_algorithm": DRAW_ALGORITHM,
        }


def plan_sample(
    populations: Mapping,
    confidence: float = 0.95,
    margin: float = 0.05,
    proportion: float = 0.5,
    n: int | None = None,
) -> SamplePlan:
    """Build a stratified plan; n=None derives the size from the confidence
    and margin parameters."""
    total_n = sample_size(confidence, margin, proportion) if n is None else n
    allocations = allocate(populations, total_n)
    return SamplePlan(
        confidence=confidence,
        margin=margin,
        proportion=proportion,
        z=z_for_confidence(confidence),
        total_n=sum(allocations.values()),
        allocations=allocations,
    )


def _stratum_seed(seed: int, stratum_key: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stratum_key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def draw(population: Sequence[str], k: int, seed: int) -> list[str]:
    """Uniform sample without replacement, a pure function of
    (population as a set, k, seed); output is sorted by pair id."""
    ordered = sorted(population)
    if k > len(ordered):
        raise ValueError(f"cannot draw {k} from a population of {len(ordered)}")
    rng = random.Random(seed)
    return sorted(rng.sample(ordered, k))


def draw_stratified(
    strata: Mapping[str, Sequence[str]], allocations: Mapping[str, int], seed: int
) -> dict[str, list[str]]:
    """Per-stratum draws with seeds derived from (seed, stratum key), so one
    stratum's contents never perturb another's sample."""
    out: dict[str, list[str]] = {}
    for key in sorted(strata):
        k = allocations.get(key, 0)
        out[key] = draw(strata[key], k, _stratum_seed(seed, key))
    return out
