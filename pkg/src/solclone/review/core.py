"""Review sessions, rater agreement, and validation metrics.

Sessions persist as append-only JSONL event logs (one file per session), so
every judgment, overwrite, and conflict resolution stays auditable; reports
are computed over replayed snapshots.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional

from ..util import format_rfc3339, utc_now

LABEL_TAXONOMY = (
    "modifier",
    "safemath",
    "call_super",
    "call_internal",
    "diff_algo",
    "spec_impl",
    "add_check",
)


class Verdict(str, Enum):
    TYPE4 = "Type4Clone"
    TYPE3 = "Type3Clone"
    NON_CLONE = "NonClone"


class JudgmentError(ValueError):
    pass


@dataclass(frozen=True)
class Judgment:
    session_id: str
    pair_id: str
    rater_id: str
    verdict: Verdict
    labels: tuple[str, ...] = ()
    note: str = ""
    coherent: Optional[bool] = None
    complete: Optional[bool] = None
    timestamp: str = ""

    def validate(self) -> None:
        unknown = [l for l in self.labels if l not in LABEL_TAXONOMY]
        if unknown:
            raise JudgmentError(f"unknown labels: {unknown}")
        if self.labels and self.verdict != Verdict.TYPE4:
            raise JudgmentError("labels may only accompany a Type4Clone verdict")

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "pair_id": self.pair_id,
            "rater_id": self.rater_id,
            "verdict": self.verdict.value,
            "labels": sorted(self.labels),
            "note": self.note,
            "coherent": self.coherent,
            "complete": self.complete,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "Judgment":
        return cls(
            session_id=rec["session_id"],
            pair_id=rec["pair_id"],
            rater_id=rec["rater_id"],
            verdict=Verdict(rec["verdict"]),
            labels=tuple(rec.get("labels", [])),
            note=rec.get("note", ""),
            coherent=rec.get("coherent"),
            complete=rec.get("complete"),
            timestamp=rec.get("timestamp", ""),
        )


@dataclass(frozen=True)
class Resolution:
    pair_id: str
    verdict: Verdict
    labels: tuple[str, ...] = ()
    note: str = ""
    timestamp: str = ""


@dataclass(frozen=True)
class SessionPair:
    pair_id: str
    set_label: str
    stripe: Optional[str]
    cd_s: float
    cm_s: Optional[float]
    same_name: bool
    signature_compatible: bool

    @property
    def function_id_a(self) -> str:
        return self.pair_id.split("|")[0]

    @property
    def function_id_b(self) -> str:
        return self.pair_id.split("|")[1]

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "set": self.set_label,
            "stripe": self.stripe,
            "cd_s": self.cd_s,
            "cm_s": self.cm_s,
            "same_name": self.same_name,
            "signature_compatible": self.signature_compatible,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "SessionPair":
        return cls(
            pair_id=rec["pair_id"],
            set_label=rec.get("set", "candidate"),
            stripe=rec.get("stripe"),
            cd_s=rec.get("cd_s", 0.0),
            cm_s=rec.get("cm_s"),
            same_name=rec.get("same_name", False),
            signature_compatible=rec.get("signature_compatible", False),
        )


@dataclass
class AgreementReport:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    conflicts: list[str]
    n_pairs: int

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "observed_agreement": self.observed_agreement,
            "expected_agreement": self.expected_agreement,
            "conflicts": list(self.conflicts),
            "n_pairs": self.n_pairs,
        }


@dataclass
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    specificity: Optional[float]
    accuracy: Optional[float]

    def to_json(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
        }


def kappa_from_counts(
    both_yes: int, a_yes_b_no: int, a_no_b_yes: int, both_no: int
) -> AgreementReport:
    """Cohen's kappa for a two-rater binary table.

    The degenerate table with expected agreement 1 is defined as kappa 1 when
    observed agreement is also 1, avoiding 0/0.
    """
    n = both_yes + a_yes_b_no + a_no_b_yes + both_no
    if n == 0:
        raise JudgmentError("empty agreement table")
    p_o = (both_yes + both_no) / n
    p_a_yes = (both_yes + a_yes_b_no) / n
    p_b_yes = (both_yes + a_no_b_yes) / n
    p_e = p_a_yes * p_b_yes + (1.0 - p_a_yes) * (1.0 - p_b_yes)
    if p_e == 1.0:
        if p_o == 1.0:
            kappa = 1.0
        else:
            raise JudgmentError("expected agreement is 1 but observed agreement is not")
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return AgreementReport(
        kappa=kappa,
        observed_agreement=p_o,
        expected_agreement=p_e,
        conflicts=[],
        n_pairs=n,
    )


def cohen_kappa(
    judgments_a: dict[str, Verdict], judgments_b: dict[str, Verdict]
) -> AgreementReport:
    """Kappa over the pairs both raters judged, collapsed to clone/not-clone."""
    common = sorted(set(judgments_a) & set(judgments_b))
    if len(common) < 2:
        raise JudgmentError("need at least two jointly judged pairs for kappa")
    both_yes = a_only = b_only = both_no = 0
    conflicts = []
    for pair_id in common:
        a_clone = judgments_a[pair_id] == Verdict.TYPE4
        b_clone = judgments_b[pair_id] == Verdict.TYPE4
        if a_clone and b_clone:
            both_yes += 1
        elif a_clone:
            a_only += 1
            conflicts.append(pair_id)
        elif b_clone:
            b_only += 1
            conflicts.append(pair_id)
        else:
            both_no += 1
    report = kappa_from_counts(both_yes, a_only, b_only, both_no)
    report.conflicts = conflicts
    return report


def compute_metrics(tp: int, fp: int, fn: int, tn: int) -> MetricsReport:
    """Confusion-matrix metrics; each is None when its denominator is zero."""

    def ratio(num: int, den: int) -> Optional[float]:
        return num / den if den > 0 else None

    precision = ratio(tp, tp + fp)
    recall = ratio(tp, tp + fn)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    return MetricsReport(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=precision,
        recall=recall,
        f1=f1,
        specificity=ratio(tn, tn + fp),
        accuracy=ratio(tp + tn, tp + fp + fn + tn),
    )


def confusion_metrics(
    candidate_verdicts: Iterable[Verdict],
    baseline_verdicts: Iterable[Verdict],
    supplementary_verdicts: Iterable[Verdict],
) -> MetricsReport:
    """TP/FP come from the validated candidate set; clones found in the
    baseline or supplementary sets are the FNs, non-clones there the TNs."""
    candidates = list(candidate_verdicts)
    if not candidates:
        raise JudgmentError("empty candidate set")
    others = list(baseline_verdicts) + list(supplementary_verdicts)
    tp = sum(1 for v in candidates if v == Verdict.TYPE4)
    fp = len(candidates) - tp
    fn = sum(1 for v in others if v == Verdict.TYPE4)
    tn = len(others) - fn
    return compute_metrics(tp, fp, fn, tn)


def stripe_report(
    judged: Iterable[tuple[SessionPair, Verdict]]
) -> dict:
    """Per-stripe validation rates in the shape of the manual-validation
    summary table: judged count, confirmed-clone rate, and the same-name
    restriction of both."""
    rows: dict[tuple[str, str], dict] = {}
    for pair, verdict in judged:
        key = (pair.set_label, pair.stripe or "unstriped")
        row = rows.setdefault(
            key,
            {
                "set": pair.set_label,
                "stripe": pair.stripe or "unstriped",
                "judged": 0,
                "confirmed": 0,
                "same_name": 0,
                "same_name_confirmed": 0,
            },
        )
        row["judged"] += 1
        confirmed = verdict == Verdict.TYPE4
        if confirmed:
            row["confirmed"] += 1
        if pair.same_name:
            row["same_name"] += 1
            if confirmed:
                row["same_name_confirmed"] += 1

    def finish(row: dict) -> dict:
        row = dict(row)
        row["validation_rate"] = row["confirmed"] / row["judged"] if row["judged"] else None
        row["same_name_validation_rate"] = (
            row["same_name_confirmed"] / row["same_name"] if row["same_name"] else None
        )
        return row

    sections: dict[str, dict] = {}
    for (set_label, _stripe), row in sorted(rows.items()):
        section = sections.setdefault(
            set_label,
            {"rows": [], "totals": {"judged": 0, "confirmed": 0, "same_name": 0, "same_name_confirmed": 0}},
        )
        section["rows"].append(finish(row))
        for k in ("judged", "confirmed", "same_name", "same_name_confirmed"):
            section["totals"][k] += row[k]
    for section in sections.values():
        section["totals"] = finish({"set": "total", "stripe": "total", **section["totals"]})
    return sections


def label_cooccurrence(label_sets: Iterable[Iterable[str]]) -> dict:
    """Tally label singletons, unordered pairs, and triplets across confirmed
    Type-4 judgments; four or more labels land in a separate bucket."""
    singles: dict[str, int] = {}
    pairs: dict[str, int] = {}
    triplets: dict[str, int] = {}
    four_plus = 0
    total = 0
    for labels in label_sets:
        labels = sorted(set(labels))
        total += 1
        if len(labels) == 1:
            singles[labels[0]] = singles.get(labels[0], 0) + 1
        elif len(labels) == 2:
            key = "+".join(labels)
            pairs[key] = pairs.get(key, 0) + 1
        elif len(labels) == 3:
            key = "+".join(labels)
            triplets[key] = triplets.get(key, 0) + 1
        elif len(labels) >= 4:
            four_plus += 1
    return {
        "singles": singles,
        "pairs": pairs,
        "triplets": triplets,
        "four_plus": four_plus,
        "total": total,
    }


# ---------------------------------------------------------------------------
# sessions


@dataclass
class Session:
    session_id: str
    name: str
    raters: list[str]
    mode: str
    seed: int
    order: list[str]
    pairs: dict[str, SessionPair]
    functions: dict[str, dict] = field(default_factory=dict)
    judgments: dict[tuple[str, str], Judgment] = field(default_factory=dict)
    resolutions: dict[str, Resolution] = field(default_factory=dict)
    overwrites: int = 0

    def next_pair(self, rater_id: str) -> Optional[SessionPair]:
        if rater_id not in self.raters:
            raise JudgmentError(f"rater {rater_id!r} is not assigned to this session")
        for pair_id in self.order:
            if (pair_id, rater_id) not in self.judgments:
                return self.pairs[pair_id]
        return None

    def progress(self) -> dict:
        return {
            "pairs": len(self.pairs),
            "judged": {
                rater: sum(1 for (p, r) in self.judgments if r == rater) for rater in self.raters
            },
            "resolutions": len(self.resolutions),
            "expected_judgments": len(self.pairs) * len(self.raters),
        }

    def rater_verdicts(self, rater_id: str) -> dict[str, Verdict]:
        return {
            pair_id: j.verdict
            for (pair_id, rater), j in self.judgments.items()
            if rater == rater_id
        }

    def agreement(self) -> AgreementReport:
        if len(self.raters) != 2:
            raise JudgmentError("agreement is defined for exactly two raters")
        report = cohen_kappa(
            self.rater_verdicts(self.raters[0]), self.rater_verdicts(self.raters[1])
        )
        report.conflicts = [p for p in report.conflicts if p not in self.resolutions]
        return report

    def conflict_pairs(self) -> list[str]:
        if len(self.raters) != 2:
            return []
        a = self.rater_verdicts(self.raters[0])
        b = self.rater_verdicts(self.raters[1])
        conflicts = []
        for pair_id in sorted(set(a) & set(b)):
            if (a[pair_id] == Verdict.TYPE4) != (b[pair_id] == Verdict.TYPE4):
                if pair_id not in self.resolutions:
                    conflicts.append(pair_id)
        return conflicts

    def final_verdicts(self) -> dict[str, tuple[Verdict, tuple[str, ...]]]:
        """Resolution wins; otherwise agreed individual verdicts. Unresolved
        conflicts raise, so metrics are never computed over disputed pairs."""
        unresolved = self.conflict_pairs()
        if unresolved:
            raise JudgmentError(
                f"{len(unresolved)} unresolved conflicts block final verdicts: {unresolved[:5]}"
            )
        finals: dict[str, tuple[Verdict, tuple[str, ...]]] = {}
        for pair_id in self.order:
            if pair_id in self.resolutions:
                res = self.resolutions[pair_id]
                finals[pair_id] = (res.verdict, res.labels)
                continue
            judged = [
                self.judgments[(pair_id, rater)]
                for rater in self.raters
                if (pair_id, rater) in self.judgments
            ]
            if len(judged) < len(self.raters):
                continue  # not fully judged yet
            verdicts = {j.verdict for j in judged}
            if verdicts == {Verdict.TYPE4}:
                labels = tuple(sorted({l for j in judged for l in j.labels}))
                finals[pair_id] = (Verdict.TYPE4, labels)
            elif len(verdicts) == 1:
                finals[pair_id] = (verdicts.pop(), ())
            else:
                # collapsed agreement (neither says Type-4) with differing
                # fine-grained verdicts: keep the conservative non-clone call
                finals[pair_id] = (Verdict.NON_CLONE, ())
        return finals

    def metrics(self) -> MetricsReport:
        finals = self.final_verdicts()
        by_set: dict[str, list[Verdict]] = {"candidate": [], "baseline": [], "supplementary": []}
        for pair_id, (verdict, _labels) in finals.items():
            set_label = self.pairs[pair_id].set_label
            if set_label in by_set:
                by_set[set_label].append(verdict)
        return confusion_metrics(
            by_set["candidate"], by_set["baseline"], by_set["supplementary"]
        )

    def stripe_report(self) -> dict:
        finals = self.final_verdicts()
        judged = [(self.pairs[pair_id], verdict) for pair_id, (verdict, _l) in finals.items()]
        return stripe_report(judged)

    def label_report(self) -> dict:
        finals = self.final_verdicts()
        label_sets = [
            labels for _pair, (verdict, labels) in finals.items() if verdict == Verdict.TYPE4
        ]
        return label_cooccurrence(label_sets)


class ReviewStore:
    """Append-only, per-session JSONL event logs under a root directory."""

    def __init__(self, root: str | Path, clock: Optional[Callable[[], str]] = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.clock = clock or (lambda: format_rfc3339(utc_now()))
        self._cache: dict[str, Session] = {}

    def _log_path(self, session_id: str) -> Path:
        return self.root / session_id / "events.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        path = self._log_path(session_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True, ensure_ascii=False) + "\n")

    def list_sessions(self) -> list[str]:
        return sorted(p.parent.name for p in self.root.glob("*/events.jsonl"))

    def create_session(
        self,
        name: str,
        raters: list[str],
        pairs: list[SessionPair],
        mode: str = "full",
        seed: int = 0,
        functions: Optional[dict[str, dict]] = None,
    ) -> Session:
        if not pairs:
            raise JudgmentError("cannot create a session with an empty sample")
        if not raters:
            raise JudgmentError("at least one rater is required")
        if mode not in ("pilot", "full"):
            raise JudgmentError(f"unknown session mode {mode!r}")
        session_id = re.sub(r"[^a-z0-9_-]+", "-", name.strip().lower()).strip("-")
        if not session_id:
            raise JudgmentError("session name produces an empty id")
        if self._log_path(session_id).exists():
            raise JudgmentError(f"session {session_id!r} already exists")
        order = sorted(p.pair_id for p in pairs)
        if len(set(order)) != len(order):
            raise JudgmentError("duplicate pair ids in sample")
        random.Random(seed).shuffle(order)
        self._append(
            session_id,
            {
                "event": "created",
                "name": name,
                "raters": list(raters),
                "mode": mode,
                "seed": seed,
                "order": order,
                "pairs": [p.to_json() for p in pairs],
                "functions": functions or {},
                "timestamp": self.clock(),
            },
        )
        return self.get(session_id)

    def get(self, session_id: str) -> Session:
        path = self._log_path(session_id)
        if not path.exists():
            raise KeyError(f"no session {session_id!r}")
        session: Optional[Session] = None
        overwrites = 0
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                event = json.loads(line)
                kind = event.get("event")
                if kind == "created":
                    session = Session(
                        session_id=session_id,
                        name=event["name"],
                        raters=list(event["raters"]),
                        mode=event["mode"],
                        seed=event["seed"],
                        order=list(event["order"]),
                        pairs={
                            p["pair_id"]: SessionPair.from_json(p) for p in event["pairs"]
                        },
                        functions=event.get("functions", {}),
                    )
                elif kind == "judgment" and session is not None:
                    j = Judgment.from_json(event["judgment"])
                    key = (j.pair_id, j.rater_id)
                    if key in session.judgments:
                        overwrites += 1
                    session.judgments[key] = j
                elif kind == "resolution" and session is not None:
                    session.resolutions[event["pair_id"]] = Resolution(
                        pair_id=event["pair_id"],
                        verdict=Verdict(event["verdict"]),
                        labels=tuple(event.get("labels", [])),
                        note=event.get("note", ""),
                        timestamp=event.get("timestamp", ""),
                    )
        if session is None:
            raise KeyError(f"session log {path} has no creation event")
        session.overwrites = overwrites
        self._cache[session_id] = session
        return session

    def submit_judgment(self, judgment: Judgment) -> dict:
        session = self.get(judgment.session_id)
        if judgment.rater_id not in session.raters:
            raise JudgmentError(f"rater {judgment.rater_id!r} is not assigned to this session")
        if judgment.pair_id not in session.pairs:
            raise KeyError(f"pair {judgment.pair_id!r} is not part of this session")
        judgment.validate()
        if not judgment.timestamp:
            judgment = replace(judgment, timestamp=self.clock())
        overwrite = (judgment.pair_id, judgment.rater_id) in session.judgments
        self._append(
            judgment.session_id,
            {"event": "judgment", "judgment": judgment.to_json(), "overwrite": overwrite},
        )
        return {"stored": True, "overwrite": overwrite}

    def resolve_conflict(
        self,
        session_id: str,
        pair_id: str,
        verdict: Verdict,
        labels: tuple[str, ...] = (),
        note: str = "",
    ) -> dict:
        session = self.get(session_id)
        re_resolution = pair_id in session.resolutions
        if not re_resolution and pair_id not in session.conflict_pairs():
            raise JudgmentError(f"pair {pair_id!r} is not in the conflict list")
        if labels and verdict != Verdict.TYPE4:
            raise JudgmentError("labels may only accompany a Type4Clone verdict")
        self._append(
            session_id,
            {
                "event": "resolution",
                "pair_id": pair_id,
                "verdict": verdict.value,
                "labels": sorted(labels),
                "note": note,
                "overwrite": re_resolution,
                "timestamp": self.clock(),
            },
        )
        return {"stored": True, "overwrite": re_resolution}
