#!/usr/bin/env python3
"""Simulate a two-rater validation session over a sampled pair file.

Walks two scripted raters through the session order, engineers one
disagreement, resolves it, and prints the agreement/metrics/label reports.
Useful for exercising the review machinery without the browser UI:

    python3 scripts/run_pipeline.py --out /tmp/demo
    python3 scripts/simulate_review.py --out /tmp/demo
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from solclone.review.core import Judgment, ReviewStore, SessionPair, Verdict
from solclone.util import fnv1a64, read_jsonl


def scripted_verdict(pair_id: str, rater: str, set_label: str) -> Verdict:
    """Deterministic pseudo-rater: candidates look like clones unless the
    pair hash says otherwise; rater-b flips one slice to create conflicts."""
    h = fnv1a64(pair_id)
    if set_label == "candidate":
        verdict = Verdict.TYPE4 if h % 5 else Verdict.NON_CLONE
    else:
        verdict = Verdict.NON_CLONE if h % 7 else Verdict.TYPE4
    if rater == "rater-b" and h % 11 == 0:
        verdict = Verdict.NON_CLONE if verdict == Verdict.TYPE4 else Verdict.TYPE4
    return verdict


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="pipeline artifact directory")
    parser.add_argument("--session", default="simulated")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    out = Path(args.out)
    pairs = []
    for name in ("sample_candidate.jsonl", "sample_baseline.jsonl", "sample_supplementary.jsonl"):
        path = out / name
        if path.exists():
            pairs.extend(SessionPair.from_json(rec) for rec in read_jsonl(path))
    if not pairs:
        print(f"no sample files under {out}; run the pipeline first", file=sys.stderr)
        return 3

    store = ReviewStore(out / "review")
    session = store.create_session(args.session, ["rater-a", "rater-b"], pairs, seed=args.seed)
    for rater in ("rater-a", "rater-b"):
        while True:
            nxt = session.next_pair(rater)
            if nxt is None:
                break
            verdict = scripted_verdict(nxt.pair_id, rater, nxt.set_label)
            labels = ("diff_algo",) if verdict == Verdict.TYPE4 else ()
            store.submit_judgment(
                Judgment(session.session_id, nxt.pair_id, rater, verdict, labels)
            )
            session = store.get(session.session_id)

    conflicts = session.conflict_pairs()
    print(f"judged {len(session.judgments)} times; {len(conflicts)} conflicts")
    for pair_id in conflicts:
        store.resolve_conflict(session.session_id, pair_id, Verdict.NON_CLONE)
    session = store.get(session.session_id)

    print("\nagreement:", json.dumps(session.agreement().to_json(), indent=2))
    print("\nmetrics:", json.dumps(session.metrics().to_json(), indent=2))
    print("\nlabels:", json.dumps(session.label_report(), indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
