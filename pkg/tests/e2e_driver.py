"""Drives the full pipeline on the fixture corpus inside a working directory.

Used by the acceptance suite (byte-identity checks) and by
scripts/regenerate_goldens.py. All paths inside the working dir are relative,
so artifact bytes do not depend on where the run happens.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"

RUN_TIMESTAMP = "2025-06-01T00:00:00Z"
SEED = 42

# Artifacts compared byte-for-byte between runs and against frozen goldens.
COMPARED_ARTIFACTS = [
    "out/corpus/manifest.jsonl",
    "out/dedup_report.json",
    "out/stats.json",
    "out/functions.jsonl",
    "out/embeddings.jsonl",
    "out/pairs.jsonl",
    "out/stripes.json",
    "out/sample_candidate.jsonl",
    "out/sample_baseline.jsonl",
    "out/sample_supplementary.jsonl",
    "out/scan.jsonl",
    "out/review_export/validation/judgments.jsonl",
    "out/review_export/validation/resolutions.jsonl",
    "out/review_export/validation/agreement.json",
    "out/review_export/validation/metrics.json",
    "out/review_export/validation/stripes.json",
    "out/review_export/validation/labels.json",
    "out/report/table1_dataset.json",
    "out/report/table2_versions.json",
    "out/report/table3_stripes.json",
    "out/report/table4_top_functions.json",
    "out/report/table5_labels.json",
    "out/report/table3_validation.json",
    "out/report/metrics.json",
]

# Scripted verdicts by function name: (verdict, labels).
RATER_A = {
    "transferFrom": ("Type4Clone", ["call_internal", "diff_algo"]),
    "decreaseAllowance": ("Type4Clone", ["safemath", "add_check"]),
    "owner": ("Type4Clone", ["diff_algo"]),
    "transfer": ("Type4Clone", ["add_check", "diff_algo"]),
    "transferOwnership": ("NonClone", []),
    "allowance": ("NonClone", []),
    "renounceOwnership": ("Type3Clone", []),
    "burnFrom": ("Type4Clone", ["safemath"]),
}
RATER_B = {
    "transferFrom": ("Type4Clone", ["call_internal"]),
    "decreaseAllowance": ("Type4Clone", ["safemath", "add_check"]),
    "owner": ("Type4Clone", ["diff_algo", "spec_impl"]),
    "transfer": ("Type4Clone", ["add_check"]),
    "transferOwnership": ("Type4Clone", ["spec_impl"]),  # the engineered conflict
    "allowance": ("NonClone", []),
    "renounceOwnership": ("NonClone", []),
    "burnFrom": ("Type4Clone", ["safemath"]),
}
RESOLUTIONS = {"transferOwnership": ("NonClone", [])}


def pair_function_name(pair_id: str) -> str:
    return pair_id.split("|")[0].split("#")[-2]


def setup_workdir(workdir: Path) -> Path:
    workdir.mkdir(parents=True, exist_ok=True)
    shutil.copytree(FIXTURES / "sources", workdir / "fixtures" / "sources", dirs_exist_ok=True)
    shutil.copy(FIXTURES / "addresses.csv", workdir / "fixtures" / "addresses.csv")
    config = {
        "out_dir": "out",
        "addresses_csv": "fixtures/addresses.csv",
        "sources_dir": "fixtures/sources",
        "run_timestamp": RUN_TIMESTAMP,
        "seed": SEED,
    }
    config_path = workdir / "config.json"
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return config_path


def run_cli(workdir: Path, *argv: str) -> None:
    cmd = [sys.executable, "-m", "solclone.cli", "--config", "config.json", *argv]
    result = subprocess.run(cmd, cwd=workdir, capture_output=True, text=True)
    if result.returncode != 0:
        raise RuntimeError(
            f"{' '.join(argv)} exited {result.returncode}\nstdout:\n{result.stdout}\nstderr:\n{result.stderr}"
        )


def run_pipeline_stages(workdir: Path) -> None:
    run_cli(workdir, "ingest")
    run_cli(workdir, "dedup")
    run_cli(workdir, "stats")
    run_cli(workdir, "extract", "--keep-all-visibilities")
    run_cli(workdir, "embed")
    run_cli(workdir, "pairs")
    run_cli(workdir, "sample", "--set", "candidate")
    run_cli(workdir, "sample", "--set", "baseline")
    run_cli(workdir, "sample", "--set", "supplementary")
    run_cli(workdir, "llm", "scan")


def run_review_session(workdir: Path) -> None:
    """Scripted two-rater validation of the sampled pairs, driven through the
    HTTP surface, then exported to JSON snapshots."""
    from fastapi.testclient import TestClient

    from solclone.review.core import ReviewStore
    from solclone.review.service import create_app, export_session
    from solclone.util import read_jsonl

    out = workdir / "out"
    sample_records = []
    for name in ("sample_candidate.jsonl", "sample_baseline.jsonl", "sample_supplementary.jsonl"):
        sample_records.extend(read_jsonl(out / name))
    functions = {rec["function_id"]: rec for rec in read_jsonl(out / "functions.jsonl")}

    store = ReviewStore(out / "review", clock=lambda: RUN_TIMESTAMP)
    client = TestClient(create_app(store, functions=functions))

    resp = client.post(
        "/sessions",
        json={
            "name": "validation",
            "raters": ["rater-a", "rater-b"],
            "mode": "full",
            "seed": SEED,
            "pairs": sample_records,
        },
    )
    assert resp.status_code == 200, resp.text
    session_id = resp.json()["session_id"]

    for rater, script in (("rater-a", RATER_A), ("rater-b", RATER_B)):
        while True:
            nxt = client.get(f"/sessions/{session_id}/next", params={"rater": rater}).json()
            if nxt["done"]:
                break
            verdict, labels = script[pair_function_name(nxt["pair_id"])]
            resp = client.post(
                f"/sessions/{session_id}/judgments",
                json={
                    "pair_id": nxt["pair_id"],
                    "rater_id": rater,
                    "verdict": verdict,
                    "labels": labels,
                    "timestamp": RUN_TIMESTAMP,
                },
            )
            assert resp.status_code == 200, resp.text

    conflicts = client.get(f"/sessions/{session_id}/conflicts").json()["conflicts"]
    for conflict in conflicts:
        verdict, labels = RESOLUTIONS[pair_function_name(conflict["pair_id"])]
        resp = client.post(
            f"/sessions/{session_id}/resolutions",
            json={"pair_id": conflict["pair_id"], "verdict": verdict, "labels": labels},
        )
        assert resp.status_code == 200, resp.text

    export_session(store, session_id, out / "review_export" / "validation")


def run_full_pipeline(workdir: Path) -> dict[str, bytes]:
    """Everything: stages, review session, final report. Returns artifact bytes."""
    setup_workdir(workdir)
    run_pipeline_stages(workdir)
    run_review_session(workdir)
    run_cli(workdir, "report", "--review-export", "out/review_export/validation")
    return collect_artifacts(workdir)


def collect_artifacts(workdir: Path) -> dict[str, bytes]:
    out = {}
    for rel in COMPARED_ARTIFACTS:
        path = workdir / rel
        if path.exists():
            out[rel] = path.read_bytes()
    return out
