#!/usr/bin/env python3
"""Regenerate the frozen end-to-end golden artifacts from the fixture corpus.

Only run this after an intentional behavior change, and re-verify the key
numbers by hand before committing (see tests/test_acceptance.py for what the
goldens must reproduce: sample counts, kappa 5/7, TP=4 FP=1 FN=1 TN=2, one
scan hit).
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from e2e_driver import run_full_pipeline  # noqa: E402

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden" / "e2e"


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        artifacts = run_full_pipeline(Path(tmp) / "run")
    for rel, data in artifacts.items():
        dest = GOLDEN_DIR / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(data)
    print(f"regenerated {len(artifacts)} golden artifacts under {GOLDEN_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
