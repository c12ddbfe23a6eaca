#!/usr/bin/env python3
"""Run the full clone-detection pipeline on a corpus of Solidity sources.

Defaults to the bundled fixture corpus, which makes this a quick smoke run:

    python3 scripts/run_pipeline.py --out /tmp/solclone-demo

Point --addresses/--sources at an exported activity CSV and a directory of
<address>.sol files to process a real corpus.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from solclone.cli import main as cli_main

REPO = Path(__file__).resolve().parents[1]


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--addresses", default=str(REPO / "tests/fixtures/addresses.csv"))
    parser.add_argument("--sources", default=str(REPO / "tests/fixtures/sources"))
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--policy", default="same-name")
    parser.add_argument("--timestamp", default=None, help="pin artifact timestamps (RFC 3339)")
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    config = {
        "out_dir": args.out,
        "addresses_csv": args.addresses,
        "sources_dir": args.sources,
        "seed": args.seed,
        "pairing_policy": args.policy,
    }
    if args.timestamp:
        config["run_timestamp"] = args.timestamp
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config, fh)
        config_path = fh.name

    stages = [
        ["ingest"],
        ["dedup"],
        ["stats"],
        ["extract", "--keep-all-visibilities"],
        ["embed"],
        ["pairs"],
        ["sample", "--set", "candidate"],
        ["sample", "--set", "baseline"],
        ["sample", "--set", "supplementary"],
        ["llm", "scan"],
        ["report"],
    ]
    for stage in stages:
        print(f"==> solclone {' '.join(stage)}")
        code = cli_main(["--config", config_path, *stage])
        if code != 0:
            print(f"stage {' '.join(stage)} failed with exit code {code}", file=sys.stderr)
            return code
    print(f"\nartifacts under {args.out}/; next: `solclone review serve` for manual validation")
    return 0


if __name__ == "__main__":
    sys.exit(main())
