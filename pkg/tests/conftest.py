import json
from pathlib import Path

import pytest

from solclone.corpus import SourceFile, dedup, make_source_file
from solclone.extractor import FunctionRecord, extract_file, passes_filters

FIXTURES = Path(__file__).parent / "fixtures"
SOURCES = FIXTURES / "sources"
GOLDEN = FIXTURES / "golden"


@pytest.fixture(scope="session")
def fixture_files() -> dict[str, SourceFile]:
    """All fixture sources keyed by address (pre-dedup)."""
    files = {}
    for path in sorted(SOURCES.glob("*.sol")):
        files[path.stem] = make_source_file(path.read_text(encoding="utf-8"), address=path.stem)
    return files


@pytest.fixture(scope="session")
def deduped_files(fixture_files) -> list[SourceFile]:
    unique, _groups = dedup(fixture_files.values())
    return unique


@pytest.fixture(scope="session")
def fixture_functions(deduped_files) -> list[FunctionRecord]:
    records = []
    for f in deduped_files:
        for fn in extract_file(f).functions:
            fn.accepted = passes_filters(fn, 6)
            records.append(fn)
    records.sort(key=lambda r: r.function_id)
    return records


@pytest.fixture(scope="session")
def extractor_golden() -> dict:
    return json.loads((GOLDEN / "extractor_golden.json").read_text(encoding="utf-8"))


def by_qualified_name(functions: list[FunctionRecord]) -> dict[str, FunctionRecord]:
    return {f"{fn.contract_name}.{fn.function_name}": fn for fn in functions}
