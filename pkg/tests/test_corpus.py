import io
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from solclone.corpus import (
    AddressRecord,
    SchemaError,
    corpus_stats,
    dedup,
    filter_active,
    ingest_address_list,
    load_corpus,
    make_source_file,
    normalize_for_checksum,
    save_corpus,
)


def _csv(*rows: str) -> io.StringIO:
    return io.StringIO("address,tx_count,last_transaction_time\n" + "".join(r + "\n" for r in rows))


ADDR = "0x" + "ab" * 20


class TestIngest:
    def test_well_formed_row(self):
        records, errors = ingest_address_list(_csv(f"{ADDR},42,2024-06-01T00:00:00Z"))
        assert errors == []
        assert records == [
            AddressRecord(ADDR, 42, datetime(2024, 6, 1, tzinfo=timezone.utc))
        ]

    def test_header_only(self):
        records, errors = ingest_address_list(_csv())
        assert records == [] and errors == []

    def test_negative_tx_count_is_row_error(self):
        records, errors = ingest_address_list(_csv(f"{ADDR},-1,2024-06-01T00:00:00Z"))
        assert records == []
        assert len(errors) == 1 and "tx_count" in errors[0].message

    def test_unparseable_timestamp_reports_line_number(self):
        records, errors = ingest_address_list(
            _csv(f"{ADDR},5,2024-06-01T00:00:00Z", f"0x{'cd' * 20},7,not-a-time")
        )
        assert len(records) == 1
        assert len(errors) == 1 and errors[0].line == 3

    def test_missing_column_is_schema_error(self):
        with pytest.raises(SchemaError):
            ingest_address_list(io.StringIO("address,tx_count\n0xab,1\n"))

    def test_addresses_are_lowercased_and_unique(self):
        upper = "0x" + "AB" * 20
        records, errors = ingest_address_list(
            _csv(f"{upper},1,2024-06-01T00:00:00Z", f"{ADDR},2,2024-06-01T00:00:00Z")
        )
        assert len(records) == 1 and records[0].address == ADDR
        assert len(errors) == 1 and "duplicate" in errors[0].message


class TestFilterActive:
    CUTOFF = datetime(2024, 1, 1, tzinfo=timezone.utc)

    def _rec(self, tx, when):
        return AddressRecord(ADDR, tx, when)

    def test_below_min_tx_excluded(self):
        rec = self._rec(9, datetime(2024, 5, 1, tzinfo=timezone.utc))
        assert filter_active([rec]) == []

    def test_stale_excluded(self):
        rec = self._rec(10, datetime(2023, 12, 31, tzinfo=timezone.utc))
        assert filter_active([rec]) == []

    def test_boundary_kept(self):
        rec = self._rec(10, self.CUTOFF)
        assert filter_active([rec]) == [rec]

    def test_empty(self):
        assert filter_active([]) == []

    @given(st.lists(st.tuples(st.integers(0, 100), st.integers(0, 2))))
    def test_monotone_in_min_tx(self, rows):
        records = [
            AddressRecord(ADDR, tx, datetime(2024, 1 + m, 1, tzinfo=timezone.utc))
            for tx, m in rows
        ]
        loose = {id(r) for r in filter_active(records, min_tx=5)}
        strict = {id(r) for r in filter_active(records, min_tx=20)}
        assert strict <= loose


class TestNormalizeForChecksum:
    def test_all_whitespace_removed(self):
        assert normalize_for_checksum("a  b\tc\n") == "abc"

    def test_empty(self):
        assert normalize_for_checksum("") == ""

    @given(st.text())
    def test_idempotent(self, text):
        once = normalize_for_checksum(text)
        assert normalize_for_checksum(once) == once

    @given(st.text())
    def test_no_whitespace_survives(self, text):
        assert not any(ch.isspace() for ch in normalize_for_checksum(text))


class TestDedup:
    def test_whitespace_variants_collapse(self):
        a = make_source_file("contract A { function f() public {} }")
        b = make_source_file("contract A {\n\tfunction f()\tpublic {}\n}")
        unique, groups = dedup([a, b])
        assert len(unique) == 1
        assert len(groups) == 1 and set(groups[0].members) == {a.file_id, b.file_id}

    def test_byte_identical_collapse(self):
        a = make_source_file("contract A {}")
        b = make_source_file("contract A {}")
        unique, groups = dedup([a, b])
        assert len(unique) == 1

    def test_distinct_sources_kept(self):
        a = make_source_file("contract A { uint x; }")
        b = make_source_file("contract A { uint y; }")
        unique, _ = dedup([a, b])
        assert len(unique) == 2

    def test_survivor_is_smallest_file_id_and_order_independent(self):
        a = make_source_file("contract B { }")
        b = make_source_file("contract B{}")
        fwd, _ = dedup([a, b])
        rev, _ = dedup([b, a])
        assert fwd == rev
        assert fwd[0].file_id == min(a.file_id, b.file_id)

    def test_idempotent(self, fixture_files):
        unique, _ = dedup(fixture_files.values())
        again, groups = dedup(unique)
        assert again == unique and groups == []

    def test_member_accounting(self, fixture_files):
        files = list(fixture_files.values())
        unique, groups = dedup(files)
        assert len(unique) + sum(len(g.members) - 1 for g in groups) == len(files)


MINI_1 = """pragma solidity ^0.8.0;
contract M1 {
    /// Returns one plus one always here.
    function one() public pure returns (uint256) { return 1 + 1; }
    function two() internal {}
}
"""
MINI_2 = """pragma solidity ^0.6.12;
contract M2 {
    /// Hi.
    function three(uint256 x) external returns (uint256) { return x; }
}
"""
MINI_3 = """interface M3 {
    /// Count of all stored things kept.
    function count() external view returns (uint256);
    function drop(address who) external;
}
"""


class TestCorpusStats:
    def test_mini_corpus_golden(self):
        """Expected values hand-counted from the three sources above."""
        from solclone.extractor import extract_functions

        files = [make_source_file(s) for s in (MINI_1, MINI_2, MINI_3)]
        functions = [fn for f in files for fn in extract_functions(f)]
        stats = corpus_stats(files, functions)

        assert stats.file_count == 3
        assert stats.contract_count == 3
        assert stats.function_count == 5
        assert stats.public_external_count == 4
        assert stats.commented_function_count == 3
        # normalized lengths: one=62, two=26, three=66, count=49, drop=36
        assert stats.shortest_function_length == 26
        assert stats.longest_function_length == 66
        assert stats.median_function_length == 49
        # >=2-word comments only: "Returns one plus one always here." (33),
        # "Count of all stored things kept." (32); "Hi." is excluded
        assert stats.shortest_comment_length == 32
        assert stats.longest_comment_length == 33
        assert stats.median_comment_length == 32.5
        assert {k: v[0] for k, v in stats.version_distribution.items()} == {
            "0.8": 1,
            "0.6": 1,
            "no_version": 1,
        }
        assert abs(sum(p for _c, p in stats.version_distribution.values()) - 100.0) < 0.01

    def test_zero_functions(self):
        stats = corpus_stats([], [])
        assert stats.function_count == 0
        assert stats.median_function_length is None
        assert stats.version_distribution == {}

    def test_single_function_degenerate_triple(self):
        files = [make_source_file(MINI_2)]
        from solclone.extractor import extract_functions

        functions = extract_functions(files[0])
        stats = corpus_stats(files, functions)
        assert (
            stats.median_function_length
            == stats.longest_function_length
            == stats.shortest_function_length
            == 66
        )

    def test_length_triples_ordered(self, deduped_files, fixture_functions):
        stats = corpus_stats(deduped_files, fixture_functions)
        assert (
            stats.longest_function_length
            >= stats.median_function_length
            >= stats.shortest_function_length
        )
        assert (
            stats.longest_comment_length
            >= stats.median_comment_length
            >= stats.shortest_comment_length
        )


class TestTimestampParsing:
    def test_offset_normalized_to_utc(self):
        from solclone.util import parse_rfc3339

        parsed = parse_rfc3339("2024-06-01T02:00:00+02:00")
        assert parsed == datetime(2024, 6, 1, 0, 0, tzinfo=timezone.utc)

    def test_date_only_accepted(self):
        from solclone.util import parse_rfc3339

        assert parse_rfc3339("2024-01-01") == datetime(2024, 1, 1, tzinfo=timezone.utc)


class TestPersistence:
    def test_round_trip(self, tmp_path, fixture_files):
        files = sorted(fixture_files.values(), key=lambda f: f.file_id)
        save_corpus(files, tmp_path / "corpus", retrieved_at="2025-01-01T00:00:00Z")
        loaded = load_corpus(tmp_path / "corpus")
        assert loaded == files

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_corpus(tmp_path)
