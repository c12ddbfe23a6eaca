import pytest
from hypothesis import given
from hypothesis import strategies as st

from solclone.corpus import make_source_file
from solclone.embed import CODE_BASELINE, COMMENT_BASELINE, EmbedderSpec, EmbeddingCache
from solclone.extractor import FunctionRecord, VersionBucket, extract_functions
from solclone.pairs import (
    EmbeddingLookup,
    PairingPolicy,
    PairScore,
    SetLabel,
    StripeRangeError,
    Thresholds,
    baseline_stripes,
    candidate_stripes,
    classify_pair,
    function_name_of,
    generate_pairs,
    score_pair,
    stripe_of,
    supplementary_stripes,
    top_cloned_functions,
)


def _record(name: str, idx: int, code: str = "", comment=None, params=("uint256",)) -> FunctionRecord:
    code = code or f"function {name}() public {{ return {idx}; }}"
    return FunctionRecord(
        function_id=f"file{idx}:C{idx}#{name}#0",
        contract_id=f"file{idx}:C{idx}",
        contract_name=f"C{idx}",
        solidity_version=VersionBucket.V0_8,
        contract_variables=[],
        function_name=name,
        function_visibility="public",
        token_length=5,
        function_code=code,
        function_comment=comment,
        char_length=len(code),
        parameter_types=list(params),
        return_types=[],
        accepted=comment is not None,
    )


def _score(cd, cm=None, same_name=True, sig=True, degenerate=False) -> PairScore:
    return PairScore(
        function_id_a="a:A#f#0",
        function_id_b="b:B#f#0",
        cd_s=cd,
        cm_s=cm,
        same_name=same_name,
        signature_compatible=sig,
        degenerate=degenerate,
    )


class TestGeneratePairs:
    def test_all_pairs_count(self):
        records = [_record(f"f{i}", i) for i in range(4)]
        assert len(list(generate_pairs(records, PairingPolicy.ALL_PAIRS))) == 6

    def test_same_name_blocks(self):
        records = [
            _record("transfer", 1),
            _record("transfer", 2),
            _record("transfer", 3),
            _record("approve", 4),
        ]
        pairs = list(generate_pairs(records, PairingPolicy.SAME_NAME))
        assert len(pairs) == 3
        assert all(a.function_name == b.function_name == "transfer" for a, b in pairs)

    @pytest.mark.parametrize("count", [0, 1])
    def test_degenerate_inputs(self, count):
        records = [_record("f", i) for i in range(count)]
        assert list(generate_pairs(records, PairingPolicy.ALL_PAIRS)) == []

    def test_canonical_order_no_duplicates(self):
        records = [_record("f", i) for i in range(6)]
        seen = set()
        for a, b in generate_pairs(records, PairingPolicy.ALL_PAIRS):
            assert a.function_id < b.function_id
            key = (a.function_id, b.function_id)
            assert key not in seen
            seen.add(key)

    @given(st.integers(2, 200))
    def test_all_pairs_count_formula(self, n):
        records = [_record("f", i) for i in range(n)]
        pairs = sum(1 for _ in generate_pairs(records, PairingPolicy.ALL_PAIRS))
        assert pairs == n * (n - 1) // 2

    def test_blocking_is_subset_of_all_pairs(self):
        records = [_record(f"f{i % 3}", i) for i in range(8)]
        universe = {
            (a.function_id, b.function_id)
            for a, b in generate_pairs(records, PairingPolicy.ALL_PAIRS)
        }
        for policy in (
            PairingPolicy.SAME_NAME,
            PairingPolicy.SIGNATURE_COMPATIBLE,
            PairingPolicy.SAME_NAME_AND_SIGNATURE,
        ):
            blocked = {
                (a.function_id, b.function_id) for a, b in generate_pairs(records, policy)
            }
            assert blocked <= universe


class TestScorePair:
    def _lookup(self, records):
        code_spec = EmbedderSpec(kind=CODE_BASELINE, model_id="m", dim=64)
        comment_spec = EmbedderSpec(kind=COMMENT_BASELINE, model_id="m", dim=64)
        cache = EmbeddingCache()
        for r in records:
            cache.embed(r.function_code, code_spec)
            if r.function_comment:
                cache.embed(r.function_comment, comment_spec)
        return EmbeddingLookup(cache, code_spec, comment_spec)

    def test_identical_functions_cd_one(self):
        a = _record("f", 1, code="function f() public { return 1; }", comment="does a thing ok")
        b = _record("f", 2, code="function f() public { return 1; }", comment="does a thing ok")
        score = score_pair(a, b, self._lookup([a, b]))
        assert score.cd_s == 1.0
        assert score.cm_s == 1.0

    def test_missing_comment_leaves_cm_absent(self):
        a = _record("f", 1, comment="a decent header comment here")
        b = _record("f", 2, comment=None)
        score = score_pair(a, b, self._lookup([a, b]))
        assert score.cm_s is None

    def test_missing_code_embedding_is_hard_error(self):
        a = _record("f", 1)
        b = _record("f", 2)
        lookup = self._lookup([a])  # b never embedded
        with pytest.raises(KeyError):
            score_pair(a, b, lookup)

    def test_canonicalizes_pair_order(self):
        a = _record("f", 1)
        b = _record("f", 2)
        lookup = self._lookup([a, b])
        assert score_pair(b, a, lookup).pair_id == score_pair(a, b, lookup).pair_id


class TestClassify:
    def test_candidate(self):
        assert classify_pair(_score(0.70, 0.90)) == SetLabel.CANDIDATE

    def test_supplementary(self):
        assert classify_pair(_score(0.85, 0.90)) == SetLabel.SUPPLEMENTARY

    def test_baseline_low_comment(self):
        assert classify_pair(_score(0.50, 0.60)) == SetLabel.BASELINE

    def test_baseline_missing_comment(self):
        assert classify_pair(_score(0.50, None)) == SetLabel.BASELINE

    def test_degenerate(self):
        assert classify_pair(_score(0.5, 0.9, degenerate=True)) == SetLabel.DEGENERATE

    def test_boundary_code_goes_low_side_by_default(self):
        assert classify_pair(_score(0.8, 0.9)) == SetLabel.CANDIDATE
        assert classify_pair(_score(0.8, 0.5)) == SetLabel.BASELINE

    def test_boundary_configurable(self):
        thresholds = Thresholds(boundary_in_supplementary=True)
        assert classify_pair(_score(0.8, 0.9), thresholds) == SetLabel.SUPPLEMENTARY

    def test_boundary_comment_not_candidate(self):
        # comment similarity must strictly exceed the threshold
        assert classify_pair(_score(0.5, 0.8)) == SetLabel.BASELINE

    @given(
        st.floats(0, 1),
        st.one_of(st.none(), st.floats(0, 1)),
        st.booleans(),
    )
    def test_partition(self, cd, cm, degenerate):
        label = classify_pair(_score(cd, cm, degenerate=degenerate))
        assert label in set(SetLabel)
        if degenerate:
            assert label == SetLabel.DEGENERATE
        elif cd > 0.8:
            assert label == SetLabel.SUPPLEMENTARY
        elif cm is not None and cm > 0.8:
            assert label == SetLabel.CANDIDATE
        else:
            assert label == SetLabel.BASELINE


class TestStripes:
    def test_schemes_have_four_bands(self):
        assert len(supplementary_stripes()) == 4
        assert len(baseline_stripes()) == 4
        assert len(candidate_stripes()) == 16

    def test_supplementary_band_widths(self):
        for stripe in supplementary_stripes():
            lo, hi = stripe.cd_bin
            assert abs((hi - lo) - 0.05) < 1e-12
            assert 0.8 <= lo < hi <= 1.0

    def test_baseline_band_widths(self):
        for stripe in baseline_stripes():
            lo, hi = stripe.cd_bin
            assert abs((hi - lo) - 0.2) < 1e-12
            assert 0.0 <= lo < hi <= 0.8

    def test_candidate_grid_example(self):
        stripe = stripe_of(_score(0.70, 0.97), SetLabel.CANDIDATE)
        assert stripe.cm_bin == (0.95, 1.00)
        assert stripe.cd_bin == (0.6, 0.8)

    def test_supplementary_example(self):
        stripe = stripe_of(_score(0.92), SetLabel.SUPPLEMENTARY)
        assert stripe.cd_bin == (0.90, 0.95)

    def test_upper_closed_boundary(self):
        stripe = stripe_of(_score(0.70, 0.95), SetLabel.CANDIDATE)
        assert stripe.cm_bin == (0.90, 0.95)

    def test_baseline_zero_included(self):
        stripe = stripe_of(_score(0.0, 0.2), SetLabel.BASELINE)
        assert stripe.cd_bin == (0.0, 0.2)

    def test_out_of_range_is_contract_error(self):
        with pytest.raises(StripeRangeError):
            stripe_of(_score(0.5), SetLabel.SUPPLEMENTARY)

    def test_degenerate_not_striped(self):
        with pytest.raises(StripeRangeError):
            stripe_of(_score(0.5, degenerate=True), SetLabel.DEGENERATE)

    @given(st.floats(0.8, 1.0, exclude_min=True))
    def test_every_supplementary_score_maps_to_one_band(self, cd):
        matches = [s for s in supplementary_stripes() if s.cd_bin[0] < cd <= s.cd_bin[1]]
        assert len(matches) == 1
        assert stripe_of(_score(cd), SetLabel.SUPPLEMENTARY) == matches[0]

    @given(st.floats(0.0, 0.8))
    def test_every_baseline_score_maps_to_one_band(self, cd):
        stripe = stripe_of(_score(cd, 0.1), SetLabel.BASELINE)
        matches = [
            s
            for s in baseline_stripes()
            if (s.cd_bin[0] < cd <= s.cd_bin[1]) or (cd == 0.0 and s.cd_bin[0] == 0.0)
        ]
        assert len(matches) == 1 and stripe == matches[0]

    def test_key_round_trip_unique(self):
        keys = {s.key() for s in candidate_stripes() + supplementary_stripes() + baseline_stripes()}
        assert len(keys) == 24


class TestTopCloned:
    def test_ranking_with_ties(self):
        def named(name, i):
            return PairScore(
                function_id_a=f"f{i}:C#{name}#0",
                function_id_b=f"g{i}:D#{name}#0",
                cd_s=0.5,
                cm_s=0.9,
                same_name=True,
                signature_compatible=True,
            )

        pairs = [named("transfer", i) for i in range(3)] + [named("approve", 0)]
        assert top_cloned_functions(pairs) == [("transfer", 3), ("approve", 1)]

    def test_k_larger_than_names(self):
        pairs = [
            PairScore("a:C#mint#0", "b:D#mint#0", 0.5, 0.9, True, True),
        ]
        assert top_cloned_functions(pairs, k=10) == [("mint", 1)]

    def test_empty(self):
        assert top_cloned_functions([]) == []

    def test_non_same_name_ignored(self):
        pairs = [PairScore("a:C#x#0", "b:D#y#0", 0.5, 0.9, False, True)]
        assert top_cloned_functions(pairs) == []

    def test_function_name_of(self):
        assert function_name_of("file:Contract#transfer#0") == "transfer"
        with pytest.raises(ValueError):
            function_name_of("garbage")


@pytest.fixture(scope="module")
def scored(fixture_functions):
    code_spec = EmbedderSpec(kind=CODE_BASELINE, model_id="hashed-subword-v1", dim=128)
    comment_spec = EmbedderSpec(kind=COMMENT_BASELINE, model_id="hashed-tf-v1", dim=128)
    cache = EmbeddingCache()
    accepted = [f for f in fixture_functions if f.accepted]
    for fn in accepted:
        cache.embed(fn.function_code, code_spec)
        cache.embed(fn.function_comment, comment_spec)
    lookup = EmbeddingLookup(cache, code_spec, comment_spec)
    out = {}
    for a, b in generate_pairs(accepted, PairingPolicy.SAME_NAME):
        score = score_pair(a, b, lookup)
        out[a.function_name] = (score, classify_pair(score))
    return out


class TestFixtureClassification:
    """The engineered fixture pairs land in their intended sets."""

    def test_pair_inventory(self, scored):
        assert set(scored) == {
            "transferFrom",
            "decreaseAllowance",
            "owner",
            "transfer",
            "transferOwnership",
            "allowance",
            "burnFrom",
            "renounceOwnership",
        }

    @pytest.mark.parametrize(
        "name, expected",
        [
            ("transferFrom", SetLabel.CANDIDATE),
            ("decreaseAllowance", SetLabel.CANDIDATE),
            ("owner", SetLabel.CANDIDATE),
            ("transfer", SetLabel.CANDIDATE),
            ("transferOwnership", SetLabel.CANDIDATE),
            ("allowance", SetLabel.BASELINE),
            ("burnFrom", SetLabel.SUPPLEMENTARY),
            ("renounceOwnership", SetLabel.SUPPLEMENTARY),
        ],
    )
    def test_expected_set(self, scored, name, expected):
        _score_obj, label = scored[name]
        assert label == expected

    def test_identical_code_pair_scores_one(self, scored):
        score, _ = scored["renounceOwnership"]
        assert score.cd_s == 1.0 and score.cm_s == 1.0
