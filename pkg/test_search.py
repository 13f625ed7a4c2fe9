import pytest

from conftest import h
from core import Bias, parse_truth_table
from errors import ConfigMismatch, ConstantStart, TooLarge
from families import dictator
from search import (EXHAUSTIVE, ExtremalRecord, SearchReport, _exhaustive_chunk, canonical_under_permutations,
                    exhaustive_search, local_refine, merge_reports, p_sweep, random_search, refine_search,
                    score_function)


class TestScoring:
    def test_dictator_record(self, bias03):
        record = score_function(dictator(1), bias03)
        assert record.tt == '01'
        assert record.ratio == pytest.approx(h(0.84), abs=1e-12)
        assert record.sum_sq_influences == pytest.approx(1.0, abs=1e-12)
        assert abs(record.conjecture_slack) <= 1e-12

    def test_constant_is_skipped(self, bias03):
        assert score_function(parse_truth_table('1111'), bias03) is None

    def test_record_requires_influence(self):
        with pytest.raises(ValueError):
            ExtremalRecord('11', 1, 0.3, 0.0, 0.0, 0.0, 0.0)

    def test_record_dict_roundtrip(self, bias03):
        record = score_function(parse_truth_table('0111'), bias03)
        assert ExtremalRecord.from_dict(record.to_dict()) == record


class TestExhaustive:
    @pytest.mark.parametrize('p', [0.1, 0.3, 0.5, 0.85])
    def test_one_variable(self, p):
        report = exhaustive_search(1, Bias(p))
        assert report.min_ratio == pytest.approx(h(Bias(p).q), abs=1e-9)
        assert report.argmin == ['01']
        assert report.evaluated == 1
        assert report.skipped_constant == 1

    def test_parity_reaches_zero_at_half(self):
        report = exhaustive_search(2, Bias(0.5))
        assert report.min_ratio == pytest.approx(0.0, abs=1e-12)
        assert '0110' in report.argmin

    @pytest.mark.parametrize('n', [2, 3, 4])
    @pytest.mark.parametrize('p', [0.1, 0.3])
    def test_min_ratio_matches_conjectured_constant(self, n, p):
        bias = Bias(p)
        report = exhaustive_search(n, bias)
        assert report.min_ratio >= bias.conjectured_constant - 1e-9
        assert report.min_ratio == pytest.approx(bias.conjectured_constant, abs=1e-9)
        assert report.violations == []
        assert dictator(n).to_string() in [record.tt for record in report.leaderboard]

    def test_leaderboard_is_sorted_and_unique(self, bias03):
        report = exhaustive_search(3, bias03, top_k=10)
        keys = [record.sort_key for record in report.leaderboard]
        assert keys == sorted(keys)
        assert len({record.tt for record in report.leaderboard}) == len(report.leaderboard) == 10

    def test_size_limits(self, bias03):
        with pytest.raises(TooLarge):
            exhaustive_search(5, bias03)
        with pytest.raises(TooLarge):
            exhaustive_search(6, bias03, force_long=True)

    def test_permutation_dedup_keeps_minimum(self, bias03):
        plain = exhaustive_search(3, bias03)
        reduced = exhaustive_search(3, bias03, dedup_permutations=True)
        assert reduced.min_ratio == pytest.approx(plain.min_ratio, abs=1e-15)
        assert reduced.evaluated < plain.evaluated
        assert reduced.dedup_saved > plain.dedup_saved == 128

    def test_canonical_under_permutations(self):
        # dictator on coordinate 2 maps to dictator on coordinate 1
        assert canonical_under_permutations(2, 0b1100) == 0b1010
        assert canonical_under_permutations(2, 0b1010) == 0b1010


class TestMerge:
    def test_chunks_merge_to_full_result(self, bias03):
        full = exhaustive_search(3, bias03)
        first = _exhaustive_chunk((3, 0.3, 0, 64, 20, False))
        second = _exhaustive_chunk((3, 0.3, 64, 128, 20, False))
        merged = merge_reports(first, second)
        assert [r.tt for r in merged.leaderboard] == [r.tt for r in full.leaderboard]
        assert merged.argmin == full.argmin
        assert merged.evaluated == full.evaluated

    def test_merge_is_commutative(self, bias03):
        first = _exhaustive_chunk((3, 0.3, 0, 50, 5, False))
        second = _exhaustive_chunk((3, 0.3, 50, 128, 5, False))
        assert merge_reports(first, second).to_dict() == merge_reports(second, first).to_dict()

    def test_empty_is_identity(self, bias03):
        part = _exhaustive_chunk((3, 0.3, 0, 128, 20, False))
        empty = SearchReport(3, 0.3, EXHAUSTIVE, None, 20)
        assert merge_reports(empty, part).to_dict() == part.to_dict()

    def test_mismatched_parameters(self):
        with pytest.raises(ConfigMismatch):
            merge_reports(SearchReport(3, 0.3, EXHAUSTIVE), SearchReport(3, 0.4, EXHAUSTIVE))


class TestRandom:
    def test_deterministic(self):
        first = random_search(6, Bias(0.2), 2000, seed=7).to_dict()
        second = random_search(6, Bias(0.2), 2000, seed=7).to_dict()
        assert first == second

    def test_single_sample(self):
        report = random_search(4, Bias(0.3), 1, seed=0)
        assert report.evaluated + report.skipped_constant == 1

    def test_finds_exhaustive_minimum(self, bias03):
        exhaustive = exhaustive_search(3, bias03)
        sampled = random_search(3, bias03, 5000, seed=11)
        assert sampled.min_ratio == pytest.approx(exhaustive.min_ratio, abs=1e-12)

    def test_size_limit(self, bias03):
        with pytest.raises(TooLarge):
            random_search(21, bias03, 10)


class TestRefine:
    def test_dictator_is_a_local_minimum(self, bias03):
        start = dictator(3)
        best = local_refine(start, bias03, 200, seed=1)
        assert best.ratio == pytest.approx(h(0.84), abs=1e-9)

    def test_never_worse_than_start(self, bias03):
        start = parse_truth_table('0110100110010111')
        initial = score_function(start, bias03)
        best = local_refine(start, bias03, 300, seed=2)
        assert best.ratio <= initial.ratio
        assert not best.function().is_constant()

    def test_zero_budget_returns_start(self, bias03):
        start = parse_truth_table('0111')
        assert local_refine(start, bias03, 0) == score_function(start, bias03)

    def test_constant_start(self, bias03):
        with pytest.raises(ConstantStart):
            local_refine(parse_truth_table('0000'), bias03, 10)

    def test_refine_report(self, bias03):
        report = refine_search(parse_truth_table('0111'), bias03, 50, seed=3)
        assert report.mode == 'refine'
        assert report.evaluated == 50
        assert report.min_ratio <= score_function(parse_truth_table('0111'), bias03).ratio


def test_p_sweep_curve():
    sweep = p_sweep(2, [0.1, 0.5, 0.9])
    curve = sweep.curve()
    assert [row['p'] for row in curve] == [0.1, 0.5, 0.9]
    for row in curve:
        assert row['min_ratio'] >= row['h_q'] - 1e-9
        assert row['min_ratio'] >= row['proven_constant']
    assert curve[1]['min_ratio'] == pytest.approx(0.0, abs=1e-12)
    assert sweep.violations == []
    assert 'wall_time' not in sweep.to_dict()['reports'][0]['stats']
