import math

import numpy as np
import pytest

from conftest import h
from core import (Bias, BooleanFunction, bias_grid, binary_entropy, check_mask, coordinates_of, flip_point,
                  make_function, mask_from_coordinates, measure_vector, parse_truth_table, point_measure,
                  popcounts)
from errors import BadBias, BadTable, CoordinateOutOfRange, LengthMismatch, NonBooleanValue


class TestBias:
    def test_derived_constants(self):
        bias = Bias(0.3)
        assert bias.sigma == pytest.approx(math.sqrt(0.21), abs=1e-15)
        assert bias.q == pytest.approx(0.84, abs=1e-15)
        assert bias.alpha == pytest.approx(math.sqrt(0.7 / 0.3), abs=1e-15)
        assert bias.beta == pytest.approx(math.sqrt(0.3 / 0.7), abs=1e-15)
        assert bias.chi(1) == bias.alpha
        assert bias.chi(0) == -bias.beta

    def test_characters_are_centered_and_normalized(self):
        bias = Bias(0.17)
        mean = bias.p * bias.chi(1) + (1 - bias.p) * bias.chi(0)
        second = bias.p * bias.chi(1) ** 2 + (1 - bias.p) * bias.chi(0) ** 2
        assert mean == pytest.approx(0.0, abs=1e-15)
        assert second == pytest.approx(1.0, abs=1e-15)

    def test_constants_at_half(self):
        bias = Bias(0.5)
        assert bias.q == 1.0
        assert bias.proven_constant == 0.0
        assert bias.conjectured_constant == 0.0

    def test_constants_symmetric(self):
        assert Bias(0.2).conjectured_constant == pytest.approx(Bias(0.8).conjectured_constant, abs=1e-15)
        assert Bias(0.3).conjectured_constant == pytest.approx(h(0.84), abs=1e-15)
        assert Bias(0.3).proven_constant == pytest.approx(0.84 * 0.16, abs=1e-15)

    @pytest.mark.parametrize('p', [0.0, 1.0, -0.2, 1.5, float('nan'), 'abc', None])
    def test_rejects_bad_bias(self, p):
        with pytest.raises(BadBias):
            Bias(p)

    def test_equality(self):
        assert Bias(0.3) == Bias('0.3')
        assert hash(Bias(0.3)) == hash(Bias(0.3))
        assert Bias(0.3) != Bias(0.4)


class TestMeasure:
    def test_measure_vector_sums_to_one(self):
        weights = measure_vector(Bias(0.3), 4)
        assert weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_point_probabilities(self):
        bias = Bias(0.3)
        weights = measure_vector(bias, 2)
        assert weights[0] == pytest.approx(0.49)
        assert weights[1] == pytest.approx(0.21)
        assert weights[3] == pytest.approx(0.09)
        assert point_measure(3, bias, 2) == pytest.approx(weights[3], abs=1e-16)

    def test_popcounts(self):
        assert popcounts(3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]

    def test_masks(self):
        assert mask_from_coordinates([1, 3]) == 0b101
        assert coordinates_of(0b1010) == [2, 4]
        assert flip_point(0b101, 2) == 0b111
        with pytest.raises(CoordinateOutOfRange):
            check_mask(0b100, 2)
        with pytest.raises(CoordinateOutOfRange):
            flip_point(0, 3, n=2)

    def test_flip_point_is_an_involution(self):
        for x in range(16):
            for k in range(1, 5):
                assert flip_point(x, k) != x
                assert flip_point(flip_point(x, k), k) == x

    def test_bias_grid_drops_repeats(self):
        assert [b.p for b in bias_grid([0.3, '0.5', 0.3, 0.5])] == [0.3, 0.5]
        with pytest.raises(BadBias):
            bias_grid([0.3, 1.0])


class TestBooleanFunction:
    def test_rejects_bad_length(self):
        with pytest.raises(LengthMismatch):
            BooleanFunction(2, [1, 1, 1])

    def test_rejects_non_boolean(self):
        with pytest.raises(NonBooleanValue):
            BooleanFunction(2, [1, 0, 1, 1])

    def test_table_is_read_only(self):
        f = BooleanFunction(1, [-1, 1])
        with pytest.raises(ValueError):
            f.table[0] = 1

    def test_index_roundtrip(self):
        f = BooleanFunction.from_index(2, 0b1000)
        assert f.to_string() == '0001'
        assert f.index() == 8
        assert BooleanFunction.from_index(3, 0b10010110).index() == 0b10010110

    def test_make_function_keeps_table(self):
        table = [1, -1, -1, 1, -1, 1, 1, 1]
        f = make_function(3, table)
        assert f.n == 3
        assert f.table.tolist() == table
        assert make_function(3, f.table) == f
        with pytest.raises(LengthMismatch):
            make_function(3, table[:4])

    def test_index_out_of_range(self):
        with pytest.raises(BadTable):
            BooleanFunction.from_index(1, 4)

    def test_negate_and_constant(self):
        f = parse_truth_table('0110')
        assert f.negate().to_string() == '1001'
        assert not f.is_constant()
        assert parse_truth_table('1111').is_constant()

    def test_value(self):
        f = parse_truth_table('0001')
        assert f.value(3) == 1
        assert f.value(0) == -1

    def test_equality_and_hash(self):
        assert parse_truth_table('0110') == parse_truth_table('0x6')
        assert len({parse_truth_table('01'), parse_truth_table('01')}) == 1


class TestParseTruthTable:
    def test_binary(self):
        f = parse_truth_table('01')
        assert f.n == 1
        assert f.table.tolist() == [-1, 1]

    def test_hex_expands_msb_first(self):
        f = parse_truth_table('0x6')
        assert f.n == 2
        assert f.to_string() == '0110'
        assert parse_truth_table('0x96').to_string() == '10010110'
        assert f.to_hex() == '0x6'

    def test_hex_needs_two_coordinates(self):
        with pytest.raises(BadTable):
            parse_truth_table('01').to_hex()
        assert parse_truth_table('0x1').n == 2

    def test_whitespace_ignored(self):
        assert parse_truth_table('  0111\n').to_string() == '0111'

    @pytest.mark.parametrize('text', ['', '011', '012', '0xg', '0x', 'abc', None])
    def test_rejects_malformed(self, text):
        with pytest.raises(BadTable):
            parse_truth_table(text)


def test_binary_entropy():
    assert binary_entropy(0.5) == pytest.approx(math.log(2), abs=1e-15)
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.84) == pytest.approx(h(0.84), abs=1e-15)
    assert np.isclose(binary_entropy(0.1), binary_entropy(0.9))
