import math

import numpy as np
import pytest

from config import Config
from conftest import all_functions, h, random_function
from core import Bias, parse_truth_table
from errors import CoordinateOutOfRange, EpsOutOfRange, NotNormalized, ZeroSpectrum
from families import dictator, majority, parity
from quantities import (biased_fei_ratio, cross_correlation, derivative_spectrum, derivative_table, fei_ratio,
                        influence, influences, influences_spectral, min_entropy, noise_stability,
                        noise_stability_mc, spectral_entropy, support_size, total_influence, xlogx)
from transform import Spectrum, butterfly, forward_transform, inner_product


class TestDictator:
    def test_values_at_p03(self, bias03):
        f = parse_truth_table('01')
        spec = forward_transform(f, bias03)
        assert influence(f, bias03, 1) == pytest.approx(1.0, abs=1e-15)
        assert spectral_entropy(spec) == pytest.approx(h(0.84), abs=1e-12)
        assert min_entropy(spec) == pytest.approx(-math.log(0.84), abs=1e-12)
        assert cross_correlation(spec, 1) == pytest.approx(-0.4 * 2 * math.sqrt(0.21), abs=1e-12)
        assert support_size(spec) == 2

    def test_zero_mean_at_half(self):
        spec = forward_transform(dictator(3, 2), Bias(0.5))
        assert spec[0] == 0.0
        assert support_size(spec) == 1
        assert spectral_entropy(spec) == 0.0


@pytest.mark.parametrize('p', [0.1, 0.3, 0.5, 0.9])
def test_parity_entropy_and_influences(p):
    bias = Bias(p)
    for m in (1, 2, 3):
        f = parity(m)
        spec = forward_transform(f, bias)
        assert spectral_entropy(spec) == pytest.approx(m * h(bias.q), abs=1e-11)
        assert influences(f, bias).to_list() == pytest.approx([1.0] * m, abs=1e-12)
        assert influences(f, bias).sum_of_squares == pytest.approx(m, abs=1e-12)


@pytest.mark.parametrize('p', [0.1, 0.3])
@pytest.mark.parametrize('m', [2, 3, 4])
def test_parity_and_dictator_influences_are_exact(m, p):
    bias = Bias(p)
    assert influences(parity(m), bias).sum_of_squares == m
    assert influences(dictator(m, m), bias).to_list() == [0.0] * (m - 1) + [1.0]


def test_partial_influence_matches_spectral(rng):
    bias = Bias(0.3)
    for _ in range(20):
        f = random_function(5, rng)
        combinatorial = influences(f, bias).values
        spectral = influences_spectral(forward_transform(f, bias)).values
        assert np.max(np.abs(combinatorial - spectral)) <= 1e-12


def test_majority_at_half():
    f = majority(3)
    spec = forward_transform(f, Bias(0.5))
    assert spectral_entropy(spec) == pytest.approx(math.log(4), abs=1e-12)
    assert influences(f, Bias(0.5)).to_list() == pytest.approx([0.5, 0.5, 0.5], abs=1e-12)


@pytest.mark.parametrize('p', [0.05, 0.3, 0.62])
def test_spectral_influence_matches_combinatorial(p):
    bias = Bias(p)
    for f in all_functions(3):
        spec = forward_transform(f, bias)
        combinatorial = influences(f, bias).values
        spectral = influences_spectral(spec).values
        assert np.max(np.abs(combinatorial - spectral)) <= 1e-10
        assert total_influence(spec) == pytest.approx(combinatorial.sum(), abs=1e-10)


def test_cross_correlation_formulas(rng):
    bias = Bias(0.27)
    f = random_function(5, rng)
    spec = forward_transform(f, bias)
    infs = influences(f, bias)
    for k in range(1, 6):
        expected = 2 * bias.sigma * (2 * bias.p - 1) * infs[k]
        pointwise = inner_product(f.as_float(), derivative_table(f, bias, k), bias, 5)
        assert cross_correlation(spec, k) == pytest.approx(expected, abs=1e-12)
        assert cross_correlation(spec, k) == pytest.approx(pointwise, abs=1e-12)


def test_derivative_spectrum_matches_pointwise(rng):
    bias = Bias(0.4)
    f = random_function(4, rng)
    for k in range(1, 5):
        table = derivative_table(f, bias, k)
        direct = butterfly(table, 4, bias, range(4))
        assert np.allclose(derivative_spectrum(forward_transform(f, bias), k).coeffs, direct, atol=1e-12)


def test_coordinate_bounds():
    f = parse_truth_table('0110')
    with pytest.raises(CoordinateOutOfRange):
        influence(f, Bias(0.3), 0)
    with pytest.raises(CoordinateOutOfRange):
        cross_correlation(forward_transform(f, Bias(0.3)), 3)
    with pytest.raises(CoordinateOutOfRange):
        influences(f, Bias(0.3))[3]


class TestNoiseStability:
    def test_endpoints(self):
        spec = forward_transform(parse_truth_table('0111'), Bias(0.3))
        assert noise_stability(spec, 0) == pytest.approx(1.0, abs=1e-12)
        assert noise_stability(spec, 1) == pytest.approx(spec[0] ** 2, abs=1e-15)

    def test_dictator_at_half(self):
        spec = forward_transform(dictator(1), Bias(0.5))
        assert noise_stability(spec, 0.2) == pytest.approx(0.8, abs=1e-12)
        assert noise_stability(spec, 1) == pytest.approx(0.0, abs=1e-15)

    def test_nonincreasing_in_eps(self, rng):
        grid = np.linspace(0.0, 1.0, 21)
        for p in (0.1, 0.5, 0.8):
            spec = forward_transform(random_function(5, rng), Bias(p))
            values = [noise_stability(spec, eps) for eps in grid]
            assert all(later <= earlier + 1e-15 for earlier, later in zip(values, values[1:]))

    def test_rejects_bad_eps(self):
        spec = forward_transform(dictator(1), Bias(0.5))
        with pytest.raises(EpsOutOfRange):
            noise_stability(spec, 1.5)
        with pytest.raises(EpsOutOfRange):
            noise_stability(spec, -0.1)

    def test_monte_carlo_converges(self):
        f = majority(3)
        bias = Bias(0.3)
        exact = noise_stability(forward_transform(f, bias), 0.25)
        estimate = noise_stability_mc(f, bias, 0.25, 200000, seed=1)
        assert estimate == pytest.approx(exact, abs=0.01)

    @pytest.mark.slow
    @pytest.mark.parametrize('p', [0.3, 0.5])
    def test_monte_carlo_agrees_at_eight_coordinates(self, p):
        rng = np.random.default_rng(808)
        bias = Bias(p)
        for i in range(10):
            f = random_function(8, rng)
            exact = noise_stability(forward_transform(f, bias), 0.2)
            estimate = noise_stability_mc(f, bias, 0.2, 1_000_000, seed=i)
            assert abs(estimate - exact) <= 0.005

    def test_monte_carlo_is_deterministic(self):
        f = dictator(2)
        bias = Bias(0.4)
        assert noise_stability_mc(f, bias, 0.1, 5000, seed=9) == noise_stability_mc(f, bias, 0.1, 5000, seed=9)

    def test_monte_carlo_independent_of_workers(self, monkeypatch):
        monkeypatch.setattr(Config, 'MC_BLOCK_SIZE', 1000)
        f = majority(3)
        bias = Bias(0.3)
        single = noise_stability_mc(f, bias, 0.2, 4500, seed=3, workers=1)
        pooled = noise_stability_mc(f, bias, 0.2, 4500, seed=3, workers=2)
        assert single == pooled


class TestEntropyEdges:
    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            spectral_entropy(Spectrum(1, [1.0, 1.0], Bias(0.5)))

    def test_zero_spectrum(self):
        with pytest.raises(ZeroSpectrum):
            min_entropy(Spectrum(1, [0.0, 0.0], Bias(0.5)))

    def test_xlogx_zero(self):
        assert xlogx([0.0, 1.0]).tolist() == [0.0, 0.0]

    def test_ratios_for_constant(self):
        spec = forward_transform(parse_truth_table('1111'), Bias(0.3))
        assert fei_ratio(spec) is None
        assert biased_fei_ratio(spec) is None
        assert support_size(spec) == 1
        assert min_entropy(spec) == pytest.approx(0.0, abs=1e-15)

    def test_ratios_for_dictator(self, bias03):
        spec = forward_transform(dictator(1), bias03)
        assert fei_ratio(spec) == pytest.approx(h(0.84), abs=1e-12)
        expected = h(0.84) / (0.3 * math.log(1 / 0.3))
        assert biased_fei_ratio(spec) == pytest.approx(expected, abs=1e-12)


def test_min_entropy_bounds_entropy(rng):
    for p in (0.05, 0.3, 0.5, 0.9):
        bias = Bias(p)
        for n in (1, 3, 5):
            spec = forward_transform(random_function(n, rng), bias)
            assert min_entropy(spec) <= spectral_entropy(spec) + 1e-12
