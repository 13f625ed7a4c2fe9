import math

import numpy as np
import pytest

from conftest import all_functions, random_function
from core import Bias, measure_vector, parse_truth_table
from errors import BiasMismatch, LengthMismatch, SizeMismatch
from transform import (Spectrum, basis_table, basis_value, batch_forward_transform, character_matrix, direct_transform,
                       forward_transform, inner_product, inverse_transform, plancherel)

P_GRID = (0.05, 0.3, 0.5, 0.77)


def test_and_coefficients_at_p03():
    spec = forward_transform(parse_truth_table('0001'), Bias(0.3))
    sigma = math.sqrt(0.21)
    assert spec[0] == pytest.approx(-0.82, abs=1e-12)
    assert spec[0b01] == pytest.approx(0.126 / sigma, abs=1e-12)
    assert spec[0b10] == pytest.approx(0.126 / sigma, abs=1e-12)
    assert spec[0b11] == pytest.approx(0.42, abs=1e-12)
    assert spec.mass == pytest.approx(1.0, abs=1e-12)


def test_dictator_coefficients():
    bias = Bias(0.3)
    spec = forward_transform(parse_truth_table('01'), bias)
    assert spec[0] == pytest.approx(2 * 0.3 - 1, abs=1e-15)
    assert spec[1] == pytest.approx(2 * bias.sigma, abs=1e-15)


@pytest.mark.parametrize('p', P_GRID)
@pytest.mark.parametrize('n', [1, 2, 3])
def test_butterfly_matches_direct(n, p):
    bias = Bias(p)
    for f in all_functions(n):
        fast = forward_transform(f, bias)
        slow = direct_transform(f, bias)
        assert np.max(np.abs(fast.coeffs - slow.coeffs)) <= 1e-12


@pytest.mark.parametrize('p', P_GRID)
def test_butterfly_matches_direct_on_every_four_coordinate_function(p):
    bias = Bias(p)
    indices = np.arange(1 << 16)
    tables = np.where(indices[:, None] >> np.arange(16) & 1, 1.0, -1.0)
    fast = batch_forward_transform(tables, 4, bias)
    slow = (tables * measure_vector(bias, 4)) @ character_matrix(bias, 4).T
    assert np.max(np.abs(fast - slow)) <= 1e-12


@pytest.mark.parametrize('p', [0.1, 0.3, 0.5])
def test_random_eight_coordinate_functions(p, rng):
    bias = Bias(p)
    for _ in range(100):
        f = random_function(8, rng)
        spec = forward_transform(f, bias)
        assert np.max(np.abs(spec.coeffs - direct_transform(f, bias).coeffs)) <= 1e-12
        assert np.max(np.abs(inverse_transform(spec) - f.as_float())) <= 1e-12


@pytest.mark.parametrize('p', P_GRID)
def test_roundtrip_and_parseval(p, rng):
    bias = Bias(p)
    for n in (0, 1, 4, 8):
        f = random_function(n, rng)
        spec = forward_transform(f, bias)
        assert np.max(np.abs(inverse_transform(spec) - f.as_float())) <= 1e-12
        assert spec.mass == pytest.approx(1.0, abs=1e-12)


def test_batch_matches_single(rng):
    bias = Bias(0.21)
    tables = 2 * rng.integers(0, 2, size=(6, 16)) - 1
    batch = batch_forward_transform(tables, 4, bias)
    for row, table in zip(batch, tables):
        single = forward_transform(parse_truth_table(''.join('1' if v > 0 else '0' for v in table)), bias)
        assert np.allclose(row, single.coeffs, atol=1e-15)


def test_basis_is_orthonormal():
    bias = Bias(0.3)
    n = 3
    for s in range(1 << n):
        for t in range(1 << n):
            value = inner_product(basis_table(s, bias, n), basis_table(t, bias, n), bias, n)
            assert value == pytest.approx(1.0 if s == t else 0.0, abs=1e-12)


def test_basis_value_matches_table():
    bias = Bias(0.4)
    table = basis_table(0b101, bias, 3)
    for x in range(8):
        assert basis_value(0b101, x, bias) == pytest.approx(table[x], abs=1e-15)


def test_plancherel_matches_inner_product(rng):
    bias = Bias(0.35)
    f = random_function(5, rng)
    g = random_function(5, rng)
    pointwise = inner_product(f.as_float(), g.as_float(), bias, 5)
    assert plancherel(forward_transform(f, bias), forward_transform(g, bias)) == pytest.approx(pointwise, abs=1e-12)


def test_plancherel_rejects_mismatches():
    f = parse_truth_table('0110')
    with pytest.raises(BiasMismatch):
        plancherel(forward_transform(f, Bias(0.3)), forward_transform(f, Bias(0.4)))
    with pytest.raises(SizeMismatch):
        plancherel(forward_transform(f, Bias(0.3)), forward_transform(parse_truth_table('01'), Bias(0.3)))


def test_spectrum_validation():
    with pytest.raises(LengthMismatch):
        Spectrum(2, [1.0, 0.0, 0.0], Bias(0.5))
    spec = Spectrum(1, [1.0, 0.0], Bias(0.5))
    assert len(spec) == 2
    with pytest.raises(ValueError):
        spec.coeffs[0] = 0.5
