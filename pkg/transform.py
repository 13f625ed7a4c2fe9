"""
p-biased Fourier transform between truth tables and spectra

The fast path is a butterfly over coordinates: for coordinate k each pair
(a0, a1) = (g at x_k=0, g at x_k=1) maps to (p*a1 + (1-p)*a0, sigma*(a1 - a0)),
the two-point identities for the empty set and {k}.
"""
import logging
from typing import Iterable

import numpy as np

from core import Bias, BooleanFunction, check_mask, check_n, measure_vector
from errors import BiasMismatch, LengthMismatch, SizeMismatch

logger = logging.getLogger(__name__)


class Spectrum:
    """
    2^n real Fourier coefficients indexed by subset mask, with the bias they
    were computed under. Immutable.
    """

    __slots__ = ('_n', '_coeffs', '_bias')

    def __init__(self, n: int, coeffs, bias: Bias):
        n = check_n(n)
        values = np.array(coeffs, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != (1 << n):
            raise LengthMismatch(f'Spectrum has {values.size} coefficients, expected {1 << n}')
        values.flags.writeable = False
        self._n = n
        self._coeffs = values
        self._bias = bias

    @property
    def n(self) -> int:
        return self._n

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def bias(self) -> Bias:
        return self._bias

    @property
    def squared(self) -> np.ndarray:
        return self._coeffs * self._coeffs

    @property
    def mass(self) -> float:
        """Sum of squared coefficients"""
        return float(np.dot(self._coeffs, self._coeffs))

    def __getitem__(self, subset: int) -> float:
        return float(self._coeffs[check_mask(subset, self._n)])

    def __len__(self):
        return self._coeffs.shape[0]

    def __repr__(self):
        return f'<Spectrum n={self._n} p={self._bias.p!r} mass={self.mass:.12g}>'


def butterfly(values: np.ndarray, n: int, bias: Bias, bits: Iterable[int], inverse: bool = False) -> np.ndarray:
    """
    Apply the one-coordinate transform along the given bit positions

    values has shape (..., 2^n); the last axis is transformed. Returns a new
    array; the input is left untouched.
    """
    out = np.array(values, dtype=np.float64, copy=True)
    lead = out.shape[:-1]
    if out.shape[-1] != (1 << n):
        raise LengthMismatch(f'Last axis has {out.shape[-1]} entries, expected {1 << n}')
    p = bias.p
    for b in bits:
        view = out.reshape(lead + (1 << (n - b - 1), 2, 1 << b))
        a0 = view[..., 0, :].copy()
        a1 = view[..., 1, :]
        if inverse:
            view[..., 0, :] = a0 - bias.beta * a1
            view[..., 1, :] = a0 + bias.alpha * a1
        else:
            view[..., 0, :] = p * a1 + (1.0 - p) * a0
            view[..., 1, :] = bias.sigma * (a1 - a0)
    return out


def forward_transform(f: BooleanFunction, bias: Bias) -> Spectrum:
    """O(n 2^n) p-biased Fourier transform"""
    coeffs = butterfly(f.as_float(), f.n, bias, range(f.n))
    return Spectrum(f.n, coeffs, bias)


def batch_forward_transform(tables: np.ndarray, n: int, bias: Bias) -> np.ndarray:
    """Transform a (m, 2^n) stack of tables row by row"""
    return butterfly(np.asarray(tables, dtype=np.float64), n, bias, range(n))


def inverse_transform(spec: Spectrum) -> np.ndarray:
    """Pointwise values sum_S f^(S) chi_S(x) for every x"""
    return butterfly(spec.coeffs, spec.n, spec.bias, range(spec.n), inverse=True)


def basis_value(subset: int, x: int, bias: Bias) -> float:
    """chi_S(x) = prod over i in S of chi_i(x_i)"""
    value = 1.0
    subset = int(subset)
    x = int(x)
    while subset:
        if subset & 1:
            value *= bias.chi(x & 1)
        subset >>= 1
        x >>= 1
    return value


def basis_table(subset: int, bias: Bias, n: int) -> np.ndarray:
    """chi_S evaluated at every point"""
    subset = check_mask(subset, n)
    points = np.arange(1 << n)
    values = np.ones(1 << n, dtype=np.float64)
    for b in range(n):
        if subset >> b & 1:
            values *= np.where(points >> b & 1, bias.alpha, -bias.beta)
    return values


def character_matrix(bias: Bias, n: int) -> np.ndarray:
    """Matrix with rows chi_S and columns indexed by points"""
    single = np.array([[1.0, 1.0], [-bias.beta, bias.alpha]])
    matrix = np.ones((1, 1), dtype=np.float64)
    for _ in range(n):
        matrix = np.kron(single, matrix)
    return matrix


def direct_transform(f: BooleanFunction, bias: Bias) -> Spectrum:
    """O(4^n) reference: f^(S) = E_mu[f chi_S]"""
    weighted = measure_vector(bias, f.n) * f.as_float()
    return Spectrum(f.n, character_matrix(bias, f.n) @ weighted, bias)


def inner_product(u: np.ndarray, v: np.ndarray, bias: Bias, n: int) -> float:
    """E_mu[u v] computed pointwise"""
    return float(np.dot(measure_vector(bias, n), np.asarray(u, dtype=np.float64) * np.asarray(v, dtype=np.float64)))


def plancherel(spec_f: Spectrum, spec_g: Spectrum) -> float:
    """<f, g> as the dot product of coefficient vectors"""
    if spec_f.n != spec_g.n:
        raise SizeMismatch(f'Spectra have n={spec_f.n} and n={spec_g.n}')
    if spec_f.bias != spec_g.bias:
        raise BiasMismatch(f'Spectra computed under p={spec_f.bias.p} and p={spec_g.bias.p}')
    return float(np.dot(spec_f.coeffs, spec_g.coeffs))
