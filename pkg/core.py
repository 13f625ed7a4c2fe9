"""
Core domain types for Boolean functions on the p-biased cube

Bit conventions (shared by every module):
    point mask x  -> bit (k-1) holds coordinate x_k
    subset mask S -> bit (k-1) set means k is in S
"""
import logging
import math
from typing import Iterable, List, Sequence

import numpy as np

from config import Config
from errors import (BadBias, BadTable, CoordinateOutOfRange, LengthMismatch,
                    NonBooleanValue)

logger = logging.getLogger(__name__)

# Construction guard for p; sigma vanishes at the endpoints
P_GUARD = 1e-6


def check_n(n) -> int:
    """Validate a coordinate count and return it as int"""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise LengthMismatch(f'Coordinate count must be an integer, got {n!r}')
    n = int(n)
    if n < 0 or n > Config.MAX_N:
        raise LengthMismatch(f'Coordinate count {n} outside 0..{Config.MAX_N}')
    return n


def full_mask(n: int) -> int:
    return (1 << n) - 1


def check_mask(mask: int, n: int) -> int:
    """Validate a point or subset mask against n coordinates"""
    mask = int(mask)
    if mask < 0 or mask >> n:
        raise CoordinateOutOfRange(f'Mask {mask:#b} has bits outside coordinates 1..{n}')
    return mask


def mask_from_coordinates(coords: Iterable[int]) -> int:
    """Subset mask for 1-based coordinates"""
    mask = 0
    for k in coords:
        if k < 1:
            raise CoordinateOutOfRange(f'Coordinate {k} must be >= 1')
        mask |= 1 << (k - 1)
    return mask


def coordinates_of(mask: int) -> List[int]:
    """1-based coordinates contained in a subset mask, ascending"""
    coords = []
    k = 1
    while mask:
        if mask & 1:
            coords.append(k)
        mask >>= 1
        k += 1
    return coords


def popcount(mask: int) -> int:
    return bin(mask).count('1')


def popcounts(n: int) -> np.ndarray:
    """|x| for every index x < 2^n"""
    counts = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        counts = np.concatenate([counts, counts + 1])
    return counts


def flip_point(x: int, k: int, n: int = None) -> int:
    """Return x with coordinate k toggled"""
    if k < 1 or (n is not None and k > n):
        raise CoordinateOutOfRange(f'Coordinate {k} outside 1..{n if n is not None else "n"}')
    return int(x) ^ (1 << (k - 1))


def binary_entropy(theta) -> float:
    """h(theta) in nats, with 0 log 0 := 0"""
    theta = float(theta)
    if theta <= 0.0 or theta >= 1.0:
        return 0.0
    return -theta * math.log(theta) - (1.0 - theta) * math.log(1.0 - theta)


class Bias:
    """
    Parameter p of the product measure mu_p, with derived constants

    sigma = sqrt(p(1-p)), q = 4p(1-p), alpha = sqrt((1-p)/p), beta = sqrt(p/(1-p))
    """

    __slots__ = ('_p', '_sigma', '_q', '_alpha', '_beta')

    def __init__(self, p):
        try:
            p = float(p)
        except (TypeError, ValueError):
            raise BadBias(f'Bias must be a number, got {p!r}')
        if not math.isfinite(p) or p < P_GUARD or p > 1.0 - P_GUARD:
            raise BadBias(f'Bias p={p} outside [{P_GUARD}, {1.0 - P_GUARD}]')
        variance = p - p * p
        self._p = p
        self._sigma = math.sqrt(variance)
        self._q = 4.0 * variance
        self._alpha = math.sqrt((1.0 - p) / p)
        self._beta = math.sqrt(p / (1.0 - p))

    @property
    def p(self) -> float:
        return self._p

    @property
    def sigma(self) -> float:
        return self._sigma

    @property
    def q(self) -> float:
        return self._q

    @property
    def alpha(self) -> float:
        """chi_i(1)"""
        return self._alpha

    @property
    def beta(self) -> float:
        """-chi_i(0)"""
        return self._beta

    def chi(self, bit: int) -> float:
        """Single-coordinate biased character at x_i = bit"""
        return self._alpha if bit else -self._beta

    @property
    def conjectured_constant(self) -> float:
        """h(q)"""
        return binary_entropy(self._q)

    @property
    def proven_constant(self) -> float:
        """q(1-q) = 4p(1-p)(2p-1)^2"""
        return self._q * (1.0 - self._q)

    def __eq__(self, other):
        return isinstance(other, Bias) and self._p == other._p

    def __hash__(self):
        return hash(('Bias', self._p))

    def __repr__(self):
        return f'<Bias p={self._p!r}>'


def bias_grid(p_grid: Iterable) -> List[Bias]:
    """Validated biases in grid order, repeated values dropped"""
    biases = []
    for p in p_grid:
        bias = Bias(p)
        if bias not in biases:
            biases.append(bias)
    return biases


def point_measure(x: int, bias: Bias, n: int) -> float:
    """mu_p(x) = p^|x| (1-p)^(n-|x|)"""
    x = check_mask(x, n)
    weight = popcount(x)
    return bias.p ** weight * (1.0 - bias.p) ** (n - weight)


def measure_vector(bias: Bias, n: int) -> np.ndarray:
    """mu_p(x) for every point x < 2^n"""
    weights = np.ones(1, dtype=np.float64)
    for _ in range(n):
        weights = np.concatenate([weights * (1.0 - bias.p), weights * bias.p])
    return weights


class BooleanFunction:
    """
    Truth table of a {-1,+1}-valued function on {0,1}^n

    table[x] is f at the point whose bit (k-1) holds x_k. Instances are
    immutable; the table array is read-only.
    """

    __slots__ = ('_n', '_table')

    def __init__(self, n: int, table):
        n = check_n(n)
        values = np.asarray(table)
        if values.ndim != 1 or values.shape[0] != (1 << n):
            raise LengthMismatch(f'Table has {values.size} entries, expected {1 << n} for n={n}')
        if values.dtype.kind not in 'iuf':
            try:
                values = values.astype(np.float64)
            except (TypeError, ValueError):
                raise NonBooleanValue('Table entries must be +1 or -1')
        if not np.all((values == 1) | (values == -1)):
            bad = values[(values != 1) & (values != -1)][0]
            raise NonBooleanValue(f'Table entry {bad!r} is not +1 or -1')
        stored = values.astype(np.int8)
        stored.flags.writeable = False
        self._n = n
        self._table = stored

    @property
    def n(self) -> int:
        return self._n

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def size(self) -> int:
        return 1 << self._n

    def value(self, x: int) -> int:
        return int(self._table[check_mask(x, self._n)])

    def as_float(self) -> np.ndarray:
        return self._table.astype(np.float64)

    def is_constant(self) -> bool:
        return bool(np.all(self._table == self._table[0]))

    def negate(self) -> 'BooleanFunction':
        return BooleanFunction(self._n, -self._table)

    def to_string(self) -> str:
        """'1' for +1 and '0' for -1, position i holding f at point i"""
        return ((self._table > 0).astype(np.uint8) + ord('0')).tobytes().decode('ascii')

    def to_hex(self) -> str:
        text = self.to_string()
        if len(text) < 4:
            raise BadTable('Hex form needs n >= 2')
        return '0x' + ''.join(f'{int(text[i:i + 4], 2):x}' for i in range(0, len(text), 4))

    def index(self) -> int:
        """Integer t with bit x set iff f(x) = +1"""
        bits = (self._table > 0).astype(np.uint8)
        return int.from_bytes(np.packbits(bits, bitorder='little').tobytes(), 'little')

    @classmethod
    def from_index(cls, n: int, t: int) -> 'BooleanFunction':
        n = check_n(n)
        size = 1 << n
        t = int(t)
        if t < 0 or t >> size:
            raise BadTable(f'Table index {t} out of range for n={n}')
        raw = np.frombuffer(t.to_bytes((size + 7) // 8, 'little'), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder='little')[:size].astype(np.int8)
        return cls(n, 2 * bits - 1)

    def __eq__(self, other):
        return (isinstance(other, BooleanFunction) and self._n == other._n
                and np.array_equal(self._table, other._table))

    def __hash__(self):
        return hash((self._n, self._table.tobytes()))

    def __repr__(self):
        text = self.to_string()
        if len(text) > 32:
            text = text[:32] + '...'
        return f'<BooleanFunction n={self._n} tt={text}>'


def make_function(n: int, table: Sequence) -> BooleanFunction:
    """Validate a +-1 table of length 2^n and wrap it"""
    return BooleanFunction(n, table)


def _log2_exact(length: int) -> int:
    n = length.bit_length() - 1
    if length <= 0 or (1 << n) != length:
        return -1
    return n


def parse_truth_table(text: str) -> BooleanFunction:
    """
    Parse the truth-table text format

    Binary: 2^n characters from {'0','1'}, '1' -> +1, '0' -> -1.
    Hex: '0x' prefix, each digit expands to four table positions, most
    significant bit first. One digit already spans n = 2, so n = 0 and
    n = 1 tables have no hex form; write them in binary.
    """
    if text is None:
        raise BadTable('Empty truth table')
    raw = str(text).strip()
    if raw.lower().startswith('0x'):
        digits = raw[2:]
        try:
            bits = ''.join(f'{int(d, 16):04b}' for d in digits)
        except ValueError:
            raise BadTable(f'Invalid hex truth table {raw!r}')
        raw = bits
    if not raw or any(ch not in '01' for ch in raw):
        raise BadTable(f'Truth table must contain only 0/1 characters, got {text!r}')
    n = _log2_exact(len(raw))
    if n < 0:
        raise BadTable(f'Truth table length {len(raw)} is not a power of two')
    if n > Config.MAX_N:
        raise BadTable(f'Truth table has n={n} > {Config.MAX_N} coordinates')
    bits = np.frombuffer(raw.encode('ascii'), dtype=np.uint8) - ord('0')
    return BooleanFunction(n, 2 * bits.astype(np.int8) - 1)
