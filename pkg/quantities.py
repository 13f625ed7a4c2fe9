"""
Scalar functionals of a Boolean function and its p-biased spectrum

Influences (combinatorial and spectral), total influence, spectral entropy,
the discrete derivative, the cross-correlation <f, d_k f>, noise stability
(spectral and Monte Carlo), support size and min-entropy. Entropies are in nats.
"""
import logging
import math
from multiprocessing import Pool
from typing import List, Optional, Sequence

import numpy as np

from config import Config
from core import Bias, BooleanFunction, measure_vector, popcounts
from errors import CoordinateOutOfRange, EpsOutOfRange, NotNormalized, ZeroSpectrum
from transform import Spectrum

logger = logging.getLogger(__name__)

# Squared coefficients below this count as exact zeros in entropy sums
ENTROPY_FLOOR = 1e-300
NORMALIZATION_TOL = 1e-9


def _check_coordinate(k: int, n: int):
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1 or k > n:
        raise CoordinateOutOfRange(f'Coordinate {k!r} outside 1..{n}')


def _pair_view(values: np.ndarray, n: int, k: int) -> np.ndarray:
    """View with axis 1 indexing coordinate k (0 = absent/x_k=0, 1 = present/x_k=1)"""
    b = k - 1
    return values.reshape(1 << (n - b - 1), 2, 1 << b)


def xlogx(values) -> np.ndarray:
    """t log t elementwise with 0 log 0 := 0"""
    t = np.asarray(values, dtype=np.float64)
    out = np.zeros_like(t)
    positive = t >= ENTROPY_FLOOR
    out[positive] = t[positive] * np.log(t[positive])
    return out


class InfluenceVector:
    """Per-coordinate influences Inf_k for k = 1..n"""

    __slots__ = ('_values',)

    def __init__(self, values: Sequence[float]):
        values = np.array(values, dtype=np.float64)
        values.flags.writeable = False
        self._values = values

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __getitem__(self, k: int) -> float:
        """1-based access"""
        _check_coordinate(k, len(self._values))
        return float(self._values[k - 1])

    def __len__(self):
        return len(self._values)

    def __iter__(self):
        return iter(float(v) for v in self._values)

    @property
    def total(self) -> float:
        return float(self._values.sum())

    @property
    def sum_of_squares(self) -> float:
        return float(np.dot(self._values, self._values))

    def to_list(self) -> List[float]:
        return [float(v) for v in self._values]

    def __repr__(self):
        return f'<InfluenceVector {self.to_list()}>'


def influence(f: BooleanFunction, bias: Bias, k: int) -> float:
    """
    P_{x ~ mu_p}[f(x) != f(x xor e_k)]

    Sums mu_p(x) over the smaller of the disagreeing and agreeing point
    sets, so coordinates that always (or never) matter give exactly 1 (0).
    """
    _check_coordinate(k, f.n)
    points = np.arange(f.size)
    flipped = f.table[points ^ (1 << (k - 1))]
    disagree = f.table != flipped
    count = int(disagree.sum())
    if count == 0:
        return 0.0
    if count == f.size:
        return 1.0
    weights = measure_vector(bias, f.n)
    if 2 * count <= f.size:
        return math.fsum(weights[disagree])
    return 1.0 - math.fsum(weights[~disagree])


def influences(f: BooleanFunction, bias: Bias) -> InfluenceVector:
    """Combinatorial influence of every coordinate"""
    return InfluenceVector([influence(f, bias, k) for k in range(1, f.n + 1)])


def influences_spectral(spec: Spectrum) -> InfluenceVector:
    """Inf_k = (sum over S containing k of f^(S)^2) / 4p(1-p)"""
    squared = spec.squared
    values = [_pair_view(squared, spec.n, k)[:, 1, :].sum() / spec.bias.q for k in range(1, spec.n + 1)]
    return InfluenceVector(values)


def total_influence(spec: Spectrum) -> float:
    """(1 / 4p(1-p)) sum_S |S| f^(S)^2"""
    return float(np.dot(popcounts(spec.n), spec.squared) / spec.bias.q)


def spectral_entropy(spec: Spectrum) -> float:
    """Shannon entropy (nats) of the distribution {f^(S)^2}"""
    squared = spec.squared
    mass = float(squared.sum())
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f'Squared coefficients sum to {mass!r}, not 1')
    return float(-xlogx(squared).sum())


def derivative_spectrum(spec: Spectrum, k: int) -> Spectrum:
    """Spectrum of d_k f: coefficient at S (k not in S) is f^(S + {k}); zero on S containing k"""
    _check_coordinate(k, spec.n)
    out = np.zeros(1 << spec.n, dtype=np.float64)
    _pair_view(out, spec.n, k)[:, 0, :] = _pair_view(spec.coeffs, spec.n, k)[:, 1, :]
    return Spectrum(spec.n, out, spec.bias)


def derivative_table(f: BooleanFunction, bias: Bias, k: int) -> np.ndarray:
    """Pointwise d_k f(x) = sigma (f_{k->1}(x) - f_{k->0}(x))"""
    _check_coordinate(k, f.n)
    view = _pair_view(f.as_float(), f.n, k)
    diff = bias.sigma * (view[:, 1, :] - view[:, 0, :])
    out = np.empty_like(view)
    out[:, 0, :] = diff
    out[:, 1, :] = diff
    return out.reshape(-1)


def cross_correlation(spec: Spectrum, k: int) -> float:
    """sum over S without k of f^(S) f^(S + {k}) = <f, d_k f>"""
    _check_coordinate(k, spec.n)
    view = _pair_view(spec.coeffs, spec.n, k)
    return float(np.sum(view[:, 0, :] * view[:, 1, :]))


def _check_noise(eps):
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise EpsOutOfRange(f'Noise rate eps={eps} outside [0, 1]')
    return eps


def noise_stability(spec: Spectrum, eps: float) -> float:
    """S_eps(f) = sum_S (1-eps)^|S| f^(S)^2"""
    eps = _check_noise(eps)
    weights = np.power(1.0 - eps, popcounts(spec.n).astype(np.float64))
    return float(np.dot(weights, spec.squared))


def _mc_block(args):
    """Sum of f(X) f(Y) over one independently seeded block of samples"""
    table, n, p, eps, count, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    weights = (1 << np.arange(n, dtype=np.int64))
    x_bits = rng.random((count, n)) < p
    resample = rng.random((count, n)) < eps
    fresh = rng.random((count, n)) < p
    y_bits = np.where(resample, fresh, x_bits)
    x_idx = x_bits.astype(np.int64) @ weights
    y_idx = y_bits.astype(np.int64) @ weights
    return int(np.sum(table[x_idx].astype(np.int64) * table[y_idx].astype(np.int64)))


def noise_stability_mc(f: BooleanFunction, bias: Bias, eps: float, samples: int, seed: int,
                       workers: int = 1) -> float:
    """
    Monte Carlo estimate of E[f(X) f(Y)] where Y resamples each coordinate of
    X ~ mu_p independently with probability eps

    The sample budget is cut into fixed-size blocks, each seeded from
    SeedSequence(seed).spawn, so the estimate does not depend on workers.
    """
    eps = _check_noise(eps)
    samples = int(samples)
    if samples < 1:
        raise ValueError(f'samples must be >= 1, got {samples}')
    block = Config.MC_BLOCK_SIZE
    counts = [block] * (samples // block)
    if samples % block:
        counts.append(samples % block)
    seeds = np.random.SeedSequence(int(seed)).spawn(len(counts))
    table = np.asarray(f.table)
    tasks = [(table, f.n, bias.p, eps, count, seq) for count, seq in zip(counts, seeds)]

    if workers > 1 and len(tasks) > 1:
        with Pool(min(workers, len(tasks))) as pool:
            totals = pool.map(_mc_block, tasks)
    else:
        totals = [_mc_block(task) for task in tasks]

    estimate = sum(totals) / samples
    logger.debug(f"Noise stability MC: eps={eps}, samples={samples}, seed={seed}, estimate={estimate}")
    return estimate


def support_size(spec: Spectrum, tol: float = None) -> int:
    """Number of coefficients with |f^(S)| > tol"""
    tol = Config.SUPPORT_ZERO_TOL if tol is None else float(tol)
    if tol < 0:
        raise ValueError(f'tol must be >= 0, got {tol}')
    return int(np.count_nonzero(np.abs(spec.coeffs) > tol))


def min_entropy(spec: Spectrum) -> float:
    """-log max_S f^(S)^2, in nats"""
    peak = float(spec.squared.max())
    if peak <= 0.0:
        raise ZeroSpectrum('Min-entropy undefined for the zero spectrum')
    return -math.log(peak)


def fei_ratio(spec: Spectrum) -> Optional[float]:
    """Ent / I, the quantity the uniform FEI conjecture bounds; None when I = 0"""
    total = total_influence(spec)
    if total <= 0.0:
        return None
    return spectral_entropy(spec) / total


def biased_fei_ratio(spec: Spectrum) -> Optional[float]:
    """Ent / (p log(1/p) I), the quantity the biased FEI conjecture bounds"""
    total = total_influence(spec)
    p = spec.bias.p
    scale = p * math.log(1.0 / p) * total
    if scale <= 0.0:
        return None
    return spectral_entropy(spec) / scale
