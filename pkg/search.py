"""
Extremal-function search for the ratio Ent_p(f) / sum_k Inf_k^2

Exhaustive enumeration for small n (one representative per {f, -f}, and
optionally per coordinate-permutation orbit), seeded random sampling for
larger n and an annealed single-flip refinement. Work is split into index
ranges or seeded blocks; each worker fills a private SearchReport and the
parts are folded with merge_reports.
"""
import itertools
import logging
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from multiprocessing import Pool
from typing import Iterable, List, Optional, Sequence

import numpy as np

from config import Config
from core import Bias, BooleanFunction, bias_grid, parse_truth_table
from errors import ConfigMismatch, ConstantStart, TooLarge
from quantities import xlogx
from transform import batch_forward_transform

logger = logging.getLogger(__name__)

EXHAUSTIVE = 'exhaustive'
RANDOM = 'random'
REFINE = 'refine'
MODES = (EXHAUSTIVE, RANDOM, REFINE)

# Rows per exhaustive work item, and table entries per random block
CHUNK_SIZE = 1 << 13
RANDOM_BLOCK_ENTRIES = 1 << 18
ARGMIN_DECIMALS = 12
IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True)
class ExtremalRecord:
    tt: str
    n: int
    p: float
    entropy: float
    sum_sq_influences: float
    ratio: float
    conjecture_slack: float

    def __post_init__(self):
        if not self.sum_sq_influences > 0:
            raise ValueError(f'Record {self.tt} has sum of squared influences {self.sum_sq_influences}')

    @property
    def sort_key(self):
        return (self.ratio, self.tt)

    def function(self) -> BooleanFunction:
        return parse_truth_table(self.tt)

    def to_dict(self) -> dict:
        return {
            'tt': self.tt,
            'n': self.n,
            'p': self.p,
            'entropy': self.entropy,
            'sum_sq_influences': self.sum_sq_influences,
            'ratio': self.ratio,
            'conjecture_slack': self.conjecture_slack,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ExtremalRecord':
        return cls(**{key: data[key] for key in ('tt', 'n', 'p', 'entropy', 'sum_sq_influences', 'ratio',
                                                  'conjecture_slack')})


@lru_cache(maxsize=None)
def _membership(n: int) -> np.ndarray:
    """(2^n, n) matrix: entry [S, k-1] is 1 when k is in S"""
    subsets = np.arange(1 << n)
    return ((subsets[:, None] >> np.arange(n)) & 1).astype(np.float64)


def score_tables(tables: np.ndarray, n: int, bias: Bias):
    """Entropy and sum of squared influences for each row of a (m, 2^n) table stack"""
    squared = batch_forward_transform(tables, n, bias) ** 2
    entropy = -xlogx(squared).sum(axis=1)
    infs = squared @ _membership(n) / bias.q
    return entropy, (infs * infs).sum(axis=1)


def _tt_strings(tables: np.ndarray) -> List[str]:
    chars = (np.asarray(tables) > 0).astype(np.uint8) + ord('0')
    return [row.tobytes().decode('ascii') for row in chars]


def _constant_rows(tables: np.ndarray) -> np.ndarray:
    return np.all(tables == tables[:, :1], axis=1)


def _make_record(tt: str, n: int, bias: Bias, entropy: float, sum_sq: float) -> ExtremalRecord:
    entropy = float(entropy)
    sum_sq = float(sum_sq)
    return ExtremalRecord(tt=tt, n=n, p=bias.p, entropy=entropy, sum_sq_influences=sum_sq,
                          ratio=entropy / sum_sq, conjecture_slack=entropy - bias.conjectured_constant * sum_sq)


def score_function(f: BooleanFunction, bias: Bias) -> Optional[ExtremalRecord]:
    """Record for f, or None for constant f"""
    if f.is_constant():
        return None
    entropy, sum_sq = score_tables(f.table[None, :], f.n, bias)
    return _make_record(f.to_string(), f.n, bias, entropy[0], sum_sq[0])


@lru_cache(maxsize=None)
def _permutation_points(n: int) -> tuple:
    """For each coordinate permutation, the image of every point"""
    points = np.arange(1 << n)
    images = []
    for perm in itertools.permutations(range(n)):
        image = np.zeros_like(points)
        for i, target in enumerate(perm):
            image |= ((points >> i) & 1) << target
        images.append(image)
    return tuple(images)


def _table_indices(n: int, bits: np.ndarray) -> np.ndarray:
    return bits.astype(np.int64) @ (np.int64(1) << np.arange(1 << n, dtype=np.int64))


def _canonical_mask(n: int, t: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """True where t is the smallest index in its permutation orbit"""
    canonical = np.ones(t.shape, dtype=bool)
    for image in _permutation_points(n)[1:]:
        canonical &= t <= _table_indices(n, bits[:, image])
    return canonical


def canonical_under_permutations(n: int, t: int) -> int:
    """Smallest table index reachable from t by permuting coordinates"""
    bits = (np.array([t], dtype=np.int64)[:, None] >> np.arange(1 << n)) & 1
    return int(min(_table_indices(n, bits[:, image])[0] for image in _permutation_points(n)))


class SearchReport:
    """Leaderboard, argmin set and statistics for one (n, p) search"""

    def __init__(self, n: int, p: float, mode: str, seed: Optional[int] = None, top_k: int = None,
                 dedup_permutations: bool = False):
        self.n = n
        self.p = float(p)
        self.mode = mode
        self.seed = seed
        self.top_k = Config.LEADERBOARD_K if top_k is None else int(top_k)
        self.dedup_permutations = dedup_permutations
        self.leaderboard: List[ExtremalRecord] = []
        self.argmin: List[str] = []
        self.argmin_ratio: Optional[float] = None
        self.violations: List[ExtremalRecord] = []
        self.evaluated = 0
        self.skipped_constant = 0
        self.dedup_saved = 0
        self.wall_time = 0.0
        self.created = None

    @property
    def bias(self) -> Bias:
        return Bias(self.p)

    @property
    def best(self) -> Optional[ExtremalRecord]:
        return self.leaderboard[0] if self.leaderboard else None

    @property
    def min_ratio(self) -> Optional[float]:
        return self.best.ratio if self.leaderboard else None

    def scoring_config(self):
        return (self.n, self.p, self.top_k, self.dedup_permutations)

    def offer(self, records: Iterable[ExtremalRecord]):
        records = list(records)
        if not records:
            return
        self.leaderboard = _top(self.leaderboard + records, self.top_k)
        for record in records:
            self._offer_argmin(float(np.round(record.ratio, ARGMIN_DECIMALS)), [record.tt])
        violators = [r for r in records if r.conjecture_slack < -Config.INEQUALITY_TOLERANCE]
        if violators:
            for record in violators:
                logger.warning(f"Conjecture violator at n={record.n}, p={record.p}: {record.tt} "
                               f"(ratio {record.ratio}, slack {record.conjecture_slack})")
            self.violations = _cap(self.violations + violators, key=lambda r: (r.conjecture_slack, r.tt))

    def _offer_argmin(self, rounded: float, tts: List[str]):
        if self.argmin_ratio is None or rounded < self.argmin_ratio:
            self.argmin_ratio = rounded
            self.argmin = sorted(set(tts))[:Config.ARGMIN_CAP]
        elif rounded == self.argmin_ratio:
            self.argmin = sorted(set(self.argmin) | set(tts))[:Config.ARGMIN_CAP]

    def offer_batch(self, tables: np.ndarray, entropy: np.ndarray, sum_sq: np.ndarray):
        """Fold a scored batch of non-constant tables into the report"""
        if len(tables) == 0:
            return
        bias = self.bias
        ratio = entropy / sum_sq
        k = min(self.top_k, len(ratio))
        threshold = np.partition(ratio, k - 1)[k - 1] if k > 0 else -np.inf
        chosen = np.nonzero(ratio <= threshold)[0]
        slack = entropy - bias.conjectured_constant * sum_sq
        violating = np.nonzero(slack < -Config.INEQUALITY_TOLERANCE)[0]
        picked = np.union1d(chosen, violating)
        tts = _tt_strings(tables[picked])
        self.offer(_make_record(tt, self.n, bias, entropy[i], sum_sq[i]) for tt, i in zip(tts, picked))

        rounded = np.round(ratio, ARGMIN_DECIMALS)
        low = rounded.min()
        ties = np.nonzero(rounded == low)[0]
        self._offer_argmin(float(low), _tt_strings(tables[ties]))

    def merge(self, other: 'SearchReport') -> 'SearchReport':
        return merge_reports(self, other)

    def to_dict(self, timing: bool = False) -> dict:
        bias = self.bias
        stats = {
            'evaluated': self.evaluated,
            'skipped_constant': self.skipped_constant,
            'dedup_saved': self.dedup_saved,
        }
        if timing:
            stats['wall_time'] = self.wall_time
        return {
            'mode': self.mode,
            'created': self.created,
            'n': self.n,
            'p': self.p,
            'seed': self.seed,
            'top_k': self.top_k,
            'dedup_permutations': self.dedup_permutations,
            'h_q': bias.conjectured_constant,
            'proven_constant': bias.proven_constant,
            'min_ratio': self.min_ratio,
            'best': self.best.to_dict() if self.best else None,
            'argmin': list(self.argmin),
            'leaderboard': [record.to_dict() for record in self.leaderboard],
            'violations': [record.to_dict() for record in self.violations],
            'stats': stats,
        }


def _top(records: List[ExtremalRecord], k: int) -> List[ExtremalRecord]:
    seen = set()
    kept = []
    for record in sorted(records, key=lambda r: r.sort_key):
        if record.tt in seen:
            continue
        seen.add(record.tt)
        kept.append(record)
        if len(kept) == k:
            break
    return kept


def _cap(records: List[ExtremalRecord], key) -> List[ExtremalRecord]:
    unique = {record.tt: record for record in records}
    return sorted(unique.values(), key=key)[:Config.ARGMIN_CAP]


def merge_reports(a: SearchReport, b: SearchReport) -> SearchReport:
    """Union leaderboards, argmin sets and violations; sum statistics"""
    if a.scoring_config() != b.scoring_config():
        raise ConfigMismatch(f'Cannot merge search reports {a.scoring_config()} and {b.scoring_config()}')
    merged = SearchReport(a.n, a.p, a.mode if a.mode == b.mode else 'mixed',
                          a.seed if a.seed == b.seed else None, a.top_k, a.dedup_permutations)
    merged.leaderboard = _top(a.leaderboard + b.leaderboard, a.top_k)
    for part in (a, b):
        if part.argmin_ratio is not None:
            merged._offer_argmin(part.argmin_ratio, part.argmin)
    merged.violations = _cap(a.violations + b.violations, key=lambda r: (r.conjecture_slack, r.tt))
    merged.evaluated = a.evaluated + b.evaluated
    merged.skipped_constant = a.skipped_constant + b.skipped_constant
    merged.dedup_saved = a.dedup_saved + b.dedup_saved
    merged.wall_time = a.wall_time + b.wall_time
    merged.created = a.created or b.created
    return merged


def _fold(parts: Sequence[SearchReport], empty: SearchReport) -> SearchReport:
    report = empty
    for part in parts:
        report = merge_reports(report, part)
    return report


def _map(func, tasks: list, workers: int) -> list:
    if workers > 1 and len(tasks) > 1:
        with Pool(min(workers, len(tasks))) as pool:
            return pool.map(func, tasks)
    return [func(task) for task in tasks]


def _exhaustive_chunk(args) -> SearchReport:
    n, p, start, stop, top_k, dedup_permutations = args
    bias = Bias(p)
    report = SearchReport(n, p, EXHAUSTIVE, None, top_k, dedup_permutations)
    # Representatives of {f, -f}: even indices, i.e. f(0) = -1
    t = 2 * np.arange(start, stop, dtype=np.int64)
    bits = (t[:, None] >> np.arange(1 << n)) & 1
    if dedup_permutations:
        canonical = _canonical_mask(n, t, bits)
        report.dedup_saved += int(np.count_nonzero(~canonical))
        t, bits = t[canonical], bits[canonical]
    tables = (2 * bits - 1).astype(np.int8)
    constant = _constant_rows(tables)
    report.skipped_constant += int(np.count_nonzero(constant))
    tables = tables[~constant]
    report.evaluated += len(tables)
    if len(tables):
        entropy, sum_sq = score_tables(tables, n, bias)
        report.offer_batch(tables, entropy, sum_sq)
    return report


def exhaustive_search(n: int, bias: Bias, top_k: int = None, dedup_permutations: bool = False,
                      workers: int = 1, force_long: bool = False) -> SearchReport:
    """Score every non-constant table on n coordinates, one per negation pair"""
    if n < 1:
        raise ValueError(f'Exhaustive search needs n >= 1, got {n}')
    if n > Config.EXHAUSTIVE_MAX_N:
        if not force_long or n > Config.LONG_EXHAUSTIVE_MAX_N:
            raise TooLarge(f'Exhaustive search limited to n <= {Config.EXHAUSTIVE_MAX_N} '
                           f'(n <= {Config.LONG_EXHAUSTIVE_MAX_N} with the long-running flag), got n={n}')
        logger.warning(f"Exhaustive search at n={n} enumerates {1 << (1 << n)} tables; this will take a long time")

    started = time.perf_counter()
    representatives = 1 << ((1 << n) - 1)
    tasks = [(n, bias.p, start, min(start + CHUNK_SIZE, representatives), top_k, dedup_permutations)
             for start in range(0, representatives, CHUNK_SIZE)]
    logger.info(f"Exhaustive search n={n}, p={bias.p}: {representatives} representatives in {len(tasks)} chunks")

    report = _fold(_map(_exhaustive_chunk, tasks, workers),
                   SearchReport(n, bias.p, EXHAUSTIVE, None, top_k, dedup_permutations))
    report.dedup_saved += representatives
    report.wall_time = time.perf_counter() - started
    _log_result(report)
    return report


def _random_chunk(args) -> SearchReport:
    n, p, count, seed_seq, seed, top_k = args
    bias = Bias(p)
    report = SearchReport(n, p, RANDOM, seed, top_k)
    rng = np.random.default_rng(seed_seq)
    tables = (2 * rng.integers(0, 2, size=(count, 1 << n), dtype=np.int8) - 1).astype(np.int8)
    constant = _constant_rows(tables)
    report.skipped_constant += int(np.count_nonzero(constant))
    tables = tables[~constant]
    report.evaluated += len(tables)
    if len(tables):
        entropy, sum_sq = score_tables(tables, n, bias)
        report.offer_batch(tables, entropy, sum_sq)
    return report


def random_search(n: int, bias: Bias, samples: int, seed: int = None, top_k: int = None,
                  workers: int = 1) -> SearchReport:
    """Uniform random tables in fixed-size blocks seeded from SeedSequence(seed)"""
    if n < 1 or n > Config.RANDOM_SEARCH_MAX_N:
        raise TooLarge(f'Random search supports 1 <= n <= {Config.RANDOM_SEARCH_MAX_N}, got n={n}')
    samples = int(samples)
    if samples < 1:
        raise ValueError(f'samples must be >= 1, got {samples}')
    seed = Config.DEFAULT_SEED if seed is None else int(seed)

    started = time.perf_counter()
    block = max(1, RANDOM_BLOCK_ENTRIES >> n)
    counts = [block] * (samples // block)
    if samples % block:
        counts.append(samples % block)
    seeds = np.random.SeedSequence(seed).spawn(len(counts))
    tasks = [(n, bias.p, count, seq, seed, top_k) for count, seq in zip(counts, seeds)]
    logger.info(f"Random search n={n}, p={bias.p}: {samples} samples in {len(tasks)} blocks, seed={seed}")

    report = _fold(_map(_random_chunk, tasks, workers), SearchReport(n, bias.p, RANDOM, seed, top_k))
    report.wall_time = time.perf_counter() - started
    _log_result(report)
    return report


def local_refine(start: BooleanFunction, bias: Bias, budget: int, seed: int = None) -> ExtremalRecord:
    """
    Annealed single-entry flips from start

    Decreases are always accepted, increases with probability exp(-delta/T);
    T starts at a fraction of the start ratio and decays on every accepted
    move. The best record seen is returned, so the result is never worse
    than start and never constant.
    """
    if start.is_constant():
        raise ConstantStart(f'Cannot refine from the constant function {start.to_string()}')
    budget = int(budget)
    if budget < 0:
        raise ValueError(f'budget must be >= 0, got {budget}')
    rng = np.random.default_rng(Config.DEFAULT_SEED if seed is None else int(seed))
    n = start.n
    current = np.array(start.table, dtype=np.int8)
    best = score_function(start, bias)
    current_ratio = best.ratio
    temperature = Config.ANNEAL_TEMPERATURE_FACTOR * current_ratio

    for _ in range(budget):
        x = int(rng.integers(current.size))
        current[x] = -current[x]
        if np.all(current == current[0]):
            current[x] = -current[x]
            continue
        entropy, sum_sq = score_tables(current[None, :], n, bias)
        ratio = float(entropy[0] / sum_sq[0])
        delta = ratio - current_ratio
        if delta < 0 or (temperature > 0 and rng.random() < math.exp(-delta / temperature)):
            current_ratio = ratio
            temperature *= Config.ANNEAL_DECAY
            if ratio < best.ratio - IMPROVEMENT_TOL:
                best = _make_record(_tt_strings(current[None, :])[0], n, bias, entropy[0], sum_sq[0])
        else:
            current[x] = -current[x]

    logger.debug(f"Refined {start.to_string()} -> {best.tt} (ratio {best.ratio}) in {budget} steps")
    return best


def refine_search(start: BooleanFunction, bias: Bias, budget: int, seed: int = None,
                  top_k: int = None) -> SearchReport:
    """local_refine wrapped in a report holding the start and final records"""
    started = time.perf_counter()
    report = SearchReport(start.n, bias.p, REFINE, seed, top_k)
    best = local_refine(start, bias, budget, seed)
    report.offer([score_function(start, bias), best])
    report.evaluated = int(budget)
    report.wall_time = time.perf_counter() - started
    return report


class SweepReport:
    """One SearchReport per grid p, with the h(q) and q(1-q) reference curves"""

    def __init__(self, n: int, mode: str, seed: Optional[int], reports: List[SearchReport]):
        self.n = n
        self.mode = mode
        self.seed = seed
        self.reports = reports
        self.created = None

    @property
    def violations(self) -> List[ExtremalRecord]:
        return [record for report in self.reports for record in report.violations]

    def curve(self) -> List[dict]:
        rows = []
        for report in self.reports:
            bias = report.bias
            rows.append({
                'p': report.p,
                'h_q': bias.conjectured_constant,
                'proven_constant': bias.proven_constant,
                'min_ratio': report.min_ratio,
                'argmin_tt': report.best.tt if report.best else None,
                'evaluated': report.evaluated,
            })
        return rows

    def to_dict(self, timing: bool = False) -> dict:
        return {
            'mode': self.mode,
            'created': self.created,
            'n': self.n,
            'seed': self.seed,
            'curve': self.curve(),
            'reports': [report.to_dict(timing) for report in self.reports],
        }


def p_sweep(n: int, p_grid: Sequence[float] = None, mode: str = EXHAUSTIVE, samples: int = None,
            seed: int = None, top_k: int = None, workers: int = 1, dedup_permutations: bool = False,
            force_long: bool = False) -> SweepReport:
    """Run the chosen search at every grid p"""
    biases = bias_grid(Config.DEFAULT_P_GRID if p_grid is None else p_grid)
    if mode == EXHAUSTIVE:
        reports = [exhaustive_search(n, bias, top_k, dedup_permutations, workers, force_long) for bias in biases]
    elif mode == RANDOM:
        if samples is None:
            raise ValueError('Random sweep needs a sample count')
        reports = [random_search(n, bias, samples, seed, top_k, workers) for bias in biases]
    else:
        raise ValueError(f'Sweep mode must be {EXHAUSTIVE!r} or {RANDOM!r}, got {mode!r}')
    return SweepReport(n, mode, seed if mode == RANDOM else None, reports)


def _log_result(report: SearchReport):
    best = report.best
    if best is None:
        logger.info(f"Search n={report.n}, p={report.p}: no non-constant functions evaluated")
        return
    logger.info(f"Search n={report.n}, p={report.p}: min ratio {best.ratio:.12g} at {best.tt} "
                f"(h(q) = {report.bias.conjectured_constant:.12g}, evaluated {report.evaluated})")
    if report.violations:
        logger.warning(f"{len(report.violations)} conjecture violators found at n={report.n}, p={report.p}")
