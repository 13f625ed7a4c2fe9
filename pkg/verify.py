"""
Batch checks of the entropy/influence identities and inequalities

Every check produces a CheckResult; run_suite streams a function source over
a p-grid, partitions the stream across worker processes and folds the
partial VerificationReports with merge_verification_reports.
"""
import logging
import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np

from config import Config
from core import Bias, BooleanFunction, bias_grid, coordinates_of, full_mask, parse_truth_table
from errors import BadTable, ConfigMismatch, SourceUnavailable, TooLarge
from quantities import (cross_correlation, derivative_spectrum, derivative_table, fei_ratio, biased_fei_ratio,
                        influences, influences_spectral, min_entropy, noise_stability, noise_stability_mc,
                        spectral_entropy, support_size, total_influence)
from restriction import (Chain, abs_power, entropy_via_moments, increment, moment, raw_moment,
                         moment_finite_difference, partial_transform, phi_bound, phi_derivative0,
                         proof_slack_report, restriction_weights, richardson_estimate, step_pairs)
from transform import butterfly, forward_transform, inner_product, inverse_transform

logger = logging.getLogger(__name__)

INEQUALITY = 'inequality'
IDENTITY = 'identity'

# Report order; 'conjecture' is the only non-blocking check
CHECK_NAMES = (
    'theorem',
    'conjecture',
    'support_corollary',
    'support_chain',
    'transform_roundtrip',
    'parseval',
    'influence_spectral',
    'cross_correlation',
    'cross_correlation_influence',
    'derivative_spectrum',
    'restricted_spectrum',
    'restriction_mean',
    'restricted_parseval',
    'cross_term',
    'recursion',
    'increment_two_point',
    'telescoping',
    'moment_endpoints',
    'entropy_via_moments',
    'entropy_finite_difference',
    'phi_derivative_bound',
    'ledger_monotone',
)
NON_BLOCKING = frozenset({'conjecture'})

TELESCOPING_EPS = (0.0, 0.05, 0.1, 0.2)
FD_STEPS = (1e-4, 1e-5)
FD_TOLERANCE = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    function_id: str
    p: float
    left: float
    right: float
    slack: float
    passed: bool
    tolerance: float
    kind: str = INEQUALITY

    @property
    def margin(self) -> float:
        """Signed distance from failure: slack for inequalities, -|slack| for identities"""
        return self.slack if self.kind == INEQUALITY else -abs(self.slack)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'function': self.function_id,
            'p': self.p,
            'left': self.left,
            'right': self.right,
            'slack': self.slack,
            'passed': self.passed,
            'tolerance': self.tolerance,
            'kind': self.kind,
        }


def _inequality(name: str, f: BooleanFunction, bias: Bias, left: float, right: float,
                tolerance: float) -> CheckResult:
    slack = float(left) - float(right)
    return CheckResult(name, f.to_string(), bias.p, float(left), float(right), slack,
                       slack >= -tolerance, tolerance, INEQUALITY)


def _identity(name: str, f: BooleanFunction, bias: Bias, left: float, right: float,
              tolerance: float) -> CheckResult:
    slack = float(left) - float(right)
    return CheckResult(name, f.to_string(), bias.p, float(left), float(right), slack,
                       abs(slack) <= tolerance, tolerance, IDENTITY)


def _residual(name: str, f: BooleanFunction, bias: Bias, residual: float, tolerance: float) -> CheckResult:
    """Identity recorded as max |lhs - rhs| against 0"""
    return _identity(name, f, bias, float(residual), 0.0, tolerance)


def _max_abs(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    return float(np.max(np.abs(values))) if values.size else 0.0


def sum_sq_influences(f: BooleanFunction, bias: Bias) -> float:
    return influences(f, bias).sum_of_squares


def check_theorem(f: BooleanFunction, bias: Bias, tolerance: float = None) -> CheckResult:
    """Ent_p(f) >= q(1-q) sum_k Inf_k^2"""
    tolerance = Config.INEQUALITY_TOLERANCE if tolerance is None else tolerance
    entropy = spectral_entropy(forward_transform(f, bias))
    return _inequality('theorem', f, bias, entropy, bias.proven_constant * sum_sq_influences(f, bias), tolerance)


def check_conjecture(f: BooleanFunction, bias: Bias, tolerance: float = None) -> CheckResult:
    """Ent_p(f) >= h(q) sum_k Inf_k^2; a failure is a finding"""
    tolerance = Config.INEQUALITY_TOLERANCE if tolerance is None else tolerance
    entropy = spectral_entropy(forward_transform(f, bias))
    return _inequality('conjecture', f, bias, entropy,
                       bias.conjectured_constant * sum_sq_influences(f, bias), tolerance)


def check_support_corollary(f: BooleanFunction, bias: Bias, tolerance: float = None) -> CheckResult:
    """|supp f^| >= exp(Ent_p(f))"""
    tolerance = Config.SUPPORT_TOLERANCE if tolerance is None else tolerance
    spec = forward_transform(f, bias)
    return _inequality('support_corollary', f, bias, support_size(spec), math.exp(spectral_entropy(spec)),
                       tolerance)


def check_support_chain(f: BooleanFunction, bias: Bias, tolerance: float = None) -> CheckResult:
    """exp(Ent) >= exp(q(1-q) sum Inf^2)"""
    tolerance = Config.SUPPORT_TOLERANCE if tolerance is None else tolerance
    entropy = spectral_entropy(forward_transform(f, bias))
    bound = bias.proven_constant * sum_sq_influences(f, bias)
    return _inequality('support_chain', f, bias, math.exp(entropy), math.exp(bound), tolerance)


def _restricted_identities(f: BooleanFunction, bias: Bias, coeffs: np.ndarray):
    """Max residuals of the restricted-coefficient formula, its mean and restricted Parseval over every J"""
    n = f.n
    points = np.arange(f.size)
    formula = mean = parseval = 0.0
    for alive in range(1 << n):
        restricted = full_mask(n) & ~alive
        table = partial_transform(f, bias, alive)
        # sum over S in J^c of f^(S+T) chi_S(z) is the inverse butterfly over J^c
        expanded = butterfly(coeffs, n, bias, [b for b in range(n) if restricted >> b & 1], inverse=True)
        formula = max(formula, _max_abs(expanded - table))

        weights = restriction_weights(bias, n, alive)
        means = np.bincount(points & alive, weights=weights * table, minlength=f.size)
        subsets = points[(points & restricted) == 0]
        mean = max(mean, _max_abs(means[subsets] - coeffs[subsets]))

        mass = np.bincount(points & restricted, weights=table * table, minlength=f.size)
        assignments = points[(points & alive) == 0]
        parseval = max(parseval, _max_abs(mass[assignments] - 1.0))
    return formula, mean, parseval


def check_identities(f: BooleanFunction, bias: Bias, chain: Chain = None,
                     tolerance: float = None) -> List[CheckResult]:
    """One CheckResult per bundled identity, plus the ledger and derivative-bound inequalities"""
    if f.n > Config.IDENTITY_MAX_N:
        raise TooLarge(f'Identity checks enumerate all restrictions; n={f.n} > {Config.IDENTITY_MAX_N}')
    tol = Config.IDENTITY_TOLERANCE if tolerance is None else tolerance
    chain = chain or Chain.identity(f.n)
    n = f.n
    spec = forward_transform(f, bias)
    coeffs = spec.coeffs
    values = f.as_float()
    entropy = spectral_entropy(spec)
    results = []

    results.append(_residual('transform_roundtrip', f, bias, _max_abs(inverse_transform(spec) - values), tol))
    results.append(_identity('parseval', f, bias, spec.mass, 1.0, tol))
    combinatorial = influences(f, bias).values
    results.append(_residual('influence_spectral', f, bias,
                             _max_abs(combinatorial - influences_spectral(spec).values), tol))

    correlation = derivative = shifted = 0.0
    for k in range(1, n + 1):
        pointwise = derivative_table(f, bias, k)
        spectral = cross_correlation(spec, k)
        correlation = max(correlation, abs(spectral - inner_product(values, pointwise, bias, n)))
        shifted = max(shifted, abs(spectral - 2.0 * bias.sigma * (2.0 * bias.p - 1.0) * combinatorial[k - 1]))
        derived = butterfly(pointwise, n, bias, range(n))
        derivative = max(derivative, _max_abs(derived - derivative_spectrum(spec, k).coeffs))
    results.append(_residual('cross_correlation', f, bias, correlation, tol))
    results.append(_residual('cross_correlation_influence', f, bias, shifted, tol))
    results.append(_residual('derivative_spectrum', f, bias, derivative, tol))

    formula, mean, parseval = _restricted_identities(f, bias, coeffs)
    results.append(_residual('restricted_spectrum', f, bias, formula, tol))
    results.append(_residual('restriction_mean', f, bias, mean, tol))
    results.append(_residual('restricted_parseval', f, bias, parseval, tol))

    ledger = proof_slack_report(f, bias, chain)
    results.append(_residual('cross_term', f, bias,
                             max((s.cross_term_residual for s in ledger.steps), default=0.0), tol))
    results.append(_residual('recursion', f, bias,
                             max((s.recursion_residual for s in ledger.steps), default=0.0), tol))

    two_point = telescoping = endpoints = 0.0
    for eps in TELESCOPING_EPS:
        increments = [increment(f, bias, chain, k, eps) for k in range(1, n + 1)]
        two_point = max([two_point] + [step.residual for step in increments])
        top = raw_moment(f, bias, full_mask(n), eps)
        telescoping = max(telescoping, abs(top - (sum(step.two_point for step in increments) + 1.0)))
        endpoints = max(endpoints, abs(raw_moment(f, bias, 0, eps) - 1.0),
                        abs(top - float(abs_power(coeffs, eps).sum())))
    results.append(_residual('increment_two_point', f, bias, two_point, tol))
    results.append(_residual('telescoping', f, bias, telescoping, tol))
    results.append(_residual('moment_endpoints', f, bias, endpoints, tol))

    results.append(_identity('entropy_via_moments', f, bias, entropy_via_moments(f, bias, chain), entropy, tol))

    full = full_mask(n)
    coarse = moment_finite_difference(f, bias, full, FD_STEPS[0])
    fine = moment_finite_difference(f, bias, full, FD_STEPS[1])
    extrapolated = -richardson_estimate(coarse, FD_STEPS[0], fine, FD_STEPS[1])
    results.append(_identity('entropy_finite_difference', f, bias, extrapolated, entropy, FD_TOLERANCE))

    bound_slack = 0.0
    for k in range(1, n + 1):
        pairs = step_pairs(f, bias, chain, k)
        gap = phi_bound(pairs.a, pairs.b) - phi_derivative0(pairs.a, pairs.b, bias)
        bound_slack = min(bound_slack, float(np.min(gap)) if gap.size else 0.0)
    results.append(_inequality('phi_derivative_bound', f, bias, bound_slack, 0.0, tol))
    results.append(_inequality('ledger_monotone', f, bias, ledger.min_slack(), 0.0, tol))
    return results


def analyze_function(f: BooleanFunction, bias: Bias, chain: Chain = None) -> dict:
    """Per-function report: entropies, influences, slacks and the moments cross-check"""
    chain = chain or Chain.identity(f.n)
    spec = forward_transform(f, bias)
    entropy = spectral_entropy(spec)
    infs = influences(f, bias)
    sum_sq = infs.sum_of_squares
    via_moments = entropy_via_moments(f, bias, chain)
    support = support_size(spec)
    return {
        'tt': f.to_string(),
        'n': f.n,
        'p': bias.p,
        'q': bias.q,
        'h_q': bias.conjectured_constant,
        'proven_constant': bias.proven_constant,
        'chain': chain.to_string(),
        'entropy': entropy,
        'influences': infs.to_list(),
        'total_influence': total_influence(spec),
        'sum_sq_influences': sum_sq,
        'min_entropy': min_entropy(spec),
        'support_size': support,
        'ratio': entropy / sum_sq if sum_sq > 0 else None,
        'fei_ratio': fei_ratio(spec),
        'biased_fei_ratio': biased_fei_ratio(spec),
        'theorem_slack': entropy - bias.proven_constant * sum_sq,
        'conjecture_slack': entropy - bias.conjectured_constant * sum_sq,
        'support_slack': support - math.exp(entropy),
        'entropy_via_moments': via_moments,
        'moments_delta': via_moments - entropy,
    }


def moments_report(f: BooleanFunction, bias: Bias, eps: float, chain: Chain = None, ledger: bool = True,
                   ledger_max_n: int = None) -> dict:
    """Moments along the chain, each increment, the telescoping residual and the proof ledger"""
    chain = chain or Chain.identity(f.n)
    ledger_max_n = Config.LEDGER_MAX_N if ledger_max_n is None else ledger_max_n
    moments = [moment(f, bias, chain.prefix_mask(k), eps) for k in range(f.n + 1)]
    increments = [increment(f, bias, chain, k, eps) for k in range(1, f.n + 1)]
    top = moments[-1].value
    telescoped = sum(step.two_point for step in increments) + moments[0].value
    return {
        'tt': f.to_string(),
        'n': f.n,
        'p': bias.p,
        'eps': moments[0].eps,
        'chain': chain.to_string(),
        'moments': [{'k': k, 'alive': coordinates_of(m.alive), 'value': m.value} for k, m in enumerate(moments)],
        'increments': [{'k': step.step, 'coordinate': step.coordinate, 'direct': step.direct,
                        'two_point': step.two_point, 'residual': step.residual} for step in increments],
        'telescoping_residual': abs(top - telescoped),
        'ledger': proof_slack_report(f, bias, chain, ledger_max_n).to_dict() if ledger else None,
    }


def stability_report(f: BooleanFunction, bias: Bias, eps: float, mc_samples: int = None, seed: int = None,
                     workers: int = 1) -> dict:
    """Spectral noise stability, optionally against its Monte Carlo estimate"""
    spectral = noise_stability(forward_transform(f, bias), eps)
    report = {
        'tt': f.to_string(),
        'n': f.n,
        'p': bias.p,
        'eps': float(eps),
        'spectral': spectral,
    }
    if mc_samples:
        seed = Config.DEFAULT_SEED if seed is None else seed
        estimate = noise_stability_mc(f, bias, eps, mc_samples, seed, workers)
        report.update({'mc': estimate, 'mc_samples': int(mc_samples), 'seed': seed,
                       'difference': estimate - spectral})
    return report


class FunctionSource:
    """Indexed stream of Boolean functions over a fixed n"""

    n = 0
    count = 0

    def describe(self) -> str:
        raise NotImplementedError

    def get(self, i: int) -> BooleanFunction:
        raise NotImplementedError

    def iter_range(self, start: int, stop: int) -> Iterator[BooleanFunction]:
        for i in range(start, min(stop, self.count)):
            yield self.get(i)

    def __iter__(self):
        return self.iter_range(0, self.count)


class ExhaustiveSource(FunctionSource):
    """All 2^(2^n) truth tables in index order"""

    def __init__(self, n: int):
        if n < 0 or n > Config.EXHAUSTIVE_MAX_N:
            raise TooLarge(f'Exhaustive source limited to n <= {Config.EXHAUSTIVE_MAX_N}, got n={n}')
        self.n = n
        self.count = 1 << (1 << n)

    def describe(self) -> str:
        return f'exhaustive({self.n})'

    def get(self, i: int) -> BooleanFunction:
        return BooleanFunction.from_index(self.n, i)


class FileSource(FunctionSource):
    """One truth table per line; '#' starts a comment"""

    def __init__(self, path: str):
        self.path = path
        try:
            with open(path, 'r') as handle:
                lines = handle.readlines()
        except OSError as e:
            raise SourceUnavailable(f'Cannot read function file {path}: {e}')

        self._functions = []
        for number, line in enumerate(lines, 1):
            text = line.split('#', 1)[0].strip()
            if not text:
                continue
            try:
                self._functions.append(parse_truth_table(text))
            except BadTable as e:
                raise SourceUnavailable(f'{path}:{number}: {e}')
        if not self._functions:
            raise SourceUnavailable(f'No truth tables in {path}')
        sizes = {f.n for f in self._functions}
        if len(sizes) > 1:
            raise SourceUnavailable(f'{path} mixes coordinate counts {sorted(sizes)}')
        self.n = sizes.pop()
        self.count = len(self._functions)

    def describe(self) -> str:
        return f'file({self.path})'

    def get(self, i: int) -> BooleanFunction:
        return self._functions[i]


class RandomSource(FunctionSource):
    """Uniform random tables; table i depends only on (seed, i)"""

    def __init__(self, n: int, count: int, seed: int = None):
        if n < 0 or n > Config.RANDOM_SEARCH_MAX_N:
            raise TooLarge(f'Random source limited to n <= {Config.RANDOM_SEARCH_MAX_N}, got n={n}')
        if count < 1:
            raise ValueError(f'count must be >= 1, got {count}')
        self.n = n
        self.count = int(count)
        self.seed = Config.DEFAULT_SEED if seed is None else int(seed)

    def describe(self) -> str:
        return f'random({self.n},{self.count},{self.seed})'

    def get(self, i: int) -> BooleanFunction:
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(i,)))
        bits = rng.integers(0, 2, size=1 << self.n, dtype=np.int8)
        return BooleanFunction(self.n, 2 * bits - 1)


class CheckAggregate:
    """count, failures and the worst margin with its (tt, p) witness"""

    __slots__ = ('name', 'count', 'failures', 'min_slack', 'argmin_tt', 'argmin_p')

    def __init__(self, name: str, count: int = 0, failures: int = 0, min_slack: float = None,
                 argmin_tt: str = None, argmin_p: float = None):
        self.name = name
        self.count = count
        self.failures = failures
        self.min_slack = min_slack
        self.argmin_tt = argmin_tt
        self.argmin_p = argmin_p

    def _key(self):
        return (self.min_slack, self.argmin_tt, self.argmin_p)

    def add(self, result: CheckResult):
        self.count += 1
        if not result.passed:
            self.failures += 1
        self._offer(result.margin, result.function_id, result.p)

    def _offer(self, slack, tt, p):
        if slack is None:
            return
        if self.min_slack is None or (slack, tt, p) < self._key():
            self.min_slack, self.argmin_tt, self.argmin_p = slack, tt, p

    def merge(self, other: 'CheckAggregate') -> 'CheckAggregate':
        merged = CheckAggregate(self.name, self.count + other.count, self.failures + other.failures,
                                self.min_slack, self.argmin_tt, self.argmin_p)
        merged._offer(other.min_slack, other.argmin_tt, other.argmin_p)
        return merged

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'count': self.count,
            'failures': self.failures,
            'min_slack': self.min_slack,
            'argmin_tt': self.argmin_tt,
            'argmin_p': self.argmin_p,
        }


class RatioAggregate:
    """Min Ent / sum Inf^2 over non-constant functions at one p"""

    __slots__ = ('p', 'count', 'min_ratio', 'argmin_tt')

    def __init__(self, p: float, count: int = 0, min_ratio: float = None, argmin_tt: str = None):
        self.p = p
        self.count = count
        self.min_ratio = min_ratio
        self.argmin_tt = argmin_tt

    def offer(self, ratio: Optional[float], tt: Optional[str], count: int = 1):
        self.count += count
        if ratio is None:
            return
        if self.min_ratio is None or (ratio, tt) < (self.min_ratio, self.argmin_tt):
            self.min_ratio, self.argmin_tt = ratio, tt

    def merge(self, other: 'RatioAggregate') -> 'RatioAggregate':
        merged = RatioAggregate(self.p, self.count, self.min_ratio, self.argmin_tt)
        merged.offer(other.min_ratio, other.argmin_tt, other.count)
        return merged

    def to_dict(self) -> dict:
        bias = Bias(self.p)
        return {
            'p': self.p,
            'count': self.count,
            'min_ratio': self.min_ratio,
            'argmin_tt': self.argmin_tt,
            'h_q': bias.conjectured_constant,
            'proven_constant': bias.proven_constant,
        }


class VerificationReport:
    """Aggregated suite results; merge is associative and commutative"""

    def __init__(self, suite: str, n: int, p_grid: Sequence[float], seed: Optional[int], chain: str,
                 tolerances: Dict[str, float] = None, created: str = None):
        self.suite = suite
        self.n = n
        self.p_grid = tuple(dict.fromkeys(float(p) for p in p_grid))
        self.seed = seed
        self.chain = chain
        self.tolerances = dict(tolerances or default_tolerances())
        self.created = created
        self.functions = 0
        self.checks: Dict[str, CheckAggregate] = {name: CheckAggregate(name) for name in CHECK_NAMES}
        self.ratios: Dict[float, RatioAggregate] = {p: RatioAggregate(p) for p in self.p_grid}

    def _config(self):
        return (self.suite, self.n, self.p_grid, self.seed, self.chain, tuple(sorted(self.tolerances.items())))

    def add(self, result: CheckResult):
        if result.name not in self.checks:
            self.checks[result.name] = CheckAggregate(result.name)
        self.checks[result.name].add(result)

    def add_ratio(self, p: float, tt: str, ratio: float):
        self.ratios[p].offer(ratio, tt)

    def blocking_failures(self) -> Dict[str, int]:
        return {name: agg.failures for name, agg in self.checks.items()
                if agg.failures and name not in NON_BLOCKING}

    @property
    def passed(self) -> bool:
        return not self.blocking_failures()

    @property
    def conjecture_failures(self) -> int:
        return self.checks['conjecture'].failures

    def merge(self, other: 'VerificationReport') -> 'VerificationReport':
        return merge_verification_reports(self, other)

    def to_dict(self) -> dict:
        return {
            'suite': self.suite,
            'created': self.created,
            'params': {
                'n': self.n,
                'p_grid': list(self.p_grid),
                'tolerances': self.tolerances,
                'seed': self.seed,
                'chain': self.chain,
            },
            'passed': self.passed,
            'functions': self.functions,
            'checks': [self.checks[name].to_dict() for name in self._ordered_names()],
            'ratios': [self.ratios[p].to_dict() for p in self.p_grid],
        }

    def _ordered_names(self) -> List[str]:
        extra = sorted(name for name in self.checks if name not in CHECK_NAMES)
        return list(CHECK_NAMES) + extra


def default_tolerances() -> Dict[str, float]:
    return {
        'identity': Config.IDENTITY_TOLERANCE,
        'inequality': Config.INEQUALITY_TOLERANCE,
        'support': Config.SUPPORT_TOLERANCE,
        'finite_difference': FD_TOLERANCE,
    }


def merge_verification_reports(a: VerificationReport, b: VerificationReport) -> VerificationReport:
    if a._config() != b._config():
        raise ConfigMismatch(f'Cannot merge reports for {a.suite} and {b.suite} with different parameters')
    merged = VerificationReport(a.suite, a.n, a.p_grid, a.seed, a.chain, a.tolerances, a.created or b.created)
    merged.functions = a.functions + b.functions
    for name in set(a.checks) | set(b.checks):
        left = a.checks.get(name, CheckAggregate(name))
        right = b.checks.get(name, CheckAggregate(name))
        merged.checks[name] = left.merge(right)
    for p in merged.p_grid:
        merged.ratios[p] = a.ratios[p].merge(b.ratios[p])
    return merged


def _evaluate(report: VerificationReport, f: BooleanFunction, biases: List[Bias], chain: Chain):
    tol = report.tolerances
    report.functions += 1
    for bias in biases:
        report.add(check_theorem(f, bias, tol['inequality']))
        report.add(check_conjecture(f, bias, tol['inequality']))
        report.add(check_support_corollary(f, bias, tol['support']))
        report.add(check_support_chain(f, bias, tol['support']))
        for result in check_identities(f, bias, chain, tol['identity']):
            report.add(result)

        sum_sq = sum_sq_influences(f, bias)
        if sum_sq > 0:
            entropy = spectral_entropy(forward_transform(f, bias))
            report.add_ratio(bias.p, f.to_string(), entropy / sum_sq)


def _run_chunk(args) -> VerificationReport:
    source, start, stop, p_grid, chain_order, seed, tolerances = args
    chain = Chain(chain_order)
    report = VerificationReport(source.describe(), source.n, p_grid, seed, chain.to_string(), tolerances)
    biases = [Bias(p) for p in p_grid]
    for f in source.iter_range(start, stop):
        _evaluate(report, f, biases, chain)
    logger.debug(f"Verified functions {start}..{stop} of {source.describe()}")
    return report


def _chunks(count: int, workers: int) -> List[tuple]:
    parts = max(1, min(count, workers * 4))
    bounds = [count * i // parts for i in range(parts + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i] < bounds[i + 1]]


def run_suite(source: FunctionSource, p_grid: Sequence[float] = None, chain: Chain = None, seed: int = None,
              workers: int = 1, tolerances: Dict[str, float] = None, created: str = None) -> VerificationReport:
    """Run every check over source x p_grid and fold the results"""
    biases = bias_grid(Config.DEFAULT_P_GRID if p_grid is None else p_grid)
    p_grid = tuple(b.p for b in biases)
    chain = chain or Chain.identity(source.n)
    if chain.n != source.n:
        raise ConfigMismatch(f'Chain {chain.to_string()} does not match n={source.n}')
    if source.n > Config.IDENTITY_MAX_N:
        raise TooLarge(f'Suite limited to n <= {Config.IDENTITY_MAX_N}, got n={source.n}')
    tolerances = dict(tolerances or default_tolerances())
    if seed is None:
        seed = getattr(source, 'seed', None)

    logger.info(f"Running suite {source.describe()}: {source.count} functions x {len(biases)} biases, "
                f"workers={workers}")
    tasks = [(source, start, stop, tuple(b.p for b in biases), chain.order, seed, tolerances)
             for start, stop in _chunks(source.count, workers)]

    if workers > 1 and len(tasks) > 1:
        with Pool(min(workers, len(tasks))) as pool:
            partials = pool.map(_run_chunk, tasks)
    else:
        partials = [_run_chunk(task) for task in tasks]

    report = VerificationReport(source.describe(), source.n, p_grid, seed, chain.to_string(), tolerances)
    for partial in partials:
        report = merge_verification_reports(report, partial)
    report.created = created

    failures = report.blocking_failures()
    if failures:
        logger.error(f"Suite {report.suite} has blocking failures: {failures}")
    elif report.conjecture_failures:
        logger.warning(f"Suite {report.suite}: {report.conjecture_failures} conjecture violations recorded")
    else:
        logger.info(f"Suite {report.suite} passed ({report.functions} functions)")
    return report
