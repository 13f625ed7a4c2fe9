"""
Restrictions, restricted spectra and the epsilon-moment pipeline

Restricting f to the alive set J with assignment z on J^c and transforming
over J is the same as running the butterfly only over the bits of J; the
resulting 2^n array holds f^_{J^c->z}(T) at index z|T. Every expectation over
z is an exact weighted sum over that array (no sampling).
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core import Bias, BooleanFunction, check_mask, check_n, coordinates_of, full_mask, popcount
from errors import (AssignmentOverlapsAlive, BadChain, EpsOutOfRange, SizeMismatch,
                    StepOutOfRange, TooLargeForLedger)
from quantities import cross_correlation, xlogx
from transform import Spectrum, butterfly, forward_transform

logger = logging.getLogger(__name__)

# Moment parameter range [0, 1/2)
EPS_MAX = 0.5


class Restriction:
    """Alive set J (subset mask) and an assignment z supported on J^c"""

    __slots__ = ('_n', '_alive', '_assignment')

    def __init__(self, n: int, alive: int, assignment: int = 0):
        n = check_n(n)
        alive = check_mask(alive, n)
        assignment = check_mask(assignment, n)
        if assignment & alive:
            raise AssignmentOverlapsAlive(
                f'Assignment {assignment:#b} sets alive coordinates {coordinates_of(assignment & alive)}')
        self._n = n
        self._alive = alive
        self._assignment = assignment

    @property
    def n(self) -> int:
        return self._n

    @property
    def alive(self) -> int:
        return self._alive

    @property
    def assignment(self) -> int:
        return self._assignment

    @property
    def restricted(self) -> int:
        """J^c"""
        return full_mask(self._n) & ~self._alive

    def __repr__(self):
        return f'<Restriction J={coordinates_of(self._alive)} z={self._assignment:#b}>'


class Chain:
    """Permutation of 1..n; J_k holds its first k entries"""

    __slots__ = ('_order',)

    def __init__(self, order: Sequence[int]):
        try:
            order = tuple(int(k) for k in order)
        except (TypeError, ValueError):
            raise BadChain(f'Chain must be a sequence of integers, got {order!r}')
        if sorted(order) != list(range(1, len(order) + 1)):
            raise BadChain(f'Chain {order} is not a permutation of 1..{len(order)}')
        self._order = order

    @classmethod
    def identity(cls, n: int) -> 'Chain':
        return cls(range(1, n + 1))

    @classmethod
    def parse(cls, text: str, n: int = None) -> 'Chain':
        """Comma-separated permutation, e.g. '3,1,2'"""
        try:
            order = [int(part) for part in str(text).split(',') if part.strip()]
        except ValueError:
            raise BadChain(f'Chain {text!r} must be comma-separated integers')
        chain = cls(order)
        if n is not None and chain.n != n:
            raise BadChain(f'Chain {text!r} has {chain.n} entries, expected {n}')
        return chain

    @classmethod
    def shuffled(cls, n: int, seed: int) -> 'Chain':
        """Uniformly random chain drawn from default_rng(seed)"""
        return cls(np.random.default_rng(seed).permutation(n) + 1)

    @property
    def n(self) -> int:
        return len(self._order)

    @property
    def order(self) -> Tuple[int, ...]:
        return self._order

    def coordinate(self, k: int) -> int:
        """Coordinate added at step k"""
        self._check_step(k)
        return self._order[k - 1]

    def prefix_mask(self, k: int) -> int:
        """Subset mask of J_k"""
        if k < 0 or k > self.n:
            raise StepOutOfRange(f'Chain step {k} outside 0..{self.n}')
        mask = 0
        for coordinate in self._order[:k]:
            mask |= 1 << (coordinate - 1)
        return mask

    def _check_step(self, k: int):
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1 or k > self.n:
            raise StepOutOfRange(f'Chain step {k!r} outside 1..{self.n}')

    def to_string(self) -> str:
        return ','.join(str(k) for k in self._order)

    def __eq__(self, other):
        return isinstance(other, Chain) and self._order == other._order

    def __hash__(self):
        return hash(self._order)

    def __repr__(self):
        return f'<Chain {self.to_string()}>'


@dataclass(frozen=True)
class MomentValue:
    alive: int
    eps: float
    value: float


@dataclass(frozen=True)
class IncrementValue:
    """Delta_k by difference of moments and by the two-point (Phi) form"""
    step: int
    coordinate: int
    eps: float
    direct: float
    two_point: float

    @property
    def value(self) -> float:
        return self.direct

    @property
    def residual(self) -> float:
        return abs(self.direct - self.two_point)


def _check_eps(eps) -> float:
    eps = float(eps)
    if not 0.0 <= eps < EPS_MAX:
        raise EpsOutOfRange(f'Moment parameter eps={eps} outside [0, {EPS_MAX})')
    return eps


def _check_same_n(f: BooleanFunction, n: int, what: str):
    if f.n != n:
        raise SizeMismatch(f'{what} is for n={n}, function has n={f.n}')


def restrict(f: BooleanFunction, r: Restriction) -> BooleanFunction:
    """
    f_{J^c->z} as a |J|-variable function

    Alive coordinates keep their relative order: the i-th smallest coordinate
    of J becomes coordinate i of the result.
    """
    _check_same_n(f, r.n, 'Restriction')
    positions = [k - 1 for k in coordinates_of(r.alive)]
    local = np.arange(1 << len(positions))
    index = np.full(local.shape, r.assignment, dtype=np.int64)
    for j, position in enumerate(positions):
        index |= ((local >> j) & 1) << position
    return BooleanFunction(len(positions), f.table[index])


def restricted_spectrum(spec: Spectrum, r: Restriction) -> Spectrum:
    """
    f^_{J^c->z}(T) = sum over S in J^c of f^(S + T) chi_S(z)

    Evaluated by collapsing each restricted coordinate of the coefficient
    tensor at its assigned value.
    """
    n = spec.n
    if r.n != n:
        raise SizeMismatch(f'Restriction is for n={r.n}, spectrum has n={n}')
    bias = spec.bias
    tensor = spec.coeffs.reshape((2,) * n)
    for b in range(n):
        if r.alive >> b & 1:
            continue
        axis = n - 1 - b
        chi = bias.chi(r.assignment >> b & 1)
        tensor = np.take(tensor, [0], axis=axis) + chi * np.take(tensor, [1], axis=axis)
    return Spectrum(popcount(r.alive), tensor.reshape(-1), bias)


def partial_transform(f: BooleanFunction, bias: Bias, alive: int) -> np.ndarray:
    """All restricted spectra at once: entry z|T holds f^_{J^c->z}(T)"""
    alive = check_mask(alive, f.n)
    bits = [b for b in range(f.n) if alive >> b & 1]
    return butterfly(f.as_float(), f.n, bias, bits)


def restriction_weights(bias: Bias, n: int, alive: int) -> np.ndarray:
    """Entry x holds mu_p of the J^c part of x"""
    weights = np.ones(1, dtype=np.float64)
    for b in range(n):
        if alive >> b & 1:
            weights = np.concatenate([weights, weights])
        else:
            weights = np.concatenate([weights * (1.0 - bias.p), weights * bias.p])
    return weights


def abs_power(values, eps: float) -> np.ndarray:
    """|x|^(2(1+eps)) as exp((1+eps) log x^2), 0 at x = 0"""
    x = np.asarray(values, dtype=np.float64)
    out = np.zeros_like(x)
    nonzero = x != 0.0
    out[nonzero] = np.exp((1.0 + eps) * np.log(x[nonzero] ** 2))
    return out


def raw_moment(f: BooleanFunction, bias: Bias, alive: int, eps: float) -> float:
    coeffs = partial_transform(f, bias, alive)
    weights = restriction_weights(bias, f.n, alive)
    return float(np.dot(weights, abs_power(coeffs, eps)))


def moment(f: BooleanFunction, bias: Bias, alive: int, eps: float) -> MomentValue:
    """M_{J,eps,p}(f) = sum over S in J of E_z |f^_{J^c->z}(S)|^(2(1+eps))"""
    eps = _check_eps(eps)
    alive = check_mask(alive, f.n)
    return MomentValue(alive, eps, raw_moment(f, bias, alive, eps))


def moment_derivative(f: BooleanFunction, bias: Bias, alive: int) -> float:
    """Analytic dM_J/d eps at eps = 0: sum of E_z[t log t] with t the squared coefficient"""
    alive = check_mask(alive, f.n)
    coeffs = partial_transform(f, bias, alive)
    weights = restriction_weights(bias, f.n, alive)
    return float(np.dot(weights, xlogx(coeffs * coeffs)))


def moment_finite_difference(f: BooleanFunction, bias: Bias, alive: int, step: float) -> float:
    """Central difference (M(step) - M(-step)) / 2 step"""
    alive = check_mask(alive, f.n)
    upper = raw_moment(f, bias, alive, step)
    lower = raw_moment(f, bias, alive, -step)
    return (upper - lower) / (2.0 * step)


def richardson_estimate(coarse: float, coarse_step: float, fine: float, fine_step: float) -> float:
    """Eliminate the step^2 error term from two central differences"""
    h1 = coarse_step * coarse_step
    h2 = fine_step * fine_step
    return (h1 * fine - h2 * coarse) / (h1 - h2)


def _phi(a, b, bias: Bias, eps: float) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return (abs_power(a, eps) + abs_power(b, eps)
            - bias.p * abs_power(a + bias.alpha * b, eps)
            - (1.0 - bias.p) * abs_power(a - bias.beta * b, eps))


def _as_result(values, a, b):
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(values)
    return values


def phi(a, b, bias: Bias, eps: float):
    """
    Two-point functional
    |a|^r + |b|^r - p |a + alpha b|^r - (1-p) |a - beta b|^r with r = 2(1+eps)
    """
    eps = _check_eps(eps)
    return _as_result(_phi(a, b, bias, eps), a, b)


def phi_derivative0(a, b, bias: Bias):
    """d/d eps of phi at eps = 0: a^2 log a^2 + b^2 log b^2 - p u log u - (1-p) v log v"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    u = (a + bias.alpha * b) ** 2
    v = (a - bias.beta * b) ** 2
    values = xlogx(a * a) + xlogx(b * b) - bias.p * xlogx(u) - (1.0 - bias.p) * xlogx(v)
    return _as_result(values, a, b)


def phi_bound(a, b):
    """-(a^2 + b^2) h(a^2 / (a^2 + b^2)), zero at (0, 0)"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a2 = a * a
    b2 = b * b
    values = xlogx(a2) + xlogx(b2) - xlogx(a2 + b2)
    return _as_result(values, a, b)


@dataclass
class StepPairs:
    """Restricted coefficient pairs (a, b) = (f^(S), f^(S + {k})) for one chain step"""
    step: int
    coordinate: int
    previous: int          # J_{k-1}
    current: int           # J_k
    indices: np.ndarray    # z'|S, coordinate bit clear
    a: np.ndarray
    b: np.ndarray
    weights: np.ndarray    # mu_p(z')
    coeffs: np.ndarray     # partial transform over J_k


def step_pairs(f: BooleanFunction, bias: Bias, chain: Chain, k: int) -> StepPairs:
    _check_same_n(f, chain.n, 'Chain')
    coordinate = chain.coordinate(k)
    current = chain.prefix_mask(k)
    bit = 1 << (coordinate - 1)
    coeffs = partial_transform(f, bias, current)
    weights = restriction_weights(bias, f.n, current)
    points = np.arange(f.size)
    low = points[(points & bit) == 0]
    return StepPairs(step=k, coordinate=coordinate, previous=current & ~bit, current=current,
                     indices=low, a=coeffs[low], b=coeffs[low | bit], weights=weights[low],
                     coeffs=coeffs)


def increment(f: BooleanFunction, bias: Bias, chain: Chain, k: int, eps: float) -> IncrementValue:
    """Delta_k = M_{J_k} - M_{J_(k-1)}, cross-checked against the Phi form"""
    eps = _check_eps(eps)
    _check_same_n(f, chain.n, 'Chain')
    chain.coordinate(k)
    direct = (raw_moment(f, bias, chain.prefix_mask(k), eps)
              - raw_moment(f, bias, chain.prefix_mask(k - 1), eps))
    pairs = step_pairs(f, bias, chain, k)
    two_point = float(np.dot(pairs.weights, _phi(pairs.a, pairs.b, bias, eps)))
    result = IncrementValue(step=k, coordinate=pairs.coordinate, eps=eps, direct=direct, two_point=two_point)
    if result.residual > 1e-9:
        logger.warning(f"Increment step {k} (eps={eps}): direct={direct!r} vs two-point form={two_point!r}")
    return result


def entropy_terms(f: BooleanFunction, bias: Bias, chain: Chain) -> List[float]:
    """-d/d eps Delta_k at eps = 0 for each step k"""
    terms = []
    for k in range(1, chain.n + 1):
        pairs = step_pairs(f, bias, chain, k)
        terms.append(-float(np.dot(pairs.weights, phi_derivative0(pairs.a, pairs.b, bias))))
    return terms


def entropy_via_moments(f: BooleanFunction, bias: Bias, chain: Chain) -> float:
    """Ent_p(f) as -sum_k d/d eps Delta_k at eps = 0"""
    _check_same_n(f, chain.n, 'Chain')
    return float(sum(entropy_terms(f, bias, chain)))


@dataclass
class LedgerStep:
    """
    One step of the lower-bound chain

    entropy_term      (i)   -d Delta_k / d eps at 0
    harmonic_term     (ii)  sum_S E[a^2 b^2 / (a^2 + b^2)]
    abs_product_term  (iii) (sum_S E|ab|)^2
    mean_product_term (iv)  (sum_S |E ab|)^2
    correlation_term  (v)   <f, d_k f>^2
    """
    step: int
    coordinate: int
    entropy_term: float
    harmonic_term: float
    abs_product_term: float
    mean_product_term: float
    correlation_term: float
    parseval_residual: float
    recursion_residual: float
    cross_term_residual: float

    def terms(self) -> List[float]:
        return [self.entropy_term, self.harmonic_term, self.abs_product_term,
                self.mean_product_term, self.correlation_term]

    def slacks(self) -> List[float]:
        terms = self.terms()
        return [terms[i] - terms[i + 1] for i in range(len(terms) - 1)]

    def is_monotone(self, tol: float = 1e-9) -> bool:
        return min(self.slacks()) >= -tol

    def to_dict(self) -> dict:
        return {
            'step': self.step,
            'coordinate': self.coordinate,
            'entropy_term': self.entropy_term,
            'harmonic_term': self.harmonic_term,
            'abs_product_term': self.abs_product_term,
            'mean_product_term': self.mean_product_term,
            'correlation_term': self.correlation_term,
            'slacks': self.slacks(),
            'parseval_residual': self.parseval_residual,
            'recursion_residual': self.recursion_residual,
            'cross_term_residual': self.cross_term_residual,
        }


@dataclass
class ProofLedger:
    chain: Chain
    p: float
    steps: List[LedgerStep] = field(default_factory=list)

    def totals(self) -> List[float]:
        return [float(sum(step.terms()[i] for step in self.steps)) for i in range(5)]

    def min_slack(self) -> float:
        slacks = [s for step in self.steps for s in step.slacks()]
        return min(slacks) if slacks else 0.0

    def is_monotone(self, tol: float = 1e-9) -> bool:
        return all(step.is_monotone(tol) for step in self.steps)

    def max_residual(self) -> float:
        residuals = [max(step.parseval_residual, step.recursion_residual, step.cross_term_residual)
                     for step in self.steps]
        return max(residuals) if residuals else 0.0

    def to_dict(self) -> dict:
        return {
            'chain': self.chain.to_string(),
            'p': self.p,
            'totals': self.totals(),
            'min_slack': self.min_slack(),
            'steps': [step.to_dict() for step in self.steps],
        }


def _grouped_sum(keys: np.ndarray, values: np.ndarray, size: int) -> np.ndarray:
    return np.bincount(keys, weights=values, minlength=size)


def proof_slack_report(f: BooleanFunction, bias: Bias, chain: Chain, max_n: Optional[int] = None) -> ProofLedger:
    """Per-step ledger of the chain (i) >= (ii) >= (iii) >= (iv) >= (v) plus the step identities"""
    _check_same_n(f, chain.n, 'Chain')
    if max_n is not None and f.n > max_n:
        raise TooLargeForLedger(f'Proof ledger limited to n <= {max_n}, got n={f.n}')
    n = f.n
    size = f.size
    spectrum = forward_transform(f, bias)
    ledger = ProofLedger(chain=chain, p=bias.p)

    for k in range(1, n + 1):
        pairs = step_pairs(f, bias, chain, k)
        a, b, w = pairs.a, pairs.b, pairs.weights
        a2 = a * a
        b2 = b * b
        total = a2 + b2
        bit = 1 << (pairs.coordinate - 1)

        entropy_term = -float(np.dot(w, phi_derivative0(a, b, bias)))
        harmonic = np.divide(a2 * b2, total, out=np.zeros_like(total), where=total > 0)
        harmonic_term = float(np.dot(w, harmonic))
        abs_product_term = float(np.dot(w, np.abs(a * b))) ** 2

        subset_keys = pairs.indices & pairs.previous
        mean_products = _grouped_sum(subset_keys, w * a * b, size)
        mean_product_term = float(np.abs(mean_products).sum()) ** 2
        correlation_term = cross_correlation(spectrum, pairs.coordinate) ** 2

        # E_z'[a b] per S against sum over T in J_k^c of f^(S+T) f^(S+T+{k})
        coeffs = spectrum.coeffs
        spectral_products = _grouped_sum(subset_keys, coeffs[pairs.indices] * coeffs[pairs.indices | bit], size)
        cross_term_residual = float(np.max(np.abs(mean_products - spectral_products)))

        # sum over S of (a^2 + b^2) is 1 for every z'
        assignment_keys = pairs.indices & (full_mask(n) & ~pairs.current)
        per_assignment = _grouped_sum(assignment_keys, total, size)
        present = np.unique(assignment_keys)
        parseval_residual = float(np.max(np.abs(per_assignment[present] - 1.0)))

        # f^_{J_(k-1)^c -> z}(S) = a + chi_k(z_k) b
        previous = partial_transform(f, bias, pairs.previous)
        recursion_residual = float(max(
            np.max(np.abs(previous[pairs.indices] - (a - bias.beta * b))),
            np.max(np.abs(previous[pairs.indices | bit] - (a + bias.alpha * b))),
        ))

        ledger.steps.append(LedgerStep(
            step=k,
            coordinate=pairs.coordinate,
            entropy_term=entropy_term,
            harmonic_term=harmonic_term,
            abs_product_term=abs_product_term,
            mean_product_term=mean_product_term,
            correlation_term=correlation_term,
            parseval_residual=parseval_residual,
            recursion_residual=recursion_residual,
            cross_term_residual=cross_term_residual,
        ))

    return ledger
