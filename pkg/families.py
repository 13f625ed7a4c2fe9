"""
Named Boolean function families

Conventions follow core: a table entry is +1 where the function is true.
dictator(n, k) is +1 exactly when x_k = 1; parity is the product of the
dictators it contains.
"""
import logging
from typing import Iterable, Optional

import numpy as np

from core import BooleanFunction, check_n, coordinates_of, mask_from_coordinates
from errors import BadTable, CoordinateOutOfRange

logger = logging.getLogger(__name__)


def _points(n: int) -> np.ndarray:
    return np.arange(1 << check_n(n))


def _signs(truth: np.ndarray) -> np.ndarray:
    return np.where(truth, 1, -1).astype(np.int8)


def _bit(points: np.ndarray, k: int) -> np.ndarray:
    return (points >> (k - 1)) & 1


def dictator(n: int, k: int = 1) -> BooleanFunction:
    if k < 1 or k > n:
        raise CoordinateOutOfRange(f'Dictator coordinate {k} outside 1..{n}')
    return BooleanFunction(n, _signs(_bit(_points(n), k) == 1))


def parity(n: int, coordinates: Optional[Iterable[int]] = None) -> BooleanFunction:
    """Product of the dictators on the given coordinates (all of [n] by default)"""
    coords = list(range(1, n + 1)) if coordinates is None else sorted(set(coordinates))
    mask = mask_from_coordinates(coords)
    if mask >> n:
        raise CoordinateOutOfRange(f'Parity coordinates {coords} outside 1..{n}')
    points = _points(n)
    zeros = np.zeros_like(points)
    for k in coordinates_of(mask):
        zeros += 1 - _bit(points, k)
    return BooleanFunction(n, _signs(zeros % 2 == 0))


def and_function(n: int) -> BooleanFunction:
    points = _points(n)
    return BooleanFunction(n, _signs(points == (1 << n) - 1))


def or_function(n: int) -> BooleanFunction:
    points = _points(n)
    return BooleanFunction(n, _signs(points != 0))


def majority(n: int) -> BooleanFunction:
    if n % 2 == 0:
        raise BadTable(f'Majority needs an odd number of coordinates, got {n}')
    points = _points(n)
    weights = np.zeros_like(points)
    for k in range(1, n + 1):
        weights += _bit(points, k)
    return BooleanFunction(n, _signs(2 * weights > n))


def tribes(n: int, width: int) -> BooleanFunction:
    """OR of ANDs over consecutive blocks of `width` coordinates"""
    if width < 1 or n % width:
        raise BadTable(f'Tribes width {width} does not divide n={n}')
    points = _points(n)
    truth = np.zeros(points.shape, dtype=bool)
    for start in range(0, n, width):
        block = ((1 << width) - 1) << start
        truth |= (points & block) == block
    return BooleanFunction(n, _signs(truth))


def constant(n: int, value: int = 1) -> BooleanFunction:
    if value not in (1, -1):
        raise BadTable(f'Constant value must be +1 or -1, got {value}')
    return BooleanFunction(n, np.full(1 << check_n(n), value, dtype=np.int8))


def parse_family(text: str) -> BooleanFunction:
    """
    Build a family member from 'name:n[:arg]'

    dictator:3:2, parity:4, parity:4:1,3, and:2, or:3, majority:5,
    tribes:6:3, constant:2:-1
    """
    parts = str(text).strip().split(':')
    name = parts[0].lower()
    try:
        n = int(parts[1])
        arg = parts[2] if len(parts) > 2 else None
        if name == 'dictator':
            return dictator(n, int(arg) if arg else 1)
        if name == 'parity':
            return parity(n, [int(k) for k in arg.split(',')] if arg else None)
        if name == 'and':
            return and_function(n)
        if name == 'or':
            return or_function(n)
        if name == 'majority':
            return majority(n)
        if name == 'tribes':
            return tribes(n, int(arg) if arg else 2)
        if name == 'constant':
            return constant(n, int(arg) if arg else 1)
    except (IndexError, ValueError) as e:
        if isinstance(e, (BadTable, CoordinateOutOfRange)):
            raise
        raise BadTable(f'Malformed family {text!r}: {e}')
    raise BadTable(f'Unknown family {name!r}')
