"""
Shared pytest fixtures
"""
import math
import os
import sys

import numpy as np
import pytest

# Add current directory to path to import the flat modules
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core import Bias, BooleanFunction  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long-running acceptance checks (deselect with -m "not slow")')


def h(theta):
    """Binary entropy in nats for expected values"""
    if theta <= 0 or theta >= 1:
        return 0.0
    return -theta * math.log(theta) - (1 - theta) * math.log(1 - theta)


def all_functions(n):
    return [BooleanFunction.from_index(n, t) for t in range(1 << (1 << n))]


def random_function(n, rng):
    return BooleanFunction(n, 2 * rng.integers(0, 2, size=1 << n) - 1)


@pytest.fixture
def bias03():
    return Bias(0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def app():
    from app import create_app
    from database import db

    application = create_app({'SQLALCHEMY_DATABASE_URI': 'sqlite://', 'TESTING': True}, start_jobs=False)
    yield application
    with application.app_context():
        db.session.remove()
        db.drop_all()


@pytest.fixture
def client(app):
    return app.test_client()
