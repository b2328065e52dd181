import os
import random

import pytest
from hypothesis import settings

from epimu.generators import random_mas
from epimu.mas import load_mas

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models")

ACCEPTANCE_LINES = []


def model_path(name):
    return os.path.join(MODELS, name)


@pytest.fixture
def fig1():
    return load_mas(model_path("fig1.mas"))


@pytest.fixture
def fig2a():
    return load_mas(model_path("fig2a.mas"))


def mas_from_seed(seed, **kw):
    return random_mas(random.Random(seed), **kw)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
