import importlib.resources

import numpy as np
import pytest

from fuzzybayes.bnet import Cpt, NetworkStructure
from fuzzybayes.core import DEFAULT_SCALE, GradeDistribution


def data_file(name: str) -> str:
    return str(importlib.resources.files("fuzzybayes.data").joinpath(name))


@pytest.fixture
def net():
    return NetworkStructure.default()


@pytest.fixture
def uniform_prior():
    return GradeDistribution.uniform(DEFAULT_SCALE)


def random_cpt(rng, net, concentration=1.0) -> Cpt:
    table = rng.dirichlet(np.full(net.output.arity, concentration), size=int(np.prod([s.arity for s in net.parent_scales])))
    return Cpt(net.parent_scales, net.output, table)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
