import random
from fractions import Fraction

import pytest

from adic.catalog import builtin_diagram
from adic.diagrams import enumerate_paths
from adic.martingale import CylinderFunction, constant_function


@pytest.fixture(scope="session")
def odo2():
    return builtin_diagram("odo2")


@pytest.fixture(scope="session")
def odo3():
    return builtin_diagram("odo3")


@pytest.fixture(scope="session")
def fib():
    return builtin_diagram("fib")


@pytest.fixture(scope="session")
def pisot31():
    return builtin_diagram("pisot31")


def rng(seed):
    return random.Random(seed)


def rand_function(r, diagram, level, den=4, lo=-8, hi=8):
    if level == 0:
        return constant_function(diagram, Fraction(r.randint(lo, hi), den), 0)
    vals = {p.edges: Fraction(r.randint(lo, hi), den)
            for p in enumerate_paths(diagram, 0, level)}
    return CylinderFunction(level=level, values=vals)
