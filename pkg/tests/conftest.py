import random
from fractions import Fraction

import pytest

from weylred.rational import QQi
from weylred.symbols import PolySymbol, VectorField


def random_symbol(rng: random.Random, n: int, degree: int, xi_free=False) -> PolySymbol:
    """Small random polynomial with integer coefficients in [-3, 3]."""
    terms = {}
    for _ in range(rng.randint(2, 6)):
        d = rng.randint(0, degree)
        xe = [0] * n
        xie = [0] * n
        for _ in range(d):
            a = rng.randrange(n)
            if xi_free or rng.random() < 0.5:
                xe[a] += 1
            else:
                xie[a] += 1
        c = rng.randint(-3, 3)
        if c == 0:
            c = 1
        key = (0, tuple(xe), tuple(xie))
        terms[key] = terms.get(key, QQi()) + QQi(Fraction(c))
    return PolySymbol(n, terms)


def random_vector_field(rng: random.Random, n: int, degree: int) -> VectorField:
    return VectorField(
        n, tuple(random_symbol(rng, n, degree, xi_free=True) for _ in range(n))
    )


@pytest.fixture
def rng():
    return random.Random(20240817)
