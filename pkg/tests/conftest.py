import math

import mpmath as mp
import pytest

S3 = math.sqrt(3.0)


def mp_D1(x, l_star, L_star, dps=50):
    """Textbook case I determinant with prefactor 1/(x^2 (1-x)), extended precision."""
    with mp.workdps(dps):
        x, l, L = mp.mpf(x), mp.mpf(l_star), mp.mpf(L_star)
        r = mp.sqrt(1 - x * x)
        a = 2 / mp.sqrt(3) * r
        z = mp.exp(L * r)
        m = mp.matrix(
            [
                [x * x, a * (z - 1) - (z + 1), 2 * x * x / mp.sqrt(3)],
                [1, -(z + 1), -2 * x * mp.cot(l * x)],
                [l * (1 - x * x) - L * x * x, 2 * (z - 1) / r, -2],
            ]
        )
        return mp.det(m) / (x * x * (1 - x))


def mp_D2(x, l_star, L_star, dps=50):
    """Textbook case II determinant with prefactor 1/x^2, extended precision."""
    with mp.workdps(dps):
        x, l, L = mp.mpf(x), mp.mpf(l_star), mp.mpf(L_star)
        p = mp.sqrt(1 + x * x)
        a = 2 / mp.sqrt(3) * p
        z = mp.exp(L * p)
        E = mp.exp(2 * x * l)
        m = mp.matrix(
            [
                [x * x, a * (z - 1) - (z + 1), -2 / mp.sqrt(3) * x * (E - 1)],
                [1, z + 1, 2 * (E + 1)],
                [L * x * x + l * (x * x + 1), -2 * (z - 1) / p, 2 / x * (E - 1)],
            ]
        )
        return mp.det(m) / (x * x)


@pytest.fixture
def mpD1():
    return mp_D1


@pytest.fixture
def mpD2():
    return mp_D2
