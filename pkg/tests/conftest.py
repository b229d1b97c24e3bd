from fractions import Fraction as F

import pytest

from nucad.polynomials import VarOrder


@pytest.fixture
def xy():
    """Two-variable order used by most geometric fixtures."""
    return VarOrder(["x1", "x2"])


@pytest.fixture
def ex_curves(xy):
    """The sextic/circles/line/axis quintet used across solver tests.

    p1 = -(3/500)(x1^2-4)(x1^2-9)(x1^2-16) - x2
    p2 = (x1+5/2)^2 + (x2-3/2)^2 - 1/4
    p3 = (x1-5/2)^2 + (x2-3/2)^2 - 1/4
    p4 = x2 - 5/2
    p5 = x1
    """
    x1, x2 = xy.var(1), xy.var(2)
    p1 = (x1 * x1 - 4) * (x1 * x1 - 9) * (x1 * x1 - 16) * F(-3, 500) - x2
    p2 = (x1 + F(5, 2)) ** 2 + (x2 - F(3, 2)) ** 2 - F(1, 4)
    p3 = (x1 - F(5, 2)) ** 2 + (x2 - F(3, 2)) ** 2 - F(1, 4)
    p4 = x2 - F(5, 2)
    p5 = x1
    return p1, p2, p3, p4, p5


@pytest.fixture
def unit_cell_polys(xy):
    """Line/circle/line triple with sample (1/8, -3/4): two parallel lines cut a circle."""
    x1, x2 = xy.var(1), xy.var(2)
    q1 = F(1, 2) * x1 + F(1, 2) - x2
    q2 = x1 * x1 + x2 * x2 - 1
    q3 = F(1, 2) * x1 - F(1, 2) - x2
    return q1, q2, q3
