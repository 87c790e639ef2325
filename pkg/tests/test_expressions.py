import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvimg.expressions import ExpressionError, compile_density


def circle(t):
    t = np.atleast_1d(t)
    return np.column_stack([np.cos(t), np.sin(t)])


@pytest.mark.parametrize("text,expected", [
    ("1", lambda t: 1.0),
    ("1 + 0.5*cos(2*theta)", lambda t: 1 + 0.5 * math.cos(2 * t)),
    ("exp(sin(theta))^2", lambda t: math.exp(math.sin(t)) ** 2),
    ("2**-1 * (3 - theta/pi)", lambda t: 0.5 * (3 - t / math.pi)),
    ("-cos(theta) + 2", lambda t: 2 - math.cos(t)),
])
def test_planar(text, expected):
    f = compile_density(text, 2)
    for t in (0.1, 1.3, -2.0):
        assert f(circle(t))[0] == pytest.approx(expected(t), rel=1e-14)


def test_spatial_components():
    f = compile_density("1 + x*y - z^2", 3)
    u = np.array([[0.6, 0.8, 0.0], [0.0, 0.0, 1.0]])
    assert f(u) == pytest.approx([1.48, 0.0])


def test_constant_broadcasts():
    assert compile_density("3", 3)(np.eye(3)).shape == (3,)


@pytest.mark.parametrize("text", [
    "__import__('os')", "theta.real", "open('x')", "lambda: 1", "[1, 2]",
    "x", "cos(theta, 1)", "1 if theta else 2", "True",
])
def test_rejected(text):
    with pytest.raises(ExpressionError):
        compile_density(text, 2)


def test_syntax_error_has_column():
    with pytest.raises(ExpressionError, match="column"):
        compile_density("1 + * 2", 2)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_affine_in_coefficients(a, b):
    f = compile_density(f"{a!r} + {b!r}*cos(theta)", 2)
    t = 0.7
    assert f(circle(t))[0] == pytest.approx(a + b * math.cos(t), rel=1e-12, abs=1e-12)
