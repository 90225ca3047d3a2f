import math

import numpy as np
import pytest

from widthlab import Bump, Polynomial, SinProduct, ValidationError, catalog, coordinate


def test_bump_bounds_and_plateau():
    bump = Bump(1)
    xs = np.linspace(0.0, 1.0, 4001).reshape(-1, 1)
    vals = bump(xs)
    assert vals.min() >= 0.0 and vals.max() <= 1.0
    third = np.linspace(1 / 3, 2 / 3, 201).reshape(-1, 1)
    assert np.all(bump(third) == 1.0)


def test_bump_supported_inside_open_cube():
    bump = Bump(1)
    outside = np.array([[0.0], [1.0], [0.05], [0.95]])
    assert np.all(bump(outside) == 0.0)
    bump2 = Bump(2)
    edge = np.array([[0.5, 0.03], [0.97, 0.5], [0.5, 0.5]])
    vals = bump2(edge)
    assert vals[0] == 0.0 and vals[1] == 0.0 and vals[2] == 1.0


def test_bump_plateau_m2():
    bump = Bump(2)
    g = np.linspace(1 / 3, 2 / 3, 9)
    pts = np.array([[a, b] for a in g for b in g])
    assert np.all(bump(pts) == 1.0)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_bump_derivatives_match_differences(order):
    bump = Bump(1)
    dk = bump.partial((order,))
    xs = np.array([[0.13], [0.21], [0.5], [0.79], [0.9]])
    h = 1e-5 if order == 1 else 1e-4
    if order == 1:
        fd = (bump(xs + h) - bump(xs - h)) / (2 * h)
        tol = 1e-7
    elif order == 2:
        fd = (bump(xs + h) - 2 * bump(xs) + bump(xs - h)) / h**2
        tol = 1e-4
    else:
        fd = (
            bump(xs + 2 * h) - 2 * bump(xs + h) + 2 * bump(xs - h) - bump(xs - 2 * h)
        ) / (2 * h**3)
        tol = 2e-2
    scale = max(1.0, np.abs(fd).max())
    assert np.abs(dk(xs) - fd).max() / scale < tol


def test_bump_mixed_partial_m2():
    bump = Bump(2)
    dk = bump.partial((1, 1))
    h = 1e-5
    pts = np.array([[0.2, 0.8], [0.25, 0.3]])
    fd = (
        bump(pts + [h, h]) - bump(pts + [h, -h]) - bump(pts + [-h, h]) + bump(pts - [h, h])
    ) / (4 * h * h)
    assert np.abs(dk(pts) - fd).max() < 1e-5


def test_sin_product_partials():
    f = SinProduct(2, (1.0, 2.0))
    pts = np.array([[0.3, 0.7], [0.11, 0.62]])
    d10 = f.partial((1, 0))(pts)
    expected = (
        2 * math.pi * np.cos(2 * math.pi * pts[:, 0]) * np.sin(4 * math.pi * pts[:, 1])
    )
    assert np.allclose(d10, expected, atol=1e-12)
    d02 = f.partial((0, 2))(pts)
    expected2 = (
        -((4 * math.pi) ** 2)
        * np.sin(2 * math.pi * pts[:, 0])
        * np.sin(4 * math.pi * pts[:, 1])
    )
    assert np.allclose(d02, expected2, atol=1e-10)


def test_polynomial_partials_and_degree():
    f = Polynomial(2, {(2, 1): 3.0, (0, 0): -1.0})
    assert f.poly_degree == 3
    pts = np.array([[0.5, 0.25]])
    assert f(pts)[0] == pytest.approx(3 * 0.25 * 0.25 - 1)
    d = f.partial((1, 1))
    assert d(pts)[0] == pytest.approx(6 * 0.5)
    dz = f.partial((0, 4))
    assert dz(pts)[0] == 0.0


def test_coordinate_helper():
    f = coordinate(3, axis=1)
    pts = np.array([[0.1, 0.7, 0.9]])
    assert f(pts)[0] == pytest.approx(0.7)


def test_catalog_names():
    assert catalog("sin", 2).m == 2
    assert catalog("linear", 1).poly_degree == 1
    assert catalog("bump", 1).name.startswith("bump")
    assert catalog("constant", 2).poly_degree == 0
    with pytest.raises(ValidationError):
        catalog("mystery", 1)
