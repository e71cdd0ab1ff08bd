from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ed21.geometry import (AngularMomentum2, FieldStrength, MVec3, check_unit, lorentz_force,
                           lower_indices, mdot, raise_indices, unit_velocity, wedge)

finite = st.floats(-10, 10, allow_nan=False)
vec = st.tuples(finite, finite, finite)
speed = st.floats(-0.9, 0.9)


def test_minkowski_product_signature():
    assert mdot((1, 0, 0), (1, 0, 0)) == -1.0
    assert mdot((0, 1, 0), (0, 1, 0)) == 1.0
    assert mdot((2, 3, 4), (1, 1, 1)) == -2 + 3 + 4


@given(vec, vec)
def test_product_symmetric(a, b):
    assert mdot(a, b) == pytest.approx(mdot(b, a))


@given(vec, vec)
def test_wedge_antisymmetric(a, b):
    assert np.allclose(wedge(a, b).array, -wedge(b, a).array)
    assert np.allclose(wedge(a, a).array, 0.0)


@given(vec)
def test_raise_lower_round_trip(v):
    f = FieldStrength(*v)
    assert np.allclose(lower_indices(raise_indices(f)).array, f.array)
    up = raise_indices(f)
    assert np.allclose(up, -up.T)


def test_field_strength_components():
    f = FieldStrength(0.5, -0.25, 2.0)
    cov = f.covariant()
    assert cov[0, 1] == -0.5 and cov[0, 2] == 0.25 and cov[1, 2] == 2.0


def test_lorentz_force_at_rest():
    f = lorentz_force(FieldStrength(0.3, -0.7, 5.0), (1.0, 0.0, 0.0), 2.0)
    assert np.allclose(f.array, [0.0, 0.6, -1.4])


@given(vec, speed, speed)
def test_lorentz_force_orthogonal_to_velocity(fv, v1, v2):
    if v1 * v1 + v2 * v2 >= 0.81:
        return
    g = 1.0 / np.sqrt(1 - v1 * v1 - v2 * v2)
    u = (g, g * v1, g * v2)
    f = lorentz_force(FieldStrength(*fv), u, 1.3)
    assert abs(mdot(f, u)) <= 1e-10 * (1 + np.abs(f.array).max() * g)


@given(finite, finite)
def test_unit_velocity_normalised(a, b):
    u = unit_velocity(np.array([a, b]))
    assert mdot(u, u) == pytest.approx(-1.0, abs=1e-10 * (1 + a * a + b * b))


def test_check_unit_rejects():
    with pytest.raises(ValueError):
        check_unit((1.0, 0.5, 0.0))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        MVec3(float("nan"), 0.0, 0.0)
    with pytest.raises(ValueError):
        FieldStrength(0.0, float("inf"), 0.0)


def test_vector_arithmetic():
    a, b = MVec3(1, 2, 3), MVec3(0.5, 0.5, 0.5)
    assert (a + b).array.tolist() == [1.5, 2.5, 3.5]
    assert (a - b).array.tolist() == [0.5, 1.5, 2.5]
    assert (a * 2).array.tolist() == [2, 4, 6]
    assert (-a).array.tolist() == [-1, -2, -3]


@given(vec, vec)
def test_angular_momentum_from_pair_antisymmetric(a, b):
    m = AngularMomentum2.from_pair(a, b)
    n = AngularMomentum2.from_pair(b, a)
    assert np.allclose(m.array, -n.array)
    mat = m.matrix()
    assert np.allclose(mat, -mat.T)
