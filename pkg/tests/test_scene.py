from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmkit.geometry.transforms import rot_y
from rmkit.reconstruction import Ray
from rmkit.simulator.scene import Box, Plane, Scene, Sphere, cast_ray


def test_plane_hit():
    h = cast_ray(Scene([Plane([0, 0, 2.0], [0, 0, -1.0])]), Ray([0, 0, 0], [0, 0, 1]))
    assert h.t == 2.0 and h.index == 0
    assert np.allclose(h.normal, [0, 0, -1])


def test_sphere_miss():
    assert cast_ray(Scene([Sphere([0, 3.0, 3.0], 1.0)]), Ray([0, 0, 0], [0, 0, 1])) is None


def test_unit_sphere_ahead():
    h = cast_ray(Scene([Sphere([0, 0, 3.0], 1.0, albedo=0.5)]), Ray([0, 0, 0], [0, 0, 1]))
    assert h.t == pytest.approx(2.0, abs=1e-15)
    assert np.allclose(h.normal, [0, 0, -1])
    assert h.albedo == 0.5


def test_inside_sphere_sees_far_wall():
    h = cast_ray(Scene([Sphere([0, 0, 0], 2.0)]), Ray([0, 0, 0], [1, 0, 0]))
    assert h.t == pytest.approx(2.0)
    assert np.allclose(h.normal, [-1, 0, 0])  # faces the ray


def test_plane_behind_and_parallel():
    s = Scene([Plane([0, 0, -2.0], [0, 0, 1.0])])
    assert cast_ray(s, Ray([0, 0, 0], [0, 0, 1])) is None
    assert cast_ray(s, Ray([0, 0, 0], [1, 0, 0])) is None


def test_box_faces():
    s = Scene([Box([0, 0, 5.0], [1.0, 2.0, 0.5])])
    h = cast_ray(s, Ray([0, 0, 0], [0, 0, 1]))
    assert h.t == pytest.approx(4.5) and np.allclose(h.normal, [0, 0, -1])
    h = cast_ray(s, Ray([0, 0, 5.0], [0, 1, 0]))  # from inside
    assert h.t == pytest.approx(2.0) and np.allclose(h.normal, [0, -1, 0])
    assert cast_ray(s, Ray([1.5, 0, 0], [0, 0, 1])) is None


def test_rotated_box():
    s = Scene([Box([0, 0, 4.0], [1.0, 1.0, 1.0], rot_y(np.pi / 4))])
    h = cast_ray(s, Ray([0, 0, 0], [0, 0, 1]))
    assert h.t == pytest.approx(4.0 - np.sqrt(2), abs=1e-12)


def test_nearest_primitive_wins():
    s = Scene([Plane([0, 0, 5.0], [0, 0, -1.0]), Sphere([0, 0, 3.0], 1.0), Plane([0, 0, 1.5], [0, 0, 1.0])])
    h = cast_ray(s, Ray([0, 0, 0], [0, 0, 1]))
    assert h.index == 2 and h.t == pytest.approx(1.5)


def test_validation():
    with pytest.raises(ValueError):
        Sphere([0, 0, 0], 0.0)
    with pytest.raises(ValueError):
        Plane([0, 0, 0], [0, 0, 2.0])
    with pytest.raises(ValueError):
        Box([0, 0, 0], [1, -1, 1])
    with pytest.raises(ValueError):
        Sphere([0, 0, 0], 1.0, albedo=0.0)
    with pytest.raises(ValueError):
        cast_ray(Scene([]), type("R", (), {"origin": np.zeros(3), "direction": np.array([0, 0, 2.0])})())


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 2.0))
def test_sphere_hit_lies_on_surface(x, y, z, r):
    c = np.array([0.3, -0.2, 4.0])
    s = Scene([Sphere(c, r)])
    o = np.array([x, y, z])
    if np.linalg.norm(o - c) < r + 1e-3:
        return
    d = (c - o) / np.linalg.norm(c - o)
    h = cast_ray(s, Ray(o, d))
    p = o + h.t * d
    assert abs(np.linalg.norm(p - c) - r) < 1e-9
    assert abs(h.t - (np.linalg.norm(c - o) - r)) < 1e-9
