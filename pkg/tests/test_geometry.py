from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmcflux import catalog
from cmcflux.geometry import (
    ImmersionError,
    ParametricSurface,
    PreconditionViolation,
    apply_J,
    brioschi_curvature,
    codazzi_residual,
    frame_at,
    hopf_coefficient,
    hopf_wbar,
    mean_curvature_profile,
)
from cmcflux.numeric import cross


def _random_points(surface, rng, n=100, margin=0.05):
    u0, u1, v0, v1 = surface.domain
    du, dv = (u1 - u0) * margin, (v1 - v0) * margin
    return rng.uniform(u0 + du, u1 - du, n), rng.uniform(v0 + dv, v1 - dv, n)


def test_sphere_frame(sphere_entry):
    f = frame_at(sphere_entry.surface, (0.3, 0.4))
    assert np.allclose(f.normal, f.x, atol=1e-14)  # outward
    assert abs(f.H + 1.0) < 1e-12 and abs(f.K - 1.0) < 1e-12


def test_sphere_radius_scaling():
    f = frame_at(catalog.sphere(2.0).surface, (1.0, -0.5))
    assert abs(f.H + 0.5) < 1e-12 and abs(f.K - 0.25) < 1e-12


def test_catenoid_frame(catenoid_entry):
    for v in (0.0, 0.4, -0.8):
        f = frame_at(catenoid_entry.surface, (1.1, v))
        assert abs(f.H) < 1e-12
        assert abs(f.K + 1.0 / np.cosh(v) ** 4) < 1e-12
        assert f.isothermal_defect() < 1e-14


def test_cylinder_frame(cylinder_entry):
    f = frame_at(cylinder_entry.surface, (0.0, 0.0))
    assert np.allclose(f.normal, [-1, 0, 0], atol=1e-15)  # inward
    assert abs(f.H - 0.5) < 1e-14 and abs(f.K) < 1e-14


def test_paraboloid_against_graph_formulas():
    s = catalog.paraboloid_graph().surface
    for u, v in [(0.0, 0.0), (0.3, -0.2), (0.7, 0.5)]:
        q = 1 + 4 * (u * u + v * v)
        f = frame_at(s, (u, v))
        assert abs(f.K - 4 / q**2) < 1e-12
        assert abs(f.H - (2 + 4 * (u * u + v * v)) / q**1.5) < 1e-12


def test_degenerate_point_raises():
    cone = ParametricSurface(lambda u, v: np.stack([v * np.cos(u), v * np.sin(u), v], -1),
                             domain=(0, 2 * np.pi, 0, 1), name="cone")
    with pytest.raises(ImmersionError) as exc:
        frame_at(cone, (0.5, 0.0))
    assert exc.value.point is not None


def test_fd_jet_fallback_matches_analytic(catenoid_entry):
    s = catenoid_entry.surface
    fd = ParametricSurface(s.position, domain=s.domain, name="fd-catenoid")
    a, b = frame_at(s, (0.4, 0.3)), frame_at(fd, (0.4, 0.3))
    assert abs(a.K - b.K) < 1e-5 and abs(b.H) < 1e-5


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 6.0), st.floats(-0.9, 0.9), st.floats(-2, 2), st.floats(-2, 2))
def test_J_properties(u, v, a, b):
    f = frame_at(catalog.paraboloid_graph().surface, (u / 7, v))
    X = np.array([a, b])
    JX = apply_J(f, X)
    assert np.allclose(f.J @ f.J, -np.eye(2), atol=1e-12)
    assert np.allclose(f.push(JX), cross(f.normal, f.push(X)), atol=1e-12)
    assert abs(np.linalg.norm(f.push(JX)) - np.linalg.norm(f.push(X))) < 1e-12
    assert abs(np.dot(f.push(JX), f.push(X))) < 1e-12


def test_hopf_sphere_vanishes(sphere_entry):
    assert abs(hopf_coefficient(sphere_entry.surface, (0.7, 1.2))) < 1e-14


def test_hopf_catenoid_modulus(catenoid_entry):
    w = hopf_coefficient(catenoid_entry.surface, (np.array([0.1, 2.0, 4.0]), np.array([0.0, 0.5, -0.7])))
    assert np.allclose(np.abs(w), 0.5, atol=1e-13)


def test_hopf_modulus_identity(rng):
    # |omega|^2 = e^{4 rho} (H^2 - K) / 4 in isothermal coordinates
    for entry in (catalog.catenoid(), catalog.enneper(), catalog.paraboloid_isothermal()):
        u, v = _random_points(entry.surface, rng, 20)
        f = frame_at(entry.surface, (u, v), with_position=False)
        w = hopf_coefficient(entry.surface, (u, v))
        assert np.allclose(np.abs(w) ** 2, f.E**2 * (f.H**2 - f.K) / 4, atol=1e-12)


def test_enneper_hopf_constant():
    w = hopf_coefficient(catalog.enneper().surface, (np.array([0.1, -0.4]), np.array([0.3, 0.6])))
    assert np.allclose(w, -0.5, atol=1e-13)


def test_unduloid_hopf_constant(unduloid_entry):
    s = unduloid_entry.surface
    u, v = s.sample_grid(6, 5)
    w = hopf_coefficient(s, (u, v))
    assert np.ptp(np.abs(w)) < 1e-8
    assert abs(w).min() > 1e-3


def test_hopf_requires_isothermal():
    with pytest.raises(PreconditionViolation):
        hopf_coefficient(catalog.paraboloid_graph().surface, (0.5, 0.2))


@pytest.mark.parametrize("name", ["catenoid", "sphere", "unduloid"])
def test_codazzi_cmc(name):
    entry = catalog.get(name)
    p = (0.9, 0.2)
    assert abs(hopf_wbar(entry.surface, p)) < 1e-7
    assert abs(codazzi_residual(entry.surface, p)) < 1e-7


def test_paraboloid_hopf_not_holomorphic():
    s = catalog.paraboloid_isothermal().surface
    assert np.allclose(s.position(0.0, 0.0), [[0.5, 0.0, 0.25]], atol=1e-12)
    dw = hopf_wbar(s, (0.0, 0.0))
    assert abs(dw) > 1e-3
    # the Codazzi relation still holds
    assert abs(codazzi_residual(s, (0.0, 0.0))) < 1e-8


@pytest.mark.parametrize("name", ["catenoid", "helicoid", "enneper", "sphere", "cylinder", "unduloid", "nodoid"])
def test_catalog_invariants(name, rng):
    entry = catalog.get(name)
    u, v = _random_points(entry.surface, rng)
    f = frame_at(entry.surface, (u, v), with_position=False)
    assert np.max(np.abs(f.H - entry.H)) < 1e-8
    assert np.max(np.abs(np.linalg.norm(f.normal, axis=-1) - 1)) < 1e-14
    if entry.K_range is not None:
        lo, hi = entry.K_range
        assert np.all(f.K >= lo - 1e-10) and np.all(f.K <= hi + 1e-10)


@pytest.mark.parametrize("name", ["catenoid", "sphere", "paraboloid", "unduloid"])
def test_brioschi_agrees(name):
    s = catalog.get(name).surface
    u, v = s.sample_grid(3, 3, margin=0.2)
    K = frame_at(s, (u, v), with_position=False).K
    assert np.allclose(brioschi_curvature(s, (u, v)), K, atol=1e-6)


def test_mean_curvature_profile(cylinder_entry):
    H, u, v = mean_curvature_profile(cylinder_entry.surface)
    assert H.shape == u.shape == v.shape == (49,)
    assert np.allclose(H, 0.5)


def test_transformed_surface(catenoid_entry):
    R = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1.0]])
    moved = catenoid_entry.surface.transformed(R, [1, 2, 3])
    a, b = frame_at(catenoid_entry.surface, (0.2, 0.3)), frame_at(moved, (0.2, 0.3))
    assert np.allclose(b.x, R @ a.x + [1, 2, 3])
    assert np.allclose(b.normal, R @ a.normal)
    assert abs(a.K - b.K) < 1e-14
