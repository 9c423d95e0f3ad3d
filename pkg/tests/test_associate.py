from __future__ import annotations

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cmcflux import catalog
from cmcflux.associate import (
    ROT,
    associate_tensor,
    extract_state,
    gauss_codazzi_invariants,
    hopf_rotation_defect,
    integrability_residuals,
    minimal_family_deformation_state,
)
from cmcflux.geometry import PreconditionViolation, combine, frame_at
from cmcflux.weierstrass import build_immersion, conjugate_immersion, puncture_circles

PTS = (np.array([0.4, 1.9, 3.3, 5.0]), np.array([0.2, -0.4, 0.5, 0.0]))


def test_associate_tensor_examples():
    A = np.diag([1.0, -1.0])
    assert np.allclose(associate_tensor(A, 0.0, 0.0), A)
    assert np.allclose(associate_tensor(A, 0.0, np.pi / 2), [[0, 1], [1, 0]], atol=1e-15)
    assert np.allclose(associate_tensor(A, 0.0, np.pi), -A, atol=1e-15)
    umbilic = 2.0 * np.eye(2)
    assert np.allclose(associate_tensor(umbilic, 2.0, 0.9), umbilic)


def test_associate_tensor_broadcasts():
    A = np.stack([np.diag([1.0, 0.0]), np.diag([2.0, 1.0])])
    out = associate_tensor(A, np.array([0.5, 1.5]), np.array([0.3, 1.1]))
    assert out.shape == (2, 2, 2)
    assert np.allclose(out[1], associate_tensor(A[1], 1.5, 1.1))


sym = st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))


@settings(max_examples=60, deadline=None)
@given(sym, st.floats(-7, 7), st.floats(-7, 7))
def test_trace_determinant_and_group_law(entries, s, t):
    a, b, c = entries
    A = np.array([[a, b], [b, c]])
    H = 0.5 * (a + c)
    At = associate_tensor(A, H, t)
    scale = 1 + np.abs(A).max() ** 2
    assert abs(np.trace(At) - 2 * H) < 1e-12 * scale
    assert abs(np.linalg.det(At) - np.linalg.det(A)) < 1e-11 * scale
    assert np.allclose(At, At.T, atol=1e-12 * scale)
    assert np.allclose(associate_tensor(associate_tensor(A, H, s), H, t), associate_tensor(A, H, s + t),
                       atol=1e-11 * scale)


def test_t_derivative_symbolic():
    a, b, c, t = sp.symbols("a b c t", real=True)
    A = sp.Matrix([[a, b], [b, c]])
    H = (a + c) / 2
    T = A - H * sp.eye(2)
    R = sp.Matrix(ROT.astype(int))
    At = sp.cos(t) * T + sp.sin(t) * R * T + H * sp.eye(2)
    assert sp.simplify(At.diff(t) - R * (At - H * sp.eye(2))) == sp.zeros(2, 2)


def test_invariants_on_unduloid(unduloid_entry):
    s = unduloid_entry.surface
    f = frame_at(s, s.sample_grid(4, 4), with_position=False)
    tr, det = gauss_codazzi_invariants(f.shape_orthonormal(), f.H, np.linspace(0, 2 * np.pi, 9))
    assert tr < 1e-12 and det < 1e-12


@pytest.mark.parametrize("t", [0.4, 1.3, 3.0])
def test_hopf_rotates(t):
    assert hopf_rotation_defect(catalog.catenoid_family(), t, PTS) < 1e-13
    fam = catalog.enneper().family
    assert hopf_rotation_defect(fam, t, (np.array([0.2, -0.5]), np.array([0.1, 0.7]))) < 1e-13


def test_catenoid_minimal_state():
    fam = catalog.catenoid_family()
    st_ = minimal_family_deformation_state(fam(0.0), fam(np.pi / 2), 0.6, PTS)
    assert np.allclose(st_.k, -1.0, atol=1e-9)
    assert np.max(st_.Z_norm) < 1e-9
    assert np.max(st_.k_spread) < 1e-9
    assert np.allclose(st_.V(0.0), 0, atol=1e-9)


def test_n1_minimal_state(family_n1):
    data = family_n1.data
    gens = puncture_circles(data)
    x, y = build_immersion(data, 0.5j, gens), conjugate_immersion(data, 0.5j, gens)
    st_ = minimal_family_deformation_state(x, y, 0.3, (np.array([0.6, -0.8]), np.array([0.7, 0.4])))
    assert np.allclose(st_.k, -1.0, atol=1e-8) and np.max(st_.Z_norm) < 1e-8


def test_associate_family_integrability():
    rep = integrability_residuals(catalog.catenoid_family(), 0.5, PTS)
    assert max(rep.shape_eq, rep.k_gradient_eq, rep.rotation_eq) < 1e-8
    assert rep.metric_drift < 1e-12
    assert abs(rep.k_range[0] + 1) < 1e-9 and abs(rep.k_range[1] + 1) < 1e-9
    assert set(rep.as_dict()) == {"shape_eq", "k_gradient_eq", "rotation_eq", "metric_drift", "k_min", "k_max", "Z_max"}


def test_rigid_motion_k_is_normal_component(catenoid_entry):
    omega = np.array([0.3, -0.2, 0.9])
    fam = catalog.rigid_motion_family(catenoid_entry.surface, omega, (0.1, 0.0, -0.4))
    st_ = extract_state(fam, 0.0, PTS)
    assert np.allclose(st_.k, st_.frame.normal @ omega, atol=1e-10)
    # eta is the rotation vector itself
    assert np.allclose(st_.eta, np.broadcast_to(omega, st_.eta.shape), atol=1e-9)


def test_rigid_motion_on_sphere_satisfies_all(sphere_entry):
    fam = catalog.rigid_motion_family(sphere_entry.surface, (0.2, 0.7, -0.4), (1.0, 0.5, 0.0))
    rep = integrability_residuals(fam, 0.0, (np.array([0.3, 2.0, 4.0]), np.array([0.2, -0.6, 1.0])))
    assert max(rep.shape_eq, rep.k_gradient_eq, rep.rotation_eq) < 1e-8


def test_rigid_motion_of_catenoid(catenoid_entry):
    fam = catalog.rigid_motion_family(catenoid_entry.surface, (0.0, 0.0, 1.0), (0.0, 0.0, 0.0))
    rep = integrability_residuals(fam, 0.0, PTS)
    assert rep.shape_eq < 1e-8 and rep.k_gradient_eq < 1e-8
    assert rep.rotation_eq > 0.1  # not an associate deformation


def test_unrolling_cylinder_violates_last_equation():
    pts = (np.array([-0.5, 0.0, 0.4]), np.array([0.0, 0.3, -0.2]))
    rep = integrability_residuals(catalog.unrolling_cylinder, 0.0, pts)
    assert rep.shape_eq < 1e-7 and rep.k_gradient_eq < 1e-7
    assert rep.rotation_eq > 0.5


def test_non_isometric_family_refused(catenoid_entry):
    def scaled(t):
        return combine([(1.0 + t, catenoid_entry.surface)], declared_H=0.0)

    with pytest.raises(PreconditionViolation):
        integrability_residuals(scaled, 0.0, PTS)
