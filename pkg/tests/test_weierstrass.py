from __future__ import annotations

import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cmcflux import catalog
from cmcflux.geometry import PreconditionViolation, frame_at
from cmcflux.numeric import ComplexPath
from cmcflux.weierstrass import (
    PeriodMismatch,
    RationalFn,
    WeierstrassData,
    WeierstrassSurface,
    assemble_phi,
    associate_minimal,
    build_immersion,
    checked_period,
    conjugate_immersion,
    data_from_json,
    data_to_json,
    deformable,
    load_spec,
    period,
    puncture_circles,
    reconstruct_family,
    regularity_check,
    residue_periods,
    well_defined,
)

ANNULUS = WeierstrassData(RationalFn.from_roots([(0, 1)]), RationalFn.from_roots([(0, -1)]), (0,))
N1 = catalog.punctured_plane_data([0.0], 1)
N2 = catalog.punctured_plane_data([1.0, -1.0], 1)


def test_phi_matches_sympy():
    z = sp.symbols("z")
    g, dh = (z - 1) ** 2 * (z + 1) ** 2, sp.Integer(1)
    sym = [sp.lambdify(z, e) for e in ((1 / g - g) * dh / 2, sp.I * (1 / g + g) * dh / 2, dh)]
    phi = assemble_phi(N2)
    for w in (0.3 + 0.2j, -2.0 + 1.0j, 0.1j):
        assert np.allclose(phi(w)[0], [complex(f(w)) for f in sym], rtol=1e-13)


def test_phi_from_coefficients_agrees():
    coeffs = WeierstrassData(RationalFn.from_coeffs([1, 0, -2, 0, 1]), RationalFn.constant(1.0), (1, -1))
    w = np.array([0.4 + 0.9j, -1.7 - 0.2j])
    assert np.allclose(assemble_phi(coeffs)(w), assemble_phi(N2)(w), rtol=1e-12)


roots = st.lists(
    st.tuples(st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False), st.integers(-2, 2)),
    min_size=1, max_size=3,
)


@settings(max_examples=40, deadline=None)
@given(roots, st.complex_numbers(min_magnitude=2.5, max_magnitude=4.0, allow_nan=False, allow_infinity=False))
def test_phi_is_null(rs, z):
    rs = [(complex(np.round(r, 3)), m) for r, m in rs if m != 0]
    try:
        g = RationalFn.from_roots(rs)
    except ValueError:
        return
    data = WeierstrassData(g, RationalFn.from_roots([(0.5, 1)]))
    assert assemble_phi(data).null_defect(z)[0] < 1e-12


def test_annulus_period_and_verdicts():
    circ = puncture_circles(ANNULUS, 0.5)
    quad, oracle = checked_period(ANNULUS, circ[0][1])
    assert np.allclose(quad, [0, 0, 2j * np.pi], atol=1e-12)
    assert oracle.exact and oracle.exact_zero == (True, True, False)
    assert well_defined(ANNULUS, circ).holds
    df = deformable(ANNULUS, circ)
    assert not df.holds and df.witness == "puncture[0]"
    assert abs(df.max_value - 2 * np.pi) < 1e-12


def test_n1_periods_vanish_exactly():
    for label, path in puncture_circles(N1, 0.5):
        quad, oracle = checked_period(N1, path)
        assert np.max(np.abs(quad)) < 1e-12
        assert oracle.exact_zero == (True, True, True)
    circ = puncture_circles(N1)
    assert well_defined(N1, circ).holds and deformable(N1, circ).holds


def test_n2_residues_match_sympy():
    z = sp.symbols("z")
    g = (z - 1) ** 2 * (z + 1) ** 2
    assert sp.residue(1 / g, z, 1) == sp.Rational(-1, 4)
    assert sp.residue(1 / g, z, -1) == sp.Rational(1, 4)
    circles = puncture_circles(N2, 0.5)
    expected = {"puncture[0]": np.array([-0.25j * np.pi, 0.25 * np.pi, 0]), "puncture[1]": -np.array([-0.25j * np.pi, 0.25 * np.pi, 0])}
    for label, path in circles:
        quad, oracle = checked_period(N2, path)
        assert np.allclose(quad, expected[label], atol=1e-12)
        assert np.allclose(oracle.periods, expected[label], atol=1e-15)
    wd, df = well_defined(N2, circles), deformable(N2, circles)
    assert not wd.holds and not df.holds
    assert abs(df.max_value - np.pi / 4) < 1e-12


def test_figure_eight_additivity():
    left = ComplexPath.circle(-1.0, 0.5)
    right = ComplexPath.circle(1.0, 0.5, theta0=np.pi)
    phi = assemble_phi(N2)
    both = period(phi, left.concat(right))
    assert np.allclose(both, period(phi, left) + period(phi, right), atol=1e-12)
    assert np.allclose(both, 0, atol=1e-12)  # the residues cancel


def test_period_homotopy_invariance():
    phi = assemble_phi(N2)
    small = period(phi, ComplexPath.circle(1.0, 0.3))
    shifted = period(phi, ComplexPath.circle(1.2 + 0.1j, 0.7))
    assert np.allclose(small, shifted, atol=1e-11)
    assert np.allclose(period(phi, ComplexPath.circle(3.0j, 0.5)), 0, atol=1e-12)
    assert np.allclose(period(phi, ComplexPath.circle(1.0, 0.3, turns=2)), 2 * small, atol=1e-11)


def test_period_mismatch_raises():
    with pytest.raises(PeriodMismatch):
        checked_period(N2, ComplexPath.circle(1.0, 0.5), agree=-1.0)


def test_regularity():
    assert regularity_check(N1) == []
    assert regularity_check(catalog.enneper().weierstrass) == []
    branch = WeierstrassData(RationalFn.from_roots([(0, 1)]), RationalFn.from_roots([(0, 2)]))
    (bp,) = regularity_check(branch)
    assert bp.point == 0 and bp.order == 1
    pole = WeierstrassData(RationalFn.from_roots([(0, 2)]), RationalFn.constant(1.0))
    (bp,) = regularity_check(pole)
    assert bp.order == -2


def test_build_immersion_annulus_is_catenoid():
    x = build_immersion(ANNULUS, 1.0, puncture_circles(ANNULUS))
    p, q = x.position(np.array([1.0, -1.0]), np.array([0.0, 0.0]))
    assert abs(np.linalg.norm(p - q) - 2.0) < 1e-12
    f = frame_at(x, (0.3, 0.8))
    assert abs(f.H) < 1e-12 and f.isothermal_defect() < 1e-12
    # single valued: going around the puncture returns to the start
    z = 0.9 * np.exp(1j * np.linspace(0.2, 2 * np.pi - 0.2, 5))
    assert np.all(np.isfinite(x.position(z.real, z.imag)))
    with pytest.raises(PreconditionViolation):
        conjugate_immersion(ANNULUS, 1.0, puncture_circles(ANNULUS))


def test_build_immersion_rejects_n2():
    with pytest.raises(PreconditionViolation):
        build_immersion(N2, 0.5j, puncture_circles(N2))
    chart = build_immersion(N2, 0.5j, [])  # simply connected chart
    assert np.all(np.isfinite(chart.position(0.0, 0.6)))


def test_conjugate_and_associate_n1():
    gens = puncture_circles(N1)
    x = build_immersion(N1, 0.5j, gens)
    y = conjugate_immersion(N1, 0.5j, gens)
    t = 0.7
    xt = associate_minimal(x, y, t)
    direct = WeierstrassSurface(N1, 0.5j, t)
    u, v = np.array([0.3, -0.6, 1.1]), np.array([0.9, 0.2, -0.5])
    assert np.allclose(xt.position(u, v), direct.position(u, v), atol=1e-12)
    normed = associate_minimal(x, y, t, basepoint=(0.3, 0.9))
    assert np.allclose(normed.position(0.3, 0.9), 0, atol=1e-14)


def test_associate_and_reconstruct_catenoid():
    fam = catalog.catenoid_family()
    x, y = fam(0.0), fam(0.5 * np.pi)
    u, v = np.array([0.1, 2.0]), np.array([0.4, -0.3])
    for t in (0.3, 1.2, 2.5):
        assert np.allclose(associate_minimal(x, y, t).position(u, v), fam(t).position(u, v), atol=1e-13)
        rec = reconstruct_family(x, fam(0.9), 0.9, t)
        assert np.allclose(rec.position(u, v), fam(t).position(u, v), atol=1e-12)
    with pytest.raises(PreconditionViolation):
        reconstruct_family(x, fam(np.pi), np.pi, 0.2)


def test_json_round_trip(tmp_path):
    circles = puncture_circles(N2, 0.4)
    doc = data_to_json(N2, circles)
    data, cycles = data_from_json(json.loads(json.dumps(doc)))
    assert data.punctures == N2.punctures
    assert [c[0] for c in cycles] == ["puncture[0]", "puncture[1]"]
    assert np.allclose(assemble_phi(data)(0.3j), assemble_phi(N2)(0.3j))
    assert data_to_json(data, cycles) == doc


def test_coefficient_input_not_exact():
    coeffs = WeierstrassData(RationalFn.from_coeffs([0, 0, 1]), RationalFn.constant(1.0), (0,))
    res = residue_periods(coeffs, ComplexPath.circle(0.0, 0.5))
    assert not res.exact
    assert np.allclose(res.periods, 0, atol=1e-14)


@pytest.mark.parametrize("name, deformable_expected", [("catenoid", False), ("punctured_n1", True), ("punctured_n2", False)])
def test_shipped_specs(name, deformable_expected):
    from pathlib import Path

    data, cycles = load_spec(Path(__file__).resolve().parents[1] / "specs" / f"{name}.json")
    assert deformable(data, cycles).holds is deformable_expected


def test_invalid_data():
    with pytest.raises(ValueError):
        RationalFn.from_roots([(1, 1), (1, -1)])
    with pytest.raises(ValueError):
        RationalFn.from_coeffs([1], [0])
    with pytest.raises(ValueError):
        data_from_json({"g": {}, "dh": {"num": [1]}})
