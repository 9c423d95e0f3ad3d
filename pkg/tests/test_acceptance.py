"""Acceptance criteria, one test and one PASS/FAIL line each."""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from cmcflux import catalog
from cmcflux.associate import (
    associate_tensor,
    extract_state,
    hopf_rotation_defect,
    integrability_residuals,
)
from cmcflux.forms import (
    Cycle,
    alexandrov_criterion,
    area_vector_form,
    closedness_defect,
    cross_section_force,
    decay_order,
    exactness_residuals,
    force_form,
    period_of_form,
    torque_form,
)
from cmcflux.geometry import PreconditionViolation, frame_at
from cmcflux.verdicts import CIRCLE_POSSIBLE, FINITE, entry_verdict, weierstrass_verdict
from cmcflux.weierstrass import (
    associate_minimal,
    build_immersion,
    checked_period,
    conjugate_immersion,
    load_spec,
    puncture_circles,
)

SPECS = Path(__file__).resolve().parents[1] / "specs"
TS = (0.0, np.pi / 6, np.pi / 2, np.pi)


def _isometry_stats(family, u, v):
    base = frame_at(family(0.0), (u, v), with_position=False)
    g0 = np.stack([base.E, base.F, base.G], -1)
    dev = h = 0.0
    for t in TS:
        f = frame_at(family(t), (u, v), with_position=False)
        dev = max(dev, float(np.max(np.abs(np.stack([f.E, f.F, f.G], -1) - g0))))
        h = max(h, float(np.max(np.abs(f.H))))
    return dev, h


def test_criterion_1_associate_isometry(acceptance):
    start = time.perf_counter()
    cat_fam = catalog.catenoid_family()
    u, v = cat_fam(0.0).sample_grid(20, 20)
    dev_c, h_c = _isometry_stats(cat_fam, u, v)
    # the n = 2 members are evaluated from local jets (positions are chart-local)
    surf = catalog.punctured_plane_family([1.0, -1.0], 1).entry.surface
    u, v = surf.sample_grid(20, 20)
    dev_n, h_n = _isometry_stats(surf.rotated, u, v)
    elapsed = time.perf_counter() - start
    ok = max(dev_c, dev_n) < 1e-8 and max(h_c, h_n) < 1e-6 and elapsed < 10.0
    acceptance(1, ok, f"catenoid metric dev {dev_c:.1e} |H| {h_c:.1e}; n=2 metric dev {dev_n:.1e} "
                      f"|H| {h_n:.1e}; {elapsed:.2f}s")


def test_criterion_2_catenoid_obstruction(catenoid_entry, acceptance):
    s, waist = catenoid_entry.surface, catenoid_entry.cycles["waist"]
    direct = float(np.linalg.norm(period_of_form(force_form(s), s, waist)))
    section = abs(cross_section_force(s, (0, 0, 1), waist))
    data, cycles = load_spec(SPECS / "catenoid.json")
    quad, _ = checked_period(data, cycles[0][1])
    phi = float(np.linalg.norm(quad.imag))
    vals = (direct, section, phi)
    verdict = entry_verdict(catenoid_entry).verdict
    spread = max(vals) - min(vals)
    ok = all(abs(x - 2 * np.pi) < 1e-6 for x in vals) and spread < 1e-6 and verdict == FINITE
    acceptance(2, ok, f"|W| direct {direct:.12f} section {section:.12f} phi {phi:.12f}; verdict {verdict}")


def _family_status(fam):
    gens = puncture_circles(fam.data)
    re = im = 0.0
    exact = True
    for _, path in gens:
        quad, oracle = checked_period(fam.data, path)
        re = max(re, float(np.max(np.abs(quad.real))))
        im = max(im, float(np.max(np.abs(quad.imag))))
        exact &= all(oracle.exact_zero) and oracle.exact
    verdict = weierstrass_verdict(fam.data, gens).verdict
    try:
        z0 = fam.entry.surface.z0
        build_immersion(fam.data, z0, gens)
        conjugate_immersion(fam.data, z0, gens)
        built = True
    except PreconditionViolation:
        built = False
    ok = re < 1e-8 and im < 1e-8 and exact and verdict == CIRCLE_POSSIBLE and built
    return ok, f"max|Re| {re:.3g} max|Im| {im:.3g} exact-zero {exact} verdict {verdict} built {built}"


def test_criterion_3_deformable_family(family_n1, family_n2, acceptance):
    ok2, detail2 = _family_status(family_n2)
    ok1, detail1 = _family_status(family_n1)
    # n = 2 is the stated family; n = 1 is reported alongside as the working deformable case
    acceptance(3, ok2, f"n=2: {detail2} | n=1: {detail1}")


def test_criterion_4_invariants(rng, acceptance):
    tr_dev = det_dev = 0.0
    ts = np.linspace(0.0, 2 * np.pi, 32, endpoint=False)
    for _ in range(1000):
        a, b, c = rng.uniform(-3, 3, 3)
        A = np.array([[a, b], [b, c]])
        H = 0.5 * (a + c)
        At = associate_tensor(np.broadcast_to(A, (32, 2, 2)), np.full(32, H), ts)
        tr_dev = max(tr_dev, float(np.max(np.abs(np.trace(At, axis1=1, axis2=2) - 2 * H))))
        det_dev = max(det_dev, float(np.max(np.abs(np.linalg.det(At) - np.linalg.det(A)))))
    fam = catalog.catenoid_family()
    u, v = fam(0.0).sample_grid(10, 10)
    hopf = max(hopf_rotation_defect(fam, t, (u, v)) for t in ts)
    ok = tr_dev < 1e-12 and det_dev < 1e-12 and hopf < 1e-8
    acceptance(4, ok, f"trace dev {tr_dev:.1e} det dev {det_dev:.1e} hopf rotation {hopf:.1e}")


def test_criterion_5_closedness(unduloid_entry, acceptance):
    s = unduloid_entry.surface
    hs = [1e-1, 5e-2, 2.5e-2]
    p0 = (0.9, 2.0)
    orders = {}
    for name, form in (("omega", force_form(s)), ("sigma", torque_form(s)), ("control", area_vector_form(s))):
        orders[name] = decay_order(hs, [closedness_defect(form, s, p0, h) for h in hs])
    ok = orders["omega"][0] >= 2.7 and orders["sigma"][0] >= 2.7
    ok &= orders["control"][0] <= 2.3 and orders["control"][1] > 1e-3
    acceptance(5, ok, " ".join(f"{k} order {p:.2f} (C {c:.2g})" for k, (p, c) in orders.items()))


def test_criterion_6_homology_invariance(annulus_entry, family_n1, family_n2, acceptance):
    gaps = {}
    for name, surf, with_torque in (("annulus", annulus_entry.surface, True),
                                    ("n=1", family_n1.entry.surface, True),
                                    ("n=2", family_n2.entry.surface, False)):
        worst = 0.0
        for center in surf.data.punctures:
            c = (center.real, center.imag)
            forms = [force_form(surf, H=0.0)] + ([torque_form(surf, H=0.0)] if with_torque else [])
            for form in forms:
                a, b = (period_of_form(form, surf, Cycle.circle(c, r, 1, f"r={r}")) for r in (0.3, 0.7))
                worst = max(worst, float(np.max(np.abs(a - b))))
        gaps[name] = worst
    ok = max(gaps.values()) < 1e-8
    acceptance(6, ok, "; ".join(f"{k} max gap {v:.1e}" for k, v in gaps.items())
               + " (n=2 force only: positions are not single valued)")


def test_criterion_7_derivative_identities(acceptance):
    fam = catalog.catenoid_family()
    u, v = fam(0.0).sample_grid(6, 6)
    worst = {"first": 0.0, "normal": 0.0, "torque": 0.0}
    for t in TS:
        r = exactness_residuals(fam, (u, v), t=t, delta=1e-4, H=0.0)
        worst = {k: max(worst[k], r[k]) for k in worst}
    ok = max(worst.values()) < 1e-5
    acceptance(7, ok, " ".join(f"{k} {val:.1e}" for k, val in worst.items()))


def test_criterion_8_deformation_state(sphere_entry, acceptance):
    cat_fam = catalog.catenoid_family()
    x, y = cat_fam(0.0), cat_fam(0.5 * np.pi)

    def family(t):
        return associate_minimal(x, y, t, basepoint=(0.0, 0.0))

    u, v = x.sample_grid(8, 8)
    st = extract_state(family, 0.4, (u, v))
    k_dev = float(np.max(np.abs(st.k + 1.0)))
    z_max = float(np.max(st.Z_norm))
    rep = integrability_residuals(family, 0.4, (u[::7], v[::7]))
    rigid = catalog.rigid_motion_family(sphere_entry.surface, (0.3, -0.5, 0.8), (0.2, 0.1, -0.4))
    su, sv = sphere_entry.surface.sample_grid(4, 4, margin=0.15)
    ctrl = integrability_residuals(rigid, 0.0, (su, sv))
    res = max(rep.shape_eq, rep.k_gradient_eq, rep.rotation_eq)
    ctrl_res = max(ctrl.shape_eq, ctrl.k_gradient_eq, ctrl.rotation_eq)
    ok = k_dev < 1e-5 and z_max < 1e-5 and res < 1e-5 and ctrl_res < 1e-8
    acceptance(8, ok, f"|k+1| {k_dev:.1e} |Z| {z_max:.1e} eqs {rep.shape_eq:.1e}/{rep.k_gradient_eq:.1e}/{rep.rotation_eq:.1e}; "
                      f"rigid control on sphere {ctrl_res:.1e}")


def test_criterion_9_delaunay(unduloid_entry, nodoid_entry, cylinder_entry, acceptance):
    drift = max(unduloid_entry.profile.drift, nodoid_entry.profile.drift)
    hdev = 0.0
    for e in (unduloid_entry, nodoid_entry):
        u, v = e.surface.sample_grid(20, 20)
        hdev = max(hdev, float(np.max(np.abs(frame_at(e.surface, (u, v), with_position=False).H - e.H))))
    verdict = entry_verdict(unduloid_entry)
    neck = verdict.max_obstruction
    cs, eq = cylinder_entry.surface, cylinder_entry.cycles["equator"]
    Wz = float(period_of_form(force_form(cs), cs, eq)[2])
    T = float(np.linalg.norm(period_of_form(torque_form(cs), cs, eq)))
    ok = drift <= 1e-8 and hdev < 1e-6 and neck > 0.1 and verdict.verdict == FINITE
    ok &= abs(Wz - np.pi) < 1e-6 and T < 1e-6
    acceptance(9, ok, f"drift {drift:.1e} |dH| {hdev:.1e} neck |W| {neck:.4f} verdict {verdict.verdict}; "
                      f"cylinder W_z {Wz:.10f} |T| {T:.1e}")


def test_criterion_10_alexandrov(cylinder_entry, acceptance):
    res = alexandrov_criterion(cylinder_entry.surface, cylinder_entry.cycles["equator"])
    ok = abs(res.value - np.pi) < 1e-6 and res.enclosing.r < res.bound and res.finite_family
    acceptance(10, ok, f"value {res.value:.10f} radius {res.enclosing.r:.6f} < bound {res.bound:g}: "
                       f"finite family {res.finite_family}")
