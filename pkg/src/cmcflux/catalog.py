"""Reference surfaces with analytic jets and known invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial.transform import Rotation

from .forms import Cycle
from .geometry import Jet, ParametricSurface, PreconditionViolation
from .numeric import DEFAULT_TOL, SingularityError, Tolerances, ode_solve
from .weierstrass import (
    RationalFn,
    Verdict,
    WeierstrassData,
    WeierstrassSurface,
    deformable,
    puncture_circles,
    regularity_check,
    well_defined,
)

TWO_PI = 2.0 * np.pi


@dataclass
class CatalogEntry:
    name: str
    surface: ParametricSurface
    H: float | None
    K_range: tuple[float, float] | None = None
    cycles: dict[str, Cycle] = field(default_factory=dict)
    conjugate: ParametricSurface | None = None
    family: Callable[[float], ParametricSurface] | None = None
    weierstrass: WeierstrassData | None = None
    z_cycles: list = field(default_factory=list)
    notes: str = ""
    profile: "DelaunayProfile | None" = None

    @property
    def cycle_labels(self) -> list[str]:
        return list(self.cycles) + [label for label, _ in self.z_cycles if label not in self.cycles]


# ---------------------------------------------------------------------------
# minimal surfaces as real parts of holomorphic null curves


def holomorphic_surface(F, dF, ddF, t: float = 0.0, **kw) -> ParametricSurface:
    """``x_t(u, v) = Re(e^{-it} F(u + iv))`` for a holomorphic null curve F."""
    c = np.exp(-1j * t)

    def pos(u, v):
        return (c * F(u + 1j * v)).real

    def der(u, v):
        z = u + 1j * v
        f = c * dF(z)
        df = c * ddF(z)
        return Jet(f.real, -f.imag, df.real, -df.imag, -df.real)

    kw.setdefault("declared_H", 0.0)
    return ParametricSurface(pos, der, **kw)


def _stack(*cols):
    return np.stack(np.broadcast_arrays(*cols), -1)


def _catenoid_F(c):
    F = lambda z: c * _stack(np.cos(z), np.sin(z), -1j * z)
    dF = lambda z: c * _stack(-np.sin(z), np.cos(z), -1j * np.ones_like(z))
    ddF = lambda z: c * _stack(-np.cos(z), -np.sin(z), np.zeros_like(z))
    return F, dF, ddF


def catenoid_family(c: float = 1.0, vmax: float = 1.0) -> Callable[[float], ParametricSurface]:
    """``t -> cos t (catenoid) + sin t (helicoid)`` on the strip ``|v| <= vmax``."""
    F, dF, ddF = _catenoid_F(c)

    def member(t: float) -> ParametricSurface:
        return holomorphic_surface(F, dF, ddF, t, domain=(0.0, TWO_PI, -vmax, vmax),
                                   periods=(TWO_PI, None) if t == 0.0 else (None, None),
                                   name=f"catenoid-family(t={t:.4g})")

    return member


def catenoid(c: float = 1.0, vmax: float = 1.0) -> CatalogEntry:
    """``(c cosh v cos u, c cosh v sin u, c v)``; the waist circle v = 0 has length 2 pi c."""
    fam = catenoid_family(c, vmax)
    surf = fam(0.0)
    surf.name = "catenoid"
    conj = fam(0.5 * np.pi)
    conj.name = "helicoid"
    waist = Cycle.coordinate_line((0.0, 0.0), (1.0 / c, 0.0), TWO_PI * c, "waist", unit_speed=True)
    return CatalogEntry("catenoid", surf, 0.0, (-1.0 / c**2, -1.0 / (c**2 * np.cosh(vmax) ** 4)),
                        {"waist": waist}, conj, fam,
                        notes="conjugate is the helicoid c(-sinh v sin u, sinh v cos u, -u)")


def helicoid(c: float = 1.0, vmax: float = 1.0) -> CatalogEntry:
    fam = catenoid_family(c, vmax)
    surf = fam(0.5 * np.pi)
    surf.name = "helicoid"
    minus_cat = fam(np.pi)
    return CatalogEntry("helicoid", surf, 0.0, (-1.0 / c**2, -1.0 / (c**2 * np.cosh(vmax) ** 4)), {},
                        minus_cat, lambda t: fam(0.5 * np.pi + t),
                        notes="simply connected; conjugate is the negated catenoid")


def enneper(R: float = 1.0) -> CatalogEntry:
    """Enneper's surface from g = z, dh = z dz on the square ``|u|, |v| <= R``."""
    F = lambda z: _stack((z - z**3 / 3) / 2, 1j * (z + z**3 / 3) / 2, z**2 / 2)
    dF = lambda z: _stack((1 - z**2) / 2, 1j * (1 + z**2) / 2, z)
    ddF = lambda z: _stack(-z, 1j * z, np.ones_like(z))

    def fam(t):
        return holomorphic_surface(F, dF, ddF, t, domain=(-R, R, -R, R), name=f"enneper(t={t:.4g})")

    surf = fam(0.0)
    surf.name = "enneper"
    data = WeierstrassData(RationalFn.from_roots([(0, 1)]), RationalFn.from_roots([(0, 1)]))
    return CatalogEntry("enneper", surf, 0.0, None, {}, fam(0.5 * np.pi), fam, data,
                        notes="Hopf coefficient is the constant -1/2")


# ---------------------------------------------------------------------------
# sphere and cylinder


def sphere(r: float = 1.0, vmax: float = 3.0) -> CatalogEntry:
    """Mercator chart ``r (cos u / cosh v, sin u / cosh v, tanh v)``; outward normal, H = -1/r."""

    def pos(u, v):
        s = 1.0 / np.cosh(v)
        return r * _stack(s * np.cos(u), s * np.sin(u), np.tanh(v))

    def der(u, v):
        s, tau = 1.0 / np.cosh(v), np.tanh(v)
        cu, su = np.cos(u), np.sin(u)
        z = np.zeros_like(u)
        w = s * (tau**2 - s**2)
        return Jet(
            r * _stack(-s * su, s * cu, z),
            r * _stack(-s * tau * cu, -s * tau * su, s**2),
            r * _stack(-s * cu, -s * su, z),
            r * _stack(s * tau * su, -s * tau * cu, z),
            r * _stack(w * cu, w * su, -2 * s**2 * tau),
        )

    surf = ParametricSurface(pos, der, domain=(0.0, TWO_PI, -vmax, vmax), declared_H=-1.0 / r,
                             periods=(TWO_PI, None), name="sphere")
    equator = Cycle.coordinate_line((0.0, 0.0), (1.0 / r, 0.0), TWO_PI * r, "equator", unit_speed=True)
    latitude = Cycle.coordinate_line((0.0, 0.5), (1.0, 0.0), TWO_PI, "latitude")
    return CatalogEntry("sphere", surf, -1.0 / r, (1.0 / r**2, 1.0 / r**2), {"equator": equator, "latitude": latitude},
                        notes="caps at the poles are added when meshing")


def cylinder(r: float = 1.0, height: float = 2.0) -> CatalogEntry:
    """``(r cos(u/r), -r sin(u/r), v)``: inward normal, H = 1/(2r).

    Along the equator traversed with increasing u the conormal ``x_*(J gamma')`` is +e3.
    """

    def pos(u, v):
        return _stack(r * np.cos(u / r), -r * np.sin(u / r), v)

    def der(u, v):
        c, s = np.cos(u / r), np.sin(u / r)
        z = np.zeros_like(u)
        o = np.ones_like(u)
        return Jet(_stack(-s, -c, z), _stack(z, z, o), _stack(-c / r, s / r, z), _stack(z, z, z), _stack(z, z, z))

    P = TWO_PI * r
    surf = ParametricSurface(pos, der, domain=(0.0, P, -0.5 * height, 0.5 * height), declared_H=0.5 / r,
                             periods=(P, None), name="cylinder")
    equator = Cycle.coordinate_line((0.0, 0.0), (1.0, 0.0), P, "equator", unit_speed=True)
    return CatalogEntry("cylinder", surf, 0.5 / r, (0.0, 0.0), {"equator": equator})


# ---------------------------------------------------------------------------
# Delaunay surfaces


@dataclass(frozen=True)
class DelaunayParams:
    """Profile data: mean curvature H > 0 and the conserved value a of ``r sin psi - H r^2``.

    Branches: unduloid for 0 < a < 1/(4H), cylinder at a = 1/(4H), nodoid for a < 0.
    a = 0 is the degenerate chain of spheres.
    """

    H: float
    a: float

    @property
    def branch(self) -> str:
        crit = 0.25 / self.H
        if abs(self.a - crit) <= 1e-12 * crit:
            return "cylinder"
        if 0.0 < self.a < crit:
            return "unduloid"
        if self.a < 0.0:
            return "nodoid"
        if self.a == 0.0:
            return "sphere-chain"
        return "invalid"

    def validate(self):
        if not self.H > 0.0:
            raise PreconditionViolation("Delaunay profiles need H > 0 in this orientation")
        b = self.branch
        if b == "invalid":
            raise PreconditionViolation(f"a = {self.a} exceeds 1/(4H) = {0.25 / self.H}")
        if b == "sphere-chain":
            raise SingularityError("a = 0 degenerates into a chain of spheres (r reaches 0)", 0.0)

    @property
    def start_radius(self) -> float:
        """Radius where psi = pi/2: the neck of an unduloid, the outer equator of a nodoid."""
        disc = np.sqrt(max(0.0, 1.0 - 4.0 * self.a * self.H))
        if self.branch == "unduloid":
            return (1.0 - disc) / (2.0 * self.H)
        return (1.0 + disc) / (2.0 * self.H)


def profile_rhs(H: float):
    """Profile ODE in the conformal parameter: r' = r cos psi, z' = r sin psi, psi' = 2 H r - sin psi."""

    def rhs(s, y):
        r, _, psi = y
        return np.array([r * np.cos(psi), r * np.sin(psi), 2.0 * H * r - np.sin(psi)])

    return rhs


def arclength_profile_rhs(H: float):
    """Unit-speed form: r' = cos psi, z' = sin psi, psi' = 2H - sin(psi)/r."""

    def rhs(s, y):
        r, _, psi = y
        return np.array([np.cos(psi), np.sin(psi), 2.0 * H - np.sin(psi) / r])

    return rhs


def conserved_quantity(H: float, r, psi):
    return r * np.sin(psi) - H * r * r


@dataclass
class DelaunayProfile:
    params: DelaunayParams
    period: float
    forward: object
    backward: object
    drift: float

    def state(self, s):
        s = np.asarray(s, float)
        out = np.empty((3,) + s.shape)
        neg = s < 0
        if np.any(~neg):
            out[:, ~neg] = self.forward(s[~neg])
        if np.any(neg):
            out[:, neg] = self.backward(s[neg])
        return out


def delaunay_profile(params: DelaunayParams, tol: Tolerances = DEFAULT_TOL, periods_ahead: float = 2.0,
                     ) -> DelaunayProfile:
    params.validate()
    H = params.H
    rhs = profile_rhs(H)
    r0 = params.start_radius
    y0 = np.array([r0, 0.0, 0.5 * np.pi])
    if params.branch == "cylinder":
        period = TWO_PI  # any length works; the profile is constant
    else:
        if params.branch == "unduloid":
            target, direction = 0.5 * np.pi, -1.0
        else:
            target, direction = 2.5 * np.pi, 1.0

        def back(s, y):
            return y[2] - target

        back.direction = direction
        probe = ode_solve(rhs, y0, (0.0, 200.0), tol, singular=lambda s, y: y[0] - 1e-9 * r0, events=[back])
        hits = [t for t in probe.events[0] if t > 1e-6]
        if not hits:
            raise SingularityError("no profile period found", probe.span[1])
        period = float(hits[0])
    guard = lambda s, y: y[0] - 1e-9 * r0
    fwd = ode_solve(rhs, y0, (0.0, periods_ahead * period), tol, singular=guard)
    bwd = ode_solve(rhs, y0, (0.0, -period), tol, singular=guard)
    s = np.linspace(0.0, period, 2001)
    r, _, psi = fwd(s)
    drift = float(np.max(np.abs(conserved_quantity(H, r, psi) - params.a)))
    return DelaunayProfile(params, period, fwd, bwd, drift)


def delaunay_surface(profile: DelaunayProfile, name: str | None = None) -> ParametricSurface:
    """Surface of revolution ``(r cos v, r sin v, z)`` over the conformal profile parameter u."""
    H = profile.params.H
    rhs = profile_rhs(H)

    def pos(u, v):
        r, z, _ = profile.state(u)
        return _stack(r * np.cos(v), r * np.sin(v), z)

    def der(u, v):
        r, z, psi = profile.state(u)
        rp, zp, pp = rhs(0.0, (r, z, psi))
        rpp = rp * np.cos(psi) - r * np.sin(psi) * pp
        zpp = rp * np.sin(psi) + r * np.cos(psi) * pp
        c, s = np.cos(v), np.sin(v)
        zero = np.zeros_like(u)
        return Jet(
            _stack(rp * c, rp * s, zp),
            _stack(-r * s, r * c, zero),
            _stack(rpp * c, rpp * s, zpp),
            _stack(-rp * s, rp * c, zero),
            _stack(-r * c, -r * s, zero),
        )

    return ParametricSurface(pos, der, domain=(0.0, profile.period, 0.0, TWO_PI), declared_H=H,
                             periods=(None, TWO_PI), name=name or profile.params.branch)


def delaunay(params: DelaunayParams, tol: Tolerances = DEFAULT_TOL) -> CatalogEntry:
    """Unduloid, nodoid or cylinder of mean curvature H (inward normal).

    The cycle ``neck`` is the parallel at u = 0 traversed with decreasing
    angle, which makes the conormal point along +e3.
    """
    profile = delaunay_profile(params, tol)
    surf = delaunay_surface(profile)
    r0 = params.start_radius
    neck = Cycle.coordinate_line((0.0, TWO_PI), (0.0, -1.0 / r0), TWO_PI * r0, "neck", unit_speed=True)
    return CatalogEntry(params.branch, surf, params.H, None, {"neck": neck},
                        notes=f"profile period {profile.period:.12g}, conserved drift {profile.drift:.2e}",
                        profile=profile)


# ---------------------------------------------------------------------------
# Weierstrass-represented annuli


def catenoid_annulus(z0: complex = 1.0) -> CatalogEntry:
    """g = z, dh = dz/z on the punctured plane: the catenoid in log-polar coordinates."""
    data = WeierstrassData(RationalFn.from_roots([(0, 1)]), RationalFn.from_roots([(0, -1)]), (0,))
    surf = WeierstrassSurface(data, z0, 0.0, domain=(-2.0, 2.0, -2.0, 2.0), name="catenoid-annulus")
    circles = puncture_circles(data, 0.5)
    cyc = {"puncture[0]": Cycle.circle((0.0, 0.0), 0.5, 1, "puncture[0]")}
    return CatalogEntry("catenoid-annulus", surf, 0.0, None, cyc, surf.rotated(0.5 * np.pi), surf.rotated, data,
                        circles, notes="well defined but the imaginary puncture period is (0, 0, 2 pi i)")


@dataclass
class PuncturedFamily:
    data: WeierstrassData
    entry: CatalogEntry
    well_defined: Verdict
    deformable: Verdict
    branch_points: list


def _basepoint(points) -> complex:
    pts = np.asarray(points, complex)
    c = complex(pts.mean()) if len(pts) else 0.0
    for cand in (c + 0.5j, c - 0.5j, c + 0.5, c + 1.0j, c + 2.0):
        if all(abs(cand - p) > 0.4 for p in pts):
            return cand
    raise PreconditionViolation("could not place a basepoint away from the punctures")


def punctured_plane_data(p_list, k: int = 1) -> WeierstrassData:
    """g = prod (z - p_i)^(2k), dh = dz, with every p_i removed."""
    g = RationalFn.from_roots([(complex(p), 2 * int(k)) for p in p_list])
    return WeierstrassData(g, RationalFn.constant(1.0), tuple(complex(p) for p in p_list))


def punctured_plane_family(p_list, k: int = 1, tol: Tolerances = DEFAULT_TOL, radius: float = 0.5,
                           z0: complex | None = None) -> PuncturedFamily:
    """Punctured-plane minimal surfaces with verdicts on the puncture circles of the given radius.

    When a real period is nonzero the surface is still returned, evaluated on
    simply-connected charts; the entry notes say so.
    """
    data = punctured_plane_data(p_list, k)
    circles = puncture_circles(data, radius)
    wd = well_defined(data, circles, tol)
    df = deformable(data, circles, tol)
    z0 = _basepoint(data.punctures) if z0 is None else complex(z0)
    name = f"punctured-plane(n={len(data.punctures)}, k={k})"
    surf = WeierstrassSurface(data, z0, 0.0, tol=tol, name=name)
    notes = []
    if not wd.holds:
        notes.append(f"real period {wd.max_value:.3g} on {wd.witness}: positions are chart-local")
    if not df.holds:
        notes.append(f"imaginary period {df.max_value:.3g} on {df.witness}")
    cyc = {label: Cycle.circle((path.segments[0].center.real, path.segments[0].center.imag), radius, 1, label)
           for label, path in circles}
    entry = CatalogEntry(name, surf, 0.0, None, cyc, surf.rotated(0.5 * np.pi), surf.rotated, data, circles,
                         notes="; ".join(notes))
    return PuncturedFamily(data, entry, wd, df, regularity_check(data))


# ---------------------------------------------------------------------------
# controls


def paraboloid_graph() -> CatalogEntry:
    """The graph z = u^2 + v^2; mean curvature is not constant."""

    def pos(u, v):
        return _stack(u, v, u * u + v * v)

    def der(u, v):
        z, o = np.zeros_like(u), np.ones_like(u)
        return Jet(_stack(o, z, 2 * u), _stack(z, o, 2 * v), _stack(z, z, 2 * o), _stack(z, z, z), _stack(z, z, 2 * o))

    surf = ParametricSurface(pos, der, domain=(-1.0, 1.0, -1.0, 1.0), name="paraboloid")
    return CatalogEntry("paraboloid", surf, None, None, notes="non-CMC control")


def _paraboloid_sigma(r):
    q = np.sqrt(1.0 + 4.0 * r * r)
    return q - np.arctanh(1.0 / q)


_SIGMA_HALF = float(_paraboloid_sigma(0.5))


def _paraboloid_radius(sigma):
    """Invert sigma(r) by Newton's method; d sigma / dr = q / r."""
    sigma = np.asarray(sigma, float) + _SIGMA_HALF
    r = 0.5 * np.exp(sigma - _SIGMA_HALF)
    for _ in range(60):
        q = np.sqrt(1.0 + 4.0 * r * r)
        step = (_paraboloid_sigma(r) - sigma) * r / q
        r = np.maximum(r - step, 0.5 * r)
        if np.max(np.abs(step)) < 1e-15 * np.max(r):
            break
    return r


def paraboloid_isothermal() -> CatalogEntry:
    """The same paraboloid in isothermal coordinates (sigma, theta).

    ``sigma = 0`` is the parallel r = 1/2, so graph point (0.5, 0) is (0, 0) here.
    """

    def parts(u):
        r = _paraboloid_radius(u)
        q2 = 1.0 + 4.0 * r * r
        return r, r / np.sqrt(q2), r / q2**2

    def pos(u, v):
        r, _, _ = parts(u)
        return _stack(r * np.cos(v), r * np.sin(v), r * r)

    def der(u, v):
        r, rs, rss = parts(u)
        c, s = np.cos(v), np.sin(v)
        z = np.zeros_like(u)
        return Jet(
            _stack(rs * c, rs * s, 2 * r * rs),
            _stack(-r * s, r * c, z),
            _stack(rss * c, rss * s, 2 * rs * rs + 2 * r * rss),
            _stack(-rs * s, rs * c, z),
            _stack(-r * c, -r * s, z),
        )

    surf = ParametricSurface(pos, der, domain=(-0.5, 0.5, 0.0, TWO_PI), periods=(None, TWO_PI),
                             name="paraboloid-isothermal")
    return CatalogEntry("paraboloid-isothermal", surf, None, None, notes="non-CMC control, isothermal chart")


def unrolling_cylinder(t: float, kappa0: float = 1.0, width: float = 1.0) -> ParametricSurface:
    """Isometric bending of a flat strip: curvature ``kappa0 + t`` in the u direction."""
    kap = kappa0 + t

    def pos(u, v):
        return _stack(np.sin(kap * u) / kap, (1.0 - np.cos(kap * u)) / kap, v)

    def der(u, v):
        c, s = np.cos(kap * u), np.sin(kap * u)
        z, o = np.zeros_like(u), np.ones_like(u)
        return Jet(_stack(c, s, z), _stack(z, z, o), _stack(-kap * s, kap * c, z), _stack(z, z, z), _stack(z, z, z))

    return ParametricSurface(pos, der, domain=(-width, width, -width, width), name=f"unrolling(t={t:.4g})")


def rigid_motion_family(surface: ParametricSurface, omega, velocity) -> Callable[[float], ParametricSurface]:
    """``t -> exp(t [omega]_x) x + t velocity``."""
    omega = np.asarray(omega, float)
    velocity = np.asarray(velocity, float)

    def member(t: float) -> ParametricSurface:
        R = Rotation.from_rotvec(t * omega).as_matrix()
        return surface.transformed(R, t * velocity, name=f"motion(t={t:.4g})")

    return member


# ---------------------------------------------------------------------------
# registry


REGISTRY: dict[str, Callable[..., CatalogEntry]] = {
    "catenoid": lambda tol: catenoid(),
    "helicoid": lambda tol: helicoid(),
    "enneper": lambda tol: enneper(),
    "sphere": lambda tol: sphere(),
    "cylinder": lambda tol: cylinder(),
    "unduloid": lambda tol: delaunay(DelaunayParams(0.5, 0.3), tol),
    "nodoid": lambda tol: delaunay(DelaunayParams(0.5, -0.3), tol),
    "catenoid-annulus": lambda tol: catenoid_annulus(),
    "punctured-plane-n1": lambda tol: punctured_plane_family([0.0], 1, tol).entry,
    "punctured-plane-n2": lambda tol: punctured_plane_family([1.0, -1.0], 1, tol).entry,
    "paraboloid": lambda tol: paraboloid_graph(),
}


def get(name: str, tol: Tolerances = DEFAULT_TOL) -> CatalogEntry:
    if name not in REGISTRY:
        raise KeyError(f"unknown surface {name!r}; choose from {', '.join(REGISTRY)}")
    return REGISTRY[name](tol)
