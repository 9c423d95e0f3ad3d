"""Force and torque 1-forms of constant mean curvature surfaces and their periods.

For a surface with constant mean curvature H,

    force:   w(X) = (H x + xi) x x_*(X)
    torque:  s(X) = (2/3) H x x (x x x_*(X)) + x x x_*(J X)

are closed, so their integrals over a cycle depend only on its homology class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .enclosing import Circle, smallest_enclosing_circle
from .geometry import FrameData, ParametricSurface, PreconditionViolation, frame_at, mean_curvature_profile
from .numeric import DEFAULT_TOL, Tolerances, cross, dot, integrate_real_1form, norm

H_GUARD = 1e-6


class NonConstantMeanCurvature(ValueError):
    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


class TransversalityError(ValueError):
    def __init__(self, message: str, location: float):
        super().__init__(message)
        self.location = location


def constant_H(surface: ParametricSurface, threshold: float = H_GUARD) -> float:
    """The surface's mean curvature after checking it is constant on a sample grid."""
    Hs, _, _ = mean_curvature_profile(surface)
    if surface.declared_H is not None:
        dev = float(np.max(np.abs(Hs - surface.declared_H)))
        value = float(surface.declared_H)
    else:
        value = float(np.mean(Hs))
        dev = float(np.max(np.abs(Hs - value)))
    if dev > threshold:
        raise NonConstantMeanCurvature(f"{surface.name}: mean curvature varies by {dev:.3e}", dev)
    return value


@dataclass(frozen=True)
class VectorOneForm:
    """A vector-valued 1-form; ``evaluate(u, v, X)`` is linear in the coordinate vector X."""

    evaluate: Callable
    kind: str = "custom"
    H: float | None = None
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __call__(self, p, X) -> np.ndarray:
        u, v = p
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, float))
        v = np.atleast_1d(np.asarray(v, float))
        X = np.atleast_2d(np.asarray(X, float))
        out = self.evaluate(u, v, X)
        return out[0] if scalar else out


def _frame(surface, u, v, need_x: bool) -> FrameData:
    return frame_at(surface, (u, v), with_position=need_x)


def force_form(surface: ParametricSurface, origin=None, H: float | None = None) -> VectorOneForm:
    """``X -> (H x + xi) x x_*(X)``; positions are only needed when H != 0."""
    H = constant_H(surface) if H is None else H
    o = np.zeros(3) if origin is None else np.asarray(origin, float)

    def ev(u, v, X):
        f = _frame(surface, u, v, H != 0.0)
        lever = f.normal if H == 0.0 else H * (f.x - o) + f.normal
        return cross(lever, f.push(X))

    return VectorOneForm(ev, "force", H, o)


def torque_form(surface: ParametricSurface, origin=None, H: float | None = None,
                self_check: float = 1e-10) -> VectorOneForm:
    """``X -> (2/3) H x x (x x x_*X) + x x x_*(JX)`` about ``origin``.

    The equivalent form ``(1/3) x x [2 (H x + xi) x x_*X + x_*(JX)]`` is evaluated
    alongside; a disagreement beyond ``self_check`` (relative) raises.
    """
    H = constant_H(surface) if H is None else H
    o = np.zeros(3) if origin is None else np.asarray(origin, float)

    def ev(u, v, X):
        f = _frame(surface, u, v, True)
        x = f.x - o
        dx = f.push(X)
        jdx = cross(f.normal, dx)
        a = (2.0 / 3.0) * H * cross(x, cross(x, dx)) + cross(x, jdx)
        b = cross(x, 2.0 * cross(H * x + f.normal, dx) + jdx) / 3.0
        scale = np.max(norm(x) * norm(dx) * (1.0 + abs(H) * norm(x))) + 1e-300
        gap = np.max(norm(a - b))
        if gap > self_check * scale:
            raise RuntimeError(f"torque form variants disagree by {gap:.3e}")
        return a

    return VectorOneForm(ev, "torque", H, o)


def area_vector_form(surface: ParametricSurface, origin=None) -> VectorOneForm:
    """``X -> x x x_*(X)``; its exterior derivative is twice the vector area element, so it is not closed."""
    o = np.zeros(3) if origin is None else np.asarray(origin, float)

    def ev(u, v, X):
        f = _frame(surface, u, v, True)
        return cross(f.x - o, f.push(X))

    return VectorOneForm(ev, "custom", None, o)


# ---------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class Cycle:
    """Closed curve ``s in [0, length] -> (u, v)`` in a surface's parameter domain."""

    point: Callable  # s -> (u, v)
    velocity: Callable  # s -> (du/ds, dv/ds)
    length: float
    label: str = "cycle"
    unit_speed: bool = False

    @classmethod
    def coordinate_line(cls, start, direction, length: float, label: str = "cycle", unit_speed: bool = False):
        """Straight line in parameter space, closed through a domain period."""
        u0, v0 = map(float, start)
        du, dv = map(float, direction)

        def point(s):
            s = np.asarray(s, float)
            return u0 + du * s, v0 + dv * s

        def velocity(s):
            s = np.asarray(s, float)
            return np.full(s.shape, du), np.full(s.shape, dv)

        return cls(point, velocity, float(length), label, unit_speed)

    @classmethod
    def circle(cls, center, radius: float, turns: int = 1, label: str = "cycle"):
        """Parameter-space circle; s runs over [0, 2 pi radius |turns|]."""
        cu, cv = map(float, center)
        r = float(radius)
        sgn = 1.0 if turns > 0 else -1.0

        def point(s):
            th = sgn * np.asarray(s, float) / r
            return cu + r * np.cos(th), cv + r * np.sin(th)

        def velocity(s):
            th = sgn * np.asarray(s, float) / r
            return -sgn * np.sin(th), sgn * np.cos(th)

        return cls(point, velocity, 2 * np.pi * r * abs(turns), label)

    def reversed(self) -> "Cycle":
        L = self.length

        def point(s):
            return self.point(L - np.asarray(s, float))

        def velocity(s):
            du, dv = self.velocity(L - np.asarray(s, float))
            return -du, -dv

        return Cycle(point, velocity, L, self.label + "~", self.unit_speed)

    def closure_defect(self, surface: ParametricSurface) -> float:
        a = [float(np.asarray(c)) for c in self.point(0.0)]
        b = [float(np.asarray(c)) for c in self.point(self.length)]
        return 0.0 if surface.same_point(a, b) else float(np.hypot(a[0] - b[0], a[1] - b[1]))

    def speed(self, surface: ParametricSurface, s) -> np.ndarray:
        u, v = self.point(s)
        du, dv = self.velocity(s)
        j = surface.jet(u, v)
        return norm(np.asarray(du)[:, None] * j.xu + np.asarray(dv)[:, None] * j.xv)


def _tangent(cycle: Cycle, s):
    du, dv = cycle.velocity(s)
    return np.stack([np.broadcast_to(du, np.shape(s)), np.broadcast_to(dv, np.shape(s))], -1)


def period_of_form(form: VectorOneForm, surface: ParametricSurface, cycle: Cycle, tol: Tolerances = DEFAULT_TOL,
                   *, return_error: bool = False):
    """``int_0^L form(gamma(s), gamma'(s)) ds``."""
    if cycle.closure_defect(surface) > 1e-10:
        raise PreconditionViolation(f"cycle {cycle.label} is not closed on {surface.name}")

    def integrand(s):
        u, v = cycle.point(s)
        return form.evaluate(np.asarray(u, float), np.asarray(v, float), _tangent(cycle, s))

    return integrate_real_1form(integrand, cycle.length, tol, return_error=return_error)


@dataclass
class PeriodReport:
    label: str
    W: np.ndarray | None
    T: np.ndarray | None
    origin: np.ndarray
    methods: dict
    errors: dict

    def to_json(self) -> dict:
        def vec(a):
            return None if a is None else [float(c) for c in a]

        return {
            "cycle": self.label,
            "force": vec(self.W),
            "torque": vec(self.T),
            "origin": vec(self.origin),
            "methods": dict(self.methods),
            "errors": {k: float(v) for k, v in self.errors.items()},
        }


def period_report(surface: ParametricSurface, cycle: Cycle, forms: Sequence[str] = ("force", "torque"),
                  origin=None, tol: Tolerances = DEFAULT_TOL, H: float | None = None) -> PeriodReport:
    o = np.zeros(3) if origin is None else np.asarray(origin, float)
    H = constant_H(surface) if H is None else H
    W = T = None
    errors, methods = {}, {}
    if "force" in forms:
        W, errors["force"] = period_of_form(force_form(surface, o, H), surface, cycle, tol, return_error=True)
        methods["force"] = "direct"
    if "torque" in forms:
        T, errors["torque"] = period_of_form(torque_form(surface, o, H), surface, cycle, tol, return_error=True)
        methods["torque"] = "direct"
    return PeriodReport(cycle.label, W, T, o, methods, errors)


# ---------------------------------------------------------------------------
# closedness


def closedness_defect(form: VectorOneForm, surface: ParametricSurface, p, h: float) -> np.ndarray:
    """Loop sum of ``form`` around the parameter square of side h centred at p.

    Each side is integrated with the one-point midpoint rule, so the result
    is ``h^2 d(form) + O(h^4)``: it decays like h^4 for closed forms and like
    h^2 otherwise.
    """
    u0, v0 = map(float, p)
    half = 0.5 * h
    mids_u = np.array([u0, u0 + half, u0, u0 - half])
    mids_v = np.array([v0 - half, v0, v0 + half, v0])
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    vals = form.evaluate(mids_u, mids_v, dirs)
    return h * vals.sum(axis=0)


def decay_order(hs: Sequence[float], defects: Sequence[np.ndarray]) -> tuple[float, float]:
    """Least-squares fit ``|defect| ~ C h^p``; returns (p, C)."""
    mags = np.array([float(norm(np.asarray(d))) for d in defects])
    slope, intercept = np.polyfit(np.log(hs), np.log(mags), 1)
    return float(slope), float(np.exp(intercept))


# ---------------------------------------------------------------------------
# planar cross-sections


def _section_samples(surface, cycle, V, s):
    u, v = cycle.point(s)
    u = np.atleast_1d(np.asarray(u, float))
    v = np.atleast_1d(np.asarray(v, float))
    f = frame_at(surface, (u, v), with_position=True)
    d = f.push(_tangent(cycle, np.atleast_1d(s)))
    speed = norm(d)
    t = d / speed[:, None]
    conormal = cross(f.normal, t)
    return f, speed, dot(conormal, V)


def _check_section(surface, cycle, V, n_check=257):
    s = np.linspace(0.0, cycle.length, n_check)
    f, _, a = _section_samples(surface, cycle, V, s)
    heights = dot(f.x, V)
    if np.max(heights) - np.min(heights) > 1e-8 * max(1.0, np.max(np.abs(heights))):
        raise PreconditionViolation(f"cycle {cycle.label} does not lie in a plane normal to V")
    i = int(np.argmin(np.abs(a)))
    if abs(a[i]) <= 1e-6:
        # report the arclength position of the tangency
        arc = np.concatenate([[0.0], np.cumsum(0.5 * (np.diff(s)) * (_section_samples(surface, cycle, V, s)[1][1:]
                                                                       + _section_samples(surface, cycle, V, s)[1][:-1]))])
        raise TransversalityError(f"plane is tangent to the surface at arclength {arc[i]:.6g}", float(arc[i]))
    return f.x[0], a


def _section_integral(surface, cycle, V, H, origin, tol):
    def integrand(s):
        f, speed, a = _section_samples(surface, cycle, V, s)
        val = (a * a + H * dot(f.x - origin, f.normal)) / a * speed
        return np.stack([val, speed, H * dot(f.x - origin, f.normal) * speed], -1)

    return integrate_real_1form(integrand, cycle.length, tol)


def cross_section_force(surface: ParametricSurface, V, cycle: Cycle, tol: Tolerances = DEFAULT_TOL,
                        H: float | None = None) -> float:
    """Force component along V of a planar transversal section.

    Evaluates ``int_0^L (a^2 + H <x, xi>) / a ds`` with ``a = <x_*(J gamma'), V>``
    in arclength, with the origin moved into the plane of the cycle. The cycle
    may have any regular parametrisation; the integral is taken with respect
    to arclength.
    """
    V = np.asarray(V, float)
    V = V / np.linalg.norm(V)
    H = constant_H(surface) if H is None else H
    origin, _ = _check_section(surface, cycle, V)
    return float(_section_integral(surface, cycle, V, H, origin, tol)[0])


@dataclass
class AlexandrovResult:
    value: float
    length: float
    enclosing: Circle
    bound: float
    finite_family: bool


def _plane_basis(V):
    a = np.array([1.0, 0.0, 0.0]) if abs(V[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - V * np.dot(a, V)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(V, e1)


def alexandrov_criterion(surface: ParametricSurface, cycle: Cycle, V=(0.0, 0.0, 1.0), tol: Tolerances = DEFAULT_TOL,
                         H: float | None = None, n_samples: int = 512) -> AlexandrovResult:
    """``L + H int <x, xi> ds`` for a symmetric planar cycle and the enclosing-disk test.

    The finite-family verdict fires when the section fits in an open disk of
    radius 1/|H|; the origin is placed at the centre of the smallest enclosing
    circle of the sampled section.
    """
    V = np.asarray(V, float)
    V = V / np.linalg.norm(V)
    H = constant_H(surface) if H is None else H
    if H == 0.0:
        raise PreconditionViolation("the criterion needs H != 0")
    base, a = _check_section(surface, cycle, V)
    if np.max(np.abs(a - 1.0)) > 1e-6:
        raise PreconditionViolation("cycle is not a symmetric section: <x_*(J gamma'), V> != 1")
    s = np.linspace(0.0, cycle.length, n_samples, endpoint=False)
    u, v = cycle.point(s)
    pts = surface.position(np.atleast_1d(u), np.atleast_1d(v))
    e1, e2 = _plane_basis(V)
    circ = smallest_enclosing_circle(np.stack([(pts - base) @ e1, (pts - base) @ e2], -1))
    origin = base + circ.cx * e1 + circ.cy * e2
    val, length, _ = _section_integral(surface, cycle, V, H, origin, tol)
    bound = 1.0 / abs(H)
    return AlexandrovResult(float(val), float(length), circ, bound, bool(circ.r < bound))


# ---------------------------------------------------------------------------
# deformation identities


def exactness_residuals(family: Callable[[float], ParametricSurface], points, t: float = 0.0, delta: float = 1e-4,
                        H: float = 0.0, origin=None) -> dict:
    """Finite-difference checks of the derivative identities of an associate deformation.

    With ``x' = dx_t/dt`` and ``P = H x + xi`` these are
    ``X x' = -P x x_*(X)``, ``xi' = -P x xi`` and
    ``X(x'' + H x' x x + x) = 3 H sigma(X)``. Returns the maximum residual of each.
    """
    u, v = (np.atleast_1d(np.asarray(c, float)) for c in points)
    o = np.zeros(3) if origin is None else np.asarray(origin, float)
    fm, f0, fp = (frame_at(family(t + k * delta), (u, v), with_position=True) for k in (-1, 0, 1))
    x = f0.x - o
    P = H * x + f0.normal
    first = normal = torque = 0.0
    xprime = (fp.x - fm.x) / (2 * delta)
    xi_prime = (fp.normal - fm.normal) / (2 * delta)
    normal = float(np.max(norm(xi_prime + cross(P, f0.normal))))
    sigma = torque_form(family(t), o, H)
    for X, attr in (((1.0, 0.0), "xu"), ((0.0, 1.0), "xv")):
        dm, d0, dp = getattr(fm, attr), getattr(f0, attr), getattr(fp, attr)
        Xxp = (dp - dm) / (2 * delta)
        first = max(first, float(np.max(norm(Xxp + cross(P, d0)))))
        Xxpp = (dp - 2 * d0 + dm) / delta**2
        lhs = Xxpp + H * (cross(Xxp, x) + cross(xprime, d0)) + d0
        rhs = 3 * H * sigma.evaluate(u, v, np.tile(X, (u.size, 1)))
        torque = max(torque, float(np.max(norm(lhs - rhs))))
    return {"first": first, "normal": normal, "torque": torque}
