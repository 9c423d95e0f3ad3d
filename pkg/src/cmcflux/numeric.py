"""Shared numerical primitives: vectors, path quadrature, ODE integration, finite differences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp

Vec3 = np.ndarray

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = leggauss(_GL_ORDER)


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature does not reach the requested tolerance."""

    def __init__(self, message: str, estimate=None, error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SingularityError(RuntimeError):
    """Raised when an ODE trajectory runs into a singular configuration."""

    def __init__(self, message: str, location: float):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class Tolerances:
    quad_abs: float = 1e-10
    quad_rel: float = 1e-10
    ode_tol: float = 1e-12
    fd_step: float = 1e-5
    max_level: int = 14

    def __post_init__(self):
        for name in ("quad_abs", "quad_rel", "ode_tol", "fd_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_level < 2:
            raise ValueError("max_level must be >= 2")


DEFAULT_TOL = Tolerances()


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=float)


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise inner product over the last axis."""
    return np.einsum("...i,...i->...", a, b)


def norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(dot(a, a))


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.cross(a, b)


# ---------------------------------------------------------------------------
# quadrature


def _composite_gauss(fun, a: float, b: float, tol: Tolerances, min_level: int = 1):
    """Composite Gauss-Legendre on [a, b] with panel doubling.

    ``fun`` maps a 1-D array of abscissae to an array whose first axis runs
    over them. Returns (estimate, error_estimate, panels).
    """
    prev = None
    err = float("inf")
    for level in range(0, tol.max_level + 1):
        panels = 2**level
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        vals = np.asarray(fun(t))
        est = np.tensordot(w, vals, axes=(0, 0))
        if prev is not None:
            err = float(np.max(np.abs(est - prev)))
            scale = float(np.max(np.abs(est))) if np.size(est) else 0.0
            if level >= min_level and err <= max(tol.quad_abs, tol.quad_rel * scale):
                return est, err, panels
        prev = est
    raise QuadratureError(
        f"quadrature did not converge after {2**tol.max_level} panels "
        f"(achieved error estimate {err:.3e})",
        estimate=prev,
        error=err,
    )


class PathSegment:
    """One smooth piece of a complex path, parametrized over t in [0, 1]."""

    def point(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class LineSegment(PathSegment):
    start: complex
    end: complex

    def point(self, t):
        return self.start + (self.end - self.start) * np.asarray(t)

    def velocity(self, t):
        return np.full(np.shape(t), self.end - self.start, dtype=complex)

    def distance_to(self, p: complex) -> float:
        d = self.end - self.start
        if d == 0:
            return abs(p - self.start)
        s = ((p - self.start) * np.conj(d)).real / abs(d) ** 2
        s = min(max(s, 0.0), 1.0)
        return abs(p - (self.start + s * d))


@dataclass(frozen=True)
class ArcSegment(PathSegment):
    center: complex
    radius: float
    theta0: float
    sweep: float

    def point(self, t):
        return self.center + self.radius * np.exp(1j * (self.theta0 + self.sweep * np.asarray(t)))

    def velocity(self, t):
        ang = self.theta0 + self.sweep * np.asarray(t)
        return 1j * self.sweep * self.radius * np.exp(1j * ang)


@dataclass(frozen=True)
class ComplexPath:
    """Piecewise-smooth path in the complex plane."""

    segments: tuple[PathSegment, ...]
    closed: bool = False

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a path needs at least one segment")
        if self.closed:
            a = complex(self.segments[0].point(0.0))
            b = complex(self.segments[-1].point(1.0))
            if abs(a - b) > 1e-12 * max(1.0, abs(a)):
                raise ValueError(f"closed path endpoints differ: {a} vs {b}")

    @classmethod
    def circle(cls, center: complex, radius: float, turns: int = 1, theta0: float = 0.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        if turns == 0:
            raise ValueError("turns must be nonzero")
        seg = ArcSegment(complex(center), float(radius), float(theta0), 2 * np.pi * turns)
        return cls((seg,), closed=True)

    @classmethod
    def polyline(cls, points: Sequence[complex], closed: bool = False):
        pts = [complex(p) for p in points]
        if closed and pts[0] != pts[-1]:
            pts.append(pts[0])
        segs = tuple(LineSegment(a, b) for a, b in zip(pts[:-1], pts[1:]))
        return cls(segs, closed=closed)

    def concat(self, other: "ComplexPath", closed: bool = False) -> "ComplexPath":
        return ComplexPath(self.segments + other.segments, closed=closed)

    def sample(self, n: int = 64) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n)
        return np.concatenate([seg.point(t) for seg in self.segments])

    def clearance(self, points: Sequence[complex], n: int = 256) -> float:
        """Smallest sampled distance from the path to any of ``points``."""
        if len(points) == 0:
            return float("inf")
        zs = self.sample(n)
        return float(np.min(np.abs(zs[:, None] - np.asarray(points, dtype=complex)[None, :])))


def integrate_path(f: Callable, path: ComplexPath, tol: Tolerances = DEFAULT_TOL, *, return_error=False):
    """Contour integral of ``f(z) dz`` along ``path``.

    ``f`` must accept a 1-D complex array; it may return shape (n,) or (n, k)
    for vector integrands.
    """
    total = 0.0
    err_total = 0.0
    for seg in path.segments:

        def integrand(t, seg=seg):
            vals = np.asarray(f(seg.point(t)))
            vel = seg.velocity(t)
            return vals * (vel if vals.ndim == 1 else vel[:, None])

        est, err, _ = _composite_gauss(integrand, 0.0, 1.0, tol)
        total = total + est
        err_total += err
    if return_error:
        return total, err_total
    return total


def integrate_real_1form(f: Callable, length: float, tol: Tolerances = DEFAULT_TOL, *, return_error=False):
    """Componentwise integral of a vector-valued ``f(s)`` over ``[0, length]``.

    ``f`` takes an array of arclength values and returns an array of shape (n, 3).
    """
    est, err, _ = _composite_gauss(f, 0.0, float(length), tol)
    est = np.asarray(est, dtype=float)
    if return_error:
        return est, err
    return est


def winding_number(path: ComplexPath, point: complex, tol: Tolerances = DEFAULT_TOL) -> int:
    val = integrate_path(lambda z: 1.0 / (z - point), path, tol)
    n = val / (2j * np.pi)
    k = int(round(n.real))
    if abs(n - k) > 1e-6:
        raise ValueError(f"path passes too close to {point} to define a winding number")
    return k


# ---------------------------------------------------------------------------
# ODE


@dataclass
class Trajectory:
    """Dense ODE solution; call it with parameter values to interpolate the state."""

    t: np.ndarray
    y: np.ndarray
    _sol: Callable
    events: list

    def __call__(self, s):
        return self._sol(s)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])


def ode_solve(
    rhs: Callable,
    y0,
    span: tuple[float, float],
    tol: Tolerances = DEFAULT_TOL,
    *,
    singular: Callable | None = None,
    events: Sequence[Callable] = (),
) -> Trajectory:
    """Integrate ``y' = rhs(s, y)`` over ``span`` with dense output.

    ``singular(s, y)`` is an optional guard; the solve aborts with
    :class:`SingularityError` where it crosses zero. Extra ``events`` are
    passed to the integrator and reported in ``Trajectory.events``.
    """
    evs = list(events)
    if singular is not None:

        def guard(s, y):
            return singular(s, y)

        guard.terminal = True
        evs = evs + [guard]
    sol = solve_ivp(
        rhs,
        span,
        np.asarray(y0, dtype=float),
        method="DOP853",
        rtol=tol.ode_tol,
        atol=tol.ode_tol,
        dense_output=True,
        events=evs or None,
    )
    if singular is not None and len(sol.t_events[-1]):
        loc = float(sol.t_events[-1][0])
        raise SingularityError(f"trajectory became singular at s = {loc:.6g}", loc)
    if not sol.success:
        raise SingularityError(f"integration failed: {sol.message}", float(sol.t[-1]))
    found = list(sol.t_events[: len(events)]) if events else []
    return Trajectory(sol.t, sol.y, sol.sol, found)


# ---------------------------------------------------------------------------
# finite differences


def fd_jet(f: Callable, u, v, order: int = 2, step: float = 1e-5, scale: float = 1.0):
    """Finite-difference partial derivatives of ``f(u, v) -> (n, 3)``.

    First derivatives use central differences with ``h = step * scale``.
    Second derivatives use five-point stencils with ``100 h`` so roundoff
    stays well below truncation error.
    Returns ``(fu, fv)`` for order 1 and ``(fu, fv, fuu, fuv, fvv)`` for order 2.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    h = step * scale
    fu = (f(u + h, v) - f(u - h, v)) / (2 * h)
    fv = (f(u, v + h) - f(u, v - h)) / (2 * h)
    if order == 1:
        return fu, fv
    k = 100 * h
    c = f(u, v)
    fuu = (-f(u + 2 * k, v) + 16 * f(u + k, v) - 30 * c + 16 * f(u - k, v) - f(u - 2 * k, v)) / (12 * k * k)
    fvv = (-f(u, v + 2 * k) + 16 * f(u, v + k) - 30 * c + 16 * f(u, v - k) - f(u, v - 2 * k)) / (12 * k * k)

    def d_u(g, vv):
        return (-g(u + 2 * k, vv) + 8 * g(u + k, vv) - 8 * g(u - k, vv) + g(u - 2 * k, vv)) / (12 * k)

    fuv = (
        -d_u(f, v + 2 * k) + 8 * d_u(f, v + k) - 8 * d_u(f, v - k) + d_u(f, v - 2 * k)
    ) / (12 * k)
    return fu, fv, fuu, fuv, fvv


def central_diff(values: Sequence[np.ndarray], h: float) -> np.ndarray:
    """Derivative at the centre of a symmetric stencil of 3 or 5 samples."""
    if len(values) == 3:
        m, _, p = values
        return (p - m) / (2 * h)
    if len(values) == 5:
        m2, m1, _, p1, p2 = values
        return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h)
    raise ValueError("stencil must have 3 or 5 samples")


def second_diff(values: Sequence[np.ndarray], h: float) -> np.ndarray:
    if len(values) == 3:
        m, c, p = values
        return (p - 2 * c + m) / (h * h)
    if len(values) == 5:
        m2, m1, c, p1, p2 = values
        return (-m2 + 16 * m1 - 30 * c + 16 * p1 - p2) / (12 * h * h)
    raise ValueError("stencil must have 3 or 5 samples")
