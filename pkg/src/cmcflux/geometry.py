"""Parametric surfaces and their pointwise differential geometry.

Orientation is fixed once: the unit normal is ``xi = x_u x x_v / |x_u x x_v|``
and the shape operator is defined by ``X xi = -x_*(A X)``, so that
``H = tr A / 2`` and ``K = det A``. A unit sphere with outward normal therefore
has ``H = -1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numeric import central_diff, cross, dot, fd_jet, norm, second_diff

ISOTHERMAL_TOL = 1e-8


class ImmersionError(ValueError):
    """The differential of the surface is degenerate at a requested point."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class PreconditionViolation(ValueError):
    pass


@dataclass(frozen=True)
class Jet:
    xu: np.ndarray
    xv: np.ndarray
    xuu: np.ndarray
    xuv: np.ndarray
    xvv: np.ndarray

    def scaled(self, c: float) -> "Jet":
        return Jet(c * self.xu, c * self.xv, c * self.xuu, c * self.xuv, c * self.xvv)

    def __add__(self, other: "Jet") -> "Jet":
        return Jet(
            self.xu + other.xu,
            self.xv + other.xv,
            self.xuu + other.xuu,
            self.xuv + other.xuv,
            self.xvv + other.xvv,
        )

    def rotated(self, R: np.ndarray) -> "Jet":
        return Jet(*(a @ R.T for a in (self.xu, self.xv, self.xuu, self.xuv, self.xvv)))


def _points(p):
    """Split ``p`` into broadcast u, v arrays; report whether input was scalar."""
    u, v = p
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    u, v = np.broadcast_arrays(np.atleast_1d(np.asarray(u, float)), np.atleast_1d(np.asarray(v, float)))
    return u.ravel(), v.ravel(), scalar


class ParametricSurface:
    """An immersion ``(u, v) -> R^3`` with derivative jets up to order two.

    ``position(u, v)`` and ``derivatives(u, v)`` take 1-D arrays. When
    ``derivatives`` is omitted the jet is obtained by finite differences of
    ``position``. ``periods`` records identifications of the parameter domain
    (for cylinders of revolution), ``punctures`` lists removed parameter
    points with the given ``clearance``.
    """

    def __init__(
        self,
        position: Callable | None,
        derivatives: Callable | None = None,
        *,
        domain: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
        declared_H: float | None = None,
        periods: tuple[float | None, float | None] = (None, None),
        punctures: Sequence[tuple[float, float]] = (),
        clearance: float = 0.0,
        name: str = "surface",
        fd_step: float = 1e-5,
    ):
        if position is None and derivatives is None:
            raise ValueError("need a position map or analytic derivatives")
        self._position = position
        self._derivatives = derivatives
        self.domain = tuple(float(d) for d in domain)
        self.declared_H = declared_H
        self.periods = periods
        self.punctures = tuple((float(a), float(b)) for a, b in punctures)
        self.clearance = float(clearance)
        self.name = name
        self.fd_step = fd_step

    def __repr__(self):
        return f"ParametricSurface({self.name!r}, domain={self.domain}, H={self.declared_H})"

    @property
    def extent(self) -> float:
        u0, u1, v0, v1 = self.domain
        return max(u1 - u0, v1 - v0)

    @property
    def has_position(self) -> bool:
        return self._position is not None

    def position(self, u, v) -> np.ndarray:
        if self._position is None:
            raise PreconditionViolation(f"{self.name}: no position map available")
        u = np.atleast_1d(np.asarray(u, float))
        v = np.atleast_1d(np.asarray(v, float))
        return np.asarray(self._position(u, v), dtype=float)

    def jet(self, u, v) -> Jet:
        u = np.atleast_1d(np.asarray(u, float))
        v = np.atleast_1d(np.asarray(v, float))
        if self._derivatives is not None:
            return self._derivatives(u, v)
        return Jet(*fd_jet(self._position, u, v, order=2, step=self.fd_step, scale=self.extent))

    def sample_grid(self, nu: int = 20, nv: int = 20, margin: float = 0.05):
        """Grid of parameter points inside the domain, away from punctures."""
        u0, u1, v0, v1 = self.domain
        du, dv = (u1 - u0) * margin, (v1 - v0) * margin
        uu, vv = np.meshgrid(np.linspace(u0 + du, u1 - du, nu), np.linspace(v0 + dv, v1 - dv, nv), indexing="ij")
        u, v = uu.ravel(), vv.ravel()
        if self.punctures:
            keep = np.ones(u.shape, bool)
            for a, b in self.punctures:
                keep &= np.hypot(u - a, v - b) > max(self.clearance, 1e-9)
            u, v = u[keep], v[keep]
        return u, v

    def same_point(self, p, q, tol: float = 1e-10) -> bool:
        """Whether parameter points agree modulo the domain periods."""
        for k in range(2):
            d = p[k] - q[k]
            per = self.periods[k]
            if per:
                d = (d + 0.5 * per) % per - 0.5 * per
            if abs(d) > tol:
                return False
        return True

    def transformed(self, rotation=None, translation=None, name: str | None = None) -> "ParametricSurface":
        """Image under the rigid motion ``x -> R x + c``."""
        R = np.eye(3) if rotation is None else np.asarray(rotation, float)
        c = np.zeros(3) if translation is None else np.asarray(translation, float)
        base = self

        def pos(u, v):
            return base.position(u, v) @ R.T + c

        return ParametricSurface(
            pos if self.has_position else None,
            lambda u, v: base.jet(u, v).rotated(R),
            domain=self.domain,
            declared_H=self.declared_H,
            periods=self.periods,
            punctures=self.punctures,
            clearance=self.clearance,
            name=name or f"motion({self.name})",
            fd_step=self.fd_step,
        )


def combine(terms: Sequence[tuple[float, ParametricSurface]], name: str = "combination", declared_H=None,
            translation=None) -> ParametricSurface:
    """Pointwise linear combination ``sum c_i x_i`` of surfaces on a shared domain."""
    terms = [(float(c), s) for c, s in terms]
    ref = terms[0][1]
    shift = np.zeros(3) if translation is None else np.asarray(translation, float)

    def pos(u, v):
        out = shift + sum(c * s.position(u, v) for c, s in terms if c != 0.0)
        return np.broadcast_to(out, (np.size(u), 3)).copy() if np.ndim(out) == 1 else out

    def der(u, v):
        jets = [s.jet(u, v).scaled(c) for c, s in terms]
        out = jets[0]
        for j in jets[1:]:
            out = out + j
        return out

    return ParametricSurface(
        pos if all(s.has_position for _, s in terms) else None,
        der,
        domain=ref.domain,
        declared_H=declared_H,
        periods=ref.periods,
        punctures=ref.punctures,
        clearance=ref.clearance,
        name=name,
        fd_step=ref.fd_step,
    )


@dataclass
class FrameData:
    """Pointwise geometric state; every array has a leading point axis."""

    u: np.ndarray
    v: np.ndarray
    x: np.ndarray | None
    xu: np.ndarray
    xv: np.ndarray
    normal: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    shape: np.ndarray  # (n, 2, 2) in the (d/du, d/dv) basis
    H: np.ndarray
    K: np.ndarray
    jet: Jet = field(repr=False)

    @property
    def metric(self) -> np.ndarray:
        return np.stack([np.stack([self.E, self.F], -1), np.stack([self.F, self.G], -1)], -2)

    @property
    def area_element(self) -> np.ndarray:
        return np.sqrt(self.E * self.G - self.F**2)

    @property
    def conformal_factor(self) -> np.ndarray:
        """``e^{2 rho}``; equals E (= G) in isothermal coordinates."""
        return self.area_element

    @property
    def second_fundamental(self) -> np.ndarray:
        return self.metric @ self.shape

    @property
    def J(self) -> np.ndarray:
        """Complex structure as a coordinate matrix: columns are J d/du, J d/dv."""
        a = self.area_element
        ginv = np.linalg.inv(self.metric)
        rot = np.zeros(a.shape + (2, 2))
        rot[..., 0, 1] = -a
        rot[..., 1, 0] = a
        return ginv @ rot

    def push(self, X: np.ndarray) -> np.ndarray:
        """``x_*(X)`` for coordinate components ``X = (a, b)``."""
        X = np.asarray(X, float)
        return X[..., 0, None] * self.xu + X[..., 1, None] * self.xv

    def isothermal_defect(self) -> np.ndarray:
        scale = np.maximum(self.E, self.G)
        return np.maximum(np.abs(self.E - self.G), np.abs(self.F)) / scale

    def orthonormal_basis(self) -> np.ndarray:
        """Coordinate matrix P whose columns are e1 = x_u/|x_u|, e2 = J e1."""
        e1 = np.zeros(self.E.shape + (2,))
        e1[..., 0] = 1.0 / np.sqrt(self.E)
        e2 = np.einsum("...ij,...j->...i", self.J, e1)
        return np.stack([e1, e2], -1)

    def shape_orthonormal(self) -> np.ndarray:
        P = self.orthonormal_basis()
        return np.linalg.inv(P) @ self.shape @ P


def _squeeze(frame: FrameData) -> FrameData:
    kw = {}
    for name in frame.__dataclass_fields__:
        val = getattr(frame, name)
        if isinstance(val, np.ndarray):
            val = val[0]
        kw[name] = val
    return FrameData(**kw)


def frame_at(surface: ParametricSurface, p, with_position: bool = True) -> FrameData:
    """Frame, fundamental forms, shape operator and curvatures at ``p = (u, v)``.

    ``u`` and ``v`` may be arrays; scalar input returns scalar-shaped fields.
    """
    u, v, scalar = _points(p)
    j = surface.jet(u, v)
    xu, xv = j.xu, j.xv
    n = cross(xu, xv)
    nn = norm(n)
    bad = nn <= 1e-12 * norm(xu) * norm(xv)
    if np.any(bad) or not np.all(np.isfinite(nn)):
        i = int(np.argmax(bad | ~np.isfinite(nn)))
        raise ImmersionError(f"{surface.name}: degenerate immersion at (u, v) = ({u[i]:.6g}, {v[i]:.6g})",
                             (u[i], v[i]))
    xi = n / nn[:, None]
    nu = cross(j.xuu, xv) + cross(xu, j.xuv)
    nv = cross(j.xuv, xv) + cross(xu, j.xvv)
    xi_u = (nu - xi * dot(xi, nu)[:, None]) / nn[:, None]
    xi_v = (nv - xi * dot(xi, nv)[:, None]) / nn[:, None]
    E, F, G = dot(xu, xu), dot(xu, xv), dot(xv, xv)
    g = np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)
    # least squares for x_* A = -[xi_u xi_v]; xi_u, xi_v are tangent so this is exact
    rhs = -np.stack(
        [np.stack([dot(xu, xi_u), dot(xu, xi_v)], -1), np.stack([dot(xv, xi_u), dot(xv, xi_v)], -1)], -2
    )
    A = np.linalg.solve(g, rhs)
    H = 0.5 * (A[:, 0, 0] + A[:, 1, 1])
    K = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
    x = surface.position(u, v) if (with_position and surface.has_position) else None
    frame = FrameData(u, v, x, xu, xv, xi, E, F, G, A, H, K, j)
    return _squeeze(frame) if scalar else frame


@dataclass(frozen=True)
class TangentVector:
    a: float
    b: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.a, self.b], dtype=dtype or float)


def apply_J(frame: FrameData, X) -> np.ndarray:
    """Coordinates of ``J X``; satisfies ``x_*(J X) = xi x x_*(X)``."""
    X = np.asarray(X, float)
    return np.einsum("...ij,...j->...i", frame.J, X)


def _require_isothermal(frame: FrameData, what: str):
    defect = np.max(frame.isothermal_defect())
    if defect > ISOTHERMAL_TOL:
        raise PreconditionViolation(f"{what} needs isothermal coordinates (defect {defect:.2e})")


def hopf_from_frame(frame: FrameData) -> np.ndarray:
    """``<A d_w, d_w>`` with ``d_w = (d_u - i d_v) / 2`` and complex-bilinear extension."""
    b = frame.second_fundamental
    return (b[..., 0, 0] - b[..., 1, 1] - 2j * b[..., 0, 1]) / 4.0


def hopf_coefficient(surface: ParametricSurface, p):
    """Coefficient of the Hopf differential in isothermal coordinates."""
    frame = frame_at(surface, p, with_position=False)
    _require_isothermal(frame, "hopf_coefficient")
    return hopf_from_frame(frame)


def _stencil(surface, u, v, h, quantity):
    offs = (-2, -1, 1, 2)
    vals_u = [quantity(frame_at(surface, (u + k * h, v), with_position=False)) for k in offs]
    vals_v = [quantity(frame_at(surface, (u, v + k * h), with_position=False)) for k in offs]
    du = central_diff([vals_u[0], vals_u[1], None, vals_u[2], vals_u[3]], h)
    dv = central_diff([vals_v[0], vals_v[1], None, vals_v[2], vals_v[3]], h)
    return du, dv


def hopf_wbar(surface: ParametricSurface, p, h: float | None = None):
    """Finite-difference ``d/dw-bar`` of the Hopf coefficient; vanishes iff the coefficient is holomorphic."""
    u, v, scalar = _points(p)
    h = 1e-3 * surface.extent if h is None else h
    _require_isothermal(frame_at(surface, (u, v), with_position=False), "hopf_wbar")
    wu, wv = _stencil(surface, u, v, h, hopf_from_frame)
    out = 0.5 * (wu + 1j * wv)
    return out[0] if scalar else out


def codazzi_residual(surface: ParametricSurface, p, h: float | None = None):
    """``d/dw-bar(omega) - e^{2 rho} H_w / 2`` by fourth-order finite differences.

    This is the Codazzi equation written for the Hopf coefficient; it vanishes
    on every smooth surface up to discretisation error.
    """
    u, v, scalar = _points(p)
    h = 1e-3 * surface.extent if h is None else h
    frame = frame_at(surface, (u, v), with_position=False)
    _require_isothermal(frame, "codazzi_residual")
    wu, wv = _stencil(surface, u, v, h, hopf_from_frame)
    Hu, Hv = _stencil(surface, u, v, h, lambda f: f.H)
    out = 0.5 * (wu + 1j * wv) - 0.5 * frame.conformal_factor * 0.5 * (Hu - 1j * Hv)
    return out[0] if scalar else out


def metric_at(surface: ParametricSurface, u, v):
    j = surface.jet(u, v)
    return dot(j.xu, j.xu), dot(j.xu, j.xv), dot(j.xv, j.xv)


def brioschi_curvature(surface: ParametricSurface, p, h: float | None = None):
    """Gauss curvature from the metric alone (Brioschi formula).

    Metric derivatives come from fourth-order finite differences of E, F, G,
    so this is independent of the shape-operator path in :func:`frame_at`.
    """
    u, v, scalar = _points(p)
    h = 1e-3 * surface.extent if h is None else h
    offs = (-2, -1, 0, 1, 2)

    def along_u(fn):
        return [fn(u + k * h, v) for k in offs]

    def along_v(fn):
        return [fn(u, v + k * h) for k in offs]

    def comp(i):
        return lambda a, b: metric_at(surface, a, b)[i]

    E, F, G = metric_at(surface, u, v)
    Eu, Ev = central_diff(along_u(comp(0)), h), central_diff(along_v(comp(0)), h)
    Fu, Fv = central_diff(along_u(comp(1)), h), central_diff(along_v(comp(1)), h)
    Gu, Gv = central_diff(along_u(comp(2)), h), central_diff(along_v(comp(2)), h)
    Evv = second_diff(along_v(comp(0)), h)
    Guu = second_diff(along_u(comp(2)), h)
    Fuv = central_diff([central_diff([comp(1)(u + i * h, v + k * h) for i in offs], h) for k in offs], h)
    m1 = np.stack(
        [
            np.stack([-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev], -1),
            np.stack([Fv - 0.5 * Gu, E, F], -1),
            np.stack([0.5 * Gv, F, G], -1),
        ],
        -2,
    )
    z = np.zeros_like(E)
    m2 = np.stack(
        [
            np.stack([z, 0.5 * Ev, 0.5 * Gu], -1),
            np.stack([0.5 * Ev, E, F], -1),
            np.stack([0.5 * Gu, F, G], -1),
        ],
        -2,
    )
    K = (np.linalg.det(m1) - np.linalg.det(m2)) / (E * G - F**2) ** 2
    return K[0] if scalar else K


def mean_curvature_profile(surface: ParametricSurface, nu: int = 7, nv: int = 7):
    """Computed H on a sample grid: returns (values, u, v)."""
    u, v = surface.sample_grid(nu, nv)
    return frame_at(surface, (u, v), with_position=False).H, u, v
