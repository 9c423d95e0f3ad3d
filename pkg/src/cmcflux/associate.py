"""Associate second fundamental forms and the structure of isometric deformations.

An isometric deformation ``x_t`` is described at each instant by a scalar
field k and a tangent field Z through

    X x'  = k x_*(J X) - <X, Z> xi,

and its rotation field (Drehriss) is ``x_*(J Z) + k xi``. The integrability
conditions checked here are

    A' X      = -k J A X - nabla_X Z
    grad k    = -A J Z
    nabla_X JZ = (k + 1) A X - H X      (associate deformation only)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import FrameData, ParametricSurface, PreconditionViolation, combine, frame_at, hopf_from_frame
from .numeric import central_diff, dot, norm

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
METRIC_DRIFT_TOL = 1e-8


def associate_tensor(A, H, t) -> np.ndarray:
    """``cos t (A - H I) + sin t J (A - H I) + H I`` in an orthonormal frame.

    Broadcasts over leading axes of A (shape ``(..., 2, 2)``), H and t.
    """
    A = np.asarray(A, float)
    H = np.asarray(H, float)[..., None, None]
    t = np.asarray(t, float)[..., None, None]
    eye = np.eye(2)
    traceless = A - H * eye
    return np.cos(t) * traceless + np.sin(t) * (ROT @ traceless) + H * eye


def gauss_codazzi_invariants(A, H, ts: Sequence[float]) -> tuple[float, float]:
    """Largest deviations of ``tr A_t`` from 2H and of ``det A_t`` from ``det A`` over ``ts``."""
    A = np.asarray(A, float)
    H = np.asarray(H, float)
    det0 = np.linalg.det(A)
    tr_dev = det_dev = 0.0
    for t in ts:
        At = associate_tensor(A, H, t)
        tr_dev = max(tr_dev, float(np.max(np.abs(np.trace(At, axis1=-2, axis2=-1) - 2 * H))))
        det_dev = max(det_dev, float(np.max(np.abs(np.linalg.det(At) - det0))))
    return tr_dev, det_dev


def hopf_rotation_defect(family: Callable[[float], ParametricSurface], t: float, points) -> float:
    """``max |hopf(x_t) - e^{-it} hopf(x_0)|`` over the sample points."""
    h0 = hopf_from_frame(frame_at(family(0.0), points, with_position=False))
    ht = hopf_from_frame(frame_at(family(t), points, with_position=False))
    return float(np.max(np.abs(ht - np.exp(-1j * t) * h0)))


# ---------------------------------------------------------------------------
# deformation state


@dataclass
class DeformationState:
    """Sampled k, Z (coordinate components) and Drehriss of an isometric family at one instant."""

    u: np.ndarray
    v: np.ndarray
    k: np.ndarray
    Z: np.ndarray
    eta: np.ndarray
    frame: FrameData
    k_spread: np.ndarray  # disagreement between the two coordinate estimates of k

    @property
    def Z_norm(self) -> np.ndarray:
        g = self.frame.metric
        return np.sqrt(np.einsum("ni,nij,nj->n", self.Z, g, self.Z))

    def V(self, H: float) -> np.ndarray:
        """``x_*(J Z) + (k + 1) xi + H x``; vanishes for the normalised associate family."""
        jz = self.frame.push(np.einsum("nij,nj->ni", self.frame.J, self.Z))
        out = jz + (self.k + 1.0)[:, None] * self.frame.normal
        if H != 0.0:
            out = out + H * self.frame.x
        return out


_T_OFFS = (-2, -1, 0, 1, 2)


def _t_derivative(family, t, delta, u, v, attr):
    jets = [family(t + k * delta).jet(u, v) for k in _T_OFFS]
    return central_diff([getattr(j, attr) for j in jets], delta)


def extract_state(family: Callable[[float], ParametricSurface], t: float, points, delta: float = 1e-3,
                  with_position: bool = False) -> DeformationState:
    """Recover (k, Z) by projecting ``X x'`` onto ``x_*(J X)`` and onto the normal.

    ``X x'`` is the t-derivative of ``x_*(X)`` taken with a five-point stencil.
    """
    u, v = (np.atleast_1d(np.asarray(c, float)) for c in points)
    f = frame_at(family(t), (u, v), with_position=with_position)
    dxu = _t_derivative(family, t, delta, u, v, "xu")
    dxv = _t_derivative(family, t, delta, u, v, "xv")
    J = f.J
    jxu = f.push(J[..., :, 0])
    jxv = f.push(J[..., :, 1])
    ku = dot(dxu, jxu) / dot(jxu, jxu)
    kv = dot(dxv, jxv) / dot(jxv, jxv)
    gZ = -np.stack([dot(dxu, f.normal), dot(dxv, f.normal)], -1)
    Z = np.linalg.solve(f.metric, gZ[..., None])[..., 0]
    k = 0.5 * (ku + kv)
    eta = f.push(np.einsum("nij,nj->ni", J, Z)) + k[:, None] * f.normal
    return DeformationState(u, v, k, Z, eta, f, np.abs(ku - kv))


def minimal_family_deformation_state(x: ParametricSurface, y: ParametricSurface, t: float, points,
                                     delta: float = 1e-3) -> DeformationState:
    """State of ``x_t = cos t x + sin t y``; expect k = -1 and Z = 0."""
    def family(s):
        return combine([(np.cos(s), x), (np.sin(s), y)], name="associate", declared_H=x.declared_H)

    return extract_state(family, t, points, delta)


# ---------------------------------------------------------------------------
# integrability


def christoffel(frame: FrameData) -> np.ndarray:
    """``Gamma[n, k, i, j]`` from the jet: ``g^{kl} <x_ij, x_l>``."""
    j = frame.jet
    second = [[j.xuu, j.xuv], [j.xuv, j.xvv]]
    tang = [frame.xu, frame.xv]
    low = np.empty(frame.E.shape + (2, 2, 2))  # [n, l, i, j]
    for l in range(2):
        for a in range(2):
            for b in range(2):
                low[:, l, a, b] = dot(second[a][b], tang[l])
    ginv = np.linalg.inv(frame.metric)
    return np.einsum("nkl,nlij->nkij", ginv, low)


def _covariant(W0, dW, Gamma):
    """``nabla W`` as a matrix whose column i is ``nabla_{d_i} W``."""
    return dW + np.einsum("nkij,nj->nki", Gamma, W0)


@dataclass
class IntegrabilityReport:
    shape_eq: float
    k_gradient_eq: float
    rotation_eq: float
    metric_drift: float
    k_range: tuple[float, float]
    Z_max: float

    def as_dict(self) -> dict:
        return {"shape_eq": self.shape_eq, "k_gradient_eq": self.k_gradient_eq, "rotation_eq": self.rotation_eq, "metric_drift": self.metric_drift,
                "k_min": self.k_range[0], "k_max": self.k_range[1], "Z_max": self.Z_max}


def metric_drift(family: Callable[[float], ParametricSurface], t: float, points, delta: float) -> float:
    u, v = points
    base = frame_at(family(t), (u, v), with_position=False).metric
    worst = 0.0
    for k in (-2, -1, 1, 2):
        g = frame_at(family(t + k * delta), (u, v), with_position=False).metric
        worst = max(worst, float(np.max(np.abs(g - base))))
    return worst


def integrability_residuals(family: Callable[[float], ParametricSurface], t: float, points, delta: float = 1e-3,
                            h: float = 1e-3, H: float | None = None) -> IntegrabilityReport:
    """Residuals of the three deformation equations at ``t`` over ``points``.

    Spatial derivatives of k and Z use five-point stencils of step h and the
    Levi-Civita connection comes from Christoffel symbols of the jet. The
    residuals are measured as ambient lengths of the pushed-forward vectors.
    Refuses families whose metric drifts by more than 1e-8.
    """
    u, v = (np.atleast_1d(np.asarray(c, float)) for c in points)
    drift = metric_drift(family, t, (u, v), delta)
    if drift > METRIC_DRIFT_TOL:
        raise PreconditionViolation(f"family is not isometric: metric drift {drift:.3e}")

    st = extract_state(family, t, (u, v), delta)
    f = st.frame
    Hval = float(np.mean(f.H)) if H is None else H
    shapes = [frame_at(family(t + k * delta), (u, v), with_position=False).shape for k in _T_OFFS]
    A_dot = central_diff(shapes, delta)

    def sampled(du_, dv_):
        s = extract_state(family, t, (u + du_, v + dv_), delta)
        JZ = np.einsum("nij,nj->ni", s.frame.J, s.Z)
        return s.k, s.Z, JZ

    offs = (-2, -1, 0, 1, 2)
    along_u = [sampled(o * h, 0.0) if o else None for o in offs]
    along_v = [sampled(0.0, o * h) if o else None for o in offs]

    def d(samples, idx):
        return central_diff([None if s is None else s[idx] for s in samples], h)

    Gamma = christoffel(f)
    JZ0 = np.einsum("nij,nj->ni", f.J, st.Z)
    grad_k = np.linalg.solve(f.metric, np.stack([d(along_u, 0), d(along_v, 0)], -1)[..., None])[..., 0]
    nabla_Z = _covariant(st.Z, np.stack([d(along_u, 1), d(along_v, 1)], -1), Gamma)
    nabla_JZ = _covariant(JZ0, np.stack([d(along_u, 2), d(along_v, 2)], -1), Gamma)

    A = f.shape
    J = f.J
    k = st.k[:, None, None]
    res_shape = A_dot + k * (J @ A) + nabla_Z
    res_grad = grad_k + np.einsum("nij,nj->ni", A @ J, st.Z)
    res_rot = nabla_JZ - (k + 1.0) * A + Hval * np.eye(2)

    def amb(M):
        cols = [norm(f.push(M[..., :, i])) for i in range(2)]
        return float(np.max(np.maximum(*cols)))

    return IntegrabilityReport(
        shape_eq=amb(res_shape),
        k_gradient_eq=float(np.max(norm(f.push(res_grad)))),
        rotation_eq=amb(res_rot),
        metric_drift=drift,
        k_range=(float(np.min(st.k)), float(np.max(st.k))),
        Z_max=float(np.max(st.Z_norm)),
    )
