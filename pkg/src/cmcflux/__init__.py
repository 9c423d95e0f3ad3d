"""Force and torque periods, associate families and Weierstrass minimal surfaces for CMC surfaces."""

from __future__ import annotations

__version__ = "0.1.0"

from .geometry import FrameData, ParametricSurface, apply_J, frame_at, hopf_coefficient
from .numeric import DEFAULT_TOL, ComplexPath, Tolerances, integrate_path, integrate_real_1form, ode_solve
from .weierstrass import RationalFn, WeierstrassData, assemble_phi, period

__all__ = [
    "DEFAULT_TOL",
    "ComplexPath",
    "FrameData",
    "ParametricSurface",
    "RationalFn",
    "Tolerances",
    "WeierstrassData",
    "__version__",
    "apply_J",
    "assemble_phi",
    "frame_at",
    "hopf_coefficient",
    "integrate_path",
    "integrate_real_1form",
    "ode_solve",
    "period",
]
