"""Deformability verdicts from the period obstructions.

The conditions checked are necessary only: CIRCLE-POSSIBLE means no tested
obstruction is present, never that a deformation has been constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import period_report
from .numeric import DEFAULT_TOL, Tolerances
from .weierstrass import PERIOD_TOL, deformable, regularity_check, well_defined

CIRCLE_POSSIBLE = "CIRCLE-POSSIBLE"
FINITE = "FINITE"
NOT_IMMERSED = "NOT-IMMERSED"


@dataclass
class DeformabilityVerdict:
    verdict: str
    witness: str | None
    max_obstruction: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness, "max_obstruction": self.max_obstruction,
                **self.details}


def _cvec(values) -> list:
    return [[float(np.real(c)), float(np.imag(c))] for c in values]


def weierstrass_verdict(data, cycles, tol: Tolerances = DEFAULT_TOL,
                        threshold: float = PERIOD_TOL) -> DeformabilityVerdict:
    """Real periods decide whether the surface closes up, imaginary ones whether it can deform."""
    wd = well_defined(data, cycles, tol, threshold)
    df = deformable(data, cycles, tol, threshold)
    if not wd.holds:
        verdict, witness, worst = NOT_IMMERSED, wd.witness, wd.max_value
    elif not df.holds:
        verdict, witness, worst = FINITE, df.witness, df.max_value
    else:
        verdict, witness, worst = CIRCLE_POSSIBLE, None, max(wd.max_value, df.max_value)
    details = {
        "well_defined": {"holds": wd.holds, "max_real_period": wd.max_value, "witness": wd.witness},
        "deformable": {"holds": df.holds, "max_imag_period": df.max_value, "witness": df.witness},
        "branch_points": [{"point": [b.point.real, b.point.imag], "order": b.order} for b in regularity_check(data)],
        "periods": {label: _cvec(v) for label, v in df.values.items()},
    }
    return DeformabilityVerdict(verdict, witness, worst, details)


def surface_verdict(surface, cycles, H: float, tol: Tolerances = DEFAULT_TOL,
                    threshold: float = PERIOD_TOL) -> DeformabilityVerdict:
    """Force periods (and torque periods when H != 0) over the given cycles."""
    forms = ("force",) if H == 0.0 else ("force", "torque")
    witness, worst, recs = None, 0.0, []
    for cyc in cycles:
        rep = period_report(surface, cyc, forms, None, tol, H)
        recs.append(rep.to_json())
        for vec in (rep.W, rep.T):
            if vec is None:
                continue
            m = float(np.linalg.norm(vec))
            if m > threshold and m > worst:
                worst, witness = m, cyc.label
    verdict = FINITE if witness else CIRCLE_POSSIBLE
    return DeformabilityVerdict(verdict, witness, worst, {"periods": recs})


def entry_verdict(entry, tol: Tolerances = DEFAULT_TOL) -> DeformabilityVerdict:
    if entry.weierstrass is not None and entry.z_cycles:
        return weierstrass_verdict(entry.weierstrass, entry.z_cycles, tol)
    return surface_verdict(entry.surface, list(entry.cycles.values()), entry.H, tol)
