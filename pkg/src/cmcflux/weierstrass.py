"""Minimal surfaces from rational Weierstrass data on a punctured plane.

The immersion is ``x = Re F`` with ``F' = Phi`` and

    Phi = ((1/g - g) dh / 2,  i (1/g + g) dh / 2,  dh).

Real parts of puncture periods obstruct well-definedness; imaginary parts
obstruct the associate deformation. Periods are computed by quadrature and
checked against an exact residue computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import _exact
from .geometry import Jet, ParametricSurface, PreconditionViolation, combine
from .numeric import (
    DEFAULT_TOL,
    ComplexPath,
    LineSegment,
    QuadratureError,
    Tolerances,
    integrate_path,
    winding_number,
)

ROOT_TOL = 1e-12
PERIOD_TOL = 1e-8


class PeriodMismatch(RuntimeError):
    """Quadrature and residue periods disagree beyond tolerance."""


def _same(a: complex, b: complex, tol: float = ROOT_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _merge(factors, tol=ROOT_TOL, combine_mult=max):
    out: list[list] = []
    for r, m in factors:
        for item in out:
            if _same(item[0], r, tol):
                item[1] = combine_mult(item[1], m)
                break
        else:
            out.append([complex(r), int(m)])
    return tuple((r, m) for r, m in out if m != 0)


def _sum(a, b):
    return a + b


def _cluster_roots(coeffs, tol: float = 1e-6):
    """Roots of an ascending-coefficient polynomial grouped into multiplicities."""
    coeffs = np.trim_zeros(np.asarray(coeffs, complex), "b")
    if len(coeffs) <= 1:
        return ()
    roots = P.polyroots(coeffs)
    groups: list[list] = []
    for r in roots:
        for g in groups:
            if abs(g[0] - r) <= tol * max(1.0, abs(r)):
                g[2].append(r)
                break
        else:
            groups.append([r, 0, [r]])
    return tuple((complex(np.mean(g[2])), len(g[2])) for g in groups)


def _poly_from_factors(factors):
    out = np.array([1.0 + 0j])
    for r, m in factors:
        for _ in range(m):
            out = P.polymul(out, [-r, 1.0])
    return out


@dataclass(frozen=True)
class RationalFn:
    """``num(z) / prod (z - r)^m``; coefficients ascending.

    ``zeros``/``scale`` give the factored numerator when known, and ``source``
    keeps the exact input for the residue oracle.
    """

    num: np.ndarray
    poles: tuple = ()
    zeros: tuple | None = None
    scale: complex | None = None
    source: tuple | None = field(default=None, compare=False)

    @classmethod
    def from_roots(cls, roots: Sequence[tuple[complex, int]], scale: complex = 1.0) -> "RationalFn":
        """Factored form: positive multiplicities are zeros, negative ones poles."""
        zeros = _merge([(r, m) for r, m in roots if m > 0], combine_mult=_sum)
        poles = _merge([(r, -m) for r, m in roots if m < 0], combine_mult=_sum)
        num = complex(scale) * _poly_from_factors(zeros)
        if any(_same(a, b) for a, _ in zeros for b, _ in poles):
            raise ValueError("zeros and poles must be distinct (gcd 1)")
        return cls(num, poles, zeros, complex(scale), ("roots", tuple(roots), complex(scale)))

    @classmethod
    def from_coeffs(cls, num, den=(1.0,)) -> "RationalFn":
        num = np.asarray(num, complex)
        den = np.trim_zeros(np.asarray(den, complex), "b")
        if len(den) == 0 or not np.any(den):
            raise ValueError("denominator is identically zero")
        lead = den[-1]
        poles = _cluster_roots(den)
        return cls(num / lead, poles, None, None, ("coeffs", tuple(num), tuple(den)))

    @classmethod
    def constant(cls, c: complex) -> "RationalFn":
        return cls.from_roots([], c)

    def zero_factors(self):
        if self.zeros is not None:
            return self.zeros, self.scale
        num = np.trim_zeros(self.num, "b")
        if len(num) == 0:
            raise ValueError("function is identically zero")
        return _cluster_roots(num), complex(num[-1])

    def __call__(self, z):
        z = np.asarray(z, complex)
        den = np.ones_like(z)
        for r, m in self.poles:
            den = den * (z - r) ** m
        return P.polyval(z, self.num) / den

    def derivative(self, z):
        z = np.asarray(z, complex)
        logd = np.zeros_like(z)
        den = np.ones_like(z)
        for r, m in self.poles:
            logd = logd + m / (z - r)
            den = den * (z - r) ** m
        n = P.polyval(z, self.num)
        dn = P.polyval(z, P.polyder(self.num)) if len(self.num) > 1 else 0.0 * z
        return (dn - n * logd) / den

    def __mul__(self, other):
        if not isinstance(other, RationalFn):
            return RationalFn(self.num * complex(other), self.poles)
        poles = _merge(list(self.poles) + list(other.poles), combine_mult=_sum)
        return RationalFn(P.polymul(self.num, other.num), poles)

    __rmul__ = __mul__

    def __add__(self, other: "RationalFn"):
        lcm = _merge(list(self.poles) + list(other.poles))

        def lift(f):
            extra = []
            for r, m in lcm:
                have = next((k for q, k in f.poles if _same(q, r)), 0)
                if m > have:
                    extra.append((r, m - have))
            return P.polymul(f.num, _poly_from_factors(extra))

        return RationalFn(P.polyadd(lift(self), lift(other)), lcm)

    def __neg__(self):
        return RationalFn(-self.num, self.poles)

    def __sub__(self, other):
        return self + (-other)

    def reciprocal(self) -> "RationalFn":
        zeros, scale = self.zero_factors()
        return RationalFn(_poly_from_factors(self.poles) / scale, zeros, self.poles, 1.0 / scale)

    def order_at(self, q: complex, tol: float = 1e-9) -> int:
        zeros, _ = self.zero_factors()
        zo = sum(m for r, m in zeros if abs(r - q) <= tol)
        po = sum(m for r, m in self.poles if abs(r - q) <= tol)
        return zo - po

    def exact_parts(self):
        """Exact (numerator poly, denominator factors, numerator zero factors or None)."""
        if self.source and self.source[0] == "roots":
            _, roots, scale = self.source
            zeros = [(r, m) for r, m in roots if m > 0]
            poles = [(r, -m) for r, m in roots if m < 0]
            return _exact.from_roots(zeros, scale), poles, (zeros, scale), True
        if self.source and self.source[0] == "coeffs":
            _, num, den = self.source
            lead = den[-1]
            numq = [_exact.GQ.of(c) / _exact.GQ.of(lead) for c in num]
            return numq, list(self.poles), None, False
        zeros, scale = self.zero_factors()
        return _exact.poly(self.num), list(self.poles), (list(zeros), scale), False


@dataclass(frozen=True)
class WeierstrassData:
    g: RationalFn
    dh: RationalFn
    punctures: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "punctures", tuple(complex(p) for p in self.punctures))
        if not np.any(self.g.num):
            raise ValueError("g must not vanish identically")


@dataclass(frozen=True)
class WPhi:
    components: tuple[RationalFn, RationalFn, RationalFn]

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, complex))
        return np.stack([c(z) for c in self.components], -1)

    def derivative(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, complex))
        return np.stack([c.derivative(z) for c in self.components], -1)

    def null_defect(self, z) -> np.ndarray:
        phi = self(z)
        scale = np.sum(np.abs(phi) ** 2, -1)
        return np.abs(np.sum(phi**2, -1)) / np.maximum(scale, 1e-300)

    @property
    def poles(self):
        return _merge([p for c in self.components for p in c.poles])


def assemble_phi(data: WeierstrassData) -> WPhi:
    ginv = data.g.reciprocal()
    half_dh = data.dh * 0.5
    phi1 = (ginv - data.g) * half_dh
    phi2 = (ginv + data.g) * half_dh * 1j
    return WPhi((phi1, phi2, data.dh))


def period(phi: WPhi, cycle: ComplexPath, tol: Tolerances = DEFAULT_TOL, punctures: Sequence[complex] = ()):
    """Componentwise closed-loop integrals of Phi."""
    try:
        return np.asarray(integrate_path(phi, cycle, tol), complex)
    except QuadratureError as exc:
        hint = cycle.clearance(list(punctures) + [r for r, _ in phi.poles])
        raise QuadratureError(f"{exc}; path clearance from poles is {hint:.3e}", exc.estimate, exc.error) from exc


def _exact_phi(data: WeierstrassData):
    """Exact numerators and denominator factors of the three components."""
    gn, gpoles, gzeros, exact_g = data.g.exact_parts()
    hn, hpoles, _, exact_h = data.dh.exact_parts()
    if gzeros is None:
        zeros, scale = data.g.zero_factors()
        gzeros = (list(zeros), scale)
        exact_g = False
    zeros, scale = gzeros
    # g = Pn / Qd with Pn = scale * prod (z - a)^m and Qd = prod (z - b)^m
    Pn = _exact.from_roots(zeros, scale)
    Qd = _exact.from_roots(gpoles)
    if not exact_g and data.g.source and data.g.source[0] == "coeffs":
        Pn = gn
    QQ = _exact.pmul(Qd, Qd)
    PP = _exact.pmul(Pn, Pn)
    den = _merge([(r, m) for r, m in zeros] + list(gpoles) + list(hpoles), combine_mult=_sum)
    # common denominator 2 * P * Q * S -> factors of P, Q, S and the scale of P
    half = _exact.GQ.of(0.5) / _exact.GQ.of(scale)
    n1 = _exact.pscale(_exact.pmul(_exact.padd(QQ, _exact.pscale(PP, -1)), hn), half)
    n2 = _exact.pscale(_exact.pmul(_exact.padd(QQ, PP), hn), half * _exact.I)
    return [(n1, den), (n2, den), (hn, list(hpoles))], exact_g and exact_h


@dataclass
class ResiduePeriods:
    periods: np.ndarray
    residues: dict
    exact: bool
    exact_zero: tuple[bool, bool, bool]


def residue_periods(data: WeierstrassData, cycle: ComplexPath, tol: Tolerances = DEFAULT_TOL) -> ResiduePeriods:
    """Periods as 2 pi i times winding-weighted residues, in exact arithmetic."""
    comps, exact = _exact_phi(data)
    poles = _merge([(r, 1) for _, den in comps for r, _ in den])
    totals = [_exact.ZERO] * 3
    residues = {}
    for r, _ in poles:
        w = _winding(cycle, r, tol)
        res = []
        for k, (num, den) in enumerate(comps):
            q = _exact.residue(num, [(_exact.GQ.of(a), m) for a, m in den], _exact.GQ.of(r))
            res.append(q)
            if w:
                totals[k] = totals[k] + q * w
        residues[r] = tuple(complex(q) for q in res)
    two_pi_i = 2j * np.pi
    periods = np.array([two_pi_i * complex(t) for t in totals])
    return ResiduePeriods(periods, residues, exact, tuple(not bool(t) for t in totals))


def _winding(cycle: ComplexPath, point: complex, tol: Tolerances) -> int:
    from .numeric import ArcSegment

    segs = cycle.segments
    if len(segs) == 1 and isinstance(segs[0], ArcSegment):
        arc = segs[0]
        turns = arc.sweep / (2 * np.pi)
        if abs(turns - round(turns)) < 1e-12:
            d = abs(point - arc.center)
            if abs(d - arc.radius) < 1e-9 * max(1.0, arc.radius):
                raise ValueError(f"cycle passes through pole {point}")
            return int(round(turns)) if d < arc.radius else 0
    return winding_number(cycle, point, tol)


def checked_period(data: WeierstrassData, cycle: ComplexPath, tol: Tolerances = DEFAULT_TOL,
                   agree: float = PERIOD_TOL):
    """Quadrature period after confirming it against the residue oracle."""
    phi = assemble_phi(data)
    quad = period(phi, cycle, tol, data.punctures)
    oracle = residue_periods(data, cycle, tol)
    gap = float(np.max(np.abs(quad - oracle.periods)))
    if gap > agree:
        raise PeriodMismatch(f"quadrature and residue periods differ by {gap:.3e}")
    return quad, oracle


def _labelled(generators):
    out = []
    for i, g in enumerate(generators):
        if isinstance(g, ComplexPath):
            out.append((f"cycle[{i}]", g))
        else:
            out.append((str(g[0]), g[1]))
    return out


@dataclass
class Verdict:
    holds: bool
    max_value: float
    witness: str | None
    values: dict

    def __bool__(self):
        return self.holds


def _period_verdict(data, generators, part, tol, threshold):
    values = {}
    worst, witness = 0.0, None
    for label, path in _labelled(generators):
        quad, _ = checked_period(data, path, tol)
        vals = getattr(quad, part)
        values[label] = quad
        m = float(np.max(np.abs(vals)))
        if m > worst:
            worst, witness = m, label
    ok = worst < threshold
    return Verdict(ok, worst, None if ok else witness, values)


def well_defined(data: WeierstrassData, generators, tol: Tolerances = DEFAULT_TOL, threshold: float = PERIOD_TOL):
    """True iff every generator has vanishing real period."""
    return _period_verdict(data, generators, "real", tol, threshold)


def deformable(data: WeierstrassData, generators, tol: Tolerances = DEFAULT_TOL, threshold: float = PERIOD_TOL):
    """True iff every generator has vanishing imaginary period."""
    return _period_verdict(data, generators, "imag", tol, threshold)


@dataclass(frozen=True)
class BranchPoint:
    point: complex
    order: int  # > 0: metric density vanishes, < 0: blows up


def regularity_check(data: WeierstrassData) -> list[BranchPoint]:
    """Points of the punctured domain where the induced metric degenerates.

    The metric density ``(|g| + 1/|g|) |dh| / 2`` behaves like
    ``|z - q|^(ord dh - |ord g|)`` near q.
    """
    gz, _ = data.g.zero_factors()
    hz, _ = data.dh.zero_factors()
    candidates = _merge([(r, 1) for r, _ in list(gz) + list(data.g.poles) + list(hz) + list(data.dh.poles)],
                        tol=1e-9)
    out = []
    for q, _ in candidates:
        if any(abs(q - p) <= 1e-9 for p in data.punctures):
            continue
        order = data.dh.order_at(q) - abs(data.g.order_at(q))
        if order != 0:
            out.append(BranchPoint(q, order))
    return out


def puncture_circles(data: WeierstrassData, radius: float = 0.5, turns: int = 1):
    """One labelled circle per declared puncture."""
    return [(f"puncture[{i}]", ComplexPath.circle(p, radius, turns)) for i, p in enumerate(data.punctures)]


# ---------------------------------------------------------------------------
# immersions


class WeierstrassSurface(ParametricSurface):
    """``x_t(z) = Re(e^{-it} F(z))`` with ``F(z) = int_{z0}^{z} Phi``, on coordinates ``z = u + iv``."""

    def __init__(self, data: WeierstrassData, z0: complex, t: float = 0.0, *, tol: Tolerances = DEFAULT_TOL,
                 domain=None, clearance: float = 0.25, name: str = "weierstrass", cache=None):
        self.data = data
        self.phi = assemble_phi(data)
        self.z0 = complex(z0)
        self.t = float(t)
        self.tol = tol
        self._rot = np.exp(-1j * self.t)
        self._cache = {} if cache is None else cache
        blocked = list(data.punctures) + [r for r, _ in self.phi.poles]
        self._blocked = [p for i, p in enumerate(blocked) if all(not _same(p, q, 1e-9) for q in blocked[:i])]
        if any(abs(self.z0 - p) < 1e-9 for p in self._blocked):
            raise PreconditionViolation("basepoint sits on a puncture")
        if domain is None:
            pts = np.array([self.z0] + list(data.punctures), complex)
            domain = (pts.real.min() - 2, pts.real.max() + 2, pts.imag.min() - 2, pts.imag.max() + 2)
        super().__init__(
            self._positions,
            self._jet,
            domain=domain,
            declared_H=0.0,
            punctures=[(p.real, p.imag) for p in self._blocked],
            clearance=clearance,
            name=name,
        )

    def rotated(self, t: float, name: str | None = None) -> "WeierstrassSurface":
        """Associate member sharing this surface's primitive cache."""
        return WeierstrassSurface(self.data, self.z0, self.t + t, tol=self.tol, domain=self.domain,
                                  clearance=self.clearance, name=name or f"{self.name}@t={t:.4g}",
                                  cache=self._cache)

    def _jet(self, u, v) -> Jet:
        z = np.asarray(u) + 1j * np.asarray(v)
        f = self._rot * self.phi(z)
        df = self._rot * self.phi.derivative(z)
        return Jet(f.real, -f.imag, df.real, -df.imag, -df.real)

    def _positions(self, u, v):
        z = np.asarray(u) + 1j * np.asarray(v)
        F = np.array([self.primitive(zz) for zz in z.ravel()])
        return (self._rot * F).real

    # path integration ------------------------------------------------------

    def _clearance_for(self, a: complex, b: complex) -> float:
        if not self._blocked:
            return self.clearance
        da = min(abs(a - p) for p in self._blocked)
        db = min(abs(b - p) for p in self._blocked)
        return min(self.clearance, 0.5 * da, 0.5 * db)

    def route(self, a: complex, b: complex, depth: int = 0) -> list[complex]:
        """Polyline from a to b keeping clear of punctures; detours pass on the left."""
        c = self._clearance_for(a, b)
        seg = LineSegment(a, b)
        hits = [p for p in self._blocked if seg.distance_to(p) < c]
        if not hits:
            return [a, b]
        if depth > 12:
            raise PreconditionViolation(f"could not route a path from {a} to {b}")
        d = (b - a) / abs(b - a)
        p = min(hits, key=lambda q: ((q - a) * np.conj(d)).real)
        w = p + 1j * d * 2 * c
        step = 2 * c
        while min(abs(w - q) for q in self._blocked) < c:
            step *= 1.5
            w = p + 1j * d * step
        return self.route(a, w, depth + 1)[:-1] + self.route(w, b, depth + 1)

    def _segment(self, a: complex, b: complex) -> np.ndarray:
        if a == b:
            return np.zeros(3, complex)
        return np.asarray(integrate_path(self.phi, ComplexPath((LineSegment(a, b),)), self.tol), complex)

    def primitive(self, z: complex) -> np.ndarray:
        """``F(z) = int_{z0}^{z} Phi`` along the cached route."""
        z = complex(z)
        pts = self.route(self.z0, z)
        acc = np.zeros(3, complex)
        start = self.z0
        for w in pts[1:-1]:
            key = (start, w)
            if key not in self._cache:
                self._cache[key] = self._segment(start, w)
            acc = acc + self._cache[key]
            start = w
        return acc + self._segment(start, z)


def _check_generators(data, generators, part, tol, what):
    verdict = _period_verdict(data, generators, part, tol, PERIOD_TOL)
    if not verdict.holds:
        raise PreconditionViolation(
            f"{what}: generator {verdict.witness} has {part} period of size {verdict.max_value:.3e}"
        )
    return verdict


def build_immersion(data: WeierstrassData, z0: complex, generators, tol: Tolerances = DEFAULT_TOL,
                    **kwargs) -> WeierstrassSurface:
    """``x = Re int_{z0} Phi``; ``generators`` are the homology generators of the domain.

    An empty generator list declares a simply-connected chart.
    """
    _check_generators(data, generators, "real", tol, "build_immersion")
    kwargs.setdefault("name", "weierstrass")
    return WeierstrassSurface(data, z0, 0.0, tol=tol, **kwargs)


def conjugate_immersion(data: WeierstrassData, z0: complex, generators, tol: Tolerances = DEFAULT_TOL,
                        **kwargs) -> WeierstrassSurface:
    """``y = Im int_{z0} Phi``; needs vanishing imaginary periods."""
    _check_generators(data, generators, "imag", tol, "conjugate_immersion")
    kwargs.setdefault("name", "weierstrass-conjugate")
    return WeierstrassSurface(data, z0, 0.5 * np.pi, tol=tol, **kwargs)


def associate_minimal(x: ParametricSurface, y: ParametricSurface, t: float, basepoint=None) -> ParametricSurface:
    """``x_t = cos(t) x + sin(t) y``; with a basepoint the family is normalised to ``x_t(p0) = 0``."""
    c, s = np.cos(t), np.sin(t)
    shift = None
    if basepoint is not None:
        u0, v0 = basepoint
        shift = -(c * x.position(u0, v0)[0] + s * y.position(u0, v0)[0])
    return combine([(c, x), (s, y)], name=f"associate({x.name}, t={t:.4g})", declared_H=x.declared_H,
                   translation=shift)


def reconstruct_family(x: ParametricSurface, x_s: ParametricSurface, s: float, t: float) -> ParametricSurface:
    """Family member ``x_t`` from ``x`` and one associate ``x_s`` with ``s`` not in {0, pi}."""
    ss = np.sin(s)
    if abs(ss) < 1e-12:
        raise PreconditionViolation("reconstruction needs s not in {0, pi}")
    return combine([(np.sin(s - t) / ss, x), (np.sin(t) / ss, x_s)], name=f"reconstruct(t={t:.4g})",
                   declared_H=x.declared_H)


# ---------------------------------------------------------------------------
# spec files


def _cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1] if len(v) > 1 else 0.0)
    return complex(v)


def rational_from_json(obj: dict) -> RationalFn:
    if "roots" in obj:
        roots = [(complex(r[0], r[1]), int(r[2])) for r in obj["roots"]]
        return RationalFn.from_roots(roots, _cplx(obj.get("scale", [1.0, 0.0])))
    if "num" in obj:
        return RationalFn.from_coeffs([_cplx(c) for c in obj["num"]], [_cplx(c) for c in obj.get("den", [1.0])])
    raise ValueError("rational function needs 'roots' or 'num'")


def rational_to_json(f: RationalFn) -> dict:
    if f.source and f.source[0] == "roots":
        _, roots, scale = f.source
        return {"roots": [[r.real, r.imag, m] for r, m in map(lambda q: (complex(q[0]), q[1]), roots)],
                "scale": [scale.real, scale.imag]}
    num = f.source[1] if f.source else f.num
    den = f.source[2] if f.source else _poly_from_factors(f.poles)
    return {"num": [[complex(c).real, complex(c).imag] for c in num],
            "den": [[complex(c).real, complex(c).imag] for c in den]}


def data_from_json(obj: dict):
    """Parse a spec document into data and labelled generator cycles."""
    data = WeierstrassData(
        rational_from_json(obj["g"]),
        rational_from_json(obj["dh"]),
        tuple(_cplx(p) for p in obj.get("punctures", [])),
    )
    cycles = []
    for i, c in enumerate(obj.get("cycles", [])):
        label = c.get("label", f"cycle[{i}]")
        cycles.append((label, ComplexPath.circle(_cplx(c["center"]), float(c["radius"]), int(c.get("turns", 1)))))
    return data, cycles


def data_to_json(data: WeierstrassData, cycles=()) -> dict:
    out = {
        "g": rational_to_json(data.g),
        "dh": rational_to_json(data.dh),
        "punctures": [[p.real, p.imag] for p in data.punctures],
        "cycles": [],
    }
    for label, path in cycles:
        arc = path.segments[0]
        out["cycles"].append({"label": label, "center": [arc.center.real, arc.center.imag],
                              "radius": arc.radius, "turns": int(round(arc.sweep / (2 * np.pi)))})
    return out


def load_spec(path) -> tuple[WeierstrassData, list]:
    return data_from_json(json.loads(Path(path).read_text()))
