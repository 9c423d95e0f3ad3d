"""Command line interface: ``cmcflux <command> ...``.

Reports are JSON documents written to stdout (or ``--out``). They carry the
tool version, a SHA-256 digest of the inputs and the tolerances used, so a
report can be replayed with ``cmcflux replay REPORT``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import catalog as cat
from .associate import extract_state, hopf_rotation_defect, integrability_residuals
from .forms import (
    Cycle,
    alexandrov_criterion,
    cross_section_force,
    force_form,
    period_of_form,
    period_report,
    torque_form,
)
from .geometry import ImmersionError, PreconditionViolation, frame_at
from .mesh import chord_lengths, grid_mesh, intrinsic_lengths, write_obj
from .numeric import QuadratureError, SingularityError, Tolerances
from .verdicts import entry_verdict, weierstrass_verdict
from .weierstrass import PeriodMismatch, WeierstrassSurface, checked_period, data_from_json, well_defined

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _cvec(values) -> list:
    return [[float(np.real(c)), float(np.imag(c))] for c in values]


def _tolerances(args) -> Tolerances:
    return Tolerances(quad_abs=args.quad_tol, quad_rel=args.quad_tol, ode_tol=args.ode_tol, fd_step=args.fd_step)


def _inputs(args) -> dict:
    keep = {k: v for k, v in vars(args).items() if k not in ("func", "out", "timing")}
    if getattr(args, "spec", None):
        keep["spec_document"] = json.loads(Path(args.spec).read_text())
    return keep


def _digest(inputs: dict) -> str:
    return hashlib.sha256(json.dumps(_jsonable(inputs), sort_keys=True).encode()).hexdigest()


def _emit(args, report: dict) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# input resolution


def _entry(args, tol):
    if getattr(args, "surface", None):
        return cat.get(args.surface, tol)
    raise PreconditionViolation("this command needs --surface")


def _spec(args):
    data, cycles = data_from_json(json.loads(Path(args.spec).read_text()))
    return data, cycles


def _select_cycles(entry, names: str | None):
    if not names or names == "all":
        return list(entry.cycles.values())
    out = []
    for name in names.split(","):
        if name not in entry.cycles:
            raise PreconditionViolation(f"{entry.name} has no cycle {name!r}; known: {', '.join(entry.cycles)}")
        out.append(entry.cycles[name])
    return out


def _vector(text: str | None, default=(0.0, 0.0, 0.0)) -> np.ndarray:
    if text is None:
        return np.asarray(default, float)
    vals = [float(c) for c in text.split(",")]
    if len(vals) != 3:
        raise PreconditionViolation("vectors are given as x,y,z")
    return np.asarray(vals)


def _z_cycle_as_param(path, label):
    arc = path.segments[0]
    turns = int(round(arc.sweep / (2 * np.pi)))
    return Cycle.circle((arc.center.real, arc.center.imag), arc.radius, turns, label)


# ---------------------------------------------------------------------------
# commands


def cmd_catalog(args, tol):
    lines = []
    for name in cat.REGISTRY:
        e = cat.get(name, tol)
        H = "none" if e.H is None else f"{e.H:.6g}"
        dom = ",".join(f"{d:.6g}" for d in e.surface.domain)
        labels = ",".join(e.cycle_labels) or "-"
        lines.append(f"{name}\tH={H}\tdomain=[{dom}]\tcycles={labels}")
    text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return None


def _weierstrass_periods(data, cycles, tol, forms, origin):
    wd = well_defined(data, cycles, tol)
    out = []
    surf = None
    if data.punctures or cycles:
        z0 = cat._basepoint(data.punctures)
        surf = WeierstrassSurface(data, z0, 0.0, tol=tol)
    for label, path in cycles:
        quad, oracle = checked_period(data, path, tol)
        rec = {
            "cycle": label,
            "phi_period": _cvec(quad),
            "residue_period": _cvec(oracle.periods),
            "residue_exact_zero": list(oracle.exact_zero),
            "residue_exact_input": oracle.exact,
            "method": "quadrature+residue",
        }
        if surf is not None and "force" in forms:
            cyc = _z_cycle_as_param(path, label)
            W, err = period_of_form(force_form(surf, origin, 0.0), surf, cyc, tol, return_error=True)
            rec["force"] = W
            rec["errors"] = {"force": err}
        if surf is not None and "torque" in forms:
            if wd.holds:
                cyc = _z_cycle_as_param(path, label)
                T, err = period_of_form(torque_form(surf, origin, 0.0), surf, cyc, tol, return_error=True)
                rec["torque"] = T
                rec.setdefault("errors", {})["torque"] = err
            else:
                rec["torque"] = None
                rec["torque_note"] = "positions are multivalued: real periods do not vanish"
        out.append(rec)
    return out, wd


def cmd_periods(args, tol):
    forms = tuple(f.strip() for f in args.form.split(","))
    origin = _vector(args.origin)
    if args.spec:
        data, cycles = _spec(args)
        if args.cycle not in (None, "all", "all-punctures"):
            wanted = args.cycle.split(",")
            cycles = [c for c in cycles if c[0] in wanted]
        recs, wd = _weierstrass_periods(data, cycles, tol, forms, origin)
        return {"periods": recs, "verdicts": {"well_defined": wd.holds}}
    entry = _entry(args, tol)
    recs = []
    for cyc in _select_cycles(entry, args.cycle):
        recs.append(period_report(entry.surface, cyc, forms, origin, tol, entry.H).to_json())
    body = {"surface": entry.name, "periods": recs}
    if entry.weierstrass is not None and entry.z_cycles and entry.H == 0.0:
        zrecs, wd = _weierstrass_periods(entry.weierstrass, entry.z_cycles, tol, (), origin)
        body["weierstrass_periods"] = zrecs
        body["verdicts"] = {"well_defined": wd.holds}
    return body


def cmd_deformability(args, tol):
    """Verdict from the necessary conditions: vanishing force (and torque when H != 0)."""
    if args.spec:
        data, cycles = _spec(args)
        return {"deformability": weierstrass_verdict(data, cycles, tol).to_json()}
    entry = _entry(args, tol)
    return {"surface": entry.name, "deformability": entry_verdict(entry, tol).to_json()}


def cmd_cross_section(args, tol):
    entry = _entry(args, tol)
    cyc = _select_cycles(entry, args.cycle)[0]
    V = _vector(args.normal, (0.0, 0.0, 1.0))
    value = cross_section_force(entry.surface, V, cyc, tol, entry.H)
    W = period_of_form(force_form(entry.surface, None, entry.H), entry.surface, cyc, tol)
    body = {"surface": entry.name, "cycle": cyc.label, "normal": V, "cross_section": value,
            "direct_component": float(np.dot(W, V / np.linalg.norm(V)))}
    if args.alexandrov:
        res = alexandrov_criterion(entry.surface, cyc, V, tol, entry.H)
        body["alexandrov"] = {"value": res.value, "length": res.length, "enclosing_radius": res.enclosing.r,
                              "bound": res.bound, "finite_family": res.finite_family}
    if args.trace:
        s = np.linspace(0.0, cyc.length, args.trace_samples)
        u, v = cyc.point(s)
        f = frame_at(entry.surface, (np.atleast_1d(u), np.atleast_1d(v)))
        du, dv = cyc.velocity(s)
        d = f.push(np.stack(np.broadcast_arrays(du, dv), -1))
        speed = np.linalg.norm(d, axis=-1)
        a = np.einsum("ni,i->n", np.cross(f.normal, d / speed[:, None]), V / np.linalg.norm(V))
        xi_dot = np.einsum("ni,ni->n", f.x, f.normal)
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "speed", "a", "x_dot_xi", "integrand"])
            for row in zip(s, speed, a, xi_dot, (a * a + (entry.H or 0.0) * xi_dot) / a * speed):
                w.writerow([f"{val:.12g}" for val in row])
        body["trace"] = str(args.trace)
    return body


def _grid(text: str) -> tuple[int, int]:
    try:
        nu, nv = (int(c) for c in text.lower().split("x"))
    except ValueError:
        raise PreconditionViolation("grid is given as NUxNV, e.g. 64x32") from None
    if nu < 2 or nv < 2:
        raise PreconditionViolation("grid needs at least 2x2 vertices")
    return nu, nv


def cmd_mesh(args, tol):
    entry = _entry(args, tol)
    nu, nv = _grid(args.grid)
    surf = entry.surface
    base_periodic = surf.periods[0] is not None
    if args.t is not None:
        if entry.family is None:
            raise PreconditionViolation(f"{entry.name} has no associate family")
        surf = entry.family(args.t)
    caps = None
    if entry.name == "sphere":
        r = abs(1.0 / entry.H)
        caps = ((0.0, 0.0, -r), (0.0, 0.0, r))
    mesh = grid_mesh(surf, nu, nv, caps=caps, periodic_grid=base_periodic)
    write_obj(mesh, args.obj, comment=f"cmcflux {__version__} {entry.name} grid {nu}x{nv} t={args.t}")
    body = {"surface": entry.name, "obj": str(args.obj), "vertices": len(mesh.vertices), "faces": len(mesh.faces),
            "watertight": mesh.watertight, "t": args.t}
    if args.t is not None:
        ref = grid_mesh(entry.surface, nu, nv, caps=caps, periodic_grid=base_periodic)
        edges = sorted(set(ref.grid_edges()) & set(mesh.grid_edges()))
        period = entry.surface.periods[0]
        L0 = intrinsic_lengths(entry.surface, ref, edges, period=period)
        Lt = intrinsic_lengths(surf, mesh, edges, period=period)
        C0, Ct = chord_lengths(ref, edges), chord_lengths(mesh, edges)
        body["edge_comparison"] = {
            "edges": len(edges),
            "intrinsic_max_rel_deviation": float(np.max(np.abs(Lt - L0) / L0)),
            "chord_max_rel_deviation": float(np.max(np.abs(Ct - C0) / C0)),
        }
    return body


def cmd_associate(args, tol):
    entry = _entry(args, tol)
    if entry.family is None:
        raise PreconditionViolation(f"{entry.name} has no associate family")
    u, v = entry.surface.sample_grid(args.grid, args.grid)
    g0 = frame_at(entry.surface, (u, v), with_position=False)
    ft = frame_at(entry.family(args.t), (u, v), with_position=False)
    pts = entry.surface.sample_grid(5, 5, margin=0.15)
    state = extract_state(entry.family, args.t, pts)
    integ = integrability_residuals(entry.family, args.t, pts)
    return {
        "surface": entry.name,
        "t": args.t,
        "metric_deviation": float(np.max(np.abs(ft.metric - g0.metric))),
        "normal_deviation": float(np.max(np.abs(ft.normal - g0.normal))),
        "max_abs_H": float(np.max(np.abs(ft.H))),
        "hopf_rotation_defect": hopf_rotation_defect(entry.family, args.t, pts),
        "deformation_state": {"k_min": float(state.k.min()), "k_max": float(state.k.max()),
                              "Z_max": float(state.Z_norm.max())},
        "integrability": integ.as_dict(),
    }


def cmd_replay(args, tol):
    old = json.loads(Path(args.report).read_text())
    argv = old["argv"]
    fresh = _run(build_parser().parse_args(argv), argv)
    diff = _max_numeric_diff(old.get("result"), fresh.get("result"))
    return {"replayed": argv, "max_abs_difference": diff, "digest_match": old["input_digest"] == fresh["input_digest"]}


def _max_numeric_diff(a, b) -> float:
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool):
        return abs(float(a) - float(b))
    if isinstance(a, dict) and isinstance(b, dict):
        return max((_max_numeric_diff(a[k], b.get(k)) for k in a), default=0.0)
    if isinstance(a, list) and isinstance(b, list) and len(a) == len(b):
        return max((_max_numeric_diff(x, y) for x, y in zip(a, b)), default=0.0)
    return 0.0 if a == b else float("inf")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmcflux", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--quad-tol", type=float, default=1e-10, help="absolute and relative quadrature tolerance")
    p.add_argument("--ode-tol", type=float, default=1e-12, help="ODE local error tolerance")
    p.add_argument("--fd-step", type=float, default=1e-5, help="finite-difference step relative to domain extent")
    p.add_argument("--timing", action="store_true", help="include wall-clock time in reports")
    p.add_argument("--out", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="reference surfaces")
    c.add_argument("action", choices=["list"])
    c.set_defaults(func=cmd_catalog)

    def source(sp, spec=True):
        sp.add_argument("--surface", help="catalog surface name")
        if spec:
            sp.add_argument("--spec", help="Weierstrass spec file (JSON)")

    m = sub.add_parser("mesh", help="write an OBJ mesh")
    source(m, spec=False)
    m.add_argument("--grid", default="64x32")
    m.add_argument("--t", type=float, default=None, help="associate family parameter")
    m.add_argument("--obj", required=True, help="output OBJ path")
    m.set_defaults(func=cmd_mesh)

    pe = sub.add_parser("periods", help="force, torque and Weierstrass periods")
    source(pe)
    pe.add_argument("--cycle", default=None, help="comma separated labels, 'all' or 'all-punctures'")
    pe.add_argument("--form", default="force,torque")
    pe.add_argument("--origin", default=None, help="torque base point x,y,z")
    pe.set_defaults(func=cmd_periods)

    d = sub.add_parser("deformability", help="obstructions to an associate deformation")
    source(d)
    d.set_defaults(func=cmd_deformability)

    x = sub.add_parser("cross-section", help="force through a planar section")
    source(x, spec=False)
    x.add_argument("--cycle", default=None)
    x.add_argument("--normal", default=None, help="plane normal x,y,z (default 0,0,1)")
    x.add_argument("--alexandrov", action="store_true", help="also evaluate the symmetric-plane criterion")
    x.add_argument("--trace", default=None, help="CSV file for the per-arclength integrand")
    x.add_argument("--trace-samples", type=int, default=257)
    x.set_defaults(func=cmd_cross_section)

    a = sub.add_parser("associate", help="associate family diagnostics")
    source(a, spec=False)
    a.add_argument("--t", type=float, required=True)
    a.add_argument("--grid", type=int, default=20)
    a.set_defaults(func=cmd_associate)

    r = sub.add_parser("replay", help="re-run a report's inputs and compare")
    r.add_argument("report")
    r.set_defaults(func=cmd_replay)
    return p


def _run(args, argv) -> dict:
    tol = _tolerances(args)
    inputs = _inputs(args)
    started = time.perf_counter()
    status, result, message = "ok", None, None
    try:
        result = args.func(args, tol)
    except (QuadratureError, SingularityError, PeriodMismatch) as exc:
        status, message = "numerical-failure", str(exc)
    report = {
        "tool": "cmcflux",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "input_digest": _digest(inputs),
        "tolerances": {"quad_abs": tol.quad_abs, "quad_rel": tol.quad_rel, "ode_tol": tol.ode_tol,
                       "fd_step": tol.fd_step},
        "status": status,
        "result": result,
    }
    if message:
        report["error"] = message
    if args.timing:
        report["wall_clock_s"] = time.perf_counter() - started
    return _jsonable(report)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = _run(args, argv)
    except (PreconditionViolation, ImmersionError, KeyError, ValueError, OSError) as exc:
        print(f"cmcflux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "catalog":
        return EXIT_OK
    _emit(args, report)
    return EXIT_OK if report["status"] == "ok" else EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
