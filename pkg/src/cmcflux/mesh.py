"""Triangle meshes of parametric surfaces and OBJ output."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import ParametricSurface, frame_at
from .numeric import norm


@dataclass
class Mesh:
    vertices: np.ndarray
    normals: np.ndarray
    faces: np.ndarray  # (m, 3), zero based
    params: np.ndarray  # (n, 2); NaN for cap vertices
    shape: tuple[int, int]

    @property
    def edges(self) -> Counter:
        c = Counter()
        for a, b, d in self.faces:
            for i, j in ((a, b), (b, d), (d, a)):
                c[(min(i, j), max(i, j))] += 1
        return c

    @property
    def watertight(self) -> bool:
        return all(n == 2 for n in self.edges.values())

    def grid_edges(self) -> list[tuple[int, int]]:
        """Edges between two parametrised vertices, sorted."""
        ok = ~np.isnan(self.params[:, 0])
        return sorted(e for e in self.edges if ok[e[0]] and ok[e[1]])


def grid_mesh(surface: ParametricSurface, nu: int, nv: int, *, wrap_u: bool | None = None, caps=None,
              periodic_grid: bool | None = None) -> Mesh:
    """Mesh the parameter rectangle with an nu x nv vertex grid.

    ``periodic_grid`` spaces u samples as for a periodic direction (no
    duplicate seam column); ``wrap_u`` also closes the seam with faces.
    ``caps = (south, north)`` fans the two v ends to those points (for spheres).
    """
    u0, u1, v0, v1 = surface.domain
    periodic = surface.periods[0] is not None
    wrap = periodic if wrap_u is None else wrap_u
    pgrid = periodic if periodic_grid is None else periodic_grid
    us = u0 + (u1 - u0) * np.arange(nu) / (nu if pgrid else nu - 1)
    vs = np.linspace(v0, v1, nv)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    u, v = uu.ravel(), vv.ravel()
    pos = surface.position(u, v)
    nrm = frame_at(surface, (u, v), with_position=False).normal
    params = np.stack([u, v], -1)

    def idx(i, j):
        return (i % nu) * nv + j

    faces = []
    for i in range(nu if wrap else nu - 1):
        for j in range(nv - 1):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            faces += [(a, b, c), (a, c, d)]
    if caps is not None:
        south, north = (np.asarray(c, float) for c in caps)
        # pole normals continue the neighbouring rings
        s_n = nrm[[idx(i, 0) for i in range(nu)]].mean(axis=0)
        n_n = nrm[[idx(i, nv - 1) for i in range(nu)]].mean(axis=0)
        s_n /= np.linalg.norm(s_n)
        n_n /= np.linalg.norm(n_n)
        ks, kn = len(pos), len(pos) + 1
        pos = np.vstack([pos, south, north])
        nrm = np.vstack([nrm, s_n, n_n])
        params = np.vstack([params, np.full((2, 2), np.nan)])
        for i in range(nu if wrap else nu - 1):
            faces.append((idx(i + 1, 0), idx(i, 0), ks))
            faces.append((idx(i, nv - 1), idx(i + 1, nv - 1), kn))
    return Mesh(pos, nrm, np.asarray(faces, dtype=np.int64), params, (nu, nv))


def write_obj(mesh: Mesh, path, comment: str = "") -> None:
    lines = [f"# {line}" for line in comment.splitlines()] if comment else []
    lines += [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in mesh.vertices]
    lines += [f"vn {x:.12g} {y:.12g} {z:.12g}" for x, y, z in mesh.normals]
    lines += [f"f {a + 1}//{a + 1} {b + 1}//{b + 1} {c + 1}//{c + 1}" for a, b, c in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj_counts(path) -> dict:
    counts = Counter()
    for line in Path(path).read_text().splitlines():
        if line and not line.startswith("#"):
            counts[line.split()[0]] += 1
    return {"v": counts["v"], "vn": counts["vn"], "f": counts["f"]}


def chord_lengths(mesh: Mesh, edges) -> np.ndarray:
    e = np.asarray(edges)
    return norm(mesh.vertices[e[:, 1]] - mesh.vertices[e[:, 0]])


def intrinsic_lengths(surface: ParametricSurface, mesh: Mesh, edges, order: int = 12,
                      period: float | None = None) -> np.ndarray:
    """Length of the image of each straight parameter edge (Gauss-Legendre in the edge parameter)."""
    e = np.asarray(edges)
    p, q = mesh.params[e[:, 0]], mesh.params[e[:, 1]]
    d = q - p
    # undo the seam jump for wrapped periodic edges
    per = surface.periods[0] if period is None else period
    if per:
        d[:, 0] = (d[:, 0] + 0.5 * per) % per - 0.5 * per
    x, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (x + 1.0)
    pts = p[:, None, :] + s[None, :, None] * d[:, None, :]
    j = surface.jet(pts[..., 0].ravel(), pts[..., 1].ravel())
    dd = np.repeat(d, order, axis=0)
    speed = norm(dd[:, :1] * j.xu + dd[:, 1:] * j.xv).reshape(len(e), order)
    return 0.5 * speed @ w
