"""Structured P1 triangulation of a rectangle with tagged boundary edges.

Vertices are numbered row by row, ``k = j * (nx + 1) + i``.  Every cell is
split along its lower-left to upper-right diagonal into two counterclockwise
triangles.  Boundary edges are listed in one counterclockwise sweep starting
at the lower-left corner (bottom, right, top, left).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Union

import numpy as np

DIRICHLET = "dirichlet"
NEUMANN = "neumann"
SIDES = ("bottom", "right", "top", "left")

#: either a collection of side names or a predicate on edge midpoints
DirichletSpec = Union[Iterable[str], Callable[[float, float], bool]]


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable structured triangle mesh.

    Attributes
    ----------
    nx, ny : int
        Cell counts along x and y.
    domain : tuple
        ``(x0, x1, y0, y1)``.
    vertices : ndarray, shape (nv, 2)
    triangles : ndarray, shape (nt, 3)
        Counterclockwise vertex triples.
    edges : ndarray, shape (ne, 2)
        Boundary edges, oriented counterclockwise around the rectangle.
    edge_tags : tuple of str
        ``DIRICHLET`` or ``NEUMANN`` for every boundary edge.
    edge_sides : tuple of str
        Side name of every boundary edge.
    """

    nx: int
    ny: int
    domain: tuple
    vertices: np.ndarray = field(repr=False)
    triangles: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    edge_tags: tuple = field(repr=False)
    edge_sides: tuple = field(repr=False)

    def __post_init__(self):
        for arr in (self.vertices, self.triangles, self.edges):
            arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def boundary_edges(self):
        """List of ``((a, b), tag)`` pairs."""
        return [((int(a), int(b)), tag) for (a, b), tag in zip(self.edges, self.edge_tags)]

    @cached_property
    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        a = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        a.setflags(write=False)
        return a

    @cached_property
    def basis_gradients(self) -> np.ndarray:
        """Gradients of the three barycentric hat functions, shape (nt, 3, 2)."""
        p = self.vertices[self.triangles]
        # grad(lambda_k) = rot90(opposite edge) / (2 area)
        g = np.empty((self.n_triangles, 3, 2))
        for k in range(3):
            a = p[:, (k + 1) % 3]
            b = p[:, (k + 2) % 3]
            g[:, k, 0] = a[:, 1] - b[:, 1]
            g[:, k, 1] = b[:, 0] - a[:, 0]
        g /= (2.0 * self.areas)[:, None, None]
        g.setflags(write=False)
        return g

    @cached_property
    def centroids(self) -> np.ndarray:
        c = self.vertices[self.triangles].mean(axis=1)
        c.setflags(write=False)
        return c

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        ln = np.hypot(d[:, 0], d[:, 1])
        ln.setflags(write=False)
        return ln

    @cached_property
    def lumped_mass(self) -> np.ndarray:
        """Row sums of the P1 mass matrix (area / 3 per incident triangle)."""
        m = _scatter(self.triangles, np.repeat(self.areas / 3.0, 3), self.n_vertices)
        m.setflags(write=False)
        return m

    def boundary_weights(self, tags=None) -> np.ndarray:
        """Trapezoid weights of the selected boundary edges, one per vertex."""
        sel = self._edge_selection(tags)
        w = _scatter(self.edges[sel], np.repeat(self.edge_lengths[sel] / 2.0, 2), self.n_vertices)
        return w

    @cached_property
    def dirichlet_vertices(self) -> np.ndarray:
        sel = self._edge_selection(DIRICHLET)
        v = np.unique(self.edges[sel].ravel())
        v.setflags(write=False)
        return v

    @cached_property
    def free_vertices(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.dirichlet_vertices] = False
        v = np.flatnonzero(mask)
        v.setflags(write=False)
        return v

    @cached_property
    def dirichlet_segments(self) -> tuple:
        """Connected runs of Dirichlet edges, as sorted vertex index arrays.

        Runs are ordered by the sweep index of their first edge; a run that
        wraps through the lower-left corner stays in one piece.
        """
        is_d = [t == DIRICHLET for t in self.edge_tags]
        ne = len(is_d)
        if all(is_d):
            return (np.unique(self.edges.ravel()),)
        # rotate so the sweep starts right after a Neumann edge
        start = next(i for i in range(ne) if not is_d[i - 1] and is_d[i]) if any(is_d) else 0
        runs, cur = [], []
        for k in range(ne):
            i = (start + k) % ne
            if is_d[i]:
                cur.append(i)
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        runs.sort(key=lambda r: r[0])
        return tuple(np.unique(self.edges[r].ravel()) for r in runs)

    def _edge_selection(self, tags) -> np.ndarray:
        if tags is None or tags == "all":
            return np.ones(len(self.edges), dtype=bool)
        if isinstance(tags, str):
            tags = (tags,)
        tags = set(tags)
        unknown = tags - {DIRICHLET, NEUMANN} - set(SIDES)
        if unknown:
            raise MeshError(f"unknown boundary tag(s): {sorted(unknown)}")
        return np.array([t in tags or s in tags for t, s in zip(self.edge_tags, self.edge_sides)])

    def check_field(self, values, name="field") -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_vertices,):
            raise MeshError(
                f"{name} has shape {values.shape}, mesh has {self.n_vertices} vertices"
            )
        return values

    def interpolate(self, fn) -> np.ndarray:
        """Vertex values of ``fn(x, y)`` (vectorized)."""
        x, y = self.vertices.T
        return np.broadcast_to(np.asarray(fn(x, y), dtype=float), (self.n_vertices,)).copy()


def _scatter(index: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    # bincount sums in index order, so reductions are reproducible
    return np.bincount(np.asarray(index).ravel(), weights=np.asarray(weights).ravel(), minlength=n)


def build_mesh(nx: int, ny: int, rect=(0.0, 1.0, 0.0, 1.0), dirichlet: DirichletSpec = ("left", "right")) -> Mesh:
    """Triangulate ``rect = (x0, x1, y0, y1)`` into ``2 * nx * ny`` triangles.

    Parameters
    ----------
    nx, ny : int
        Number of cells per axis, both at least 1.
    rect : sequence of 4 floats
        ``(x0, x1, y0, y1)`` with ``x0 < x1`` and ``y0 < y1``.
    dirichlet : iterable of str or callable
        Side names out of ``bottom, right, top, left``, or a predicate
        ``pred(xm, ym) -> bool`` evaluated at each boundary edge midpoint.

    Raises
    ------
    MeshError
        On a degenerate rectangle, bad counts, or an empty Dirichlet set.
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise MeshError(f"cell counts must be positive integers, got nx={nx}, ny={ny}")
    nx, ny = int(nx), int(ny)
    x0, x1, y0, y1 = (float(v) for v in rect)
    if not (np.isfinite([x0, x1, y0, y1]).all() and x1 > x0 and y1 > y0):
        raise MeshError(f"degenerate rectangle {rect!r}")

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    edges, sides = [], []
    for a in range(nx):
        edges.append((vid(a, 0), vid(a + 1, 0)))
        sides.append("bottom")
    for b in range(ny):
        edges.append((vid(nx, b), vid(nx, b + 1)))
        sides.append("right")
    for a in range(nx, 0, -1):
        edges.append((vid(a, ny), vid(a - 1, ny)))
        sides.append("top")
    for b in range(ny, 0, -1):
        edges.append((vid(0, b), vid(0, b - 1)))
        sides.append("left")
    edges = np.array(edges, dtype=np.int64)

    if callable(dirichlet):
        mid = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
        tags = tuple(DIRICHLET if dirichlet(float(xm), float(ym)) else NEUMANN for xm, ym in mid)
    else:
        chosen = {dirichlet} if isinstance(dirichlet, str) else set(dirichlet)
        bad = chosen - set(SIDES)
        if bad:
            raise MeshError(f"unknown side name(s) {sorted(bad)}; expected {SIDES}")
        tags = tuple(DIRICHLET if s in chosen else NEUMANN for s in sides)
    if DIRICHLET not in tags:
        raise MeshError("the Dirichlet part of the boundary must be non-empty")

    return Mesh(nx, ny, (x0, x1, y0, y1), vertices, triangles.astype(np.int64), edges, tags, tuple(sides))


def gradient_per_triangle(mesh: Mesh, field) -> np.ndarray:
    """Constant gradient of the P1 interpolant on each triangle, shape (nt, 2)."""
    values = mesh.check_field(field)
    return np.einsum("tkd,tk->td", mesh.basis_gradients, values[mesh.triangles])


def triangle_means(mesh: Mesh, field) -> np.ndarray:
    values = mesh.check_field(field)
    return values[mesh.triangles].mean(axis=1)


def integrate_volume(mesh: Mesh, per_triangle) -> float:
    per_triangle = np.asarray(per_triangle, dtype=float)
    if per_triangle.shape != (mesh.n_triangles,):
        raise MeshError(
            f"per-triangle data has shape {per_triangle.shape}, mesh has {mesh.n_triangles} triangles"
        )
    return float(np.sum(mesh.areas * per_triangle))


def integrate_boundary(mesh: Mesh, per_vertex, tags=None) -> float:
    """Trapezoid rule over boundary edges whose tag or side is in ``tags``.

    ``tags=None`` or ``"all"`` integrates over the whole boundary.
    """
    values = mesh.check_field(per_vertex, "boundary data")
    sel = mesh._edge_selection(tags)
    e = mesh.edges[sel]
    return float(np.sum(mesh.edge_lengths[sel] * 0.5 * (values[e[:, 0]] + values[e[:, 1]])))
