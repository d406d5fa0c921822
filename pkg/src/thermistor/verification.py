"""Reference problems with known answers.

* strip: linear potential between two opposite electrodes;
* manufactured heat solution ``exp(-t) cos(pi x) cos(pi y)``;
* Robin relaxation of a uniform temperature, compared with the
  constant-mode reduction of the assembled step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constitutive import Constant, ConductivityModel, HeatModel
from .heat import HeatStepProblem, constant_mode_step, heat_step
from .mesh import Mesh, build_mesh
from .potential import PotentialProblem, solve_potential

# degree-4 rule on the reference triangle (Dunavant, 6 points)
_A, _B = 0.445948490915965, 0.091576213509771
_W1, _W2 = 0.223381589678011, 0.109951743655322
QUAD_BARY = np.array(
    [
        [_A, _A, 1 - 2 * _A],
        [_A, 1 - 2 * _A, _A],
        [1 - 2 * _A, _A, _A],
        [_B, _B, 1 - 2 * _B],
        [_B, 1 - 2 * _B, _B],
        [1 - 2 * _B, _B, _B],
    ]
)
QUAD_W = np.array([_W1, _W1, _W1, _W2, _W2, _W2])


def l2_error(mesh: Mesh, values, exact) -> float:
    """``|| u_h - exact ||_{L2}`` with a 6-point rule per triangle."""
    values = mesh.check_field(values)
    pts = np.einsum("qk,tkd->tqd", QUAD_BARY, mesh.vertices[mesh.triangles])
    uh = np.einsum("qk,tk->tq", QUAD_BARY, values[mesh.triangles])
    err = uh - exact(pts[..., 0], pts[..., 1])
    return math.sqrt(float(np.sum(mesh.areas[:, None] * QUAD_W[None, :] * err * err)))


def strip_error(nx, model: ConductivityModel, eps=0.0, u=None, tol=1e-10):
    """Max deviation from ``phi = x`` on the unit square with phi = 0 / 1 on x = 0 / 1."""
    mesh = build_mesh(nx, nx, dirichlet=("left", "right"))
    x = mesh.vertices[:, 0]
    u = np.zeros(mesh.n_vertices) if u is None else u
    phi, rep = solve_potential(PotentialProblem(mesh, model, u, x, eps), tol=tol)
    return float(np.max(np.abs(phi - x))), rep


# ---------------------------------------------------------------------------
# manufactured heat solution


def mms_exact(x, y, t):
    return math.exp(-t) * np.cos(math.pi * x) * np.cos(math.pi * y)


def mms_source(x, y, t):
    # u_t - lap(u) for the exact field (kappa = 1)
    return (2.0 * math.pi**2 - 1.0) * mms_exact(x, y, t)


def mms_run(n, dt, T=0.5, g=1.0):
    """Backward Euler run against the manufactured solution.

    The exact field has zero normal derivative on every side, so the Robin
    condition holds when the ambient temperature equals the exact boundary
    trace; that trace is passed as ``h_override``.

    Returns the L2 error at ``T``.
    """
    mesh = build_mesh(n, n, dirichlet=("left",))
    heat = HeatModel(Constant(1.0), g, 0.0, Constant(0.0))
    x, y = mesh.vertices.T
    cx, cy = mesh.centroids.T
    u = mms_exact(x, y, 0.0)
    steps = int(round(T / dt))
    for k in range(1, steps + 1):
        t = k * dt
        problem = HeatStepProblem(
            mesh,
            heat,
            u,
            dt,
            mms_source(cx, cy, t),
            h_override=mms_exact(x, y, t),
            allow_negative_source=True,
        )
        u, _ = heat_step(problem)
    return l2_error(mesh, u, lambda px, py: mms_exact(px, py, steps * dt))


@dataclass
class ConvergenceStudy:
    parameters: list
    errors: list

    @property
    def rates(self):
        return [
            math.log(e0 / e1) / math.log(p0 / p1)
            for (p0, e0), (p1, e1) in zip(zip(self.parameters, self.errors), zip(self.parameters[1:], self.errors[1:]))
        ]


def mms_spatial_study(ns=(8, 16, 32), T=0.5, dt_coarse=0.02):
    """Spatial rate with ``dt`` refined as ``h^2`` so time error keeps pace."""
    errors = []
    for n in ns:
        dt = dt_coarse * (ns[0] / n) ** 2
        errors.append(mms_run(n, dt, T))
    return ConvergenceStudy([1.0 / n for n in ns], errors)


def mms_temporal_study(dts=(0.2, 0.1, 0.05), n=128, T=1.0):
    errors = [mms_run(n, dt, T) for dt in dts]
    return ConvergenceStudy(list(dts), errors)


# ---------------------------------------------------------------------------
# Robin relaxation


@dataclass
class RelaxationTrace:
    times: list
    constant_mode: list  # reduction of the assembled step
    recursion: list  # hand-derived scalar recursion
    field_max: list
    field_min: list
    fields: list


def robin_relaxation(n=16, dt=0.1, steps=20, g=1.0, h=0.0, kappa=1.0):
    """Uniform ``u0 = h + 1`` relaxing under Robin cooling with no source."""
    mesh = build_mesh(n, n, dirichlet=("left",))
    heat = HeatModel(Constant(kappa), g, h, Constant(0.0))
    area = (mesh.domain[1] - mesh.domain[0]) * (mesh.domain[3] - mesh.domain[2])
    perim = 2 * ((mesh.domain[1] - mesh.domain[0]) + (mesh.domain[3] - mesh.domain[2]))
    u = np.full(mesh.n_vertices, h + 1.0)
    c = r = h + 1.0
    trace = RelaxationTrace([0.0], [c], [r], [u.max()], [u.min()], [u])
    for k in range(1, steps + 1):
        problem = HeatStepProblem(mesh, heat, u, dt, np.zeros(mesh.n_triangles))
        u, _ = heat_step(problem)
        c = constant_mode_step(HeatStepProblem(mesh, heat, np.full(mesh.n_vertices, c), dt, 0.0), c)
        r = h + (r - h) / (1.0 + dt * g * perim / area)
        trace.times.append(k * dt)
        trace.constant_mode.append(c)
        trace.recursion.append(r)
        trace.field_max.append(float(u.max()))
        trace.field_min.append(float(u.min()))
        trace.fields.append(u)
    return trace

