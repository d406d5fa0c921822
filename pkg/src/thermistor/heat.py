"""Backward Euler step of the heat equation with Robin cooling.

Lumped mass and trapezoid boundary weights keep the system an M-matrix and
make the constant test function reproduce the discrete energy balance

    sum_i M_i (u_i - u_old_i) / dt + g sum_i B_i (u_i - h_i) = sum_i F_i

up to linear-solver round-off, whatever Picard iterate ``kappa`` was frozen at.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .constitutive import Constant, HeatModel
from .mesh import Mesh, _scatter, triangle_means
from .potential import NonlinearSolveReport, _solve, assemble_tensor_matrix


@dataclass
class HeatStepProblem:
    """Data of one implicit step.

    ``source`` is one value per triangle.  Negative values are rejected
    unless ``allow_negative_source`` is set (manufactured-solution mode).
    ``h_override`` replaces the ambient temperature by per-vertex boundary
    data, again for manufactured solutions.
    """

    mesh: Mesh
    heat: HeatModel
    u_old: np.ndarray
    dt: float
    source: np.ndarray
    h_override: np.ndarray | None = None
    allow_negative_source: bool = False

    def __post_init__(self):
        self.u_old = self.mesh.check_field(self.u_old, "u_old")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        src = np.asarray(self.source, dtype=float)
        if src.shape == ():
            src = np.full(self.mesh.n_triangles, float(src))
        if src.shape != (self.mesh.n_triangles,):
            raise ValueError(f"source needs one value per triangle, got shape {src.shape}")
        if not np.all(np.isfinite(src)):
            raise ValueError("source has non-finite entries")
        if not self.allow_negative_source and np.any(src < 0):
            raise ValueError("coupled heat sources must be non-negative")
        self.source = src
        if self.h_override is not None:
            self.h_override = self.mesh.check_field(self.h_override, "h_override")

    @property
    def ambient(self) -> np.ndarray:
        if self.h_override is not None:
            return self.h_override
        return np.full(self.mesh.n_vertices, float(self.heat.h))

    def load_vector(self) -> np.ndarray:
        """``F_i = int f v_i`` for piecewise-constant ``f``."""
        mesh = self.mesh
        return _scatter(mesh.triangles, np.repeat(mesh.areas * self.source / 3.0, 3), mesh.n_vertices)


def heat_step(problem: HeatStepProblem, picard_tol=1e-10, max_picard=50):
    """Advance the temperature by one step; returns ``(u_new, report)``.

    ``kappa`` is frozen at the previous Picard iterate, starting from
    ``u_old``; iteration stops once successive iterates agree to
    ``picard_tol`` in the max norm.
    """
    mesh, heat = problem.mesh, problem.heat
    M = mesh.lumped_mass
    B = mesh.boundary_weights()
    rhs = M * problem.u_old / problem.dt + heat.g * B * problem.ambient + problem.load_vector()
    diag = sp.diags(M / problem.dt + heat.g * B)

    report = NonlinearSolveReport()
    u = problem.u_old.copy()
    constant_kappa = isinstance(heat.kappa, Constant)
    for _ in range(max_picard):
        K = assemble_tensor_matrix(mesh, heat.kappa(triangle_means(mesh, u)))
        u_new = _solve((K + diag).tocsr(), rhs)
        change = float(np.max(np.abs(u_new - u)))
        u = u_new
        report.iterations += 1
        report.residual_norm = change
        report.methods.append("picard")
        if constant_kappa or change <= picard_tol:
            report.residual_norm = 0.0 if constant_kappa else change
            report.converged = True
            break
    return u, report


def balance_terms(problem: HeatStepProblem, u_new):
    """``(storage, robin, joule)`` of the constant-test-function identity."""
    mesh = problem.mesh
    storage = float(np.sum(mesh.lumped_mass * (u_new - problem.u_old))) / problem.dt
    robin = problem.heat.g * float(np.sum(mesh.boundary_weights() * (u_new - problem.ambient)))
    joule = float(np.sum(mesh.areas * problem.source))
    return storage, robin, joule


def constant_mode_step(problem: HeatStepProblem, c_old: float) -> float:
    """Galerkin reduction of the assembled step onto constant fields.

    Trial and test function both equal 1, so the stiffness drops out and
    ``|Omega| (c - c_old) / dt + g |dOmega| (c - h) = int f`` remains.  The
    sums are taken from the assembled lumped rows, not from the geometry.
    """
    mesh, g = problem.mesh, problem.heat.g
    area = float(np.sum(mesh.lumped_mass))
    B = mesh.boundary_weights()
    perim = float(np.sum(B))
    h_mean = float(np.sum(B * problem.ambient)) / perim
    joule = float(np.sum(problem.load_vector()))
    dt = problem.dt
    return (area * c_old / dt + g * perim * h_mean + joule) / (area / dt + g * perim)
