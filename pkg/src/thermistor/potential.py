"""Nonlinear P1 solver for the quasi-static potential equation.

For a frozen temperature ``u`` this finds ``phi`` with ``phi = phi_D`` on
the Dirichlet vertices and

    sum_T |T| (eps |grad phi|^(p-2) + sigma(u_T, |grad phi|)) grad phi . grad zeta_i = 0

for every hat function ``zeta_i`` of a non-Dirichlet vertex.  The Neumann
(insulation) condition is natural.  ``u_T`` is the mean of the three vertex
temperatures of triangle ``T``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constitutive import TAU_FLOOR, ConductivityModel, Kind
from .mesh import Mesh, _scatter, gradient_per_triangle, triangle_means

logger = logging.getLogger(__name__)

P_MIN, P_MAX = 1.2, 6.0
DELTA_NEWTON = 1e-10
ARMIJO = 1e-4
MAX_HALVINGS = 30
PICARD_WARMUP = 3
P_STEP = 0.5


class SolverError(RuntimeError):
    pass


class SingularLinearizationError(SolverError):
    pass


@dataclass
class NonlinearSolveReport:
    iterations: int = 0
    residual_norm: float = math.inf
    converged: bool = False
    damping_history: list = field(default_factory=list)
    methods: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)  # initial norm, then one per accepted step


@dataclass
class PotentialProblem:
    """Potential problem at one time slice.

    ``phi_D`` holds either one value per Dirichlet vertex (in the order of
    ``mesh.dirichlet_vertices``) or one value per mesh vertex, of which only
    the Dirichlet entries are read.
    """

    mesh: Mesh
    model: ConductivityModel
    u_field: np.ndarray
    phi_D: np.ndarray
    eps: float = 0.0

    def __post_init__(self):
        self.u_field = self.mesh.check_field(self.u_field, "temperature")
        if not np.all(np.isfinite(self.u_field)):
            raise ValueError("temperature field has non-finite entries")
        phi_D = np.asarray(self.phi_D, dtype=float)
        nd = len(self.mesh.dirichlet_vertices)
        if phi_D.shape == (self.mesh.n_vertices,):
            phi_D = phi_D[self.mesh.dirichlet_vertices]
        if phi_D.shape != (nd,):
            raise ValueError(f"phi_D needs {nd} Dirichlet values, got shape {phi_D.shape}")
        if not np.all(np.isfinite(phi_D)):
            raise ValueError("phi_D has non-finite entries")
        self.phi_D = phi_D
        if not self.eps >= 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")

    def with_model(self, model):
        return PotentialProblem(self.mesh, model, self.u_field, self.phi_D, self.eps)


def _check_exponent(model: ConductivityModel):
    if not P_MIN <= model.p <= P_MAX:
        raise ValueError(f"the PDE solvers support {P_MIN} <= p <= {P_MAX}, got p={model.p}")


def residual_coefficient(model: ConductivityModel, u_tri, tau, eps):
    """``eps tau^(p-2) + sigma(u, tau)`` per triangle, with tau floored for the eps term."""
    p = model.p
    s0 = model.sigma0(u_tri)
    if model.kind is Kind.REGULARIZED:
        k = s0 * (model.delta + tau * tau) ** ((p - 2.0) / 2.0)
    elif p == 2.0:
        k = s0.copy()
    else:
        k = s0 * tau ** (p - 2.0)
    if eps > 0:
        k = k + eps * np.maximum(tau, TAU_FLOOR) ** (p - 2.0)
    return k


def _newton_coefficients(model: ConductivityModel, u_tri, tau, eps):
    """``(k, m)`` with flux Jacobian ``k I + m g g^T``, smoothed at zero gradient."""
    p = model.p
    e = (p - 2.0) / 2.0
    s0 = model.sigma0(u_tri)
    delta = model.delta if model.kind is Kind.REGULARIZED else DELTA_NEWTON
    base = delta + tau * tau
    k = s0 * base**e
    m = s0 * (p - 2.0) * base ** (e - 1.0)
    if eps > 0:
        reg = DELTA_NEWTON + tau * tau
        k = k + eps * reg**e
        m = m + eps * (p - 2.0) * reg ** (e - 1.0)
    return k, m


def unconstrained_residual(mesh: Mesh, model: ConductivityModel, u_field, phi, eps=0.0):
    """Residual row of every vertex, Dirichlet vertices included."""
    g = gradient_per_triangle(mesh, phi)
    tau = np.sqrt(np.sum(g * g, axis=1))
    k = residual_coefficient(model, triangle_means(mesh, u_field), tau, eps)
    flux = k[:, None] * g
    local = mesh.areas[:, None] * np.einsum("tkd,td->tk", mesh.basis_gradients, flux)
    return _scatter(mesh.triangles, local, mesh.n_vertices)


def assemble_potential_residual(problem: PotentialProblem, phi):
    """Residual on the non-Dirichlet vertices and its max-abs norm."""
    mesh = problem.mesh
    phi = mesh.check_field(phi, "phi")
    if not np.all(np.isfinite(phi)):
        raise ValueError("phi has non-finite entries")
    if not np.array_equal(phi[mesh.dirichlet_vertices], problem.phi_D):
        raise ValueError("phi does not match the Dirichlet data")
    full = unconstrained_residual(mesh, problem.model, problem.u_field, phi, problem.eps)
    r = full[mesh.free_vertices]
    return r, float(np.max(np.abs(r))) if r.size else 0.0


def assemble_tensor_matrix(mesh: Mesh, k, m=None, g=None):
    """Global matrix of ``sum_T |T| grad(v_a) . (k I + m g g^T) grad(v_b)``."""
    G = mesh.basis_gradients
    local = k[:, None, None] * np.einsum("tad,tbd->tab", G, G)
    if m is not None:
        Gg = np.einsum("tad,td->ta", G, g)
        local = local + m[:, None, None] * Gg[:, :, None] * Gg[:, None, :]
    local *= mesh.areas[:, None, None]
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = mesh.n_vertices
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def _solve(A, b):
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise SingularLinearizationError(f"singular linearization: {exc}") from None
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SingularLinearizationError("linear solve produced non-finite values")
    return x


def harmonic_extension(problem: PotentialProblem) -> np.ndarray:
    """Dirichlet data extended by one weighted Laplace solve (``sigma0(u)`` weights)."""
    mesh = problem.mesh
    phi = np.zeros(mesh.n_vertices)
    phi[mesh.dirichlet_vertices] = problem.phi_D
    free = mesh.free_vertices
    if free.size == 0:
        return phi
    k = problem.model.sigma0(triangle_means(mesh, problem.u_field))
    K = assemble_tensor_matrix(mesh, k)
    rhs = -(K[free][:, mesh.dirichlet_vertices] @ problem.phi_D)
    phi[free] = _solve(K[free][:, free], rhs)
    return phi


def _p_path(p):
    """Intermediate exponents from 2 toward ``p`` in steps of 0.5 (exclusive)."""
    if abs(p - 2.0) <= 1.0:
        return []
    step = P_STEP if p > 2 else -P_STEP
    n = int(math.ceil(abs(p - 2.0) / P_STEP))
    return [2.0 + step * i for i in range(1, n) if abs(step * i) < abs(p - 2.0)]


def solve_potential(problem: PotentialProblem, initial_guess=None, tol=1e-10, max_iter=60):
    """Damped Newton / Picard iteration for the potential.

    Parameters
    ----------
    problem : PotentialProblem
    initial_guess : array, optional
        Vertex values; Dirichlet entries are overwritten with ``phi_D``.
        Without a guess the weighted harmonic extension of ``phi_D`` is used,
        followed by continuation in ``p`` when ``|p - 2| > 1``.
    tol : float
        Target max-abs residual on the free vertices.
    max_iter : int

    Returns
    -------
    phi : ndarray
    report : NonlinearSolveReport
        ``converged`` is False when the tolerance was not reached; the
        caller decides what to do with the iterate.

    Raises
    ------
    SingularLinearizationError
        If a linear system could not be factored.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    _check_exponent(problem.model)
    mesh = problem.mesh
    if initial_guess is None:
        phi = harmonic_extension(problem)
        for pk in _p_path(problem.model.p):
            phi, rep = solve_potential(problem.with_model(problem.model.with_p(pk)), phi, tol, max_iter)
            logger.debug("p-continuation stage p=%g: %s", pk, rep)
    else:
        phi = mesh.check_field(initial_guess, "initial guess").copy()
        phi[mesh.dirichlet_vertices] = problem.phi_D
    return _iterate(problem, phi, tol, max_iter)


def _iterate(problem: PotentialProblem, phi, tol, max_iter):
    mesh, model, eps = problem.mesh, problem.model, problem.eps
    free = mesh.free_vertices
    report = NonlinearSolveReport()
    r, norm = assemble_potential_residual(problem, phi)
    u_tri = triangle_means(mesh, problem.u_field)
    report.residual_history.append(norm)

    def direction(method):
        g = gradient_per_triangle(mesh, phi)
        tau = np.sqrt(np.sum(g * g, axis=1))
        if method == "picard":
            K = assemble_tensor_matrix(mesh, residual_coefficient(model, u_tri, tau, eps))
            # Kacanov step: solve the frozen-coefficient problem, step toward it
            return _solve(K[free][:, free], -r) if free.size else None
        k, m = _newton_coefficients(model, u_tri, tau, eps)
        if np.any(k <= 0) or np.any(k + m * tau * tau <= 0):
            return None
        J = assemble_tensor_matrix(mesh, k, m, g)
        return _solve(J[free][:, free], -r)

    while norm > tol and report.iterations < max_iter:
        order = ("picard", "newton") if report.iterations < PICARD_WARMUP else ("newton", "picard")
        accepted = False
        for method in order:
            d = direction(method)
            if d is None:
                continue
            s = 1.0
            for _ in range(MAX_HALVINGS + 1):
                trial = phi.copy()
                trial[free] += s * d
                r_t, n_t = assemble_potential_residual(problem, trial)
                if n_t <= (1.0 - ARMIJO * s) * norm:
                    accepted = True
                    break
                s *= 0.5
            if accepted:
                break
        if not accepted:
            logger.debug("line search stalled at residual %.3e", norm)
            break
        phi, r, norm = trial, r_t, n_t
        report.iterations += 1
        report.damping_history.append(s)
        report.methods.append(method)
        report.residual_history.append(norm)

    report.residual_norm = norm
    report.converged = norm <= tol
    return phi, report
