"""Time loop for the coupled potential / temperature system.

Each step solves the potential with the current temperature iterate, builds
the Joule source from that same-level potential, and takes one implicit
heat step; up to ``outer_coupling_iters`` such passes are made per step.
Inside a step the regularization strength runs through ``eps_schedule``,
each stage warm-starting the next, so the last entry decides the model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .constitutive import Constant, ConductivityModel, HeatModel, ModelError, source_f, source_f_eps
from .diagnostics import DiagnosticsRow, balance_residual, estimate_functionals
from .heat import HeatStepProblem, heat_step
from .mesh import SIDES, build_mesh, gradient_per_triangle, triangle_means
from .potential import PotentialProblem, SolverError, solve_potential

logger = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """A step failed; ``states`` holds every state accepted before it."""

    def __init__(self, message, states=()):
        super().__init__(message)
        self.states = list(states)

    @property
    def last_state(self):
        return self.states[-1] if self.states else None


@dataclass(frozen=True)
class SpatialBump:
    """Initial temperature ``base + amplitude exp(-|x - center|^2 / width^2)``."""

    base: float = 0.0
    amplitude: float = 0.0
    center: tuple = (0.5, 0.5)
    width: float = 0.25

    def __call__(self, x, y):
        r2 = (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2
        return self.base + self.amplitude * np.exp(-r2 / self.width**2)


def make_initial(spec):
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return SpatialBump(base=float(spec))
    if isinstance(spec, SpatialBump):
        return spec
    if isinstance(spec, Constant):
        return SpatialBump(base=spec.value)
    spec = dict(spec)
    shape = spec.pop("shape", "constant")
    if shape == "constant":
        return SpatialBump(base=float(spec.pop("value", 0.0)), **spec)
    if shape == "bump":
        if "center" in spec:
            spec["center"] = tuple(spec["center"])
        return SpatialBump(**spec)
    raise ModelError(f"unknown initial temperature shape {shape!r}; use 'constant' or 'bump'")


@dataclass
class SimulationConfig:
    """Everything a run needs.  Defaults give the two-terminal unit square."""

    nx: int = 16
    ny: int = 16
    rect: tuple = (0.0, 1.0, 0.0, 1.0)
    dirichlet: dict = field(default_factory=lambda: {"left": 0.0, "right": 1.0})
    conductivity: ConductivityModel = field(default_factory=ConductivityModel)
    heat: HeatModel = field(default_factory=HeatModel)
    T: float = 1.0
    dt: float = 0.1
    ramp: str = "constant"
    u0: object = 0.0
    eps_schedule: tuple = (0.0,)
    outer_coupling_iters: int = 2
    outer_tol: float = 1e-8
    potential_tol: float = 1e-10
    potential_max_iter: int = 60
    picard_tol: float = 1e-10
    max_picard: int = 50
    lam: float = 0.5
    eps_in_potential: bool = True
    eps_in_source: bool = True

    def __post_init__(self):
        self.u0 = make_initial(self.u0)
        self.eps_schedule = tuple(float(e) for e in self.eps_schedule)
        self.rect = tuple(float(v) for v in self.rect)
        self.dirichlet = {str(k): float(v) for k, v in dict(self.dirichlet).items()}
        self.validate()

    def validate(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be positive, got {self.T}")
        if not 0 < self.dt <= self.T:
            raise ValueError(f"dt must lie in (0, T], got dt={self.dt}, T={self.T}")
        eps = self.eps_schedule
        if not eps or any(not (math.isfinite(e) and e >= 0) for e in eps):
            raise ValueError(f"eps_schedule needs non-negative entries, got {list(eps)}")
        if any(b > a for a, b in zip(eps, eps[1:])):
            raise ValueError(f"eps_schedule must be decreasing, got {list(eps)}")
        if self.outer_coupling_iters < 1:
            raise ValueError("outer_coupling_iters must be at least 1")
        if not 0 < self.lam < 1:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.ramp not in ("constant", "linear"):
            raise ValueError(f"ramp must be 'constant' or 'linear', got {self.ramp!r}")
        bad = set(self.dirichlet) - set(SIDES)
        if bad or not self.dirichlet:
            raise ValueError(f"dirichlet must map side names {SIDES} to voltages, got {self.dirichlet}")
        for tol in (self.outer_tol, self.potential_tol, self.picard_tol):
            if not tol > 0:
                raise ValueError("tolerances must be positive")

    @cached_property
    def mesh(self):
        return build_mesh(self.nx, self.ny, self.rect, tuple(self.dirichlet))

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.T / self.dt - 1e-9))

    @property
    def stages(self) -> tuple:
        """``eps_schedule`` with repeated consecutive entries collapsed."""
        out = []
        for e in self.eps_schedule:
            if not out or e != out[-1]:
                out.append(e)
        return tuple(out)

    @property
    def final_eps(self) -> float:
        return self.eps_schedule[-1]

    @cached_property
    def phi_D_shape(self) -> np.ndarray:
        """Voltage per Dirichlet vertex at full ramp."""
        mesh = self.mesh
        values = {}
        for (a, b), side in zip(mesh.edges, mesh.edge_sides):
            if side not in self.dirichlet:
                continue
            for v in (int(a), int(b)):
                val = self.dirichlet[side]
                if v in values and values[v] != val:
                    x, y = mesh.vertices[v]
                    raise ValueError(f"conflicting Dirichlet voltages at corner ({x:g}, {y:g})")
                values[v] = val
        return np.array([values[int(v)] for v in mesh.dirichlet_vertices])

    def ramp_factor(self, t) -> float:
        if self.ramp == "linear":
            return min(1.0, t / (self.T / 10.0))
        return 1.0

    def phi_D(self, t) -> np.ndarray:
        return self.ramp_factor(t) * self.phi_D_shape

    def initial_temperature(self) -> np.ndarray:
        return self.mesh.interpolate(self.u0)

    def time(self, k) -> float:
        return min(k * self.dt, self.T)


@dataclass
class SimulationState:
    k: int
    t: float
    phi: np.ndarray
    u: np.ndarray
    row: DiagnosticsRow | None = None
    u_phi: np.ndarray | None = None  # temperature the potential was solved with
    source: np.ndarray | None = None  # per-triangle source used at this level
    reports: list = field(default_factory=list)


@dataclass
class SimulationResult:
    config: SimulationConfig
    states: list

    @property
    def rows(self):
        return [s.row for s in self.states]

    @property
    def final(self) -> SimulationState:
        return self.states[-1]

    @property
    def linf_l1(self) -> float:
        """``max_k int |u_k| dx``."""
        return max(r.l1_norm_u for r in self.rows)


def _joule_source(config: SimulationConfig, phi, u, t, eps):
    mesh = config.mesh
    f = source_f(
        config.conductivity,
        config.heat,
        mesh.centroids,
        t,
        triangle_means(mesh, u),
        gradient_per_triangle(mesh, phi),
    )
    return source_f_eps(f, eps if config.eps_in_source else 0.0)


def _potential(config, u, t, eps, guess, context):
    problem = PotentialProblem(
        config.mesh,
        config.conductivity,
        u,
        config.phi_D(t),
        eps if config.eps_in_potential else 0.0,
    )
    phi, rep = solve_potential(problem, guess, config.potential_tol, config.potential_max_iter)
    if not rep.converged:
        raise SolverError(
            f"{context}: potential solve stopped at residual {rep.residual_norm:.3e} "
            f"after {rep.iterations} iterations"
        )
    return phi, rep


def _row(config, state_phi, u, u_phi, source, t, balance=0.0):
    eps = config.final_eps
    row = estimate_functionals(
        config.mesh,
        state_phi,
        u,
        config.conductivity,
        config.heat,
        lam=config.lam,
        eps=eps if config.eps_in_potential else 0.0,
        t=t,
        source=source,
        u_phi=u_phi,
    )
    return replace(row, balance_residual=balance)


def initial_state(config: SimulationConfig) -> SimulationState:
    """Level 0: ``u = u0`` and the potential solved against it."""
    u = config.initial_temperature()
    phi, reports = None, []
    for eps in config.stages:
        phi, rep = _potential(config, u, 0.0, eps, phi, f"initial level, eps={eps:g}")
        reports.append(rep)
    source = _joule_source(config, phi, u, 0.0, config.final_eps)
    state = SimulationState(0, 0.0, phi, u, None, u, source, reports)
    state.row = _row(config, phi, u, u, source, 0.0)
    return state


def coupled_step(state: SimulationState, config: SimulationConfig) -> SimulationState:
    """Advance one time level.

    Raises
    ------
    SolverError
        With step, stage and outer-iterate context when a solve fails.
    """
    k = state.k + 1
    t = config.time(k)
    u_iter = state.u
    phi = state.phi
    reports = []
    for eps in config.stages:
        for j in range(config.outer_coupling_iters):
            context = f"step {k} (t={t:g}), eps={eps:g}, outer iterate {j + 1}"
            phi, rep = _potential(config, u_iter, t, eps, phi, context)
            reports.append(rep)
            u_phi = u_iter
            source = _joule_source(config, phi, u_phi, t, eps)
            problem = HeatStepProblem(config.mesh, config.heat, state.u, config.dt, source)
            u_new, hrep = heat_step(problem, config.picard_tol, config.max_picard)
            reports.append(hrep)
            if not hrep.converged:
                raise SolverError(f"{context}: heat Picard iteration did not converge")
            change = float(np.max(np.abs(u_new - u_iter)))
            u_iter = u_new
            if change <= config.outer_tol:
                break
    balance = balance_residual(problem, u_iter)
    new = SimulationState(k, t, phi, u_iter, None, u_phi, source, reports)
    new.row = _row(config, phi, u_iter, u_phi, source, t, balance)
    return new


def run_simulation(config: SimulationConfig, on_state=None) -> SimulationResult:
    """Run ``k = 0 .. ceil(T / dt)``; ``on_state(state)`` is called per level.

    Raises
    ------
    SimulationError
        Carrying every accepted state when a step fails.
    """
    states = []
    try:
        state = initial_state(config)
        states.append(state)
        if on_state:
            on_state(state)
        for _ in range(config.n_steps):
            state = coupled_step(state, config)
            states.append(state)
            if on_state:
                on_state(state)
    except (SolverError, ValueError) as exc:
        raise SimulationError(str(exc), states) from exc
    return SimulationResult(config, states)


@dataclass
class EpsStudy:
    eps_values: tuple
    finals: list  # final temperature per terminal eps
    differences: list  # max-norm differences of consecutive finals
    results: list = field(default_factory=list, repr=False)  # SimulationResult per schedule prefix

    @property
    def strictly_decreasing(self) -> bool:
        d = self.differences
        return all(b < a for a, b in zip(d, d[1:]))


def eps_study(config: SimulationConfig) -> EpsStudy:
    """Final temperatures of runs ending at each entry of ``eps_schedule``.

    The run for entry ``j`` uses the schedule prefix ``eps_schedule[:j+1]``
    as its continuation path.
    """
    eps = config.eps_schedule
    results = []
    for j in range(len(eps)):
        results.append(run_simulation(replace(config, eps_schedule=eps[: j + 1])))
        logger.info("eps study: eps=%g done", eps[j])
    finals = [r.final.u for r in results]
    diffs = [float(np.max(np.abs(a - b))) for a, b in zip(finals, finals[1:])]
    return EpsStudy(eps, finals, diffs, results)
