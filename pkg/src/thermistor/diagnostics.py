"""Functionals, balance checks, terminal currents and monotonicity suites."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constitutive import (
    ConductivityModel,
    HeatModel,
    iv_curve,
    monotonicity_gap,
    plap_gap,
    plap_monotonicity_lower_bound,
    sigma_eval,
    source_bound_constant,
    source_f,
    source_f_eps,
)
from .heat import HeatStepProblem, balance_terms
from .mesh import Mesh, gradient_per_triangle, integrate_boundary, triangle_means
from .potential import unconstrained_residual

CSV_BASE_COLUMNS = (
    "t",
    "l1_u",
    "weighted_grad",
    "energy_p",
    "aug_energy",
    "joule",
    "robin_flux",
    "balance_res",
)


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    l1_norm_u: float
    weighted_grad: float
    dirichlet_energy_p: float
    augmented_energy: float
    joule_total: float
    robin_flux: float
    balance_residual: float = 0.0
    terminal_currents: tuple = ()

    def values(self):
        return (
            self.t,
            self.l1_norm_u,
            self.weighted_grad,
            self.dirichlet_energy_p,
            self.augmented_energy,
            self.joule_total,
            self.robin_flux,
            self.balance_residual,
            *self.terminal_currents,
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values())))


def csv_header(n_segments: int):
    return list(CSV_BASE_COLUMNS) + [f"I_seg{i}" for i in range(n_segments)]


def estimate_functionals(
    mesh: Mesh,
    phi,
    u,
    model: ConductivityModel,
    heat: HeatModel,
    lam=0.5,
    eps=0.0,
    t=0.0,
    source=None,
    u_phi=None,
) -> DiagnosticsRow:
    """Evaluate the a-priori-estimate functionals on one time level.

    ``u_phi`` is the temperature the potential was solved against (defaults
    to ``u``); it enters every quantity built from ``sigma``.  ``source`` is
    the per-triangle heat source actually used; without it the source is
    rebuilt from ``phi`` and truncated with ``eps``.
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    u = mesh.check_field(u, "u")
    u_phi = u if u_phi is None else mesh.check_field(u_phi, "u_phi")
    area = mesh.areas

    l1 = float(np.sum(mesh.lumped_mass * np.abs(u)))
    gu = gradient_per_triangle(mesh, u)
    u_bar = triangle_means(mesh, u)
    weighted = lam * float(np.sum(area * np.sum(gu * gu, axis=1) / (1.0 + np.abs(u_bar)) ** (1.0 + lam)))

    gp = gradient_per_triangle(mesh, phi)
    tau = np.sqrt(np.sum(gp * gp, axis=1))
    up_bar = triangle_means(mesh, u_phi)
    energy_p = float(np.sum(area * tau**model.p))
    aug = eps * energy_p + float(np.sum(area * sigma_eval(model, up_bar, tau) * tau * tau))
    if source is None:
        source = source_f_eps(source_f(model, heat, mesh.centroids, t, up_bar, gp), eps)
    joule = float(np.sum(area * source))
    robin = heat.g * integrate_boundary(mesh, u - heat.h)
    currents = tuple(
        terminal_current(mesh, phi, u_phi, model, i, eps) for i in range(len(mesh.dirichlet_segments))
    )
    return DiagnosticsRow(t, l1, weighted, energy_p, aug, joule, robin, 0.0, currents)


def balance_residual(problem: HeatStepProblem, u_new) -> float:
    """``|sum M (u_new - u_old)/dt + g int (u_new - h) - int f|`` for one step."""
    storage, robin, joule = balance_terms(problem, u_new)
    return abs(storage + robin - joule)


def terminal_current(mesh: Mesh, phi, u, model: ConductivityModel, segment, eps=0.0) -> float:
    """Net current through one Dirichlet segment by residual pairing.

    Sums the unconstrained residual rows of the segment's vertices, which
    discretely equals ``int sigma grad(phi) . n dS`` over the segment (the
    negative of the outward ``J . n`` flux).  For ``phi = x`` on the unit
    square this is -1 on ``x = 0`` and +1 on ``x = 1``.

    ``segment`` is an index into ``mesh.dirichlet_segments`` or an array of
    Dirichlet vertex indices.
    """
    if np.ndim(segment) == 0:
        segment = mesh.dirichlet_segments[int(segment)]
    segment = np.asarray(segment, dtype=np.int64)
    if not np.all(np.isin(segment, mesh.dirichlet_vertices)):
        raise ValueError("terminal segment contains vertices that are not Dirichlet-tagged")
    r = unconstrained_residual(mesh, model, u, phi, eps)
    return float(np.sum(r[np.sort(segment)]))


# ---------------------------------------------------------------------------


@dataclass
class SuiteReport:
    name: str
    checks: dict = field(default_factory=dict)  # name -> (margin, threshold)

    def add(self, check, margin, threshold=-1e-12):
        self.checks[check] = (float(margin), threshold)

    @property
    def passed(self) -> bool:
        return all(m >= thr for m, thr in self.checks.values())

    def lines(self):
        for check, (m, thr) in self.checks.items():
            status = "PASS" if m >= thr else "FAIL"
            yield f"{status} {self.name} :: {check}: worst margin {m:.3e} (threshold {thr:.0e})"


def _draw_vectors(rng, n):
    # mix of moderate and small magnitudes so the degenerate point is probed
    v = rng.uniform(-3.0, 3.0, (n, 2))
    small = rng.random(n) < 0.25
    v[small] *= 10.0 ** rng.uniform(-6, -1, (small.sum(), 1))
    return v


def check_monotonicity_suite(
    model: ConductivityModel,
    n_samples=100_000,
    seed=42,
    eps_values=(1.0, 0.1, 0.01),
    heat: HeatModel | None = None,
) -> SuiteReport:
    """Sampled monotonicity, growth and source-bound checks for one model."""
    rng = np.random.default_rng(seed)
    label = f"{model.kind.value}(p={model.p:g}, delta={model.delta:g})"
    report = SuiteReport(label)
    u = rng.normal(0.0, 5.0, n_samples)
    xi = _draw_vectors(rng, n_samples)
    eta = _draw_vectors(rng, n_samples)
    p = model.p

    report.add("monotone flux", np.min(monotonicity_gap(model, u, xi, eta)))
    if p > 1:
        lb = plap_monotonicity_lower_bound(p, xi, eta)
        report.add("p-Laplacian lower bound", np.min(plap_gap(p, xi, eta) - lb))
        for eps in eps_values:
            gap = monotonicity_gap(model, u, xi, eta, eps=eps)
            report.add(f"sigma_eps gap (eps={eps:g})", np.min(gap - eps * lb))

    tau = np.concatenate([np.linalg.norm(xi, axis=1), np.logspace(-8, 4, 1000)])
    uu = np.concatenate([u, rng.normal(0.0, 5.0, 1000)])
    s = sigma_eval(model, uu, tau)
    lower = s * tau**2 - (model.c1 * tau**p - model.c2)
    upper = model.c3 * (1.0 + tau**2) ** ((p - 2.0) / 2.0) - s
    scale = 1.0 + np.abs(s * tau**2) + model.c1 * tau**p
    report.add("growth lower bound (relative)", np.min(lower / scale))
    report.add("growth upper bound (relative)", np.min(upper / (1.0 + s)))

    if heat is not None:
        c4 = source_bound_constant(model, heat)
        x = rng.random((n_samples, 2))
        f = source_f(model, heat, x, 0.0, u, xi)
        tx = np.linalg.norm(xi, axis=1)
        report.add("source non-negative", np.min(f))
        report.add("source growth bound (relative)", np.min((c4 * (1.0 + tx**p) - f) / (1.0 + f)))

    return report


def check_truncation_suite(n_samples=100_000, seed=42) -> SuiteReport:
    """Bounds of the truncated source ``f / (1 + eps f)``."""
    rng = np.random.default_rng(seed)
    report = SuiteReport("source truncation")
    f = 10.0 ** rng.uniform(-6, 6, n_samples)
    order = np.argsort(f)
    worst_cap = worst_err = worst_mono = np.inf
    for eps in (1.0, 0.1, 1e-2, 1e-3, 1e-6):
        fe = source_f_eps(f, eps)
        worst_cap = min(worst_cap, np.min(fe), np.min(np.minimum(f, 1.0 / eps) - fe))
        worst_err = min(worst_err, np.min(eps * f * f - np.abs(fe - f)))
        worst_mono = min(worst_mono, np.min(np.diff(fe[order])))
    report.add("0 <= f_eps <= min(f, 1/eps)", worst_cap)
    report.add("|f_eps - f| <= eps f^2", worst_err)
    report.add("f_eps nondecreasing in f", worst_mono, threshold=0.0)
    return report


def check_iv_monotone(model: ConductivityModel, u=0.0, v_max=1e6, n=2001) -> SuiteReport:
    report = SuiteReport(f"I-V curve p={model.p:g}")
    v = np.concatenate([[0.0], np.logspace(-6, np.log10(v_max), n)])
    curve = iv_curve(model, u, v)
    report.add("I nondecreasing in V", np.min(np.diff(curve[:, 1])), threshold=0.0)
    return report


def default_model_families():
    """Model families exercised by the property suite."""
    from .constitutive import Kind

    models = []
    for delta in (0.1, 1.0):
        for p in (1.5, 2.0, 3.0, 4.0):
            models.append(ConductivityModel(Kind.REGULARIZED, p, delta))
    for p in (2.0, 3.0, 4.0):
        models.append(ConductivityModel(Kind.PURE, p))
    return models


def run_property_suite(n_samples=100_000, seed=42, sigma0=None, heat=None):
    """All constitutive checks; returns a list of :class:`SuiteReport`."""
    reports = []
    for model in default_model_families():
        if sigma0 is not None:
            model = ConductivityModel(model.kind, model.p, model.delta if model.delta else 1.0, sigma0)
        reports.append(check_monotonicity_suite(model, n_samples, seed, heat=heat or HeatModel()))
    reports.append(check_truncation_suite(n_samples, seed))
    reports.append(check_iv_monotone(ConductivityModel("regularized_plap", 1.0, 1.0, saturation=True)))
    return reports

