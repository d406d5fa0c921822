"""``thermistor-sim <mode> --config PATH --out DIR [--seed N] [--stride K]``.

Every mode writes ``summary.txt`` with one PASS/FAIL line per check and
exits non-zero iff a solver failed or a check did not pass.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verification as ver
from .config import ConfigError, parse_config, parse_iv_section
from .constitutive import iv_curve, source_f_eps
from .coupling import SimulationConfig, SimulationError, eps_study, run_simulation
from .diagnostics import csv_header, run_property_suite
from .io import write_rows_csv, write_vtk

MODES = ("simulate", "verify-potential", "verify-heat", "iv-curve", "eps-study", "property-suite")
CURRENT_SUM_TOL = 1e-8

logger = logging.getLogger("thermistor")


@dataclass
class RunManifest:
    mode: str
    config_path: Path | None
    out_dir: Path
    seed: int = 42
    stride: int = 10
    samples: int = 100_000


@dataclass
class Summary:
    lines: list = field(default_factory=list)
    ok: bool = True

    def check(self, name, passed, detail=""):
        passed = bool(passed)
        self.ok &= passed
        self.lines.append(f"{'PASS' if passed else 'FAIL'} {name}" + (f": {detail}" if detail else ""))

    def note(self, text):
        self.lines.append(f"INFO {text}")

    def write(self, out_dir: Path):
        (out_dir / "summary.txt").write_text("\n".join(self.lines) + "\n")


def _config_text(manifest: RunManifest) -> str:
    if manifest.config_path is None:
        return ""
    return Path(manifest.config_path).read_text(encoding="utf-8")


def _write_diag(path, config: SimulationConfig, states):
    header = csv_header(len(config.mesh.dirichlet_segments))
    write_rows_csv(path, header, [s.row.values() for s in states])


def _simulate(manifest, text, summary):
    config = parse_config(text)
    out = manifest.out_dir
    mesh = config.mesh

    def snapshot(state):
        if state.k % manifest.stride == 0 or state.k == config.n_steps:
            write_vtk(out / f"phi_{state.k:04d}.vtk", mesh, {"phi": state.phi})
            write_vtk(out / f"u_{state.k:04d}.vtk", mesh, {"u": state.u})

    try:
        result = run_simulation(config, on_state=snapshot)
        states = result.states
    except SimulationError as exc:
        states = exc.states
        if states:
            _write_diag(out / "diag.csv", config, states)
        summary.check("simulation completed", False, str(exc))
        return
    _write_diag(out / "diag.csv", config, states)
    summary.check("simulation completed", True, f"{len(states) - 1} steps to T={config.T:g}")

    bound = 10 * config.picard_tol * mesh.n_vertices
    worst_balance = max(s.row.balance_residual for s in states)
    summary.check("balance identity per step", worst_balance <= bound, f"max {worst_balance:.3e} <= {bound:.1e}")
    if len(mesh.dirichlet_segments) > 1:
        worst = max(abs(sum(s.row.terminal_currents)) for s in states)
        summary.check("terminal currents sum to zero", worst <= CURRENT_SUM_TOL, f"max |sum| {worst:.3e}")
    summary.check("diagnostics finite", all(s.row.is_finite() for s in states))
    summary.note(f"max_k int|u| dx = {result.linf_l1:.17g}")


def _verify_potential(manifest, text, summary):
    config = parse_config(text)
    # u = 0 makes sigma0(u) uniform, so phi = x is exact for any sigma0 shape
    model = config.conductivity
    for eps in sorted(set(config.eps_schedule) | {0.0}):
        err, rep = ver.strip_error(config.nx, model, eps)
        summary.check(
            f"strip phi = x (p={model.p:g}, eps={eps:g}, {config.nx}x{config.nx})",
            rep.converged and err <= 1e-10,
            f"max error {err:.3e}",
        )


def _verify_heat(manifest, text, summary):
    spatial = ver.mms_spatial_study()
    temporal = ver.mms_temporal_study()
    summary.note(f"spatial L2 errors {spatial.errors}")
    summary.note(f"temporal L2 errors {temporal.errors}")
    for r in spatial.rates:
        summary.check("manufactured spatial rate 2.0 +- 0.3", abs(r - 2.0) <= 0.3, f"{r:.3f}")
    for r in temporal.rates:
        summary.check("manufactured temporal rate 1.0 +- 0.3", abs(r - 1.0) <= 0.3, f"{r:.3f}")
    trace = ver.robin_relaxation()
    dev = max(abs(a - b) for a, b in zip(trace.constant_mode, trace.recursion))
    summary.check("Robin constant mode matches recursion", dev <= 1e-12, f"max deviation {dev:.3e}")
    mono = all(b <= a for a, b in zip(trace.field_max, trace.field_max[1:]))
    summary.check("Robin decay monotone toward h", mono and min(trace.field_min) >= -1e-10)


def _iv_curve(manifest, text, summary):
    config = parse_config(text, allow_saturation=True)
    u, volts = parse_iv_section(text)
    curve = iv_curve(config.conductivity, u, sorted(volts))
    write_rows_csv(manifest.out_dir / "iv.csv", ["V", "I"], [(float(v), float(i)) for v, i in curve])
    summary.check("I nondecreasing in V", np.all(np.diff(curve[:, 1]) >= 0))


def _eps_study(manifest, text, summary):
    config = parse_config(text)
    study = eps_study(config)
    rows = [(float(e), float("nan") if j == 0 else study.differences[j - 1]) for j, e in enumerate(study.eps_values)]
    write_rows_csv(manifest.out_dir / "eps_study.csv", ["eps", "max_diff_to_previous"], rows)
    summary.check("eps differences strictly decreasing", study.strictly_decreasing, f"{study.differences}")
    f = 10.0 ** np.random.default_rng(manifest.seed).uniform(-3, 3, 1000)
    for e in study.eps_values:
        fe = source_f_eps(f, e)
        summary.check(f"|f_eps - f| <= eps f^2 (eps={e:g})", np.all(np.abs(fe - f) <= e * f * f))


def _property_suite(manifest, text, summary):
    for report in run_property_suite(manifest.samples, manifest.seed):
        for line in report.lines():
            summary.lines.append(line)
        summary.ok &= report.passed


HANDLERS = {
    "simulate": _simulate,
    "verify-potential": _verify_potential,
    "verify-heat": _verify_heat,
    "iv-curve": _iv_curve,
    "eps-study": _eps_study,
    "property-suite": _property_suite,
}


def run(manifest: RunManifest) -> int:
    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = Summary()
    summary.note(f"mode {manifest.mode}, seed {manifest.seed}")
    try:
        HANDLERS[manifest.mode](manifest, _config_text(manifest), summary)
    except ConfigError as exc:
        summary.check("configuration", False, str(exc))
    summary.write(out)
    for line in summary.lines:
        print(line)
    return 0 if summary.ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="thermistor-sim", description=__doc__.splitlines()[0])
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", type=Path, help="TOML configuration (defaults if omitted)")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--stride", type=int, default=10, help="VTK snapshot stride (steps)")
    parser.add_argument("--samples", type=int, default=100_000, help="draws per property check")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.stride < 1:
        parser.error("--stride must be at least 1")
    manifest = RunManifest(args.mode, args.config, args.out, args.seed, args.stride, args.samples)
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
