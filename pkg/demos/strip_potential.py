"""
Potential between two electrodes
================================

A unit square with voltage 0 on the left side and 1 on the right; top and
bottom are insulated.  Whatever the exponent p, the linear profile
phi = x carries a constant current density, so P1 elements reproduce it
exactly.  A conductivity that varies along the current path does not.
"""

import numpy as np

from thermistor import ConductivityModel, PotentialProblem, build_mesh, solve_potential, terminal_current
from thermistor.constitutive import AffineClamped

mesh = build_mesh(16, 16, dirichlet=("left", "right"))
x, y = mesh.vertices.T
u = np.zeros(mesh.n_vertices)

# %% exactness of the linear profile
for p in (1.5, 2.0, 3.0):
    model = ConductivityModel("regularized_plap", p, delta=1.0)
    phi, report = solve_potential(PotentialProblem(mesh, model, u, x))
    print(f"p={p:<4g} max|phi - x| = {np.max(np.abs(phi - x)):.1e}  iterations {report.iterations}")

# %% a hot spot in the middle conducts better and draws the current in
model = ConductivityModel("regularized_plap", 3.0, 1.0, AffineClamped(1.0, 1.0, 1.0, 4.0))
hot = 2.0 * np.exp(-((x - 0.5) ** 2 + (y - 0.5) ** 2) / 0.02)
phi, report = solve_potential(PotentialProblem(mesh, model, hot, x))
# segments follow the counterclockwise boundary sweep: right side first
right, left = (terminal_current(mesh, phi, hot, model, s) for s in range(2))
print(f"hot spot: max|phi - x| = {np.max(np.abs(phi - x)):.4f} after {report.iterations} iterations")
print(f"terminal currents right {right:+.6f}, left {left:+.6f} (sum {left + right:.1e})")
