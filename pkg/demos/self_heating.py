"""
Self-heating toward a steady state
==================================

Current through the strip heats it at unit rate; the boundary loses heat
at rate g (u - h).  Projected onto constant fields, one backward Euler
step reads c <- (c + dt) / (1 + 4 dt), whose fixed point is 1/4.  The
field itself is not constant: the interior runs hotter than the edges,
while the boundary mean settles at exactly 1/4 because heat in equals heat
out.
"""

import numpy as np

from thermistor import SimulationConfig, run_simulation

config = SimulationConfig(nx=16, ny=16, T=20.0, dt=0.1)
result = run_simulation(config)
mesh = config.mesh
B = mesh.boundary_weights()

for state in result.states[::40]:
    u = state.u
    print(
        f"t={state.t:5.1f}  boundary mean {np.sum(B * u) / np.sum(B):.8f}  "
        f"max u {u.max():.5f}  balance residual {state.row.balance_residual:.1e}"
    )

print("max_k int|u| dx =", result.linf_l1)
print("terminal currents at T:", result.final.row.terminal_currents)
