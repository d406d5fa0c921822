"""
Convergence against a known heat solution
=========================================

u*(x, y, t) = exp(-t) cos(pi x) cos(pi y) solves the heat equation with
source (2 pi^2 - 1) u*.  Halving the mesh width (with dt tied to h^2)
should cut the L2 error by four; halving dt on a fine mesh by two.
"""

from thermistor.verification import mms_spatial_study, mms_temporal_study

spatial = mms_spatial_study((8, 16, 32))
for h, err in zip(spatial.parameters, spatial.errors):
    print(f"h = 1/{round(1 / h):<3d} L2 error {err:.3e}")
print("spatial rates:", ", ".join(f"{r:.2f}" for r in spatial.rates))

temporal = mms_temporal_study()
for dt, err in zip(temporal.parameters, temporal.errors):
    print(f"dt = {dt:<5g} L2 error {err:.3e}")
print("temporal rates:", ", ".join(f"{r:.2f}" for r in temporal.rates))
