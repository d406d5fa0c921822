"""
A saturating current-voltage law
================================

With p = 1 the regularized conductivity gives I = sigma0 V / sqrt(delta + V^2),
which tends to sigma0 as the voltage grows.  Larger p gives super-linear
growth instead.
"""

import numpy as np

from thermistor import ConductivityModel, iv_curve

volts = np.array([0.0, 0.1, 1.0, 10.0, 1e3, 1e6])
for p in (1.0, 1.5, 2.0, 3.0):
    model = ConductivityModel("regularized_plap", p, 1.0, saturation=(p == 1.0))
    currents = iv_curve(model, 0.0, volts)[:, 1]
    print(f"p={p:g}: " + "  ".join(f"{i:.6g}" for i in currents))
