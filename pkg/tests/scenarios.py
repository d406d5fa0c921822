"""Scenario configurations shared by the acceptance suite and the baseline file."""

from thermistor.constitutive import AffineClamped, ConductivityModel, Constant, HeatModel
from thermistor.coupling import SimulationConfig

SELF_HEATING_TOML = """\
[mesh]
nx = 16
ny = 16

[conductivity]
kind = "regularized_plap"
p = 2
delta = 1
sigma0 = 1

[heat]
kappa = 1
alpha = 1
g = 1
h = 0

[boundary]
dirichlet = {left = 0, right = 1}
u0 = 0

[time]
T = 20
dt = 0.1
"""


def self_heating() -> SimulationConfig:
    """Strip potential heating a unit square cooled through its boundary."""
    return SimulationConfig(
        nx=16,
        ny=16,
        conductivity=ConductivityModel("regularized_plap", 2.0, 1.0, Constant(1.0)),
        heat=HeatModel(Constant(1.0), 1.0, 0.0, Constant(1.0)),
        T=20.0,
        dt=0.1,
    )


def eps_continuation(kind="regularized_plap") -> SimulationConfig:
    """Two-terminal p = 3 run with temperature-dependent conductivity."""
    return SimulationConfig(
        nx=16,
        ny=16,
        conductivity=ConductivityModel(kind, 3.0, 1.0, AffineClamped(1.0, 0.5, 1.0, 3.0)),
        heat=HeatModel(Constant(1.0), 1.0, 0.0, Constant(1.0)),
        T=2.0,
        dt=0.1,
        u0={"shape": "bump", "amplitude": 1.0, "center": (0.5, 0.3), "width": 0.2},
        eps_schedule=(1.0, 0.1, 0.01, 0.001, 0.0),
    )
