"""TOML run configuration.

Sections and keys (all optional; defaults in brackets)::

    [mesh]          nx [16], ny [16], rect [[0, 1, 0, 1]]
    [conductivity]  kind ["regularized_plap"], p [2], delta [1], sigma0 [1]
    [heat]          kappa [1], g [1], h [0], alpha [1]
    [boundary]      dirichlet [{left = 0, right = 1}], ramp ["constant"], u0 [0]
    [time]          T [1], dt [0.1]
    [solver]        potential_tol [1e-10], potential_max_iter [60],
                    picard_tol [1e-10], max_picard [50],
                    outer_coupling_iters [2], outer_tol [1e-8]
    [continuation]  eps_schedule [[0]], eps_in_potential [true], eps_in_source [true]
    [diagnostics]   lambda [0.5]
    [iv]            u [0], v_samples [[0, 1, 10, 1000]]

``sigma0``, ``kappa`` and ``alpha`` take a number or an inline table such as
``{shape = "gaussian_bump", base = 1, amplitude = 2, center = 0, width = 1}``.
Unknown sections or keys are rejected.
"""

from __future__ import annotations

import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .constitutive import ConductivityModel, HeatModel, ModelError
from .coupling import SimulationConfig

SCHEMA = {
    "mesh": {"nx", "ny", "rect"},
    "conductivity": {"kind", "p", "delta", "sigma0"},
    "heat": {"kappa", "g", "h", "alpha"},
    "boundary": {"dirichlet", "ramp", "u0"},
    "time": {"T", "dt"},
    "solver": {
        "potential_tol",
        "potential_max_iter",
        "picard_tol",
        "max_picard",
        "outer_coupling_iters",
        "outer_tol",
    },
    "continuation": {"eps_schedule", "eps_in_potential", "eps_in_source"},
    "diagnostics": {"lambda"},
    "iv": {"u", "v_samples"},
}

DEFAULT_IV_SAMPLES = (0.0, 1.0, 10.0, 1000.0)


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class _Locator:
    """Maps ``(section, key)`` to the line where the key is written."""

    _header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.-]+)\s*\]")
    _key = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*=")

    def __init__(self, text):
        self.lines = {}
        section = None
        for n, line in enumerate(text.splitlines(), start=1):
            m = self._header.match(line)
            if m:
                section = m.group(1)
                self.lines.setdefault((section, None), n)
                continue
            m = self._key.match(line)
            if m:
                self.lines.setdefault((section, m.group(1)), n)

    def __call__(self, section, *keys):
        for key in keys:
            if (section, key) in self.lines:
                return self.lines[(section, key)]
        return self.lines.get((section, None))


def _load(text, where):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        if m:
            line = int(m.group(1))
        else:
            line = len(text.splitlines()) if "end of document" in str(exc) else None
        raise ConfigError(f"malformed config: {exc}", line) from None
    for section, body in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", where(section))
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table", where(None, section))
        for key in body:
            if key not in SCHEMA[section]:
                raise ConfigError(
                    f"unknown key {key!r} in [{section}]; allowed: {sorted(SCHEMA[section])}",
                    where(section, key),
                )
    return data


def _num(section, key, value, where, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}", where(section, key))
    if kind is int and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}", where(section, key))
    return kind(value)


def _blame(message, where, section, keys):
    """Pick the key a validation message is about."""
    for key in keys:
        if re.search(rf"\b{re.escape(key)}\b", message):
            return where(section, key)
    return where(section, *keys)


def parse_config(text: str, allow_saturation: bool = False) -> SimulationConfig:
    """Parse and validate a run configuration.

    ``allow_saturation`` admits ``p = 1`` for the regularized conductivity,
    which only the current-voltage export can use.

    Raises
    ------
    ConfigError
        With the offending line number where one can be attributed.
    """
    where = _Locator(text)
    data = _load(text, where)
    mesh = data.get("mesh", {})
    cond = data.get("conductivity", {})
    heat = data.get("heat", {})
    bnd = data.get("boundary", {})
    time = data.get("time", {})
    solver = data.get("solver", {})
    cont = data.get("continuation", {})
    diag = data.get("diagnostics", {})

    try:
        conductivity = ConductivityModel(
            kind=cond.get("kind", "regularized_plap"),
            p=_num("conductivity", "p", cond.get("p", 2.0), where),
            delta=_num("conductivity", "delta", cond.get("delta", 1.0), where),
            sigma0=cond.get("sigma0", 1.0),
            saturation=allow_saturation,
        )
    except ModelError as exc:
        raise ConfigError(str(exc), _blame(str(exc), where, "conductivity", ("p", "delta", "sigma0", "kind"))) from None
    try:
        heat_model = HeatModel(
            kappa=heat.get("kappa", 1.0),
            g=_num("heat", "g", heat.get("g", 1.0), where),
            h=_num("heat", "h", heat.get("h", 0.0), where),
            alpha=heat.get("alpha", 1.0),
        )
    except ModelError as exc:
        raise ConfigError(str(exc), _blame(str(exc), where, "heat", ("kappa", "alpha", "g", "h"))) from None

    rect = mesh.get("rect", [0.0, 1.0, 0.0, 1.0])
    if not (isinstance(rect, list) and len(rect) == 4):
        raise ConfigError("mesh.rect must be [x0, x1, y0, y1]", where("mesh", "rect"))
    eps = cont.get("eps_schedule", [0.0])
    if not isinstance(eps, list):
        eps = [eps]
    dirichlet = bnd.get("dirichlet", {"left": 0.0, "right": 1.0})
    if not isinstance(dirichlet, dict):
        raise ConfigError("boundary.dirichlet must map side names to voltages", where("boundary", "dirichlet"))

    fields = dict(
        nx=_num("mesh", "nx", mesh.get("nx", 16), where, int),
        ny=_num("mesh", "ny", mesh.get("ny", 16), where, int),
        rect=tuple(_num("mesh", "rect", v, where) for v in rect),
        dirichlet={k: _num("boundary", "dirichlet", v, where) for k, v in dirichlet.items()},
        conductivity=conductivity,
        heat=heat_model,
        T=_num("time", "T", time.get("T", 1.0), where),
        dt=_num("time", "dt", time.get("dt", 0.1), where),
        ramp=bnd.get("ramp", "constant"),
        u0=bnd.get("u0", 0.0),
        eps_schedule=tuple(_num("continuation", "eps_schedule", e, where) for e in eps),
        eps_in_potential=bool(cont.get("eps_in_potential", True)),
        eps_in_source=bool(cont.get("eps_in_source", True)),
        lam=_num("diagnostics", "lambda", diag.get("lambda", 0.5), where),
    )
    for key in SCHEMA["solver"]:
        if key in solver:
            kind = int if key.endswith(("iter", "iters", "picard")) else float
            fields[key] = _num("solver", key, solver[key], where, kind)

    key_sections = {
        "dt": ("time", "dt"),
        "T": ("time", "T"),
        "eps_schedule": ("continuation", "eps_schedule"),
        "lambda": ("diagnostics", "lambda"),
        "ramp": ("boundary", "ramp"),
        "dirichlet": ("boundary", "dirichlet"),
        "outer_coupling_iters": ("solver", "outer_coupling_iters"),
        "tolerances": ("solver", "potential_tol"),
        "initial": ("boundary", "u0"),
        "nx": ("mesh", "nx"),
        "rect": ("mesh", "rect"),
    }
    try:
        config = SimulationConfig(**fields)
        config.mesh
        config.phi_D_shape
    except (ValueError, ModelError) as exc:
        msg = str(exc)
        line = None
        for token, (section, key) in key_sections.items():
            if token in msg:
                line = where(section, key)
                break
        raise ConfigError(msg, line) from None
    return config


def parse_iv_section(text: str):
    """``(u, voltages)`` from the ``[iv]`` section."""
    where = _Locator(text)
    iv = _load(text, where).get("iv", {})
    u = _num("iv", "u", iv.get("u", 0.0), where)
    v = iv.get("v_samples", list(DEFAULT_IV_SAMPLES))
    if not isinstance(v, list):
        raise ConfigError("iv.v_samples must be a list", where("iv", "v_samples"))
    return u, [_num("iv", "v_samples", x, where) for x in v]


def read_config(path, allow_saturation=False) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), allow_saturation)
