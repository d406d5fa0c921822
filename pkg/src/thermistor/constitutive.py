"""Material laws: conductivity families, heat model, Joule source, I-V curves.

All evaluators broadcast over numpy arrays.  Vector arguments (field
gradients) carry their two components in the last axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

#: gradient magnitudes below this are treated as this value inside solvers
TAU_FLOOR = 1e-12

_BOUND_SAMPLES = 2048


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Shape catalog for sigma0(u), kappa(u), alpha(x, t, u) and initial data.


@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    def __call__(self, u, x=None, t=None):
        return np.full(np.shape(u), float(self.value))

    def bounds(self):
        return (self.value, self.value)


@dataclass(frozen=True)
class AffineClamped:
    """``clip(offset + slope * u, lower, upper)``."""

    offset: float
    slope: float
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ModelError(f"AffineClamped needs lower <= upper, got {self.lower} > {self.upper}")

    def __call__(self, u, x=None, t=None):
        return np.clip(self.offset + self.slope * np.asarray(u, dtype=float), self.lower, self.upper)

    def bounds(self):
        return (self.lower, self.upper)


@dataclass(frozen=True)
class GaussianBump:
    """``base + amplitude * exp(-((u - center) / width)**2)``."""

    base: float
    amplitude: float
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ModelError("GaussianBump width must be positive")

    def __call__(self, u, x=None, t=None):
        z = (np.asarray(u, dtype=float) - self.center) / self.width
        return self.base + self.amplitude * np.exp(-z * z)

    def bounds(self):
        return tuple(sorted((self.base, self.base + self.amplitude)))


@dataclass(frozen=True)
class Checkerboard:
    """Alternates ``high`` / ``low`` over an ``nx`` by ``ny`` tiling of the box.

    Only meaningful for the heat-loss factor, which may depend on position.
    """

    high: float = 1.0
    low: float = 0.0
    nx: int = 2
    ny: int = 2
    box: tuple = (0.0, 1.0, 0.0, 1.0)

    def __call__(self, u, x=None, t=None):
        if x is None:
            raise ModelError("Checkerboard needs positions")
        x = np.asarray(x, dtype=float)
        x0, x1, y0, y1 = self.box
        i = np.clip(np.floor((x[..., 0] - x0) / (x1 - x0) * self.nx), 0, self.nx - 1)
        j = np.clip(np.floor((x[..., 1] - y0) / (y1 - y0) * self.ny), 0, self.ny - 1)
        out = np.where((i + j) % 2 == 0, self.high, self.low)
        return np.broadcast_to(out, np.broadcast_shapes(out.shape, np.shape(u))).astype(float)

    def bounds(self):
        return tuple(sorted((self.low, self.high)))


SHAPES = {
    "constant": Constant,
    "affine_clamped": AffineClamped,
    "gaussian_bump": GaussianBump,
    "checkerboard": Checkerboard,
}


def make_shape(spec):
    """Build a catalog shape from a number or ``{"shape": name, **params}``."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Constant(float(spec))
    if hasattr(spec, "bounds") and callable(spec):
        return spec
    spec = dict(spec)
    name = spec.pop("shape", "constant")
    try:
        cls = SHAPES[name]
    except KeyError:
        raise ModelError(f"unknown shape {name!r}; choose from {sorted(SHAPES)}") from None
    if "box" in spec:
        spec["box"] = tuple(spec["box"])
    try:
        return cls(**spec)
    except TypeError as exc:
        raise ModelError(f"bad parameters for shape {name!r}: {exc}") from None


def _sample_u(seed=0):
    rng = np.random.default_rng(seed)
    return np.concatenate([rng.normal(0.0, 10.0, _BOUND_SAMPLES), np.linspace(-1e3, 1e3, 201)])


def _check_sampled_bounds(fn, lo, hi, what):
    vals = fn(_sample_u())
    if not (np.all(np.isfinite(vals)) and vals.min() >= lo and vals.max() <= hi):
        raise ModelError(f"{what} leaves its declared range [{lo}, {hi}] on sampled u")


# ---------------------------------------------------------------------------
# Conductivity


class Kind(str, Enum):
    REGULARIZED = "regularized_plap"
    PURE = "pure_plap"


@dataclass(frozen=True)
class ConductivityModel:
    """``sigma(u, tau)`` of regularized or pure p-Laplacian type.

    ``regularized_plap``: ``sigma0(u) * (delta + tau**2) ** ((p - 2) / 2)``
    with ``delta > 0`` and ``1 < p``.
    ``pure_plap``: ``sigma0(u) * tau ** (p - 2)`` with ``p >= 2``.

    The growth constants ``c1, c2, c3`` satisfy, for every ``(u, tau)``,
    ``c1 tau^p - c2 <= sigma tau^2`` and ``sigma <= c3 (1 + tau^2)^((p-2)/2)``.

    ``saturation=True`` additionally admits ``p = 1`` for the regularized
    family, which only the current-voltage characteristic uses.
    """

    kind: Kind = Kind.REGULARIZED
    p: float = 2.0
    delta: float = 1.0
    sigma0: object = field(default_factory=Constant)
    saturation: bool = False
    c1: float = field(init=False, repr=False)
    c2: float = field(init=False, repr=False)
    c3: float = field(init=False, repr=False)

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise ModelError(f"unknown conductivity kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "sigma0", make_shape(self.sigma0))
        p, delta = float(self.p), float(self.delta)
        if not math.isfinite(p):
            raise ModelError("p must be finite")
        if kind is Kind.REGULARIZED:
            pmin_ok = p >= 1 if self.saturation else p > 1
            if not pmin_ok:
                raise ModelError(f"regularized_plap requires 1 < p < inf, got p={p}")
            if not delta > 0:
                raise ModelError(f"regularized_plap requires delta > 0, got delta={delta}")
        else:
            if not p >= 2:
                raise ModelError(f"pure_plap requires 2 <= p < inf, got p={p}")
            delta = 0.0
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "delta", delta)

        lo, hi = self.sigma0.bounds()
        if not lo > 0:
            raise ModelError(f"sigma0 must be bounded below by a positive constant, got {lo}")
        _check_sampled_bounds(self.sigma0, lo, hi, "sigma0")

        e = (p - 2.0) / 2.0
        if kind is Kind.PURE:
            c1, c2, c3 = lo, 0.0, hi
        elif p >= 2:
            c1, c2, c3 = lo, 0.0, hi * max(1.0, delta) ** e
        else:
            # tau^2 >= delta gives (delta + tau^2)^e >= 2^e tau^(p-2); below that c1 tau^p <= c2
            c1 = lo * 2.0**e
            c2 = c1 * delta ** (p / 2.0)
            c3 = hi * min(1.0, delta) ** e
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "c3", c3)

    @property
    def sigma_lower(self):
        return self.sigma0.bounds()[0]

    @property
    def sigma_upper(self):
        return self.sigma0.bounds()[1]

    def with_p(self, p):
        return replace(self, p=p)


def _check_tau(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ModelError("tau must be non-negative")
    return tau


def _tau_power(model: ConductivityModel, tau, delta=None):
    """``(delta + tau^2)^((p-2)/2)`` or ``tau^(p-2)`` with 0^0 = 1."""
    e = (model.p - 2.0) / 2.0
    if model.kind is Kind.REGULARIZED:
        return (model.delta + tau * tau) ** e
    if delta is not None:
        return (delta + tau * tau) ** e
    if model.p == 2.0:
        return np.ones_like(tau)
    return tau ** (model.p - 2.0)


def sigma_eval(model: ConductivityModel, u, tau):
    """Electrical conductivity ``sigma(u, tau)``."""
    tau = _check_tau(tau)
    return model.sigma0(u) * _tau_power(model, tau)


def sigma_eps_eval(model: ConductivityModel, u, tau, eps):
    """``eps * tau^(p-2) + sigma(u, tau)`` for tau > 0 and ``sigma(u, 0)`` at tau = 0."""
    tau = _check_tau(tau)
    if eps < 0:
        raise ModelError("eps must be non-negative")
    base = sigma_eval(model, u, tau)
    if eps == 0:
        return base
    safe = np.where(tau > 0, tau, 1.0)
    return np.where(tau > 0, eps * safe ** (model.p - 2.0) + base, base)


def _norm(v):
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.sum(v * v, axis=-1))


def flux(model: ConductivityModel, u, gradphi):
    """Current density ``J = sigma(u, |E|) E`` with ``E = -grad(phi)``."""
    gradphi = np.asarray(gradphi, dtype=float)
    s = sigma_eval(model, u, _norm(gradphi))
    return -np.asarray(s)[..., None] * gradphi


def monotonicity_gap(model: ConductivityModel, u, xi, eta, eps=0.0):
    """``(sigma(u,|xi|) xi - sigma(u,|eta|) eta) . (xi - eta)``.

    With ``eps > 0`` the augmented ``sigma_eps`` is used instead.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    a = sigma_eps_eval(model, u, _norm(xi), eps)[..., None] * xi
    b = sigma_eps_eval(model, u, _norm(eta), eps)[..., None] * eta
    return np.sum((a - b) * (xi - eta), axis=-1)


def plap_gap(p, xi, eta):
    """``(|xi|^(p-2) xi - |eta|^(p-2) eta) . (xi - eta)`` with 0 at a zero vector."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)

    def vec(v):
        n = _norm(v)
        w = np.where(n > 0, np.where(n > 0, n, 1.0) ** (p - 2.0), 0.0)
        return w[..., None] * v

    return np.sum((vec(xi) - vec(eta)) * (xi - eta), axis=-1)


def plap_monotonicity_lower_bound(p, xi, eta):
    """Strong-monotonicity lower bound of the p-Laplacian vector field.

    ``(p-1) |xi-eta|^2 / (1+|xi|+|eta|)^(2-p)`` for ``1 < p <= 2`` and
    ``min(1/2, 2^(2-p)) |xi-eta|^p`` for ``p > 2``.
    """
    if not (1 < p < math.inf):
        raise ModelError(f"p must satisfy 1 < p < inf, got {p}")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    d = _norm(xi - eta)
    if p <= 2:
        return (p - 1.0) * d * d / (1.0 + _norm(xi) + _norm(eta)) ** (2.0 - p)
    return min(0.5, 2.0 ** (2.0 - p)) * d**p


# ---------------------------------------------------------------------------
# Heat model and source


@dataclass(frozen=True)
class HeatModel:
    """Thermal conductivity, Robin data and Joule heat-loss factor.

    ``alpha`` depends on ``(x, t, u)``; its declared bounds must lie in
    ``[0, alpha0]``.
    """

    kappa: object = field(default_factory=Constant)
    g: float = 1.0
    h: float = 0.0
    alpha: object = field(default_factory=Constant)

    def __post_init__(self):
        object.__setattr__(self, "kappa", make_shape(self.kappa))
        object.__setattr__(self, "alpha", make_shape(self.alpha))
        if not (math.isfinite(self.g) and self.g > 0):
            raise ModelError(f"Robin coefficient g must be a positive constant, got {self.g}")
        if not math.isfinite(self.h):
            raise ModelError("ambient temperature h must be finite")
        k0, k1 = self.kappa.bounds()
        if not k0 > 0:
            raise ModelError(f"kappa must be bounded below by a positive constant, got {k0}")
        _check_sampled_bounds(self.kappa, k0, k1, "kappa")
        a_lo, a_hi = self.alpha.bounds()
        if a_lo < 0:
            raise ModelError(f"alpha must be non-negative, lower bound is {a_lo}")
        if not isinstance(self.alpha, Checkerboard):
            _check_sampled_bounds(self.alpha, a_lo, a_hi, "alpha")

    @property
    def kappa0(self):
        return self.kappa.bounds()[0]

    @property
    def kappa1(self):
        return self.kappa.bounds()[1]

    @property
    def alpha0(self):
        return self.alpha.bounds()[1]

    def alpha_eval(self, x, t, u):
        return self.alpha(u, x, t)


def source_bound_constant(model: ConductivityModel, heat: HeatModel) -> float:
    """``c4`` with ``0 <= f <= c4 (1 + |xi|^p)`` for the structured source."""
    p = model.p
    # p >= 2: (1+t^2)^(p/2) <= 2^(p/2-1) (1+t^p) by convexity; p < 2: (1+t^2)^((p-2)/2) t^2 <= t^p
    factor = 2.0 ** (p / 2.0 - 1.0) if p >= 2 else 1.0
    return heat.alpha0 * model.c3 * factor


def source_f(model: ConductivityModel, heat: HeatModel, x, t, u, xi):
    """Joule source ``alpha(x, t, u) * sigma(u, |xi|) * |xi|^2``."""
    xi = np.asarray(xi, dtype=float)
    tau = _norm(xi)
    return heat.alpha_eval(x, t, u) * sigma_eval(model, u, tau) * tau * tau


def source_f_eps(f_value, eps):
    """Truncated source ``f / (1 + eps f)``, bounded by ``1 / eps``."""
    f_value = np.asarray(f_value, dtype=float)
    if eps < 0 or np.any(f_value < 0):
        raise ModelError("source truncation needs f >= 0 and eps >= 0")
    if eps == 0:
        return f_value
    return f_value / (1.0 + eps * f_value)


def iv_curve(model: ConductivityModel, u, v_samples):
    """Current-voltage pairs ``I = sigma(u, V) V``.

    Returns an array of shape (n, 2) with columns ``V, I``.  ``p = 1`` is
    the saturating characteristic ``I = sigma0 V / sqrt(delta + V^2)``.
    """
    if model.p < 1:
        raise ModelError("iv_curve requires p >= 1")
    v = np.asarray(v_samples, dtype=float)
    if np.any(v < 0):
        raise ModelError("voltages must be non-negative")
    current = sigma_eval(model, np.full(v.shape, float(u)), v) * v
    # the exact characteristic is nondecreasing; remove one-ulp rounding dips
    order = np.argsort(v, kind="stable")
    current[order] = np.maximum.accumulate(current[order])
    return np.column_stack([v, current])
