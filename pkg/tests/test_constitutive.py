from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from thermistor.constitutive import (
    AffineClamped,
    Checkerboard,
    ConductivityModel,
    Constant,
    GaussianBump,
    HeatModel,
    ModelError,
    flux,
    iv_curve,
    make_shape,
    monotonicity_gap,
    plap_gap,
    plap_monotonicity_lower_bound,
    sigma_eps_eval,
    sigma_eval,
    source_bound_constant,
    source_f,
    source_f_eps,
)

REG = "regularized_plap"
PURE = "pure_plap"


# -- worked examples ---------------------------------------------------------


def test_sigma_examples():
    assert sigma_eval(ConductivityModel(REG, 4.0, 1.0), 3.7, 1.0) == 2.0
    assert sigma_eval(ConductivityModel(PURE, 3.0, sigma0=2.0), 0.0, 0.5) == 1.0


@pytest.mark.parametrize("kind", [REG, PURE])
def test_p2_is_ohmic(kind):
    model = ConductivityModel(kind, 2.0, 1.0, GaussianBump(1.0, 2.0, 0.5, 1.0))
    u = np.linspace(-3, 3, 13)
    tau = np.logspace(-6, 6, 13)
    np.testing.assert_array_equal(sigma_eval(model, u, tau), model.sigma0(u))


def test_pure_degenerate_point():
    assert sigma_eval(ConductivityModel(PURE, 2.0), 0.0, 0.0) == 1.0
    assert sigma_eval(ConductivityModel(PURE, 3.0), 0.0, 0.0) == 0.0


def test_sigma_eps_examples():
    assert sigma_eps_eval(ConductivityModel(REG, 2.0, 1.0), 0.0, 3.0, 0.5) == 1.5
    assert sigma_eps_eval(ConductivityModel(PURE, 4.0), 0.0, 2.0, 0.1) == pytest.approx(4.4, abs=1e-15)
    model = ConductivityModel(REG, 1.5, 0.1)
    assert sigma_eps_eval(model, 0.0, 0.0, 0.3) == sigma_eval(model, 0.0, 0.0)


def test_sigma_eps_zero_is_sigma(rng):
    model = ConductivityModel(REG, 3.0, 0.5, AffineClamped(1.0, 0.2, 0.5, 2.0))
    u, tau = rng.normal(size=50), rng.random(50) * 4
    np.testing.assert_array_equal(sigma_eps_eval(model, u, tau, 0.0), sigma_eval(model, u, tau))


def test_negative_inputs_rejected():
    model = ConductivityModel()
    with pytest.raises(ModelError):
        sigma_eval(model, 0.0, -1.0)
    with pytest.raises(ModelError):
        sigma_eps_eval(model, 0.0, 1.0, -0.1)


def test_flux_examples():
    np.testing.assert_array_equal(flux(ConductivityModel(PURE, 3.0), 0.0, [0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_array_equal(flux(ConductivityModel(REG, 2.0, 1.0, 3.0), 0.0, [1.0, -2.0]), [-3.0, 6.0])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind=REG, p=3.0, delta=0.0),
        dict(kind=REG, p=1.0, delta=1.0),
        dict(kind=PURE, p=1.5),
        dict(kind="ohmic", p=2.0),
        dict(kind=REG, p=2.0, sigma0=0.0),
        dict(kind=REG, p=2.0, sigma0=AffineClamped(0.0, 1.0, -1.0, 1.0)),
    ],
)
def test_invalid_models_rejected(kwargs):
    with pytest.raises(ModelError):
        ConductivityModel(**kwargs)


def test_saturation_admits_p1():
    assert ConductivityModel(REG, 1.0, 1.0, saturation=True).p == 1.0


def test_monotonicity_gap_examples():
    model = ConductivityModel(REG, 2.0, 1.0)
    assert monotonicity_gap(model, 0.0, [1.0, 0.0], [0.0, 1.0]) == 2.0
    assert monotonicity_gap(model, 0.0, [0.3, 0.1], [0.3, 0.1]) == 0.0
    # (1+1)^1 * (1,0) - (1+1)^1 * (-1,0) = (4,0); dotted with (2,0)
    assert monotonicity_gap(ConductivityModel(REG, 4.0, 1.0), 0.0, [1.0, 0.0], [-1.0, 0.0]) == 8.0


def test_plap_lower_bound_examples():
    # p = 2: (p-1)|xi-eta|^2 ; p = 4: 2^-2 |xi-eta|^4 with |xi-eta| = 2
    assert plap_monotonicity_lower_bound(2.0, [1.0, 0.0], [0.0, 0.0]) == 1.0
    assert plap_monotonicity_lower_bound(4.0, [1.0, 0.0], [-1.0, 0.0]) == 4.0
    assert plap_monotonicity_lower_bound(3.0, [0.5, 0.5], [0.5, 0.5]) == 0.0


def test_source_examples(self_heating):
    model = ConductivityModel(REG, 2.0, 1.0)
    assert source_f(model, self_heating, [0.2, 0.3], 0.0, 0.0, [3.0, 4.0]) == 25.0
    assert source_f(model, self_heating, [0.2, 0.3], 0.0, 0.0, [0.0, 0.0]) == 0.0
    cold = HeatModel(alpha=0.0)
    xi = np.random.default_rng(1).normal(size=(20, 2))
    assert np.all(source_f(model, cold, np.zeros((20, 2)), 0.0, 1.0, xi) == 0.0)


def test_truncation_examples():
    assert source_f_eps(5.0, 0.0) == 5.0
    assert source_f_eps(1.0, 1.0) == 0.5
    exact = Fraction(10**6) / (1 + Fraction(1, 100) * 10**6)
    value = source_f_eps(1e6, 0.01)
    assert value == pytest.approx(float(exact), rel=1e-15)
    assert value <= 100.0


def test_iv_examples():
    sat = ConductivityModel(REG, 1.0, 1.0, saturation=True)
    v, i = iv_curve(sat, 0.0, [1.0])[0]
    assert v == 1.0 and abs(i - 0.70710678) <= 1e-8
    big = iv_curve(ConductivityModel(REG, 1.0, 1.0, 2.0, saturation=True), 0.0, [1e6])[0, 1]
    mpmath.mp.dps = 40
    oracle = 2 * mpmath.mpf(10) ** 6 / mpmath.sqrt(1 + mpmath.mpf(10) ** 12)
    assert abs(big - float(oracle)) <= 1e-15 * 2
    assert abs(big - 2.0) <= 1e-11 * 2.0


def test_iv_export_values_against_mpmath():
    mpmath.mp.dps = 40
    volts = [0.0, 1.0, 10.0, 1000.0]
    curve = iv_curve(ConductivityModel(REG, 1.0, 1.0, saturation=True), 0.0, volts)
    for (v, i), vv in zip(curve, volts):
        vv = mpmath.mpf(vv)
        assert v == float(vv)
        assert i == pytest.approx(float(vv / mpmath.sqrt(1 + vv * vv)), rel=1e-15, abs=1e-300)


# -- shape catalog -------------------------------------------------------------


def test_make_shape_catalog():
    assert make_shape(2.5) == Constant(2.5)
    shape = make_shape({"shape": "affine_clamped", "offset": 1, "slope": 0.5, "lower": 1, "upper": 3})
    assert shape(np.array([-10.0, 1.0, 10.0])).tolist() == [1.0, 1.5, 3.0]
    with pytest.raises(ModelError):
        make_shape({"shape": "spline"})


def test_checkerboard_alpha_depends_on_x():
    cb = Checkerboard(high=1.0, low=0.0, nx=2, ny=2)
    x = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])
    vals = cb(np.zeros(4), x)
    assert sorted(vals.tolist()) == [0.0, 0.0, 1.0, 1.0]
    assert vals[0] == vals[3] != vals[1]


def test_source_bound_with_zero_alpha_is_zero():
    assert source_bound_constant(ConductivityModel(REG, 3.0, 1.0), HeatModel(alpha=0.0)) == 0.0


# -- properties ----------------------------------------------------------------

vec = arrays(np.float64, 2, elements=st.floats(-1e3, 1e3))
MODELS = [ConductivityModel(REG, p, d) for d in (0.1, 1.0) for p in (1.5, 2.0, 3.0, 4.0)] + [
    ConductivityModel(PURE, p) for p in (2.0, 3.0, 4.0)
]


@settings(max_examples=300, deadline=None)
@given(i=st.integers(0, len(MODELS) - 1), u=st.floats(-50, 50), xi=vec, eta=vec)
def test_flux_is_monotone(i, u, xi, eta):
    model = MODELS[i]
    gap = monotonicity_gap(model, u, xi, eta)
    scale = 1.0 + np.abs(xi - eta).sum() * (1 + np.abs(xi).sum() + np.abs(eta).sum()) ** max(model.p - 1, 1)
    assert gap >= -1e-12 * scale


@settings(max_examples=300, deadline=None)
@given(p=st.sampled_from([1.5, 2.0, 3.0, 4.0]), xi=vec, eta=vec)
def test_plap_lower_bound_holds(p, xi, eta):
    gap = plap_gap(p, xi, eta)
    lb = plap_monotonicity_lower_bound(p, xi, eta)
    assert gap - lb >= -1e-12 * (1.0 + abs(gap))


@settings(max_examples=300, deadline=None)
@given(i=st.integers(0, len(MODELS) - 1), u=st.floats(-50, 50), tau=st.floats(0, 1e4))
def test_growth_bounds(i, u, tau):
    model = MODELS[i]
    p = model.p
    s = float(sigma_eval(model, u, tau))
    assert np.isfinite(s) and s >= 0
    assert model.c1 * tau**p - model.c2 <= s * tau * tau * (1 + 1e-12) + 1e-12
    assert s <= model.c3 * (1 + tau * tau) ** ((p - 2) / 2) * (1 + 1e-12)


@settings(max_examples=300, deadline=None)
@given(i=st.integers(0, len(MODELS) - 1), u=st.floats(-50, 50), xi=vec)
def test_source_bound(i, u, xi):
    model = MODELS[i]
    heat = HeatModel(alpha=GaussianBump(0.5, 1.0, 0.0, 2.0))
    f = float(source_f(model, heat, [0.5, 0.5], 0.0, u, xi))
    c4 = source_bound_constant(model, heat)
    assert 0 <= f <= c4 * (1 + np.linalg.norm(xi) ** model.p) * (1 + 1e-12)


@settings(max_examples=300, deadline=None)
@given(f=st.floats(0, 1e12), g=st.floats(0, 1e12), eps=st.floats(1e-8, 10))
def test_truncation_bounds(f, g, eps):
    fe = float(source_f_eps(f, eps))
    assert 0 <= fe <= min(f, 1 / eps) * (1 + 1e-15)
    assert abs(fe - f) <= eps * f * f * (1 + 1e-12) + 4 * np.spacing(f)
    lo, hi = sorted((f, g))
    assert source_f_eps(lo, eps) <= source_f_eps(hi, eps)


@settings(max_examples=200, deadline=None)
@given(
    p=st.sampled_from([1.0, 1.5, 2.0, 3.0]),
    delta=st.floats(0.01, 10),
    v=st.lists(st.floats(0, 1e8), min_size=2, max_size=30),
)
def test_iv_monotone(p, delta, v):
    curve = iv_curve(ConductivityModel(REG, p, delta, saturation=True), 0.0, sorted(v))
    assert np.all(np.diff(curve[:, 1]) >= 0)


@settings(max_examples=300, deadline=None)
@given(
    i=st.integers(0, len(MODELS) - 1),
    u=st.floats(-50, 50),
    xi=vec,
    eta=vec,
    eps=st.sampled_from([1.0, 0.1, 0.01]),
)
def test_sigma_eps_strict_gap(i, u, xi, eta, eps):
    model = MODELS[i]
    gap = monotonicity_gap(model, u, xi, eta, eps=eps)
    lb = eps * plap_monotonicity_lower_bound(model.p, xi, eta)
    assert gap - lb >= -1e-12 * (1.0 + abs(gap))
