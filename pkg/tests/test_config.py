import textwrap

import pytest

from thermistor.config import ConfigError, parse_config, parse_iv_section, read_config
from thermistor.constitutive import AffineClamped, Constant, Kind


def cfg(text):
    return parse_config(textwrap.dedent(text))


def test_defaults():
    c = parse_config("")
    m, h = c.conductivity, c.heat
    assert (m.kind, m.p, m.delta, m.sigma0) == (Kind.REGULARIZED, 2.0, 1.0, Constant(1.0))
    assert (h.kappa, h.alpha, h.g, h.h) == (Constant(1.0), Constant(1.0), 1.0, 0.0)
    assert c.stages == (0.0,)


def test_pure_family_below_two_cites_requirement():
    with pytest.raises(ConfigError, match=r"2 <= p") as info:
        cfg(
            """
            [conductivity]
            kind = "pure_plap"
            p = 1.5
            """
        )
    assert info.value.line == 4


def test_three_stage_schedule():
    c = cfg(
        """
        [continuation]
        eps_schedule = [1, 0.1, 0]
        """
    )
    assert c.stages == (1.0, 0.1, 0.0)


@pytest.mark.parametrize(
    "text, line",
    [
        ("[mesh]\nnx = 4\nnz = 3\n", 3),
        ("[mesh]\nnx = 4\n[meshes]\n", 3),
        ("[time]\nT = 1\n\ndt = 2\n", 4),
        ("[conductivity]\ndelta = -1\n", 2),
        ("[heat]\ng = 1\nkappa = 0\n", 3),
        ("[continuation]\neps_schedule = [0, 1]\n", 2),
        ("[mesh]\nnx = 2.5\n", 2),
        ("[boundary]\nramp = \"cosine\"\n", 2),
        ("[mesh]\nnx = [\n", 2),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_catalog_shapes_and_solver_keys():
    c = cfg(
        """
        [mesh]
        nx = 8
        ny = 4
        rect = [0, 2, 0, 1]

        [conductivity]
        p = 3
        sigma0 = {shape = "affine_clamped", offset = 1, slope = 0.5, lower = 1, upper = 3}

        [boundary]
        dirichlet = {left = 0, right = 2}
        ramp = "linear"
        u0 = {shape = "bump", amplitude = 1, center = [0.5, 0.3], width = 0.2}

        [solver]
        outer_coupling_iters = 3
        picard_tol = 1e-9

        [diagnostics]
        lambda = 0.25
        """
    )
    assert c.conductivity.sigma0 == AffineClamped(1.0, 0.5, 1.0, 3.0)
    assert c.mesh.n_vertices == 45
    assert c.outer_coupling_iters == 3 and isinstance(c.outer_coupling_iters, int)
    assert c.picard_tol == 1e-9 and c.lam == 0.25
    assert c.u0.center == (0.5, 0.3)
    assert c.phi_D_shape.max() == 2.0


def test_saturation_only_when_allowed():
    text = "[conductivity]\np = 1\n"
    with pytest.raises(ConfigError):
        parse_config(text)
    assert parse_config(text, allow_saturation=True).conductivity.p == 1.0


def test_iv_section():
    assert parse_iv_section("") == (0.0, [0.0, 1.0, 10.0, 1000.0])
    assert parse_iv_section("[iv]\nu = 2\nv_samples = [0, 5]\n") == (2.0, [0.0, 5.0])


def test_read_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[time]\nT = 2\n")
    assert read_config(path).T == 2.0


def test_acceptance_toml_matches_scenario():
    from scenarios import SELF_HEATING_TOML, self_heating

    assert parse_config(SELF_HEATING_TOML) == self_heating()
