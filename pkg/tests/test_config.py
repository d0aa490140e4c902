from pathlib import Path

import pytest

from platewave.config import REFERENCE_PROBES, RunConfig, load_config, parse_config
from platewave.errors import ConfigError
from platewave.fem import MaterialParams
from platewave.mesh import PlateGeometry
from platewave.sim import TimeGrid, table1_pulse


def test_empty_config_is_the_reference_setup():
    cfg = parse_config("")
    assert cfg == RunConfig(
        geometry=PlateGeometry(5e-2, 1e-3),
        material=MaterialParams.aluminium(),
        pulse=table1_pulse(600e3),
        grid=TimeGrid(1.5e-5, 150),
        degree=2,
        ny=4,
        probes=REFERENCE_PROBES,
        output_dir=Path("out"),
    )
    assert cfg.probe_points[0] == (1.0e-2, 1e-3)


def test_full_config_round_trip(tmp_path):
    text = """
[geometry]
Lx = 4e-2
Ly = 2e-3
[material]
rho = 2700.0
E = 7.0e10
nu = 0.3
[pulse]
f0 = 900e3
alpha = 2.5
[time]
t_final = 1e-5
steps = 100
[fem]
degree = 1
ny = 3
solver = "cg"
[probes]
x = [0.01, 0.02]
[output]
dir = "results"
"""
    path = tmp_path / "run.toml"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.geometry == PlateGeometry(4e-2, 2e-3)
    assert cfg.material.nu == 0.3
    assert cfg.pulse.alpha == 2.5 and cfg.pulse.T0 == table1_pulse(900e3).T0
    assert cfg.grid.N == 100 and cfg.degree == 1 and cfg.ny == 3 and cfg.solver == "cg"
    assert cfg.probes == (0.01, 0.02)
    assert cfg.output_dir == Path("results")


@pytest.mark.parametrize("text,needle", [
    ("[fem]\nny = 0\n", "ny"),
    ("[material]\nnu = 0.6\n", "nu"),
    ("[material]\nlam = 9e10\n", "lambda"),
    ("[fem]\nfoo = 1\n", "foo"),
    ("[extras]\na = 1\n", "extras"),
    ("[probes]\nx = [0.1]\n", "probe"),
    ("[pulse]\nf0 = 450e3\n", "450000"),
    ("[time]\nsteps = 1.5\n", "integer"),
    ("[fem]\ndegree = 3\n", "degree"),
    ("[geometry\n", "malformed"),
    ("[fem]\nny = \"four\"\n", "number"),
])
def test_invalid_configs(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(text)


def test_untabulated_frequency_with_explicit_pulse():
    cfg = parse_config("[pulse]\nf0 = 450e3\nphi = 1e-3\nT0 = 4e-6\nT = 2e-6\nalpha = 1.0\n")
    assert cfg.pulse.f0 == 450e3


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.toml")
