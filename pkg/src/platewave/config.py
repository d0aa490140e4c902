"""TOML run configuration.

Every key has a default matching the reference aluminium plate experiment,
so an empty file is a valid configuration::

    [geometry]
    Lx = 5.0e-2
    Ly = 1.0e-3

    [material]
    rho = 2700.0
    E = 7.0e10
    nu = 0.334
    lam = 5.279e10      # cross-checked against E and nu
    mu = 2.624e10

    [pulse]
    f0 = 600e3          # phi, T0, T, alpha default to the tabulated row

    [time]
    t_final = 1.5e-5
    steps = 150

    [fem]
    degree = 2
    ny = 4
    solver = "cholesky" # or "cg"

    [probes]
    x = [1.0e-2, 1.3e-2, 1.6e-2, 1.9e-2]   # on the top face

    [output]
    dir = "out"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, PlatewaveError
from .fem import MaterialParams
from .mesh import PlateGeometry
from .sim import TABLE1_PULSES, PulseParams, TimeGrid, table1_pulse

REFERENCE_PROBES = (1.0e-2, 1.3e-2, 1.6e-2, 1.9e-2)

_ALLOWED = {
    "geometry": {"Lx", "Ly"},
    "material": {"rho", "E", "nu", "lam", "mu"},
    "pulse": {"f0", "phi", "T0", "T", "alpha"},
    "time": {"t_final", "steps"},
    "fem": {"degree", "ny", "solver"},
    "probes": {"x"},
    "output": {"dir"},
}


@dataclass(frozen=True)
class RunConfig:
    geometry: PlateGeometry
    material: MaterialParams
    pulse: PulseParams
    grid: TimeGrid
    degree: int = 2
    ny: int = 4
    probes: tuple[float, ...] = REFERENCE_PROBES
    output_dir: Path = Path("out")
    solver: str = "cholesky"

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ConfigError(f"fem.degree must be 1 or 2, got {self.degree!r}")
        if self.ny < 1:
            raise ConfigError(f"fem.ny must be a positive integer, got {self.ny!r}")
        if self.solver not in ("cholesky", "cg"):
            raise ConfigError(f"fem.solver must be 'cholesky' or 'cg', got {self.solver!r}")
        if not self.probes:
            raise ConfigError("probes.x must list at least one coordinate")
        for x in self.probes:
            if not 0.0 < x < self.geometry.Lx:
                raise ConfigError(f"probe x={x!r} is not inside (0, Lx)")

    @property
    def probe_points(self) -> list[tuple[float, float]]:
        return [(x, self.geometry.Ly) for x in self.probes]

    def with_overrides(self, **changes) -> "RunConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(**fields)


def _number(section: str, key: str, value, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _material(sec: dict) -> MaterialParams:
    ref = MaterialParams.aluminium()
    rho = _number("material", "rho", sec.get("rho", ref.rho))
    E = _number("material", "E", sec.get("E", ref.E))
    nu = _number("material", "nu", sec.get("nu", ref.nu))
    if not -1.0 < nu < 0.5:
        raise ConfigError(f"material.nu={nu!r} gives 1 - 2 nu <= 0; Lame constants undefined")
    if not any(k in sec for k in ("rho", "E", "nu", "lam", "mu")):
        return ref
    derived = MaterialParams.from_young(rho, E, nu)
    lam = _number("material", "lam", sec["lam"]) if "lam" in sec else derived.lam
    mu = _number("material", "mu", sec["mu"]) if "mu" in sec else derived.mu
    return MaterialParams(rho=rho, lam=lam, mu=mu, E=E, nu=nu)


def _pulse(sec: dict) -> PulseParams:
    f0 = _number("pulse", "f0", sec.get("f0", 600e3))
    given = {k: _number("pulse", k, sec[k]) for k in ("phi", "T0", "T", "alpha") if k in sec}
    if len(given) == 4:
        return PulseParams(f0=f0, **given)
    try:
        base = table1_pulse(f0)
    except PlatewaveError:
        known = ", ".join(f"{f:g}" for f in TABLE1_PULSES)
        raise ConfigError(
            f"pulse.f0={f0:g} has no tabulated parameters ({known}); give phi, T0, T and alpha"
        ) from None
    return PulseParams(**{**base.__dict__, **given})


def config_from_dict(data: dict) -> RunConfig:
    for section, body in data.items():
        if section not in _ALLOWED:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        unknown = set(body) - _ALLOWED[section]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    sec = {name: data.get(name, {}) for name in _ALLOWED}
    try:
        geom = PlateGeometry(
            Lx=_number("geometry", "Lx", sec["geometry"].get("Lx", 5.0e-2)),
            Ly=_number("geometry", "Ly", sec["geometry"].get("Ly", 1.0e-3)),
        )
        material = _material(sec["material"])
        pulse = _pulse(sec["pulse"])
        grid = TimeGrid(
            t_final=_number("time", "t_final", sec["time"].get("t_final", 1.5e-5)),
            N=_number("time", "steps", sec["time"].get("steps", 150), integer=True),
        )
        probes = sec["probes"].get("x", list(REFERENCE_PROBES))
        if not isinstance(probes, list):
            raise ConfigError("probes.x must be a list")
        return RunConfig(
            geometry=geom,
            material=material,
            pulse=pulse,
            grid=grid,
            degree=_number("fem", "degree", sec["fem"].get("degree", 2), integer=True),
            ny=_number("fem", "ny", sec["fem"].get("ny", 4), integer=True),
            probes=tuple(_number("probes", "x", x) for x in probes),
            output_dir=Path(sec["output"].get("dir", "out")),
            solver=str(sec["fem"].get("solver", "cholesky")),
        )
    except ConfigError:
        raise
    except PlatewaveError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return config_from_dict(data)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def default_config() -> RunConfig:
    return parse_config("")
