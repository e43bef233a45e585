"""Run configuration: dataclasses plus a strict ``key = value`` INI reader."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..cahn_hilliard import CHStepConfig
from ..errors import ConfigurationError
from ..model import FluidParams
from ..navier_stokes import NSStepConfig

PRESETS = ("spinodal", "taylor_green", "bubble", "smooth")


@dataclass(frozen=True)
class ICConfig:
    """Initial condition.

    ``spinodal``: phi = mean + amplitude * band-limited noise (|k| <= modes), u = 0;
    the noise is bounded by 1, so |phi - mean| <= amplitude.
    ``taylor_green``: u = u_amplitude * Taylor-Green; phi = mean, or with
    ``profile = band`` a tanh-stratified band of height ``amplitude``.
    ``bubble``: circular drop of radius ``radius`` and width ``width`` in (-0.95, 0.95), u = 0.
    ``smooth``: a few low modes in both phi and u.
    ``perturbation`` adds ``perturbation * cos(x)`` to phi.
    """

    preset: str = "spinodal"
    seed: int = 42
    mean: float = 0.0
    amplitude: float = 0.15
    modes: int = 4
    radius: float = 1.5
    width: float = 0.4
    u_amplitude: float = 1.0
    profile: str = "constant"
    perturbation: float = 0.0

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        if self.profile not in ("constant", "band"):
            raise ConfigurationError(f"unknown profile {self.profile!r}")
        if self.modes < 1:
            raise ConfigurationError("ic.modes must be >= 1")


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    csv: str = "diagnostics.csv"
    checkpoint: str = "checkpoint.agg"
    diagnostics_every: int = 1
    checkpoint_every: int = 0  # 0: only at the end of the run

    def __post_init__(self):
        if self.diagnostics_every < 1:
            raise ConfigurationError("output.diagnostics_every must be >= 1")
        if self.checkpoint_every < 0:
            raise ConfigurationError("output.checkpoint_every must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    n: int = 64
    t_end: float = 1.0
    dt: float = 1e-3
    fluid: FluidParams = field(default_factory=FluidParams)
    ic: ICConfig = field(default_factory=ICConfig)
    ns: NSStepConfig = field(default_factory=lambda: NSStepConfig(dt=1e-3))
    ch: CHStepConfig = field(default_factory=lambda: CHStepConfig(dt=1e-3))
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        if not self.t_end > 0:
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-8 * max(1.0, steps):
            raise ConfigurationError(
                f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}"
            )
        # the step configs always follow the run's dt
        if self.ns.dt != self.dt:
            object.__setattr__(self, "ns", replace(self.ns, dt=self.dt))
        if self.ch.dt != self.dt:
            object.__setattr__(self, "ch", replace(self.ch, dt=self.dt))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def with_dt(self, dt: float) -> "RunConfig":
        return replace(self, dt=dt)


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text: str):
    return None if text.strip().lower() in ("", "none") else int(text)


# section -> key -> (target object, attribute, parser)
SCHEMA = {
    "grid": {"n": ("run", "n", int)},
    "time": {"t_end": ("run", "t_end", float), "dt": ("run", "dt", float)},
    "fluid": {k: ("fluid", k, float) for k in ("rho1", "rho2", "nu1", "nu2")},
    "potential": {k: ("fluid", k, float) for k in ("theta", "theta0")},
    "ic": {
        "preset": ("ic", "preset", str),
        "seed": ("ic", "seed", int),
        "mean": ("ic", "mean", float),
        "amplitude": ("ic", "amplitude", float),
        "modes": ("ic", "modes", int),
        "radius": ("ic", "radius", float),
        "width": ("ic", "width", float),
        "u_amplitude": ("ic", "u_amplitude", float),
        "profile": ("ic", "profile", str),
        "perturbation": ("ic", "perturbation", float),
    },
    "ns": {
        "viscous_mode": ("ns", "viscous_mode", str),
        "pressure_tol": ("ns", "pressure_tol", float),
        "pressure_max_iter": ("ns", "pressure_max_iter", int),
        "galerkin_m": ("ns", "galerkin_m", _optional_int),
        "flux_correction": ("ns", "flux_correction", _bool),
    },
    "ch": {
        "newton_tol": ("ch", "newton_tol", float),
        "max_newton": ("ch", "max_newton", int),
        "max_backtrack": ("ch", "max_backtrack", int),
        "linsolve_tol": ("ch", "linsolve_tol", float),
    },
    "output": {
        "dir": ("output", "dir", str),
        "csv": ("output", "csv", str),
        "checkpoint": ("output", "checkpoint", str),
        "diagnostics_every": ("output", "diagnostics_every", int),
        "checkpoint_every": ("output", "checkpoint_every", int),
    },
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse config text; keys not given keep the values of ``base``."""
    base = base or RunConfig()
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc

    updates: dict[str, dict] = {k: {} for k in ("run", "fluid", "ic", "ns", "ch", "output")}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key '{key}' in section [{section}]")
            target, attr, conv = SCHEMA[section][key]
            try:
                updates[target][attr] = conv(raw.strip())
            except ValueError as exc:
                raise ConfigurationError(f"bad value for '{key}' in [{section}]: {exc}") from exc

    return RunConfig(
        n=updates["run"].get("n", base.n),
        t_end=updates["run"].get("t_end", base.t_end),
        dt=updates["run"].get("dt", base.dt),
        fluid=replace(base.fluid, **updates["fluid"]),
        ic=replace(base.ic, **updates["ic"]),
        ns=replace(base.ns, **updates["ns"]),
        ch=replace(base.ch, **updates["ch"]),
        output=replace(base.output, **updates["output"]),
    )


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), base)


def dump_config(cfg: RunConfig) -> str:
    """Serialize to the same text format (round-trips through ``parse_config``)."""
    objects = {"run": cfg, "fluid": cfg.fluid, "ic": cfg.ic, "ns": cfg.ns, "ch": cfg.ch,
               "output": cfg.output}
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (target, attr, _) in keys.items():
            value = getattr(objects[target], attr)
            if isinstance(value, float):
                value = repr(value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif value is None:
                value = "none"
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def preset_config(name: str) -> RunConfig:
    """Defaults used by the experiment subcommands."""
    if name == "spinodal":
        return RunConfig(
            n=64, t_end=2.0, dt=1e-3,
            fluid=FluidParams(rho1=1.0, rho2=3.0, nu1=0.5, nu2=1.0, theta=1.0, theta0=2.0),
            ic=ICConfig(preset="spinodal", seed=42, amplitude=0.6, modes=4),
            output=OutputConfig(diagnostics_every=10),
        )
    if name == "taylor_green":
        return RunConfig(
            n=64, t_end=1.0, dt=1e-3,
            fluid=FluidParams(rho1=1.0, rho2=1.0, nu1=0.1, nu2=0.1, theta=1.0, theta0=2.0),
            ic=ICConfig(preset="taylor_green", mean=0.0, u_amplitude=1.0),
            ns=NSStepConfig(dt=1e-3, viscous_mode="explicit"),
            output=OutputConfig(diagnostics_every=10),
        )
    if name == "bubble":
        return RunConfig(
            n=64, t_end=0.5, dt=1e-3,
            fluid=FluidParams(rho1=1.0, rho2=3.0, nu1=0.5, nu2=1.0, theta=1.0, theta0=2.0),
            ic=ICConfig(preset="bubble", radius=1.5, width=0.4),
            output=OutputConfig(diagnostics_every=10),
        )
    if name == "smooth":
        return RunConfig(
            n=64, t_end=0.5, dt=1e-3,
            fluid=FluidParams(rho1=1.0, rho2=2.0, nu1=0.5, nu2=1.0, theta=1.0, theta0=2.0),
            ic=ICConfig(preset="smooth", amplitude=0.1, u_amplitude=0.2),
            output=OutputConfig(diagnostics_every=10),
        )
    raise ConfigurationError(f"unknown preset {name!r}; choose from {PRESETS}")

