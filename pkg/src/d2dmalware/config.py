"""INI configuration with unit-aware values.

Canonical units are km and minutes. Values may carry a unit suffix
(``300 m``, ``40 sec``, ``20 /km``, ``1 /min``, ``2 devices/km``); bare
numbers are read in canonical units. Lists are comma separated and
``start:stop:step`` expands to an inclusive grid.

Example::

    [geometry]
    gamma = 20 /km

    [devices]
    lambda = 1, 2, 4
    rho = 0

    [graph]
    r = 300 m

    [dynamics]
    model = SI
    markovian = yes
    infection_rate = 1 /min

    [experiment]
    u = 2.5 km
    environments = 200

    [run]
    master_seed = 1
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from ._validation import ConfigurationError, ParameterError
from .engine import DEFAULT_TIME_CAP, WaitingTimeModel
from .experiment import ModelParams
from .phase import INFECTION_RATE, PATCH_MAX, SweepPlan

UNITS = {
    "length": {"": 1.0, "km": 1.0, "m": 1e-3},
    "time": {"": 1.0, "min": 1.0, "sec": 1 / 60, "s": 1 / 60, "h": 60.0},
    "rate": {"": 1.0, "/min": 1.0, "1/min": 1.0, "/sec": 60.0, "/s": 60.0, "/h": 1 / 60},
    "per_km": {"": 1.0, "/km": 1.0, "1/km": 1.0, "km^-1": 1.0, "/m": 1e3,
               "devices/km": 1.0, "devices/m": 1e3},
    "number": {"": 1.0},
}

_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*(\S*)\s*$")


def parse_quantity(text, kind):
    m = _QUANTITY.match(text)
    if not m:
        raise ConfigurationError(f"cannot parse quantity {text!r}")
    number, unit = m.groups()
    table = UNITS[kind]
    if unit not in table:
        raise ConfigurationError(f"unit {unit!r} not valid for a {kind} value ({text!r})")
    try:
        value = float(number)
    except ValueError:
        raise ConfigurationError(f"cannot parse number in {text!r}") from None
    return value * table[unit]


def parse_list(text, kind):
    """Comma-separated quantities; ``a:b:step`` items expand inclusively."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise ConfigurationError(f"range must be start:stop:step, got {item!r}")
            a, b, step = (parse_quantity(p, kind) for p in parts)
            if step <= 0:
                raise ConfigurationError(f"range step must be positive in {item!r}")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            out.extend(round(a + k * step, 12) for k in range(n))
        else:
            out.append(parse_quantity(item, kind))
    return out


def _fmt(x):
    return repr(float(x))


@dataclass
class SimConfig:
    gamma: float
    r: float
    lambdas: list
    rho: float = 0.0
    half_width: float | None = None
    model: str = "SI"
    markovian: bool = True
    infection_rate: float | None = None
    patch_rate: float | None = None
    infection_window: tuple | None = None
    patch_window: tuple | None = None
    u: list = field(default_factory=lambda: [2.5])
    environments: int = 100
    dynamics_per_environment: int = 1
    time_cap: float = DEFAULT_TIME_CAP
    threshold: float = 0.6
    control: str = INFECTION_RATE
    control_grid: list = field(default_factory=list)
    rho_grid: list = field(default_factory=list)
    master_seed: int = 0
    output: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.model not in ("SI", "SIG"):
            raise ConfigurationError(f"dynamics.model must be SI or SIG, got {self.model!r}")
        if not self.lambdas:
            raise ConfigurationError("devices.lambda needs at least one value")
        if not self.u:
            raise ConfigurationError("experiment.u needs at least one value")
        if self.environments < 1 or self.dynamics_per_environment < 1:
            raise ConfigurationError("experiment replica counts must be >= 1")
        if self.markovian and self.infection_rate is None:
            raise ConfigurationError("dynamics.infection_rate is required for Markovian dynamics")
        if not self.markovian and self.infection_window is None:
            raise ConfigurationError("dynamics.infection_window is required for renewal dynamics")
        if self.model == "SIG":
            if self.markovian and self.patch_rate is None:
                raise ConfigurationError("dynamics.patch_rate is required for the Markovian SIG model")
            if not self.markovian and self.patch_window is None:
                raise ConfigurationError("dynamics.patch_window is required for the renewal SIG model")
        if self.control == PATCH_MAX and self.markovian:
            raise ConfigurationError("control patch_max needs markovian = no")
        if self.half_width is not None and self.half_width < max(self.u) + self.r - 1e-12:
            raise ConfigurationError(
                f"geometry.half_width={self.half_width} km is below max(u) + r = {max(self.u) + self.r} km"
            )
        try:
            self.model_params()
        except ParameterError as exc:
            raise ConfigurationError(str(exc)) from None

    @property
    def replicas(self):
        return self.environments * self.dynamics_per_environment

    def infection_model(self):
        if self.markovian:
            return WaitingTimeModel.exponential(self.infection_rate)
        return WaitingTimeModel.uniform(*self.infection_window)

    def patch_model(self):
        if self.model == "SI":
            return None
        if self.markovian:
            return WaitingTimeModel.exponential(self.patch_rate)
        return WaitingTimeModel.uniform(*self.patch_window)

    def model_params(self, lam=None, rho=None):
        return ModelParams(
            gamma=self.gamma,
            lam=self.lambdas[0] if lam is None else lam,
            r=self.r,
            infection=self.infection_model(),
            rho=(self.rho if self.model == "SIG" else 0.0) if rho is None else rho,
            patch=self.patch_model(),
            half_width=self.half_width,
            time_cap=self.time_cap,
        )

    def sweep_plan(self, u=None):
        if not self.rho_grid or not self.control_grid:
            raise ConfigurationError("experiment.rho_grid and experiment.control_grid are required")
        try:
            return SweepPlan(
                rho_grid=tuple(self.rho_grid),
                control=self.control,
                control_grid=tuple(self.control_grid),
                u=max(self.u) if u is None else u,
                environments=self.environments,
                dynamics_per_environment=self.dynamics_per_environment,
                threshold=self.threshold,
            )
        except ParameterError as exc:
            raise ConfigurationError(str(exc)) from None

    def to_ini(self):
        cp = configparser.ConfigParser(interpolation=None)
        cp["geometry"] = {"gamma": _fmt(self.gamma)}
        if self.half_width is not None:
            cp["geometry"]["half_width"] = _fmt(self.half_width)
        cp["devices"] = {"lambda": ", ".join(map(_fmt, self.lambdas)), "rho": _fmt(self.rho)}
        cp["graph"] = {"r": _fmt(self.r)}
        dyn = {"model": self.model, "markovian": "yes" if self.markovian else "no"}
        if self.infection_rate is not None:
            dyn["infection_rate"] = _fmt(self.infection_rate)
        if self.patch_rate is not None:
            dyn["patch_rate"] = _fmt(self.patch_rate)
        if self.infection_window is not None:
            dyn["infection_window"] = ", ".join(map(_fmt, self.infection_window))
        if self.patch_window is not None:
            dyn["patch_window"] = ", ".join(map(_fmt, self.patch_window))
        cp["dynamics"] = dyn
        exp = {
            "u": ", ".join(map(_fmt, self.u)),
            "environments": str(self.environments),
            "dynamics_per_environment": str(self.dynamics_per_environment),
            "time_cap": _fmt(self.time_cap),
            "threshold": _fmt(self.threshold),
            "control": self.control,
        }
        if self.control_grid:
            exp["control_grid"] = ", ".join(map(_fmt, self.control_grid))
        if self.rho_grid:
            exp["rho_grid"] = ", ".join(map(_fmt, self.rho_grid))
        cp["experiment"] = exp
        cp["run"] = {"master_seed": str(self.master_seed), "output": self.output}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in cp[section].items())
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text):
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigurationError(f"malformed config: {exc}") from None

        def get(section, key, kind=None, required=False, default=None):
            if not cp.has_option(section, key):
                if required:
                    raise ConfigurationError(f"missing required field {section}.{key}")
                return default
            raw = cp.get(section, key)
            return raw if kind is None else parse_quantity(raw, kind)

        def get_list(section, key, kind, required=False, default=None):
            if not cp.has_option(section, key):
                if required:
                    raise ConfigurationError(f"missing required field {section}.{key}")
                return default
            return parse_list(cp.get(section, key), kind)

        def get_window(key):
            values = get_list("dynamics", key, "time")
            if values is None:
                return None
            if len(values) != 2:
                raise ConfigurationError(f"dynamics.{key} needs two values (low, high)")
            return tuple(values)

        def get_bool(section, key, default):
            if not cp.has_option(section, key):
                return default
            try:
                return cp.getboolean(section, key)
            except ValueError:
                raise ConfigurationError(f"{section}.{key} must be yes/no") from None

        def get_int(section, key, default):
            raw = get(section, key, default=None)
            if raw is None:
                return default
            try:
                return int(raw)
            except ValueError:
                raise ConfigurationError(f"{section}.{key} must be an integer, got {raw!r}") from None

        model = get("dynamics", "model", default="SI").upper()
        control = get("experiment", "control", default=INFECTION_RATE)
        control_kind = "rate" if control == INFECTION_RATE else "time"
        return cls(
            gamma=get("geometry", "gamma", "per_km", required=True),
            half_width=get("geometry", "half_width", "length"),
            lambdas=get_list("devices", "lambda", "per_km", required=True),
            rho=get("devices", "rho", "per_km", default=0.0),
            r=get("graph", "r", "length", required=True),
            model=model,
            markovian=get_bool("dynamics", "markovian", True),
            infection_rate=get("dynamics", "infection_rate", "rate"),
            patch_rate=get("dynamics", "patch_rate", "rate"),
            infection_window=get_window("infection_window"),
            patch_window=get_window("patch_window"),
            u=get_list("experiment", "u", "length", default=[2.5]),
            environments=get_int("experiment", "environments", 100),
            dynamics_per_environment=get_int("experiment", "dynamics_per_environment", 1),
            time_cap=get("experiment", "time_cap", "time", default=DEFAULT_TIME_CAP),
            threshold=get("experiment", "threshold", "number", default=0.6),
            control=control,
            control_grid=get_list("experiment", "control_grid", control_kind, default=[]),
            rho_grid=get_list("experiment", "rho_grid", "per_km", default=[]),
            master_seed=get_int("run", "master_seed", 0),
            output=get("run", "output", default="out"),
        )

    @classmethod
    def load(cls, path):
        return cls.from_ini(Path(path).read_text())

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)
