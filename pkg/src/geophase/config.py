"""Scenario configuration files (JSON, ``schema_version`` 1).

Every section is optional and falls back to the defaults below.  Unknown
fields are rejected, and errors name the file line of the offending entry.
"""

from __future__ import annotations

import dataclasses
import json
import re
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SqueezeConfig:
    """Loop composition on a thermal mechanical state.

    Give either ``chi2`` (canonical equal-strength loop with chi = sqrt(chi2))
    or an explicit ``loop`` document ``{"pulses": [{"chi", "phi"}...], "eta"}``.
    """

    chi2: float | None = 1.0
    loop: dict | None = None
    nbar: float = 0.0
    correct_loss: bool = False
    correction_cap: float = 10.0


@dataclass(frozen=True)
class GridConfig:
    n_x: int = 1024
    half_width: float = 10.0
    n_p: int | None = None
    p_half_width: float | None = None


@dataclass(frozen=True)
class WignerConfig:
    gate: str = "x2"
    chi2: float | list = 1.0
    grid: GridConfig = field(default_factory=GridConfig)


@dataclass(frozen=True)
class NonclosureConfig:
    chi2: float = 1.0
    chi_loss_min: float = 0.0
    chi_loss_max: float = 3.0
    n: int = 301


@dataclass(frozen=True)
class ThermalConfig:
    nbar_eff: float = 10.0
    chi2: float = 1.0
    f_M: float = 24e3
    Q: float = 1e5
    temperature: float = 1.0
    bath_nbar: float | None = None
    periods: float = 3.0
    n_samples: int = 3001
    oracle_steps_per_period: int = 4000
    printed_form: bool = False


@dataclass(frozen=True)
class MaterialConfig:
    youngs_modulus: float = 241e9
    q_bending: float = 17000.0
    density: float = 3100.0


@dataclass(frozen=True)
class SettingsConfig:
    coupling_gradient: float = 2e17
    mass_fraction: float = 0.5
    sigma_ratio: float = 1e-3
    kappa_sigma: float = 5.0
    tau_sigma: float = 8.0
    n_eff_mode: str = "pinned"
    n_eff_pinned: float = 10.0
    per_window: int = 20


@dataclass(frozen=True)
class SweepConfig:
    length_range: list = field(default_factory=lambda: [0.5e-3, 10e-3])
    frequency_range: list = field(default_factory=lambda: [1e3, 70e3])
    resolution: list = field(default_factory=lambda: [40, 40])
    thickness: float = 157e-9
    width: float = 3e-6
    temperature: float = 1.0
    flux_cap: float = 1e16
    n_photons: float | None = None
    material: MaterialConfig = field(default_factory=MaterialConfig)
    settings: SettingsConfig = field(default_factory=SettingsConfig)
    workers: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    schema_version: int = SCHEMA_VERSION
    squeeze: SqueezeConfig = field(default_factory=SqueezeConfig)
    wigner: WignerConfig = field(default_factory=WignerConfig)
    nonclosure: NonclosureConfig = field(default_factory=NonclosureConfig)
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)


def _line_of(text: str, path: tuple[str, ...]) -> int | None:
    """Line number of the last key in ``path``, searching each key after its parent."""
    pos = 0
    for key in path:
        match = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if match is None:
            return None
        pos = match.start()
    return text.count("\n", 0, pos) + 1


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_type(value, hint, where: str):
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin in (typing.Union, types.UnionType):
        for option in args:
            try:
                return _check_type(value, option, where)
            except ConfigError:
                pass
        raise ConfigError(f"{where}: value {value!r} does not match {hint}")
    if hint is type(None):
        if value is not None:
            raise ConfigError(f"{where}: expected null")
        return None
    if hint is float:
        if not _is_number(value):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if hint is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true or false, got {value!r}")
        return value
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if hint is list or origin is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        return list(value)
    if hint is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected an object, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {hint}")


def _build(cls, data, text: str, path: tuple[str, ...]):
    where_path = ".".join(path) or "<root>"
    if not isinstance(data, dict):
        raise ConfigError(_locate(text, path, f"{where_path}: expected an object"))
    hints = typing.get_type_hints(cls)
    names = [f.name for f in dataclasses.fields(cls)]
    for key in data:
        if key not in names:
            raise ConfigError(_locate(text, path + (key,), f"unknown field {'.'.join(path + (key,))!r}"))
    kwargs = {}
    for name in (n for n in names if n in data):
        hint = hints[name]
        sub = path + (name,)
        if dataclasses.is_dataclass(hint):
            kwargs[name] = _build(hint, data[name], text, sub)
            continue
        try:
            kwargs[name] = _check_type(data[name], hint, ".".join(sub))
        except ConfigError as exc:
            raise ConfigError(_locate(text, sub, str(exc))) from None
    return cls(**kwargs)


def _locate(text: str, path: tuple[str, ...], message: str) -> str:
    line = _line_of(text, path) if path else None
    return f"line {line}: {message}" if line else message


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if isinstance(data, dict) and "schema_version" not in data:
        raise ConfigError(f"{source}: missing required field 'schema_version'")
    try:
        config = _build(ScenarioConfig, data, text, ())
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if config.schema_version != SCHEMA_VERSION:
        raise ConfigError(
            f"{source}: {_locate(text, ('schema_version',), f'unsupported schema_version {config.schema_version}')}"
        )
    return config


def load_config(path: str | Path | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def default_config_dict() -> dict:
    return dataclasses.asdict(ScenarioConfig())
