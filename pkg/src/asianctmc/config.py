"""Flat INI run configurations.

Sections and keys::

    [model]      type = cir | cev | dejd | mjd | cgmy, then that model's
                 parameters (r defaults to market.r)
    [market]     spot, r, T
    [option]     strike (or strikes = a, b, c), n = 12 | inf (or a list)
    [grid]       n_states, low, high, concentration, boundary, mass_tol
    [inversion]  a_param, series_terms, euler_terms, error_cap
    [pricing]    mean_correction = auto | true | false
    [sweep]      n_values = 12, 25, 50

Unknown sections or keys are rejected by name. Overrides use
``section.key=value``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ArgumentError
from .inversion import InversionConfig
from .models import CEV, CGMY, CIR, DEJD, MJD, GridSpec, ModelSpec
from .pricing import Market, PricingRequest


class ConfigError(ArgumentError):
    pass


_MODELS = {
    "cir": (CIR, ("kappa", "theta_bar", "sigma")),
    "cev": (CEV, ("sigma", "beta")),
    "dejd": (DEJD, ("sigma", "lam", "p_up", "eta1", "eta2")),
    "mjd": (MJD, ("sigma", "lam", "mu_j", "sigma_j")),
    "cgmy": (CGMY, ("C", "G", "M", "Y")),
}

_KEYS = {
    "model": {"type", "r"} | {k for _, ks in _MODELS.values() for k in ks},
    "market": {"spot", "r", "T"},
    "option": {"strike", "strikes", "n"},
    "grid": {"n_states", "low", "high", "concentration", "boundary", "mass_tol"},
    "inversion": {"a_param", "series_terms", "euler_terms", "error_cap"},
    "pricing": {"mean_correction"},
    "sweep": {"n_values"},
}


@dataclass
class RunConfig:
    model: ModelSpec
    market: Market
    strikes: list
    n_values: list
    grid: GridSpec = field(default_factory=GridSpec)
    inversion: InversionConfig = field(default_factory=InversionConfig)
    mean_correction: Optional[bool] = None
    sweep_n: list = field(default_factory=list)

    def requests(self) -> list:
        return [PricingRequest(self.model, self.market, k, n, self.grid, self.inversion, self.mean_correction)
                for n in self.n_values for k in self.strikes]

    def single(self) -> PricingRequest:
        reqs = self.requests()
        if len(reqs) != 1:
            raise ConfigError(f"expected exactly one strike and one n, got {len(reqs)} combinations")
        return reqs[0]


def _parser() -> configparser.ConfigParser:
    p = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    p.optionxform = str  # keys are case-sensitive (CGMY's C/G/M/Y)
    return p


def apply_override(p: configparser.ConfigParser, item: str) -> None:
    if "=" not in item or "." not in item.split("=", 1)[0]:
        raise ConfigError(f"override {item!r} must look like section.key=value")
    lhs, value = item.split("=", 1)
    section, key = lhs.strip().split(".", 1)
    if not p.has_section(section):
        p.add_section(section)
    p.set(section, key, value.strip())


def load(path: Optional[str | Path] = None, overrides=(), text: Optional[str] = None) -> RunConfig:
    p = _parser()
    if text is not None:
        p.read_string(text)
    elif path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} not found")
        try:
            p.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for item in overrides:
        apply_override(p, item)
    return from_parser(p)


def _check_keys(p: configparser.ConfigParser) -> None:
    for section in p.sections():
        if section not in _KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in p[section]:
            if key not in _KEYS[section]:
                raise ConfigError(f"unknown key {section}.{key}")


def _num(p, section, key, conv=float, default=None):
    if not p.has_option(section, key) or p.get(section, key) == "":
        if default is None:
            raise ConfigError(f"missing {section}.{key}")
        return default
    raw = p.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc


def _opt(p, section, key, conv=float):
    if not p.has_option(section, key) or p.get(section, key).strip() in ("", "none"):
        return None
    return _num(p, section, key, conv)


def _n_value(raw: str) -> Optional[int]:
    raw = raw.strip().lower()
    if raw in ("inf", "continuous", "+inf"):
        return None
    return int(raw)


def _list(p, section, key, conv):
    raw = p.get(section, key)
    try:
        return [conv(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc


def from_parser(p: configparser.ConfigParser) -> RunConfig:
    _check_keys(p)
    for section in ("model", "market", "option"):
        if not p.has_section(section):
            raise ConfigError(f"missing section [{section}]")
    market = Market(_num(p, "market", "spot"), _num(p, "market", "r"), _num(p, "market", "T"))

    kind = p.get("model", "type", fallback="").strip().lower()
    if kind not in _MODELS:
        raise ConfigError(f"model.type must be one of {sorted(_MODELS)}, got {kind!r}")
    cls, names = _MODELS[kind]
    extra = set(p["model"]) - {"type", "r"} - set(names)
    if extra:
        raise ConfigError(f"unknown key model.{sorted(extra)[0]} for model type {kind}")
    params = {k: _num(p, "model", k) for k in names}
    params["r"] = _num(p, "model", "r", default=market.r)
    model = cls(**params)

    opt = p["option"]
    if "strike" in opt and "strikes" in opt:
        raise ConfigError("give option.strike or option.strikes, not both")
    if "strikes" in opt:
        strikes = _list(p, "option", "strikes", float)
    else:
        strikes = [_num(p, "option", "strike")]
    n_values = _list(p, "option", "n", _n_value) if "n" in opt else [None]

    grid = GridSpec(
        n_states=_num(p, "grid", "n_states", int, 50),
        low=_opt(p, "grid", "low"),
        high=_opt(p, "grid", "high"),
        concentration=_num(p, "grid", "concentration", float, GridSpec.concentration),
        boundary=p.get("grid", "boundary", fallback="reflecting").strip(),
        mass_tol=_num(p, "grid", "mass_tol", float, GridSpec.mass_tol),
    )
    d = InversionConfig()
    inversion = InversionConfig(
        a_param=_num(p, "inversion", "a_param", float, d.a_param),
        series_terms=_num(p, "inversion", "series_terms", int, d.series_terms),
        euler_terms=_num(p, "inversion", "euler_terms", int, d.euler_terms),
        error_cap=_num(p, "inversion", "error_cap", float, d.error_cap),
    )
    mc_raw = p.get("pricing", "mean_correction", fallback="auto").strip().lower()
    if mc_raw not in ("auto", "true", "false"):
        raise ConfigError(f"pricing.mean_correction must be auto, true or false, got {mc_raw!r}")
    mean_correction = None if mc_raw == "auto" else mc_raw == "true"
    sweep_n = _list(p, "sweep", "n_values", int) if p.has_option("sweep", "n_values") else []
    return RunConfig(model, market, strikes, n_values, grid, inversion, mean_correction, sweep_n)


def bundled(name: str) -> Path:
    """Path of a configuration shipped with the package."""
    from importlib import resources

    path = Path(str(resources.files("asianctmc") / "configs" / name))
    if not path.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return path
