"""Experiment configuration: TOML files with unit-suffixed quantities.

User files are merged over the shipped defaults, so a config only needs the
keys it changes.  Unknown sections or keys are errors.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .coupling import Chi3Model
from .errors import ConfigError
from .jsa import GridSpec, PulseSpec
from .material import SellmeierModel, material_from_config
from .modes import ModeId
from .raman import RamanModel
from .units import parse_quantity

__all__ = ["NoiseSettings", "RunConfig", "default_config_text", "load_config", "parse_config", "SWEEP_KEYS", "apply_override"]


@dataclass(frozen=True)
class NoiseSettings:
    seed_power_min: float = 0.01
    seed_power_max: float = 100.0
    seed_power_points: int = 41
    detunings: tuple = (0.5e12, 1e12, 2e12, 5e12, 10e12)
    representative_seed_power: float = 1.0
    pair_band_detuning: float = 1.95e12
    spectrum_min: float = 0.05e12
    spectrum_max: float = 40e12
    spectrum_points: int = 400

    def seed_powers(self) -> np.ndarray:
        return np.geomspace(self.seed_power_min, self.seed_power_max, self.seed_power_points)

    def spectrum(self) -> np.ndarray:
        return np.linspace(self.spectrum_min, self.spectrum_max, self.spectrum_points)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved, SI-unit configuration of one run."""

    material: SellmeierModel
    diameter: float | None
    bracket: tuple
    cladding_index: float
    seed_mode: ModeId
    pump_mode: ModeId
    pump_orientation: str
    pump: PulseSpec
    seed: PulseSpec
    length: float
    chi: Chi3Model
    beta2_scale: float
    frozen_factors: bool
    seed_integral: str
    grid: GridSpec
    raman: RamanModel
    convention: str
    area_sfwm: float
    group_index_sfwm: float
    beta2_sfwm: float
    noise: NoiseSettings

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def canonical(self) -> dict:
        """JSON-serialisable view with every value in SI units."""

        def conv(obj):
            if dataclasses.is_dataclass(obj):
                return {f.name: conv(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
            if isinstance(obj, (list, tuple)):
                return [conv(v) for v in obj]
            if isinstance(obj, ModeId):
                return obj.label
            if isinstance(obj, (np.floating, np.integer)):
                return obj.item()
            return obj

        out = conv(self)
        out["seed_mode"] = self.seed_mode.label
        out["pump_mode"] = self.pump_mode.label
        return out

    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


_SCHEMA = {
    "material": {"preset", "terms", "valid_range_um", "a0"},
    "fiber": {"diameter", "bracket", "cladding_index", "seed_mode", "pump_mode", "pump_orientation"},
    "pump": {"wavelength", "duration", "power"},
    "seed": {"wavelength", "duration", "power"},
    "interaction": {"length", "chi3", "nbar", "beta2_scale", "frozen_factors", "seed_integral", "chi_fractions"},
    "grid": {"points", "half_span", "inner_nodes", "inner_half_width", "area_subgrid", "area_grid_points", "dispersion_nodes"},
    "raman": {"tau1", "tau2", "g_peak", "ref_wavelength", "ref_area", "temperature", "convention", "table"},
    "sfwm_reference": {"area", "group_index", "beta2"},
    "noise": set(f.name for f in dataclasses.fields(NoiseSettings)),
}


def default_config_text() -> str:
    return resources.files("pairgen").joinpath("data/default.toml").read_text(encoding="utf-8")


def _merge(base: dict, extra: dict, path=""):
    for key, val in extra.items():
        where = f"{path}{key}"
        if not path and key not in _SCHEMA:
            raise ConfigError(f"{where}: unknown section")
        if path and key not in _SCHEMA[path.rstrip(".")]:
            raise ConfigError(f"{where}: unknown key")
        if isinstance(val, dict):
            if path:
                raise ConfigError(f"{where}: unexpected table")
            _merge(base.setdefault(key, {}), val, f"{key}.")
        else:
            base[key] = val
    return base


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read a TOML config (merged over defaults); ``None`` gives the defaults."""
    raw = tomllib.loads(default_config_text())
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            user = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
        if isinstance(user.get("material"), dict):
            raw["material"] = {}  # a material given by the user replaces the preset
        raw = _merge(raw, user)
        base_dir = path.parent
    return parse_config(raw, base_dir)


def _get(sec, name, key):
    try:
        return sec[key]
    except KeyError:
        raise ConfigError(f"{name}.{key}: missing") from None


def _q(sec, name, key, dim):
    return parse_quantity(_get(sec, name, key), dim, f"{name}.{key}")


def _num(sec, name, key, kind=float, positive=True):
    val = _get(sec, name, key)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{name}.{key}: expected a number, got {val!r}")
    if kind is int and not float(val).is_integer():
        raise ConfigError(f"{name}.{key}: expected an integer, got {val!r}")
    val = kind(val)
    if positive and not val > 0:
        raise ConfigError(f"{name}.{key}: must be positive, got {val!r}")
    return val


def _choice(sec, name, key, options):
    val = _get(sec, name, key)
    if val not in options:
        raise ConfigError(f"{name}.{key}: {val!r} not one of {', '.join(map(str, options))}")
    return val


def _mode(sec, name, key):
    try:
        return ModeId.parse(str(_get(sec, name, key)))
    except ValueError as exc:
        raise ConfigError(f"{name}.{key}: {exc}") from exc


def _pulse(raw, role):
    sec = raw.get(role, {})
    try:
        return PulseSpec(
            role,
            _q(sec, role, "wavelength", "length"),
            _q(sec, role, "duration", "time"),
            _q(sec, role, "power", "power"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{role}: {exc}") from exc


def parse_config(raw: dict, base_dir: Path | str = ".") -> RunConfig:
    """Turn a merged config tree into a RunConfig, validating every key."""
    for section, keys in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"{section}: unknown section")
        for key in keys:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{section}.{key}: unknown key")

    material = material_from_config(raw.get("material", {}))

    fib = raw.get("fiber", {})
    d_raw = _get(fib, "fiber", "diameter")
    diameter = None if d_raw == "auto" else _q(fib, "fiber", "diameter", "length")
    br = _get(fib, "fiber", "bracket")
    if not isinstance(br, list) or len(br) != 2:
        raise ConfigError("fiber.bracket: expected two lengths")
    bracket = tuple(parse_quantity(v, "length", "fiber.bracket") for v in br)
    if not 0 < bracket[0] < bracket[1]:
        raise ConfigError("fiber.bracket: need 0 < d_min < d_max")
    cladding = _num(fib, "fiber", "cladding_index")
    if cladding < 1:
        raise ConfigError("fiber.cladding_index: must be >= 1")

    inter = raw.get("interaction", {})
    nbar = _num(inter, "interaction", "nbar")
    fr = inter.get("chi_fractions", [1 / 3, 1 / 3, 1 / 3])
    try:
        chi = Chi3Model(_q(inter, "interaction", "chi3", "chi3"), *map(float, fr), nbar=nbar)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"interaction.chi3: {exc}") from exc
    frozen = _get(inter, "interaction", "frozen_factors")
    if not isinstance(frozen, bool):
        raise ConfigError("interaction.frozen_factors: expected true or false")

    g = raw.get("grid", {})
    try:
        grid = GridSpec(
            points=_num(g, "grid", "points", int),
            half_span=2 * np.pi * _q(g, "grid", "half_span", "frequency"),
            inner_nodes=_num(g, "grid", "inner_nodes", int),
            inner_half_width=_num(g, "grid", "inner_half_width"),
            area_subgrid=_num(g, "grid", "area_subgrid", int),
            area_grid_points=_num(g, "grid", "area_grid_points", int),
            dispersion_nodes=_num(g, "grid", "dispersion_nodes", int),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"grid: {exc}") from exc
    if grid.dispersion_nodes < 64:
        raise ConfigError("grid.dispersion_nodes: need at least 64")

    r = raw.get("raman", {})
    table = None
    if "table" in r:
        tpath = Path(base_dir) / r["table"]
        try:
            arr = np.loadtxt(tpath, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"raman.table: cannot read {tpath}: {exc}") from exc
        table = tuple((float(a) * 1e12, float(b)) for a, b in arr)
    try:
        raman = RamanModel(
            tau1=_q(r, "raman", "tau1", "time"),
            tau2=_q(r, "raman", "tau2", "time"),
            g_peak=_q(r, "raman", "g_peak", "gain"),
            ref_wavelength=_q(r, "raman", "ref_wavelength", "length"),
            ref_area=_q(r, "raman", "ref_area", "area"),
            temperature=_q(r, "raman", "temperature", "temperature"),
            table=table,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"raman: {exc}") from exc

    sf = raw.get("sfwm_reference", {})
    nz = raw.get("noise", {})
    dets = _get(nz, "noise", "detunings")
    if not isinstance(dets, list) or not dets:
        raise ConfigError("noise.detunings: expected a list of frequencies")
    noise = NoiseSettings(
        seed_power_min=_q(nz, "noise", "seed_power_min", "power"),
        seed_power_max=_q(nz, "noise", "seed_power_max", "power"),
        seed_power_points=_num(nz, "noise", "seed_power_points", int),
        detunings=tuple(parse_quantity(v, "frequency", "noise.detunings") for v in dets),
        representative_seed_power=_q(nz, "noise", "representative_seed_power", "power"),
        pair_band_detuning=_q(nz, "noise", "pair_band_detuning", "frequency"),
        spectrum_min=_q(nz, "noise", "spectrum_min", "frequency"),
        spectrum_max=_q(nz, "noise", "spectrum_max", "frequency"),
        spectrum_points=_num(nz, "noise", "spectrum_points", int),
    )
    if not 0 < noise.seed_power_min < noise.seed_power_max:
        raise ConfigError("noise.seed_power_min: need 0 < min < max")
    if any(d <= 0 for d in noise.detunings) or list(noise.detunings) != sorted(set(noise.detunings)):
        raise ConfigError("noise.detunings: must be positive and strictly increasing")

    length = _q(inter, "interaction", "length", "length")
    if not length > 0:
        raise ConfigError("interaction.length: must be positive")

    return RunConfig(
        material=material,
        diameter=diameter,
        bracket=bracket,
        cladding_index=cladding,
        seed_mode=_mode(fib, "fiber", "seed_mode"),
        pump_mode=_mode(fib, "fiber", "pump_mode"),
        pump_orientation=_choice(fib, "fiber", "pump_orientation", ("auto", "even", "odd")),
        pump=_pulse(raw, "pump"),
        seed=_pulse(raw, "seed"),
        length=length,
        chi=chi,
        beta2_scale=_num(inter, "interaction", "beta2_scale"),
        frozen_factors=frozen,
        seed_integral=_choice(inter, "interaction", "seed_integral", ("auto", "frozen", "quadrature")),
        grid=grid,
        raman=raman,
        convention=_choice(r, "raman", "convention", ("printed", "quadratic")),
        area_sfwm=_q(sf, "sfwm_reference", "area", "area"),
        group_index_sfwm=_num(sf, "sfwm_reference", "group_index"),
        beta2_sfwm=_q(sf, "sfwm_reference", "beta2", "gvd"),
        noise=noise,
    )


# --------------------------------------------------------------------------
# sweep overrides

SWEEP_KEYS = {
    "tau_p": "time",
    "tau_s": "time",
    "L": "length",
    "beta2_scale": None,
    "P_p": "power",
    "P_s": "power",
}


def apply_override(run: RunConfig, key: str, value: str) -> tuple[RunConfig, float]:
    """Return ``run`` with one sweep parameter replaced, and the SI value used."""
    if key not in SWEEP_KEYS:
        raise ConfigError(f"--vary: unknown key {key!r} (choose from {', '.join(SWEEP_KEYS)})")
    dim = SWEEP_KEYS[key]
    if dim is None:
        try:
            val = float(value)
        except ValueError:
            raise ConfigError(f"--vary {key}: expected a plain number, got {value!r}") from None
        if not val > 0:
            raise ConfigError(f"--vary {key}: must be positive")
    else:
        val = parse_quantity(value, dim, f"--vary {key}")
    try:
        if key == "tau_p":
            return run.replace(pump=dataclasses.replace(run.pump, duration=val)), val
        if key == "tau_s":
            return run.replace(seed=dataclasses.replace(run.seed, duration=val)), val
        if key == "P_p":
            return run.replace(pump=dataclasses.replace(run.pump, power=val)), val
        if key == "P_s":
            return run.replace(seed=dataclasses.replace(run.seed, power=val)), val
        if key == "L":
            if not val > 0:
                raise ConfigError("--vary L: must be positive")
            return run.replace(length=val), val
        return run.replace(beta2_scale=val), val
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"--vary {key}: {exc}") from exc


def parse_vary(spec: str) -> tuple[str, list[str]]:
    """Split ``"tau_p=10ps,1ps"`` into the key and its value strings."""
    if "=" not in spec:
        raise ConfigError(f"--vary: expected key=v1,v2,... got {spec!r}")
    key, _, vals = spec.partition("=")
    values = [v.strip() for v in vals.split(",") if v.strip()]
    if not values:
        raise ConfigError(f"--vary {key}: no values given")
    return key.strip(), values
