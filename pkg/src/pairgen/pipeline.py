"""End-to-end steps shared by the CLI and the acceptance tests."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c

from .config import RunConfig
from .coupling import EffectiveArea, effective_area_by_orientation, gamma_sfwm, gamma_sstpdc
from .errors import WeakOverlapWarning
from .jsa import ExperimentConfig, JsaGrid, PairMetrics, compute_jsa, pair_probability_closed_form
from .material import refractive_index
from .modes import FiberSpec, ModeDispersion, dispersion_at, find_phasematch_diameter, mode_fields, solve_neff
from .raman import NoiseInputs, noise_report, noise_sweep, peak_densities, suppression_ratio

__all__ = ["Design", "design_source", "experiment_config", "run_jsa", "noise_inputs", "NoiseSummary", "run_noise"]


@dataclass(frozen=True)
class Design:
    fiber: FiberSpec
    solved_diameter: bool
    n_bulk_seed: float
    n_bulk_pump: float
    seed: ModeDispersion
    pump: ModeDispersion
    area: EffectiveArea
    area_by_orientation: dict
    pump_orientation: str
    gamma: float
    gamma_sfwm: float
    eta2_closed_form: float

    def report(self) -> dict:
        return {
            "diameter_um": self.fiber.diameter * 1e6,
            "diameter_solved": self.solved_diameter,
            "neff_seed": self.seed.n_eff,
            "neff_pump": self.pump.n_eff,
            "n_bulk_seed": self.n_bulk_seed,
            "n_bulk_pump": self.n_bulk_pump,
            "ng_seed": self.seed.n_g,
            "ng_pump": self.pump.n_g,
            "beta2_seed_ps2km": self.seed.beta2_ps2_per_km,
            "beta2_pump_ps2km": self.pump.beta2_ps2_per_km,
            "seed_mode": self.seed.mode.label,
            "pump_mode": self.pump.mode.label,
            "pump_orientation": self.pump_orientation,
            "A_um2": self.area.um2,
            "A_um2_by_orientation": {k: (v.um2 if np.isfinite(v.um2) else None) for k, v in self.area_by_orientation.items()},
            "gamma": self.gamma,
            "gamma_sfwm": self.gamma_sfwm,
            "eta2_closed_form": self.eta2_closed_form,
        }


def design_source(run: RunConfig) -> Design:
    """Phasematch (unless a diameter is fixed), then characterise both modes."""
    ws, wp = run.seed.omega0, run.pump.omega0
    solved = run.diameter is None
    if solved:
        d = find_phasematch_diameter(
            run.material, wp, ws, run.bracket, run.pump_mode, run.seed_mode, run.cladding_index
        )
    else:
        d = run.diameter
    fiber = FiberSpec(d, run.material, run.cladding_index)
    seed = dispersion_at(fiber, run.seed_mode, ws)
    pump = dispersion_at(fiber, run.pump_mode, wp)
    seed_field = mode_fields(fiber, run.seed_mode, ws)
    areas = effective_area_by_orientation(
        seed_field, mode_fields(fiber, run.pump_mode, wp, "even"), mode_fields(fiber, run.pump_mode, wp, "odd"), run.chi
    )
    if run.pump_orientation == "auto":
        orient = max(areas, key=lambda k: areas[k].inverse)
    else:
        orient = run.pump_orientation
    area = areas[orient]
    if not np.isfinite(area.value) or area.inverse <= 0:
        warnings.warn(f"pump orientation {orient!r} does not couple to the seed mode", WeakOverlapWarning)
    gam = gamma_sstpdc(run.chi, ws, seed.v_g, pump.v_g, area.value)
    gam_sf = gamma_sfwm(run.chi, ws, c / run.group_index_sfwm, run.area_sfwm)
    eta2 = pair_probability_closed_form(
        gam, run.length, run.seed.duration, run.pump.duration, seed.beta2 * run.beta2_scale, run.pump.power, run.seed.power
    )
    return Design(
        fiber=fiber,
        solved_diameter=solved,
        n_bulk_seed=refractive_index(run.material, run.seed.wavelength),
        n_bulk_pump=refractive_index(run.material, run.pump.wavelength),
        seed=seed,
        pump=pump,
        area=area,
        area_by_orientation=areas,
        pump_orientation=orient,
        gamma=gam,
        gamma_sfwm=gam_sf,
        eta2_closed_form=eta2,
    )


def experiment_config(run: RunConfig, design: Design) -> ExperimentConfig:
    return ExperimentConfig(
        fiber=design.fiber,
        pump=run.pump,
        seed=run.seed,
        length=run.length,
        chi=run.chi,
        grid=run.grid,
        seed_mode=run.seed_mode,
        pump_mode=run.pump_mode,
        pump_orientation=design.pump_orientation,
        frozen_factors=run.frozen_factors,
        seed_integral=run.seed_integral,
        beta2_scale=run.beta2_scale,
    )


def run_jsa(run: RunConfig, design: Design | None = None, threads: int = 1) -> tuple[JsaGrid, PairMetrics | None, Design]:
    design = design or design_source(run)
    grid, metrics = compute_jsa(experiment_config(run, design), threads=threads)
    return grid, metrics, design


def noise_inputs(run: RunConfig, design: Design) -> NoiseInputs:
    return NoiseInputs(
        gamma=design.gamma,
        gamma_sfwm=design.gamma_sfwm,
        area=design.area.value,
        area_sfwm=run.area_sfwm,
        beta2=design.seed.beta2 * run.beta2_scale,
        beta2_sfwm=run.beta2_sfwm,
        power_p=run.pump.power,
        length=run.length,
        seed_wavelength=run.seed.wavelength,
        raman=run.raman,
        convention=run.convention,
    )


@dataclass
class NoiseSummary:
    inputs: NoiseInputs
    seed_powers: np.ndarray
    sweep: list
    peaks: tuple
    spectrum: object  # NoiseReport at the representative seed power
    band: object  # NoiseReport at the pair-band detuning, representative power

    def summary(self) -> dict:
        inp = self.inputs
        ps = self.spectrum.power_s
        band = self.band
        return {
            "representative_seed_power_W": ps,
            "pump_power_W": inp.power_p,
            "single_pump_power_W": float(np.sqrt(ps * inp.power_p)),
            "A_um2": inp.area * 1e12,
            "A_sfwm_um2": inp.area_sfwm * 1e12,
            "area_gain_factor": inp.area_sfwm / inp.area,
            "suppression_ratio": float(suppression_ratio(inp.area, inp.area_sfwm, inp.power_p, ps)),
            "fom": band.fom,
            "fom_exact": float(band.fom_exact[0]),
            "pair_band_detuning_THz": float(band.detuning[0] * 1e-12),
            "sstpdc_signal": float(band.pair_density_sstpdc[0]),
            "sstpdc_raman": float(band.raman_density_stokes[0]),
            "sfwm_signal": float(band.pair_density_sfwm[0]),
            "sfwm_raman": float(band.raman_density_sfwm[0]),
            "sstpdc_above_raman": bool(band.pair_density_sstpdc[0] > band.raman_density_stokes[0]),
            "sfwm_below_raman": bool(band.pair_density_sfwm[0] < band.raman_density_sfwm[0]),
            "gamma": inp.gamma,
            "gamma_sfwm": inp.gamma_sfwm,
            "raman_peak_THz": inp.raman.peak_frequency * 1e-12,
            "temperature_K": inp.raman.temperature,
            "sinc_convention": inp.convention,
        }


def run_noise(run: RunConfig, design: Design | None = None) -> NoiseSummary:
    design = design or design_source(run)
    inp = noise_inputs(run, design)
    ns = run.noise
    powers = ns.seed_powers()
    sweep = noise_sweep(inp, powers, np.asarray(ns.detunings))
    peaks = peak_densities(inp, powers)
    spectrum = noise_report(inp, ns.representative_seed_power, ns.spectrum())
    band = noise_report(inp, ns.representative_seed_power, [ns.pair_band_detuning])
    return NoiseSummary(inp, powers, sweep, peaks, spectrum, band)
