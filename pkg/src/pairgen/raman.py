"""Spontaneous Raman noise against seeded-pair and four-wave-mixing signals.

Quasi-CW throughout: pulse durations enter only through the powers.
Detunings ``Delta`` are ordinary frequencies (Hz) measured from the field
that drives the Raman scattering (the seed for the seeded process, the
single pump for four-wave mixing).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import h, k as k_B

from .errors import DomainError

__all__ = [
    "RamanModel",
    "NoiseReport",
    "oscillator_shape",
    "raman_gain",
    "bulk_raman_gain",
    "thermal_occupation",
    "raman_flux",
    "sfwm_density",
    "sstpdc_density",
    "figure_of_merit",
    "figure_of_merit_exact",
    "suppression_ratio",
    "noise_sweep",
]


def oscillator_shape(delta, tau1=12.2e-15, tau2=32e-15):
    """Imaginary part of the damped-oscillator response spectrum (unnormalised).

    ``h(t) ~ exp(-t/tau2) sin(t/tau1)`` transforms to a product of two
    Lorentzians; its imaginary part is odd in frequency and vanishes at 0.
    """
    w = 2 * np.pi * np.asarray(delta, dtype=float)
    a, b = 1 / tau1, 1 / tau2
    return 2 * w * a * b / (((w - a) ** 2 + b * b) * ((w + a) ** 2 + b * b))


@dataclass(frozen=True)
class RamanModel:
    """Raman gain of the core glass.

    ``g_peak`` (m/W) is quoted for a pump at ``ref_wavelength`` and applies
    in a fiber of effective area ``ref_area`` when used as an area-scaled
    gain.  ``table`` optionally replaces the oscillator by a measured
    ``(Delta_Hz, relative gain)`` curve.
    """

    tau1: float = 12.2e-15
    tau2: float = 32e-15
    g_peak: float = 1e-13
    ref_wavelength: float = 1.55e-6
    ref_area: float = 84.0e-12
    temperature: float = 300.0
    table: tuple | None = None

    def __post_init__(self):
        if min(self.tau1, self.tau2, self.g_peak, self.ref_wavelength, self.ref_area) <= 0:
            raise ValueError("Raman model parameters must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.table is not None:
            arr = np.asarray(self.table, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or np.any(np.diff(arr[:, 0]) <= 0):
                raise ValueError("Raman table needs increasing (Delta, gain) rows")

    def shape(self, delta):
        """Relative gain, normalised to a peak of one."""
        delta = np.abs(np.asarray(delta, dtype=float))
        if self.table is not None:
            arr = np.asarray(self.table, dtype=float)
            rel = np.interp(delta, arr[:, 0], arr[:, 1] / arr[:, 1].max(), left=0.0, right=0.0)
            return rel
        return oscillator_shape(delta, self.tau1, self.tau2) / self._osc_peak

    @property
    def _osc_peak(self) -> float:
        return oscillator_shape(self.peak_frequency, self.tau1, self.tau2)

    @property
    def peak_frequency(self) -> float:
        """Detuning (Hz) of maximum gain for the oscillator response."""
        if self.table is not None:
            arr = np.asarray(self.table, dtype=float)
            return float(arr[np.argmax(arr[:, 1]), 0])
        # dR/dw = 0 of w/((w-a)^2+b^2)((w+a)^2+b^2): 3w^4 + 2(b^2-a^2)w^2 - (a^2+b^2)^2 = 0
        a, b = 1 / self.tau1, 1 / self.tau2
        w2 = (-(b * b - a * a) + np.sqrt((b * b - a * a) ** 2 + 3 * (a * a + b * b) ** 2)) / 3
        return float(np.sqrt(w2) / (2 * np.pi))


def bulk_raman_gain(model: RamanModel, delta, pump_wavelength: float | None = None):
    """Material gain (m/W) at detuning ``delta``; scales inversely with pump wavelength."""
    scale = 1.0 if pump_wavelength is None else model.ref_wavelength / pump_wavelength
    return model.g_peak * scale * model.shape(delta)


def raman_gain(model: RamanModel, delta, area: float, pump_wavelength: float | None = None):
    """Area-scaled gain ``g_bulk(Delta) * A_ref / A`` (m/W).

    A fiber of smaller effective area shows proportionally larger Raman gain
    than the reference fiber.
    """
    if np.any(np.asarray(delta) < 0):
        raise DomainError("Raman detuning must be non-negative")
    return bulk_raman_gain(model, delta, pump_wavelength) * model.ref_area / area


def thermal_occupation(delta, temperature):
    """Bose-Einstein phonon number ``1/(exp(h Delta / k T) - 1)``; 0 at T = 0."""
    delta = np.asarray(delta, dtype=float)
    if temperature == 0:
        return np.zeros_like(delta)
    with np.errstate(over="ignore"):  # exp overflow -> occupation 0, as it should
        return 1.0 / np.expm1(h * delta / (k_B * temperature))


def raman_flux(model: RamanModel, filter_width, power, length, delta, area, stokes=True, pump_wavelength=None):
    """Raman photon flux (photons/s) into a filter of width ``filter_width`` (Hz).

    ``Delta_nu P L |g_R(Delta)| [rho + n_th] / A`` with ``rho = 1`` on the
    Stokes side and ``0`` on the anti-Stokes side; ``g_R`` is the bulk gain.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise DomainError("Raman flux needs a non-zero detuning (thermal factor diverges)")
    rho = 1.0 if stokes else 0.0
    occ = thermal_occupation(delta, model.temperature)
    g = np.abs(bulk_raman_gain(model, delta, pump_wavelength))
    return filter_width * power * length * g * (rho + occ) / area


def _sinc2(beta2, length, delta, convention):
    if convention == "printed":
        # sinc^2(pi beta2 L Delta) with sinc(x) = sin(x)/x
        return np.sinc(beta2 * length * np.asarray(delta)) ** 2
    if convention == "quadratic":
        # sinc^2(dk L/2) with dk = beta2 (2 pi Delta)^2
        return np.sinc(2 * np.pi * beta2 * length * np.asarray(delta) ** 2) ** 2
    raise ValueError("convention must be 'printed' or 'quadratic'")


def sfwm_density(gamma_sfwm, power_sp, length, beta2_sfwm, delta, convention="printed"):
    """Four-wave-mixing pair density (photons/s/Hz): ``(gamma P L)^2 sinc^2(...)``."""
    return (gamma_sfwm * power_sp * length) ** 2 * _sinc2(beta2_sfwm, length, delta, convention)


def sstpdc_density(gamma, power_p, power_s, length, beta2, delta, convention="printed"):
    """Seeded-pair density (photons/s/Hz): ``4 (gamma sqrt(Pp Ps) L)^2 sinc^2(...)``."""
    return 4 * (gamma * np.sqrt(power_p * power_s) * length) ** 2 * _sinc2(beta2, length, delta, convention)


def figure_of_merit(area, area_sfwm, power_p, power_s):
    """Closed-form SNR ratio ``4 (A_sfwm/A) sqrt(Pp/Ps)``."""
    return 4 * (area_sfwm / area) * np.sqrt(power_p / np.asarray(power_s, dtype=float))


def suppression_ratio(area, area_sfwm, power_p, power_s):
    """``P_sp A / (P_s A_sfwm)`` with the single-pump power ``P_sp = sqrt(Ps Pp)``."""
    return np.sqrt(power_s * power_p) * area / (power_s * area_sfwm)


def figure_of_merit_exact(snr_sstpdc, snr_sfwm):
    return np.asarray(snr_sstpdc) / np.asarray(snr_sfwm)


@dataclass
class NoiseReport:
    """Densities and noise for one seed power across a detuning axis."""

    power_s: float
    detuning: np.ndarray  # Hz
    raman_density_stokes: np.ndarray  # SSTPDC seed Raman, photons/s/Hz
    raman_density_antistokes: np.ndarray
    raman_density_sfwm: np.ndarray  # single-pump Raman (Stokes), photons/s/Hz
    pair_density_sfwm: np.ndarray
    pair_density_sstpdc: np.ndarray
    snr_sfwm: np.ndarray
    snr_sstpdc: np.ndarray
    fom: float
    fom_exact: np.ndarray
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NoiseInputs:
    """Everything the noise comparison needs, in SI units."""

    gamma: float
    gamma_sfwm: float
    area: float
    area_sfwm: float
    beta2: float
    beta2_sfwm: float
    power_p: float
    length: float
    seed_wavelength: float
    raman: RamanModel = RamanModel()
    convention: str = "printed"


def noise_report(inp: NoiseInputs, power_s: float, detuning) -> NoiseReport:
    """Signal and Raman densities at each detuning for one seed power.

    Raman noise is per unit filter width, so it compares directly with the
    pair densities.  Stokes-side noise is the reported (worse) channel.
    """
    delta = np.asarray(detuning, dtype=float)
    if power_s <= 0 or np.any(delta <= 0):
        raise DomainError("seed power and detunings must be positive")
    p_sp = np.sqrt(power_s * inp.power_p)
    r = inp.raman
    lam = inp.seed_wavelength
    stokes = raman_flux(r, 1.0, power_s, inp.length, delta, inp.area, True, lam)
    anti = raman_flux(r, 1.0, power_s, inp.length, delta, inp.area, False, lam)
    r_sfwm = raman_flux(r, 1.0, p_sp, inp.length, delta, inp.area_sfwm, True, lam)
    s_sfwm = sfwm_density(inp.gamma_sfwm, p_sp, inp.length, inp.beta2_sfwm, delta, inp.convention)
    s_sst = sstpdc_density(inp.gamma, inp.power_p, power_s, inp.length, inp.beta2, delta, inp.convention)
    snr_sfwm = s_sfwm / r_sfwm
    snr_sst = s_sst / stokes
    return NoiseReport(
        power_s=float(power_s),
        detuning=delta,
        raman_density_stokes=stokes,
        raman_density_antistokes=anti,
        raman_density_sfwm=r_sfwm,
        pair_density_sfwm=s_sfwm,
        pair_density_sstpdc=s_sst,
        snr_sfwm=snr_sfwm,
        snr_sstpdc=snr_sst,
        fom=float(figure_of_merit(inp.area, inp.area_sfwm, inp.power_p, power_s)),
        fom_exact=figure_of_merit_exact(snr_sst, snr_sfwm),
        extras={"single_pump_power": float(p_sp)},
    )


def noise_sweep(inp: NoiseInputs, seed_powers, detunings) -> list[NoiseReport]:
    """One report per seed power; powers and detunings must be positive and increasing."""
    seed_powers = np.asarray(seed_powers, dtype=float)
    detunings = np.asarray(detunings, dtype=float)
    for name, arr in (("seed powers", seed_powers), ("detunings", detunings)):
        if arr.size == 0 or np.any(arr <= 0) or np.any(np.diff(arr) <= 0):
            raise DomainError(f"{name} must be positive and strictly increasing")
    return [noise_report(inp, float(p), detunings) for p in seed_powers]


def peak_densities(inp: NoiseInputs, seed_powers):
    """Zero-detuning pair densities and the closed-form FOM versus seed power."""
    ps = np.asarray(seed_powers, dtype=float)
    p_sp = np.sqrt(ps * inp.power_p)
    sst = sstpdc_density(inp.gamma, inp.power_p, ps, inp.length, inp.beta2, 0.0, inp.convention)
    sfwm = sfwm_density(inp.gamma_sfwm, p_sp, inp.length, inp.beta2_sfwm, 0.0, inp.convention)
    return sst, sfwm, figure_of_merit(inp.area, inp.area_sfwm, inp.power_p, ps)
