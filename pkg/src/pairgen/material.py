"""Bulk material dispersion from Sellmeier oscillator sums.

The index is modelled as

    n^2(lambda) = 1 + a0 + sum_i B_i lambda^2 / (lambda^2 - lambda_i^2)

with resonance wavelengths ``lambda_i`` in microns.  Written in angular
frequency each term is ``B_i w_i^2 / (w_i^2 - w^2)`` which gives closed-form
frequency derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c

from .errors import ConfigError, DomainError, PoleError

__all__ = [
    "SellmeierModel",
    "FUSED_SILICA_MALITSON",
    "PRESETS",
    "constant_index",
    "refractive_index",
    "index_derivatives",
    "material_from_config",
]

# Relative distance to a resonance below which the sum is treated as singular.
_POLE_RTOL = 1e-9


@dataclass(frozen=True)
class SellmeierModel:
    """Sellmeier oscillator model.

    ``terms`` holds ``(B_i, lambda_i)`` pairs with ``lambda_i`` in microns and
    ``valid_range`` is ``(lambda_min, lambda_max)`` in microns.
    """

    terms: tuple[tuple[float, float], ...]
    valid_range: tuple[float, float] = (0.21, 3.71)
    a0: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        terms = tuple((float(b), float(lam)) for b, lam in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "valid_range", tuple(float(v) for v in self.valid_range))
        for b, lam in terms:
            if b < 0 or lam <= 0:
                raise ValueError(f"Sellmeier term ({b}, {lam}) needs B >= 0 and lambda > 0")
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise ValueError(f"invalid wavelength range {self.valid_range}")
        if self.a0 < 0:
            raise ValueError("a0 must be non-negative so that n >= 1")

    @property
    def resonance_omegas(self) -> np.ndarray:
        return np.array([2 * np.pi * c / (lam * 1e-6) for _, lam in self.terms])

    @property
    def strengths(self) -> np.ndarray:
        return np.array([b for b, _ in self.terms])


FUSED_SILICA_MALITSON = SellmeierModel(
    terms=((0.6961663, 0.0684043), (0.4079426, 0.1162414), (0.8974794, 9.896161)),
    valid_range=(0.21, 3.71),
    name="fused_silica_malitson",
)

PRESETS = {FUSED_SILICA_MALITSON.name: FUSED_SILICA_MALITSON}


def constant_index(n: float, valid_range=(0.2, 5.0)) -> SellmeierModel:
    """Dispersionless medium with index ``n`` (no oscillator terms)."""
    if n < 1:
        raise ValueError("constant index must be >= 1")
    return SellmeierModel(terms=(), valid_range=valid_range, a0=n * n - 1.0, name=f"constant_{n:g}")


def _check_wavelength(model: SellmeierModel, lam_um):
    lam_um = np.asarray(lam_um, dtype=float)
    lo, hi = model.valid_range
    if np.any(lam_um < lo) or np.any(lam_um > hi):
        raise DomainError(
            f"wavelength {np.min(lam_um):.6g}-{np.max(lam_um):.6g} um outside "
            f"valid range [{lo}, {hi}] um of {model.name}"
        )
    for _, res in model.terms:
        if np.any(np.abs(lam_um - res) <= _POLE_RTOL * res):
            raise PoleError(f"wavelength coincides with resonance at {res} um")
    return lam_um


def _n_squared(model: SellmeierModel, lam_um):
    x = lam_um * lam_um
    total = 1.0 + model.a0
    for b, res in model.terms:
        total = total + b * x / (x - res * res)
    return total


def refractive_index(model: SellmeierModel, wavelength):
    """Refractive index at vacuum wavelength ``wavelength`` (metres)."""
    lam_um = _check_wavelength(model, np.asarray(wavelength, dtype=float) * 1e6)
    n2 = _n_squared(model, lam_um)
    if np.any(n2 < 1.0):
        # Just above a resonance n^2 can drop below one; not a transparent window.
        raise DomainError("Sellmeier sum gives n < 1 at requested wavelength")
    n = np.sqrt(n2)
    return float(n) if np.ndim(n) == 0 else n


def index_derivatives(model: SellmeierModel, omega):
    """Return ``(dn/dw, d2n/dw2)`` at angular frequency ``omega``.

    Analytic differentiation of ``n^2 = 1 + a0 + sum B w_i^2/(w_i^2 - w^2)``.
    """
    omega = np.asarray(omega, dtype=float)
    n = np.asarray(refractive_index(model, 2 * np.pi * c / omega))
    d1 = np.zeros_like(omega)
    d2 = np.zeros_like(omega)
    for b, wi in zip(model.strengths, model.resonance_omegas):
        den = wi * wi - omega * omega
        d1 = d1 + b * wi * wi * 2 * omega / den**2
        d2 = d2 + b * wi * wi * (2 / den**2 + 8 * omega * omega / den**3)
    dn = d1 / (2 * n)
    d2n = (d2 - 2 * dn * dn) / (2 * n)
    if np.ndim(dn) == 0:
        return float(dn), float(d2n)
    return dn, d2n


def material_from_config(section: dict) -> SellmeierModel:
    """Build a model from a config table: a named preset or explicit terms."""
    if "preset" in section:
        name = section["preset"]
        if name not in PRESETS:
            raise ConfigError(f"material.preset: unknown preset {name!r}")
        return PRESETS[name]
    if "terms" not in section:
        raise ConfigError("material: need either 'preset' or 'terms'")
    try:
        terms = tuple((float(b), float(lam)) for b, lam in section["terms"])
        rng = tuple(float(v) for v in section.get("valid_range_um", (0.21, 3.71)))
        return SellmeierModel(terms=terms, valid_range=rng, a0=float(section.get("a0", 0.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"material.terms: {exc}") from exc
