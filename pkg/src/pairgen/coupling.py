"""Nonlinear overlap of four guided modes and the derived nonlinear parameters.

For an isotropic third-order susceptibility confined to the core,

    1/A = n̄^4 / (4 χ̄ eps0^2) ∫_core dA  1/(n1^2 n2^2 n3^2 n4^2) {
            w_a (d1·d2)* (d3* · d4)
          + w_b (d1·d3)* (d2* · d4)
          + w_c (d2·d3)* (d1* · d4) }

with weights ``w_a = 2χ1122+χ1212+χ1221`` etc.  Modes 1-3 sit in the
fundamental band (pair photons and seed), mode 4 is the pump.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0

from .errors import ContractError, WeakOverlapWarning
from .modes import GuidedMode

__all__ = [
    "Chi3Model",
    "EffectiveArea",
    "overlap_inverse_area",
    "effective_area",
    "effective_area_by_orientation",
    "gamma_sstpdc",
    "gamma_sfwm",
]


@dataclass(frozen=True)
class Chi3Model:
    """Third-order susceptibility of the core.

    ``chi3`` is the typical component size (m²/V²); the three independent
    isotropic components are given as fractions of it.
    """

    chi3: float = 2.5e-22
    xxyy: float = 1 / 3
    xyxy: float = 1 / 3
    xyyx: float = 1 / 3
    nbar: float = 1.45

    def __post_init__(self):
        if not self.chi3 > 0:
            raise ValueError("chi3 must be positive")
        if min(self.xxyy, self.xyxy, self.xyyx) < 0:
            raise ValueError("susceptibility fractions must be non-negative")
        if not self.nbar > 0:
            raise ValueError("nbar must be positive")

    @property
    def weights(self) -> tuple[float, float, float]:
        """Weights of the three vector-product terms, in units of chi3."""
        a, b, c = self.xxyy, self.xyxy, self.xyyx
        return (2 * a + b + c, a + 2 * b + c, a + b + 2 * c)


@dataclass(frozen=True)
class EffectiveArea:
    value: float  # m², inf when the overlap vanishes
    inverse: float  # 1/m²
    frequencies: tuple
    modes: tuple
    grid_points: int
    refinement_change: float  # relative change of the last grid doubling

    @property
    def um2(self) -> float:
        return self.value * 1e12


def overlap_inverse_area(d, n, chi: Chi3Model, cell_area: float) -> complex:
    """Midpoint-rule evaluation of 1/A from sampled displacement fields.

    ``d`` is a sequence of four arrays of shape (3, ...) sampled on points
    inside the nonlinear region, ``n`` the four refractive indices there.
    """
    d1, d2, d3, d4 = d
    wa, wb, wc = chi.weights

    def dot(u, v):
        return np.sum(u * v, axis=0)

    integrand = (
        wa * np.conj(dot(d1, d2)) * dot(np.conj(d3), d4)
        + wb * np.conj(dot(d1, d3)) * dot(np.conj(d2), d4)
        + wc * np.conj(dot(d2, d3)) * dot(np.conj(d1), d4)
    )
    denom = 4 * epsilon_0**2 * np.prod(np.asarray(n, dtype=float) ** 2, axis=0)
    return chi.nbar**4 * np.sum(integrand / denom) * cell_area


def _core_grid(radius, npts):
    h = 2 * radius / npts
    axis = -radius + h * (np.arange(npts) + 0.5)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    inside = X * X + Y * Y < radius * radius
    return X[inside], Y[inside], h * h


def _inverse_on_grid(modes, chi, npts):
    radius = modes[0].fiber.radius
    x, y, dA = _core_grid(radius, npts)
    cache = {}
    for m in modes:
        if id(m) not in cache:
            cache[id(m)] = m.field(x, y)
    fields = [cache[id(m)] for m in modes]
    n = [m.core_index for m in modes]
    return overlap_inverse_area(fields, n, chi, dA)


def effective_area(
    m1: GuidedMode,
    m2: GuidedMode,
    m3: GuidedMode,
    m4: GuidedMode,
    chi: Chi3Model = Chi3Model(),
    grid_points: int = 256,
    rtol: float = 0.01,
    max_grid_points: int = 2048,
) -> EffectiveArea:
    """Effective coupling area of three fundamental-band modes and a pump mode.

    The nonlinearity lives only in the core, so the quadrature grid covers the
    core square; it is doubled until 1/A changes by less than ``rtol``.
    """
    modes = (m1, m2, m3, m4)
    if not all(m.normalized for m in modes):
        raise ContractError("effective_area needs normalised mode fields")
    if len({m.fiber for m in modes}) != 1:
        raise ContractError("all modes must belong to the same fiber")
    if chi.weights == (0.0, 0.0, 0.0):
        warnings.warn("all susceptibility components vanish; area is infinite", WeakOverlapWarning)
        return EffectiveArea(np.inf, 0.0, tuple(m.omega for m in modes), tuple(m.mode for m in modes), 0, 0.0)

    freqs = tuple(m.omega for m in modes)
    ids = tuple(m.mode for m in modes)
    npts = grid_points
    inv = _inverse_on_grid(modes, chi, npts)
    # single-mode overlap sets the scale against which "vanishing" is judged
    scale = abs(_inverse_on_grid((m1, m1, m1, m1), Chi3Model(nbar=chi.nbar), npts))
    if abs(inv) < 1e-9 * scale:
        warnings.warn("nonlinear overlap vanishes; area is effectively infinite", WeakOverlapWarning)
        value = float(np.real(inv))
        area = np.inf if value == 0 else abs(1.0 / value)
        return EffectiveArea(float(area), value, freqs, ids, npts, np.nan)
    change = np.inf
    while npts < max_grid_points:
        npts *= 2
        inv_fine = _inverse_on_grid(modes, chi, npts)
        change = abs(inv_fine - inv) / abs(inv_fine)
        inv = inv_fine
        if change < rtol:
            break
    value = float(np.real(inv))
    if abs(np.imag(inv)) > 1e-6 * abs(inv):
        warnings.warn(f"overlap has an imaginary part {np.imag(inv):.3g}; using the real part", WeakOverlapWarning)
    area = 1.0 / value
    return EffectiveArea(float(area), value, freqs, ids, npts, float(change))


def effective_area_by_orientation(seed: GuidedMode, pump_even: GuidedMode, pump_odd: GuidedMode, chi=Chi3Model(), **kw):
    """Areas for both degenerate pump orientations, keyed by orientation.

    With the three fundamental-band fields identical, one orientation couples
    and the other usually gives a vanishing overlap.
    """
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakOverlapWarning)
        for pump in (pump_even, pump_odd):
            out[pump.orientation] = effective_area(seed, seed, seed, pump, chi, **kw)
    return out


def gamma_sstpdc(chi: Chi3Model, omega_s: float, vg_s: float, vg_p: float, area: float) -> float:
    """Nonlinear parameter of the seeded three-photon process.

    ``3 χ ω_s / (4 eps0 sqrt(v_s^3 v_p) n̄^4 A)`` (not the conventional W⁻¹m⁻¹ γ).
    """
    if min(omega_s, vg_s, vg_p, area) <= 0:
        raise ValueError("gamma_sstpdc inputs must be positive")
    return 3 * chi.chi3 * omega_s / (4 * epsilon_0 * np.sqrt(vg_s**3 * vg_p) * chi.nbar**4 * area)


def gamma_sfwm(chi: Chi3Model | float, omega_s: float, vg_s: float, area_sfwm: float, nbar: float | None = None) -> float:
    """Nonlinear parameter of degenerate four-wave mixing, same convention.

    ``chi`` may be a Chi3Model or a bare susceptibility (then ``nbar`` is
    required); a zero susceptibility gives zero.
    """
    if isinstance(chi, Chi3Model):
        chi3, nb = chi.chi3, chi.nbar if nbar is None else nbar
    else:
        if nbar is None:
            raise ValueError("nbar is required with a bare susceptibility")
        chi3, nb = float(chi), nbar
    if min(omega_s, vg_s, area_sfwm) <= 0:
        raise ValueError("gamma_sfwm inputs must be positive")
    return 3 * chi3 * omega_s / (4 * epsilon_0 * vg_s**2 * nb**4 * area_sfwm)
