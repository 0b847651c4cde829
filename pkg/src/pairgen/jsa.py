"""Joint spectral amplitude of the seeded third-order pair source.

A strong pump pulse near ``3 omega_s`` and a weak seed pulse near
``omega_s`` generate pairs at ``omega_1 + omega_2 = omega_p - omega_seed``.
To first order the output state is ``|vac> + eta |II>`` with

    Phi~(w1, w2) = (3 sqrt(2) i alpha* beta hbar / 8 pi eps0) (chi/n̄^4)
                   ∫ dw sqrt(w1 w2 w wp / (v1 v2 v vp)) s*(dk) phi_s*(w) phi_p(wp) / A

where ``wp = w1 + w2 + w``, ``s(dk) = L sinc(dk L / 2)`` and
``dk = k_p(wp) - k(w) - k(w1) - k(w2)``.  ``eta^2 = ∫∫|Phi~|^2`` is the pair
probability per pulse and ``Phi = Phi~/eta`` the normalised JSA.
"""

from __future__ import annotations

import dataclasses
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c, epsilon_0, hbar
from scipy.interpolate import RegularGridInterpolator
from threadpoolctl import threadpool_limits

from .coupling import Chi3Model, _core_grid, effective_area, overlap_inverse_area
from .errors import (
    ContractError,
    DomainError,
    FirstOrderValidityError,
    FirstOrderWarning,
    GridResolutionError,
    GridTruncationError,
)
from .modes import HE11, HE12, DispersionBranch, FiberSpec, ModeId, dispersion_at, mode_fields

__all__ = [
    "PulseSpec",
    "GridSpec",
    "ExperimentConfig",
    "JsaGrid",
    "PairMetrics",
    "spectral_profile",
    "gaussian_overlap",
    "phase_mismatch",
    "phasematch_factor",
    "jsa_from_amplitude",
    "sum_frequency_aliasing",
    "compute_jsa",
    "pair_metrics",
    "pair_probability_closed_form",
    "schmidt_number",
    "g2_zero",
    "generation_bandwidth",
]

FIRST_ORDER_WARN = 0.1
FIRST_ORDER_MAX = 0.5
TRUNCATION_LEVEL = 1e-3
ALIASING_LIMIT = 1e-2
FROZEN_SEED_RTOL = 5e-3


@dataclass(frozen=True)
class PulseSpec:
    """Transform-limited Gaussian pulse; ``power`` is the peak-ish power P = ħω|α|²/τ."""

    role: str
    wavelength: float
    duration: float
    power: float
    shape: str = "gaussian"

    def __post_init__(self):
        if self.role not in ("pump", "seed"):
            raise ValueError("pulse role must be 'pump' or 'seed'")
        if not self.duration > 0:
            raise ValueError("pulse duration must be positive")
        if self.power < 0:
            raise ValueError("pulse power must be non-negative")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if self.shape != "gaussian":
            raise ValueError("only Gaussian pulses are supported")

    @property
    def omega0(self) -> float:
        return 2 * np.pi * c / self.wavelength

    @property
    def photon_number(self) -> float:
        return self.power * self.duration / (hbar * self.omega0)

    @property
    def amplitude(self) -> float:
        return float(np.sqrt(self.photon_number))


@dataclass(frozen=True)
class GridSpec:
    """Discretisation of the pair-frequency plane and of the seed integral."""

    points: int = 2048
    half_span: float = 2 * np.pi * 10e12  # rad/s around omega_s
    inner_nodes: int = 64
    inner_half_width: float = 6.0  # in units of 1/tau_s
    area_subgrid: int = 8
    area_grid_points: int = 256
    dispersion_nodes: int = 129

    def __post_init__(self):
        if self.points < 64:
            raise ValueError("grid needs at least 64 points per axis")
        if not self.half_span > 0:
            raise ValueError("grid half span must be positive")
        if self.inner_nodes < 2 or self.area_subgrid < 2:
            raise ValueError("need at least two inner nodes and area sub-grid points")

    @property
    def step(self) -> float:
        return 2 * self.half_span / self.points

    def offsets(self) -> np.ndarray:
        """Midpoint offsets from the band centre; symmetric about zero."""
        return -self.half_span + self.step * (np.arange(self.points) + 0.5)


@dataclass(frozen=True)
class ExperimentConfig:
    fiber: FiberSpec
    pump: PulseSpec
    seed: PulseSpec
    length: float
    chi: Chi3Model = Chi3Model()
    grid: GridSpec = GridSpec()
    seed_mode: ModeId = HE11
    pump_mode: ModeId = HE12
    pump_orientation: str = "auto"
    frozen_factors: bool = False
    seed_integral: str = "auto"
    beta2_scale: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("interaction length must be positive")
        if self.pump_orientation not in ("auto", "even", "odd"):
            raise ValueError("pump_orientation must be auto, even or odd")
        if self.seed_integral not in ("auto", "frozen", "quadrature"):
            raise ValueError("seed_integral must be auto, frozen or quadrature")
        if not self.beta2_scale > 0:
            raise ValueError("beta2_scale must be positive")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class JsaGrid:
    omega1: np.ndarray
    omega2: np.ndarray
    weights1: np.ndarray
    weights2: np.ndarray
    amplitude: np.ndarray  # normalised Phi (zeros when eta = 0)
    eta2: float
    info: dict = field(default_factory=dict)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def norm(self) -> float:
        return float(self.weights1 @ self.intensity @ self.weights2)

    def marginal(self) -> np.ndarray:
        return self.intensity @ self.weights2


@dataclass(frozen=True)
class PairMetrics:
    eta2: float
    schmidt_number: float
    g2: float
    bandwidth: float  # Hz

    @property
    def bandwidth_thz(self) -> float:
        return self.bandwidth * 1e-12


# --------------------------------------------------------------------------
# elementary pieces


def spectral_profile(pulse: PulseSpec, omega):
    """Unit-norm Gaussian amplitude ``sqrt(tau)/pi^(1/4) exp(-tau^2 (w-w0)^2/2)``."""
    tau = pulse.duration
    return np.sqrt(tau) / np.pi**0.25 * np.exp(-(tau**2) * (np.asarray(omega) - pulse.omega0) ** 2 / 2)


def gaussian_overlap(tau_s, tau_p, detuning):
    """``∫ phi_s(w) phi_p(w + Sigma) dw`` for Gaussian profiles in closed form.

    ``detuning`` is ``Sigma + omega_s - omega_p``: how far the summed
    frequency sits from the pump centre when the seed is at its centre.
    """
    ts2, tp2 = tau_s * tau_s, tau_p * tau_p
    pref = np.sqrt(tau_s * tau_p / np.pi) * np.sqrt(2 * np.pi / (ts2 + tp2))
    return pref * np.exp(-ts2 * tp2 * np.asarray(detuning) ** 2 / (2 * (ts2 + tp2)))


def phasematch_factor(dk, length):
    """Fourier transform of a top-hat nonlinearity centred at z = 0: ``L sinc(dk L/2)``."""
    return length * np.sinc(np.asarray(dk) * length / (2 * np.pi))


def phase_mismatch(omega1, omega2, omega3, omega4, seed_branch, pump_branch):
    """``dk = k_p(w4) - k(w3) - k(w2) - k(w1)`` on the tabulated mode branches."""
    return pump_branch.k(omega4) - seed_branch.k(omega3) - (seed_branch.k(omega1) + seed_branch.k(omega2))


def pair_probability_closed_form(gamma, length, tau_s, tau_p, beta2, power_p, power_s):
    """Long-seed, quadratic-dispersion estimate of the pair probability per pulse.

    ``(4 gamma^2 L^2 / 3 pi) sqrt(2 tau_s^2 tau_p^2 / (|beta2| L (tau_s^2+tau_p^2))) P_p P_s``
    """
    if beta2 == 0:
        raise DomainError("closed-form rate diverges for zero group-velocity dispersion")
    if min(gamma, length, tau_s, tau_p) <= 0 or min(power_p, power_s) < 0:
        raise ValueError("closed-form rate inputs must be positive")
    root = np.sqrt(2 * tau_s**2 * tau_p**2 / (abs(beta2) * length * (tau_s**2 + tau_p**2)))
    return 4 * gamma**2 * length**2 / (3 * np.pi) * root * power_p * power_s


def g2_zero(schmidt: float) -> float:
    """Unheralded second-order correlation ``1 + 1/K``."""
    if schmidt < 1 - 1e-9:
        raise ValueError("Schmidt number must be >= 1")
    return 1.0 + 1.0 / schmidt


# --------------------------------------------------------------------------
# grid utilities


def jsa_from_amplitude(omega1, omega2, weights1, weights2, amplitude, info=None) -> JsaGrid:
    """Normalise an unnormalised amplitude; ``eta^2 = sum w_i w_j |A_ij|^2``."""
    weights1 = np.asarray(weights1, dtype=float)
    weights2 = np.asarray(weights2, dtype=float)
    amplitude = np.asarray(amplitude)
    eta2 = float(weights1 @ (np.abs(amplitude) ** 2) @ weights2)
    phi = amplitude / np.sqrt(eta2) if eta2 > 0 else np.zeros_like(amplitude, dtype=complex)
    return JsaGrid(np.asarray(omega1), np.asarray(omega2), weights1, weights2, phi, eta2, dict(info or {}))


def _check_normalized(grid: JsaGrid):
    norm = grid.norm()
    if abs(norm - 1) > 1e-6:
        raise ContractError(f"JSA is not normalised (norm = {norm:.9g})")


def schmidt_number(grid: JsaGrid) -> float:
    """``K = 1/sum(lambda_n^2)`` from the SVD of ``sqrt(w_i) Phi_ij sqrt(w_j)``."""
    _check_normalized(grid)
    m = np.sqrt(grid.weights1)[:, None] * grid.amplitude * np.sqrt(grid.weights2)[None, :]
    with threadpool_limits(limits=1):
        s = np.linalg.svd(m, compute_uv=False)
    lam = s**2 / np.sum(s**2)
    return float(1.0 / np.sum(lam**2))


def _half_crossing(x, y, i, j, half):
    return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i])


def generation_bandwidth(grid: JsaGrid) -> float:
    """FWHM (Hz) of the single-photon marginal ``sum_j w_j |Phi_ij|^2``."""
    _check_normalized(grid)
    rho = grid.marginal()
    half = rho.max() / 2
    above = np.nonzero(rho >= half)[0]
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == len(rho) - 1:
        raise GridTruncationError("marginal does not fall below half maximum inside the grid; widen the span")
    w = grid.omega1
    left = _half_crossing(w, rho, lo - 1, lo, half)
    right = _half_crossing(w, rho, hi, hi + 1, half)
    return float((right - left) / (2 * np.pi))


def pair_metrics(grid: JsaGrid) -> PairMetrics:
    k = schmidt_number(grid)
    return PairMetrics(grid.eta2, k, g2_zero(k), generation_bandwidth(grid))


# --------------------------------------------------------------------------
# the full calculation


class _Kernel:
    """Everything in the integrand except the two pulse envelopes."""

    def __init__(self, cfg: ExperimentConfig, omega1, omega2, omega_inner_lo, omega_inner_hi):
        g = cfg.grid
        self.cfg = cfg
        self.omega1 = omega1
        self.omega2 = omega2
        ws, wp = cfg.seed.omega0, cfg.pump.omega0
        lo = min(omega1.min(), omega2.min(), omega_inner_lo)
        hi = max(omega1.max(), omega2.max(), omega_inner_hi)
        pad = 1e-3 * (hi - lo)
        beta2_offset = 0.0
        if cfg.beta2_scale != 1.0:
            beta2_offset = (cfg.beta2_scale - 1.0) * dispersion_at(cfg.fiber, cfg.seed_mode, ws).beta2
        self.seed_branch = DispersionBranch(
            cfg.fiber, cfg.seed_mode, lo - pad, hi + pad, g.dispersion_nodes, beta2_offset, ws
        )
        plo = omega1.min() + omega2.min() + omega_inner_lo
        phi = omega1.max() + omega2.max() + omega_inner_hi
        ppad = 1e-3 * (phi - plo)
        self.pump_branch = DispersionBranch(cfg.fiber, cfg.pump_mode, plo - ppad, phi + ppad, g.dispersion_nodes)
        self.k1 = self.seed_branch.k(omega1)
        self.k2 = self.seed_branch.k(omega2)
        self.vg1 = self.seed_branch.group_velocity(omega1)
        self.vg2 = self.seed_branch.group_velocity(omega2)
        self._setup_area(ws, wp)

    def _setup_area(self, ws, wp):
        cfg = self.cfg
        fib, chi = cfg.fiber, cfg.chi
        seed = mode_fields(fib, cfg.seed_mode, ws)
        if cfg.pump_orientation == "auto":
            cands = [mode_fields(fib, cfg.pump_mode, wp, o) for o in ("even", "odd")]
            areas = []
            for p in cands:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    areas.append(effective_area(seed, seed, seed, p, chi))
            best = int(np.argmax([a.inverse for a in areas]))
            self.orientation = cands[best].orientation
            self.center_area = areas[best]
        else:
            self.orientation = cfg.pump_orientation
            p = mode_fields(fib, cfg.pump_mode, wp, self.orientation)
            self.center_area = effective_area(seed, seed, seed, p, chi)
        self.area_by_orientation = None
        if cfg.frozen_factors:
            self.inv_area = self.center_area.inverse
            return
        # 1/A on a coarse symmetric sub-grid, bilinearly interpolated
        n = cfg.grid.area_subgrid
        sub1 = np.linspace(self.omega1[0], self.omega1[-1], n)
        sub2 = np.linspace(self.omega2[0], self.omega2[-1], n)
        x, y, dA = _core_grid(fib.radius, cfg.grid.area_grid_points)
        fields = {}

        def sampled(mode, omega, orient="even"):
            key = (mode, omega, orient)
            if key not in fields:
                gm = mode_fields(fib, mode, omega, orient)
                fields[key] = (gm.field(x, y), gm.core_index)
            return fields[key]

        d3, n3 = sampled(cfg.seed_mode, ws)
        table = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                if sub1.tobytes() == sub2.tobytes() and j < i:
                    table[i, j] = table[j, i]
                    continue
                d1, n1 = sampled(cfg.seed_mode, float(sub1[i]))
                d2, n2 = sampled(cfg.seed_mode, float(sub2[j]))
                d4, n4 = sampled(cfg.pump_mode, float(sub1[i] + sub2[j] + ws), self.orientation)
                table[i, j] = np.real(overlap_inverse_area((d1, d2, d3, d4), (n1, n2, n3, n4), cfg.chi, dA))
        self.area_table = (sub1, sub2, table)
        interp = RegularGridInterpolator((sub1, sub2), table, method="linear")
        W1, W2 = np.meshgrid(self.omega1, self.omega2, indexing="ij")
        inv = interp(np.stack([W1, W2], axis=-1))
        if inv.shape[0] == inv.shape[1]:
            inv = 0.5 * (inv + inv.T)
        self.inv_area = inv

    def rows(self, sl: slice, omega3: float):
        """Kernel for rows ``sl`` of the grid with the seed at ``omega3``."""
        cfg = self.cfg
        w1 = self.omega1[sl][:, None]
        w2 = self.omega2[None, :]
        w4 = (w1 + w2) + omega3
        k3 = self.seed_branch.k(omega3)
        dk = self.pump_branch.k(w4) - k3 - (self.k1[sl][:, None] + self.k2[None, :])
        s = phasematch_factor(dk, cfg.length)
        inv_area = self.inv_area if np.ndim(self.inv_area) == 0 else self.inv_area[sl]
        if cfg.frozen_factors:
            ws, wp = cfg.seed.omega0, cfg.pump.omega0
            vs = float(self.seed_branch.group_velocity(ws))
            vp = float(self.pump_branch.group_velocity(wp))
            dens = np.sqrt(ws**3 * wp / (vs**3 * vp))
        else:
            v3 = self.seed_branch.group_velocity(omega3)
            dens = np.sqrt(
                (w1 * w2) * omega3 * w4 / ((self.vg1[sl][:, None] * self.vg2[None, :]) * v3 * self.pump_branch.group_velocity(w4))
            )
        return dens * s * inv_area


def _prefactor(cfg: ExperimentConfig) -> complex:
    alpha, beta = cfg.seed.amplitude, cfg.pump.amplitude
    return 1j * 3 * np.sqrt(2) * alpha * beta * hbar / (8 * np.pi * epsilon_0) * cfg.chi.chi3 / cfg.chi.nbar**4


def _blocks(n, threads):
    nb = max(1, min(n, 4 * threads))
    edges = np.linspace(0, n, nb + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def compute_jsa(cfg: ExperimentConfig, threads: int = 1, check_truncation: bool = True):
    """Evaluate the JSA on the configured grid; returns ``(JsaGrid, PairMetrics)``.

    ``PairMetrics`` is ``None`` when no pairs are produced (zero seed or pump).
    Rows are evaluated in independent blocks, so results do not depend on
    the thread count.
    """
    g = cfg.grid
    ws, wp = cfg.seed.omega0, cfg.pump.omega0
    offsets = g.offsets()
    omega1 = ws + offsets
    omega2 = ws + offsets
    weights = np.full(g.points, g.step)
    tau_s, tau_p = cfg.seed.duration, cfg.pump.duration

    if cfg.seed.power == 0 or cfg.pump.power == 0:
        zero = np.zeros((g.points, g.points), dtype=complex)
        return jsa_from_amplitude(omega1, omega2, weights, weights, zero, {"reason": "no seed or pump"}), None

    alias = sum_frequency_aliasing(g.step, tau_s, tau_p)
    if alias > ALIASING_LIMIT:
        need = int(np.ceil(2 * g.half_span * _tau_eff(tau_s, tau_p) / 1.14))
        raise GridResolutionError(
            f"grid step {g.step / (2 * np.pi) * 1e-9:.3g} GHz cannot resolve the pump-limited "
            f"sum-frequency width (estimated pair-probability error {alias:.2g}); "
            f"use at least {need} points for this span"
        )
    half_w = g.inner_half_width / tau_s
    kern = _Kernel(cfg, omega1, omega2, ws - half_w, ws + half_w)
    pref = _prefactor(cfg)
    nodes, wts = np.polynomial.legendre.leggauss(g.inner_nodes)
    inner = ws + half_w * nodes
    inner_w = half_w * wts

    def frozen_rows(sl):
        detune = (omega1[sl][:, None] + omega2[None, :]) + ws - wp
        return pref * kern.rows(sl, ws) * gaussian_overlap(tau_s, tau_p, detune)

    def quadrature_rows(sl):
        acc = np.zeros((sl.stop - sl.start, g.points), dtype=complex)
        for w3, wq in zip(inner, inner_w):
            w4 = (omega1[sl][:, None] + omega2[None, :]) + w3
            env = np.conj(spectral_profile(cfg.seed, w3)) * spectral_profile(cfg.pump, w4)
            acc += wq * kern.rows(sl, w3) * env
        return pref * acc

    mode = cfg.seed_integral
    seed_check = None
    if mode == "auto":
        probe = _probe_rows(g.points)
        ref = np.concatenate([quadrature_rows(sl) for sl in probe])
        fro = np.concatenate([frozen_rows(sl) for sl in probe])
        seed_check = float(np.max(np.abs(fro - ref)) / np.max(np.abs(ref)))
        mode = "frozen" if seed_check < FROZEN_SEED_RTOL else "quadrature"
    row_fn = frozen_rows if mode == "frozen" else quadrature_rows

    blocks = _blocks(g.points, threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(row_fn, blocks))
    else:
        parts = [row_fn(sl) for sl in blocks]
    amp = np.concatenate(parts, axis=0)

    info = {
        "seed_integral": mode,
        "seed_integral_check": seed_check,
        "pump_orientation": kern.orientation,
        "area_center": kern.center_area.value,
        "frozen_factors": cfg.frozen_factors,
    }
    grid = jsa_from_amplitude(omega1, omega2, weights, weights, amp, info)
    if check_truncation:
        _check_truncation(grid, g)
    if grid.eta2 > FIRST_ORDER_MAX:
        raise FirstOrderValidityError(
            f"pair probability {grid.eta2:.3g} > {FIRST_ORDER_MAX}: first-order expansion invalid"
        )
    if grid.eta2 > FIRST_ORDER_WARN:
        warnings.warn(f"pair probability {grid.eta2:.3g} exceeds {FIRST_ORDER_WARN}", FirstOrderWarning)
    return grid, pair_metrics(grid)


def _tau_eff(tau_s, tau_p):
    return tau_s * tau_p / np.hypot(tau_s, tau_p)


def sum_frequency_aliasing(step, tau_s, tau_p) -> float:
    """Relative error of the grid sum across the sum-frequency direction.

    Along ``w1 + w2`` the amplitude is a Gaussian of width ``1/tau_eff``
    sampled at spacing ``step``; by Poisson summation the midpoint sum of its
    square is off by ``2 exp(-(pi / (step tau_eff))^2)``.
    """
    x = np.pi / (step * _tau_eff(tau_s, tau_p))
    return float(2 * np.exp(-x * x))


def _probe_rows(n):
    centre = n // 2
    picks = sorted({centre - 1, centre, n // 2 + n // 8, n // 4})
    return [slice(i, i + 1) for i in picks]


def _check_truncation(grid: JsaGrid, g: GridSpec):
    inten = grid.intensity
    edge = max(inten[0].max(), inten[-1].max(), inten[:, 0].max(), inten[:, -1].max())
    ratio = edge / inten.max()
    if ratio > TRUNCATION_LEVEL:
        raise GridTruncationError(
            f"|JSA|^2 at the grid edge is {ratio:.2g} of its peak; increase the grid half-span "
            f"(currently {g.half_span / (2 * np.pi) * 1e-12:.3g} THz)"
        )
