import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.constants import c
from scipy.integrate import quad

from conftest import LAMBDA_S, OMEGA_P, OMEGA_S, coarse_config
from pairgen.errors import (
    ContractError,
    DomainError,
    FirstOrderValidityError,
    FirstOrderWarning,
    GridResolutionError,
    GridTruncationError,
)
from pairgen.jsa import (
    ExperimentConfig,
    GridSpec,
    PulseSpec,
    compute_jsa,
    g2_zero,
    gaussian_overlap,
    generation_bandwidth,
    jsa_from_amplitude,
    pair_metrics,
    pair_probability_closed_form,
    phase_mismatch,
    phasematch_factor,
    schmidt_number,
    spectral_profile,
    sum_frequency_aliasing,
)
from pairgen.modes import HE11, HE12, DispersionBranch, dispersion_at

# ---------------------------------------------------------------- building blocks


@given(tau=st.floats(1e-13, 1e-9))
def test_spectral_profile_is_unit_norm(tau):
    pulse = PulseSpec("seed", LAMBDA_S, tau, 1.0)
    w = pulse.omega0 + np.linspace(-12, 12, 4001) / tau
    val = np.trapezoid(np.abs(spectral_profile(pulse, w)) ** 2, w)
    assert val == pytest.approx(1.0, rel=1e-10)


def test_photon_number_and_amplitude():
    pulse = PulseSpec("pump", 532e-9, 10e-12, 1e4)
    e_photon = 6.62607015e-34 * c / 532e-9
    assert pulse.photon_number == pytest.approx(1e4 * 10e-12 / e_photon, rel=1e-12)
    assert pulse.amplitude**2 == pytest.approx(pulse.photon_number)


@pytest.mark.parametrize("kw", [{"role": "idler"}, {"duration": 0.0}, {"power": -1.0}, {"wavelength": 0.0}])
def test_pulse_validation(kw):
    args = {"role": "seed", "wavelength": LAMBDA_S, "duration": 1e-9, "power": 1.0} | kw
    with pytest.raises(ValueError):
        PulseSpec(**args)


@given(tau_s=st.floats(2e-13, 2e-11), tau_p=st.floats(2e-13, 2e-11), det=st.floats(-2.0, 2.0))
def test_gaussian_overlap_matches_quadrature(tau_s, tau_p, det):
    seed = PulseSpec("seed", LAMBDA_S, tau_s, 1.0)
    pump = PulseSpec("pump", 532e-9, tau_p, 1.0)
    shift = det / np.hypot(tau_s, tau_p) * np.sqrt(2) * np.hypot(1 / tau_s, 1 / tau_p) * tau_s * tau_p
    sigma = pump.omega0 - seed.omega0 + shift
    width = 10 / min(tau_s, tau_p)
    f = lambda x: spectral_profile(seed, seed.omega0 + x) * spectral_profile(pump, seed.omega0 + x + sigma)
    ref = quad(f, -width, width, points=[0.0, -shift], limit=400, epsabs=0)[0]
    assert gaussian_overlap(tau_s, tau_p, shift) == pytest.approx(ref, rel=1e-7, abs=1e-12)


@given(dk=st.floats(-5e3, 5e3), length=st.floats(1e-3, 5e-2))
def test_phasematch_factor_is_fourier_transform_of_top_hat(dk, length):
    re = quad(lambda z: np.cos(dk * z), -length / 2, length / 2, limit=200)[0]
    im = quad(lambda z: np.sin(dk * z), -length / 2, length / 2, limit=200)[0]
    assert abs(im) < 1e-12 * length
    assert phasematch_factor(dk, length) == pytest.approx(re, rel=1e-8, abs=1e-12 * length)


def test_phasematch_factor_limits():
    assert phasematch_factor(0.0, 0.01) == 0.01
    assert abs(phasematch_factor(2 * np.pi / 0.01, 0.01)) < 1e-15


class _LinearBranch:
    """k = n w / c with a constant index: no dispersion at all."""

    def __init__(self, n):
        self.n = n

    def k(self, w):
        return self.n * np.asarray(w) / c


def test_mismatch_vanishes_without_dispersion():
    br = _LinearBranch(1.2)
    w1 = OMEGA_S + np.linspace(-1e13, 1e13, 5)
    w2 = OMEGA_S - 0.3e13
    dk = phase_mismatch(w1, w2, OMEGA_S, w1 + w2 + OMEGA_S, br, br)
    assert np.max(np.abs(dk)) < 1e-9 * br.k(OMEGA_S)


def test_mismatch_is_quadratic_in_detuning(fiber):
    seed = DispersionBranch(fiber, HE11, 0.97 * OMEGA_S, 1.03 * OMEGA_S, nodes=64)
    pump = DispersionBranch(fiber, HE12, 0.997 * OMEGA_P, 1.003 * OMEGA_P, nodes=64)
    beta2 = dispersion_at(fiber, HE11, OMEGA_S).beta2
    d = 2 * np.pi * 0.2e12
    # pair symmetric about the seed: the pump frequency is unchanged
    dk = phase_mismatch(OMEGA_S + d, OMEGA_S - d, OMEGA_S, 3 * OMEGA_S, seed, pump)
    dk0 = phase_mismatch(OMEGA_S, OMEGA_S, OMEGA_S, 3 * OMEGA_S, seed, pump)
    assert dk - dk0 == pytest.approx(-beta2 * d * d, rel=0.05)


# ---------------------------------------------------------------- closed form


def test_closed_form_constant_from_sinc_integral():
    # the 4/3 in the rate comes from ∫ sinc^2(u^2) du = 4 sqrt(pi) / 3
    # with t = u^2 the integral becomes ∫_0^inf sin^2(t) t^(-5/2) dt
    mp.mp.dps = 30
    f = lambda t: mp.sin(t) ** 2 * t ** mp.mpf(-2.5)
    val = mp.quad(f, [0, 1]) + mp.quadosc(f, [1, mp.inf], period=mp.pi)
    assert float(val) == pytest.approx(4 * np.sqrt(np.pi) / 3, rel=1e-6)


@given(
    gamma=st.floats(1e-3, 1.0),
    length=st.floats(1e-3, 0.1),
    beta2=st.floats(1e-26, 1e-23),
    pp=st.floats(1.0, 1e5),
    ps=st.floats(1e-3, 10.0),
)
def test_closed_form_scaling(gamma, length, beta2, pp, ps):
    f = lambda **kw: pair_probability_closed_form(
        kw.get("g", gamma), kw.get("L", length), 1e-9, 1e-11, kw.get("b", beta2), kw.get("pp", pp), kw.get("ps", ps)
    )
    base = f()
    assert f(g=2 * gamma) == pytest.approx(4 * base, rel=1e-12)
    assert f(L=4 * length) == pytest.approx(8 * base, rel=1e-12)
    assert f(b=4 * beta2) == pytest.approx(base / 2, rel=1e-12)
    assert f(b=-beta2) == pytest.approx(base, rel=1e-15)
    assert f(pp=2 * pp) == pytest.approx(2 * base, rel=1e-12)
    assert f(ps=2 * ps) == pytest.approx(2 * base, rel=1e-12)


def test_closed_form_edge_cases():
    assert pair_probability_closed_form(0.02, 0.01, 1e-9, 1e-11, 2e-24, 1e4, 0.0) == 0.0
    with pytest.raises(DomainError):
        pair_probability_closed_form(0.02, 0.01, 1e-9, 1e-11, 0.0, 1e4, 1.0)
    with pytest.raises(ValueError):
        pair_probability_closed_form(0.02, -0.01, 1e-9, 1e-11, 2e-24, 1e4, 1.0)


def test_g2_from_schmidt_number():
    assert g2_zero(106.3) == pytest.approx(1.0094, abs=5e-5)
    assert g2_zero(66.9) == pytest.approx(1.0149, abs=5e-5)
    assert g2_zero(1.0) == 2.0
    with pytest.raises(ValueError):
        g2_zero(0.5)


# ---------------------------------------------------------------- grid metrics


def test_toy_grid_matches_hand_sum():
    w = np.array([-1.0, 0.0, 1.0])
    wts1 = np.array([0.5, 1.0, 0.5])
    wts2 = np.array([1.0, 2.0, 1.0])
    amp = np.array([[1, 2j, 0], [1, 1, 1], [0, -1, 3]], dtype=complex)
    grid = jsa_from_amplitude(w, w, wts1, wts2, amp)
    hand = 0.5 * (1 * 1 + 4 * 2 + 0) + 1.0 * (1 + 2 + 1) + 0.5 * (0 + 1 * 2 + 9 * 1)
    assert grid.eta2 == pytest.approx(hand, rel=1e-15)
    assert grid.norm() == pytest.approx(1.0, rel=1e-15)
    assert np.allclose(grid.amplitude * np.sqrt(hand), amp)


def _gauss_grid(n=256, span=8.0):
    x = np.linspace(-span, span, n)
    wts = np.full(n, x[1] - x[0])
    return x, wts


@given(sig1=st.floats(0.3, 2.0), sig2=st.floats(0.3, 2.0), x0=st.floats(-1.0, 1.0))
def test_separable_state_has_unit_schmidt_number(sig1, sig2, x0):
    x, wts = _gauss_grid()
    f = np.exp(-((x - x0) ** 2) / (2 * sig1**2))
    g = np.exp(-(x**2) / (2 * sig2**2)) * np.exp(1j * x)
    grid = jsa_from_amplitude(x, x, wts, wts, np.outer(f, g))
    assert schmidt_number(grid) == pytest.approx(1.0, abs=1e-9)


@given(theta=st.floats(0.0, 2 * np.pi))
def test_two_term_state(theta):
    x, wts = _gauss_grid()
    h0 = np.exp(-(x**2) / 2)
    h1 = x * np.exp(-(x**2) / 2)
    amp = np.outer(h0, h0) / np.sqrt(wts @ h0**2) ** 2 + np.exp(1j * theta) * np.outer(h1, h1) / np.sqrt(wts @ h1**2) ** 2
    grid = jsa_from_amplitude(x, x, wts, wts, amp)
    assert schmidt_number(grid) == pytest.approx(2.0, abs=1e-6)


def test_schmidt_requires_normalised_grid():
    x, wts = _gauss_grid(64)
    grid = jsa_from_amplitude(x, x, wts, wts, np.outer(np.exp(-(x**2)), np.exp(-(x**2))))
    grid.amplitude = 2 * grid.amplitude
    with pytest.raises(ContractError):
        schmidt_number(grid)


def test_bandwidth_of_gaussian_marginal():
    x, wts = _gauss_grid(2001, 10.0)
    sigma = 1.3
    amp = np.outer(np.exp(-(x**2) / (4 * sigma**2)), np.exp(-(x**2) / 8))
    grid = jsa_from_amplitude(2 * np.pi * x, x, 2 * np.pi * wts, wts, amp)
    # |f|^2 is a Gaussian of standard deviation sigma in x = omega / 2 pi
    assert generation_bandwidth(grid) == pytest.approx(2 * np.sqrt(2 * np.log(2)) * sigma, rel=1e-4)


def test_bandwidth_detects_truncation():
    x, wts = _gauss_grid(128, 1.0)
    grid = jsa_from_amplitude(x, x, wts, wts, np.outer(np.exp(-(x**2) / 50), np.ones_like(x)))
    with pytest.raises(GridTruncationError):
        generation_bandwidth(grid)


def test_pair_metrics_bundle():
    x, wts = _gauss_grid()
    grid = jsa_from_amplitude(x, x, wts, wts, np.outer(np.exp(-(x**2)), np.exp(-(x**2))))
    m = pair_metrics(grid)
    assert m.schmidt_number == pytest.approx(1.0)
    assert m.g2 == pytest.approx(2.0)
    assert m.bandwidth_thz == pytest.approx(m.bandwidth * 1e-12)


# ---------------------------------------------------------------- full calculation (coarse grid)


def test_grid_offsets_symmetric():
    g = GridSpec(points=128)
    off = g.offsets()
    assert np.allclose(off, -off[::-1], rtol=0, atol=1e-6 * g.step)
    assert off[1] - off[0] == pytest.approx(g.step)


def test_coarse_jsa_normalised_and_symmetric(coarse_result):
    grid, metrics = coarse_result
    assert grid.norm() == pytest.approx(1.0, abs=1e-6)
    amp = grid.amplitude
    assert np.max(np.abs(amp - amp.T)) < 1e-10 * np.max(np.abs(amp))
    assert metrics.schmidt_number > 1
    assert metrics.g2 == pytest.approx(1 + 1 / metrics.schmidt_number)
    assert grid.info["seed_integral"] == "frozen"
    assert grid.info["seed_integral_check"] < 1e-4


@pytest.mark.parametrize("which", ["seed", "pump"])
def test_pair_probability_linear_in_power(coarse_cfg, coarse_result, which):
    pulse = getattr(coarse_cfg, which)
    doubled = coarse_cfg.replace(**{which: PulseSpec(pulse.role, pulse.wavelength, pulse.duration, 2 * pulse.power)})
    grid, _ = compute_jsa(doubled)
    assert grid.eta2 / coarse_result[0].eta2 == pytest.approx(2.0, rel=5e-3)
    assert np.allclose(grid.amplitude, coarse_result[0].amplitude, rtol=0, atol=1e-12 * np.abs(grid.amplitude).max())


def test_zero_seed_gives_no_pairs(coarse_cfg):
    cfg = coarse_cfg.replace(seed=PulseSpec("seed", LAMBDA_S, 1e-9, 0.0))
    grid, metrics = compute_jsa(cfg)
    assert grid.eta2 == 0.0 and metrics is None
    assert not np.any(grid.amplitude)


def test_thread_count_does_not_change_result(coarse_cfg, coarse_result):
    grid, _ = compute_jsa(coarse_cfg, threads=3)
    assert np.array_equal(grid.amplitude, coarse_result[0].amplitude)
    assert grid.eta2 == coarse_result[0].eta2


def test_frozen_factors_close_to_full(coarse_cfg, coarse_result):
    grid, _ = compute_jsa(coarse_cfg.replace(frozen_factors=True))
    assert grid.eta2 == pytest.approx(coarse_result[0].eta2, rel=0.01)


def test_seed_quadrature_agrees_with_analytic_overlap(coarse_cfg, coarse_result):
    grid, metrics = compute_jsa(coarse_cfg.replace(seed_integral="quadrature", frozen_factors=True))
    frozen, fm = compute_jsa(coarse_cfg.replace(seed_integral="frozen", frozen_factors=True))
    assert grid.info["seed_integral"] == "quadrature"
    assert grid.eta2 == pytest.approx(frozen.eta2, rel=1e-3)
    assert metrics.schmidt_number == pytest.approx(fm.schmidt_number, rel=1e-3)


def test_coarse_grid_refinement(fiber, coarse_result):
    finer = coarse_config(fiber, grid=GridSpec(points=512, area_grid_points=128, area_subgrid=4, dispersion_nodes=64))
    grid, metrics = compute_jsa(finer)
    assert grid.eta2 == pytest.approx(coarse_result[0].eta2, rel=0.01)
    assert metrics.schmidt_number == pytest.approx(coarse_result[1].schmidt_number, rel=0.02)


def test_under_resolved_grid_is_refused(fiber):
    cfg = coarse_config(fiber, pump=PulseSpec("pump", 532e-9, 10e-12, 1e4))
    assert sum_frequency_aliasing(cfg.grid.step, 1e-9, 10e-12) > 1e-2
    with pytest.raises(GridResolutionError, match="points"):
        compute_jsa(cfg)


def test_aliasing_estimate_matches_poisson_sum():
    # midpoint sum of exp(-(tau_eff x)^2) against its integral; a very long
    # seed makes tau_eff equal to the pump duration
    tau = 1.0
    for h in (1.0, 1.5, 2.0):
        x = h * (np.arange(-200, 200) + 0.5)
        ratio = h * np.sum(np.exp(-(tau * x) ** 2)) / np.sqrt(np.pi)
        assert abs(ratio - 1) == pytest.approx(sum_frequency_aliasing(h, 1e9, tau), rel=1e-2)


def test_truncated_span_is_refused(fiber):
    cfg = coarse_config(fiber, grid=GridSpec(points=128, half_span=2 * np.pi * 1.5e12, area_grid_points=128, area_subgrid=4, dispersion_nodes=64))
    with pytest.raises(GridTruncationError, match="half-span"):
        compute_jsa(cfg)


def test_first_order_guards(coarse_cfg, coarse_result):
    scale = 0.3 / coarse_result[0].eta2
    pump = coarse_cfg.pump
    strong = coarse_cfg.replace(pump=PulseSpec("pump", pump.wavelength, pump.duration, pump.power * scale))
    with pytest.warns(FirstOrderWarning):
        compute_jsa(strong)
    too_strong = coarse_cfg.replace(pump=PulseSpec("pump", pump.wavelength, pump.duration, pump.power * 2.2 * scale))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FirstOrderWarning)
        with pytest.raises(FirstOrderValidityError):
            compute_jsa(too_strong)


def test_experiment_validation(fiber, coarse_cfg):
    with pytest.raises(ValueError):
        coarse_cfg.replace(length=0.0)
    with pytest.raises(ValueError):
        coarse_cfg.replace(pump_orientation="diagonal")
    with pytest.raises(ValueError):
        coarse_cfg.replace(seed_integral="magic")
    with pytest.raises(ValueError):
        GridSpec(points=16)
