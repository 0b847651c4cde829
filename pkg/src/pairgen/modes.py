"""Exact vector modes of a circular step-index waveguide.

The core (radius ``a``) follows a Sellmeier model and the cladding has a
constant index, air by default.  Propagation constants come from the full
hybrid-mode eigenvalue equation, written without poles as

    G(U) = J'_nu(U)/U - J_nu(U) R(U, W)

where ``R`` is the root of the quadratic in ``J'_nu/(U J_nu)`` selected by the
mode family (HE/EH), reducing to the TE/TM equations for ``nu = 0``.
Transverse fields are rebuilt from the longitudinal components by solving the
4x4 boundary-matching system at ``r = a``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.constants import c, epsilon_0
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import jv, jvp, jn_zeros, kv, kvp

from .errors import (
    ContractError,
    DegenerateBracketError,
    DomainError,
    NoPhasematchError,
    NotGuidedError,
    RootBracketError,
    StencilCutoffError,
)
from .material import FUSED_SILICA_MALITSON, SellmeierModel, refractive_index

__all__ = [
    "ModeId",
    "FiberSpec",
    "GuidedMode",
    "ModeDispersion",
    "DispersionBranch",
    "HE11",
    "HE12",
    "characteristic",
    "characteristic_residual",
    "cutoff_v",
    "solve_neff",
    "mode_fields",
    "dispersion_at",
    "find_phasematch_diameter",
    "clear_cache",
]

_FAMILIES = ("HE", "EH", "TE", "TM")
MIN_SCAN_POINTS = 400
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class ModeId:
    family: str
    azimuthal_order: int
    radial_order: int

    def __post_init__(self):
        fam = self.family.upper()
        object.__setattr__(self, "family", fam)
        if fam not in _FAMILIES:
            raise ValueError(f"unknown mode family {self.family!r}")
        if self.radial_order < 1:
            raise ValueError("radial order must be >= 1")
        if fam in ("HE", "EH") and self.azimuthal_order < 1:
            raise ValueError(f"{fam} modes need azimuthal order >= 1")
        if fam in ("TE", "TM") and self.azimuthal_order != 0:
            raise ValueError(f"{fam} modes have azimuthal order 0")

    @classmethod
    def parse(cls, label: str) -> "ModeId":
        """Parse ``"HE11"``, ``"TE01"`` or ``"HE1,2"`` style labels."""
        label = label.strip().replace("_", "")
        fam, rest = label[:2], label[2:]
        if "," in rest:
            nu, m = rest.split(",")
        elif len(rest) == 2:
            nu, m = rest[0], rest[1]
        else:
            raise ValueError(f"ambiguous mode label {label!r}; use e.g. 'HE1,12'")
        return cls(fam, int(nu), int(m))

    @property
    def label(self) -> str:
        if self.azimuthal_order < 10 and self.radial_order < 10:
            return f"{self.family}{self.azimuthal_order}{self.radial_order}"
        return f"{self.family}{self.azimuthal_order},{self.radial_order}"

    def __str__(self):
        return self.label


HE11 = ModeId("HE", 1, 1)
HE12 = ModeId("HE", 1, 2)


@dataclass(frozen=True)
class FiberSpec:
    diameter: float
    core: SellmeierModel = FUSED_SILICA_MALITSON
    cladding_index: float = 1.0

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError("fiber diameter must be positive")
        if self.cladding_index < 1.0:
            raise ValueError("cladding index must be >= 1")

    @property
    def radius(self) -> float:
        return self.diameter / 2

    def core_index(self, omega):
        return refractive_index(self.core, 2 * np.pi * c / np.asarray(omega, dtype=float))

    def v_number(self, omega) -> float:
        n1 = self.core_index(omega)
        if n1 <= self.cladding_index:
            raise ContractError(
                f"core index {n1:.6f} <= cladding index {self.cladding_index}: not guiding"
            )
        return omega / c * self.radius * np.sqrt(n1 * n1 - self.cladding_index**2)


# --------------------------------------------------------------------------
# eigenvalue equation


def _r_branch(family, nu, U, W, r):
    """The root ``R`` with ``J'/(U J) = R`` for the given family."""
    kh = kvp(nu, W) / (W * kv(nu, W))
    if family == "TE":
        return -kh
    if family == "TM":
        return -r * kh
    rad = np.sqrt(((1 - r) / 2 * kh) ** 2 + nu * nu * (1 / U**2 + 1 / W**2) * (1 / U**2 + r / W**2))
    base = -(1 + r) / 2 * kh
    if family == "EH":
        return base + rad
    # HE: base - rad loses ~1/W^2 digits near the cladding line.  Use
    # (base^2 - rad^2)/(base + rad) with K'_nu = -K_{nu-1} - nu K_nu / W,
    # i.e. kh = delta - nu/W^2, so the 1/W^4 terms cancel analytically.
    delta = -kv(nu - 1, W) / (W * kv(nu, W))
    num = r * delta**2 - 2 * r * nu * delta / W**2 - nu**2 / U**4 - nu**2 * (1 + r) / (U**2 * W**2)
    return num / (base + rad)


def _g_terms(family, nu, U, W, r):
    a = jvp(nu, U) / U
    b = jv(nu, U) * _r_branch(family, nu, U, W, r)
    return a, b


def _uw(fiber, omega, neff):
    n1 = fiber.core_index(omega)
    n2 = fiber.cladding_index
    ak = fiber.radius * omega / c
    neff = np.asarray(neff, dtype=float)
    U = ak * np.sqrt(n1 * n1 - neff * neff)
    W = ak * np.sqrt(neff * neff - n2 * n2)
    return U, W, n1, n2


def characteristic(fiber: FiberSpec, mode: ModeId, omega: float, neff):
    """Pole-free eigenvalue function; zero at guided-mode effective indices."""
    U, W, n1, n2 = _uw(fiber, omega, neff)
    a, b = _g_terms(mode.family, mode.azimuthal_order, U, W, (n2 / n1) ** 2)
    return a - b


def characteristic_residual(fiber: FiberSpec, mode: ModeId, omega: float, neff: float) -> float:
    """Eigenvalue residual normalised by the magnitude of its two terms."""
    U, W, n1, n2 = _uw(fiber, omega, neff)
    a, b = _g_terms(mode.family, mode.azimuthal_order, U, W, (n2 / n1) ** 2)
    return float(abs(a - b) / (abs(a) + abs(b)))


def _g_of_u(U, family, nu, V, r):
    W = np.sqrt(V * V - U * U)
    a, b = _g_terms(family, nu, U, W, r)
    return a - b


def cutoff_v(mode: ModeId, n1: float, n2: float = 1.0) -> float:
    """V-number at which ``mode`` stops being guided."""
    nu, m = mode.azimuthal_order, mode.radial_order
    if mode.family in ("TE", "TM"):
        return float(jn_zeros(0, m)[-1])
    if mode.family == "EH":
        return float(jn_zeros(nu, m)[-1])
    if nu == 1:
        return 0.0 if m == 1 else float(jn_zeros(1, m - 1)[-1])
    # HE_{nu m}, nu >= 2: (n1^2/n2^2 + 1) J_{nu-1}(V) = V J_nu(V) / (nu - 1)
    f = lambda v: (n1**2 / n2**2 + 1) * jv(nu - 1, v) - v * jv(nu, v) / (nu - 1)
    grid = np.linspace(1e-3, jn_zeros(nu, m + 1)[-1] + 5, 4000)
    vals = f(grid)
    roots = [
        brentq(f, grid[i], grid[i + 1])
        for i in range(len(grid) - 1)
        if np.sign(vals[i]) != np.sign(vals[i + 1])
    ]
    return float(roots[m - 1])


def _g_of_w(W, family, nu, V, r):
    U = np.sqrt(V * V - W * W)
    a, b = _g_terms(family, nu, U, W, r)
    return a - b


def _uw_roots(fiber: FiberSpec, family: str, nu: int, omega: float):
    """Roots of the eigenvalue function as ``(U, W)`` pairs, ascending in ``U``."""
    V = fiber.v_number(omega)
    n1 = fiber.core_index(omega)
    r = (fiber.cladding_index / n1) ** 2
    npts = max(MIN_SCAN_POINTS, int(20 * V))
    # Uniform in U: roots are roughly pi apart, so this cannot skip pairs.
    # Near cutoff the root crowds the cladding line (W -> 0); a geometric
    # grid in W covers that side.  Points are kept as exact (U, W) pairs
    # because U alone cannot resolve a small W = sqrt(V^2 - U^2).
    U_core = V * (np.arange(npts) + 0.5) / npts
    U_core = U_core[U_core * U_core < 0.5 * V * V]
    W_side = np.geomspace(1e-15 * V, V / np.sqrt(2), npts // 2 + 120)[::-1]
    U = np.concatenate([U_core, np.sqrt(V * V - W_side**2)])
    W = np.concatenate([np.sqrt(V * V - U_core**2), W_side])
    with np.errstate(all="ignore"):
        g = np.subtract(*_g_terms(family, nu, U, W, r))
    kw = dict(args=(family, nu, V, r), xtol=1e-300, rtol=1e-15, maxiter=200)
    roots = []
    for i in range(len(U) - 1):
        g0, g1 = g[i], g[i + 1]
        if not (np.isfinite(g0) and np.isfinite(g1)) or np.sign(g0) == np.sign(g1):
            continue
        if i + 1 < len(U_core):
            u = brentq(_g_of_u, U[i], U[i + 1], **kw)
            roots.append((u, float(np.sqrt(V * V - u * u))))
        else:
            # on the cladding side W is the well-conditioned unknown
            w = brentq(_g_of_w, W[i + 1], W[i], **kw)
            roots.append((float(np.sqrt(V * V - w * w)), w))
    return roots, V, r


def _uw_residual(u, w, family, nu, r):
    a, b = _g_terms(family, nu, u, w, r)
    return float(abs(a - b) / (abs(a) + abs(b)))


def _neff_from_uw(fiber, omega, u, w):
    ak = fiber.radius * omega / c
    n1, n2 = fiber.core_index(omega), fiber.cladding_index
    # take the better-conditioned side of n1^2 - (U/ak)^2 = n2^2 + (W/ak)^2
    if u < w:
        return float(np.sqrt(n1 * n1 - (u / ak) ** 2))
    return float(np.sqrt(n2 * n2 + (w / ak) ** 2))


def guided_roots(fiber: FiberSpec, family: str, nu: int, omega: float) -> list[float]:
    """All effective indices of one family/azimuthal order, highest first."""
    roots, _, _ = _uw_roots(fiber, family, nu, omega)
    return [_neff_from_uw(fiber, omega, u, w) for u, w in roots]


_cache: dict = {}
_cache_lock = threading.Lock()


def clear_cache():
    with _cache_lock:
        _cache.clear()


def solve_neff(fiber: FiberSpec, mode: ModeId, omega: float) -> float:
    """Effective index of ``mode`` at angular frequency ``omega``.

    Raises NotGuidedError below cutoff.
    """
    key = (fiber, mode, float(omega))
    hit = _cache.get(key)
    if hit is not None:
        return hit
    roots, V, r = _uw_roots(fiber, mode.family, mode.azimuthal_order, omega)
    if len(roots) < mode.radial_order:
        vc = cutoff_v(mode, fiber.core_index(omega), fiber.cladding_index)
        if V <= vc:
            raise NotGuidedError(
                f"{mode} not guided: V = {V:.6g} below cutoff V = {vc:.6g}", v_number=V, cutoff_v=vc
            )
        raise RootBracketError(
            f"{mode}: found {len(roots)} roots at V = {V:.6g} (cutoff {vc:.6g}); "
            f"root may sit too close to the cladding line to bracket"
        )
    u, w = roots[mode.radial_order - 1]
    # judged on the (U, W) pair the root is found in: close to the cladding
    # line n_eff itself cannot resolve W to this precision
    res = _uw_residual(u, w, mode.family, mode.azimuthal_order, r)
    if res > RESIDUAL_TOL:
        raise RootBracketError(f"{mode}: residual {res:.3g} at U = {u!r}, W = {w!r}")
    neff = _neff_from_uw(fiber, omega, u, w)
    if not neff > fiber.cladding_index:
        raise RootBracketError(
            f"{mode}: n_eff - n_clad below double precision at V = {V:.6g}; the mode is essentially unconfined"
        )
    with _cache_lock:
        _cache.setdefault(key, neff)
    return neff


# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class GuidedMode:
    """A solved mode with its transverse displacement profile.

    ``field(x, y)`` returns the complex 3-vector ``d`` normalised so that
    ``integral d*.d / (eps0 n^2) dA = 1``.  Transverse components are real,
    the longitudinal one is imaginary.
    """

    fiber: FiberSpec
    mode: ModeId
    omega: float
    n_eff: float
    orientation: str
    coeffs: tuple  # (A, B, C, D): Ez/hz amplitudes in core and cladding
    normalized: bool = True

    @property
    def beta(self) -> float:
        return self.n_eff * self.omega / c

    @cached_property
    def core_index(self) -> float:
        return self.fiber.core_index(self.omega)

    @cached_property
    def _radial_constants(self):
        k0 = self.omega / c
        a = self.fiber.radius
        kc = k0 * np.sqrt(self.core_index**2 - self.n_eff**2)
        gc = k0 * np.sqrt(self.n_eff**2 - self.fiber.cladding_index**2)
        return k0, a, kc, gc

    def radial_components(self, r):
        """Radial parts ``(E_r, E_phi, E_z)`` before the angular factors."""
        k0, a, kc, gc = self._radial_constants
        nu = self.mode.azimuthal_order
        A, B, C, D = self.coeffs
        beta = self.beta
        r = np.asarray(r, dtype=float)
        rr = np.where(r == 0, 1e-12 * a, r)
        core = rr < a
        Z = np.where(core, jv(nu, kc * rr), kv(nu, gc * np.maximum(rr, a)))
        Zp = np.where(core, kc * jvp(nu, kc * rr), gc * kvp(nu, gc * np.maximum(rr, a)))
        kap2 = np.where(core, kc * kc, -gc * gc)
        ea = np.where(core, A, C)
        hb = np.where(core, B, D)
        # -i phase makes the transverse parts real
        er = (beta * ea * Zp + k0 * nu * hb * Z / rr) / kap2
        ep = (-beta * nu * ea * Z / rr - k0 * hb * Zp) / kap2
        ez = -1j * ea * Z
        return er, ep, ez

    def _angles(self, phi):
        nu = self.mode.azimuthal_order
        if nu == 0:
            return np.ones_like(phi), np.ones_like(phi)
        shift = 0.0 if self.orientation == "even" else np.pi / (2 * nu)
        return np.cos(nu * (phi - shift)), np.sin(nu * (phi - shift))

    def electric(self, x, y):
        """Electric field ``(E_x, E_y, E_z)`` in the normalised units."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        phi = np.arctan2(y, x)
        er, ep, ez = self.radial_components(r)
        fc, fs = self._angles(phi)
        nu = self.mode.azimuthal_order
        if nu == 0:
            # TE: only E_phi, TM: E_r and E_z
            Er, Ep, Ez = er * fc, ep * fs, ez * fc
        else:
            Er, Ep, Ez = er * fc, ep * fs, ez * fc
        cp, sp = np.cos(phi), np.sin(phi)
        Ex = Er * cp - Ep * sp
        Ey = Er * sp + Ep * cp
        return np.stack([Ex.astype(complex), Ey.astype(complex), Ez])

    def index(self, x, y):
        r = np.hypot(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.where(r < self.fiber.radius, self.core_index, self.fiber.cladding_index)

    def field(self, x, y):
        """Displacement field ``d = eps0 n^2 E``."""
        n = self.index(x, y)
        return epsilon_0 * n * n * self.electric(x, y)

    def normalization_integral(self) -> float:
        """``integral eps0 n^2 |E|^2 dA`` by radial quadrature (angles exact)."""
        return _norm_integral(self)

    def decay_radius(self, tol: float = 1e-6) -> float:
        """Smallest radius beyond which |E| stays below ``tol`` times its peak."""
        a = self.fiber.radius
        r = np.linspace(0, a, 200)
        peak = np.max(np.abs(np.stack(self.radial_components(r))))
        R = 3 * a
        while True:
            tail = np.abs(np.stack(self.radial_components(np.array([R]))))
            if np.max(tail) < tol * peak:
                return R
            R *= 1.25


def _norm_integral(gm: GuidedMode) -> float:
    nu = gm.mode.azimuthal_order
    ang = 2 * np.pi if nu == 0 else np.pi
    a = gm.fiber.radius

    def integrand(r):
        er, ep, ez = gm.radial_components(np.array([r]))
        return r * (abs(er[0]) ** 2 + abs(ep[0]) ** 2 + abs(ez[0]) ** 2)

    inner = quad(integrand, 0, a, epsabs=0, epsrel=1e-12, limit=200)[0]
    # K_nu(gamma r)^2 falls like exp(-2 gamma r): 40 decay lengths reach 1e-35
    gc = gm._radial_constants[3]
    edges = a + np.array([0, 1, 3, 8, 20, 40]) / gc
    outer = sum(
        quad(integrand, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0] for lo, hi in zip(edges, edges[1:])
    )
    n1, n2 = gm.core_index, gm.fiber.cladding_index
    return epsilon_0 * ang * (n1 * n1 * inner + n2 * n2 * outer)


def _boundary_matrix(fiber, mode, omega, neff):
    nu = mode.azimuthal_order
    k0 = omega / c
    a = fiber.radius
    n1 = fiber.core_index(omega)
    n2 = fiber.cladding_index
    beta = k0 * neff
    kc = k0 * np.sqrt(n1 * n1 - neff * neff)
    gc = k0 * np.sqrt(neff * neff - n2 * n2)
    J, Jp = jv(nu, kc * a), jvp(nu, kc * a)
    K, Kp = kv(nu, gc * a), kvp(nu, gc * a)
    c1, c2 = 1 / kc**2, -1 / gc**2
    # rows: E_z, h_z, E_phi, h_phi continuity (common factor i dropped)
    return np.array(
        [
            [J, 0.0, -K, 0.0],
            [0.0, J, 0.0, -K],
            [c1 * (-beta * nu * J / a), c1 * (-k0 * kc * Jp), -c2 * (-beta * nu * K / a), -c2 * (-k0 * gc * Kp)],
            [c1 * (k0 * n1 * n1 * kc * Jp), c1 * (beta * nu * J / a), -c2 * (k0 * n2 * n2 * gc * Kp), -c2 * (beta * nu * K / a)],
        ]
    )


def mode_fields(fiber: FiberSpec, mode: ModeId, omega: float, orientation: str = "even") -> GuidedMode:
    """Solve ``mode`` and return its normalised vector field profile."""
    if orientation not in ("even", "odd"):
        raise ValueError("orientation must be 'even' or 'odd'")
    neff = solve_neff(fiber, mode, omega)
    M = _boundary_matrix(fiber, mode, omega, neff)
    _, _, vh = np.linalg.svd(M)
    vec = vh[-1]
    if mode.family == "TE":
        vec = np.array([0.0, vec[1], 0.0, vec[3]])
    elif mode.family == "TM":
        vec = np.array([vec[0], 0.0, vec[2], 0.0])
    # fixed sign keeps field phase continuous along a branch
    ref = vec[0] if abs(vec[0]) > 1e-8 * np.max(np.abs(vec)) else vec[1]
    vec = vec * np.sign(ref)
    gm = GuidedMode(fiber, mode, float(omega), neff, orientation, tuple(vec))
    scale = 1 / np.sqrt(_norm_integral(gm))
    return GuidedMode(fiber, mode, float(omega), neff, orientation, tuple(vec * scale))


# --------------------------------------------------------------------------
# dispersion


@dataclass(frozen=True)
class ModeDispersion:
    mode: ModeId
    omega0: float
    n_eff: float
    n_g: float
    v_g: float
    beta2: float  # s^2/m

    @property
    def beta2_ps2_per_km(self) -> float:
        return self.beta2 * 1e27


_STENCIL = np.array([-2, -1, 0, 1, 2])


def dispersion_at(fiber: FiberSpec, mode: ModeId, omega: float, rel_step: float = 1e-4) -> ModeDispersion:
    """Group index and GVD from 5-point central differences of ``n_eff(omega)``."""
    h = rel_step * omega
    try:
        n = np.array([solve_neff(fiber, mode, omega + k * h) for k in _STENCIL])
    except NotGuidedError as exc:
        raise StencilCutoffError(
            f"stencil around {omega:.6g} rad/s crosses the {mode} cutoff",
            v_number=exc.v_number,
            cutoff_v=exc.cutoff_v,
        ) from exc
    d1 = (n[0] - 8 * n[1] + 8 * n[3] - n[4]) / (12 * h)
    d2 = (-n[0] + 16 * n[1] - 30 * n[2] + 16 * n[3] - n[4]) / (12 * h * h)
    ng = n[2] + omega * d1
    beta2 = (2 * d1 + omega * d2) / c
    return ModeDispersion(mode, float(omega), float(n[2]), float(ng), float(c / ng), float(beta2))


class DispersionBranch:
    """Cubic-spline table of ``n_eff(omega)`` along one mode branch.

    ``beta2_offset`` adds ``beta2_offset/2 (omega - omega_ref)^2`` to the
    propagation constant, a controlled way to rescale GVD.
    """

    def __init__(self, fiber, mode, omega_min, omega_max, nodes=129, beta2_offset=0.0, omega_ref=None):
        if nodes < 64:
            raise ValueError("dispersion tables need at least 64 nodes")
        if not omega_max > omega_min:
            raise ValueError("empty frequency range")
        self.fiber = fiber
        self.mode = mode
        self.omega_min = float(omega_min)
        self.omega_max = float(omega_max)
        self.beta2_offset = float(beta2_offset)
        self.omega_ref = float(omega_ref if omega_ref is not None else 0.5 * (omega_min + omega_max))
        self.nodes = np.linspace(omega_min, omega_max, nodes)
        self.neff_nodes = np.array([solve_neff(fiber, mode, w) for w in self.nodes])
        self._spline = CubicSpline(self.nodes, self.neff_nodes)
        self._dspline = self._spline.derivative()

    def _check(self, omega):
        omega = np.asarray(omega, dtype=float)
        span = self.omega_max - self.omega_min
        if np.any(omega < self.omega_min - 1e-12 * span) or np.any(omega > self.omega_max + 1e-12 * span):
            raise DomainError(
                f"frequency outside dispersion table [{self.omega_min:.6g}, {self.omega_max:.6g}] rad/s"
            )
        return omega

    def n_eff(self, omega):
        return self._spline(self._check(omega))

    def k(self, omega):
        omega = self._check(omega)
        k = self._spline(omega) * omega / c
        if self.beta2_offset:
            k = k + 0.5 * self.beta2_offset * (omega - self.omega_ref) ** 2
        return k

    def inverse_group_velocity(self, omega):
        omega = self._check(omega)
        k1 = (self._spline(omega) + omega * self._dspline(omega)) / c
        if self.beta2_offset:
            k1 = k1 + self.beta2_offset * (omega - self.omega_ref)
        return k1

    def group_velocity(self, omega):
        return 1.0 / self.inverse_group_velocity(omega)


# --------------------------------------------------------------------------
# phasematching


def _index_mismatch(core, cladding_index, d, omega_p, omega_s, pump_mode, seed_mode):
    fib = FiberSpec(d, core, cladding_index)
    return solve_neff(fib, pump_mode, omega_p) - solve_neff(fib, seed_mode, omega_s)


def find_phasematch_diameter(
    core: SellmeierModel,
    omega_p: float,
    omega_s: float,
    bracket=(0.5e-6, 1.2e-6),
    pump_mode: ModeId = HE12,
    seed_mode: ModeId = HE11,
    cladding_index: float = 1.0,
    scan_points: int = 41,
    tol: float = 1e-9,
) -> float:
    """Diameter where ``n_eff[pump](omega_p) == n_eff[seed](omega_s)``.

    The bracket is scanned first because the pump mode may be cut off at its
    lower end; the first sign change is then refined with Brent's method.
    """
    d_lo, d_hi = bracket
    if not 0 < d_lo < d_hi:
        raise ValueError("bracket must satisfy 0 < d_min < d_max")
    ds = np.linspace(d_lo, d_hi, scan_points)
    dn = []
    for d in ds:
        try:
            dn.append(_index_mismatch(core, cladding_index, d, omega_p, omega_s, pump_mode, seed_mode))
        except (NotGuidedError, RootBracketError):
            dn.append(None)
    valid = [(d, v) for d, v in zip(ds, dn) if v is not None]
    if valid and all(abs(v) < 1e-14 for _, v in valid):
        raise DegenerateBracketError(
            "index mismatch vanishes across the whole bracket; diameter undetermined",
            delta_low=dn[0],
            delta_high=dn[-1],
        )
    for (d0, v0), (d1, v1) in zip(valid, valid[1:]):
        if v0 == 0:
            return float(d0)
        if np.sign(v0) != np.sign(v1):
            f = lambda d: _index_mismatch(core, cladding_index, d, omega_p, omega_s, pump_mode, seed_mode)
            d = brentq(f, d0, d1, xtol=1e-18, rtol=1e-15, maxiter=200)
            if abs(f(d)) >= tol:
                raise RootBracketError(f"phasematch refinement stalled at |dn| = {abs(f(d)):.3g}")
            return float(d)
    raise NoPhasematchError(
        f"no phasematch for {pump_mode}/{seed_mode} in [{d_lo:.4g}, {d_hi:.4g}] m: "
        f"dn(d_min) = {dn[0]}, dn(d_max) = {dn[-1]}",
        delta_low=dn[0],
        delta_high=dn[-1],
    )
