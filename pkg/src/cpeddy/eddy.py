"""Overdamped (eddy-current) modes: branch points, spectra, thermodynamics.

The overdamped continuum lives on the negative imaginary frequency axis
between xi_0(p) and Gamma.  Its mode density, free energy and entropy are
built from Im Delta evaluated right of that cut.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .material import KB, MaterialParams, landau_rates
from .numerics import (DerivResult, QuadSettings, derivative_central,
                       integrate_panels)
from .response import AtomParams, delta_on_cut, delta_static


@dataclass(frozen=True)
class BranchPoint:
    xi0: float          # hbar*xi_0, eV
    p: float            # 1/um
    model: str          # local | nonlocal_parametric | nonlocal_smallGamma


@dataclass(frozen=True)
class SingleMode:
    xi: float           # hbar*xi, eV
    Lambda: float       # cutoff, eV

    def __post_init__(self):
        if not 0.0 < self.xi < self.Lambda:
            raise ValueError("require 0 < xi < Lambda")


# ---------------------------------------------------------------------------
# Branch points
# ---------------------------------------------------------------------------

def branch_point_local(params: MaterialParams, p: float,
                       T: float | None = None) -> BranchPoint:
    """xi_0 = Gamma p^2 lp^2 / (1 + p^2 lp^2)."""
    if p <= 0.0:
        raise ValueError("p must be > 0")
    hg = params.gamma(T)
    if hg <= 0.0:
        raise ValueError("branch point requires Gamma > 0")
    x = (p * params.lambda_p_bar) ** 2
    return BranchPoint(hg * x / (1.0 + x), p, "local")


def s0(x: float, ell_over_lambdap: float) -> float:
    """Real root of s^3 + C s - C = 0 with C = (ell/lp)^2 g_t(x) x^2."""
    if x <= 0.0:
        raise ValueError("x must be > 0")
    r = ell_over_lambdap
    gt = _gt_real(x)
    arg = (3.0 / (2.0 * x)) * (1.0 / r) * math.sqrt(3.0 / gt)
    return 2.0 * x * r * math.sqrt(gt / 3.0) * \
        math.sinh(math.asinh(arg) / 3.0)


def _gt_real(x: float) -> float:
    """g_t on the overdamped axis: (3/2)[(1+x^2) x arccot(x) - x^2]."""
    if x > 100.0:
        ix = 1.0 / (x * x)
        return 1.0 - ix * (1.0 / 5.0 - ix * (3.0 / 35.0 - ix / 21.0))
    return 1.5 * ((1.0 + x * x) * x * math.atan2(1.0, x) - x * x)


def lambda_e_bar(params: MaterialParams, T: float | None = None) -> float:
    """Cutoff wavelength of the overdamped continuum."""
    hg = params.gamma(T)
    if hg <= 0.0:
        raise ValueError("lambda_e requires Gamma > 0")
    ell = params.vf_energy_length / hg
    return ell * (4.0 * params.lambda_p_bar ** 2 /
                  (3.0 * math.pi * ell ** 2)) ** (1.0 / 3.0)


def branch_point_small_gamma(params: MaterialParams, p: float) -> BranchPoint:
    """Small-Gamma form xi_0 = Gamma_t(p) p^2 lp^2 (collisionless limit)."""
    _, gt_rate = landau_rates(params, p)
    return BranchPoint(gt_rate * (p * params.lambda_p_bar) ** 2, p,
                       "nonlocal_smallGamma")


def branch_point_nonlocal(params: MaterialParams, p: float,
                          T: float | None = None) -> BranchPoint:
    """Parametric branch point inverted for xi_0(p); errors beyond 1/lambda_e."""
    if p <= 0.0:
        raise ValueError("p must be > 0")
    hg = params.gamma(T)
    if hg <= 0.0:
        raise ValueError("branch point requires Gamma > 0")
    ell = params.vf_energy_length / hg
    r = ell / params.lambda_p_bar
    lam_e = lambda_e_bar(params, T)
    p_max = 1.0 / lam_e
    if p > p_max * (1.0 + 1e-9):
        raise ValueError("eddy modes frozen out: p exceeds 1/lambda_e")

    def p_of_x(x):
        return s0(x, r) / (x * ell)

    # p(x) decreases monotonically from 1/lambda_e (x -> 0) to 0 (x -> inf);
    # verified on a coarse grid before inverting.
    grid = np.geomspace(1e-10, 1e10, 41)
    pg = np.array([p_of_x(float(x)) for x in grid])
    if np.any(np.diff(pg) > 1e-12 * pg[:-1]):
        raise RuntimeError("parametric branch not monotone; cubic reduction invalid")
    target = min(p, p_max)
    lo, hi = 1e-12, 1e12
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if p_of_x(mid) > target:
            lo = mid
        else:
            hi = mid
    x_root = math.sqrt(lo * hi)
    xi0 = hg * (1.0 - s0(x_root, r))
    return BranchPoint(xi0, p, "nonlocal_parametric")


# ---------------------------------------------------------------------------
# Eddy mode density and thermodynamics
# ---------------------------------------------------------------------------

def _u_breaks(params: MaterialParams, z_a: float, T: float,
              omega: float | None = None) -> np.ndarray:
    """Panels in u = sqrt(xi) over the cut [~0, Gamma].

    The cut weight accumulates like sqrt(xi) below the z_a-scale branch
    point; the square-root variable makes that regular and halves the
    number of decades to cover.
    """
    hg = params.gamma(T)
    xi_z = hg * (params.lambda_p_bar / z_a) ** 2 / \
        (1.0 + (params.lambda_p_bar / z_a) ** 2)
    lo = min(1e-6 * hg, 1e-7 * xi_z)
    if omega is not None and omega > 0.0:
        lo = min(lo, omega / 30.0)
    u_lo, u_hi = math.sqrt(lo), math.sqrt(hg)
    n = max(11, int(math.ceil(1.8 * math.log10(u_hi / u_lo))) + 1)
    pts = set(np.geomspace(u_lo, u_hi, n))
    for m in (0.5, 1.0, 2.0):
        v = xi_z * m
        if lo < v < hg:
            pts.add(math.sqrt(v))
    if omega is not None:
        for m in (0.25, 0.5, 1.0, 2.0, 4.0):
            v = omega * m
            if lo < v < hg:
                pts.add(math.sqrt(v))
    return np.array(sorted(pts))


def _outer(settings: QuadSettings) -> QuadSettings:
    """Outer tolerance for integrals over extrapolated cut values, whose
    noise floor sits near 100x the leaf tolerance."""
    return dataclasses.replace(settings,
                               rel_tol=max(1e-6, 100.0 * settings.rel_tol),
                               max_subdivisions=60)


def _imdelta_cut_values(params, atom, z_a, T, settings, xis):
    vals = np.empty(len(xis))
    ok = True
    for i, xi in enumerate(xis):
        d = delta_on_cut(params, atom, z_a, float(xi), T, settings)
        vals[i] = d.value.imag
        ok = ok and d.converged
    return vals, ok


def eddy_mode_density(params: MaterialParams, atom: AtomParams, z_a: float,
                      omega: float, T: float,
                      settings: QuadSettings | None = None) -> DerivResult:
    """Mode density of the overdamped continuum at real omega >= 0 (1/eV).

    eta(omega) = (1/pi) int_0^Gamma dxi Im Delta(-i xi + 0+)
                 (omega^2 - xi^2)/(xi^2 + omega^2)^2.
    """
    qs = settings or QuadSettings()
    if omega < 0.0:
        raise ValueError("omega must be >= 0")
    hg = params.gamma(T)
    if hg <= 0.0:
        raise ValueError("eddy density requires Gamma > 0")
    flags = []

    def f(u):
        xi = u * u
        vals, ok = _imdelta_cut_values(params, atom, z_a, T, qs, xi)
        flags.append(ok)
        kern = (omega * omega - xi * xi) / (xi * xi + omega * omega) ** 2
        return vals * kern * 2.0 * u / math.pi

    breaks = _u_breaks(params, z_a, T, omega if omega > 0 else None)
    res = integrate_panels(f, breaks, _outer(qs))
    return DerivResult(float(np.real(res.value)), res.error_estimate,
                       res.converged and all(flags))


def eddy_count(params: MaterialParams, atom: AtomParams, z_a: float, T: float,
               settings: QuadSettings | None = None) -> float:
    """N = eta(0) * nu, with the local or nonlocal eddy frequency scale."""
    eta0 = eddy_mode_density(params, atom, z_a, 0.0, T, settings).value
    hg = params.gamma(T)
    if params.response == "scib":
        nu = (4.0 / (3.0 * math.pi)) * params.vf_energy_length * \
            params.lambda_p_bar ** 2 / z_a ** 3
    else:
        nu = hg * (params.lambda_p_bar / z_a) ** 2
    return eta0 * nu


def _ln_boltzmann(e, kt):
    """ln(1 - e^{-E/kT}) without spurious warnings at small arguments."""
    x = np.asarray(e) / kt
    with np.errstate(divide="ignore"):
        return np.where(x > 1e-8, np.log1p(-np.exp(-np.minimum(x, 700.0))),
                        np.log(np.maximum(x, 1e-320)))


def _thermal_kernel_J(xi: float, T: float, qs: QuadSettings) -> float:
    """J = int_0^inf dE ln(1 - e^{-E/kT}) (E^2 - xi^2)/(E^2 + xi^2)^2.

    xi and kT can be dozens of decades apart; panels are log-spaced across
    the whole span.
    """
    kt = KB * T

    def f(e):
        e = np.asarray(e)
        return _ln_boltzmann(e, kt) * (e * e - xi * xi) / (e * e + xi * xi) ** 2

    lo = min(xi, kt) / 8.0
    hi = 30.0 * max(xi, kt)
    n = max(8, int(math.ceil(2.0 * math.log10(hi / lo))) + 1)
    pts = set(np.geomspace(lo, hi, n))
    pts.update(m * xi for m in (0.25, 1.0, 4.0))
    pts.update(m * kt for m in (0.25, 1.0, 4.0, 12.0))
    breaks = np.array([0.0] + sorted(p for p in pts if p <= hi))
    res = integrate_panels(f, breaks, qs, tail_scale=kt)
    return float(np.real(res.value))


def eddy_free_energy(params: MaterialParams, atom: AtomParams, z_a: float,
                     T: float, settings: QuadSettings | None = None,
                     form: str = "auto") -> float:
    """Free energy carried by the overdamped continuum (eV).

    form='general': kB T int dE ln(1-e^{-E/kT}) eta(E), folded into a single
    cut integral; form='lowT': kB T int_0^1 dx Im Delta(-i x Gamma)/2x,
    valid once hbar Gamma(T) << kB T.  'auto' picks between them.
    """
    if T <= 0.0:
        raise ValueError("T must be > 0")
    qs = settings or QuadSettings()
    hg = params.gamma(T)
    if hg <= 0.0:
        raise ValueError("eddy free energy requires Gamma > 0")
    if form == "auto":
        form = "lowT" if hg < 0.02 * KB * T else "general"
    if form not in ("general", "lowT"):
        raise ValueError("form must be 'auto', 'general' or 'lowT'")

    if form == "lowT":
        def f(u):
            xi = u * u
            vals, _ = _imdelta_cut_values(params, atom, z_a, T, qs, xi)
            return vals / u
    else:
        def f(u):
            xi = u * u
            vals, _ = _imdelta_cut_values(params, atom, z_a, T, qs, xi)
            js = np.array([_thermal_kernel_J(float(x), T, qs) for x in xi])
            return vals * js * 2.0 * u / math.pi

    breaks = _u_breaks(params, z_a, T)
    res = integrate_panels(f, breaks, _outer(qs))
    return KB * T * float(np.real(res.value))


def eddy_free_energy_contour(params: MaterialParams, atom: AtomParams,
                             z_a: float, T: float,
                             settings: QuadSettings | None = None) -> float:
    """Residue form (pi/2) kB T [Delta^T(z,0) - Delta_plasma^0(z,0)] (eV).

    The plasma static value takes Gamma -> 0 before omega -> 0.  Valid for
    the local model when Gamma(T)/T -> 0.
    """
    qs = settings or QuadSettings()
    from .material import DissipationModel
    plasma = MaterialParams(params.omega_p, DissipationModel("constant", 0.0),
                            params.v_F, "local_plasma")
    d_pl = delta_static(plasma, atom, z_a, 0.0, qs)
    d_t = delta_static(params, atom, z_a, T, qs)
    return math.pi / 2.0 * KB * T * (d_t - d_pl)


def eddy_entropy(params: MaterialParams, atom: AtomParams, z_a: float,
                 T: float, settings: QuadSettings | None = None,
                 form: str = "auto") -> DerivResult:
    """-dF_e/dT by central differences (eV/K)."""
    qs = settings or QuadSettings()

    def f(t):
        return eddy_free_energy(params, atom, z_a, t, qs, form=form)

    d = derivative_central(f, T, 1e-2 * T)
    return DerivResult(-d.value, d.error_estimate, d.converged)


def eta_integral_I(i: int, j: int, params: MaterialParams, z_a: float,
                   T: float | None = None,
                   settings: QuadSettings | None = None) -> float:
    """Good-conductor eddy density integrals I(i,j), (i,j) in {(2,2),(0,0)}.

    I(i,j) = 32/(pi D) int_0^inf dk k^{j-2} (D k^2/(k^2 lp^2 + 1))^{2-i}
             int_0^1 dy y^{j+1} sqrt(1-y^2) e^{-2 y k z_a}.
    """
    if (i, j) not in ((2, 2), (0, 0)):
        raise ValueError("(i, j) must be (2, 2) or (0, 0)")
    qs = settings or QuadSettings()
    hg = params.gamma(T)
    if hg <= 0.0:
        raise ValueError("requires Gamma > 0")
    if hg / params.omega_p > 0.1:
        warnings.warn("I(i,j) derived for good conductors Gamma << omega_p")
    d_coef = hg * params.lambda_p_bar ** 2
    lp2 = params.lambda_p_bar ** 2

    ynodes = np.polynomial.legendre.leggauss(48)
    yy = 0.5 * (ynodes[0] + 1.0)
    wy = 0.5 * ynodes[1]

    def f(k):
        k = np.asarray(k)
        inner = np.empty(len(k))
        for m, km in enumerate(k):
            inner[m] = float(np.sum(wy * yy ** (j + 1) *
                                    np.sqrt(1.0 - yy ** 2) *
                                    np.exp(-2.0 * yy * km * z_a)))
        if i == 2:
            pref = np.ones_like(k)
        else:
            pref = (d_coef * k * k / (k * k * lp2 + 1.0)) ** 2
        return pref * k ** (j - 2.0) * inner

    scales = sorted({0.5 / z_a, 2.0 / z_a, 1.0 / params.lambda_p_bar})
    breaks = np.array([0.0] + scales + [8.0 * max(scales)])
    res = integrate_panels(f, breaks, qs, tail_scale=1.0 / (2.0 * z_a))
    return 32.0 / (math.pi * d_coef) * float(np.real(res.value))


# ---------------------------------------------------------------------------
# Single overdamped mode
# ---------------------------------------------------------------------------

def single_mode_free_energy(mode: SingleMode, T: float,
                            settings: QuadSettings | None = None
                            ) -> tuple[float, float]:
    """(E0, dF) of one overdamped mode of frequency xi with cutoff Lambda.

    E0 = (1/pi) int_0^Lambda (E/2) xi/(E^2 + xi^2) dE   (log-divergent in
    Lambda, reported at the given cutoff); dF is the thermal part.
    """
    qs = settings or QuadSettings()
    xi = mode.xi

    def f0(e):
        e = np.asarray(e)
        return (e / 2.0) * xi / (e * e + xi * xi) / math.pi

    b0 = np.array(sorted({0.0, xi * 0.5, xi, 4.0 * xi, mode.Lambda * 1e-3,
                          mode.Lambda * 0.1, mode.Lambda}))
    res0 = integrate_panels(f0, b0, qs)
    e0 = float(np.real(res0.value))
    if T <= 0.0:
        return e0, 0.0
    kt = KB * T

    def f1(e):
        e = np.asarray(e)
        return _ln_boltzmann(e, kt) * xi / (e * e + xi * xi) / math.pi

    lo = min(xi, kt) / 8.0
    hi = 30.0 * max(xi, kt)
    n = max(8, int(math.ceil(2.0 * math.log10(hi / lo))) + 1)
    pts = set(np.geomspace(lo, hi, n))
    pts.update(m * xi for m in (0.25, 1.0, 4.0))
    pts.update(m * kt for m in (0.25, 1.0, 4.0, 12.0))
    breaks = np.array([0.0] + sorted(p for p in pts if p <= hi))
    res1 = integrate_panels(f1, breaks, qs, tail_scale=kt)
    df = kt * float(np.real(res1.value))
    return e0, df


def single_mode_partition(mode: SingleMode, T: float,
                          rescale_by_gamma: bool = False,
                          gamma: float = 0.0,
                          settings: QuadSettings | None = None) -> float:
    """Partition function exp(-dF/kB T), ground-state energy excluded.

    With ``rescale_by_gamma`` the common shift (hbar Gamma beta)^(1/2) is
    applied, turning the low-xi limit into the degeneracy (Gamma/xi)^(1/2).
    """
    if T <= 0.0:
        raise ValueError("T must be > 0")
    _, df = single_mode_free_energy(mode, T, settings)
    z = math.exp(-df / (KB * T))
    if rescale_by_gamma:
        if gamma <= 0.0:
            raise ValueError("rescaling requires gamma > 0")
        z *= math.sqrt(gamma / (KB * T))
    return z
