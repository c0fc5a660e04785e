"""Thermal (Matsubara) free energy, Casimir entropy and their asymptotics.

The Matsubara sum is evaluated term by term up to a frequency safely above
every spectral structure of the polarizability and continued by an
Euler-Maclaurin integral tail, which keeps the cost bounded at low
temperature without giving up accuracy.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .material import GAMMA_E_PRIME, HBARC, KB, MaterialParams, landau_rates
from .numerics import (DerivResult, QuadSettings, derivative_central,
                       integrate_panels, integrate_semi_infinite)
from .response import (AtomParams, DeltaValue, beta_diag, delta,
                       delta_imag_many, delta_static, phi, thermal_weight)
from .surface import FrequencyPoint


@dataclass(frozen=True)
class MatsubaraSettings:
    """Summation policy: 'auto' (integral tail) or 'fixed' (n_fixed terms)."""

    n_max_policy: str = "auto"
    n_fixed: int = 0
    tail_tolerance: float = 1e-9
    temperature_step: float = 1e-2

    def __post_init__(self):
        if self.n_max_policy not in ("auto", "fixed"):
            raise ValueError("n_max_policy must be 'auto' or 'fixed'")
        if self.n_max_policy == "fixed" and self.n_fixed < 1:
            raise ValueError("fixed policy requires n_fixed >= 1")
        if self.tail_tolerance <= 0.0:
            raise ValueError("tail_tolerance must be > 0")
        if not (0.0 < self.temperature_step < 0.5):
            raise ValueError("temperature_step must lie in (0, 0.5)")


@dataclass(frozen=True)
class FreeEnergyResult:
    value: float
    error_estimate: float
    converged: bool
    n_terms: int


@dataclass(frozen=True)
class EntropyResult:
    value: float
    error_estimate: float
    converged: bool


@dataclass(frozen=True)
class EntropyBreakdown:
    total: float
    term_const: float
    term_linear: float
    term_dT: float


N_HARD_CAP = 1_000_000


def matsubara_energy(T: float) -> float:
    """hbar * nu = 2 pi k_B T (eV)."""
    return 2.0 * math.pi * KB * T


def _auto_n_terms(atom: AtomParams, T: float) -> int:
    """Terms summed explicitly before switching to the integral tail."""
    hnu = matsubara_energy(T)
    return max(32, int(math.ceil(12.0 * atom.omega_a / hnu)))


def free_energy(params: MaterialParams, atom: AtomParams, z_a: float, T: float,
                msettings: MatsubaraSettings | None = None,
                qsettings: QuadSettings | None = None,
                n_star: int | None = None) -> FreeEnergyResult:
    """Matsubara free energy pi k_B T sum' Delta(i n nu), in eV.

    ``n_star`` overrides the automatic split between explicit terms and the
    integral tail; temperature derivatives freeze it so the result stays
    smooth in T.
    """
    if T <= 0.0:
        raise ValueError("T must be > 0")
    ms = msettings or MatsubaraSettings()
    qs = qsettings or QuadSettings()
    hnu = matsubara_energy(T)

    if ms.n_max_policy == "fixed":
        n = ms.n_fixed
        xis = hnu * np.arange(1, n + 1)
        vals, err, ok = delta_imag_many(params, atom, z_a, xis, T, qs)
        s = 0.5 * delta_static(params, atom, z_a, T, qs) + float(np.sum(vals))
        f = math.pi * KB * T * s
        return FreeEnergyResult(f, math.pi * KB * T * err * n, ok, n)

    n = n_star if n_star is not None else _auto_n_terms(atom, T)
    capped = n > N_HARD_CAP
    n = min(n, N_HARD_CAP)
    xis = hnu * np.arange(1, n + 1)
    vals, verr, ok = delta_imag_many(params, atom, z_a, xis, T, qs)
    body = float(np.sum(vals))

    # Euler-Maclaurin continuation: sum_{m>n} Delta(i m nu)
    #   = (1/nu) int_{xi_n + nu/2}^inf Delta(i xi) d xi + Delta'(xi)*nu/24 + ...
    # A fixed panel count keeps the quadrature error smooth in T, which the
    # entropy derivative relies on.
    xi_t = (n + 0.5) * hnu
    hg = params.gamma(T)
    hi = 30.0 * max(atom.omega_a, hg, HBARC / (2.0 * z_a), xi_t)
    breaks = xi_t * (hi / xi_t) ** np.linspace(0.0, 1.0, 19)

    def f_tail(x):
        v, _, _ = delta_imag_many(params, atom, z_a, np.asarray(x), T, qs)
        return v

    tail_scale = max(atom.omega_a, HBARC / (2.0 * z_a))
    res = integrate_panels(f_tail, breaks, qs, tail_scale=tail_scale)
    tail = float(np.real(res.value)) / hnu
    em = (vals[-1] - vals[-2]) / 24.0 if n >= 2 else 0.0
    static = delta_static(params, atom, z_a, T, qs)
    total = 0.5 * static + body + tail + em
    f = math.pi * KB * T * total
    tail_unc = math.pi * KB * T * res.error_estimate / hnu
    err = math.pi * KB * T * verr * math.sqrt(n) + tail_unc + \
        math.pi * KB * T * 0.25 * abs(em)
    conv = ok and res.converged and not capped and \
        tail_unc <= max(1e4 * ms.tail_tolerance * abs(f), 1e-300)
    return FreeEnergyResult(f, err, conv, n)


def free_energy_zero_T(params: MaterialParams, atom: AtomParams, z_a: float,
                       qsettings: QuadSettings | None = None) -> FreeEnergyResult:
    """T -> 0 limit: (1/2) int_0^inf Delta0(z_a, i xi) d xi (eV)."""
    qs = qsettings or QuadSettings()
    hg = params.gamma(0.0) if params.gamma_model.kind == "power_law" else \
        params.gamma_model.gamma_ref
    ea = atom.omega_a
    lo = 1e-6 * ea
    hi_scale = max(ea, hg, HBARC / (2.0 * z_a))
    n_dec = max(4, int(math.ceil(3.0 * math.log10(30.0 * hi_scale / lo))))
    breaks = np.concatenate([[0.0], np.geomspace(lo, 30.0 * hi_scale, n_dec + 1)])

    def f(x):
        x = np.asarray(x)
        out = np.zeros_like(x)
        pos = x > 0.0
        if np.any(pos):
            v, _, _ = delta_imag_many(params, atom, z_a, x[pos], 0.0, qs)
            out[pos] = v
        return out

    res = integrate_panels(f, breaks, qs,
                           tail_scale=max(ea, HBARC / (2.0 * z_a)))
    return FreeEnergyResult(0.5 * float(np.real(res.value)),
                            0.5 * res.error_estimate, res.converged, 0)


def free_energy_asym(params: MaterialParams, atom: AtomParams, z_a: float,
                     T: float, regime: str,
                     qsettings: QuadSettings | None = None) -> float:
    """Short-distance asymptotic free energies (eV).

    'local_short'    (z_a << delta_a):
        (pi k_B T / (lp^2 z_a)) sum' n/(n + Gamma/nu) Phi(i n nu)
    'nonlocal_short' (z_a << ell):
        -pi k_B T ln[2 z_a/(g'_E ell)] sum_{n<=Gamma/nu} 4 n nu Phi(i n nu)/(vF lp^2)
    """
    if regime not in ("local_short", "nonlocal_short"):
        raise ValueError("regime must be 'local_short' or 'nonlocal_short'")
    hnu = matsubara_energy(T)
    hg = params.gamma(T)
    lam_p2 = params.lambda_p_bar ** 2
    ea = atom.omega_a
    tw = thermal_weight(atom, T)
    mu2 = atom.mu2
    from .material import MU0_MUB2

    def phi_vals(xi):
        b0 = 2.0 * mu2 * ea / (ea * ea + xi * xi) * tw
        if atom.orientation == "parallel_xy":
            tr = 2.0 * b0
        elif atom.orientation == "isotropic":
            tr = 4.0 * b0
        else:
            mx, my, mz = atom.mu
            tr = b0 / mu2 * (mx * mx + my * my + 2.0 * mz * mz)
        return MU0_MUB2 * tr / (64.0 * math.pi ** 2)

    if regime == "local_short":
        sc = _scales_quick(params, atom, z_a, T)
        if sc is not None and z_a > sc[0]:
            warnings.warn("local_short asymptote used outside z_a << delta_a")
        # terms fall like 1/n only beyond n ~ Gamma/nu; sum past that knee
        n_cut = max(64, int(math.ceil(20.0 * max(ea, hg) / hnu)))
        n = np.arange(1, min(n_cut, N_HARD_CAP) + 1)
        xi = n * hnu
        terms = n / (n + hg / hnu) * phi_vals(xi)
        ssum = float(np.sum(terms))
        # Lorentzian tail of the polarizability
        w_last = terms[-1] * (ea * ea + xi[-1] ** 2)
        b = ea / hnu
        nn = n[-1] + 0.5
        s_tail = (1.0 / hnu ** 2) * (1.0 / b) * (math.pi / 2.0 -
                                                 math.atan(nn / b))
        ssum += float(w_last * s_tail)
        return math.pi * KB * T / (lam_p2 * z_a) * ssum

    ell = params.vf_energy_length / hg if hg > 0.0 else math.inf
    if not z_a < ell:
        warnings.warn("nonlocal_short asymptote used outside z_a << ell")
    n_top = int(math.floor(hg / hnu))
    if n_top < 1:
        warnings.warn("no Matsubara frequency below Gamma; asymptote is zero")
        return 0.0
    n = np.arange(1, n_top + 1)
    xi = n * hnu
    ssum = float(np.sum(4.0 * xi * phi_vals(xi))) / \
        (params.vf_energy_length * lam_p2)
    log_term = math.log(2.0 * z_a / (GAMMA_E_PRIME * ell))
    return -math.pi * KB * T * log_term * ssum


def _scales_quick(params, atom, z_a, T):
    hg = params.gamma(T)
    if hg <= 0.0:
        return None
    delta_a = params.lambda_p_bar * math.sqrt(2.0 * hg / atom.omega_a)
    return (delta_a / 10.0,)


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------

def entropy(params: MaterialParams, atom: AtomParams, z_a: float, T: float,
            msettings: MatsubaraSettings | None = None,
            qsettings: QuadSettings | None = None) -> EntropyResult:
    """Casimir entropy -dF/dT (eV/K) by Richardson-extrapolated differences.

    The Matsubara split point is frozen at the central temperature so the
    numerical error stays a smooth function of T.
    """
    ms = msettings or MatsubaraSettings()
    qs = qsettings or QuadSettings()
    n_star = None
    if ms.n_max_policy == "auto":
        n_star = _auto_n_terms(atom, T * (1.0 + ms.temperature_step))

    def f(t):
        return free_energy(params, atom, z_a, t, ms, qs, n_star=n_star).value

    d = derivative_central(f, T, ms.temperature_step * T)
    return EntropyResult(-d.value, d.error_estimate, d.converged)


def entropy_high_T(params: MaterialParams, atom: AtomParams, z_a: float,
                   T: float, qsettings: QuadSettings | None = None) -> float:
    """High-temperature limit -pi kB Delta(0)/2 - (pi kB/2) dDelta(0)/dT."""
    qs = qsettings or QuadSettings()

    def static(t):
        return delta_static(params, atom, z_a, t, qs)

    val = static(T)
    d = derivative_central(static, T, 1e-2 * T)
    # second term carries the explicit factor T: S = -(pi kB/2) d[T Delta(0)]/dT
    return -math.pi * KB * val / 2.0 - (math.pi * KB / 2.0) * T * d.value


def entropy_low_T(params: MaterialParams, atom: AtomParams, z_a: float,
                  T: float, msettings: MatsubaraSettings | None = None,
                  qsettings: QuadSettings | None = None) -> EntropyBreakdown:
    """Three-term low-temperature expansion of the entropy (eV/K)."""
    ms = msettings or MatsubaraSettings()
    qs = qsettings or QuadSettings()
    hnu = matsubara_energy(T)
    d_nu = float(delta_imag_many(params, atom, z_a, np.array([hnu]), T, qs)[0][0])
    d_0 = delta_static(params, atom, z_a, T, qs)
    term_const = math.pi * KB * (d_nu - d_0) / 2.0

    def d_at(xi):
        return float(delta_imag_many(params, atom, z_a,
                                     np.array([xi]), T, qs)[0][0])

    dd = derivative_central(d_at, hnu, 1e-3 * hnu)
    term_linear = -(math.pi * KB / 3.0) * hnu * dd.value

    # third term: -(1/2) int dxi  dDelta(i xi)/dT
    h_t = ms.temperature_step * T
    ea = atom.omega_a
    hg = params.gamma(T)
    lo = 1e-6 * min(ea, hnu)
    hi_scale = max(ea, hg, HBARC / (2.0 * z_a))
    n_dec = max(4, int(math.ceil(2.0 * math.log10(30.0 * hi_scale / lo))))
    breaks = np.concatenate([[0.0], np.geomspace(lo, 30.0 * hi_scale, n_dec + 1)])

    def f(x):
        x = np.asarray(x)
        out = np.zeros_like(x)
        pos = x > 0.0
        if np.any(pos):
            vp, _, _ = delta_imag_many(params, atom, z_a, x[pos], T + h_t, qs)
            vm, _, _ = delta_imag_many(params, atom, z_a, x[pos], T - h_t, qs)
            out[pos] = (vp - vm) / (2.0 * h_t)
        return out

    res = integrate_panels(f, breaks, qs,
                           tail_scale=max(ea, HBARC / (2.0 * z_a)))
    term_dt = -0.5 * float(np.real(res.value))
    return EntropyBreakdown(term_const + term_linear + term_dt,
                            term_const, term_linear, term_dt)


@functools.lru_cache(maxsize=8)
def coth_moment(n: int) -> float:
    """mu_n = int_-inf^inf w^n (coth w - sgn w) dw; zero for even n.

    Cached once at first use; mu_1 = pi^2/6.
    """
    if n % 2 == 0:
        return 0.0

    def f(w):
        w = np.asarray(w)
        return w ** n * 2.0 * np.exp(-2.0 * w) / (1.0 - np.exp(-2.0 * w))

    qs = QuadSettings(rel_tol=1e-12, tail_decay_scale=1.0)
    res = integrate_panels(f, np.array([1e-14, 0.5, 1.0, 2.0, 4.0, 8.0]),
                           qs, tail_scale=0.5)
    return 2.0 * float(np.real(res.value))


def entropy_moment_series(params: MaterialParams, atom: AtomParams, z_a: float,
                          T: float, order: int = 0,
                          qsettings: QuadSettings | None = None) -> EntropyResult:
    """Moment expansion of S: odd derivatives of Im Delta at omega = 0.

    S/k_B = -sum_k mu_{2k+1} (k+1) ImDelta^(2k+1)(0) (2 kB T)^{2k+1}/(2k+1)!
    Orders above 1 amplify differentiation noise and are flagged.
    """
    if order < 0 or order > 3:
        raise ValueError("order must be in [0, 3]")
    qs = qsettings or QuadSettings()
    m = order + 1
    hg = params.gamma(T)
    scale = atom.omega_a
    if hg > 0.0:
        scale = min(scale, max(hg * (params.lambda_p_bar / z_a) ** 2,
                               1e-3 * atom.omega_a))
    h = 0.2 * scale

    ws = h * np.arange(1, m + 1)
    im = np.array([delta(params, atom, z_a, FrequencyPoint.real(float(w)),
                         T, qs).value.imag for w in ws])
    vand = np.array([[w ** (2 * j + 1) for j in range(m)] for w in ws])
    coeff = np.linalg.solve(vand, im)
    total = 0.0
    for k in range(order + 1):
        deriv = coeff[k] * math.factorial(2 * k + 1)
        total -= coth_moment(2 * k + 1) * (k + 1) * deriv * \
            (2.0 * KB * T) ** (2 * k + 1) / math.factorial(2 * k + 1)
    return EntropyResult(KB * total, abs(KB * total) * (1e-4 if order < 2 else 0.3),
                         order < 2)


def shape_F(x: float, qsettings: QuadSettings | None = None) -> float:
    """F(x) = -int_0^inf y^2 e^{-2y} (y - sqrt(y^2+x^2))/(y + sqrt(y^2+x^2)) dy."""
    if x < 0.0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return 0.0
    qs = qsettings or QuadSettings()

    def f(y):
        y = np.asarray(y)
        r = np.sqrt(y * y + x * x)
        return -y * y * np.exp(-2.0 * y) * (y - r) / (y + r)

    res = integrate_panels(f, np.array([0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]),
                           qs, tail_scale=0.5)
    return float(np.real(res.value))


def residual_entropy(params: MaterialParams, atom: AtomParams,
                     z_a: float) -> float:
    """Residual entropy 4 pi k_B Phi0(0) F(z_a/lambda_p) / z_a^3 (eV/K)."""
    ph0 = float(phi(atom, 0.0, 0.0).real)
    return 4.0 * math.pi * KB * ph0 / z_a ** 3 * \
        shape_F(z_a / params.lambda_p_bar)


def entropy_low_T_nonlocal(params: MaterialParams, atom: AtomParams,
                           z_a: float, T: float) -> float:
    """Leading nonlocal low-T law (eV/K).

    S/(pi kB) = -(2/9) nu Phi(0)/(vF lp^2) ln[(2/g'_E)^3 nu/nu_nl] with
    hbar*nu_nl = (lp/z_a)^2 * Gamma_t(1/z_a).
    """
    if params.response != "scib":
        warnings.warn("nonlocal low-T law evaluated for a local response")
    if T > 0.1 * atom.T_a:
        warnings.warn("nonlocal low-T law used outside T << T_a")
    hnu = matsubara_energy(T)
    _, gt = landau_rates(params, 1.0 / z_a)
    hnu_nl = (params.lambda_p_bar / z_a) ** 2 * gt
    ph0 = float(phi(atom, 0.0, 0.0).real)
    pref = (2.0 / 9.0) * hnu * ph0 / \
        (params.vf_energy_length * params.lambda_p_bar ** 2)
    return -math.pi * KB * pref * math.log(
        (2.0 / GAMMA_E_PRIME) ** 3 * hnu / hnu_nl)
