"""Surface impedances and reflection coefficients of the planar interface.

Frequencies live on one of three contours: the real axis (physical
spectrum), the positive imaginary axis (thermal sums) or infinitesimally to
the right of the negative imaginary axis (overdamped-mode continuum).  All
square roots are branch-fixed to the physical sheet: Re(kappa) > 0 where
possible, otherwise Im(kappa) < 0, continuous from Re(omega) > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .material import HBARC, MaterialParams, eps_bm, eps_local, lindhard_g
from .numerics import QuadResult, QuadSettings, integrate_panels

REAL_AXIS = "real_axis"
IMAG_AXIS_POS = "imag_axis_pos"
NEG_IMAG_OFFSET = "neg_imag_offset"


@dataclass(frozen=True)
class FrequencyPoint:
    """A complex energy hbar*omega (eV) tagged with its contour."""

    omega: complex
    domain: str = REAL_AXIS

    def __post_init__(self):
        if self.domain not in (REAL_AXIS, IMAG_AXIS_POS, NEG_IMAG_OFFSET):
            raise ValueError(f"unknown domain tag {self.domain!r}")
        w = complex(self.omega)
        if self.domain == IMAG_AXIS_POS and not (w.real == 0.0 and w.imag > 0.0):
            raise ValueError("imag_axis_pos requires omega = i*xi with xi > 0")
        if self.domain == NEG_IMAG_OFFSET and not (w.imag < 0.0 and w.real > 0.0):
            raise ValueError("neg_imag_offset requires Im(omega) < 0 and a "
                             "positive real offset")

    @staticmethod
    def real(omega: float) -> "FrequencyPoint":
        return FrequencyPoint(complex(omega), REAL_AXIS)

    @staticmethod
    def imag(xi: float) -> "FrequencyPoint":
        return FrequencyPoint(1j * xi, IMAG_AXIS_POS)

    @staticmethod
    def cut(xi: float, offset: float) -> "FrequencyPoint":
        return FrequencyPoint(offset - 1j * xi, NEG_IMAG_OFFSET)


@dataclass(frozen=True)
class KappaPair:
    kappa0: complex
    kappa_branch_ok: bool


@dataclass(frozen=True)
class CutResult:
    value: complex
    error_estimate: float
    converged: bool


def kappa_vacuum(omega: complex, p) -> np.ndarray:
    """Vacuum kappa = sqrt(p^2 - omega^2/c^2) on the physical sheet."""
    p = np.asarray(p, dtype=np.float64)
    w2 = (omega * omega) / (HBARC * HBARC)
    return _k.kappa_branch(np.atleast_1d(p * p - w2 + 0j))


def kappa_pair(omega: complex, p: float) -> KappaPair:
    k0 = complex(kappa_vacuum(omega, p)[0])
    ok = k0.real > 0.0 or (k0.real == 0.0 and k0.imag <= 0.0)
    return KappaPair(k0, ok)


# ---------------------------------------------------------------------------
# Local (Fresnel) impedances
# ---------------------------------------------------------------------------

def impedance_local(params: MaterialParams, omega: FrequencyPoint, p: float,
                    T: float | None = None) -> tuple[complex, complex]:
    """Fresnel impedance ratios (Z_TE/Z0_TE, Z_TM/Z0_TM)."""
    if p <= 0.0:
        raise ValueError("p must be > 0")
    w = complex(omega.omega)
    eps = eps_local(params, w, T)
    w2 = (w * w) / (HBARC * HBARC)
    k0 = complex(_k.kappa_branch(np.array([p * p - w2 + 0j]))[0])
    km = complex(_k.kappa_branch(np.array([p * p - eps * w2 + 0j]))[0])
    return k0 / km, km / (eps * k0)


def _refl_from_ratios(zte: complex, ztm: complex) -> tuple[complex, complex]:
    rte = (zte - 1.0) / (zte + 1.0)
    rtm = (1.0 - ztm) / (1.0 + ztm)
    return rte, rtm


# ---------------------------------------------------------------------------
# Nonlocal (specular-reflection) impedances
# ---------------------------------------------------------------------------

def _q_breaks(params: MaterialParams, p: float, hg: float,
              kappa_lo: float, kappa_hi: float, tm_fine: bool = True):
    """Breakpoints for the q-integrals, resolving every material scale.

    ``tm_fine`` extends the grid to the Thomas-Fermi wave number, which only
    matters for the TM impedance at the 1e-4 level; bulk spectral sums skip
    it because the TM weight there is negligible.
    """
    lam_p = params.lambda_p_bar
    vf = params.vf_energy_length
    lam_tf = vf / (params.omega_p * math.sqrt(3.0))
    scales = [p, 1.0 / lam_p]
    if hg > 0.0:
        scales.append(hg / vf)          # inverse mean free path
    if kappa_lo > 0.0:
        scales.append(kappa_lo)
    if kappa_hi > 0.0:
        scales.append(kappa_hi)
    lo = min(scales) / 8.0
    hi = 8.0 * max(scales)
    pts = {lo, hi}
    n_dec = max(1, int(math.ceil(2.0 * math.log10(hi / lo))))
    pts.update(np.geomspace(lo, hi, n_dec + 1))
    # longitudinal screening structure sits near 1/lambda_TF
    tf = 1.0 / lam_tf
    if tf <= hi:
        pts.add(tf)
    elif tm_fine:
        pts.update(np.geomspace(hi, 8.0 * tf, max(2, int(math.ceil(
            2.0 * math.log10(8.0 * tf / hi)))) + 1))
    breaks = [0.0] + sorted(pts)
    return np.array(breaks)


def _kappa_scale_local(params: MaterialParams, omega: complex, hg: float) -> float:
    """|eps*omega^2/c^2|^(1/2), the metallic decay scale of the fields."""
    w = omega
    val = abs(w * w - params.omega_p ** 2 * w / (w + 1j * hg))
    return math.sqrt(val) / HBARC


def _te_pole(params: MaterialParams, omega: complex, p: float, hg: float):
    """Complex root of eps_t(omega,k)*omega^2/c^2 - k^2 in q, or None.

    Used to subtract the near-singularity that appears when omega sits right
    of the overdamped-mode cut.
    """
    w2 = (omega * omega) / (HBARC * HBARC)
    wp2 = params.omega_p ** 2
    vf = params.vf_energy_length
    G = omega + 1j * hg

    def dfun(q):
        k2 = p * p + q * q
        k = np.sqrt(k2 + 0j)
        u = G / (vf * k)
        _, gt = lindhard_g(complex(u))
        et = 1.0 - wp2 * gt / (omega * G)
        return et * w2 - k2

    # local-model starting guess for the root position
    eps0 = 1.0 - wp2 / (omega * G)
    q0 = complex(np.sqrt(eps0 * w2 - p * p))
    if q0.real < 0:
        q0 = -q0
    if not (q0.real > 0.0) or abs(q0.imag) > 0.5 * abs(q0.real):
        return None
    q = q0
    try:
        for _ in range(60):
            d = dfun(q)
            h = 1e-7 * max(abs(q), 1e-30)
            dp = (dfun(q + h) - dfun(q - h)) / (2.0 * h)
            if dp == 0:
                return None
            step = d / dp
            q = q - step
            if abs(step) < 1e-14 * abs(q):
                break
        if not (q.real > 0.0) or abs(q.imag) > 0.5 * q.real:
            return None
        h = 1e-7 * abs(q)
        dprime = (dfun(q + h) - dfun(q - h)) / (2.0 * h)
    except ValueError:
        # Newton wandered onto the kernel cut; integrate without subtraction
        return None
    return q, dprime


def impedance_scib(params: MaterialParams, omega: FrequencyPoint, p: float,
                   settings: QuadSettings,
                   T: float | None = None) -> tuple[complex, complex, QuadResult]:
    """Nonlocal impedance ratios from the q-integrals.

    Returns (ZTE/Z0_TE, ZTM/Z0_TM, diagnostics); the diagnostics carry the
    quadrature error and convergence flag.
    """
    if p <= 0.0:
        raise ValueError("p must be > 0")
    w = complex(omega.omega)
    hg = params.gamma(T)
    wp2 = params.omega_p ** 2
    vf = params.vf_energy_length
    kap = _kappa_scale_local(params, w, hg)
    breaks = _q_breaks(params, p, hg, kap, kap)
    b_end = float(breaks[-1])
    w2 = (w * w) / (HBARC * HBARC)

    pole = None
    if omega.domain == NEG_IMAG_OFFSET:
        pole = _te_pole(params, w, p, hg)

    if pole is not None:
        qs, dprime = pole
        r_te = 1.0 / dprime
        k2s = p * p + qs * qs
        r_tm = (qs * qs * w2) / (dprime * k2s)

    def f(q):
        te, tm = _k.scib_q_integrand(w, p, np.asarray(q, dtype=np.float64),
                                     hg, wp2, vf, HBARC)
        if pole is not None:
            inside = q <= b_end
            sub = 1.0 / (q - qs)
            te = te - np.where(inside, r_te * sub, 0.0)
            tm = tm - np.where(inside, r_tm * sub, 0.0)
        return np.vstack([te, tm])

    res = integrate_panels(f, breaks, settings, tail_scale=b_end)
    ite, itm = res.value
    if pole is not None:
        # analytic integral of the subtracted pole over [0, b_end]; the
        # residues are unchanged by the vacuum subtraction because the
        # vacuum integrand is analytic at the root
        corr = np.log(b_end - qs) - np.log(-qs)
        ite = ite + r_te * corr
        itm = itm + r_tm * corr
    # the integrands are vacuum-subtracted; the eps = 1 parts integrate to
    # exactly unity against the closed-form vacuum impedances
    k0 = complex(kappa_vacuum(w, p)[0])
    zte = 1.0 - (2.0 * k0 / math.pi) * ite
    ztm = 1.0 + (2.0 / (math.pi * k0)) * itm
    diag = QuadResult(complex(res.error_estimate), res.error_estimate, res.converged)
    return zte, ztm, diag


def impedance_te_onshell_approx(params: MaterialParams, omega: FrequencyPoint,
                                p: float, T: float | None = None) -> complex:
    """Single-evaluation TE impedance: eps_t taken on shell at k = p."""
    if p <= 0.0:
        raise ValueError("p must be > 0")
    w = complex(omega.omega)
    _, eps_t = eps_bm(params, w, p, T)
    w2 = (w * w) / (HBARC * HBARC)
    k0 = complex(_k.kappa_branch(np.array([p * p - w2 + 0j]))[0])
    kt = complex(_k.kappa_branch(np.array([p * p - eps_t * w2 + 0j]))[0])
    return k0 / kt


# ---------------------------------------------------------------------------
# Reflection coefficients
# ---------------------------------------------------------------------------

def reflection(params: MaterialParams, omega: FrequencyPoint, p: float,
               settings: QuadSettings,
               T: float | None = None) -> tuple[complex, complex, bool]:
    """(r_TE, r_TM, converged) dispatched on the material response."""
    if params.response == "scib":
        zte, ztm, diag = impedance_scib(params, omega, p, settings, T)
        rte, rtm = _refl_from_ratios(zte, ztm)
        return rte, rtm, diag.converged
    zte, ztm = impedance_local(params, omega, p, T)
    rte, rtm = _refl_from_ratios(zte, ztm)
    return rte, rtm, True


def reflection_te_lowfreq(params: MaterialParams, omega: complex, p: float,
                          T: float | None = None) -> complex:
    """Leading low-frequency TE reflection (eps-1) * omega^2 / (4 c^2 p^2)."""
    eps = eps_local(params, omega, T)
    return (eps - 1.0) * (omega * omega) / (4.0 * (HBARC * p) ** 2)


def reflection_on_cut(params: MaterialParams, xi: float, p: float,
                      side_offset: float | None = None,
                      settings: QuadSettings | None = None,
                      T: float | None = None) -> CutResult:
    """r_TE at omega = -i*xi + 0+, extrapolated in the real offset.

    Evaluates at side_offset, side_offset/2 and side_offset/4 and Richardson
    extrapolates; flagged unconverged when the last two extrapolants differ
    by more than 1e-4 relative.
    """
    if xi <= 0.0:
        raise ValueError("xi must be > 0")
    if settings is None:
        settings = QuadSettings()
    hg = params.gamma(T)
    if side_offset is None:
        side_offset = 1e-6 * xi
    if side_offset <= 0.0:
        raise ValueError("side_offset must be > 0")
    # SCIB at xi == Gamma sits on the junction with the ballistic cut; nudge
    # only exact hits, approaching from below.
    xi_eff = xi
    if params.response == "scib" and hg > 0.0 and \
            abs(xi - hg) <= 1e-9 * hg:
        xi_eff = hg * (1.0 - 1e-9)
    vals = []
    for k in range(3):
        off = side_offset / 2.0 ** k
        fp = FrequencyPoint.cut(xi_eff, off)
        rte, _, _ = reflection(params, fp, p, settings, T)
        vals.append(rte)
    e0 = 2.0 * vals[1] - vals[0]
    e1 = 2.0 * vals[2] - vals[1]
    err = abs(e1 - e0)
    ok = err <= 1e-4 * abs(e1) + 1e-13
    best = (4.0 * e1 - e0) / 3.0
    return CutResult(best, err, ok)
