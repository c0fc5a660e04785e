"""Atomic magnetic polarizability, scattered Green tensor and mode density.

The Green tensor is stored in units of mu_0 (1/um^3); dipole matrix elements
are in Bohr magnetons.  The product entering the interaction is made
dimensionless through the constant MU0_MUB2.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .material import (GAMMA_E_PRIME, HBARC, KB, MU0_MUB2, MaterialParams,
                       eps_local)
from .numerics import (DerivResult, QuadSettings, derivative_central,
                       integrate_panels, panel_nodes)
from .surface import (NEG_IMAG_OFFSET, FrequencyPoint, _q_breaks,
                      _kappa_scale_local, _te_pole, impedance_scib,
                      kappa_vacuum, reflection)

ORIENTATIONS = ("isotropic", "parallel_xy", "custom")


def _outer_settings(settings: QuadSettings) -> QuadSettings:
    """Looser certification for quadratures whose integrand is itself a
    quadrature: the inner tolerance sets a noise floor the outer rule
    cannot certify below."""
    return dataclasses.replace(settings,
                               rel_tol=max(1e-6, 100.0 * settings.rel_tol),
                               max_subdivisions=min(settings.max_subdivisions,
                                                    60))


@dataclass(frozen=True)
class AtomParams:
    """Two-level atom: transition energy and magnetic dipole elements."""

    omega_a: float                       # hbar*omega_a, eV
    mu: tuple = (1.0, 0.0, 0.0)          # Bohr magnetons
    orientation: str = "parallel_xy"

    def __post_init__(self):
        if self.omega_a <= 0.0:
            raise ValueError("omega_a must be > 0")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"unknown orientation {self.orientation!r}")
        if all(m == 0.0 for m in self.mu):
            raise ValueError("dipole vector must be nonzero")

    @property
    def T_a(self) -> float:
        """Characteristic atomic temperature hbar*omega_a / (2 k_B)."""
        return self.omega_a / (2.0 * KB)

    @property
    def mu2(self) -> float:
        return float(sum(m * m for m in self.mu))


@dataclass(frozen=True)
class DeltaValue:
    value: complex
    quad_error: float
    converged: bool = True


@dataclass(frozen=True)
class GreenResult:
    tensor: np.ndarray
    error_estimate: float
    converged: bool


def thermal_weight(atom: AtomParams, T: float) -> float:
    """tanh(T_a / T); unity in the ground state (T = 0)."""
    if T < 0.0:
        raise ValueError("temperature must be >= 0")
    if T == 0.0:
        return 1.0
    return math.tanh(atom.T_a / T)


def _beta_scalar(atom: AtomParams, omega: complex) -> complex:
    ea = atom.omega_a
    den = ea * ea - omega * omega
    if den == 0:
        raise ZeroDivisionError("polarizability pole at omega = +/- omega_a")
    return 2.0 * atom.mu2 * ea / den


def beta_diag(atom: AtomParams, omega: complex, T: float):
    """Diagonal of the thermal polarizability tensor (mu_B^2/eV units)."""
    w = thermal_weight(atom, T)
    if atom.orientation == "custom":
        ea = atom.omega_a
        den = ea * ea - omega * omega
        if den == 0:
            raise ZeroDivisionError("polarizability pole at omega = +/- omega_a")
        mx, my, mz = atom.mu
        pref = 2.0 * ea / den * w
        return pref * mx * mx, pref * my * my, pref * mz * mz
    b = w * _beta_scalar(atom, omega)
    if atom.orientation == "parallel_xy":
        return b, b, 0.0 * b
    return b, b, b


def polarizability(atom: AtomParams, omega: complex, T: float) -> np.ndarray:
    """3x3 thermal magnetic polarizability tensor."""
    w = thermal_weight(atom, T)
    ea = atom.omega_a
    den = ea * ea - omega * omega
    if den == 0:
        raise ZeroDivisionError("polarizability pole at omega = +/- omega_a")
    mu = np.asarray(atom.mu, dtype=np.float64)
    if atom.orientation == "custom":
        outer = np.outer(mu, mu)
    elif atom.orientation == "parallel_xy":
        outer = atom.mu2 * np.diag([1.0, 1.0, 0.0])
    else:
        outer = atom.mu2 * np.eye(3)
    return w * 2.0 * ea / den * outer.astype(np.complex128)


def phi(atom: AtomParams, omega: complex, T: float) -> complex:
    """Interaction strength mu_0 [Tr beta + beta_zz] / (8 pi)^2, in um^3."""
    bx, by, bz = beta_diag(atom, omega, T)
    return MU0_MUB2 * (bx + by + 2.0 * bz) / (64.0 * math.pi ** 2)


# ---------------------------------------------------------------------------
# Scattered Green tensor
# ---------------------------------------------------------------------------

def _p_breaks(z_a: float, extra_scales=()):
    """Breakpoints in p resolving the e^{-2 kappa z} decay and field scales."""
    base = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 14.0, 22.0, 32.0, 44.0])
    cap = 44.0 / (2.0 * z_a)
    pts = set(base / (2.0 * z_a))
    for s in extra_scales:
        for m in (0.5, 1.0, 2.0):
            v = s * m
            if 1e-10 * cap < v < 0.98 * cap:
                pts.add(v)
    return np.array([0.0] + sorted(pts))


def _green_integrand(omega: complex, z_a: float, p, rte, rtm):
    """(f_xx, f_zz) integrands given reflection coefficients at nodes p."""
    w2 = (omega * omega) / (HBARC * HBARC)
    k0 = _k.kappa_branch(np.asarray(p) ** 2 - w2 + 0j)
    common = p * k0 * np.exp(-2.0 * k0 * z_a)
    fxx = common * (rte + (w2 / (k0 * k0)) * rtm)
    fzz = common * 2.0 * (np.asarray(p) ** 2 / (k0 * k0)) * rte
    return fxx, fzz


def green_scattered(params: MaterialParams, z_a: float, omega: FrequencyPoint,
                    settings: QuadSettings, T: float | None = None) -> GreenResult:
    """Scattered magnetic Green tensor at the atom, diagonal, in mu_0 units."""
    if z_a <= 0.0:
        raise ValueError("z_a must be > 0")
    w = complex(omega.omega)
    hg = params.gamma(T)
    kap = _kappa_scale_local(params, w, hg) if w != 0 else 1.0 / params.lambda_p_bar
    extra = [kap]
    if hg > 0.0:
        extra.append(hg / params.vf_energy_length)   # inverse mean free path
    breaks = _p_breaks(z_a, tuple(extra))

    if params.response == "scib":
        def f(p):
            fxx = np.empty(len(p), dtype=np.complex128)
            fzz = np.empty(len(p), dtype=np.complex128)
            for i, pi in enumerate(p):
                if pi == 0.0:
                    fxx[i] = 0.0
                    fzz[i] = 0.0
                    continue
                rte, rtm, _ = reflection(params, omega, float(pi), settings, T)
                a, b = _green_integrand(w, z_a, np.array([pi]), rte, rtm)
                fxx[i] = a[0]
                fzz[i] = b[0]
            return np.vstack([fxx, fzz])
    else:
        eps = eps_local(params, w, T)

        def f(p):
            p = np.asarray(p)
            rte, rtm = _k.local_refl(w, eps, p, HBARC)
            fxx, fzz = _green_integrand(w, z_a, p, rte, rtm)
            return np.vstack([fxx, fzz])

    outer = _outer_settings(settings) if params.response == "scib" else settings
    res = integrate_panels(f, breaks, outer, tail_scale=1.0 / (2.0 * z_a))
    hxx, hzz = res.value / (8.0 * math.pi)
    tensor = np.diag([hxx, hxx, hzz])
    return GreenResult(tensor, res.error_estimate / (8.0 * math.pi), res.converged)


def delta(params: MaterialParams, atom: AtomParams, z_a: float,
          omega: FrequencyPoint, T: float, settings: QuadSettings) -> DeltaValue:
    """Interaction spectral function -(1/pi) Tr[beta . h], dimensionless."""
    g = green_scattered(params, z_a, omega, settings, T)
    w = complex(omega.omega)
    bx, by, bz = beta_diag(atom, w, T)
    tr = (bx + by) * g.tensor[0, 0] + bz * g.tensor[2, 2]
    val = -MU0_MUB2 / math.pi * tr
    err = MU0_MUB2 / math.pi * (abs(bx) + abs(by) + 2 * abs(bz)) * g.error_estimate
    return DeltaValue(val, err, g.converged)


# ---------------------------------------------------------------------------
# Bulk evaluation on the positive imaginary axis (thermal sums)
# ---------------------------------------------------------------------------

def delta_imag_many(params: MaterialParams, atom: AtomParams, z_a: float,
                    xis: np.ndarray, T: float,
                    settings: QuadSettings) -> tuple[np.ndarray, float, bool]:
    """Delta(z_a, i*xi) for an array of xi > 0; real on this axis.

    Uses a fixed composite rule shared by all frequencies so that results
    vary smoothly with parameters (needed by temperature derivatives).
    """
    xis = np.asarray(xis, dtype=np.float64)
    if np.any(xis <= 0.0):
        raise ValueError("xis must be > 0")
    hg = params.gamma(T)
    wp2 = params.omega_p ** 2
    kap_lo = math.sqrt(abs(xis.min() ** 2 + wp2 * xis.min() / (xis.min() + hg))) / HBARC
    kap_hi = math.sqrt(abs(xis.max() ** 2 + wp2 * xis.max() / (xis.max() + hg))) / HBARC
    extra = [kap_lo, kap_hi, math.sqrt(kap_lo * kap_hi)]
    if hg > 0.0:
        extra.append(hg / params.vf_energy_length)
    breaks = _p_breaks(z_a, tuple(extra))
    pn, w15, w7 = panel_nodes(breaks, tail_scale=1.0 / (2.0 * z_a))
    keep = pn > 0.0
    pn, w15, w7 = pn[keep], w15[keep], w7[keep]

    scib = params.response == "scib"
    if scib:
        vf = params.vf_energy_length
        qb = _q_breaks(params, float(np.median(pn)), hg,
                       min(kap_lo, pn.min()), max(kap_hi, pn.max()),
                       tm_fine=False)
        qn1, qw15, qw7 = panel_nodes(qb, tail_scale=float(qb[-1]))
        good = qn1 > 0.0
        qn1, qw15, qw7 = qn1[good], qw15[good], qw7[good]
        qn = np.broadcast_to(qn1, (len(pn), len(qn1))).copy()
        qk = np.broadcast_to(qw15, qn.shape).copy()
        qg = np.broadcast_to(qw7, qn.shape).copy()

    ib2 = 1.0 / (HBARC * HBARC)
    nx = len(xis)
    hxx = np.empty(nx)
    hzz = np.empty(nx)
    perr = 0.0
    scale = 0.0
    q_ok = True
    block = 4096
    for i0 in range(0, nx, block):
        xb = xis[i0:i0 + block]
        if scib:
            rte, rtm, qerr = _k.scib_refl_imag_bulk(xb, pn, qn, qk, qg,
                                                    hg, wp2, vf, HBARC)
            q_ok = q_ok and qerr <= 100.0 * settings.rel_tol
        else:
            eps = 1.0 + wp2 / (xb * (xb + hg))        # eps(i xi), real
            k0m = np.sqrt(pn[None, :] ** 2 + (xb ** 2)[:, None] * ib2)
            km = np.sqrt(pn[None, :] ** 2 + eps[:, None] * (xb ** 2)[:, None] * ib2)
            rte = (k0m - km) / (k0m + km)
            rtm = (eps[:, None] * k0m - km) / (eps[:, None] * k0m + km)
        k0 = np.sqrt(pn[None, :] ** 2 + (xb ** 2)[:, None] * ib2)
        common = pn[None, :] * k0 * np.exp(-2.0 * k0 * z_a)
        fxx = common * (rte - (xb ** 2)[:, None] * ib2 / (k0 * k0) * rtm)
        fzz = common * 2.0 * (pn[None, :] ** 2 / (k0 * k0)) * rte
        hxx15 = fxx @ w15
        hxx7 = fxx @ w7
        hzz15 = fzz @ w15
        hzz7 = fzz @ w7
        perr = max(perr, float(np.max(np.abs(hxx15 - hxx7) +
                                      np.abs(hzz15 - hzz7))))
        scale = max(scale, float(np.max(np.abs(hxx15) + np.abs(hzz15))))
        hxx[i0:i0 + block] = hxx15 / (8.0 * math.pi)
        hzz[i0:i0 + block] = hzz15 / (8.0 * math.pi)
    p_ok = perr <= 100.0 * settings.rel_tol * max(scale, 1e-300)

    tw = thermal_weight(atom, T)
    ea = atom.omega_a
    b0 = 2.0 * atom.mu2 * ea / (ea * ea + xis * xis) * tw
    if atom.orientation == "parallel_xy":
        tr = 2.0 * b0 * hxx
    elif atom.orientation == "isotropic":
        tr = b0 * (2.0 * hxx + hzz)
    else:
        mx, my, mz = atom.mu
        m2 = atom.mu2
        tr = b0 / m2 * ((mx * mx + my * my) * hxx + mz * mz * hzz)
    vals = -MU0_MUB2 / math.pi * tr
    err = MU0_MUB2 / math.pi * float(np.max(np.abs(b0))) * perr / (8.0 * math.pi)
    return vals, err, bool(p_ok and q_ok)


def delta_static(params: MaterialParams, atom: AtomParams, z_a: float,
                 T: float, settings: QuadSettings) -> float:
    """Analytic omega -> 0 limit of Delta.

    Dissipative responses (Drude, SCIB) have r_TE -> 0 and a vanishing TM
    weight, so the static value is zero; the plasma response keeps a finite
    TE reflection (p - sqrt(p^2 + 1/lambda_p^2)) / (p + sqrt(...)).
    """
    if params.response != "local_plasma":
        return 0.0
    inv_lp2 = 1.0 / params.lambda_p_bar ** 2

    def f(p):
        p = np.asarray(p)
        km = np.sqrt(p * p + inv_lp2)
        rte0 = (p - km) / (p + km)
        common = p * p * np.exp(-2.0 * p * z_a)
        return np.vstack([common * rte0, 2.0 * common * rte0])

    breaks = _p_breaks(z_a, (1.0 / params.lambda_p_bar,))
    res = integrate_panels(f, breaks, settings, tail_scale=1.0 / (2.0 * z_a))
    hxx, hzz = res.value / (8.0 * math.pi)
    bx, by, bz = beta_diag(atom, 0.0, T)
    tr = (bx + by) * hxx + bz * hzz
    return float((-MU0_MUB2 / math.pi * tr).real)


# ---------------------------------------------------------------------------
# Evaluation right of the overdamped cut
# ---------------------------------------------------------------------------

def delta_on_cut(params: MaterialParams, atom: AtomParams, z_a: float,
                 xi: float, T: float, settings: QuadSettings,
                 side_offset: float | None = None) -> DeltaValue:
    """Delta at omega = -i*xi + 0+, Richardson-extrapolated in the offset.

    The offset must stay far below xi itself so the extrapolation residual
    does not mask the cut density at small xi.
    """
    hg = params.gamma(T)
    if side_offset is None:
        side_offset = 1e-6 * xi
    xi_eff = xi
    if params.response == "scib" and hg > 0.0 and \
            abs(xi - hg) <= 1e-9 * hg:
        xi_eff = hg * (1.0 - 1e-9)
    vals = []
    errs = []
    for k in range(3):
        off = side_offset / 2.0 ** k
        fp = FrequencyPoint.cut(xi_eff, off)
        d = _delta_cut_single(params, atom, z_a, fp, T, settings)
        vals.append(d.value)
        errs.append(d.quad_error)
    e0 = 2.0 * vals[1] - vals[0]
    e1 = 2.0 * vals[2] - vals[1]
    err = abs(e1 - e0) + errs[-1]
    best = (4.0 * e1 - e0) / 3.0
    ok = abs(e1 - e0) <= 1e-4 * abs(e1) + 1e-30
    return DeltaValue(best, err, ok)


def _integrate_with_edge(f, breaks, settings, tail_scale, edge):
    """Composite integral with sqrt-substituted panels around a kink.

    The overdamped support ends with a sqrt(|p - edge|) behaviour on both
    sides; integrating those windows in t = sqrt(|p - edge|) removes the
    kink instead of resolving it by subdivision.
    """
    if edge is None or not np.isfinite(edge) or edge <= 0.0 or \
            edge >= 0.8 * breaks[-1]:
        return integrate_panels(f, breaks, settings, tail_scale=tail_scale)
    lo_cut = 0.7 * edge
    hi_cut = min(1.3 * edge, 0.5 * (edge + breaks[-1]))
    lo_breaks = np.array([b for b in breaks if b < lo_cut] + [lo_cut])
    hi_breaks = np.array([hi_cut] + [b for b in breaks if b > hi_cut])
    res_lo = integrate_panels(f, lo_breaks, settings)
    res_hi = integrate_panels(f, hi_breaks, settings, tail_scale=tail_scale)

    def g_below(t):
        t = np.asarray(t)
        return f(edge - t * t) * 2.0 * t

    def g_above(t):
        t = np.asarray(t)
        return f(edge + t * t) * 2.0 * t

    tb = math.sqrt(edge - lo_cut)
    ta = math.sqrt(hi_cut - edge)
    res_b = integrate_panels(g_below, np.array([0.0, 0.5 * tb, tb]), settings)
    res_a = integrate_panels(g_above, np.array([0.0, 0.5 * ta, ta]), settings)
    value = res_lo.value + res_hi.value + res_b.value + res_a.value
    err = sum(r.error_estimate for r in (res_lo, res_hi, res_b, res_a))
    ok = all(r.converged for r in (res_lo, res_hi, res_b, res_a))
    from .numerics import QuadResult
    return QuadResult(value, err, ok)


def _cut_support_edge(params: MaterialParams, xi: float, hg: float) -> float:
    """Wave number where the overdamped continuum ends at frequency -i*xi."""
    if hg <= 0.0 or xi >= hg:
        return math.inf
    x = xi / hg
    p_loc = math.sqrt(x / (1.0 - x)) / params.lambda_p_bar
    if params.response != "scib":
        return p_loc
    ell = params.vf_energy_length / hg
    lam_e = ell * (4.0 * params.lambda_p_bar ** 2 /
                   (3.0 * math.pi * ell ** 2)) ** (1.0 / 3.0)
    return min(p_loc, 1.0 / lam_e)


def _delta_cut_single(params: MaterialParams, atom: AtomParams, z_a: float,
                      fp: FrequencyPoint, T: float,
                      settings: QuadSettings) -> DeltaValue:
    w = complex(fp.omega)
    hg = params.gamma(T)
    kap = _kappa_scale_local(params, w, hg)
    edge = _cut_support_edge(params, -w.imag, hg)
    extra = [kap]
    if hg > 0.0:
        extra.append(hg / params.vf_energy_length)
    if math.isfinite(edge):
        extra += [0.7 * edge, 0.99 * edge, edge, 1.05 * edge]
    breaks = _p_breaks(z_a, tuple(extra))

    if params.response == "scib":
        # the TE-denominator root lives in k, shared by every p
        p_ref = 1e-3 / z_a
        pole = _te_pole(params, w, p_ref, hg)
        has_pole = pole is not None
        if has_pole:
            qr, d_dq = pole
            kstar = complex(np.sqrt(p_ref * p_ref + qr * qr))
            if kstar.real < 0:
                kstar = -kstar
            d_dk = d_dq * kstar / qr
        else:
            kstar, d_dk = 0.0j, 1.0 + 0.0j
        wp2 = params.omega_p ** 2
        vf = params.vf_energy_length
        p_hi = float(breaks[-1])
        qb = _q_breaks(params, p_hi, hg, min(kap, float(breaks[1])), kap,
                       tm_fine=False)
        qn, qw15, _ = panel_nodes(qb, tail_scale=float(qb[-1]))
        n_lin = (len(qb) - 1) * 15
        b_end = float(qb[-1])

        def f(p):
            p = np.asarray(p, dtype=np.float64)
            rte, rtm = _k.scib_refl_cut_bulk(w, p, qn, qw15, n_lin, b_end,
                                             hg, wp2, vf, HBARC,
                                             has_pole, kstar, d_dk)
            fxx, fzz = _green_integrand(w, z_a, p, rte, rtm)
            return np.vstack([fxx, fzz])
    else:
        eps = 1.0 - params.omega_p ** 2 / (w * (w + 1j * hg))

        def f(p):
            p = np.asarray(p)
            rte, rtm = _k.local_refl(w, eps, p, HBARC)
            fxx, fzz = _green_integrand(w, z_a, p, rte, rtm)
            return np.vstack([fxx, fzz])

    outer = _outer_settings(settings) if params.response == "scib" else settings
    res = _integrate_with_edge(f, breaks, outer, 1.0 / (2.0 * z_a),
                               edge if math.isfinite(edge) else None)
    hxx, hzz = res.value / (8.0 * math.pi)
    bx, by, bz = beta_diag(atom, w, T)
    tr = (bx + by) * hxx + bz * hzz
    val = -MU0_MUB2 / math.pi * tr
    err = MU0_MUB2 / math.pi * (abs(bx) + abs(by) + 2 * abs(bz)) * \
        res.error_estimate / (8.0 * math.pi)
    return DeltaValue(val, err, res.converged)


# ---------------------------------------------------------------------------
# Non-retarded and asymptotic forms
# ---------------------------------------------------------------------------

def delta_nonretarded(params: MaterialParams, atom: AtomParams, z_a: float,
                      omega: FrequencyPoint, T: float,
                      settings: QuadSettings) -> DeltaValue:
    """Delta = -(Phi/z^3) integral y^2 e^{-y} r_TE(omega, y/(2 z)) dy."""
    w = complex(omega.omega)
    ph = phi(atom, w, T)

    def f(y):
        out = np.empty(len(y), dtype=np.complex128)
        for i, yi in enumerate(y):
            if yi == 0.0:
                out[i] = 0.0
                continue
            rte, _, _ = reflection(params, omega, float(yi / (2.0 * z_a)),
                                   settings, T)
            out[i] = yi * yi * math.exp(-yi) * rte
        return out

    pts = {0.5, 1.0, 2.0, 4.0, 8.0, 14.0, 22.0, 32.0, 44.0}
    hg = params.gamma(T)
    if hg > 0.0:
        y_ell = 2.0 * z_a * hg / params.vf_energy_length
        pts.update(m * y_ell for m in (0.25, 1.0, 4.0) if m * y_ell < 0.4)
    breaks = np.array([0.0] + sorted(pts))
    outer = _outer_settings(settings) if params.response == "scib" else settings
    res = integrate_panels(f, breaks, outer, tail_scale=1.0)
    val = -(ph / z_a ** 3) * res.value
    return DeltaValue(val, abs(ph / z_a ** 3) * res.error_estimate, res.converged)


def delta_asym_nl(params: MaterialParams, atom: AtomParams, z_a: float,
                  omega: complex, T: float,
                  zero_gamma: bool = False) -> DeltaValue:
    """Short-distance nonlocal asymptotics of Delta.

    finite Gamma (z_a << ell):        4 i w Phi(w) ln[2 z_a/(g'_E ell)] / (vF lp^2)
    Gamma -> 0   (|w| -> 0):    (4/3) i w Phi(0) ln[(2/g'_E)^3 |w|/E_nl] / (vF lp^2)
    """
    vf = params.vf_energy_length
    lp2 = params.lambda_p_bar ** 2
    ok = True
    if zero_gamma:
        e_nl = (4.0 / (3.0 * math.pi)) * vf * lp2 / z_a ** 3
        lam_e_like = z_a <= ((2.0 / (3.0 * math.pi)) ** (1.0 / 3.0) *
                             (lp2 ** (1.0 / 3.0)) *
                             (params.vf_energy_length /
                              max(params.gamma(T), 1e-300)) ** (1.0 / 3.0))
        ok = abs(omega) < e_nl
        val = (4.0 / 3.0) * 1j * omega * phi(atom, 0.0, T) / (vf * lp2) * \
            math.log((2.0 / GAMMA_E_PRIME) ** 3 * abs(omega) / e_nl)
    else:
        hg = params.gamma(T)
        if hg <= 0.0:
            raise ValueError("finite-Gamma asymptote requires Gamma > 0")
        ell = vf / hg
        ok = z_a < ell and abs(omega) < hg
        val = 4.0 * 1j * omega * phi(atom, omega, T) / (vf * lp2) * \
            math.log(2.0 * z_a / (GAMMA_E_PRIME * ell))
    if not ok:
        warnings.warn("delta_asym_nl evaluated outside its validity regime")
    return DeltaValue(val, abs(val) * 0.05, ok)


# ---------------------------------------------------------------------------
# Mode density
# ---------------------------------------------------------------------------

def mode_density(params: MaterialParams, atom: AtomParams, z_a: float,
                 omega: float, T: float, settings: QuadSettings) -> DerivResult:
    """Differential mode density -d Im Delta/d omega at real omega (1/eV)."""
    if omega <= 0.0:
        raise ValueError("omega must be > 0")

    def im_delta(w):
        d = delta(params, atom, z_a, FrequencyPoint.real(w), T, settings)
        return d.value.imag

    d = derivative_central(im_delta, omega, 1e-3 * omega)
    return DerivResult(-d.value, d.error_estimate, d.converged)


def mode_density_dc(params: MaterialParams, atom: AtomParams, z_a: float,
                    T: float) -> float:
    """Zero-frequency mode density (1/eV).

    Local Drude: Phi(0)/(z_a D).  Nonlocal, valid for z_a << ell:
    -4 Phi(0) ln[2 z_a/(g'_E ell)] / (lambda_p^2 vF).  No blending between
    the regimes; a warning marks evaluations outside them.
    """
    hg = params.gamma(T)
    if hg <= 0.0:
        raise ValueError("dc mode density diverges for Gamma = 0")
    ph0 = float(phi(atom, 0.0, T).real)
    lam_p2 = params.lambda_p_bar ** 2
    if params.response == "scib":
        ell = params.vf_energy_length / hg
        if z_a > ell / 3.0:
            warnings.warn("nonlocal dc mode density used outside z_a << ell")
        return -4.0 * ph0 * math.log(2.0 * z_a / (GAMMA_E_PRIME * ell)) / \
            (lam_p2 * params.vf_energy_length)
    return ph0 / (z_a * hg * lam_p2)
