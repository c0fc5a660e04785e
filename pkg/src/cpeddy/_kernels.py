"""Numerical hot kernels.

Every kernel exists twice: a pure-numpy implementation and a numba-compiled
one.  The compiled path is used when numba imports successfully and the
environment variable ``CPEDDY_DISABLE_NUMBA`` is unset; setting it to ``1``
forces the numpy fallback (see ``benchmarks/bench_kernels.py`` for a timing
comparison of the two paths).

All kernels are pure functions of their arguments.
"""

from __future__ import annotations

import cmath
import math
import os

import numpy as np

_DISABLE = os.environ.get("CPEDDY_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")
HAS_NUMBA = False
if not _DISABLE:
    try:
        from numba import njit as _njit
        HAS_NUMBA = True
    except ImportError:      # pragma: no cover - depends on environment
        pass

BACKEND = "numba" if HAS_NUMBA else "numpy"

_SERIES_CUT = 100.0          # |u| above which the Laurent series is used
_TINY = 1e-300


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _arccoth_np(u):
    """arccoth(u) = log1p(2/(u-1))/2, stable for large |u|."""
    w = 2.0 / (u - 1.0)
    mag = 0.5 * np.log1p(2.0 * w.real + w.real * w.real + w.imag * w.imag)
    return 0.5 * (mag + 1j * np.arctan2(w.imag, 1.0 + w.real))


def _g_lt_np(u):
    """Longitudinal/transverse kernels for complex u off the cut [-1, 1]."""
    u = np.asarray(u, dtype=np.complex128)
    gl = np.empty_like(u)
    gt = np.empty_like(u)
    big = np.abs(u) > _SERIES_CUT
    if np.any(~big):
        us = u[~big]
        ua = us * _arccoth_np(us)
        gl[~big] = 1.0 - ua
        gt[~big] = 1.5 * (us * us - (us * us - 1.0) * ua)
    if np.any(big):
        x = 1.0 / (u[big] * u[big])
        gl[big] = -x * (1.0 / 3.0 + x * (1.0 / 5.0 + x * (1.0 / 7.0 + x / 9.0)))
        gt[big] = 1.0 + x * (1.0 / 5.0 + x * (3.0 / 35.0 + x * (1.0 / 21.0 + x / 33.0)))
    return gl, gt


def _g_lt_imag_np(w):
    """Same kernels at u = i*w with w > 0; both are real there."""
    w = np.asarray(w, dtype=np.float64)
    gl = np.empty_like(w)
    gt = np.empty_like(w)
    big = w > _SERIES_CUT
    if np.any(~big):
        ws = w[~big]
        wa = ws * np.arctan(1.0 / ws)
        gl[~big] = 1.0 - wa
        gt[~big] = 1.5 * (-ws * ws + (1.0 + ws * ws) * wa)
    if np.any(big):
        x = 1.0 / (w[big] * w[big])
        gl[big] = x * (1.0 / 3.0 - x * (1.0 / 5.0 - x * (1.0 / 7.0 - x / 9.0)))
        gt[big] = 1.0 - x * (1.0 / 5.0 - x * (3.0 / 35.0 - x * (1.0 / 21.0 - x / 33.0)))
    return gl, gt


def _kappa_np(w2):
    """Branch-fixed sqrt: Re > 0 where possible, else Im < 0."""
    w2 = np.asarray(w2, dtype=np.complex128)
    k = np.sqrt(w2)
    flip = (k.real < 0.0) | ((k.real == 0.0) & (k.imag > 0.0))
    return np.where(flip, -k, k)


def _local_refl_np(E, eps, p, hbarc):
    """Fresnel rTE, rTM from a local permittivity; p is an array (1/um)."""
    p = np.asarray(p, dtype=np.float64)
    w2 = (E * E) / (hbarc * hbarc)
    k0 = _kappa_np(p * p - w2)
    km = _kappa_np(p * p - eps * w2)
    rte = (k0 - km) / (k0 + km)
    rtm = (eps * k0 - km) / (eps * k0 + km)
    return rte, rtm


def _scib_q_integrand_np(E, p, q, hg, wp2, vf, hbarc):
    """Vacuum-subtracted TE and TM q-integrands of the impedance integrals.

    Subtracting the eps = 1 integrands (whose integrals are known exactly)
    avoids catastrophic cancellation when the reflection is weak.
    """
    q = np.asarray(q, dtype=np.float64)
    k2 = p * p + q * q
    k = np.sqrt(k2)
    G = E + 1j * hg
    u = G / (vf * k)
    gl, gt = _g_lt_np(u)
    eps_l = 1.0 + (wp2 / G) * 3.0 * u * u * gl / (E + 1j * hg * gl)
    eps_t = 1.0 - wp2 * gt / (E * G)
    w2 = (E * E) / (hbarc * hbarc)
    dte = eps_t * w2 - k2
    dvac = w2 - k2
    te = -(eps_t - 1.0) * w2 / (dte * dvac)
    tm = (-(q * q) * w2 * w2 * (eps_t - 1.0) / (dte * dvac)
          + p * p * (1.0 / eps_l - 1.0)) / k2
    return te, tm


def _scib_refl_imag_bulk_np(xis, ps, qn, wk, wg, hg, wp2, vf, hbarc):
    """rTE, rTM on the positive imaginary axis for all (xi, p) pairs.

    qn/wk/wg hold per-p quadrature nodes and the two embedded weight sets
    (jacobians included).  Everything is real on this axis.
    """
    nx = xis.shape[0]
    rte = np.empty((nx, ps.shape[0]))
    rtm = np.empty_like(rte)
    maxerr = 0.0
    chunk = max(1, int(4e6 / (ps.shape[0] * qn.shape[1] + 1)))
    ib2 = 1.0 / (hbarc * hbarc)
    for i0 in range(0, nx, chunk):
        xi = xis[i0:i0 + chunk, None, None]
        k2 = ps[None, :, None] ** 2 + qn[None, :, :] ** 2
        k = np.sqrt(k2)
        w = (xi + hg) / (vf * k)
        gl, gt = _g_lt_imag_np(w)
        et1 = wp2 * gt / (xi * (xi + hg))            # eps_t - 1
        eps_l = 1.0 + 3.0 * wp2 * w * w * gl / ((xi + hg) * (xi + hg * gl))
        x2 = xi * xi * ib2
        dte = -(1.0 + et1) * x2 - k2
        dvac = -x2 - k2
        te = et1 * x2 / (dte * dvac)
        tm = (-(qn[None, :, :] ** 2) * x2 * x2 * et1 / (dte * dvac)
              + ps[None, :, None] ** 2 * (1.0 / eps_l - 1.0)) / k2
        ite = np.sum(wk[None] * te, axis=2)
        ite7 = np.sum(wg[None] * te, axis=2)
        itm = np.sum(wk[None] * tm, axis=2)
        itm7 = np.sum(wg[None] * tm, axis=2)
        err = max(np.max(np.abs(ite - ite7) /
                         np.maximum(np.abs(ite), _TINY)),
                  np.max(np.abs(itm - itm7) /
                         np.maximum(np.abs(itm), _TINY)))
        maxerr = max(maxerr, err)
        k0 = np.sqrt(ps[None, :] ** 2 + xis[i0:i0 + chunk, None] ** 2 * ib2)
        dzte = -(2.0 * k0 / math.pi) * ite           # zte - 1
        dztm = (2.0 / (math.pi * k0)) * itm          # ztm - 1
        rte[i0:i0 + chunk] = dzte / (2.0 + dzte)
        rtm[i0:i0 + chunk] = -dztm / (2.0 + dztm)
    return rte, rtm, maxerr


def _scib_refl_cut_bulk_np(E, ps, qn, wk, n_lin, b_end, hg, wp2, vf, hbarc,
                           has_pole, kstar, dDdk):
    """rTE, rTM at one complex E right of the overdamped cut, for all p.

    The TE integrand's near-real pole sits at fixed k = kstar for every p;
    it is subtracted inside the first n_lin (linear-panel) nodes and its
    integral restored in closed form.
    """
    npp = ps.shape[0]
    rte = np.empty(npp, dtype=np.complex128)
    rtm = np.empty(npp, dtype=np.complex128)
    w2 = (E * E) / (hbarc * hbarc)
    for j in range(npp):
        p = ps[j]
        te, tm = _scib_q_integrand_np(E, p, qn, hg, wp2, vf, hbarc)
        ite = 0.0 + 0.0j
        itm = 0.0 + 0.0j
        sub = False
        if has_pole:
            q2 = kstar * kstar - p * p
            qs = np.sqrt(q2)
            if qs.real < 0.0:
                qs = -qs
            if qs.real > 0.0 and abs(qs.imag) < 0.5 * qs.real:
                dq = dDdk * qs / kstar
                r_te = 1.0 / dq
                r_tm = (qs * qs * w2) / (dq * (p * p + qs * qs))
                sub = True
        if sub:
            s = 1.0 / (qn[:n_lin] - qs)
            ite = np.sum(wk[:n_lin] * (te[:n_lin] - r_te * s))
            itm = np.sum(wk[:n_lin] * (tm[:n_lin] - r_tm * s))
            ite += np.sum(wk[n_lin:] * te[n_lin:])
            itm += np.sum(wk[n_lin:] * tm[n_lin:])
            corr = np.log(b_end - qs) - np.log(-qs)
            ite += r_te * corr
            itm += r_tm * corr
        else:
            ite = np.sum(wk * te)
            itm = np.sum(wk * tm)
        k0 = np.sqrt(p * p - w2)
        if k0.real < 0.0 or (k0.real == 0.0 and k0.imag > 0.0):
            k0 = -k0
        dzte = -(2.0 * k0 / math.pi) * ite
        dztm = (2.0 / (math.pi * k0)) * itm
        rte[j] = dzte / (2.0 + dzte)
        rtm[j] = -dztm / (2.0 + dztm)
    return rte, rtm


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @_njit(cache=True, nogil=True)
    def _g_lt_scalar(u):
        if abs(u) > _SERIES_CUT:
            x = 1.0 / (u * u)
            gl = -x * (1.0 / 3.0 + x * (1.0 / 5.0 + x * (1.0 / 7.0 + x / 9.0)))
            gt = 1.0 + x * (1.0 / 5.0 + x * (3.0 / 35.0 + x * (1.0 / 21.0 + x / 33.0)))
        else:
            w = 2.0 / (u - 1.0)
            mag = 0.5 * math.log1p(2.0 * w.real + w.real * w.real + w.imag * w.imag)
            ac = 0.5 * complex(mag, math.atan2(w.imag, 1.0 + w.real))
            ua = u * ac
            gl = 1.0 - ua
            gt = 1.5 * (u * u - (u * u - 1.0) * ua)
        return gl, gt

    @_njit(cache=True, nogil=True)
    def _g_lt_nb(u):
        n = u.shape[0]
        gl = np.empty(n, dtype=np.complex128)
        gt = np.empty(n, dtype=np.complex128)
        for i in range(n):
            gl[i], gt[i] = _g_lt_scalar(u[i])
        return gl, gt

    @_njit(cache=True, nogil=True)
    def _g_lt_imag_scalar(w):
        if w > _SERIES_CUT:
            x = 1.0 / (w * w)
            gl = x * (1.0 / 3.0 - x * (1.0 / 5.0 - x * (1.0 / 7.0 - x / 9.0)))
            gt = 1.0 - x * (1.0 / 5.0 - x * (3.0 / 35.0 - x * (1.0 / 21.0 - x / 33.0)))
        else:
            wa = w * math.atan(1.0 / w)
            gl = 1.0 - wa
            gt = 1.5 * (-w * w + (1.0 + w * w) * wa)
        return gl, gt

    @_njit(cache=True, nogil=True)
    def _g_lt_imag_nb(w):
        n = w.shape[0]
        gl = np.empty(n, dtype=np.float64)
        gt = np.empty(n, dtype=np.float64)
        for i in range(n):
            gl[i], gt[i] = _g_lt_imag_scalar(w[i])
        return gl, gt

    @_njit(cache=True, nogil=True)
    def _kappa_nb(w2):
        n = w2.shape[0]
        out = np.empty(n, dtype=np.complex128)
        for i in range(n):
            k = cmath.sqrt(w2[i])
            if k.real < 0.0 or (k.real == 0.0 and k.imag > 0.0):
                k = -k
            out[i] = k
        return out

    @_njit(cache=True, nogil=True)
    def _local_refl_nb(E, eps, p, hbarc):
        n = p.shape[0]
        rte = np.empty(n, dtype=np.complex128)
        rtm = np.empty(n, dtype=np.complex128)
        w2 = (E * E) / (hbarc * hbarc)
        for i in range(n):
            pp = p[i] * p[i]
            k0 = cmath.sqrt(pp - w2)
            if k0.real < 0.0 or (k0.real == 0.0 and k0.imag > 0.0):
                k0 = -k0
            km = cmath.sqrt(pp - eps * w2)
            if km.real < 0.0 or (km.real == 0.0 and km.imag > 0.0):
                km = -km
            rte[i] = (k0 - km) / (k0 + km)
            rtm[i] = (eps * k0 - km) / (eps * k0 + km)
        return rte, rtm

    @_njit(cache=True, nogil=True)
    def _scib_q_integrand_nb(E, p, q, hg, wp2, vf, hbarc):
        n = q.shape[0]
        te = np.empty(n, dtype=np.complex128)
        tm = np.empty(n, dtype=np.complex128)
        G = E + 1j * hg
        w2 = (E * E) / (hbarc * hbarc)
        pp = p * p
        for i in range(n):
            k2 = pp + q[i] * q[i]
            k = math.sqrt(k2)
            u = G / (vf * k)
            gl, gt = _g_lt_scalar(u)
            eps_l = 1.0 + (wp2 / G) * 3.0 * u * u * gl / (E + 1j * hg * gl)
            et1 = -wp2 * gt / (E * G)
            dte = (1.0 + et1) * w2 - k2
            dvac = w2 - k2
            te[i] = -et1 * w2 / (dte * dvac)
            tm[i] = (-(q[i] * q[i]) * w2 * w2 * et1 / (dte * dvac)
                     + pp * (1.0 / eps_l - 1.0)) / k2
        return te, tm

    @_njit(cache=True, nogil=True)
    def _scib_refl_imag_bulk_nb(xis, ps, qn, wk, wg, hg, wp2, vf, hbarc):
        nx = xis.shape[0]
        npp = ps.shape[0]
        nq = qn.shape[1]
        rte = np.empty((nx, npp))
        rtm = np.empty((nx, npp))
        maxerr = 0.0
        ib2 = 1.0 / (hbarc * hbarc)
        for i in range(nx):
            xi = xis[i]
            xg = xi + hg
            x2 = xi * xi * ib2
            for j in range(npp):
                p = ps[j]
                pp = p * p
                ite = 0.0
                ite7 = 0.0
                itm = 0.0
                itm7 = 0.0
                for m in range(nq):
                    q = qn[j, m]
                    k2 = pp + q * q
                    k = math.sqrt(k2)
                    w = xg / (vf * k)
                    gl, gt = _g_lt_imag_scalar(w)
                    et1 = wp2 * gt / (xi * xg)
                    eps_l = 1.0 + 3.0 * wp2 * w * w * gl / (xg * (xi + hg * gl))
                    dte = -(1.0 + et1) * x2 - k2
                    dvac = -x2 - k2
                    te = et1 * x2 / (dte * dvac)
                    tm = (-(q * q) * x2 * x2 * et1 / (dte * dvac)
                          + pp * (1.0 / eps_l - 1.0)) / k2
                    ite += wk[j, m] * te
                    ite7 += wg[j, m] * te
                    itm += wk[j, m] * tm
                    itm7 += wg[j, m] * tm
                err = abs(ite - ite7) / max(abs(ite), _TINY)
                errm = abs(itm - itm7) / max(abs(itm), _TINY)
                if errm > err:
                    err = errm
                if err > maxerr:
                    maxerr = err
                k0 = math.sqrt(pp + x2)
                dzte = -(2.0 * k0 / math.pi) * ite
                dztm = (2.0 / (math.pi * k0)) * itm
                rte[i, j] = dzte / (2.0 + dzte)
                rtm[i, j] = -dztm / (2.0 + dztm)
        return rte, rtm, maxerr

    @_njit(cache=True, nogil=True)
    def _scib_refl_cut_bulk_nb(E, ps, qn, wk, n_lin, b_end, hg, wp2, vf, hbarc,
                               has_pole, kstar, dDdk):
        npp = ps.shape[0]
        nq = qn.shape[0]
        rte = np.empty(npp, dtype=np.complex128)
        rtm = np.empty(npp, dtype=np.complex128)
        w2 = (E * E) / (hbarc * hbarc)
        G = E + 1j * hg
        for j in range(npp):
            p = ps[j]
            pp = p * p
            sub = False
            qs = 0.0 + 0.0j
            r_te = 0.0 + 0.0j
            r_tm = 0.0 + 0.0j
            if has_pole:
                qs = cmath.sqrt(kstar * kstar - pp)
                if qs.real < 0.0:
                    qs = -qs
                if qs.real > 0.0 and abs(qs.imag) < 0.5 * qs.real:
                    dq = dDdk * qs / kstar
                    r_te = 1.0 / dq
                    r_tm = (qs * qs * w2) / (dq * (pp + qs * qs))
                    sub = True
            ite = 0.0 + 0.0j
            itm = 0.0 + 0.0j
            for m in range(nq):
                q = qn[m]
                k2 = pp + q * q
                k = math.sqrt(k2)
                u = G / (vf * k)
                gl, gt = _g_lt_scalar(u)
                eps_l = 1.0 + (wp2 / G) * 3.0 * u * u * gl / (E + 1j * hg * gl)
                et1 = -wp2 * gt / (E * G)
                dte = (1.0 + et1) * w2 - k2
                dvac = w2 - k2
                te = -et1 * w2 / (dte * dvac)
                tm = (-(q * q) * w2 * w2 * et1 / (dte * dvac)
                      + pp * (1.0 / eps_l - 1.0)) / k2
                if sub and m < n_lin:
                    s = 1.0 / (q - qs)
                    te = te - r_te * s
                    tm = tm - r_tm * s
                ite += wk[m] * te
                itm += wk[m] * tm
            if sub:
                corr = cmath.log(b_end - qs) - cmath.log(-qs)
                ite += r_te * corr
                itm += r_tm * corr
            k0 = cmath.sqrt(pp - w2)
            if k0.real < 0.0 or (k0.real == 0.0 and k0.imag > 0.0):
                k0 = -k0
            dzte = -(2.0 * k0 / math.pi) * ite
            dztm = (2.0 / (math.pi * k0)) * itm
            rte[j] = dzte / (2.0 + dzte)
            rtm[j] = -dztm / (2.0 + dztm)
        return rte, rtm

    def g_lt(u):
        return _g_lt_nb(np.ascontiguousarray(u.ravel()))

    g_lt_imag = _g_lt_imag_nb
    kappa_branch = _kappa_nb
    local_refl = _local_refl_nb
    scib_q_integrand = _scib_q_integrand_nb
    scib_refl_imag_bulk = _scib_refl_imag_bulk_nb
    scib_refl_cut_bulk = _scib_refl_cut_bulk_nb
else:
    def g_lt(u):
        gl, gt = _g_lt_np(u.ravel())
        return gl, gt

    g_lt_imag = _g_lt_imag_np
    kappa_branch = _kappa_np
    local_refl = _local_refl_np
    scib_q_integrand = _scib_q_integrand_np
    scib_refl_imag_bulk = _scib_refl_imag_bulk_np
    scib_refl_cut_bulk = _scib_refl_cut_bulk_np
