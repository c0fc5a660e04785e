"""Adaptive quadrature, semi-infinite integrals, numerical differentiation.

The quadrature uses an embedded Gauss-Kronrod 7/15 pair.  Integrands are
called vectorized: ``f(x)`` receives a 1-D array of abscissae and returns
either an array of the same length or a ``(m, len(x))`` array for
vector-valued integrands.  All routines are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Gauss-Kronrod 7/15 nodes on [-1, 1]; Gauss weights are zero at the
# Kronrod-only nodes.
_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_WG = np.array([
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
])


@dataclass(frozen=True)
class QuadSettings:
    """Tolerances and limits shared by all quadrature routines."""

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 400
    tail_decay_scale: float = 1.0

    def __post_init__(self):
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be > 0")
        if self.abs_tol < 0.0:
            raise ValueError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.tail_decay_scale <= 0.0:
            raise ValueError("tail_decay_scale must be > 0")


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error_estimate: float
    converged: bool


@dataclass(frozen=True)
class DerivResult:
    value: float
    error_estimate: float
    converged: bool


def _tolerance(settings, value_norm):
    return max(settings.rel_tol * value_norm, settings.abs_tol)


class _Panel:
    """One integration panel; ``kind`` 0 is linear in y, 1 a mapped tail.

    A tail panel integrates y in [y0, inf) through y = y0 + s*t/(1-t) with
    the panel covering [a, b] in t-space.
    """

    __slots__ = ("kind", "a", "b", "y0", "s", "value", "error")

    def __init__(self, kind, a, b, y0=0.0, s=1.0):
        self.kind = kind
        self.a = a
        self.b = b
        self.y0 = y0
        self.s = s
        self.value = None
        self.error = 0.0

    def nodes(self):
        c = 0.5 * (self.a + self.b)
        h = 0.5 * (self.b - self.a)
        t = c + h * _NODES
        if self.kind == 0:
            return t, h * _WK, h * _WG
        y = self.y0 + self.s * t / (1.0 - t)
        jac = self.s / (1.0 - t) ** 2
        return y, h * _WK * jac, h * _WG * jac

    def split(self):
        m = 0.5 * (self.a + self.b)
        return (_Panel(self.kind, self.a, m, self.y0, self.s),
                _Panel(self.kind, m, self.b, self.y0, self.s))


def _evaluate(f, panels):
    """Fill value/error of the given panels with a single integrand call."""
    xs = []
    wks = []
    wgs = []
    for p in panels:
        x, wk, wg = p.nodes()
        xs.append(x)
        wks.append(wk)
        wgs.append(wg)
    x = np.concatenate(xs)
    fx = np.asarray(f(x))
    if np.any(~np.isfinite(fx)):
        raise ValueError("integrand returned a non-finite value")
    if fx.ndim == 1:
        fx = fx[None, :]
    n = 0
    for p, wk, wg in zip(panels, wks, wgs):
        m = len(wk)
        block = fx[:, n:n + m]
        i15 = block @ wk
        i7 = block @ wg
        p.value = i15
        # Kronrod practice: temper the raw |K15-G7| difference by the
        # scaled variation of the integrand so mild kinks do not dominate
        diff = float(np.max(np.abs(i15 - i7)))
        wsum = float(np.sum(np.abs(wk)))
        if wsum > 0.0:
            mean = i15 / wsum
            resasc = float(np.max(np.abs(block - mean[:, None]) @ np.abs(wk)))
        else:
            resasc = 0.0
        if resasc > 0.0 and diff < resasc:
            diff = resasc * min(1.0, (200.0 * diff / resasc) ** 1.5)
        p.error = diff
        n += m


def _run_adaptive(f, panels, settings):
    """Adaptive bisection on a panel list; returns (value, error, converged)."""
    _evaluate(f, panels)
    while True:
        total = sum(p.value for p in panels)
        err = sum(p.error for p in panels)
        norm = float(np.max(np.abs(total)))
        if err <= _tolerance(settings, norm):
            return total, err, True
        if len(panels) >= settings.max_subdivisions:
            return total, err, False
        worst = max(range(len(panels)), key=lambda i: panels[i].error)
        left, right = panels[worst].split()
        _evaluate(f, [left, right])
        panels[worst] = left
        panels.insert(worst + 1, right)


def integrate_adaptive(f, a: float, b: float, settings: QuadSettings) -> QuadResult:
    """Adaptive Gauss-Kronrod integration of f over [a, b]."""
    if not a < b:
        raise ValueError("require a < b")
    value, err, ok = _run_adaptive(f, [_Panel(0, a, b)], settings)
    return QuadResult(complex(value[0]), err, ok)


def integrate_semi_infinite(f, a: float, settings: QuadSettings) -> QuadResult:
    """Integral of f over [a, inf) via the map y = a + s*t/(1-t).

    The integrand must decay at least like 1/y^2 beyond
    ``settings.tail_decay_scale``.
    """
    s = settings.tail_decay_scale
    panels = [_Panel(1, t0, t1, y0=a, s=s)
              for t0, t1 in ((0.0, 0.5), (0.5, 0.8), (0.8, 0.95), (0.95, 1.0))]
    value, err, ok = _run_adaptive(f, panels, settings)
    return QuadResult(complex(value[0]), err, ok)


def integrate_panels(f, breaks, settings: QuadSettings,
                     tail_scale: float | None = None) -> QuadResult:
    """Composite quadrature over fixed breakpoints, optionally plus a tail.

    ``breaks`` is an increasing sequence; a mapped tail [breaks[-1], inf) is
    appended when ``tail_scale`` is given.  Panels are refined adaptively
    only if the fixed structure misses the tolerance.  Vector-valued
    integrands are allowed; the value keeps their shape.
    """
    breaks = np.asarray(breaks, dtype=np.float64)
    if breaks.ndim != 1 or len(breaks) < 2 or np.any(np.diff(breaks) <= 0):
        raise ValueError("breaks must be strictly increasing with >= 2 entries")
    panels = [_Panel(0, breaks[i], breaks[i + 1]) for i in range(len(breaks) - 1)]
    if tail_scale is not None:
        panels += [_Panel(1, t0, t1, y0=float(breaks[-1]), s=tail_scale)
                   for t0, t1 in ((0.0, 0.7), (0.7, 0.95), (0.95, 1.0))]
    value, err, ok = _run_adaptive(f, panels, settings)
    if value.shape[0] == 1:
        return QuadResult(complex(value[0]), err, ok)
    return QuadResult(value, err, ok)


def panel_nodes(breaks, tail_scale: float | None = None):
    """Nodes and embedded weight pairs of the fixed composite rule.

    Returns (y, w15, w7) with jacobians folded into the weights; used to
    drive the compiled bulk kernels with exactly the same rule as
    ``integrate_panels``.
    """
    breaks = np.asarray(breaks, dtype=np.float64)
    panels = [_Panel(0, breaks[i], breaks[i + 1]) for i in range(len(breaks) - 1)]
    if tail_scale is not None:
        panels += [_Panel(1, t0, t1, y0=float(breaks[-1]), s=tail_scale)
                   for t0, t1 in ((0.0, 0.7), (0.7, 0.95), (0.95, 1.0))]
    ys = []
    w15 = []
    w7 = []
    for p in panels:
        y, wk, wg = p.nodes()
        ys.append(y)
        w15.append(wk)
        w7.append(wg)
    return np.concatenate(ys), np.concatenate(w15), np.concatenate(w7)


def arccoth_complex(u):
    """arccoth(u) = log((u+1)/(u-1))/2 with the principal logarithm.

    Undefined on the real interval [-1, 1]; continuous on each half-plane.
    """
    arr = np.asarray(u, dtype=np.complex128)
    if np.any((arr.imag == 0.0) & (np.abs(arr.real) <= 1.0)):
        raise ValueError("arccoth is undefined on the real interval [-1, 1]")
    # log1p form keeps full precision for large |u|
    w = 2.0 / (arr - 1.0)
    mag = 0.5 * np.log1p(2.0 * w.real + w.real * w.real + w.imag * w.imag)
    out = 0.5 * (mag + 1j * np.arctan2(w.imag, 1.0 + w.real))
    if np.isscalar(u) or arr.ndim == 0:
        return complex(out)
    return out


def derivative_central(f, x: float, h0: float, levels: int = 3) -> DerivResult:
    """Central difference with Richardson extrapolation over halved steps.

    ``f`` maps a float to a float.  The result is flagged non-converged when
    the extrapolation table does not improve monotonically.
    """
    if h0 <= 0.0:
        raise ValueError("h0 must be > 0")
    if levels < 3:
        raise ValueError("need at least 3 step halvings")
    d = []
    for k in range(levels):
        h = h0 / 2.0 ** k
        d.append((f(x + h) - f(x - h)) / (2.0 * h))
    # Richardson table; errors scale as h^2, h^4, ...
    table = [list(d)]
    for j in range(1, levels):
        prev = table[-1]
        fac = 4.0 ** j
        table.append([(fac * prev[k + 1] - prev[k]) / (fac - 1.0)
                      for k in range(len(prev) - 1)])
    diag = [table[j][-1] for j in range(levels)]
    steps = [abs(diag[j + 1] - diag[j]) for j in range(levels - 1)]
    err = steps[-1] if steps else math.inf
    floor = 1e-12 * abs(diag[-1]) + 1e-300
    monotone = (err <= floor or
                all(steps[i + 1] <= max(steps[i], floor)
                    for i in range(len(steps) - 1)))
    return DerivResult(diag[-1], err, monotone)
