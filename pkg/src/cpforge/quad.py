"""Adaptive Gauss-Kronrod quadrature shared by the physics modules.

The integrators accept vectorised integrands: ``f(x)`` receives a 1-D
array of abscissae and returns an array whose *last* axis runs over
those abscissae.  Leading axes are treated as independent components
that are integrated simultaneously on a common adaptive mesh, which is
how the nested (u, b) integrals are evaluated without a Python loop over
the outer nodes.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

# 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15), nodes on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes x_1, x_3, x_5 and 0.
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]

# Relative accuracy is measured against max(|I|, _CANCEL * int|f|) so that
# integrals with near-complete cancellation still terminate.
_CANCEL = 1e-3
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive integrators.

    ``t_max`` truncates exponentially weighted integrals after mapping the
    weight to exp(-t); exp(-40) ~ 4e-18.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 400
    t_max: float = 40.0

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")

    def tightened(self, factor: float = 10.0) -> "QuadratureSpec":
        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)


@dataclass
class QuadResult:
    value: float | np.ndarray
    error: float | np.ndarray
    converged: bool
    n_eval: int
    l1: float | np.ndarray = 0.0

    def __iter__(self):
        # allows ``value, err = integrate(...)``
        yield self.value
        yield self.error


def _rule(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * NODES
    y = np.asarray(f(x))
    k = half * (y @ KRONROD_WEIGHTS)
    g = half * (y @ GAUSS_WEIGHTS)
    l1 = abs(half) * (np.abs(y) @ KRONROD_WEIGHTS)
    err = np.abs(k - g)
    return k, err, l1


def gauss_kronrod(
    f: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    breakpoints=(),
    component_floor: float = 0.0,
) -> QuadResult:
    """Globally adaptive G7-K15 integration of ``f`` over [a, b].

    For vector-valued integrands each component must meet the tolerance;
    ``component_floor`` measures small components against
    ``component_floor * max|I|`` instead of their own magnitude.
    """
    spec = spec or QuadratureSpec()
    pts = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    heap = []
    total = 0.0
    total_err = 0.0
    total_l1 = 0.0
    n_eval = 0
    counter = 0
    for lo, hi in zip(pts[:-1], pts[1:]):
        k, err, l1 = _rule(f, lo, hi)
        n_eval += 15
        total = total + k
        total_err = total_err + err
        total_l1 = total_l1 + l1
        heap.append((-float(np.max(err)), counter, lo, hi, k, err, l1))
        counter += 1
    heapq.heapify(heap)

    def tolerance():
        scale = np.maximum(np.abs(total), _CANCEL * total_l1)
        if component_floor:
            scale = np.maximum(scale, component_floor * np.max(scale))
        return np.maximum(np.maximum(spec.abs_tol, spec.rel_tol * scale), _TINY)

    n_sub = 0
    converged = bool(np.all(total_err <= tolerance()))
    while not converged and n_sub < spec.max_subdivisions:
        # split the interval that contributes the largest error relative to the target
        _, _, lo, hi, k, err, l1 = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        k1, e1, l1a = _rule(f, lo, mid)
        k2, e2, l1b = _rule(f, mid, hi)
        n_eval += 30
        total = total - k + k1 + k2
        total_err = total_err - err + e1 + e2
        total_l1 = total_l1 - l1 + l1a + l1b
        tol = tolerance()
        heapq.heappush(heap, (-float(np.max(e1 / tol)), counter, lo, mid, k1, e1, l1a))
        heapq.heappush(heap, (-float(np.max(e2 / tol)), counter + 1, mid, hi, k2, e2, l1b))
        counter += 2
        n_sub += 1
        converged = bool(np.all(total_err <= tol))

    # re-sum from the leaves to limit accumulated cancellation error
    value = sum(item[4] for item in heap)
    err = sum(item[5] for item in heap)
    l1 = sum(item[6] for item in heap)
    if not np.all(np.isfinite(value)):
        converged = False
    return QuadResult(_scalar(value), _scalar(err), converged, n_eval, _scalar(l1))


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def integrate(f, a, b, spec=None, breakpoints=()) -> QuadResult:
    """Integrate over [a, b]; an infinite upper limit is mapped to (0, 1)."""
    if math.isinf(b):
        return integrate_semi_infinite(f, spec, lower=a)
    return gauss_kronrod(f, a, b, spec, breakpoints)


def integrate_semi_infinite(
    f: Callable,
    spec: QuadratureSpec | None = None,
    scale: float = 1.0,
    lower: float = 0.0,
) -> QuadResult:
    """Integrate ``f`` over [lower, inf) via t = lower + scale * x / (1 - x).

    ``scale`` should be the characteristic decay length of the integrand;
    half of the mapped interval then covers [lower, lower + scale].
    """
    if not scale > 0:
        raise ValueError("scale must be > 0")

    def mapped(x):
        one_minus = 1.0 - x
        t = lower + scale * x / one_minus
        with np.errstate(under="ignore"):
            return np.asarray(f(t)) * (scale / one_minus**2)

    return gauss_kronrod(mapped, 0.0, 1.0, spec)


def principal_value(
    f: Callable,
    pole: float,
    a: float = 0.0,
    b: float = math.inf,
    spec: QuadratureSpec | None = None,
    half_width: float | None = None,
    tail_scale: float | None = None,
) -> QuadResult:
    """Cauchy principal value of  int_a^b f(w) / (pole - w) dw.

    Inside the window [pole - h, pole + h] the two mirror points are paired,
    int_0^h [f(pole - s) - f(pole + s)] / s ds, which is the subtracted
    integrand with the f(pole) term cancelling exactly.  The remaining parts
    of [a, b] are regular.  With ``h`` defaulting to pole/2 the window is
    [pole/2, 3 pole/2].  A pole outside (a, b) gives a plain integral.
    """
    spec = spec or QuadratureSpec()

    def plain(w):
        return np.asarray(f(w)) / (pole - w)

    if not (a < pole < b):
        return integrate(plain, a, b, spec)

    h = 0.5 * abs(pole) if half_width is None else half_width
    h = min(h, pole - a, b - pole)
    if not h > 0:
        raise ValueError("principal value window collapsed")

    def folded(s):
        return (np.asarray(f(pole - s)) - np.asarray(f(pole + s))) / s

    parts = [gauss_kronrod(folded, 0.0, h, spec)]
    if pole - h > a:
        parts.append(gauss_kronrod(plain, a, pole - h, spec))
    if pole + h < b:
        if math.isinf(b):
            scale = tail_scale if tail_scale is not None else max(pole, 1e-300)
            parts.append(integrate_semi_infinite(plain, spec, scale=scale, lower=pole + h))
        else:
            parts.append(gauss_kronrod(plain, pole + h, b, spec))
    return QuadResult(
        _scalar(sum(p.value for p in parts)),
        _scalar(sum(p.error for p in parts)),
        all(p.converged for p in parts),
        sum(p.n_eval for p in parts),
        _scalar(sum(p.l1 for p in parts)),
    )
