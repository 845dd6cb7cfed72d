"""Planar multilayer geometry and generalized reflection coefficients.

Layers are numbered 0..n from left to right; layers 0 and n are
semi-infinite.  The atom sits in the vacuum layer ``atom_layer`` (j) and
z is measured from the left boundary of that layer.

All coefficients are evaluated at imaginary frequency u (rad/s) and are
real.  Every function accepts numpy arrays for u and the wave number and
broadcasts them.  Two entry points exist for each quantity: one in terms
of the transverse wave number q, and one (suffix ``_b``) in terms of the
vacuum axial decay constant b = sqrt(u^2/c^2 + q^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.constants import c

from .materials import Material

SIDES = ("-", "+")
POLARIZATIONS = ("s", "p")


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness: float = math.inf


@dataclass(frozen=True)
class LayerStack:
    """Ordered layers plus the index of the vacuum layer holding the atom."""

    layers: tuple[Layer, ...]
    atom_layer: int

    def __post_init__(self):
        layers = tuple(
            l if isinstance(l, Layer) else Layer(*l) for l in self.layers
        )
        object.__setattr__(self, "layers", layers)
        n = len(layers) - 1
        if n < 1:
            raise ValueError("a stack needs at least two layers")
        j = self.atom_layer
        if not 0 <= j <= n:
            raise ValueError(f"atom layer {j} outside 0..{n}")
        if not layers[j].material.is_vacuum:
            raise ValueError(f"atom layer {j} must be vacuum")
        for l, layer in enumerate(layers[1:-1], start=1):
            if not (0 < layer.thickness < math.inf):
                raise ValueError(f"inner layer {l} needs a finite positive thickness")

    @property
    def n(self) -> int:
        return len(self.layers) - 1

    @property
    def is_outer(self) -> bool:
        return self.atom_layer in (0, self.n)

    @property
    def atom_thickness(self) -> float:
        """d_j; infinite when the atom is in an outer layer."""
        return math.inf if self.is_outer else self.layers[self.atom_layer].thickness

    def mirrored(self) -> "LayerStack":
        return LayerStack(tuple(reversed(self.layers)), self.n - self.atom_layer)

    @property
    def max_resonance(self) -> float:
        return max(l.material.max_resonance for l in self.layers)

    @property
    def min_resonance(self) -> float:
        vals = [l.material.min_resonance for l in self.layers if not l.material.is_vacuum]
        return min(vals, default=0.0)

    @classmethod
    def half_space(cls, m: Material) -> "LayerStack":
        """Medium filling z < 0, atom in vacuum at z > 0 (n = j = 1)."""
        return cls((Layer(m), Layer(Material.vacuum())), 1)

    @classmethod
    def slab(cls, m: Material, d: float) -> "LayerStack":
        """Plate of thickness d between two vacuum half spaces, atom on the right (n = j = 2)."""
        v = Material.vacuum()
        return cls((Layer(v), Layer(m, d), Layer(v)), 2)

    @classmethod
    def cavity(cls, m: Material, s: float, m_right: Material | None = None) -> "LayerStack":
        """Two half spaces separated by a vacuum gap s, atom inside (n = 2, j = 1)."""
        right = m if m_right is None else m_right
        return cls((Layer(m), Layer(Material.vacuum(), s), Layer(right)), 1)

    @classmethod
    def from_layers(cls, spec: Sequence[tuple[Material, float]], atom_layer: int) -> "LayerStack":
        return cls(tuple(Layer(m, d) for m, d in spec), atom_layer)


@dataclass
class ReflectionSet:
    r_s_minus: np.ndarray
    r_s_plus: np.ndarray
    r_p_minus: np.ndarray
    r_p_plus: np.ndarray
    D_s: np.ndarray
    D_p: np.ndarray


def vacuum_b(u, q):
    u = np.asarray(u, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.sqrt((u / c) ** 2 + q * q)


def _index_excess(m: Material, u):
    """eps(iu) mu(iu) - 1 from the susceptibilities."""
    xe = m.electric_susceptibility_imag(u)
    xm = m.magnetic_susceptibility_imag(u)
    return xe + xm + xe * xm


def medium_b(m: Material, u, b):
    """Axial decay constant in a medium, written in terms of the vacuum b.

    b_M = sqrt(u^2/c^2 (eps mu - 1) + b^2); always >= b for passive media.
    """
    u = np.asarray(u, dtype=float)
    return np.sqrt((u / c) ** 2 * _index_excess(m, u) + np.asarray(b) ** 2)


@dataclass(frozen=True)
class _LayerData:
    chi: tuple  # (eps - 1, mu - 1)
    excess: np.ndarray  # eps mu - 1
    b: np.ndarray
    thickness: float


def _layer_data(stack: LayerStack, u, b):
    """Per-layer susceptibilities, decay constants and thicknesses at (u, b)."""
    out = []
    for layer in stack.layers:
        m = layer.material
        if m.is_vacuum:
            out.append(_LayerData((0.0, 0.0), 0.0, b, layer.thickness))
        else:
            xe = m.electric_susceptibility_imag(u)
            xm = m.magnetic_susceptibility_imag(u)
            excess = xe + xm + xe * xm
            bl = np.sqrt((u / c) ** 2 * excess + b * b)
            out.append(_LayerData((xe, xm), excess, bl, layer.thickness))
    return out


def _fresnel(nxt: _LayerData, here: _LayerData, idx: int, u):
    """(x' b - x b')/(x' b + x b') with x = eps or mu, free of cancellation.

    The numerator x'^2 b^2 - x^2 b'^2 is written as
    [(x'^2 - x^2)(b^2 + b'^2) + (x'^2 + x^2)(b^2 - b'^2)] / 2 with
    x'^2 - x^2 = (chi' - chi)(2 + chi' + chi) and
    b^2 - b'^2 = (u/c)^2 [(eps mu)_here - (eps mu)_next].  Nearly matched
    interfaces keep full relative accuracy, and swapping the two layers
    flips the sign exactly, so a symmetric plate gives r = 0 at d = 0.
    """
    chi_n, chi_h = nxt.chi[idx], here.chi[idx]
    x_n, x_h = 1.0 + chi_n, 1.0 + chi_h
    dx2 = (chi_n - chi_h) * (2.0 + (chi_n + chi_h))
    sx2 = x_n * x_n + x_h * x_h
    db2 = (u / c) ** 2 * (here.excess - nxt.excess)
    sb2 = here.b * here.b + nxt.b * nxt.b
    den = x_n * here.b + x_h * nxt.b
    return 0.5 * (dx2 * sb2 + sx2 * db2) / (den * den)


def _recursion(data, u, j, side, pol):
    """Generalized coefficient r_{j,side} built from the outermost layer inward.

    Each step is r_l = (rho + E r') / (1 + rho E r') with rho the single
    interface coefficient and E = exp(-2 b' d'); the numerator is evaluated
    as (rho + r') + expm1(-2 b' d') r' to keep thin layers accurate.
    """
    n = len(data) - 1
    idx = 0 if pol == "p" else 1  # p uses eps, s uses mu
    if side == "-":
        order = range(1, j + 1)
        step = -1
    else:
        order = range(n - 1, j - 1, -1)
        step = +1
    r = None
    for l in order:
        nxt = data[l + step]
        rho = _fresnel(nxt, data[l], idx, u)
        if r is None:
            r = rho
            continue
        em1 = np.expm1(-2.0 * nxt.b * nxt.thickness)
        r = ((rho + r) + em1 * r) / (1.0 + rho * (1.0 + em1) * r)
    return 0.0 if r is None else r


def reflection_recursive_b(stack: LayerStack, side: str, polarization: str, u, b):
    if side not in SIDES:
        raise ValueError(f"side must be '-' or '+', got {side!r}")
    if polarization not in POLARIZATIONS:
        raise ValueError(f"polarization must be 's' or 'p', got {polarization!r}")
    u, b = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(b, dtype=float))
    data = _layer_data(stack, u, b)
    with np.errstate(invalid="raise", divide="raise", over="raise"):
        r = _recursion(data, u, stack.atom_layer, side, polarization)
    r = np.broadcast_to(np.asarray(r, dtype=float), u.shape)
    if not np.all(np.isfinite(r)):
        raise FloatingPointError("non-finite reflection coefficient")
    return r if r.ndim else float(r)


def reflection_recursive(stack: LayerStack, side: str, polarization: str, u, q):
    """Generalized reflection coefficient r^sigma_{j,side} at (u, q)."""
    return reflection_recursive_b(stack, side, polarization, u, vacuum_b(u, q))


def reflection_set_b(stack: LayerStack, u, b) -> ReflectionSet:
    """All four coefficients of the atom layer and the denominators D_sigma."""
    u, b = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(b, dtype=float))
    data = _layer_data(stack, u, b)
    j = stack.atom_layer
    with np.errstate(invalid="raise", divide="raise", over="raise"):
        rs_m = _recursion(data, u, j, "-", "s")
        rs_p = _recursion(data, u, j, "+", "s")
        rp_m = _recursion(data, u, j, "-", "p")
        rp_p = _recursion(data, u, j, "+", "p")
    rs_m, rs_p, rp_m, rp_p = (np.broadcast_to(np.asarray(r, dtype=float), u.shape) for r in (rs_m, rs_p, rp_m, rp_p))
    d_j = stack.atom_thickness
    wall = 0.0 if math.isinf(d_j) else np.exp(-2.0 * b * d_j)
    return ReflectionSet(rs_m, rs_p, rp_m, rp_p, 1.0 - rs_m * rs_p * wall, 1.0 - rp_m * rp_p * wall)


def reflection_set(stack: LayerStack, u, q) -> ReflectionSet:
    return reflection_set_b(stack, u, vacuum_b(u, q))


# closed forms for the simple geometries

def _contrast(chi, excess, u, b):
    """x^2 b^2 - b_M^2 = chi (2 + chi) b^2 - (u/c)^2 (eps mu - 1) for x = 1 + chi."""
    return chi * (2.0 + chi) * b * b - (u / c) ** 2 * excess


def _closed_form_data(m: Material, u, b):
    u = np.asarray(u, dtype=float)
    b = np.asarray(b, dtype=float)
    xe = m.electric_susceptibility_imag(u)
    xm = m.magnetic_susceptibility_imag(u)
    excess = xe + xm + xe * xm
    bm = np.sqrt((u / c) ** 2 * excess + b * b)
    return u, b, xe, xm, excess, bm


def half_space_coefficients_b(m: Material, u, b):
    """(r_s, r_p) of a single interface seen from the vacuum side."""
    u, b, xe, xm, excess, bm = _closed_form_data(m, u, b)

    def coeff(chi):
        return _contrast(chi, excess, u, b) / ((1.0 + chi) * b + bm) ** 2

    return coeff(xm), coeff(xe)


def half_space_coefficients(m: Material, u, q):
    return half_space_coefficients_b(m, u, vacuum_b(u, q))


def slab_coefficients_b(m: Material, d: float, u, b):
    """(r_s, r_p) of a plate of thickness d in vacuum (tanh form)."""
    if not d > 0:
        raise ValueError("slab thickness must be > 0")
    u, b, xe, xm, excess, bm = _closed_form_data(m, u, b)
    th = np.tanh(bm * d)

    def coeff(chi):
        x = 1.0 + chi
        return _contrast(chi, excess, u, b) * th / (2 * x * b * bm + (x * x * b * b + bm * bm) * th)

    return coeff(xm), coeff(xe)


def slab_coefficients(m: Material, d: float, u, q):
    return slab_coefficients_b(m, d, u, vacuum_b(u, q))


def thin_plate_coefficients_b(m: Material, d: float, u, b):
    """(r_s, r_p) linearized in b_M d for an asymptotically thin plate."""
    u, b, xe, xm, excess, bm = _closed_form_data(m, u, b)

    def coeff(chi):
        return _contrast(chi, excess, u, b) / (2 * (1.0 + chi) * b) * d

    return coeff(xm), coeff(xe)


def thin_plate_coefficients(m: Material, d: float, u, q):
    return thin_plate_coefficients_b(m, d, u, vacuum_b(u, q))


def cavity_coefficients_b(m: Material, s: float, u, b) -> ReflectionSet:
    """Symmetric cavity of two identical half spaces separated by s."""
    rs, rp = half_space_coefficients_b(m, u, b)
    wall = np.exp(-2.0 * np.asarray(b) * s)
    return ReflectionSet(rs, rs, rp, rp, 1.0 - rs * rs * wall, 1.0 - rp * rp * wall)


def cavity_coefficients(m: Material, s: float, u, q) -> ReflectionSet:
    return cavity_coefficients_b(m, s, u, vacuum_b(u, q))


def multiple_reflection_partial_sums(r_minus, r_plus, b, d, n_terms: int):
    """Partial sums of 1/D = sum_k (r_- r_+ exp(-2 b d))^k for k < n_terms."""
    ratio = np.asarray(r_minus) * np.asarray(r_plus) * np.exp(-2.0 * np.asarray(b) * d)
    terms = ratio[..., None] ** np.arange(n_terms)
    return np.cumsum(terms, axis=-1)
