"""Asymptotic power-law coefficients, border curves and wall engineering.

Half space:   U ~ C4/z^4 (long distance),  U ~ -C3/z^3 + C1/z (short).
Thin plate:   U ~ D5/z^5 (long distance),  U ~ -D4/z^4 + D2/z^2 (short).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.constants import c, epsilon_0, hbar, mu_0, pi

from .atom import Atom
from .materials import Material
from .potential import potential_outside
from .quad import QuadratureSpec, integrate_semi_infinite
from .stack import LayerStack

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """Coefficients of one geometry; ``long`` is C4 or D5, the short pair C3/C1 or D4/D2."""

    geometry: str
    long: float
    short_attractive: float
    short_repulsive: float
    converged: bool = True

    @property
    def long_power(self) -> int:
        return 4 if self.geometry == "half-space" else 5

    @property
    def short_powers(self) -> tuple[int, int]:
        return (3, 1) if self.geometry == "half-space" else (4, 2)

    def long_distance(self, z):
        return self.long / np.asarray(z) ** self.long_power

    def short_distance(self, z):
        pa, pr = self.short_powers
        z = np.asarray(z)
        return -self.short_attractive / z**pa + self.short_repulsive / z**pr


@dataclass(frozen=True)
class WallGeometry:
    z_max: float
    U_max: float

    @property
    def exists(self) -> bool:
        return self.z_max > 0 and self.U_max > 0


NO_WALL = WallGeometry(math.nan, math.nan)


# long distance, half space

def _ratio(x, y, v):
    """(x v - n)/(x v + n) with n = sqrt(x y - 1 + v^2), cancellation-free."""
    n = np.sqrt(x * y - 1.0 + v * v)
    return ((x * x - 1.0) * v * v - (x * y - 1.0)) / (x * v + n) ** 2


def c4_integral(eps0: float, mu0: float, spec: QuadratureSpec | None = None):
    """The dimensionless v-integral of the retarded coefficient (QuadResult)."""
    if eps0 < 1 or mu0 < 1:
        raise ValueError("static eps and mu must be >= 1")

    def f(v):
        return (2 / v**2 - 1 / v**4) * _ratio(eps0, mu0, v) - _ratio(mu0, eps0, v) / v**4

    return integrate_semi_infinite(f, spec or QuadratureSpec(rel_tol=1e-12), scale=1.0, lower=1.0)


def c4_prefactor(alpha0: float) -> float:
    return -3 * hbar * c * alpha0 / (64 * pi**2 * epsilon_0)


def c4_static(eps0: float, mu0: float, alpha0: float, spec: QuadratureSpec | None = None) -> float:
    return c4_prefactor(alpha0) * c4_integral(eps0, mu0, spec).value


def c4(material: Material, alpha0: float, spec: QuadratureSpec | None = None) -> float:
    """Retarded coefficient C4 (J m^4) of an atom in front of a half space."""
    return c4_static(material.permittivity_imag(0.0), material.permeability_imag(0.0), alpha0, spec)


def c4_weak(chi_e: float, chi_m: float, alpha0: float) -> float:
    """C4 linearized in the static susceptibilities."""
    return -hbar * c * alpha0 / (640 * pi**2 * epsilon_0) * (23 * chi_e - 7 * chi_m)


def strong_bracket(Z: float) -> float:
    """Bracket of the strong-medium C4 as a function of the impedance Z."""
    L1 = math.log1p(Z)
    return (
        -2 / Z**3 * L1 + 2 / Z**2 + 4 / Z * L1
        - 1 / Z - 4 / 3 - Z + 2 * Z**2 - 2 * Z**3 * math.log1p(1 / Z)
    )


def c4_strong(Z: float, alpha0: float) -> float:
    """C4 for eps(0), mu(0) >> 1 with sqrt(eps mu - 1 + v^2) ~ sqrt(eps mu).

    Depends on the media only through Z = sqrt(mu(0)/eps(0)).
    """
    if not Z > 0:
        raise ValueError("impedance must be > 0")
    return c4_prefactor(alpha0) * strong_bracket(Z)


def bisect(f: Callable[[float], float], lo: float, hi: float, rel_tol: float = 1e-12, max_iter: int = 200):
    """Root of f on [lo, hi] by bisection; raises if the bracket has no sign change."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"no sign change on [{lo:g}, {hi:g}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= rel_tol * abs(mid):
            break
    return 0.5 * (lo + hi)


def strong_border_impedance() -> float:
    """Z* where the strong-medium C4 changes sign."""
    return bisect(strong_bracket, 1.0, 10.0)


def weak_border_ratio() -> float:
    """chi_m/chi_e at which the weak-medium C4 vanishes."""
    return 23.0 / 7.0


@dataclass(frozen=True)
class BorderPoint:
    eps0: float
    mu0: float
    mu0_weak: float
    mu0_strong: float
    converged: bool = True


def border_mu(eps0: float, spec: QuadratureSpec | None = None, mu_max: float = 1e4, rel_tol: float = 1e-6) -> float:
    """mu(0) at which C4 = 0 for the given eps(0); C4 increases with mu(0)."""

    def f(mu):
        return c4_integral(eps0, mu, spec).value

    if eps0 == 1.0:
        return 1.0
    return bisect(f, 1.0, mu_max, rel_tol=rel_tol)


def border_curve(eps_grid: Sequence[float], spec: QuadratureSpec | None = None, mu_max: float = 1e4) -> list[BorderPoint]:
    """Points (eps(0), mu(0)) of the attraction/repulsion border, with both asymptotes."""
    z_star_sq = strong_border_impedance() ** 2
    out = []
    for eps0 in eps_grid:
        eps0 = float(eps0)
        if eps0 < 1:
            raise ValueError("eps(0) must be >= 1")
        try:
            mu = border_mu(eps0, spec, mu_max)
            ok = True
        except ValueError:
            mu, ok = math.nan, False
        out.append(BorderPoint(eps0, mu, 1 + weak_border_ratio() * (eps0 - 1), z_star_sq * eps0, ok))
    return out


# short distance, half space

def _u_integral(f, scale, spec):
    return integrate_semi_infinite(f, spec or QuadratureSpec(rel_tol=1e-10), scale=scale)


def _u_scale(material: Material, atom: Atom) -> float:
    return max(atom.omega_max, material.max_resonance)


def c3_c1(material: Material, atom: Atom, spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """Nonretarded coefficients (C3, C1), both >= 0."""
    C3, C1, _ = _c3_c1(material, atom, spec)
    return C3, C1


def _c3_c1(material, atom, spec):
    scale = _u_scale(material, atom)

    def f3(u):
        eps = material.permittivity_imag(u)
        return atom.polarizability_imag(u) * (eps - 1) / (eps + 1)

    def f1(u):
        eps = material.permittivity_imag(u)
        mu = material.permeability_imag(u)
        braces = (eps - 1) / (eps + 1) + (mu - 1) / (mu + 1) + 2 * eps * (eps * mu - 1) / (eps + 1) ** 2
        return u * u * atom.polarizability_imag(u) * braces

    r3 = _u_integral(f3, scale, spec)
    r1 = _u_integral(f1, scale, spec)
    C3 = hbar / (16 * pi**2 * epsilon_0) * r3.value
    C1 = mu_0 * hbar / (16 * pi**2) * r1.value
    return C3, C1, r3.converged and r1.converged


def half_space_asymptotics(material: Material, atom: Atom, spec: QuadratureSpec | None = None) -> AsymptoticCoefficients:
    C4 = c4(material, atom.static_polarizability())
    C3, C1, ok = _c3_c1(material, atom, spec)
    return AsymptoticCoefficients("half-space", C4, C3, C1, ok)


def _single(resonances, label):
    if len(resonances) != 1:
        raise ValueError(f"closed form needs exactly one {label} resonance")
    return resonances[0]


def _single_transition(atom: Atom):
    if len(atom.transitions) != 1:
        raise ValueError("closed form needs a two-level atom")
    return atom.transitions[0]


def c3_closed_form(material: Material, atom: Atom) -> float:
    """C3 for a two-level atom and a weak, lossless single electric resonance."""
    t = _single_transition(atom)
    e = _single(material.electric, "electric")
    return (
        t.dipole_sq / (96 * pi * epsilon_0)
        * (e.plasma / e.transverse) ** 2
        * e.transverse / (t.frequency + e.transverse)
    )


def magnetic_surface_frequency(material: Material) -> float:
    """w_Sm = sqrt(w_Tm^2 + w_Pm^2 / 2)."""
    m = _single(material.magnetic, "magnetic")
    return math.sqrt(m.transverse**2 + 0.5 * m.plasma**2)


def c1_closed_form(material: Material, atom: Atom) -> float:
    """C1 for a two-level atom with the electric contributions dropped."""
    t = _single_transition(atom)
    m = _single(material.magnetic, "magnetic")
    w10, wTm = t.frequency, m.transverse
    wSm = magnetic_surface_frequency(material)
    return (
        mu_0 * t.dipole_sq * m.plasma**2 / (96 * pi)
        * w10 * (2 * w10 + wSm + wTm) / ((w10 + wSm) * (w10 + wTm))
    )


def wall_geometry(C3: float, C1: float) -> WallGeometry:
    """Maximum of -C3/z^3 + C1/z: z_max = sqrt(3 C3/C1), U_max = (2/3) sqrt(C1^3 / (3 C3))."""
    if not (C3 > 0 and C1 > 0):
        return NO_WALL
    return WallGeometry(math.sqrt(3 * C3 / C1), (2.0 / 3.0) * math.sqrt(C1**3 / (3 * C3)))


def wall_closed_form(material: Material, atom: Atom) -> WallGeometry:
    """Wall position and height in the weak-electric two-level regime."""
    t = _single_transition(atom)
    e = _single(material.electric, "electric")
    m = _single(material.magnetic, "magnetic")
    w10, wPe, wTe, wPm, wTm = t.frequency, e.plasma, e.transverse, m.plasma, m.transverse
    wSm = magnetic_surface_frequency(material)
    z_max = (
        c / wPm * wPe / wTe
        * math.sqrt(wTe * (w10 + wTm) / (w10 * (w10 + wTe)))
        * math.sqrt(3 * (w10 + wSm) / (2 * w10 + wSm + wTm))
    )
    bracket = w10 * (2 * w10 + wSm + wTm) / (3 * (w10 + wSm) * (w10 + wTm))
    U_max = (
        t.dipole_sq * wPm**3 / (48 * pi * epsilon_0 * c**3)
        * wTe / wPe * math.sqrt((w10 + wTe) / wTe)
        * bracket**1.5
    )
    return WallGeometry(z_max, U_max)


# thin plate

def d5(eps0: float, mu0: float, alpha0: float, d: float) -> float:
    return -hbar * c * alpha0 * d / (160 * pi**2 * epsilon_0) * (
        (14 * eps0**2 - 9) / eps0 - (6 * mu0**2 - 1) / mu0
    )


def d5_border(eps0: float) -> float:
    """mu(0) >= 1 solving (14 eps^2 - 9)/eps = (6 mu^2 - 1)/mu, i.e. D5 = 0."""
    k = (14 * eps0**2 - 9) / eps0
    return (k + math.sqrt(k * k + 24)) / 12


def d5_d4_d2(material: Material, atom: Atom, d: float, spec: QuadratureSpec | None = None) -> tuple[float, float, float]:
    """Thin-plate coefficients (D5, D4, D2) for plate thickness d."""
    scale = _u_scale(material, atom)
    eps0 = material.permittivity_imag(0.0)
    mu0 = material.permeability_imag(0.0)
    D5 = d5(eps0, mu0, atom.static_polarizability(), d)

    def f4(u):
        eps = material.permittivity_imag(u)
        return atom.polarizability_imag(u) * (eps * eps - 1) / eps

    def f2(u):
        eps = material.permittivity_imag(u)
        mu = material.permeability_imag(u)
        braces = (eps * eps - 1) / eps + (mu * mu - 1) / mu + 2 * (eps * mu - 1) / eps
        return u * u * atom.polarizability_imag(u) * braces

    D4 = 3 * hbar * d / (64 * pi**2 * epsilon_0) * _u_integral(f4, scale, spec).value
    D2 = mu_0 * hbar * d / (64 * pi**2) * _u_integral(f2, scale, spec).value
    return D5, D4, D2


def thin_plate_asymptotics(material: Material, atom: Atom, d: float, spec=None) -> AsymptoticCoefficients:
    D5, D4, D2 = d5_d4_d2(material, atom, d, spec)
    return AsymptoticCoefficients("thin-plate", D5, D4, D2)


# numerical walls and thickness optimization

def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-4, max_iter: int = 200):
    """Golden-section search for the maximum of a unimodal f on [a, b].

    Returns (x, f(x)).
    """
    x1 = b - INV_GOLDEN * (b - a)
    x2 = a + INV_GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (abs(x1) + abs(x2) + tol):
            break
        if f1 > f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 > f2 else (x2, f2)


def wall_maximum(
    stack: LayerStack,
    atom: Atom,
    z_band: tuple[float, float],
    spec: QuadratureSpec | None = None,
    n_scan: int = 16,
    log_tol: float = 1e-4,
) -> WallGeometry:
    """Numerical maximum of the outer-layer potential inside ``z_band``.

    A coarse logarithmic scan brackets the maximum, golden-section search
    refines it in log z.  Returns NO_WALL when the largest value is not
    positive or sits on the band edge.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-7)
    lo, hi = math.log(z_band[0]), math.log(z_band[1])

    def U(logz):
        return potential_outside(stack, atom, math.exp(logz), spec, with_force=False).U

    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([U(x) for x in grid])
    i = int(np.argmax(vals))
    if vals[i] <= 0 or i == 0 or i == n_scan - 1:
        return NO_WALL
    x, fx = golden_max(U, grid[i - 1], grid[i + 1], tol=log_tol)
    return WallGeometry(math.exp(x), fx)


@dataclass(frozen=True)
class ThicknessOptimum:
    d: float
    wall: WallGeometry
    scanned: tuple[tuple[float, float], ...] = ()

    @property
    def exists(self) -> bool:
        return self.wall.exists


def optimal_thickness(
    material: Material,
    atom: Atom,
    z_band: tuple[float, float],
    d_band: tuple[float, float],
    spec: QuadratureSpec | None = None,
    n_scan: int = 9,
    log_tol: float = 1e-3,
) -> ThicknessOptimum:
    """Plate thickness maximizing the wall height of the slab potential.

    Golden-section search over log d, bracketed by a coarse scan; each
    height is the numerical wall maximum over ``z_band``.
    """
    if material.is_vacuum:
        return ThicknessOptimum(math.nan, NO_WALL)

    def height(logd):
        wall = wall_maximum(LayerStack.slab(material, math.exp(logd)), atom, z_band, spec)
        return wall.U_max if wall.exists else -math.inf

    grid = np.linspace(math.log(d_band[0]), math.log(d_band[1]), n_scan)
    heights = np.array([height(x) for x in grid])
    scanned = tuple((float(math.exp(x)), float(h)) for x, h in zip(grid, heights))
    if not np.any(np.isfinite(heights)):
        return ThicknessOptimum(math.nan, NO_WALL, scanned)
    i = int(np.argmax(heights))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n_scan - 1)]
    x, _ = golden_max(height, a, b, tol=log_tol)
    d_star = math.exp(x)
    wall = wall_maximum(LayerStack.slab(material, d_star), atom, z_band, spec)
    return ThicknessOptimum(d_star, wall, scanned)
