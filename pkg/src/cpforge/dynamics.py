"""Excited-state dynamics of a two-level atom in front of a half space.

The dipole is perpendicular to the interface, so only the zz component
of the scattering Green tensor enters.  At real frequency it is the
Sommerfeld integral

    G_zz(z, z, w) = i / (4 pi k^2) int_0^inf dq q^3 / k_z r_p e^{2 i k_z z}.

In the k_z plane the path runs from k to 0 and up the imaginary axis.
For a passive medium r_p has neither poles nor branch cuts in the
quadrant 0 < Re k_z < k, Im k_z > 0, so the path is moved to the
vertical line k_z = k + i y:

    G_zz = e^{2 i k z} / (4 pi k^2) int_0^inf dy (y^2 - 2 i k y) r_p e^{-2 y z},

which is free of oscillations at any distance.  The Green tensor is
normalized so that the bulk part gives Im G_zz = w / (6 pi c) and the
width formula reproduces the free-space rate.

The resonant force gradient acts on the first position argument only,
which for a planar body is half of the total z-derivative of G(z, z).
With this reading the near-field limit is the closed form implemented in
``resonant_force_nearfield``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.constants import c, epsilon_0, hbar, mu_0, pi
from scipy.linalg import expm

from .atom import Atom, Transition
from .materials import Material
from .potential import nested_integral
from .quad import QuadratureSpec, gauss_kronrod, principal_value
from .stack import half_space_coefficients_b

ORIENTATIONS = ("perpendicular", "isotropic")
VARIANTS = ("full", "shift-only", "broadening-only", "perturbative")

# real-frequency shift integrals stop at SHIFT_CUTOFF times the largest
# material or atomic frequency
SHIFT_CUTOFF = 1000.0
MAX_OSCILLATIONS = 50.0


def _transition(atom: Atom) -> Transition:
    if len(atom.transitions) != 1:
        raise ValueError("dynamics is implemented for two-level atoms only")
    return atom.transitions[0]


def _upper_sqrt(w):
    """Square root with Im >= 0 (outgoing or decaying waves)."""
    r = np.sqrt(np.asarray(w, dtype=complex))
    return np.where(r.imag < 0, -r, r)


def free_space_rate(omega: float, dipole_sq: float) -> float:
    """Spontaneous decay rate w^3 |d|^2 / (3 pi hbar eps0 c^3)."""
    return omega**3 * dipole_sq / (3 * pi * hbar * epsilon_0 * c**3)


# real-frequency Green tensor

@dataclass
class GreenResult:
    value: np.ndarray
    converged: bool


def _green_zz(material: Material, z: float, omega, spec: QuadratureSpec, gradient: bool) -> GreenResult:
    if not z > 0:
        raise ValueError(f"z must be > 0, got {z}")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(omega <= 0):
        raise ValueError("real frequencies must be > 0")
    if material.is_vacuum:
        return GreenResult(np.zeros(omega.shape, dtype=complex), True)
    w = omega[:, None]
    k = w / c
    eps = material.permittivity(w)
    n2 = eps * material.permeability(w)

    def integrand(t):
        # vertical path k_z = k + i y, y = t / (2 z)
        y = t / (2 * z)
        kz = k + 1j * y
        kmz = _upper_sqrt((n2 - 1.0) * k * k + kz * kz)
        rp = (eps * kz - kmz) / (eps * kz + kmz)
        with np.errstate(under="ignore"):
            val = (y * y - 2j * k * y) * rp * np.exp(-t) / (2 * z)
        if gradient:
            val = val * (1j * kz)
        return np.stack([val.real, val.imag])

    res = gauss_kronrod(integrand, 0.0, spec.t_max, spec)
    phase = np.exp(2j * omega * z / c) / (4 * pi * (omega / c) ** 2)
    return GreenResult(phase * (res.value[0] + 1j * res.value[1]), res.converged)


def halfspace_green_zz(material: Material, z: float, omega, spec: QuadratureSpec | None = None) -> GreenResult:
    """Scattering G_zz(z, z, w) of a half space at real frequencies (1/m).

    ``omega`` may be an array; the result has the same length.
    """
    return _green_zz(material, z, omega, spec or QuadratureSpec(), gradient=False)


def halfspace_green_zz_gradient(material: Material, z: float, omega, spec: QuadratureSpec | None = None) -> GreenResult:
    """d/dz1 G_zz(z1, z, w) at z1 = z: the derivative with respect to the first argument."""
    return _green_zz(material, z, omega, spec or QuadratureSpec(), gradient=True)


def halfspace_im_green_perp(material: Material, z: float, omega, spec: QuadratureSpec | None = None):
    """Im G_zz of the scattering part; scalar in, scalar out."""
    res = halfspace_green_zz(material, z, omega, spec)
    val = res.value.imag
    return float(val[0]) if np.ndim(omega) == 0 else val


def nearfield_green_zz(material: Material, z: float, omega):
    """Leading small-z term c^2 r_p / (16 pi w^2 z^3) with r_p = (eps - 1)/(eps + 1)."""
    eps = material.permittivity(omega)
    return c**2 * (eps - 1) / (eps + 1) / (16 * pi * np.asarray(omega) ** 2 * z**3)


# shifts, widths and the self-consistent spectrum

def level_width(atom: Atom, material: Material, z: float, omega_shifted: float, spec: QuadratureSpec | None = None) -> float:
    """Width of the upper level: free-space rate plus the body-induced part.

    Zero when the shifted transition frequency is not positive.
    """
    t = _transition(atom)
    if omega_shifted <= 0:
        return 0.0
    im_g = halfspace_im_green_perp(material, z, omega_shifted, spec)
    return free_space_rate(omega_shifted, t.dipole_sq) + 2 * mu_0 * omega_shifted**2 * t.dipole_sq / hbar * im_g


def _material_scale(material: Material) -> float:
    """Largest frequency at which the material response is still sizeable."""
    rs = material.electric + material.magnetic
    return max((math.hypot(r.plasma, r.transverse) for r in rs), default=0.0)


def shift_cutoff(material: Material, omega_shifted: float) -> float:
    """Upper limit of the real-frequency shift integral.

    Beyond it eps - 1 and mu - 1 fall off as (w_P / w)^2 and the kernel is
    negligible at the default tolerance.
    """
    return SHIFT_CUTOFF * max(omega_shifted, _material_scale(material))


def level_shift(
    atom: Atom,
    material: Material,
    z: float,
    omega_shifted: float,
    level: int,
    spec: QuadratureSpec | None = None,
    method: str = "auto",
) -> float:
    """Body-induced shift of level 0 or 1 (rad/s), scattering part only.

    ``principal-value`` integrates w^2 Im G_zz(w) / (w~_mk - w) over real
    frequencies up to ``shift_cutoff``; level 1 has its pole at the shifted
    transition frequency, level 0 at the negative one.  ``imaginary-axis``
    uses the contour-rotated equivalent

        hbar dw_0 = mu0 |d|^2 / pi int du u^2 w~ G_zz(iu) / (w~^2 + u^2),
        dw_1 = -dw_0 - mu0 |d|^2 w~^2 Re G_zz(w~) / hbar,

    which has no oscillating factor.  ``auto`` takes the principal value
    unless e^{2ikz} oscillates more than ``MAX_OSCILLATIONS`` times below
    the cutoff.
    """
    t = _transition(atom)
    if level not in (0, 1):
        raise ValueError("level must be 0 or 1")
    if method not in ("auto", "principal-value", "imaginary-axis"):
        raise ValueError(f"unknown method {method!r}")
    if material.is_vacuum:
        return 0.0
    spec = spec or QuadratureSpec()
    top = shift_cutoff(material, omega_shifted)
    if method == "auto":
        n_osc = top * z / (pi * c)
        method = "principal-value" if n_osc <= MAX_OSCILLATIONS else "imaginary-axis"
    if method == "imaginary-axis":
        return _shift_imaginary_axis(t, material, z, omega_shifted, level, spec)

    inner = spec.tightened(10.0)

    def weight(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros(w.shape)
        pos = w > 0
        if np.any(pos):
            out[pos] = w[pos] ** 2 * halfspace_green_zz(material, z, w[pos], inner).value.imag
        return out

    pref = mu_0 * t.dipole_sq / (pi * hbar)
    if level == 1:
        res = principal_value(weight, omega_shifted, 0.0, top, spec)
    else:
        res = gauss_kronrod(lambda w: weight(w) / (-omega_shifted - w), 0.0, top, spec,
                            breakpoints=(omega_shifted, _material_scale(material)))
    return pref * res.value


def _shift_imaginary_axis(t: Transition, material: Material, z: float, w: float, level: int, spec) -> float:
    zs = np.array([z])[:, None, None]

    def kernel(u, tt):
        b = u / c + tt / (2 * z)
        _, rp = half_space_coefficients_b(material, u, b)
        with np.errstate(under="ignore"):
            decay = np.exp(-2 * b * zs) / (2 * z)
        # u^2 G_zz(iu) integrand in b
        u2g = -c**2 / (4 * pi) * (b * b - (u / c) ** 2) * rp
        return mu_0 * t.dipole_sq / pi * w / (w * w + u * u) * u2g * decay

    val, _, _ = nested_integral(kernel, z, min(max(w, material.max_resonance), c / (2 * z)), spec)
    d0 = float(np.atleast_1d(val)[0]) / hbar
    if level == 0:
        return d0
    g = halfspace_green_zz(material, z, w, spec.tightened(10.0)).value[0]
    return -d0 - mu_0 * t.dipole_sq * w * w * g.real / hbar


@dataclass(frozen=True)
class DynamicSpectrum:
    """Shifted transition frequency, level shifts and widths of a two-level atom."""

    omega10: float
    omega_shifted: float
    shifts: tuple[float, float]
    widths: tuple[float, float]
    iterations: int = 0
    converged: bool = True

    @property
    def complex_frequency(self) -> complex:
        """Omega_10 = shifted frequency + i (Gamma_1 + Gamma_0) / 2."""
        return complex(self.omega_shifted, 0.5 * (self.widths[0] + self.widths[1]))

    @classmethod
    def bare(cls, omega10: float) -> "DynamicSpectrum":
        return cls(omega10, omega10, (0.0, 0.0), (0.0, 0.0))

    def without_widths(self) -> "DynamicSpectrum":
        return replace(self, widths=(0.0, 0.0))

    def without_shifts(self) -> "DynamicSpectrum":
        return replace(self, omega_shifted=self.omega10, shifts=(0.0, 0.0))

    def with_width(self, gamma1: float) -> "DynamicSpectrum":
        return replace(self, widths=(0.0, gamma1))


def self_consistent_spectrum(
    atom: Atom,
    material: Material,
    z: float,
    spec: QuadratureSpec | None = None,
    relaxation: float = 0.5,
    rel_tol: float = 1e-10,
    max_iter: int = 200,
) -> DynamicSpectrum:
    """Damped fixed-point solution of w~ = w10 + dw1(w~) - dw0(w~).

    Widths are evaluated at the converged frequency.  A run that does not
    converge within ``max_iter``, or whose next iterate is not positive,
    returns the last positive iterate, flagged.
    """
    t = _transition(atom)
    w10 = t.frequency
    w = w10
    d0 = d1 = 0.0
    converged = material.is_vacuum
    n = 0
    while not converged and n < max_iter:
        d0 = level_shift(atom, material, z, w, 0, spec)
        d1 = level_shift(atom, material, z, w, 1, spec)
        target = w10 + d1 - d0
        w_new = (1 - relaxation) * w + relaxation * target
        n += 1
        if not w_new > 0:
            # the iteration left the physical branch; keep the last iterate
            break
        converged = abs(w_new - w) <= rel_tol * abs(w)
        w = w_new
    gamma1 = level_width(atom, material, z, w, spec)
    return DynamicSpectrum(w10, w, (d0, d1), (0.0, gamma1), n, converged)


def spectrum_variant(spectrum: DynamicSpectrum, variant: str) -> DynamicSpectrum:
    """Drop shifts and/or widths as in the perturbative comparison curves.

    ``broadening-only`` keeps the widths of the given spectrum; callers that
    want widths at the bare frequency should pass such a spectrum.
    """
    if variant == "full":
        return spectrum
    if variant == "shift-only":
        return spectrum.without_widths()
    if variant == "broadening-only":
        return spectrum.without_shifts()
    if variant == "perturbative":
        return DynamicSpectrum.bare(spectrum.omega10)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


# forces

def resonant_force_nearfield(atom: Atom, material: Material, spectrum: DynamicSpectrum, z: float) -> float:
    """Near-field resonant force on the excited level (N, along +z).

    -3 |d|^2 / (32 pi eps0 z^4) (|eps(W)|^2 - 1) / |eps(W) + 1|^2 with W the
    complex transition frequency of ``spectrum``.
    """
    t = _transition(atom)
    if spectrum.omega_shifted <= 0:
        return 0.0
    eps = material.permittivity(spectrum.complex_frequency)
    return -3 * t.dipole_sq / (32 * pi * epsilon_0 * z**4) * (abs(eps) ** 2 - 1) / abs(eps + 1) ** 2


def resonant_force_from_green(atom: Atom, material: Material, omega: float, z: float, spec: QuadratureSpec | None = None) -> float:
    """Resonant force at real frequency from the Sommerfeld gradient.

    mu0 |d|^2 Re[w^2 dG_zz/dz1]; reduces to the near-field closed form
    for z << c/w.
    """
    t = _transition(atom)
    g = halfspace_green_zz_gradient(material, z, omega, spec).value[0]
    return mu_0 * t.dipole_sq * float((omega**2 * g).real)


def broadened_polarizability_sum(u, omega: float, gamma: float, dipole_sq: float, level: int):
    """alpha_m(iu) + alpha_m(-iu) along the dipole axis (C^2 m^2 / J).

    2 w |d|^2 / hbar [1/(w^2 + (u + g/2)^2) + 1/(w^2 + (u - g/2)^2)],
    with the opposite sign for the upper level.
    """
    u = np.asarray(u, dtype=float)
    h = 0.5 * gamma
    a2 = omega * omega
    val = 2 * omega * dipole_sq / hbar * (1 / (a2 + (u + h) ** 2) + 1 / (a2 + (u - h) ** 2))
    return val if level == 0 else -val


def broadening_correction(u, omega: float, gamma: float, dipole_sq: float, level: int):
    """Difference of the polarizability sum at width gamma and at zero width.

    Written without cancellation: the result is O(gamma^2).
    """
    u = np.asarray(u, dtype=float)
    h = 0.5 * gamma
    a2 = omega * omega
    base = a2 + u * u
    plus = a2 + (u + h) ** 2
    minus = a2 + (u - h) ** 2
    # 1/plus + 1/minus - 2/base = [base (plus + minus) - 2 plus minus] / (plus minus base)
    num = 2 * h * h * (3 * u * u - a2) - 2 * h**4
    val = 2 * omega * dipole_sq / hbar * num / (plus * minus * base)
    return val if level == 0 else -val


def _offresonant(material: Material, z: float, alpha_sum, w_ref: float, orientation: str, spec: QuadratureSpec) -> float:
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    if material.is_vacuum:
        return 0.0
    zs = np.array([z])[:, None, None]

    def kernel(u, t):
        b = u / c + t / (2 * z)
        rs, rp = half_space_coefficients_b(material, u, b)
        with np.errstate(under="ignore"):
            decay = np.exp(-2 * b * zs) / (2 * z)
        if orientation == "perpendicular":
            # u^2 dG_zz/dz
            grad = c**2 / (2 * pi) * b * (b * b - (u / c) ** 2) * rp
        else:
            # u^2 d(tr G)/dz, weighted by 1/3 for the isotropic average
            grad = -b / (2 * pi) * (u * u * rs - (2 * (b * c) ** 2 - u * u) * rp) / 3
        return -hbar * mu_0 / (4 * pi) * alpha_sum(u) * grad * decay

    val, _, ok = nested_integral(kernel, z, min(w_ref, c / (2 * z)), spec)
    return float(np.atleast_1d(val)[0])


def offresonant_force(
    atom: Atom,
    material: Material,
    spectrum: DynamicSpectrum,
    z: float,
    level: int,
    orientation: str = "perpendicular",
    spec: QuadratureSpec | None = None,
) -> float:
    """Off-resonant force on level 0 or 1 with the body-assisted polarizability.

    ``isotropic`` averages the dipole over orientations; with zero shifts
    and widths level 0 then equals minus the gradient of the ground-state
    potential of an isotropic atom.
    """
    t = _transition(atom)
    spec = spec or QuadratureSpec()
    w, g = spectrum.omega_shifted, spectrum.widths[0] + spectrum.widths[1]

    def alpha_sum(u):
        return broadened_polarizability_sum(u, w, g, t.dipole_sq, level)

    w_ref = max(w, material.max_resonance)
    return _offresonant(material, z, alpha_sum, w_ref, orientation, spec)


def offresonant_broadening_shift(
    atom: Atom,
    material: Material,
    spectrum: DynamicSpectrum,
    z: float,
    level: int,
    spec: QuadratureSpec | None = None,
) -> float:
    """F_or(widths of ``spectrum``) - F_or(zero widths), perpendicular dipole."""
    t = _transition(atom)
    spec = spec or QuadratureSpec()
    w, g = spectrum.omega_shifted, spectrum.widths[0] + spectrum.widths[1]

    def alpha_sum(u):
        return broadening_correction(u, w, g, t.dipole_sq, level)

    return _offresonant(material, z, alpha_sum, max(w, material.max_resonance), "perpendicular", spec)


# populations and transients

@dataclass(frozen=True)
class OccupationVector:
    """Level populations sigma_mm(t); ``sigma`` has shape (len(t), n_levels)."""

    t: np.ndarray
    sigma: np.ndarray

    def level(self, m: int) -> np.ndarray:
        return self.sigma[:, m]


def two_level_rates(spectrum: DynamicSpectrum) -> np.ndarray:
    """Rate matrix R[n, m] = Gamma_n^m for the decay 1 -> 0."""
    return np.array([[0.0, 0.0], [spectrum.widths[1], 0.0]])


def population_dynamics(initial: int, rates, t: Sequence[float]) -> OccupationVector:
    """Solve the balance equations with sigma_mm(0) = delta_{m, initial}.

    ``rates`` is a DynamicSpectrum (two-level decay) or a matrix with
    R[n, m] the rate of n -> m.  Two levels use the exponential directly;
    larger systems use the eigen-decomposition of the rate matrix, falling
    back to the matrix exponential when it is defective.
    """
    R = two_level_rates(rates) if isinstance(rates, DynamicSpectrum) else np.asarray(rates, dtype=float)
    n = R.shape[0]
    if R.shape != (n, n) or np.any(R < 0):
        raise ValueError("rates must be a square non-negative matrix")
    if not 0 <= initial < n:
        raise ValueError(f"initial level {initial} outside 0..{n - 1}")
    t = np.asarray(t, dtype=float)
    R = R - np.diag(np.diag(R))
    A = R.T - np.diag(R.sum(axis=1))
    x0 = np.zeros(n)
    x0[initial] = 1.0

    if n == 2 and R[0, 1] == 0:
        g = R[1, 0]
        upper = x0[1] * np.exp(-g * t)
        sigma = np.column_stack([1.0 - upper, upper])
    else:
        vals, vecs = np.linalg.eig(A)
        # balancing can return wrong eigenvectors when rates span many decades
        resid = np.abs(A @ vecs - vecs * vals).max()
        if np.linalg.cond(vecs) < 1e8 and resid <= 1e-12 * max(np.abs(A).max(), 1e-300):
            coef = np.linalg.solve(vecs, x0)
            sigma = (vecs @ (coef[:, None] * np.exp(np.outer(vals, t)))).real.T
        else:
            sigma = np.array([expm(A * ti) @ x0 for ti in t])
    return OccupationVector(t, np.clip(sigma, 0.0, None))


@dataclass(frozen=True)
class ForceComponents:
    """Force components of a two-level atom at one distance (N)."""

    ground: float
    excited_resonant: float
    excited_offresonant: float

    @property
    def excited(self) -> float:
        return self.excited_resonant + self.excited_offresonant


def force_components(
    atom: Atom,
    material: Material,
    spectrum: DynamicSpectrum,
    z: float,
    spec: QuadratureSpec | None = None,
) -> ForceComponents:
    f0 = offresonant_force(atom, material, spectrum, z, 0, spec=spec)
    # the upper-level polarizability is minus the lower one for two levels
    return ForceComponents(f0, resonant_force_nearfield(atom, material, spectrum, z), -f0)


def force_trajectory(
    atom: Atom,
    material: Material,
    z: float,
    t_grid: Sequence[float],
    spec: QuadratureSpec | None = None,
    spectrum: DynamicSpectrum | None = None,
    initial: int = 1,
) -> tuple[np.ndarray, np.ndarray, DynamicSpectrum]:
    """Population-weighted force <F(t)> of an atom prepared in ``initial``.

    Returns (t, <F>, spectrum); the spectrum is solved self-consistently
    unless given.
    """
    spectrum = spectrum or self_consistent_spectrum(atom, material, z, spec)
    comps = force_components(atom, material, spectrum, z, spec)
    occ = population_dynamics(initial, spectrum, t_grid)
    force = occ.level(1) * comps.excited + occ.level(0) * comps.ground
    return occ.t, force, spectrum


def resonant_profile(
    material: Material,
    z: float,
    omega10_grid: Sequence[float],
    dipole_sq: float,
    variant: str = "full",
    spec: QuadratureSpec | None = None,
) -> np.ndarray:
    """Near-field resonant force of the excited level versus transition frequency.

    ``variant`` selects which body-induced effects are kept: ``full``,
    ``shift-only`` (widths zero), ``broadening-only`` (widths at the bare
    frequency, no shift) or ``perturbative`` (neither).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    out = []
    for w10 in omega10_grid:
        atom = Atom((Transition(float(w10), dipole_sq),))
        if variant == "perturbative":
            s = DynamicSpectrum.bare(w10)
        elif variant == "broadening-only":
            s = DynamicSpectrum.bare(w10).with_width(level_width(atom, material, z, w10, spec))
        else:
            s = spectrum_variant(self_consistent_spectrum(atom, material, z, spec), variant)
        out.append(resonant_force_nearfield(atom, material, s, z))
    return np.array(out)
