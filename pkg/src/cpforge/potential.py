"""Ground-state van der Waals potential and force in a planar multilayer.

The potential is the double integral over imaginary frequency u and the
vacuum axial decay constant b >= u/c,

    U(z) = hbar mu0 / (8 pi^2) int du alpha(iu) int db
           { e^{-2bz}     [u^2 r_s-/D_s - (2 b^2 c^2 - u^2) r_p-/D_p]
           + e^{-2b(d-z)} [u^2 r_s+/D_s - (2 b^2 c^2 - u^2) r_p+/D_p] },

which is the q-integral rewritten with q dq / b = db and the factor u^2
pulled inside the bracket.  Only the scattering part of the Green tensor
enters, so U vanishes far from every interface.

Inner b-integral: b = u/c + t / (2 z_eff) with z_eff the distance to the
nearest wall, giving an exp(-t) weight truncated at ``spec.t_max``.
Outer u-integral: u = w_ref x / (1 - x) on x in (0, 1).
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.constants import c, hbar, mu_0

from .atom import Atom, dipole_strength
from .materials import Material
from .quad import QuadratureSpec, gauss_kronrod, integrate_semi_infinite
from .stack import (
    LayerStack,
    reflection_set_b,
    thin_plate_coefficients_b,
)

PREFACTOR = hbar * mu_0 / (8 * math.pi**2)

# nonretarded validity floor, in units of c / w_A+
Z_FLOOR = 1e-4


@dataclass
class PotentialSample:
    z: float
    U: float
    F: float = math.nan
    error: float = 0.0
    converged: bool = True


@dataclass
class PotentialCurve:
    samples: list[PotentialSample]
    stack: LayerStack | None = None
    atom: Atom | None = None
    normalization: str = "si"
    meta: dict = field(default_factory=dict)

    @property
    def z(self) -> np.ndarray:
        return np.array([s.z for s in self.samples])

    @property
    def U(self) -> np.ndarray:
        return np.array([s.U for s in self.samples])

    @property
    def F(self) -> np.ndarray:
        return np.array([s.F for s in self.samples])

    @property
    def errors(self) -> np.ndarray:
        return np.array([s.error for s in self.samples])

    @property
    def all_converged(self) -> bool:
        return all(s.converged for s in self.samples)

    def normalized(self, mode: str = "dimensionless") -> "PotentialCurve":
        if mode == "si":
            return self
        if mode != "dimensionless":
            raise ValueError(f"unknown normalization {mode!r}")
        lz, le, lf = scales(self.atom)
        samples = [
            PotentialSample(s.z / lz, s.U / le, s.F / lf, s.error / le, s.converged)
            for s in self.samples
        ]
        return PotentialCurve(samples, self.stack, self.atom, mode, dict(self.meta))

    def to_csv(self) -> str:
        units = _units(self.normalization)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"z [{units[0]}]", f"U [{units[1]}]", f"F [{units[2]}]", f"err [{units[1]}]"])
        for s in self.samples:
            w.writerow([repr(s.z), repr(s.U), repr(s.F), repr(s.error)])
        return buf.getvalue()


def _units(mode):
    if mode == "si":
        return ("m", "J", "N")
    return ("c/w10", "hbar w10 beta", "hbar w10^2 beta / c")


def scales(atom: Atom) -> tuple[float, float, float]:
    """Length, energy and force units of the dimensionless normalization.

    Lengths in c/w10, energies in hbar w10 beta with beta the dipole
    strength w10^2 |d|^2 / (3 pi hbar eps0 c^3) of the lowest transition.
    """
    t = min(atom.transitions, key=lambda t: t.frequency)
    w = t.frequency
    beta = dipole_strength(w, t.dipole_sq)
    length = c / w
    energy = hbar * w * beta
    return length, energy, energy / length


def _frequency_scale(atom: Atom, stack_max_resonance: float, z_eff: float) -> float:
    w_ref = max(atom.omega_max, stack_max_resonance)
    return min(w_ref, c / (2 * z_eff))


def _check_floor(atom: Atom, z: float):
    if z < Z_FLOOR * c / atom.omega_max:
        raise ValueError(
            f"z = {z:g} m is below the macroscopic validity floor "
            f"{Z_FLOOR:g} c/w_A+ = {Z_FLOOR * c / atom.omega_max:g} m"
        )


def _bracket(u, b, rs, rp):
    return u * u * rs - (2 * (b * c) ** 2 - u * u) * rp


def nested_integral(kernel: Callable, z_eff: float, w_ref: float, spec: QuadratureSpec):
    """Nested integral of kernel(u[:, None], t[None, :]) -> (..., nu, nt).

    Returns (values, error, converged) with values over the leading axes.
    """
    inner_spec = spec.tightened(10.0)
    inner_ok = [True]

    def outer(u):
        def inner(t):
            return kernel(u[:, None], t[None, :])

        res = gauss_kronrod(inner, 0.0, spec.t_max, inner_spec, component_floor=1e-6)
        inner_ok[0] &= res.converged
        return res.value

    res = integrate_semi_infinite(outer, spec, scale=w_ref)
    err = np.abs(res.error) + inner_spec.rel_tol * np.abs(res.l1)
    return res.value, err, res.converged and inner_ok[0]


def _outer_kernel(coefficients: Callable, atom: Atom, zs: np.ndarray, z_eff: float):
    zs = np.asarray(zs, dtype=float)[:, None, None]

    def kernel(u, t):
        b = u / c + t / (2 * z_eff)
        rs, rp = coefficients(u, b)
        alpha = atom.polarizability_imag(u)
        with np.errstate(under="ignore"):
            weight = np.exp(-2 * b * zs) / (2 * z_eff)
        return PREFACTOR * alpha * weight * _bracket(u, b, rs, rp)

    return kernel


def _cavity_kernel(stack: LayerStack, atom: Atom, zs: np.ndarray, z_eff: float):
    zs = np.asarray(zs, dtype=float)[:, None, None]
    d = stack.atom_thickness

    def kernel(u, t):
        b = u / c + t / (2 * z_eff)
        r = reflection_set_b(stack, u, b)
        alpha = atom.polarizability_imag(u)
        with np.errstate(under="ignore"):
            left = np.exp(-2 * b * zs)
            right = np.exp(-2 * b * (d - zs))
        term = left * _bracket(u, b, r.r_s_minus / r.D_s, r.r_p_minus / r.D_p)
        term = term + right * _bracket(u, b, r.r_s_plus / r.D_s, r.r_p_plus / r.D_p)
        return PREFACTOR * alpha * term / (2 * z_eff)

    return kernel


def _stencil(z: float, h: float) -> np.ndarray:
    return z + h * np.array([0.0, -2.0, -1.0, 1.0, 2.0])


def _from_stencil(z, h, vals, err, ok, with_force) -> PotentialSample:
    vals = np.atleast_1d(vals)
    err = np.atleast_1d(err)
    U = float(vals[0])
    F = math.nan
    if with_force:
        dU = (vals[1] - 8 * vals[2] + 8 * vals[3] - vals[4]) / (12 * h)
        F = float(-dU)
    return PotentialSample(z, U, F, float(err[0]), bool(ok))


def _outer_sample(coefficients, atom, z, w_max, spec, with_force):
    _check_floor(atom, z)
    h = z / 100.0
    zs = _stencil(z, h) if with_force else np.array([z])
    kernel = _outer_kernel(coefficients, atom, zs, z)
    vals, err, ok = nested_integral(kernel, z, _frequency_scale(atom, w_max, z), spec)
    return _from_stencil(z, h, vals, err, ok, with_force)


def potential_outside(
    stack: LayerStack,
    atom: Atom,
    z: float,
    spec: QuadratureSpec | None = None,
    with_force: bool = True,
) -> PotentialSample:
    """Potential for an atom in a semi-infinite outer layer.

    ``z`` is the distance from the outermost interface.  No multiple
    reflections occur, so only the single wall term contributes.
    """
    spec = spec or QuadratureSpec()
    if not stack.is_outer:
        raise ValueError("atom must sit in an outer layer; use potential_in_cavity")
    if not z > 0:
        raise ValueError(f"z must be > 0, got {z}")
    if stack.atom_layer == 0:
        stack = stack.mirrored()

    def coefficients(u, b):
        r = reflection_set_b(stack, u, b)
        return r.r_s_minus, r.r_p_minus

    return _outer_sample(coefficients, atom, z, stack.max_resonance, spec, with_force)


def potential_with_coefficients(
    coefficients: Callable,
    atom: Atom,
    z: float,
    max_resonance: float,
    spec: QuadratureSpec | None = None,
    with_force: bool = True,
) -> PotentialSample:
    """Outer-layer potential for user-supplied (u, b) -> (r_s, r_p)."""
    return _outer_sample(coefficients, atom, z, max_resonance, spec or QuadratureSpec(), with_force)


def potential_thin_plate(
    material: Material,
    d: float,
    atom: Atom,
    z: float,
    spec: QuadratureSpec | None = None,
    with_force: bool = True,
) -> PotentialSample:
    """Potential of a plate with reflection coefficients linearized in b_M d."""

    def coefficients(u, b):
        return thin_plate_coefficients_b(material, d, u, b)

    return potential_with_coefficients(coefficients, atom, z, material.max_resonance, spec, with_force)


def potential_in_cavity(
    stack: LayerStack,
    atom: Atom,
    z: float,
    spec: QuadratureSpec | None = None,
    with_force: bool = True,
) -> PotentialSample:
    """Potential for an atom in an inner vacuum layer, 0 < z < d_j."""
    spec = spec or QuadratureSpec()
    if stack.is_outer:
        raise ValueError("atom is in an outer layer; use potential_outside")
    d = stack.atom_thickness
    if not 0 < z < d:
        raise ValueError(f"z = {z:g} outside the atom layer (0, {d:g})")
    z_eff = min(z, d - z)
    _check_floor(atom, z_eff)
    h = z_eff / 100.0
    zs = _stencil(z, h) if with_force else np.array([z])
    kernel = _cavity_kernel(stack, atom, zs, z_eff)
    w_ref = _frequency_scale(atom, stack.max_resonance, z_eff)
    vals, err, ok = nested_integral(kernel, z_eff, w_ref, spec)
    return _from_stencil(z, h, vals, err, ok, with_force)


def potential(stack: LayerStack, atom: Atom, z: float, spec=None, with_force=True) -> PotentialSample:
    """Dispatch to the outer-layer or in-cavity evaluation."""
    if stack.is_outer:
        return potential_outside(stack, atom, z, spec, with_force)
    return potential_in_cavity(stack, atom, z, spec, with_force)


def sample_curve(
    stack: LayerStack,
    atom: Atom,
    z_grid: Sequence[float],
    spec: QuadratureSpec | None = None,
    with_force: bool = True,
    threads: int = 1,
) -> PotentialCurve:
    """Evaluate the potential on every point of ``z_grid``."""
    z_grid = [float(z) for z in z_grid]
    if not z_grid:
        raise ValueError("empty z grid")

    def one(z):
        return potential(stack, atom, z, spec, with_force)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            samples = list(pool.map(one, z_grid))
    else:
        samples = [one(z) for z in z_grid]
    return PotentialCurve(samples, stack, atom)
