"""Drude-Lorentz permittivity and permeability models.

Each response function is a sum of Lorentz oscillators,

    eps(w) = 1 + sum_k wP_k^2 / (wT_k^2 - w^2 - i w gamma_k),

evaluated on the imaginary axis (w = iu), at real frequencies or at an
arbitrary complex frequency.  All frequencies are angular frequencies in
rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Resonance:
    """A single Lorentz oscillator.

    Parameters
    ----------
    plasma : float
        Plasma (coupling) frequency wP in rad/s.
    transverse : float
        Transverse resonance frequency wT in rad/s.
    damping : float
        Damping rate gamma in rad/s.
    """

    plasma: float
    transverse: float
    damping: float = 0.0

    def __post_init__(self):
        if not (self.plasma > 0 and np.isfinite(self.plasma)):
            raise ValueError(f"plasma frequency must be > 0, got {self.plasma}")
        if not (self.transverse > 0 and np.isfinite(self.transverse)):
            raise ValueError(f"transverse frequency must be > 0, got {self.transverse}")
        if not (self.damping >= 0 and np.isfinite(self.damping)):
            raise ValueError(f"damping must be >= 0, got {self.damping}")

    def scaled(self, unit: float) -> "Resonance":
        return Resonance(self.plasma * unit, self.transverse * unit, self.damping * unit)


def _as_resonances(items: Iterable) -> tuple[Resonance, ...]:
    out = []
    for item in items:
        if isinstance(item, Resonance):
            out.append(item)
        else:
            out.append(Resonance(*item))
    return tuple(out)


@dataclass(frozen=True)
class Material:
    """Magnetodielectric medium with additive Drude-Lorentz responses.

    An empty resonance list means the corresponding response is that of
    vacuum (eps = 1 or mu = 1).
    """

    electric: tuple[Resonance, ...] = ()
    magnetic: tuple[Resonance, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "electric", _as_resonances(self.electric))
        object.__setattr__(self, "magnetic", _as_resonances(self.magnetic))

    @classmethod
    def drude_lorentz(
        cls,
        electric: Sequence = (),
        magnetic: Sequence = (),
        unit: float = 1.0,
        name: str = "",
    ) -> "Material":
        """Build a material from (wP, wT, gamma) triples given in units of `unit`."""
        return cls(
            tuple(r.scaled(unit) for r in _as_resonances(electric)),
            tuple(r.scaled(unit) for r in _as_resonances(magnetic)),
            name=name,
        )

    @classmethod
    def vacuum(cls) -> "Material":
        return cls(name="vacuum")

    @property
    def is_vacuum(self) -> bool:
        return not self.electric and not self.magnetic

    def swapped(self) -> "Material":
        """Dual medium with eps and mu exchanged."""
        return Material(self.magnetic, self.electric, name=self.name)

    def without_magnetic(self) -> "Material":
        return Material(self.electric, (), name=self.name)

    def without_electric(self) -> "Material":
        return Material((), self.magnetic, name=self.name)

    @property
    def max_resonance(self) -> float:
        """Highest transverse frequency of all resonances (0 for vacuum)."""
        freqs = [r.transverse for r in self.electric + self.magnetic]
        return max(freqs, default=0.0)

    @property
    def min_resonance(self) -> float:
        freqs = [r.transverse for r in self.electric + self.magnetic]
        return min(freqs, default=0.0)

    def permittivity_imag(self, u):
        return _lorentz_imag(self.electric, u)

    def permeability_imag(self, u):
        return _lorentz_imag(self.magnetic, u)

    def electric_susceptibility_imag(self, u):
        """eps(iu) - 1 without the cancellation of subtracting 1."""
        return _lorentz_sum_imag(self.electric, u)

    def magnetic_susceptibility_imag(self, u):
        return _lorentz_sum_imag(self.magnetic, u)

    def permittivity(self, omega):
        return _lorentz_complex(self.electric, omega)

    def permeability(self, omega):
        return _lorentz_complex(self.magnetic, omega)


def _lorentz_sum_imag(resonances, u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("imaginary frequency u must be >= 0")
    out = np.zeros_like(u)
    for r in resonances:
        out = out + r.plasma**2 / (r.transverse**2 + u * u + u * r.damping)
    return out if out.ndim else float(out)


def _lorentz_imag(resonances, u):
    out = 1.0 + np.asarray(_lorentz_sum_imag(resonances, u))
    return out if out.ndim else float(out)


def _lorentz_complex(resonances, omega):
    omega = np.asarray(omega, dtype=complex)
    out = np.ones_like(omega)
    for r in resonances:
        denom = r.transverse**2 - omega * omega - 1j * omega * r.damping
        if np.any(denom == 0):
            raise ZeroDivisionError(
                f"frequency hits the undamped pole at wT = {r.transverse:g} rad/s"
            )
        out = out + r.plasma**2 / denom
    return out if out.ndim else complex(out)


def eval_permittivity_imag(m: Material, u):
    """eps(iu); real and >= 1 for every u >= 0."""
    return m.permittivity_imag(u)


def eval_permeability_imag(m: Material, u):
    """mu(iu); real and >= 1 for every u >= 0."""
    return m.permeability_imag(u)


def eval_permittivity_complex(m: Material, omega):
    """eps(omega) continued to complex omega (upper half plane is physical)."""
    return m.permittivity(omega)


def eval_permeability_complex(m: Material, omega):
    return m.permeability(omega)


def static_susceptibilities(m: Material) -> tuple[float, float, float]:
    """Return (chi_e(0), chi_m(0), Z) with Z = sqrt(mu(0)/eps(0))."""
    eps0 = m.permittivity_imag(0.0)
    mu0 = m.permeability_imag(0.0)
    return eps0 - 1.0, mu0 - 1.0, float(np.sqrt(mu0 / eps0))
