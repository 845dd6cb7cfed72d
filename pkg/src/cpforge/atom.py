"""Atomic level structure and the ground-state polarizability."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.constants import c, epsilon_0, hbar, pi


@dataclass(frozen=True)
class Transition:
    """Ground-state transition 0 -> k: frequency w_k0 (rad/s) and |d_0k|^2 (C^2 m^2)."""

    frequency: float
    dipole_sq: float

    def __post_init__(self):
        if not (self.frequency > 0 and np.isfinite(self.frequency)):
            raise ValueError(f"transition frequency must be > 0, got {self.frequency}")
        if not (self.dipole_sq > 0 and np.isfinite(self.dipole_sq)):
            raise ValueError(f"|d|^2 must be > 0, got {self.dipole_sq}")


@dataclass(frozen=True)
class Atom:
    transitions: tuple[Transition, ...]
    name: str = ""

    def __post_init__(self):
        ts = tuple(t if isinstance(t, Transition) else Transition(*t) for t in self.transitions)
        if not ts:
            raise ValueError("an atom needs at least one transition")
        object.__setattr__(self, "transitions", ts)

    @property
    def omega_min(self) -> float:
        return min(t.frequency for t in self.transitions)

    @property
    def omega_max(self) -> float:
        return max(t.frequency for t in self.transitions)

    def polarizability_imag(self, u):
        return polarizability_imag(self, u)

    def static_polarizability(self) -> float:
        return float(polarizability_imag(self, 0.0))


def polarizability_imag(a: Atom, u):
    """Isotropic lowest-order polarizability alpha(iu) in C^2 m^2 / J.

    alpha(iu) = 2/(3 hbar) sum_k w_k0 |d_0k|^2 / (w_k0^2 + u^2)
    """
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("imaginary frequency u must be >= 0")
    out = np.zeros_like(u)
    for t in a.transitions:
        out = out + t.frequency * t.dipole_sq / (t.frequency**2 + u * u)
    out = out * (2.0 / (3.0 * hbar))
    return out if out.ndim else float(out)


def dipole_strength(omega: float, dipole_sq: float) -> float:
    """Dimensionless strength beta = w^2 |d|^2 / (3 pi hbar eps0 c^3)."""
    return omega**2 * dipole_sq / (3 * pi * hbar * epsilon_0 * c**3)


def dipole_sq_from_strength(omega: float, beta: float) -> float:
    return 3 * pi * hbar * epsilon_0 * c**3 * beta / omega**2


def two_level(
    omega10: float,
    dipole_sq: float | None = None,
    beta: float | None = None,
    beta_reference: float | None = None,
    name: str = "",
) -> Atom:
    """Single-transition atom.

    Give either `dipole_sq` directly or the dimensionless strength `beta`.
    `beta` is referred to `beta_reference` (defaults to omega10), so that
    beta = w_ref^2 |d|^2 / (3 pi hbar eps0 c^3).
    """
    if not omega10 > 0:
        raise ValueError(f"transition frequency must be > 0, got {omega10}")
    if dipole_sq is None and beta is None:
        raise ValueError("give dipole_sq or beta")
    if dipole_sq is not None and beta is not None:
        raise ValueError("give only one of dipole_sq or beta")
    if dipole_sq is None:
        if not beta > 0:
            raise ValueError(f"beta must be > 0, got {beta}")
        ref = omega10 if beta_reference is None else beta_reference
        dipole_sq = dipole_sq_from_strength(ref, beta)
    return Atom((Transition(omega10, dipole_sq),), name=name)


def multi_level(transitions: Sequence[tuple[float, float]], name: str = "") -> Atom:
    return Atom(tuple(Transition(w, d2) for w, d2 in transitions), name=name)
