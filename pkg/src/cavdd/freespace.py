"""Closed-form free-space interactions.

The single-frequency kernel

    V(omega) = mu0/(4 pi R^3) { m1.m2 [(1-eta^2) cos eta + eta sin eta]
               - 3 (m1.eR)(m2.eR) [(1-eta^2/3) cos eta + eta sin eta] },

with eta = omega R / c, is the curl-curl contraction of the isotropic
Green kernel cos(kR)/(4 pi R) and reduces to the static dipolar form at
eta = 0.  It is even in omega.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Constants, DegenerateSeparationError, Dipole, ValidationError
from .interactions import InteractionTable, build_pair_table

_FOURPI = 4.0 * np.pi


@dataclass(frozen=True)
class RetardedKernel:
    """Separation data for one evaluation: eta = omega R / c, R, unit vector."""

    eta: float
    R: float
    e_R: np.ndarray

    def __post_init__(self):
        if not self.R > 0:
            raise DegenerateSeparationError("separation must be positive")
        if abs(np.linalg.norm(self.e_R) - 1.0) > 1e-12:
            raise ValidationError("e_R must be a unit vector")


def separation(r1, r2, omega=0.0, k: Constants = Constants()) -> RetardedKernel:
    d = np.asarray(r2, dtype=float) - np.asarray(r1, dtype=float)
    R = float(np.linalg.norm(d))
    if R == 0.0:
        raise DegenerateSeparationError("dipole positions coincide")
    return RetardedKernel(eta=omega * R / k.c, R=R, e_R=d / R)


def v_retarded(m1, m2, r1, r2, omega, k: Constants = Constants()):
    """Single-frequency dipole-dipole strength; equals v_static at omega = 0."""
    sep = separation(r1, r2, omega, k)
    eta = sep.eta
    ce, se = np.cos(eta), np.sin(eta)
    m1 = np.asarray(m1)
    m2 = np.asarray(m2)
    para = (m1 @ m2) * ((1.0 - eta * eta) * ce + eta * se)
    radial = 3.0 * (m1 @ sep.e_R) * (m2 @ sep.e_R) * ((1.0 - eta * eta / 3.0) * ce + eta * se)
    val = k.mu0 / (_FOURPI * sep.R**3) * (para - radial)
    return val if np.iscomplexobj(val) else float(val)


def v_static(m1, m2, r1, r2, k: Constants = Constants()):
    """Static dipolar interaction mu0/(4 pi R^3) [m1.m2 - 3 (m1.eR)(m2.eR)]."""
    return v_retarded(m1, m2, r1, r2, 0.0, k)


def green_a_free(r, rp, omega, k: Constants = Constants()):
    """Isotropic scalar Green kernel cos(kR)/(4 pi R); the tensor is this times I."""
    sep = separation(rp, r, omega, k)
    return float(np.cos(sep.eta) / (_FOURPI * sep.R))


def pair_interaction_free(d1: Dipole, d2: Dipole, k: Constants = Constants()) -> InteractionTable:
    """Free-space interaction table over all level pairs of both dipoles."""
    separation(d1.position, d2.position)  # raises on coincident positions

    def evaluate(direction, m_field, m_source, omega):
        if direction == "21":
            val = v_retarded(m_source, m_field, d1.position, d2.position, omega, k)
        else:
            val = v_retarded(m_source, m_field, d2.position, d1.position, omega, k)
        return val, {}

    return build_pair_table(d1, d2, k, evaluate)
