"""Domain types and unit conventions shared by all numerical modules.

The engine runs in natural desk units by default: c = mu0 = hbar = 1 and the
cavity side L is the length unit, so frequencies are quoted as omega/c in
units of 1/L.  All three constants can be overridden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc


class CavddError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CavddError):
    """Invalid input data or configuration."""


class DegenerateSeparationError(CavddError):
    """Field point coincides with a source or one of its images."""


class GeometryError(CavddError):
    """A point lies outside the cavity box."""


class ResonanceError(CavddError):
    """Evaluation frequency too close to a cavity eigenfrequency."""

    def __init__(self, message, mode=None, k_mode=None):
        super().__init__(message)
        self.mode = mode
        self.k_mode = k_mode


def vec3(x, y, z):
    """Build a finite 3-vector as a read-only float array."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"vector components must be finite, got {v}")
    v.flags.writeable = False
    return v


def _frozen_array(a, dtype=None):
    arr = np.array(a, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("array entries must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Constants:
    """Physical constants; strictly positive."""

    c: float = 1.0
    mu0: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("c", "mu0", "hbar"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValidationError(f"constant {name} must be finite and > 0, got {val}")


@dataclass(frozen=True)
class LevelPair:
    """Ordered pair (a, b) of level indices of one dipole."""

    a: int
    b: int

    def validate(self, n_levels):
        for idx in (self.a, self.b):
            if not (0 <= idx < n_levels):
                raise ValidationError(
                    f"level index {idx} out of range for a {n_levels}-level dipole"
                )


@dataclass(frozen=True)
class Dipole:
    """A multilevel magnetic dipole.

    position : (3,) array, length units
    energies : (n,) array of level energies, non-decreasing
    moments  : (n, n, 3) array of moment vectors; Hermitian in the level
               indices, i.e. moments[u, v] == conj(moments[v, u]) componentwise.
               Real arrays are the default; complex arrays are accepted.
    """

    position: np.ndarray
    energies: np.ndarray
    moments: np.ndarray

    def __post_init__(self):
        pos = _frozen_array(self.position, dtype=float)
        if pos.shape != (3,):
            raise ValidationError(f"position must be a 3-vector, got shape {pos.shape}")
        en = _frozen_array(self.energies, dtype=float)
        if en.ndim != 1 or en.size < 1:
            raise ValidationError("energies must be a non-empty 1-d sequence")
        if np.any(np.diff(en) < 0):
            raise ValidationError("energies must be sorted non-decreasing")
        mom = np.asarray(self.moments)
        if np.iscomplexobj(mom):
            mom = _frozen_array(mom, dtype=complex)
        else:
            mom = _frozen_array(mom, dtype=float)
        n = en.size
        if mom.shape != (n, n, 3):
            raise ValidationError(
                f"moments must have shape ({n}, {n}, 3) for {n} levels, got {mom.shape}"
            )
        herm_dev = np.abs(mom - np.conj(np.swapaxes(mom, 0, 1)))
        scale = max(np.max(np.abs(mom)), 1e-300)
        if np.max(herm_dev) > 1e-12 * scale:
            u, v = np.unravel_index(np.argmax(herm_dev.max(axis=2)), (n, n))
            raise ValidationError(
                f"moment matrix is not Hermitian: moments[{u}][{v}] vs conj(moments[{v}][{u}])"
            )
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "energies", en)
        object.__setattr__(self, "moments", mom)

    @property
    def n_levels(self):
        return self.energies.size

    def moment(self, a, b):
        LevelPair(a, b).validate(self.n_levels)
        return self.moments[a, b]


@dataclass(frozen=True)
class CavityGeometry:
    """Rectangular box [0, Lx] x [0, Ly] x [0, Lz] with ideal conductor walls."""

    Lx: float
    Ly: float
    Lz: float

    def __post_init__(self):
        for name in ("Lx", "Ly", "Lz"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValidationError(f"{name} must be finite and > 0, got {val}")

    @property
    def volume(self):
        return self.Lx * self.Ly * self.Lz

    @property
    def sides(self):
        return np.array([self.Lx, self.Ly, self.Lz])

    @property
    def min_side(self):
        return min(self.Lx, self.Ly, self.Lz)

    def contains(self, r, tol=0.0):
        r = np.asarray(r, dtype=float)
        return bool(np.all(r >= -tol) and np.all(r <= self.sides + tol))

    def require_inside(self, r, what="point"):
        if not self.contains(r):
            raise GeometryError(f"{what} {np.asarray(r)} lies outside the box {self.sides}")

    def on_wall(self, r, tol=1e-12):
        r = np.asarray(r, dtype=float)
        near = np.minimum(np.abs(r), np.abs(self.sides - r))
        return bool(np.any(near <= tol * self.min_side))


def default_splitting(geometry):
    """Default real/spectral splitting parameter sqrt(pi) / (2 V^(1/3))."""
    return math.sqrt(math.pi) / (2.0 * geometry.volume ** (1.0 / 3.0))


@dataclass(frozen=True)
class EwaldParams:
    """Truncation controls for the split Green-function evaluation.

    Fields left as None are auto-selected per (geometry, frequency):
    the image range from erfc screening and the mode cutoff from the
    Gaussian spectral weight, both driven down to target_tail.
    """

    Kc: float | None = None
    image_range: int | None = None
    mode_cutoff: float | None = None
    resonance_tol: float | None = None
    target_tail: float = 1e-12

    def __post_init__(self):
        if self.Kc is not None and not self.Kc > 0:
            raise ValidationError("Kc must be > 0")
        if self.image_range is not None and self.image_range < 0:
            raise ValidationError("image_range must be >= 0")
        if self.mode_cutoff is not None and not self.mode_cutoff > 0:
            raise ValidationError("mode_cutoff must be > 0")
        if self.resonance_tol is not None and not self.resonance_tol > 0:
            raise ValidationError("resonance_tol must be > 0")
        if not self.target_tail > 0:
            raise ValidationError("target_tail must be > 0")

    def resolve(self, geometry, k):
        """Concrete (Kc, image_range, mode_cutoff, resonance_tol) for |k| = |omega|/c."""
        kk = abs(k)
        Kc = self.Kc if self.Kc is not None else default_splitting(geometry)
        if self.image_range is not None:
            n_img = self.image_range
        else:
            n_img = 1
            while erfc(2.0 * n_img * Kc * geometry.min_side) > self.target_tail:
                n_img += 1
        if self.mode_cutoff is not None:
            kmax = self.mode_cutoff
            if kmax <= kk:
                raise ValidationError(
                    f"mode_cutoff {kmax} must exceed the evaluation wavenumber {kk}"
                )
        else:
            kmax = kk + 2.0 * Kc * math.sqrt(math.log(1.0 / self.target_tail))
        delta = (
            self.resonance_tol
            if self.resonance_tol is not None
            else 1e-6 * math.pi / geometry.min_side
        )
        return ResolvedEwald(Kc=Kc, image_range=n_img, mode_cutoff=kmax, resonance_tol=delta,
                             target_tail=self.target_tail)


@dataclass(frozen=True)
class ResolvedEwald:
    Kc: float
    image_range: int
    mode_cutoff: float
    resonance_tol: float
    target_tail: float


def transition_frequency(d: Dipole, pair: LevelPair, k: Constants) -> float:
    """Angular frequency (E_a - E_b) / hbar; antisymmetric in (a, b)."""
    pair.validate(d.n_levels)
    return (d.energies[pair.a] - d.energies[pair.b]) / k.hbar
