"""Rectangular-cavity vector eigenmodes and the naive mode-expansion sums.

The vector basis has one family per Cartesian component sigma, with the
sigma-component Neumann-like along sigma and Dirichlet on the other axes:

    A^x_mnp = sqrt(4(2 - delta_m0)/V) cos(m pi x/Lx) sin(n pi y/Ly) sin(p pi z/Lz)

and cyclic.  Components are orthonormal separately.  Modes with two or three
zero indices vanish identically in every component and are skipped.

The plain mode expansion of the Green diagonal,

    G^sigma(r, r') = sum_k A^sigma_k(r) A^sigma_k(r') / (k^2 - (omega/c)^2),

is exact but converges slowly; it is kept here as the demonstration path,
with the split evaluation in :mod:`cavdd.ewald` as the production path.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (CavityGeometry, Constants, Dipole, LevelPair, ResonanceError,
                   ValidationError)

# T_ij = sum_{q,p,n} eps_{ipq} eps_{jqn} d2_p d1_n G^q, the left/right curl of the
# diagonal Green dyadic.  Precomputed as one contraction tensor.
_EPS = np.zeros((3, 3, 3))
_EPS[0, 1, 2] = _EPS[1, 2, 0] = _EPS[2, 0, 1] = 1.0
_EPS[0, 2, 1] = _EPS[1, 0, 2] = _EPS[2, 1, 0] = -1.0
CURLCURL = np.einsum("ipq,jqn->ijqpn", _EPS, _EPS)
CURLCURL.flags.writeable = False


def curlcurl_contract(D):
    """Assemble T_ij from the mixed-derivative table D[q, p, n]."""
    return np.einsum("ijqpn,qpn->ij", CURLCURL, D)


@dataclass(frozen=True)
class ModeIndex:
    """Cavity mode labelled by non-negative integers (m, n, p)."""

    m: int
    n: int
    p: int

    def __post_init__(self):
        if min(self.m, self.n, self.p) < 0:
            raise ValidationError(f"mode indices must be non-negative, got {self}")

    def k_vec(self, g: CavityGeometry):
        return np.array([self.m * np.pi / g.Lx, self.n * np.pi / g.Ly, self.p * np.pi / g.Lz])

    def k(self, g: CavityGeometry):
        return float(np.linalg.norm(self.k_vec(g)))

    @property
    def n_zero(self):
        return int(self.m == 0) + int(self.n == 0) + int(self.p == 0)


@dataclass(frozen=True)
class ModeTable:
    """Read-only arrays for all contributing modes with k <= kmax, in
    (k, m, n, p) order so truncation is deterministic."""

    m: np.ndarray
    n: np.ndarray
    p: np.ndarray
    k: np.ndarray
    kvec: np.ndarray  # (M, 3)
    nf: np.ndarray    # (M, 3) normalization factors
    kmax: float

    def __len__(self):
        return self.k.size

    def shell_slice(self, rtol=1e-12):
        """Index range of the top k-shell (modes sharing the largest k)."""
        if self.k.size == 0:
            return slice(0, 0)
        ktop = self.k[-1]
        first = int(np.searchsorted(self.k, ktop * (1.0 - rtol)))
        return slice(first, self.k.size)


@functools.lru_cache(maxsize=64)
def _mode_table_cached(Lx, Ly, Lz, kmax):
    out_m, out_n, out_p = [], [], []
    mmax = int(np.floor(kmax * Lx / np.pi))
    for m in range(mmax + 1):
        kx = m * np.pi / Lx
        rem = kmax * kmax - kx * kx
        if rem < 0:
            break
        nmax = int(np.floor(np.sqrt(rem) * Ly / np.pi))
        pmax = int(np.floor(np.sqrt(rem) * Lz / np.pi))
        n, p = np.meshgrid(np.arange(nmax + 1), np.arange(pmax + 1), indexing="ij")
        n, p = n.ravel(), p.ravel()
        ky, kz = n * np.pi / Ly, p * np.pi / Lz
        k2 = kx * kx + ky * ky + kz * kz
        nzero = int(m == 0) + (n == 0) + (p == 0)
        keep = (nzero <= 1) & (k2 <= kmax * kmax)
        out_m.append(np.full(int(keep.sum()), m))
        out_n.append(n[keep])
        out_p.append(p[keep])
    m = np.concatenate(out_m) if out_m else np.zeros(0, dtype=int)
    n = np.concatenate(out_n) if out_n else np.zeros(0, dtype=int)
    p = np.concatenate(out_p) if out_p else np.zeros(0, dtype=int)
    kvec = np.stack([m * np.pi / Lx, n * np.pi / Ly, p * np.pi / Lz], axis=1)
    k = np.sqrt(np.einsum("ij,ij->i", kvec, kvec))
    order = np.lexsort((p, n, m, k))
    m, n, p, k, kvec = m[order], n[order], p[order], k[order], kvec[order]
    V = Lx * Ly * Lz
    nf = np.stack(
        [
            np.sqrt(4.0 * (2.0 - (m == 0)) / V),
            np.sqrt(4.0 * (2.0 - (n == 0)) / V),
            np.sqrt(4.0 * (2.0 - (p == 0)) / V),
        ],
        axis=1,
    )
    for arr in (m, n, p, k, kvec, nf):
        arr.flags.writeable = False
    return ModeTable(m=m, n=n, p=p, k=k, kvec=kvec, nf=nf, kmax=kmax)


def mode_table(g: CavityGeometry, kmax: float) -> ModeTable:
    """All contributing modes with k <= kmax; cached per (geometry, cutoff)."""
    if not kmax > 0:
        raise ValidationError(f"mode cutoff must be > 0, got {kmax}")
    return _mode_table_cached(g.Lx, g.Ly, g.Lz, float(kmax))


def check_resonance(table: ModeTable, kk: float, delta: float):
    """Raise if any tabulated eigenwavenumber is within delta of |k|."""
    if len(table) == 0:
        return
    gaps = np.abs(table.k - abs(kk))
    i = int(np.argmin(gaps))
    if gaps[i] <= delta:
        idx = (int(table.m[i]), int(table.n[i]), int(table.p[i]))
        raise ResonanceError(
            f"evaluation wavenumber {abs(kk):.9g} is within {delta:.3g} of cavity mode "
            f"{idx} at k = {table.k[i]:.9g}",
            mode=idx,
            k_mode=float(table.k[i]),
        )


def mode_function(idx: ModeIndex, r, g: CavityGeometry):
    """Vector eigenfunction (A^x, A^y, A^z) at r."""
    g.require_inside(r, "evaluation point")
    r = np.asarray(r, dtype=float)
    kx, ky, kz = idx.k_vec(g)
    V = g.volume
    nfx = np.sqrt(4.0 * (2.0 - (idx.m == 0)) / V)
    nfy = np.sqrt(4.0 * (2.0 - (idx.n == 0)) / V)
    nfz = np.sqrt(4.0 * (2.0 - (idx.p == 0)) / V)
    return np.array(
        [
            nfx * np.cos(kx * r[0]) * np.sin(ky * r[1]) * np.sin(kz * r[2]),
            nfy * np.sin(kx * r[0]) * np.cos(ky * r[1]) * np.sin(kz * r[2]),
            nfz * np.sin(kx * r[0]) * np.sin(ky * r[1]) * np.cos(kz * r[2]),
        ]
    )


def mode_curl(idx: ModeIndex, r, g: CavityGeometry):
    """Analytic curl of the full vector eigenfunction at r."""
    g.require_inside(r, "evaluation point")
    r = np.asarray(r, dtype=float)
    kx, ky, kz = idx.k_vec(g)
    V = g.volume
    nfx = np.sqrt(4.0 * (2.0 - (idx.m == 0)) / V)
    nfy = np.sqrt(4.0 * (2.0 - (idx.n == 0)) / V)
    nfz = np.sqrt(4.0 * (2.0 - (idx.p == 0)) / V)
    Cx, Sx = np.cos(kx * r[0]), np.sin(kx * r[0])
    Cy, Sy = np.cos(ky * r[1]), np.sin(ky * r[1])
    Cz, Sz = np.cos(kz * r[2]), np.sin(kz * r[2])
    return np.array(
        [
            (ky * nfz - kz * nfy) * Sx * Cy * Cz,
            (kz * nfx - kx * nfz) * Cx * Sy * Cz,
            (kx * nfy - ky * nfx) * Cx * Cy * Sz,
        ]
    )


def zeta(d: Dipole, pair: LevelPair, idx: ModeIndex, g: CavityGeometry, k: Constants):
    """Dipole-mode coupling sqrt(mu0) m_ab . curl A_k at the dipole position."""
    g.require_inside(d.position, "dipole position")
    m = d.moment(pair.a, pair.b)
    return np.sqrt(k.mu0) * (m @ mode_curl(idx, d.position, g))


def zeta_components(d: Dipole, pair: LevelPair, idx: ModeIndex, g: CavityGeometry, k: Constants):
    """Per-component couplings sqrt(mu0) m_ab . curl(A^sigma e_sigma), sigma = x, y, z.

    These are the couplings to the three orthonormal single-component modes of
    one (m, n, p) family; their sum over sigma equals :func:`zeta`.  Bilinear
    interaction sums must pair them component by component: pairing the summed
    couplings instead double-counts cross-component correlations that are
    absent from the diagonal Green expansion.
    """
    g.require_inside(d.position, "dipole position")
    r = d.position
    mvec = d.moment(pair.a, pair.b)
    kx, ky, kz = idx.k_vec(g)
    V = g.volume
    nfx = np.sqrt(4.0 * (2.0 - (idx.m == 0)) / V)
    nfy = np.sqrt(4.0 * (2.0 - (idx.n == 0)) / V)
    nfz = np.sqrt(4.0 * (2.0 - (idx.p == 0)) / V)
    Cx, Sx = np.cos(kx * r[0]), np.sin(kx * r[0])
    Cy, Sy = np.cos(ky * r[1]), np.sin(ky * r[1])
    Cz, Sz = np.cos(kz * r[2]), np.sin(kz * r[2])
    # curl of (A^x, 0, 0): (0, dz A^x, -dy A^x), and cyclic
    curls = np.array(
        [
            [0.0, kz * nfx * Cx * Sy * Cz, -ky * nfx * Cx * Cy * Sz],
            [-kz * nfy * Sx * Cy * Cz, 0.0, kx * nfy * Cx * Cy * Sz],
            [ky * nfz * Sx * Cy * Cz, -kx * nfz * Cx * Sy * Cz, 0.0],
        ]
    )
    return np.sqrt(k.mu0) * (curls @ mvec)


@dataclass(frozen=True)
class ModeSumResult:
    gA: np.ndarray          # (3,) per-component Green values
    tail: float             # magnitude of the last completed k-shell contribution
    n_modes: int
    kmax: float


def green_a_mode_sum(r, rp, omega, g: CavityGeometry, cutoff, k: Constants = Constants(),
                     resonance_tol=None) -> ModeSumResult:
    """Plain truncated mode expansion of the Green diagonal at (r, rp)."""
    g.require_inside(r, "field point")
    g.require_inside(rp, "source point")
    kk = abs(omega) / k.c
    if cutoff <= kk:
        raise ValidationError(f"mode cutoff {cutoff} must exceed omega/c = {kk}")
    table = mode_table(g, cutoff)
    delta = resonance_tol if resonance_tol is not None else 1e-6 * np.pi / g.min_side
    check_resonance(table, kk, delta)
    w = 1.0 / (table.k**2 - kk * kk)
    gA, _ = kernels.mode_sum(np.asarray(r, float), np.asarray(rp, float),
                             table.kvec, table.nf, w, with_dyadic=False)
    sl = table.shell_slice()
    g_shell, _ = kernels.mode_sum(np.asarray(r, float), np.asarray(rp, float),
                                  table.kvec[sl], table.nf[sl], w[sl], with_dyadic=False)
    return ModeSumResult(gA=gA, tail=float(np.max(np.abs(g_shell))), n_modes=len(table),
                         kmax=cutoff)


def _pair_mode_value(d1, d2, pair1, pair2, omega, g, k, table, weights):
    """Componentwise-paired interaction sum over the given modes and weights."""
    m1 = d1.moment(pair1.a, pair1.b)
    m2 = d2.moment(pair2.a, pair2.b)
    _, D = kernels.mode_sum(d2.position, d1.position, table.kvec, table.nf, weights,
                            with_dyadic=True)
    T = curlcurl_contract(D)
    val = k.mu0 * (m2 @ T @ m1)
    return val if np.iscomplexobj(val) else float(val)


def v_mode_sum(d1: Dipole, d2: Dipole, pair1: LevelPair, pair2: LevelPair, omega,
               g: CavityGeometry, k: Constants, cutoff):
    """Truncated mode-expansion interaction strength for the 2<-1 direction.

    Equivalent to sum_{k,sigma} c^2 z2^sigma z1^sigma / (omega^2 - c^2 k^2)
    with the componentwise couplings of :func:`zeta_components`; the sign
    convention is inherited from the split evaluation, whose free-space limit
    reproduces the closed-form interaction.  Converges slowly; kept as the
    demonstration path.
    """
    g.require_inside(d1.position, "dipole-1 position")
    g.require_inside(d2.position, "dipole-2 position")
    kk = abs(omega) / k.c
    if cutoff <= kk:
        raise ValidationError(f"mode cutoff {cutoff} must exceed omega/c = {kk}")
    table = mode_table(g, cutoff)
    delta = 1e-6 * np.pi / g.min_side
    check_resonance(table, kk, delta)
    w = 1.0 / (table.k**2 - kk * kk)
    return _pair_mode_value(d1, d2, pair1, pair2, omega, g, k, table, w)


@dataclass(frozen=True)
class NearResonantResult:
    value: float
    n_modes: int
    band: float
    empty: bool
    reference: float
    ratio: float | None


def near_resonant_estimate(d1: Dipole, d2: Dipole, pair1: LevelPair, pair2: LevelPair,
                           omega, g: CavityGeometry, k: Constants, band,
                           cutoff=None) -> NearResonantResult:
    """Interaction sum restricted to modes with | |k| - omega/c | <= band.

    The ratio to the converged split evaluation quantifies how much the
    near-resonant shell alone misses.
    """
    g.require_inside(d1.position, "dipole-1 position")
    g.require_inside(d2.position, "dipole-2 position")
    kk = abs(omega) / k.c
    top = cutoff if cutoff is not None else kk + band
    if not np.isfinite(top):
        top = 4.0 * max(kk, np.pi / g.min_side)
    table = mode_table(g, top)
    delta = 1e-6 * np.pi / g.min_side
    check_resonance(table, kk, delta)
    sel = np.abs(table.k - kk) <= band
    from .ewald import pair_strength_cavity  # deferred to avoid import cycle

    reference = pair_strength_cavity(d1, d2, pair1, pair2, omega, g, k)
    if not np.any(sel):
        return NearResonantResult(value=0.0, n_modes=0, band=band, empty=True,
                                  reference=reference, ratio=None)
    sub = ModeTable(m=table.m[sel], n=table.n[sel], p=table.p[sel], k=table.k[sel],
                    kvec=table.kvec[sel], nf=table.nf[sel], kmax=top)
    w = 1.0 / (sub.k**2 - kk * kk)
    val = _pair_mode_value(d1, d2, pair1, pair2, omega, g, k, sub, w)
    return NearResonantResult(value=val, n_modes=int(sel.sum()), band=band, empty=False,
                              reference=reference, ratio=val / reference)
