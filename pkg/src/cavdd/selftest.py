"""Embedded invariant suite behind the `selftest` CLI command.

Each check reports a measured figure against its threshold.  The debug knobs
exist to demonstrate failure modes: flip_spectral_sign negates the mode half
of the split (the mode-dominated free-space check catches it), and
kc_scale with freeze_truncation shows that the splitting parameter and the
truncations must be re-selected together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CavityGeometry, EwaldParams
from .effective import SingleModeSystem, first_order_residual
from .ewald import gamma_cutoff, green_tensor
from .freespace import v_retarded
from .modes import ModeIndex, curlcurl_contract
from .numdiff import derivative_table, one_sided_first


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class SelftestReport:
    checks: tuple
    backend: str

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def format(self):
        lines = [f"kernel backend: {self.backend}"]
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            line = f"{tag}  {c.name}: measured={c.measured:.3e} threshold={c.threshold:.3e}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        lines.append("selftest " + ("PASSED" if self.passed else "FAILED"))
        return "\n".join(lines)


def _check_gamma_limit():
    Kc = 1e6
    devs = []
    for kk in np.linspace(0.0, 18.0, 10):
        for off in np.linspace(0.7, 10.0, 10):
            km = kk + off
            exact = 1.0 / (km * km - kk * kk)
            devs.append(abs(gamma_cutoff(kk, km, Kc) / exact - 1.0))
    measured = max(devs)
    return CheckResult("gamma cutoff limit (Kc -> inf)", measured, 1e-8, measured <= 1e-8,
                       "100 (k, kmnp) pairs")


def mode_overlap_quadrature(i1: ModeIndex, i2: ModeIndex, g: CavityGeometry, n_nodes=48):
    """Per-component overlap integrals of two eigenmodes by tensor-product
    Gauss-Legendre quadrature, exploiting the separability of the integrand."""
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    overlap = np.ones(3)
    for sig in range(3):
        for ax, Lax in enumerate((g.Lx, g.Ly, g.Lz)):
            x = 0.5 * Lax * (nodes + 1.0)
            w = 0.5 * Lax * weights
            t1 = np.cos(i1.k_vec(g)[ax] * x) if ax == sig else np.sin(i1.k_vec(g)[ax] * x)
            t2 = np.cos(i2.k_vec(g)[ax] * x) if ax == sig else np.sin(i2.k_vec(g)[ax] * x)
            overlap[sig] *= float((w * t1 * t2).sum())
        n1 = np.sqrt(4.0 * (2.0 - ((i1.m, i1.n, i1.p)[sig] == 0)) / g.volume)
        n2 = np.sqrt(4.0 * (2.0 - ((i2.m, i2.n, i2.p)[sig] == 0)) / g.volume)
        overlap[sig] *= n1 * n2
    return overlap


def _check_orthonormality(rng):
    g = CavityGeometry(1.0, 1.0, 1.0)
    devs = []
    for _ in range(10):
        i1 = ModeIndex(*(int(v) for v in rng.integers(0, 4, 3)))
        if i1.n_zero > 1:
            i1 = ModeIndex(1, 2, 3)
        same = rng.random() < 0.5
        i2 = i1 if same else ModeIndex(i1.m + 1, i1.n, i1.p)
        overlap = mode_overlap_quadrature(i1, i2, g)
        expect = np.zeros(3)
        if same:
            zeros = {0: i1.m == 0, 1: i1.n == 0, 2: i1.p == 0}
            for sig in range(3):
                # components with a zero Dirichlet index vanish identically
                dirichlet_zero = any(zeros[ax] for ax in range(3) if ax != sig)
                expect[sig] = 0.0 if dirichlet_zero else 1.0
        devs.append(np.max(np.abs(overlap - expect)))
    measured = max(devs)
    return CheckResult("eigenmode orthonormality (quadrature)", measured, 1e-6,
                       measured <= 1e-6, "10 random mode pairs")


def _check_fn_residual(rng):
    devs = []
    for _ in range(100):
        w1, w2 = rng.uniform(1.0, 5.0, 2)
        nu = rng.uniform(6.0, 9.0)
        g1 = rng.normal() + 1j * rng.normal()
        g2 = rng.normal() + 1j * rng.normal()
        devs.append(first_order_residual(SingleModeSystem(w1, w2, nu, g1, g2)))
    measured = max(devs)
    return CheckResult("first-order elimination residual", measured, 1e-14,
                       measured <= 1e-14, "100 random systems")


def _check_boundaries(flip):
    g = CavityGeometry(1.0, 1.0, 1.0)
    rs = np.array([0.37, 0.52, 0.41])
    om = 7.3
    interior = np.max(np.abs(green_tensor(np.array([0.62, 0.31, 0.55]), rs, om, g,
                                          _flip_spectral_sign=flip).gA))
    walls = [
        (np.array([0.0, 0.44, 0.61]), (1, 2)),
        (np.array([1.0, 0.44, 0.61]), (1, 2)),
        (np.array([0.52, 0.0, 0.61]), (0, 2)),
        (np.array([0.52, 1.0, 0.61]), (0, 2)),
        (np.array([0.52, 0.44, 0.0]), (0, 1)),
        (np.array([0.52, 0.44, 1.0]), (0, 1)),
    ]
    worst_tan = 0.0
    for point, tangential in walls:
        gA = green_tensor(point, rs, om, g, _flip_spectral_sign=flip).gA
        worst_tan = max(worst_tan, max(abs(gA[t]) for t in tangential) / interior)
    h = 1e-3
    worst_cap = 0.0
    for ax, wall_point, direction in ((0, np.array([0.0, 0.44, 0.61]), +1),
                                      (2, np.array([0.52, 0.44, 1.0]), -1)):
        def comp(x, ax=ax):
            return green_tensor(x, rs, om, g, _flip_spectral_sign=flip).gA[ax]

        d_wall = one_sided_first(comp, wall_point, ax, h, direction)
        # robust interior derivative scale (single points can sit on a node)
        scale = 0.0
        for frac in (0.31, 0.5, 0.73):
            mid = wall_point.copy()
            mid[ax] = frac
            e = np.eye(3)[ax] * h
            scale = max(scale, abs(comp(mid + e) - comp(mid - e)) / (2 * h))
        worst_cap = max(worst_cap, abs(d_wall) / scale)
    tan = CheckResult("wall condition: tangential components", worst_tan, 1e-10,
                      worst_tan <= 1e-10, "six walls")
    cap = CheckResult("wall condition: end-cap normal derivative", worst_cap, 1e-5,
                      worst_cap <= 1e-5, "one-sided finite difference")
    return [tan, cap]


def _random_config(rng, cube=True):
    if cube:
        g = CavityGeometry(1.0, 1.0, 1.0)
    else:
        g = CavityGeometry(*rng.uniform(0.7, 1.4, 3))
    while True:
        r1 = g.sides * rng.uniform(0.15, 0.85, 3)
        r2 = g.sides * rng.uniform(0.15, 0.85, 3)
        if np.linalg.norm(r2 - r1) > 0.1 * g.min_side:
            break
    om = rng.uniform(2.0, 9.0)
    return g, r1, r2, om


def _check_fd_tensor(rng, flip):
    devs = []
    for trial in range(3):
        g, r1, r2, om = _random_config(rng, cube=trial % 2 == 0)

        def gA(a, b):
            return green_tensor(a, b, om, g, _flip_spectral_sign=flip).gA

        h = 2e-3 * np.linalg.norm(r2 - r1)
        Dfd = derivative_table(gA, r2, r1, h)            # (p, n, q)
        Tfd = curlcurl_contract(np.moveaxis(Dfd, 2, 0))  # -> (q, p, n)
        Tan = green_tensor(r2, r1, om, g, _flip_spectral_sign=flip).T
        devs.append(np.max(np.abs(Tfd - Tan)) / np.max(np.abs(Tan)))
    measured = max(devs)
    return CheckResult("interaction tensor vs finite differences", measured, 1e-6,
                       measured <= 1e-6, "3 random configurations")


def _check_kc_invariance(rng, flip, kc_scale, freeze):
    devs = []
    for trial in range(3):
        g, r1, r2, om = _random_config(rng, cube=trial % 2 == 0)
        base = EwaldParams().resolve(g, om)
        Kc0 = base.Kc * kc_scale
        vals = []
        for Kc in (0.5 * Kc0, Kc0, 2.0 * Kc0):
            if freeze:
                params = EwaldParams(Kc=Kc, image_range=base.image_range,
                                     mode_cutoff=base.mode_cutoff)
            else:
                params = EwaldParams(Kc=Kc)
            gt = green_tensor(r2, r1, om, g, params, _flip_spectral_sign=flip)
            vals.append(gt.T)
        ref = np.max(np.abs(vals[1]))
        devs.append(max(np.max(np.abs(v - vals[1])) / ref for v in (vals[0], vals[2])))
    measured = max(devs)
    detail = "3 random configurations, Kc x {1/2, 1, 2}"
    if kc_scale != 1.0:
        detail += f", base Kc scaled by {kc_scale:g}"
    if freeze:
        detail += ", truncations frozen"
    return CheckResult("Kc invariance of the split", measured, 1e-8, measured <= 1e-8,
                       detail)


def _check_free_space(flip):
    g = CavityGeometry(1.0, 1.0, 1.0)
    mz = np.array([0.0, 0.0, 1.0])
    om = 2.0
    # image-dominated probe: tiny separation, default splitting
    r1 = np.array([0.495, 0.5, 0.5])
    r2 = np.array([0.505, 0.5, 0.5])
    gt = green_tensor(r2, r1, om, g, _flip_spectral_sign=flip)
    dev_a = abs((mz @ gt.T @ mz) / v_retarded(mz, mz, r1, r2, om) - 1.0)
    # mode-dominated probe: large Kc pushes the near field into the mode half
    r1 = np.array([0.45, 0.5, 0.5])
    r2 = np.array([0.55, 0.5, 0.5])
    gt = green_tensor(r2, r1, om, g, EwaldParams(Kc=25.0), _flip_spectral_sign=flip)
    dev_b = abs((mz @ gt.T @ mz) / v_retarded(mz, mz, r1, r2, om) - 1.0)
    return [
        CheckResult("free-space limit (image-dominated)", dev_a, 5e-3, dev_a <= 5e-3,
                    "R = 0.01 L at box center"),
        CheckResult("free-space limit (mode-dominated)", dev_b, 5e-2, dev_b <= 5e-2,
                    "R = 0.1 L, Kc = 25/L"),
    ]


def run_selftest(seed=0, flip_spectral_sign=False, kc_scale=1.0,
                 freeze_truncation=False) -> SelftestReport:
    from .kernels import BACKEND

    rng = np.random.default_rng(seed)
    checks = [_check_gamma_limit(), _check_orthonormality(rng), _check_fn_residual(rng)]
    checks += _check_boundaries(flip_spectral_sign)
    checks.append(_check_fd_tensor(rng, flip_spectral_sign))
    checks.append(_check_kc_invariance(rng, flip_spectral_sign, kc_scale,
                                       freeze_truncation))
    checks += _check_free_space(flip_spectral_sign)
    return SelftestReport(checks=tuple(checks), backend=BACKEND)
