import numpy as np
import pytest
import sympy as sp

from cavdd.core import (CavityGeometry, Constants, Dipole, GeometryError, LevelPair,
                        ResonanceError, ValidationError)
from cavdd.ewald import green_tensor
from cavdd.modes import (ModeIndex, green_a_mode_sum, mode_curl, mode_function,
                         mode_table, near_resonant_estimate, v_mode_sum, zeta,
                         zeta_components)
from cavdd.numdiff import curl as fd_curl
from cavdd.numdiff import gradient, laplacian
from cavdd.selftest import mode_overlap_quadrature

CUBE = CavityGeometry(1.0, 1.0, 1.0)
EZ = np.array([0.0, 0.0, 1.0])


def transition_dipole(position, moment, omega=20.0, n=2):
    mom = np.zeros((n, n, 3))
    mom[0, 1] = moment
    mom[1, 0] = moment
    en = np.zeros(n)
    en[1:] = omega + np.arange(n - 1) * 3.0
    return Dipole(position=np.asarray(position, float), energies=en, moments=mom)


class TestModeFunction:
    def test_center_zeros_for_111(self):
        val = mode_function(ModeIndex(1, 1, 1), np.array([0.5, 0.5, 0.5]), CUBE)
        assert np.allclose(val, 0.0, atol=1e-15)

    def test_sidewall_tangential_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            idx = ModeIndex(*(int(v) for v in rng.integers(0, 4, 3)))
            r = np.array([0.0, rng.random(), rng.random()])
            val = mode_function(idx, r, CUBE)
            assert val[1] == 0.0 and val[2] == 0.0

    def test_normalization_123(self):
        overlap = mode_overlap_quadrature(ModeIndex(1, 2, 3), ModeIndex(1, 2, 3), CUBE,
                                          n_nodes=64)
        assert np.allclose(overlap, 1.0, atol=1e-8)

    def test_orthonormality_random_pairs(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            i1 = ModeIndex(int(rng.integers(0, 3)), int(rng.integers(1, 4)),
                           int(rng.integers(1, 4)))
            i2 = ModeIndex(i1.m, i1.n + 1, i1.p)
            ov_same = mode_overlap_quadrature(i1, i1, CUBE)
            ov_diff = mode_overlap_quadrature(i1, i2, CUBE)
            want = np.ones(3)
            if i1.m == 0:
                want[1] = want[2] = 0.0  # those components vanish identically
            assert np.max(np.abs(ov_same - want)) < 1e-6
            assert np.max(np.abs(ov_diff)) < 1e-6

    def test_outside_box_rejected(self):
        with pytest.raises(GeometryError):
            mode_function(ModeIndex(1, 1, 1), np.array([1.5, 0.5, 0.5]), CUBE)

    def test_helmholtz_eigenrelation(self):
        rng = np.random.default_rng(2)
        idx = ModeIndex(2, 1, 3)
        k2 = idx.k(CUBE) ** 2
        for _ in range(5):
            r = rng.uniform(0.1, 0.9, 3)
            for sig in range(3):
                f = lambda x: mode_function(idx, x, CUBE)[sig]
                res = laplacian(f, r, 1e-3, order=4) + k2 * f(r)
                assert abs(res) < 1e-6 * max(k2 * abs(f(r)), k2 * 0.5)


class TestModeCurl:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(50):
            idx = ModeIndex(int(rng.integers(0, 4)), int(rng.integers(1, 4)),
                            int(rng.integers(1, 4)))
            r = rng.uniform(0.05, 0.95, 3)
            analytic = mode_curl(idx, r, CUBE)
            numeric = fd_curl(lambda x: mode_function(idx, x, CUBE), r, 1e-6)
            scale = max(np.max(np.abs(analytic)), idx.k(CUBE))
            worst = max(worst, np.max(np.abs(analytic - numeric)) / scale)
        assert worst < 1e-8

    def test_divergence_generally_nonzero(self):
        idx = ModeIndex(1, 1, 1)
        r = np.array([0.31, 0.42, 0.23])
        div = sum(
            gradient(lambda x: mode_function(idx, x, CUBE)[sig], r, 1e-6)[sig]
            for sig in range(3)
        )
        assert abs(div) > 1.0  # this basis is not solenoidal in the bulk

    def test_end_cap_normal_derivative_zero(self):
        # d/dx A^x vanishes on x = 0 and x = Lx
        idx = ModeIndex(2, 1, 1)
        for x0 in (0.0, 1.0):
            r = np.array([x0, 0.37, 0.61])

            def ax_comp(x):
                xs = np.clip(x, 0.0, 1.0)  # one-sided stencil stays in the box
                return mode_function(idx, xs, CUBE)[0]

            from cavdd.numdiff import one_sided_first
            d = one_sided_first(ax_comp, r, 0, 1e-4, +1 if x0 == 0.0 else -1)
            assert abs(d) < 1e-6 * idx.k(CUBE)

    def test_two_zero_indices_zero_and_skipped(self):
        idx = ModeIndex(0, 0, 2)
        r = np.array([0.3, 0.4, 0.5])
        assert np.allclose(mode_function(idx, r, CUBE), 0.0)
        assert np.allclose(mode_curl(idx, r, CUBE), 0.0)
        table = mode_table(CUBE, 12.0)
        nz = (table.m == 0).astype(int) + (table.n == 0) + (table.p == 0)
        assert np.all(nz <= 1)

    def test_enumeration_order(self):
        table = mode_table(CUBE, 9.0)
        assert np.all(np.diff(table.k) >= -1e-12)
        # ties broken lexicographically on (m, n, p)
        for i in range(len(table) - 1):
            if abs(table.k[i] - table.k[i + 1]) < 1e-12:
                assert (table.m[i], table.n[i], table.p[i]) < (
                    table.m[i + 1], table.n[i + 1], table.p[i + 1])


class TestZeta:
    def test_perpendicular_moment_zero(self):
        idx = ModeIndex(1, 1, 1)
        r = np.array([0.31, 0.62, 0.17])
        c = mode_curl(idx, r, CUBE)
        perp = np.cross(c, [0.3, 0.4, 0.5])
        d = transition_dipole(r, perp)
        assert zeta(d, LevelPair(0, 1), idx, CUBE, Constants()) == pytest.approx(0.0, abs=1e-14)

    def test_z_moment_center_110_symbolic(self):
        # symbolic curl of the (1,1,0) vector mode, z component at the box center
        x, y, z = sp.symbols("x y z", real=True)
        V = 1
        A = sp.Matrix([
            sp.sqrt(sp.Integer(8) / V) * sp.cos(sp.pi * x) * sp.sin(sp.pi * y) * sp.sin(0 * z),
            sp.sqrt(sp.Integer(8) / V) * sp.sin(sp.pi * x) * sp.cos(sp.pi * y) * sp.sin(0 * z),
            sp.sqrt(sp.Integer(4) / V) * sp.sin(sp.pi * x) * sp.sin(sp.pi * y) * sp.cos(0 * z),
        ])
        curl_z = sp.diff(A[1], x) - sp.diff(A[0], y)
        expected = float(curl_z.subs({x: sp.Rational(1, 2), y: sp.Rational(1, 2), z: sp.Rational(1, 2)}))
        d = transition_dipole(np.array([0.5, 0.5, 0.5]), EZ)
        got = zeta(d, LevelPair(0, 1), ModeIndex(1, 1, 0), CUBE, Constants())
        assert got == pytest.approx(expected, abs=1e-14)
        assert expected == 0.0  # both in-plane components carry sin(0 z) = 0

    def test_moment_linearity(self):
        idx = ModeIndex(2, 1, 1)
        r = np.array([0.21, 0.43, 0.65])
        m = np.array([0.2, -0.4, 0.9])
        d1 = transition_dipole(r, m)
        d2 = transition_dipole(r, 2 * m)
        k = Constants()
        assert zeta(d2, LevelPair(0, 1), idx, CUBE, k) == pytest.approx(
            2 * zeta(d1, LevelPair(0, 1), idx, CUBE, k), rel=1e-14)

    def test_components_sum_to_full_coupling(self):
        rng = np.random.default_rng(4)
        k = Constants()
        for _ in range(10):
            idx = ModeIndex(int(rng.integers(0, 3)), int(rng.integers(1, 3)),
                            int(rng.integers(1, 3)))
            d = transition_dipole(rng.uniform(0.1, 0.9, 3), rng.normal(size=3))
            parts = zeta_components(d, LevelPair(0, 1), idx, CUBE, k)
            total = zeta(d, LevelPair(0, 1), idx, CUBE, k)
            assert parts.sum() == pytest.approx(total, rel=1e-13, abs=1e-15)


class TestGreenModeSum:
    def test_reciprocity(self):
        r = np.array([0.61, 0.33, 0.57])
        rp = np.array([0.37, 0.52, 0.41])
        a = green_a_mode_sum(r, rp, 7.3, CUBE, 40.0)
        b = green_a_mode_sum(rp, r, 7.3, CUBE, 40.0)
        assert np.array_equal(a.gA, b.gA)

    def test_sidewall_zeros(self):
        r = np.array([0.0, 0.44, 0.61])
        res = green_a_mode_sum(r, np.array([0.37, 0.52, 0.41]), 7.3, CUBE, 40.0)
        assert res.gA[1] == 0.0 and res.gA[2] == 0.0

    def test_converges_toward_split_evaluation(self):
        r = np.array([0.61, 0.33, 0.57])
        rp = np.array([0.37, 0.52, 0.41])
        om = 7.3
        exact = green_tensor(r, rp, om, CUBE).gA
        gap_coarse = np.abs(green_a_mode_sum(r, rp, om, CUBE, 20.0).gA - exact)
        gap_fine = np.abs(green_a_mode_sum(r, rp, om, CUBE, 160.0).gA - exact)
        assert np.all(gap_fine < gap_coarse)
        assert np.all(gap_fine < 2e-3)

    def test_tail_estimate_positive_and_shrinking(self):
        r = np.array([0.61, 0.33, 0.57])
        rp = np.array([0.37, 0.52, 0.41])
        t40 = green_a_mode_sum(r, rp, 7.3, CUBE, 40.0)
        t160 = green_a_mode_sum(r, rp, 7.3, CUBE, 160.0)
        assert t40.tail > 0
        assert t160.tail < t40.tail

    def test_resonance_guard_names_mode(self):
        om = np.pi * np.sqrt(2.0)  # the degenerate (1,1,0)-family eigenfrequency
        with pytest.raises(ResonanceError,
                           match=r"\((1, 1, 0|1, 0, 1|0, 1, 1)\)"):
            green_a_mode_sum(np.array([0.6, 0.3, 0.5]), np.array([0.3, 0.5, 0.4]),
                             om, CUBE, 30.0)

    def test_cutoff_below_frequency_rejected(self):
        with pytest.raises(ValidationError, match="exceed"):
            green_a_mode_sum(np.array([0.6, 0.3, 0.5]), np.array([0.3, 0.5, 0.4]),
                             10.0, CUBE, 5.0)


class TestVModeSum:
    def test_wall_placed_dipole_decouples(self):
        # z moment on the bottom wall: every mode derivative entering the
        # contraction carries sin(0) = 0
        d1 = transition_dipole([0.3, 0.4, 0.0], EZ)
        d2 = transition_dipole([0.6, 0.4, 0.3], EZ)
        val = v_mode_sum(d1, d2, LevelPair(1, 0), LevelPair(0, 1), 20.0, CUBE,
                         Constants(), 45.0)
        assert val == 0.0

    def test_slow_convergence_against_split_oracle(self):
        # center pair, R = 0.2 L, omega/c = 20/L
        d1 = transition_dipole([0.5, 0.5, 0.5], EZ)
        d2 = transition_dipole([0.7, 0.5, 0.5], EZ)
        k = Constants()
        om = 20.0
        exact = np.array([0.0, 0.0, 1.0]) @ green_tensor(
            d2.position, d1.position, om, CUBE).T @ np.array([0.0, 0.0, 1.0])
        devs = {}
        for mult in (2, 4, 8, 16):
            val = v_mode_sum(d1, d2, LevelPair(1, 0), LevelPair(0, 1), om, CUBE, k,
                             mult * om)
            devs[mult] = abs(val - exact) / abs(exact)
        # the sign is right and the wander stays bounded, but convergence is
        # slow: still > 5% off at 4x the field wavenumber
        assert devs[4] > 0.05
        assert all(d < 0.5 for d in devs.values())

    def test_single_shell_partial_fraction_structure(self):
        # isolate one eigenfrequency in a non-degenerate box and compare the
        # restricted sum with the pole form (sum_s z2 z1 / 2 omega) / (omega - c k)
        g = CavityGeometry(0.8, 1.3, 1.1)
        idx = ModeIndex(1, 1, 1)
        ck = idx.k(g)
        om = 1.01 * ck  # nearest other eigenfrequency is 5.614, well outside the band
        rng = np.random.default_rng(5)
        r1, r2 = rng.uniform(0.2, 0.6, 3) * g.sides, rng.uniform(0.3, 0.7, 3) * g.sides
        d1 = transition_dipole(r1, [0.3, 0.7, 0.2], omega=om)
        d2 = transition_dipole(r2, [0.5, -0.1, 0.8], omega=om)
        k = Constants()
        res = near_resonant_estimate(d1, d2, LevelPair(1, 0), LevelPair(0, 1), om, g, k,
                                     band=0.09)
        z2 = zeta_components(d2, LevelPair(0, 1), idx, g, k)
        z1 = zeta_components(d1, LevelPair(1, 0), idx, g, k)
        pole_form = (z2 @ z1) / (2.0 * om) / (om - ck) * k.c**2
        assert res.n_modes == 1
        assert res.value == pytest.approx(pole_form, rel=2 * abs(om - ck) / om)

    def test_near_resonant_band_covers_all(self):
        d1 = transition_dipole([0.5, 0.5, 0.5], EZ, omega=9.0)
        d2 = transition_dipole([0.65, 0.45, 0.55], EZ, omega=9.0)
        k = Constants()
        full = v_mode_sum(d1, d2, LevelPair(1, 0), LevelPair(0, 1), 9.0, CUBE, k, 36.0)
        res = near_resonant_estimate(d1, d2, LevelPair(1, 0), LevelPair(0, 1), 9.0,
                                     CUBE, k, band=np.inf, cutoff=36.0)
        assert res.value == pytest.approx(full, rel=1e-13)
        assert not res.empty

    def test_near_resonant_empty_band(self):
        d1 = transition_dipole([0.5, 0.5, 0.5], EZ, omega=9.0)
        d2 = transition_dipole([0.65, 0.45, 0.55], EZ, omega=9.0)
        res = near_resonant_estimate(d1, d2, LevelPair(1, 0), LevelPair(0, 1), 9.0,
                                     CUBE, Constants(), band=1e-4)
        assert res.empty and res.value == 0.0 and res.n_modes == 0

    def test_near_resonant_shell_misses_most_of_the_interaction(self):
        # the near-resonant shell alone is a poor estimate of the full value;
        # individual sweep points can land near 1 by luck, so check two
        # separations of the center-line sweep
        for R in (0.1, 0.3):
            d1 = transition_dipole([0.5, 0.5, 0.5], EZ)
            d2 = transition_dipole([0.5 + R, 0.5, 0.5], EZ)
            res = near_resonant_estimate(d1, d2, LevelPair(1, 0), LevelPair(0, 1),
                                         20.0, CUBE, Constants(), band=2.0, cutoff=80.0)
            assert abs(res.ratio - 1.0) > 0.10
