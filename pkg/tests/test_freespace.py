import numpy as np
import pytest
import sympy as sp

from cavdd.core import Constants, DegenerateSeparationError, Dipole
from cavdd.freespace import green_a_free, pair_interaction_free, v_retarded, v_static
from cavdd.numdiff import hessian, laplacian

MU0_4PI = 1.0 / (4 * np.pi)
EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])
EZ = np.array([0.0, 0.0, 1.0])


def static_oracle_symbolic():
    """Independent route to the static interaction: B = curl A with the
    standard dipole vector potential A = mu0 (m x r)/(4 pi r^3), then
    V = -m2 . B1(r).  Returns a callable (m1, m2, rvec) -> V with mu0 = 1."""
    x, y, z = sp.symbols("x y z", real=True)
    m1x, m1y, m1z = sp.symbols("m1x m1y m1z", real=True)
    r = sp.Matrix([x, y, z])
    m1 = sp.Matrix([m1x, m1y, m1z])
    rn = sp.sqrt(x**2 + y**2 + z**2)
    A = m1.cross(r) / (4 * sp.pi * rn**3)
    B = sp.Matrix([
        sp.diff(A[2], y) - sp.diff(A[1], z),
        sp.diff(A[0], z) - sp.diff(A[2], x),
        sp.diff(A[1], x) - sp.diff(A[0], y),
    ])
    B_fn = sp.lambdify((x, y, z, m1x, m1y, m1z), B, "numpy")

    def oracle(m1v, m2v, rvec):
        Bv = np.array(B_fn(rvec[0], rvec[1], rvec[2], *m1v)).ravel()
        return -float(np.dot(m2v, Bv))

    return oracle


class TestStatic:
    def test_perpendicular_moments_vs_symbolic_oracle(self):
        oracle = static_oracle_symbolic()
        r1 = np.zeros(3)
        for R in (0.5, 1.0, 2.3):
            r2 = r1 + R * EX
            got = v_static(EZ, EZ, r1, r2)
            assert got == pytest.approx(MU0_4PI / R**3, rel=1e-14)
            assert got == pytest.approx(oracle(EZ, EZ, r2 - r1), rel=1e-12)

    def test_symbolic_oracle_random(self):
        oracle = static_oracle_symbolic()
        rng = np.random.default_rng(1)
        for _ in range(25):
            m1 = rng.normal(size=3)
            m2 = rng.normal(size=3)
            r1 = rng.normal(size=3)
            r2 = r1 + rng.normal(size=3) * 2
            assert v_static(m1, m2, r1, r2) == pytest.approx(
                oracle(m1, m2, r2 - r1), rel=1e-11, abs=1e-13)

    def test_orthogonal_zero(self):
        assert v_static(EX, EY, np.zeros(3), 1.3 * EX) == 0.0

    def test_collinear(self):
        R = 0.7
        assert v_static(EX, EX, np.zeros(3), R * EX) == pytest.approx(
            -2 * MU0_4PI / R**3, rel=1e-14)

    def test_inverse_cube_scaling(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            m1, m2 = rng.normal(size=3), rng.normal(size=3)
            r1 = rng.normal(size=3)
            d = rng.normal(size=3)
            v1 = v_static(m1, m2, r1, r1 + d)
            v2 = v_static(m1, m2, r1, r1 + 2 * d)
            assert v2 == pytest.approx(v1 / 8.0, rel=1e-12)

    def test_coincident_positions_rejected(self):
        with pytest.raises(DegenerateSeparationError):
            v_static(EX, EX, np.ones(3), np.ones(3))


class TestRetarded:
    def test_zero_frequency_equals_static(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            m1, m2 = rng.normal(size=3), rng.normal(size=3)
            r1 = rng.normal(size=3)
            r2 = r1 + rng.normal(size=3)
            if np.linalg.norm(r2 - r1) < 1e-3:
                continue
            vs = v_static(m1, m2, r1, r2)
            vr = v_retarded(m1, m2, r1, r2, 0.0)
            assert vr == pytest.approx(vs, rel=1e-12, abs=1e-300)

    def test_eta_pi_closed_form(self):
        # eta = pi: cos = -1, sin = 0, perpendicular moments -> (pi^2 - 1) prefactor
        R = 0.23
        omega = np.pi / R
        got = v_retarded(EZ, EZ, np.zeros(3), R * EX, omega)
        assert got == pytest.approx(MU0_4PI / R**3 * (np.pi**2 - 1.0), rel=1e-13)

    def test_even_in_omega(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            m1, m2 = rng.normal(size=3), rng.normal(size=3)
            r1 = rng.normal(size=3)
            r2 = r1 + rng.normal(size=3)
            if np.linalg.norm(r2 - r1) < 1e-3:
                continue
            w = rng.uniform(0.1, 30)
            assert v_retarded(m1, m2, r1, r2, w) == v_retarded(m1, m2, r1, r2, -w)

    def test_exchange_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            m1, m2 = rng.normal(size=3), rng.normal(size=3)
            r1 = rng.normal(size=3)
            r2 = r1 + rng.normal(size=3)
            if np.linalg.norm(r2 - r1) < 1e-3:
                continue
            w = rng.uniform(0.1, 10)
            assert v_retarded(m1, m2, r1, r2, w) == pytest.approx(
                v_retarded(m2, m1, r2, r1, w), rel=1e-14)

    def test_contraction_identity_finite_differences(self):
        # mu0 [m2.m1 lap - (m2.grad)(m1.grad)] applied to the scalar kernel
        rng = np.random.default_rng(6)
        checked = 0
        while checked < 100:
            m1, m2 = rng.normal(size=3), rng.normal(size=3)
            r1 = rng.normal(size=3)
            r2 = r1 + rng.normal(size=3)
            R = np.linalg.norm(r2 - r1)
            if R < 0.3:
                continue
            w = rng.uniform(0.1, 5)

            f = lambda x: green_a_free(x, r1, w)
            h = 1e-3 * R  # larger than the production default: keeps FD roundoff
            lap = laplacian(f, r2, h, order=4)  # below the 1e-6 check tolerance
            hess = hessian(f, r2, h)
            got = (m2 @ m1) * lap - m2 @ hess @ m1
            want = v_retarded(m1, m2, r1, r2, w)
            assert got == pytest.approx(want, rel=1e-6), (m1, m2, r1, r2, w)
            checked += 1


class TestGreenFree:
    def test_quarter_wave_zero(self):
        # kR = pi/2
        assert green_a_free(np.array([0.5, 0, 0]), np.zeros(3), np.pi) == pytest.approx(
            0.0, abs=1e-16)

    def test_static_value(self):
        assert green_a_free(np.array([1.0, 0, 0]), np.zeros(3), 0.0) == pytest.approx(
            1.0 / (4 * np.pi), rel=1e-15)

    def test_helmholtz_residual_step_halving(self):
        rng = np.random.default_rng(7)
        w = 3.0
        for _ in range(10):
            r2 = rng.normal(size=3)
            r2 *= rng.uniform(0.1, 1.0) / np.linalg.norm(r2)
            f = lambda x: green_a_free(x, np.zeros(3), w)
            res = []
            for h in (2e-3, 1e-3):
                res.append(abs(laplacian(f, r2, h, order=2) + w * w * f(r2)))
            # 2nd-order stencil: residual shrinks ~4x per halving
            assert res[1] < res[0] / 2.5
            # Richardson-extrapolated stencil leaves only the h^4 error
            lap = (4.0 * laplacian(f, r2, 1e-3, order=2)
                   - laplacian(f, r2, 2e-3, order=2)) / 3.0
            scale = max(abs(w * w * f(r2)), abs(f(r2)) / np.linalg.norm(r2) ** 2)
            assert abs(lap + w * w * f(r2)) < 1e-5 * scale


def dipole(position, energies, moments):
    return Dipole(position=np.asarray(position, float), energies=np.asarray(energies, float),
                  moments=np.asarray(moments, float))


def one_level(position, moment):
    mom = np.zeros((1, 1, 3))
    mom[0, 0] = moment
    return dipole(position, [0.0], mom)


def two_level_transition(position, moment, omega=4.0):
    mom = np.zeros((2, 2, 3))
    mom[0, 1] = moment
    mom[1, 0] = moment
    return dipole(position, [0.0, omega], mom)


class TestPairTable:
    def test_static_pair_single_entry(self):
        d1 = one_level([0, 0, 0], EZ)
        d2 = one_level([0.8, 0, 0], EZ)
        table = pair_interaction_free(d1, d2)
        assert len(table) == 1
        e = table.entries[0]
        assert e.term_class == "permanent"
        assert e.v_sym == pytest.approx(v_static(EZ, EZ, d1.position, d2.position), rel=1e-15)

    def test_resonant_pair_matches_retarded(self):
        w = 6.0
        d1 = two_level_transition([0, 0, 0], EZ, w)
        d2 = two_level_transition([0.5, 0, 0], EZ, w)
        table = pair_interaction_free(d1, d2)
        e = table.lookup(0, 1, 1, 0)
        assert e.term_class == "resonant"
        want = v_retarded(EZ, EZ, d1.position, d2.position, w)
        assert e.v_21 == pytest.approx(want, rel=1e-15)
        assert e.v_12 == pytest.approx(want, rel=1e-15)

    def test_permanent_transition_cross_terms(self):
        # dipole-1 permanent only, dipole-2 transition only
        d1 = one_level([0, 0, 0], EZ)
        d2 = two_level_transition([0.6, 0, 0], EX, omega=3.0)
        table = pair_interaction_free(d1, d2)
        n1, n2 = 1, 2
        assert len(table) == n1**2 * n2**2  # one row per (u,v,a,b)
        # brute-force enumeration: two directional values per row
        directional = 0
        for e in table:
            directional += 2
        assert directional == 2 * n1**2 * n2**2
        e = table.lookup(0, 1, 0, 0)
        assert e.term_class == "permanent-transition"
        assert e.omega_21 == 0.0          # 2<-1 at the permanent (zero) frequency
        assert e.omega_12 == -3.0         # 1<-2 at the transition frequency of dipole 2
        assert e.v_21 == pytest.approx(
            v_static(EZ, EX, d1.position, d2.position), rel=1e-15)
        assert e.v_12 == pytest.approx(
            v_retarded(EX, EZ, d2.position, d1.position, -3.0), rel=1e-15)

    def test_brute_force_values(self):
        rng = np.random.default_rng(8)
        n1, n2 = 2, 3
        mom1 = rng.normal(size=(n1, n1, 3))
        mom1 = 0.5 * (mom1 + np.swapaxes(mom1, 0, 1))
        mom2 = rng.normal(size=(n2, n2, 3))
        mom2 = 0.5 * (mom2 + np.swapaxes(mom2, 0, 1))
        d1 = dipole([0, 0, 0], np.sort(rng.uniform(0, 5, n1)), mom1)
        d2 = dipole([0.9, 0.2, -0.3], np.sort(rng.uniform(0, 5, n2)), mom2)
        table = pair_interaction_free(d1, d2)
        assert len(table) == n1**2 * n2**2
        k = Constants()
        for u in range(n2):
            for v in range(n2):
                for a in range(n1):
                    for b in range(n1):
                        e = table.lookup(u, v, a, b)
                        w21 = (d1.energies[a] - d1.energies[b]) / k.hbar
                        w12 = (d2.energies[u] - d2.energies[v]) / k.hbar
                        assert e.v_21 == pytest.approx(v_retarded(
                            mom1[a, b], mom2[u, v], d1.position, d2.position, w21),
                            rel=1e-13, abs=1e-15)
                        assert e.v_12 == pytest.approx(v_retarded(
                            mom2[u, v], mom1[a, b], d2.position, d1.position, w12),
                            rel=1e-13, abs=1e-15)
                        assert e.v_sym == pytest.approx(0.5 * (e.v_21 + e.v_12), rel=1e-15)

    def test_symmetrized_table_relabel_invariance(self):
        d1 = two_level_transition([0, 0, 0], EZ, 4.0)
        d2 = two_level_transition([0.5, 0.1, 0], EX, 7.0)
        t12 = pair_interaction_free(d1, d2)
        t21 = pair_interaction_free(d2, d1)
        for e in t12:
            mirror = t21.lookup(e.a, e.b, e.u, e.v)
            assert mirror.v_sym == pytest.approx(e.v_sym, rel=1e-14, abs=1e-18)

    def test_hermitian_pairing_complex_moments(self):
        mom = np.zeros((2, 2, 3), dtype=complex)
        mom[0, 1] = (0.3, 0.5j, 1.0)
        mom[1, 0] = np.conj(mom[0, 1])
        d1 = Dipole(position=np.zeros(3), energies=np.array([0.0, 2.0]), moments=mom)
        d2 = Dipole(position=np.array([0.7, 0, 0]), energies=np.array([0.0, 2.0]),
                    moments=mom)
        table = pair_interaction_free(d1, d2)
        for e in table:
            partner = table.lookup(e.v, e.u, e.b, e.a)
            assert partner.v_sym == pytest.approx(np.conj(e.v_sym), rel=1e-13, abs=1e-18)
