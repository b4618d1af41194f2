# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot summation kernels.

Same contracts as cavdd._kernels_np; selected automatically at import when
built.  Plain sequential loops: accumulation order matches the lexicographic
term order, so results agree with the numpy backend to rounding.
"""

import numpy as np

from libc.math cimport cos, erfc, exp, sin, sqrt

BACKEND = "cython"

cdef double FOURPI = 4.0 * 3.14159265358979323846
cdef double SQRTPI = 1.7724538509055160273


def image_sum(const double[::1] r2, const double[:, ::1] pos, const double[:, ::1] signs,
              const double[:, ::1] jac, double k, double Kc):
    """Screened image sum: (gA[3], D[3,3,3], min_R); see the numpy twin."""
    cdef Py_ssize_t n_img = pos.shape[0]
    cdef Py_ssize_t n, p, q, m
    cdef double u0, u1, u2, R, rmin = 1e300
    cdef double c, s, e, gauss, ep, epp, rho, rho1, rho2, f, fp, fpp, a, b
    cdef double uh[3]
    cdef double d[3][3]
    gA_arr = np.zeros(3)
    D_arr = np.zeros((3, 3, 3))
    cdef double[::1] gA = gA_arr
    cdef double[:, :, ::1] D = D_arr
    for n in range(n_img):
        u0 = r2[0] - pos[n, 0]
        u1 = r2[1] - pos[n, 1]
        u2 = r2[2] - pos[n, 2]
        R = sqrt(u0 * u0 + u1 * u1 + u2 * u2)
        if R < rmin:
            rmin = R
        if R == 0.0:
            continue  # coincident image; caller raises on rmin
        uh[0] = u0 / R
        uh[1] = u1 / R
        uh[2] = u2 / R
        c = cos(k * R)
        s = sin(k * R)
        e = erfc(Kc * R)
        gauss = exp(-(Kc * Kc) * R * R)
        ep = -2.0 * Kc / SQRTPI * gauss
        epp = 4.0 * Kc * Kc * Kc * R / SQRTPI * gauss
        rho = 1.0 / (FOURPI * R)
        rho1 = -1.0 / (FOURPI * R * R)
        rho2 = 2.0 / (FOURPI * R * R * R)
        f = c * e * rho
        fp = -k * s * e * rho + c * ep * rho + c * e * rho1
        fpp = (-k * k * c * e * rho + c * epp * rho + c * e * rho2
               + 2.0 * (-k * s) * ep * rho + 2.0 * (-k * s) * e * rho1
               + 2.0 * c * ep * rho1)
        a = fpp - fp / R
        b = fp / R
        for p in range(3):
            for m in range(3):
                d[p][m] = -(a * uh[p] * uh[m] + (b if p == m else 0.0)) * jac[n, m]
        for q in range(3):
            gA[q] += signs[n, q] * f
            for p in range(3):
                for m in range(3):
                    D[q, p, m] += signs[n, q] * d[p][m]
    return gA_arr, D_arr, rmin


def mode_sum(const double[::1] r2, const double[::1] r1, const double[:, ::1] kvec, const double[:, ::1] nf,
             const double[::1] w, bint with_dyadic=True):
    """Weighted eigenmode bilinear sum: (gA[3], D[3,3,3]); see the numpy twin."""
    cdef Py_ssize_t M = kvec.shape[0]
    cdef Py_ssize_t i, p, q, n
    cdef double kx, ky, kz, nfx, nfy, nfz, ww
    cdef double cx2, sx2, cy2, sy2, cz2, sz2
    cdef double cx1, sx1, cy1, sy1, cz1, sz1
    cdef double A2[3]
    cdef double A1[3]
    cdef double dA2[3][3]
    cdef double dA1[3][3]
    gA_arr = np.zeros(3)
    D_arr = np.zeros((3, 3, 3))
    cdef double[::1] gA = gA_arr
    cdef double[:, :, ::1] D = D_arr
    for i in range(M):
        kx = kvec[i, 0]
        ky = kvec[i, 1]
        kz = kvec[i, 2]
        nfx = nf[i, 0]
        nfy = nf[i, 1]
        nfz = nf[i, 2]
        ww = w[i]
        cx2 = cos(kx * r2[0]); sx2 = sin(kx * r2[0])
        cy2 = cos(ky * r2[1]); sy2 = sin(ky * r2[1])
        cz2 = cos(kz * r2[2]); sz2 = sin(kz * r2[2])
        cx1 = cos(kx * r1[0]); sx1 = sin(kx * r1[0])
        cy1 = cos(ky * r1[1]); sy1 = sin(ky * r1[1])
        cz1 = cos(kz * r1[2]); sz1 = sin(kz * r1[2])
        A2[0] = nfx * cx2 * sy2 * sz2
        A2[1] = nfy * sx2 * cy2 * sz2
        A2[2] = nfz * sx2 * sy2 * cz2
        A1[0] = nfx * cx1 * sy1 * sz1
        A1[1] = nfy * sx1 * cy1 * sz1
        A1[2] = nfz * sx1 * sy1 * cz1
        for q in range(3):
            gA[q] += (A2[q] * A1[q]) * ww
        if not with_dyadic:
            continue
        dA2[0][0] = -kx * nfx * sx2 * sy2 * sz2
        dA2[1][0] = ky * nfx * cx2 * cy2 * sz2
        dA2[2][0] = kz * nfx * cx2 * sy2 * cz2
        dA2[0][1] = kx * nfy * cx2 * cy2 * sz2
        dA2[1][1] = -ky * nfy * sx2 * sy2 * sz2
        dA2[2][1] = kz * nfy * sx2 * cy2 * cz2
        dA2[0][2] = kx * nfz * cx2 * sy2 * cz2
        dA2[1][2] = ky * nfz * sx2 * cy2 * cz2
        dA2[2][2] = -kz * nfz * sx2 * sy2 * sz2
        dA1[0][0] = -kx * nfx * sx1 * sy1 * sz1
        dA1[1][0] = ky * nfx * cx1 * cy1 * sz1
        dA1[2][0] = kz * nfx * cx1 * sy1 * cz1
        dA1[0][1] = kx * nfy * cx1 * cy1 * sz1
        dA1[1][1] = -ky * nfy * sx1 * sy1 * sz1
        dA1[2][1] = kz * nfy * sx1 * cy1 * cz1
        dA1[0][2] = kx * nfz * cx1 * sy1 * cz1
        dA1[1][2] = ky * nfz * sx1 * cy1 * cz1
        dA1[2][2] = -kz * nfz * sx1 * sy1 * sz1
        for q in range(3):
            for p in range(3):
                for n in range(3):
                    D[q, p, n] += (dA2[p][q] * dA1[n][q]) * ww
    return gA_arr, D_arr
