"""Vectorized numpy implementation of the hot summation kernels.

This is the fallback used when the compiled extension is unavailable; both
backends share the same call signatures and produce results that agree to
rounding.  Mode sums are chunked to bound peak memory.
"""

import numpy as np
from scipy.special import erfc

BACKEND = "numpy"

_FOURPI = 4.0 * np.pi
_CHUNK = 1 << 16


def screened_kernel(R, k, Kc):
    """f(R) = cos(kR) erfc(Kc R) / (4 pi R) and its radial derivatives f', f''."""
    R = np.asarray(R, dtype=float)
    c = np.cos(k * R)
    s = np.sin(k * R)
    e = erfc(Kc * R)
    gauss = np.exp(-(Kc * Kc) * R * R)
    ep = -2.0 * Kc / np.sqrt(np.pi) * gauss
    epp = 4.0 * Kc**3 * R / np.sqrt(np.pi) * gauss
    rho = 1.0 / (_FOURPI * R)
    rho1 = -1.0 / (_FOURPI * R * R)
    rho2 = 2.0 / (_FOURPI * R**3)
    f = c * e * rho
    fp = -k * s * e * rho + c * ep * rho + c * e * rho1
    fpp = (
        -k * k * c * e * rho
        + c * epp * rho
        + c * e * rho2
        + 2.0 * (-k * s) * ep * rho
        + 2.0 * (-k * s) * e * rho1
        + 2.0 * c * ep * rho1
    )
    return f, fp, fpp


def image_sum(r2, pos, signs, jac, k, Kc):
    """Screened image-lattice sum of the Green diagonal and its mixed second derivatives.

    r2    : (3,) field point
    pos   : (N, 3) image positions (reflections of the source point)
    signs : (N, 3) per-component parity signs
    jac   : (N, 3) diagonal reflection Jacobian of each image w.r.t. the source

    Returns (gA[3], D[3,3,3], min_R) where D[q, p, n] = d2_p d1_n G1^q.
    """
    r2 = np.asarray(r2, dtype=float)
    u = r2[None, :] - pos  # (N, 3)
    R = np.sqrt(np.einsum("ni,ni->n", u, u))
    min_R = float(R.min())
    uh = u / R[:, None]
    f, fp, fpp = screened_kernel(R, k, Kc)
    gA = signs.T @ f
    # per image, q-independent: d[p,n] = -((f''-f'/R) uh_p uh_n + (f'/R) delta_pn) J_n
    a = fpp - fp / R
    b = fp / R
    d = -(a[:, None, None] * uh[:, :, None] * uh[:, None, :])
    d[:, np.arange(3), np.arange(3)] -= b[:, None]
    d = d * jac[:, None, :]
    D = np.einsum("nq,npm->qpm", signs, d)
    return gA, D, min_R


def _trig(kcomp, x):
    arg = kcomp * x
    return np.cos(arg), np.sin(arg)


def mode_sum(r2, r1, kvec, nf, w, with_dyadic=True):
    """Weighted eigenmode bilinear sum of the Green diagonal (and derivatives).

    r2, r1 : (3,) field and source points
    kvec   : (M, 3) mode wavevectors (m pi/Lx, n pi/Ly, p pi/Lz)
    nf     : (M, 3) per-component normalization factors
    w      : (M,) weights

    Returns (gA[3], D[3,3,3]); D[q, p, n] = d2_p d1_n G2^q, zeros if not requested.
    """
    r2 = np.asarray(r2, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    gA = np.zeros(3)
    D = np.zeros((3, 3, 3))
    M = kvec.shape[0]
    for lo in range(0, M, _CHUNK):
        hi = min(lo + _CHUNK, M)
        kx, ky, kz = kvec[lo:hi, 0], kvec[lo:hi, 1], kvec[lo:hi, 2]
        nfx, nfy, nfz = nf[lo:hi, 0], nf[lo:hi, 1], nf[lo:hi, 2]
        ww = w[lo:hi]
        A2, dA2 = _eval_modes(kx, ky, kz, nfx, nfy, nfz, r2, with_dyadic)
        A1, dA1 = _eval_modes(kx, ky, kz, nfx, nfy, nfz, r1, with_dyadic)
        gA += ((A2 * A1) * ww).sum(axis=1)
        if with_dyadic:
            D += np.einsum("pqm,nqm,m->qpn", dA2, dA1, ww)
    return gA, D


def _eval_modes(kx, ky, kz, nfx, nfy, nfz, r, with_dyadic):
    Cx, Sx = _trig(kx, r[0])
    Cy, Sy = _trig(ky, r[1])
    Cz, Sz = _trig(kz, r[2])
    A = np.array([nfx * Cx * Sy * Sz, nfy * Sx * Cy * Sz, nfz * Sx * Sy * Cz])
    if not with_dyadic:
        return A, None
    dA = np.empty((3, 3) + kx.shape)
    dA[0, 0] = -kx * nfx * Sx * Sy * Sz
    dA[1, 0] = ky * nfx * Cx * Cy * Sz
    dA[2, 0] = kz * nfx * Cx * Sy * Cz
    dA[0, 1] = kx * nfy * Cx * Cy * Sz
    dA[1, 1] = -ky * nfy * Sx * Sy * Sz
    dA[2, 1] = kz * nfy * Sx * Cy * Cz
    dA[0, 2] = kx * nfz * Cx * Sy * Cz
    dA[1, 2] = ky * nfz * Sx * Cy * Cz
    dA[2, 2] = -kz * nfz * Sx * Sy * Sz
    return A, dA
