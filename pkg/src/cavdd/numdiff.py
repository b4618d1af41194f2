"""Central finite-difference helpers used by the self-test suite and tests.

These are validation oracles, never production paths.  Second-derivative
stencils optionally Richardson-extrapolate (h, h/2) to cancel the leading
h^2 error.
"""

import numpy as np


def _axis_step(ax, h):
    e = np.zeros(3)
    e[ax] = h
    return e


def mixed_second(f, x2, x1, p_ax, n_ax, h, richardson=True):
    """d^2 f / dx2_p dx1_n for a scalar or vector f(x2, x1)."""

    def stencil(hh):
        e2 = _axis_step(p_ax, hh)
        e1 = _axis_step(n_ax, hh)
        return (
            f(x2 + e2, x1 + e1) - f(x2 + e2, x1 - e1)
            - f(x2 - e2, x1 + e1) + f(x2 - e2, x1 - e1)
        ) / (4.0 * hh * hh)

    v1 = stencil(h)
    if not richardson:
        return v1
    v2 = stencil(h / 2.0)
    return (4.0 * v2 - v1) / 3.0


def derivative_table(f, x2, x1, h, richardson=True):
    """All nine mixed second derivatives D[p, n] (entries keep f's shape)."""
    rows = []
    for p_ax in range(3):
        cols = [mixed_second(f, x2, x1, p_ax, n_ax, h, richardson) for n_ax in range(3)]
        rows.append(cols)
    return np.array(rows)


def hessian(f, x, h, richardson=True):
    """Second-derivative matrix of a scalar f(x) at x."""

    def entry(p_ax, n_ax, hh):
        ep = _axis_step(p_ax, hh)
        if p_ax == n_ax:
            return (f(x + ep) - 2.0 * f(x) + f(x - ep)) / (hh * hh)
        en = _axis_step(n_ax, hh)
        return (
            f(x + ep + en) - f(x + ep - en) - f(x - ep + en) + f(x - ep - en)
        ) / (4.0 * hh * hh)

    H = np.empty((3, 3))
    for p_ax in range(3):
        for n_ax in range(3):
            v1 = entry(p_ax, n_ax, h)
            if richardson:
                v2 = entry(p_ax, n_ax, h / 2.0)
                v1 = (4.0 * v2 - v1) / 3.0
            H[p_ax, n_ax] = v1
    return H


def laplacian(f, x, h, order=4):
    """Central-difference Laplacian of a scalar field, 2nd or 4th order."""
    tot = 0.0
    for ax in range(3):
        e = _axis_step(ax, h)
        if order == 2:
            tot += (f(x + e) - 2.0 * f(x) + f(x - e)) / (h * h)
        else:
            tot += (
                -f(x + 2 * e) + 16.0 * f(x + e) - 30.0 * f(x) + 16.0 * f(x - e) - f(x - 2 * e)
            ) / (12.0 * h * h)
    return tot


def gradient(f, x, h):
    out = np.empty(3)
    for ax in range(3):
        e = _axis_step(ax, h)
        out[ax] = (f(x + e) - f(x - e)) / (2.0 * h)
    return out


def one_sided_first(f, x, ax, h, direction=+1):
    """Second-order one-sided first derivative, for points on a wall."""
    e = _axis_step(ax, h) * direction
    return direction * (-3.0 * f(x) + 4.0 * f(x + e) - f(x + 2 * e)) / (2.0 * h)


def curl(f_vec, x, h):
    """Central-difference curl of a vector field."""
    J = np.empty((3, 3))
    for ax in range(3):
        e = _axis_step(ax, h)
        J[ax] = (f_vec(x + e) - f_vec(x - e)) / (2.0 * h)
    return np.array([J[1, 2] - J[2, 1], J[2, 0] - J[0, 2], J[0, 1] - J[1, 0]])
