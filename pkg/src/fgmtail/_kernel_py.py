"""Pure numpy counting kernel; reference implementation of ``_kernel``.

``weighted_primaries`` maps uniforms and weights to weighted losses (numpy
for both backends, so the inputs to counting are identical).  ``count_chunk``
turns them into integer event counts for every threshold.  Column layout of the result:

joint mode (``MODE_JOINT``), per ``(x, y)``:
    0 ``sim``     #{S > x, T > y}
    1 ``asy1``    sum_{i,j} 1{theta_i X_i > x, Theta_j Y_j > y}
    2 ``a_all``   sum_{i,j} 1{theta_i X_i > x, Theta_j Y_j in (y, y+1]}
    3 ``a_diag``  sum_{i <= n^m} 1{theta_i X_i > x, Theta_i Y_i in (y, y+1]}
    4 ``b_all``   sum_{i,j} 1{theta_i X_i in (x, x+1], Theta_j Y_j > y}
    5 ``b_diag``  sum_{i <= n^m} 1{theta_i X_i in (x, x+1], Theta_i Y_i > y}

sum mode (``MODE_SUM``), per ``z``:
    0 ``sim``     #{S + T > z}
    1 ``asy1``    sum_i 1{theta_i X_i > z} + sum_j 1{Theta_j Y_j > z}
    2 ``lx``      sum_i 1{theta_i X_i in (z, z+1]}
    3 ``ly``      sum_j 1{Theta_j Y_j in (z, z+1]}
"""
from __future__ import annotations

import numpy as np
from scipy import special

FAM_PARETO, FAM_WEIBULL, FAM_LOGNORMAL = 0, 1, 2
MODE_JOINT, MODE_SUM = 0, 1
N_COUNTS = {MODE_JOINT: 6, MODE_SUM: 4}


def _quantile(fam, p, q):
    if fam == FAM_PARETO:
        return p[1] * np.expm1(-np.log1p(-q) / p[0])
    if fam == FAM_WEIBULL:
        return (-np.log1p(-q)) ** (1.0 / p[0])
    return np.exp(p[0] + p[1] * special.ndtri(q))


def _rowsum(a):
    # left-to-right, matching the compiled loop
    s = a[:, 0].copy()
    for i in range(1, a.shape[1]):
        s = s + a[:, i]
    return s


def weighted_primaries(U, theta, Theta, famF, pF, famG, pG, r):
    """Weighted primaries ``(theta_i X_i)`` and ``(Theta_j Y_j)`` for one chunk.

    ``U`` has shape ``(c, max(n, m), 2)``: ``U[..., 0]`` drives ``X`` and,
    through the conditional copula inverse, ``U[..., 1]`` drives ``Y``.
    Surplus indices when ``n != m`` keep only the needed coordinate of the
    pair, which is exactly a draw from that marginal.  Shared by both
    backends.
    """
    n, m = theta.shape[1], Theta.shape[1]
    u, w = U[:, :, 0], U[:, :, 1]
    A = r * (1.0 - 2.0 * u)
    onep = 1.0 + A
    v = 2.0 * w / (onep + np.sqrt(onep * onep - 4.0 * A * w))
    wx = theta * _quantile(famF, pF, u[:, :n])
    wy = Theta * _quantile(famG, pG, v[:, :m])
    return np.ascontiguousarray(wx), np.ascontiguousarray(wy)


def count_chunk(wx, wy, mode, t1, t2):
    """Event counts for one chunk of weighted primaries; layout in the module docstring."""
    n, m = wx.shape[1], wy.shape[1]
    S, T = _rowsum(wx), _rowsum(wy)
    k = min(n, m)
    out = np.zeros((len(t1), N_COUNTS[mode]), dtype=np.int64)
    for t, (x, y) in enumerate(zip(t1, t2)):
        if mode == MODE_JOINT:
            ex, ey = wx > x, wy > y
            sx = ex & (wx <= x + 1.0)
            sy = ey & (wy <= y + 1.0)
            cx, cy = ex.sum(1), ey.sum(1)
            nsx, nsy = sx.sum(1), sy.sum(1)
            out[t, 0] = np.count_nonzero((S > x) & (T > y))
            out[t, 1] = (cx * cy).sum()
            out[t, 2] = (cx * nsy).sum()
            out[t, 3] = np.count_nonzero(ex[:, :k] & sy[:, :k])
            out[t, 4] = (nsx * cy).sum()
            out[t, 5] = np.count_nonzero(sx[:, :k] & ey[:, :k])
        else:
            z = x
            ex, ey = wx > z, wy > z
            out[t, 0] = np.count_nonzero(S + T > z)
            out[t, 1] = np.count_nonzero(ex) + np.count_nonzero(ey)
            out[t, 2] = np.count_nonzero(ex & (wx <= z + 1.0))
            out[t, 3] = np.count_nonzero(ey & (wy <= z + 1.0))
    return out
