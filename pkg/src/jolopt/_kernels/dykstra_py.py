"""Pure-numpy Dykstra projection onto {box} ∩ {halfspaces}.

Reference implementation; the Cython kernel mirrors this operation order
so both backends agree to floating-point roundoff.

Halfspaces a_j . x <= c_j are stored CSR-style (indptr/indices/data) with
precomputed squared norms.  The box correction is a dense vector; each
halfspace correction is t_j * a_j, so only the scalar t_j is kept.
"""

import math

import numpy as np


def dykstra_project(point, lower, upper, indptr, indices, data, offset, sqnorm,
                    tol, max_sweeps):
    """Return ``(z, converged, sweeps)``.

    Converged means the sweep-to-sweep correction residual fell to ``tol``
    and the iterate violates no constraint by more than ``tol`` (Euclidean
    distance for halfspaces, absolute for bounds).
    """
    x = np.array(point, dtype=np.float64)
    n = x.shape[0]
    m = offset.shape[0]
    p_box = np.zeros(n)
    t_hs = np.zeros(m)
    tol_sq = tol * tol

    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        resid = 0.0

        y = x + p_box
        x = np.clip(y, lower, upper)
        p_new = y - x
        diff = p_new - p_box
        resid += float(np.dot(diff, diff))
        p_box = p_new

        for j in range(m):
            lo, hi = indptr[j], indptr[j + 1]
            idx = indices[lo:hi]
            a = data[lo:hi]
            # a . (x + t_j a) - c, without forming the intermediate point
            viol = (float(np.dot(a, x[idx])) + t_hs[j] * sqnorm[j] - offset[j]) / sqnorm[j]
            t = viol if viol > 0.0 else 0.0
            step = t_hs[j] - t
            if step != 0.0:
                x[idx] += step * a
            resid += step * step * sqnorm[j]
            t_hs[j] = t

        if resid <= tol_sq and _max_violation(x, lower, upper, indptr, indices,
                                              data, offset, sqnorm) <= tol:
            return x, True, sweeps

    return x, False, sweeps


def _max_violation(x, lower, upper, indptr, indices, data, offset, sqnorm):
    worst = 0.0
    bound_viol = np.maximum(lower - x, x - upper)
    if bound_viol.size:
        worst = max(worst, float(bound_viol.max()))
    for j in range(offset.shape[0]):
        lo, hi = indptr[j], indptr[j + 1]
        d = (float(np.dot(data[lo:hi], x[indices[lo:hi]])) - offset[j]) / math.sqrt(sqnorm[j])
        if d > worst:
            worst = d
    return worst
