"""Face kernels of the path-conservative scheme.

Every kernel takes left/right conserved states flattened to shape (F, n) and
the sparse pieces of a MatrixForm. The numba and numpy versions compute the
same quantities; ``face_fluctuations`` dispatches on the backend flag.
"""
import numpy as np

from ._backend import HAVE_NUMBA, USE_NUMBA


def fluctuations_numpy(UL, UR, s, form, g):
    """D- and D+ for every face: 0.5 (M dU -/+ s dU) with M at the mean state."""
    (cr, cc, cv, lr, lc, lk, lv, qr, qk, ql, qv) = form.as_arrays()
    Us = 0.5 * (UL + UR)
    h = Us[:, 0]
    w = Us[:, 1:] / h[:, None]
    dU = UR - UL
    MdU = np.zeros_like(dU)
    for r, c, v in zip(cr, cc, cv):
        MdU[:, r] += v * dU[:, c]
    for r, c, k, v in zip(lr, lc, lk, lv):
        MdU[:, r] += v * w[:, k] * dU[:, c]
    for r, k, l, v in zip(qr, qk, ql, qv):
        MdU[:, r] += v * w[:, k] * w[:, l] * dU[:, 0]
    if form.grav_row >= 0:
        MdU[:, form.grav_row] += g * h * dU[:, 0]
    sdU = s[:, None] * dU
    return 0.5 * (MdU - sdU), 0.5 * (MdU + sdU)


def speeds_numpy(UL, UR, iu, ia, g, node_max):
    """Upper bound on max |eigenvalue| at the mean state for closed-form spectra.

    ``iu`` and ``ia`` are the conserved indices of the normal velocity and of
    the first normal moment.
    """
    h = 0.5 * (UL[:, 0] + UR[:, 0])
    u = 0.5 * (UL[:, iu] + UR[:, iu]) / h
    a = 0.5 * (UL[:, ia] + UR[:, ia]) / h
    return np.abs(u) + np.maximum(np.sqrt(g * h + a * a), node_max * np.abs(a))


if HAVE_NUMBA:
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def _fluct_nb(UL, UR, s, cr, cc, cv, lr, lc, lk, lv, qr, qk, ql, qv, grav_row, g, Dm, Dp):
        F, n = UL.shape
        for f in prange(F):
            w = np.empty(n - 1)
            dU = np.empty(n)
            MdU = np.zeros(n)
            h = 0.5 * (UL[f, 0] + UR[f, 0])
            for k in range(n - 1):
                w[k] = 0.5 * (UL[f, k + 1] + UR[f, k + 1]) / h
            for k in range(n):
                dU[k] = UR[f, k] - UL[f, k]
            for t in range(cr.size):
                MdU[cr[t]] += cv[t] * dU[cc[t]]
            for t in range(lr.size):
                MdU[lr[t]] += lv[t] * w[lk[t]] * dU[lc[t]]
            for t in range(qr.size):
                MdU[qr[t]] += qv[t] * w[qk[t]] * w[ql[t]] * dU[0]
            if grav_row >= 0:
                MdU[grav_row] += g * h * dU[0]
            for k in range(n):
                sd = s[f] * dU[k]
                Dm[f, k] = 0.5 * (MdU[k] - sd)
                Dp[f, k] = 0.5 * (MdU[k] + sd)

    @njit(cache=True, parallel=True)
    def _speeds_nb(UL, UR, iu, ia, g, node_max, out):
        for f in prange(UL.shape[0]):
            h = 0.5 * (UL[f, 0] + UR[f, 0])
            u = 0.5 * (UL[f, iu] + UR[f, iu]) / h
            a = 0.5 * (UL[f, ia] + UR[f, ia]) / h
            out[f] = abs(u) + max(np.sqrt(g * h + a * a), node_max * abs(a))

    def fluctuations_numba(UL, UR, s, form, g):
        UL = np.ascontiguousarray(UL)
        UR = np.ascontiguousarray(UR)
        Dm = np.empty_like(UL)
        Dp = np.empty_like(UL)
        _fluct_nb(UL, UR, np.ascontiguousarray(s), *form.as_arrays(), form.grav_row, float(g), Dm, Dp)
        return Dm, Dp

    def speeds_numba(UL, UR, iu, ia, g, node_max):
        out = np.empty(UL.shape[0])
        _speeds_nb(np.ascontiguousarray(UL), np.ascontiguousarray(UR), iu, ia, float(g), float(node_max), out)
        return out
else:  # pragma: no cover
    fluctuations_numba = fluctuations_numpy
    speeds_numba = speeds_numpy

face_fluctuations = fluctuations_numba if USE_NUMBA else fluctuations_numpy
face_speeds = speeds_numba if USE_NUMBA else speeds_numpy
