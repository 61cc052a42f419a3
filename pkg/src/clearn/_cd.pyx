# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner coordinate-descent loop.

Minimizes, over (alpha, beta),

    scale/2 * sum_i w_i (alpha + D_i . beta - z_i)^2
        + g2 * P(beta) + g1 * ||beta||_1

where P is 1/2 beta' K beta (``kernel=True``, D = K) or 1/2 ||beta||^2
(``kernel=False``).  ``Dt`` holds the columns of D as rows.  ``res`` is the
working residual z - alpha - D beta and ``Dbeta`` is D beta; both are
updated in place, as is ``beta``.

Each full sweep over all coordinates is followed by sweeps restricted to
the nonzero coordinates until those settle; convergence is declared only
on a full sweep.  ``max_iter`` caps the total number of sweeps.
"""
from libc.math cimport sqrt


cdef inline double _soft(double mu, double nu) nogil:
    if mu > nu:
        return mu - nu
    if mu < -nu:
        return mu + nu
    return 0.0


def cd_inner(const double[:, ::1] Dt, const double[::1] w, double[::1] res,
             double[::1] beta, double[::1] Dbeta, double alpha,
             double g1, double g2, double scale, bint kernel,
             double tol, int max_iter):
    cdef Py_ssize_t m = Dt.shape[0]
    cdef Py_ssize_t n = Dt.shape[1]
    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef bint converged = False
    cdef double wsum = 0.0, acc, change
    cdef double[::1] colw

    import numpy as np
    colw = np.empty(m)
    for i in range(n):
        wsum += w[i]
    if wsum <= 0.0:
        raise ArithmeticError("all Newton weights are zero")
    for j in range(m):
        acc = 0.0
        for i in range(n):
            acc += Dt[j, i] * Dt[j, i] * w[i]
        colw[j] = scale * acc

    with nogil:
        while it < max_iter:
            it += 1
            change = _sweep(Dt, w, res, beta, Dbeta, &alpha, colw, wsum, g1, g2, scale, kernel, False)
            if sqrt(change) < tol:
                converged = True
                break
            # settle the active set before the next full sweep
            while it < max_iter:
                it += 1
                change = _sweep(Dt, w, res, beta, Dbeta, &alpha, colw, wsum, g1, g2, scale, kernel, True)
                if sqrt(change) < tol:
                    break
    return alpha, it, converged


cdef double _sweep(const double[:, ::1] Dt, const double[::1] w, double[::1] res,
                   double[::1] beta, double[::1] Dbeta, double* alpha, double[::1] colw,
                   double wsum, double g1, double g2, double scale, bint kernel,
                   bint active_only) noexcept nogil:
    cdef Py_ssize_t m = Dt.shape[0]
    cdef Py_ssize_t n = Dt.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc, t, cross, pjj, den, new, old, delta, da, change

    acc = 0.0
    for i in range(n):
        acc += w[i] * res[i]
    da = acc / wsum
    alpha[0] += da
    for i in range(n):
        res[i] -= da
    change = da * da
    for j in range(m):
        old = beta[j]
        if active_only and old == 0.0:
            continue
        acc = 0.0
        for i in range(n):
            acc += Dt[j, i] * w[i] * res[i]
        t = scale * acc + colw[j] * old
        if kernel:
            pjj = Dt[j, j]
            cross = Dbeta[j] - pjj * old
        else:
            pjj = 1.0
            cross = 0.0
        den = colw[j] + g2 * pjj
        if den > 0.0:
            new = _soft(t - g2 * cross, g1) / den
        else:
            new = 0.0
        delta = new - old
        if delta != 0.0:
            beta[j] = new
            for i in range(n):
                res[i] -= Dt[j, i] * delta
                Dbeta[i] += Dt[j, i] * delta
            change += delta * delta
    return change
