"""Pure-Python inner coordinate-descent loop (fallback for ``_cd``).

Same contract as the compiled ``cd_inner``: arrays ``res``, ``beta`` and
``Dbeta`` are updated in place and ``(alpha, n_sweeps, converged)`` is
returned.
"""
import math

import numpy as np


def _soft(mu, nu):
    if mu > nu:
        return mu - nu
    if mu < -nu:
        return mu + nu
    return 0.0


def cd_inner(Dt, w, res, beta, Dbeta, alpha, g1, g2, scale, kernel, tol, max_iter):
    m = Dt.shape[0]
    wsum = float(np.sum(w))
    if wsum <= 0.0:
        raise ArithmeticError("all Newton weights are zero")
    colw = scale * ((Dt * Dt) @ w)
    Dtw = Dt * w
    converged = False
    it = 0
    state = [alpha]

    def sweep(active_only):
        da = float(w @ res) / wsum
        state[0] += da
        res[:] -= da
        change = da * da
        for j in range(m):
            old = beta[j]
            if active_only and old == 0.0:
                continue
            t = scale * float(Dtw[j] @ res) + colw[j] * old
            if kernel:
                pjj = Dt[j, j]
                cross = Dbeta[j] - pjj * old
            else:
                pjj = 1.0
                cross = 0.0
            den = colw[j] + g2 * pjj
            new = _soft(t - g2 * cross, g1) / den if den > 0.0 else 0.0
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                col = Dt[j]
                res[:] -= col * delta
                Dbeta[:] += col * delta
                change += delta * delta
        return change

    while it < max_iter:
        it += 1
        if math.sqrt(sweep(False)) < tol:
            converged = True
            break
        while it < max_iter:
            it += 1
            if math.sqrt(sweep(True)) < tol:
                break
    return state[0], it, converged
