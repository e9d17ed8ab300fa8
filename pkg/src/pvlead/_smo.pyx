# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled SMO solver for the epsilon-insensitive SVR dual.

Mirrors ``pvlead._smo_py.solve_epsilon_svr`` exactly (same selection rule,
same update formulas, same tie-breaks); see that module for the algorithm
description. This version exists because the per-iteration work is a pair
of O(n) scans that dominate the experiment runtime.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double _TAU = 1e-12
cdef double _INF = float("inf")


def solve_epsilon_svr(K, y, double C, double eps, double tol, long max_iter, trace=None):
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel matrix shape {K.shape} does not match {n} targets")
    if C <= 0 or eps < 0:
        raise ValueError("need C > 0 and eps >= 0")

    a_arr = np.zeros(n)
    s_arr = np.zeros(n)
    h_arr = -y.copy()
    cdef double[:, ::1] Kv = K
    cdef double[::1] yv = y
    cdef double[::1] a = a_arr
    cdef double[::1] s = s_arr
    cdef double[::1] h = h_arr

    cdef bint do_trace = trace is not None
    if do_trace:
        trace.append(_state(a_arr, s_arr, h_arr, y, eps))

    cdef long it = 0
    cdef Py_ssize_t i, p, q, ip, iq
    cdef double v, min_up, max_low, violation
    cdef double zp, zq, gp, gq, q_pq, quad, delta, diff, total
    cdef double old_p, old_q, new_p, new_q, dbeta_p, dbeta_q

    violation = -_INF
    while True:
        min_up = _INF
        max_low = -_INF
        p = -1
        q = -1
        for i in range(n):
            v = h[i] + eps
            if a[i] < C and v < min_up:
                min_up = v
                p = i
            if a[i] > 0.0 and v > max_low:
                max_low = v
                q = i
        for i in range(n):
            v = h[i] - eps
            if s[i] > 0.0 and v < min_up:
                min_up = v
                p = n + i
            if s[i] < C and v > max_low:
                max_low = v
                q = n + i
        violation = max_low - min_up
        if violation <= tol or it >= max_iter:
            break

        zp = 1.0 if p < n else -1.0
        zq = 1.0 if q < n else -1.0
        ip = p if p < n else p - n
        iq = q if q < n else q - n
        gp = h[ip] + eps if zp > 0 else -h[ip] + eps
        gq = h[iq] + eps if zq > 0 else -h[iq] + eps
        q_pq = zp * zq * Kv[ip, iq]

        old_p = a[ip] if zp > 0 else s[ip]
        old_q = a[iq] if zq > 0 else s[iq]
        new_p = old_p
        new_q = old_q
        if zp != zq:
            quad = Kv[ip, ip] + Kv[iq, iq] + 2.0 * q_pq
            if quad <= 0.0:
                quad = _TAU
            delta = (-gp - gq) / quad
            diff = old_p - old_q
            new_p = old_p + delta
            new_q = old_q + delta
            if diff > 0.0:
                if new_q < 0.0:
                    new_q = 0.0
                    new_p = diff
            else:
                if new_p < 0.0:
                    new_p = 0.0
                    new_q = -diff
            if diff > 0.0:
                if new_p > C:
                    new_p = C
                    new_q = C - diff
            else:
                if new_q > C:
                    new_q = C
                    new_p = C + diff
        else:
            quad = Kv[ip, ip] + Kv[iq, iq] - 2.0 * q_pq
            if quad <= 0.0:
                quad = _TAU
            delta = (gp - gq) / quad
            total = old_p + old_q
            new_p = old_p - delta
            new_q = old_q + delta
            if total > C:
                if new_p > C:
                    new_p = C
                    new_q = total - C
            else:
                if new_q < 0.0:
                    new_q = 0.0
                    new_p = total
            if total > C:
                if new_q > C:
                    new_q = C
                    new_p = total - C
            else:
                if new_p < 0.0:
                    new_p = 0.0
                    new_q = total

        if zp > 0:
            a[ip] = new_p
        else:
            s[ip] = new_p
        if zq > 0:
            a[iq] = new_q
        else:
            s[iq] = new_q

        dbeta_p = zp * (new_p - old_p)
        dbeta_q = zq * (new_q - old_q)
        for i in range(n):
            h[i] += dbeta_p * Kv[ip, i] + dbeta_q * Kv[iq, i]
        it += 1
        if do_trace:
            trace.append(_state(a_arr, s_arr, h_arr, y, eps))

    beta = a_arr - s_arr
    bias = _bias(a_arr, s_arr, h_arr, C, eps)
    objective = _objective(a_arr, s_arr, h_arr, y, eps)
    return beta, bias, it, violation, objective


def _bias(a, s, h, double C, double eps):
    vp = h + eps
    vm = h - eps
    free = np.concatenate([vp[(a > 0.0) & (a < C)], vm[(s > 0.0) & (s < C)]])
    if free.size:
        return -float(free.mean())
    ub_cands = np.concatenate([vp[a == 0.0], vm[s == C]])
    lb_cands = np.concatenate([vm[s == 0.0], vp[a == C]])
    ub = float(ub_cands.min()) if ub_cands.size else _INF
    lb = float(lb_cands.max()) if lb_cands.size else -_INF
    return -(ub + lb) / 2.0


def _objective(a, s, h, y, double eps):
    beta = a - s
    return float(-0.5 * beta @ h + 0.5 * beta @ y - eps * (a.sum() + s.sum()))


def _state(a, s, h, y, double eps):
    beta = a - s
    return (
        _objective(a, s, h, y, eps),
        float(beta.sum()),
        float(np.abs(beta).max()) if beta.size else 0.0,
    )
