"""Pure-NumPy SMO solver for the epsilon-insensitive SVR dual.

Fallback used when the compiled extension ``pvlead._smo`` is unavailable.
Both backends implement the identical algorithm: maximal-violating-pair
working-set selection over the 2n box variables (alpha, alpha*), exact
two-variable subproblem solves with clipping, and an O(n) residual update
per iteration. Tie-breaks scan the alpha block before the alpha* block,
lowest index first, so the two backends follow the same iterate path.

The dual being solved, in beta = alpha - alpha* form:

    maximize  -0.5 beta' K beta + y' beta - eps * ||beta||_1
    s.t.      sum(beta) = 0,  -C <= beta_i <= C

``solve_epsilon_svr`` returns ``(beta, bias, iterations, kkt_violation,
dual_objective)`` where ``bias`` is the intercept of the prediction
function ``f(x) = sum_i beta_i K(x_i, x) + bias``.
"""

from __future__ import annotations

import numpy as np

_TAU = 1e-12


def solve_epsilon_svr(K, y, C, eps, tol, max_iter, trace=None):
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel matrix shape {K.shape} does not match {n} targets")
    if C <= 0 or eps < 0:
        raise ValueError("need C > 0 and eps >= 0")

    a = np.zeros(n)  # alpha,  pushes beta up
    s = np.zeros(n)  # alpha*, pushes beta down
    h = -y.copy()  # K @ beta - y, maintained incrementally

    if trace is not None:
        trace.append(_state(a, s, h, y, eps))

    it = 0
    while True:
        vp = h + eps
        vm = h - eps
        up = np.concatenate([np.where(a < C, vp, np.inf), np.where(s > 0.0, vm, np.inf)])
        low = np.concatenate([np.where(a > 0.0, vp, -np.inf), np.where(s < C, vm, -np.inf)])
        p = int(np.argmin(up))
        q = int(np.argmax(low))
        violation = float(low[q] - up[p])
        if violation <= tol or it >= max_iter:
            break

        zp = 1.0 if p < n else -1.0
        zq = 1.0 if q < n else -1.0
        ip = p if p < n else p - n
        iq = q if q < n else q - n
        gp = h[ip] + eps if zp > 0 else -h[ip] + eps
        gq = h[iq] + eps if zq > 0 else -h[iq] + eps
        q_pq = zp * zq * K[ip, iq]

        old_p = a[ip] if zp > 0 else s[ip]
        old_q = a[iq] if zq > 0 else s[iq]
        new_p, new_q = old_p, old_q
        if zp != zq:
            quad = K[ip, ip] + K[iq, iq] + 2.0 * q_pq
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
            quad = K[ip, ip] + K[iq, iq] - 2.0 * q_pq
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
        h += dbeta_p * K[ip] + dbeta_q * K[iq]
        it += 1
        if trace is not None:
            trace.append(_state(a, s, h, y, eps))

    beta = a - s
    bias = _bias(a, s, h, C, eps)
    objective = _objective(a, s, h, y, eps)
    return beta, bias, it, violation, objective


def _bias(a, s, h, C, eps):
    """Intercept from free dual variables, else the feasibility midpoint."""
    vp = h + eps
    vm = h - eps
    free = np.concatenate([vp[(a > 0.0) & (a < C)], vm[(s > 0.0) & (s < C)]])
    if free.size:
        return -float(free.mean())
    ub_cands = np.concatenate([vp[a == 0.0], vm[s == C]])
    lb_cands = np.concatenate([vm[s == 0.0], vp[a == C]])
    ub = float(ub_cands.min()) if ub_cands.size else np.inf
    lb = float(lb_cands.max()) if lb_cands.size else -np.inf
    return -(ub + lb) / 2.0


def _objective(a, s, h, y, eps):
    beta = a - s
    return float(-0.5 * beta @ h + 0.5 * beta @ y - eps * (a.sum() + s.sum()))


def _state(a, s, h, y, eps):
    beta = a - s
    return (
        _objective(a, s, h, y, eps),
        float(beta.sum()),
        float(np.abs(beta).max()) if beta.size else 0.0,
    )
