"""Independent reference solvers for the SVR dual, used only to check the
SMO solver. Two routes, deliberately different from SMO and from each other:

* ``solve_dual_reference`` - accelerated projected gradient on the boxed
  2n-variable dual with an exact equality-constraint projection, finished
  by an exact linear solve on the identified active set.
* ``solve_dual_enumeration`` - dense enumeration of all 5^n bound/sign
  assignments (tiny n only), solving each candidate KKT system exactly.

Both return ``(beta, bias, objective)`` with the same conventions as the
production solver: ``f(x) = sum beta_i K(x_i, x) + bias`` and objective
``-0.5 b'Kb + y'b - eps ||b||_1``.
"""

from __future__ import annotations

import itertools

import numpy as np

# beta-state codes for active-set assignments
_LB, _NEGFREE, _ZERO, _POSFREE, _UB = -2, -1, 0, 1, 2


def dual_objective(K, y, eps, beta) -> float:
    beta = np.asarray(beta, dtype=np.float64)
    return float(-0.5 * beta @ (K @ beta) + y @ beta - eps * np.abs(beta).sum())


def kkt_violation(K, y, C, eps, beta) -> float:
    """Maximal-violating-pair gap of a canonical (overlap-free) dual point."""
    a = np.maximum(beta, 0.0)
    s = np.maximum(-beta, 0.0)
    h = K @ beta - y
    vp = h + eps
    vm = h - eps
    up = np.concatenate([vp[a < C], vm[s > 0.0]])
    low = np.concatenate([vp[a > 0.0], vm[s < C]])
    min_up = up.min() if up.size else np.inf
    max_low = low.max() if low.size else -np.inf
    return float(max_low - min_up)


def recover_bias(K, y, C, eps, beta) -> float:
    """Intercept from free dual coordinates, else the feasibility midpoint."""
    a = np.maximum(beta, 0.0)
    s = np.maximum(-beta, 0.0)
    h = K @ beta - y
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


def _project(u: np.ndarray, C: float) -> np.ndarray:
    """Exact projection onto {0 <= theta <= C, sum(alpha) - sum(alpha*) = 0}.

    theta(nu) = clip(u + nu*z, 0, C) with z = [+1..., -1...]; the constraint
    residual is piecewise linear and nondecreasing in nu, so the root is
    found exactly from the sorted breakpoints.
    """
    n2 = u.size
    n = n2 // 2
    up, um = u[:n], u[n:]
    breaks = np.concatenate([-up, C - up, um, um - C])
    breaks.sort()

    def resid(nu):
        return float(
            np.clip(up + nu, 0.0, C).sum() - np.clip(um - nu, 0.0, C).sum()
        )

    values = np.array([resid(nu) for nu in breaks])
    if values[0] >= 0.0:
        lo, hi = breaks[0] - (C + 1.0), breaks[0]
        r_lo, r_hi = resid(lo), values[0]
    else:
        k = int(np.searchsorted(values >= 0.0, True))
        lo, hi = breaks[k - 1], breaks[k]
        r_lo, r_hi = values[k - 1], values[k]
    if r_hi == r_lo:
        nu = lo
    else:
        nu = lo - r_lo * (hi - lo) / (r_hi - r_lo)
    z = np.concatenate([np.ones(n), -np.ones(n)])
    return np.clip(u + nu * z, 0.0, C)


def _canonicalize(theta: np.ndarray) -> np.ndarray:
    """Remove alpha/alpha* overlap; never worsens the objective."""
    n = theta.size // 2
    beta = theta[:n] - theta[n:]
    return np.concatenate([np.maximum(beta, 0.0), np.maximum(-beta, 0.0)])


def _solve_state_assignment(K, y, C, eps, states):
    """Solve the KKT equality system for one bound/sign assignment.

    Returns (beta, rho) or None if the system is singular.
    """
    n = len(y)
    states = np.asarray(states)
    beta = np.where(states == _UB, C, np.where(states == _LB, -C, 0.0)).astype(float)
    free = np.flatnonzero((states == _POSFREE) | (states == _NEGFREE))
    m = free.size
    A = np.zeros((m + 1, m + 1))
    b = np.zeros(m + 1)
    bound = np.flatnonzero((states == _UB) | (states == _LB))
    for r, i in enumerate(free):
        A[r, :m] = K[i, free]
        A[r, m] = -1.0  # -rho
        tube = -eps if states[i] == _POSFREE else eps
        b[r] = y[i] + tube - K[i, bound] @ beta[bound]
    A[m, :m] = 1.0
    b[m] = -beta.sum()
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    beta[free] = sol[:m]
    return beta, float(sol[m])


def _assignment_valid(K, y, C, eps, beta, rho, states, slack=1e-9) -> bool:
    r = K @ beta - y - rho  # f(x_i) - y_i with bias -rho
    for i, st in enumerate(states):
        if st == _POSFREE and not (slack < beta[i] < C - slack):
            return False
        if st == _NEGFREE and not (-C + slack < beta[i] < -slack):
            return False
        if st == _ZERO and abs(r[i]) > eps + slack:
            return False
        if st == _UB and r[i] > -eps + slack:
            return False
        if st == _LB and r[i] < eps - slack:
            return False
    return True


def solve_dual_enumeration(K, y, C, eps):
    """Globally optimal dual by checking every active-set assignment (n <= 6)."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if n > 6:
        raise ValueError("enumeration oracle is limited to n <= 6")
    best = None
    for states in itertools.product((_LB, _NEGFREE, _ZERO, _POSFREE, _UB), repeat=n):
        solved = _solve_state_assignment(K, y, C, eps, states)
        if solved is None:
            continue
        beta, rho = solved
        if not _assignment_valid(K, y, C, eps, beta, rho, states):
            continue
        obj = dual_objective(K, y, eps, beta)
        if best is None or obj > best[2]:
            best = (beta, -rho, obj)
    if best is None:
        raise RuntimeError("no KKT-consistent assignment found")
    return best


def solve_dual_reference(K, y, C, eps, tol=1e-10, max_iter=200_000):
    """Accelerated projected gradient with exact active-set polish."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    Q = np.block([[K, -K], [-K, K]])
    p = np.concatenate([eps - y, eps + y])
    L = float(np.linalg.eigvalsh(Q)[-1]) + 1e-12

    def fval(th):
        return 0.5 * th @ (Q @ th) + p @ th

    x = np.zeros(2 * n)
    v = x.copy()
    fx = fval(x)
    t = 1.0
    check_every = 25
    for it in range(max_iter):
        x_new = _canonicalize(_project(v - (Q @ v + p) / L, C))
        f_new = fval(x_new)
        if f_new > fx:  # lost monotonicity: restart momentum from x
            x_new = _canonicalize(_project(x - (Q @ x + p) / L, C))
            f_new = fval(x_new)
            t = 1.0
            v = x_new.copy()
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            v = x_new + ((t - 1.0) / t_next) * (x_new - x)
            t = t_next
        x, fx = x_new, f_new
        if it % check_every == 0:
            beta = x[:n] - x[n:]
            if kkt_violation(K, y, C, eps, beta) <= max(tol, 1e-8):
                polished = _polish(K, y, C, eps, beta, tol)
                if polished is not None:
                    return polished
    beta = x[:n] - x[n:]
    polished = _polish(K, y, C, eps, beta, tol)
    if polished is not None:
        return polished
    viol = kkt_violation(K, y, C, eps, beta)
    if viol > tol:
        raise RuntimeError(f"reference solver stalled at KKT violation {viol:.3e}")
    return beta, recover_bias(K, y, C, eps, beta), dual_objective(K, y, eps, beta)


def _polish(K, y, C, eps, beta, tol, edge=1e-7):
    """Exact solve on the face suggested by beta; None if it is not optimal."""
    states = np.full(len(beta), _ZERO)
    states[beta >= C - edge * max(C, 1.0)] = _UB
    states[beta <= -C + edge * max(C, 1.0)] = _LB
    interior = states == _ZERO
    states[interior & (beta > edge)] = _POSFREE
    states[interior & (beta < -edge)] = _NEGFREE
    solved = _solve_state_assignment(K, y, C, eps, states)
    if solved is None:
        return None
    cand, rho = solved
    if np.any(np.abs(cand) > C + 1e-12):
        return None
    cand = np.clip(cand, -C, C)
    if kkt_violation(K, y, C, eps, cand) > tol:
        return None
    return cand, -rho, dual_objective(K, y, eps, cand)
