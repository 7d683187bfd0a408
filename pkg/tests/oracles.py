"""Independent reference computations used by the tests.

Nothing here imports the solver or controllers under test.
"""
import itertools

import numpy as np


def lp_inequalities(c, A, senses, b, lower, upper):
    """Rewrite a program as ``E x = f`` plus ``G x <= h`` with bounds folded into G."""
    n = len(c)
    E, f, G, h = [], [], [], []
    for row, s, rhs in zip(A, senses, b):
        if s == "=":
            E.append(row)
            f.append(rhs)
        elif s == "<=":
            G.append(row)
            h.append(rhs)
        else:
            G.append(-np.asarray(row))
            h.append(-rhs)
    eye = np.eye(n)
    for j in range(n):
        if np.isfinite(lower[j]):
            G.append(-eye[j])
            h.append(-lower[j])
        if np.isfinite(upper[j]):
            G.append(eye[j])
            h.append(upper[j])
    as_mat = lambda rows: np.array(rows, dtype=float).reshape(len(rows), n)
    return as_mat(E), np.array(f, dtype=float), as_mat(G), np.array(h, dtype=float)


def vertex_enumeration(c, A, senses, b, lower, upper, tol=1e-9):
    """Minimum of ``c @ x`` over a bounded polytope by solving every candidate vertex.

    Returns ``(status, value, x)`` with status ``"optimal"`` or ``"infeasible"``.
    Every choice of ``n - rank`` inequality rows joined with the equality rows
    is solved as a square system (batched), kept when nonsingular and feasible.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    E_all, f_all, G, h = lp_inequalities(c, A, senses, b, lower, upper)
    keep = _independent_rows(E_all)
    E, f = E_all[keep], f_all[keep]
    k = n - E.shape[0]
    if k == 0:
        combos = np.zeros((1, 0), dtype=int)
    else:
        combos = np.array(list(itertools.combinations(range(G.shape[0]), k)), dtype=int).reshape(-1, k)
    if combos.shape[0] == 0:
        return "infeasible", np.inf, None
    M = np.concatenate([np.broadcast_to(E, (len(combos),) + E.shape), G[combos]], axis=1)
    r = np.concatenate([np.broadcast_to(f, (len(combos), f.size)), h[combos]], axis=1)
    det = np.linalg.det(M)
    ok = np.abs(det) > 1e-9
    if not ok.any():
        return "infeasible", np.inf, None
    X = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
    feas = np.all(G @ X.T <= h[:, None] + tol, axis=0)
    if E_all.shape[0]:
        feas &= np.all(np.abs(E_all @ X.T - f_all[:, None]) <= tol, axis=0)
    if not feas.any():
        return "infeasible", np.inf, None
    vals = X[feas] @ c
    i = int(np.argmin(vals))
    return "optimal", float(vals[i]), X[feas][i]


def _independent_rows(E):
    keep = []
    for i in range(E.shape[0]):
        if np.linalg.matrix_rank(E[keep + [i]]) == len(keep) + 1:
            keep.append(i)
    return keep


def value_iteration(transition, reward, gamma, tol=1e-12, max_iter=100000):
    """Optimal Q for a deterministic MDP given ``transition[s, a]`` and ``reward[s, a]``."""
    transition = np.asarray(transition)
    reward = np.asarray(reward, dtype=float)
    Q = np.zeros_like(reward)
    for _ in range(max_iter):
        Q2 = reward + gamma * Q.max(axis=1)[transition]
        if np.max(np.abs(Q2 - Q)) < tol:
            return Q2
        Q = Q2
    return Q


def battery_soc(soc, charge, discharge, eff, dt=1.0):
    """SOC bookkeeping written out from the definition."""
    return soc + eff * charge * dt - discharge * dt / eff


def random_integer_lp(rng, n_max=6, m_max=6):
    """Small LP with integer data and finite bounds, so the feasible region is bounded."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    c = rng.integers(-5, 6, n).astype(float)
    A = rng.integers(-4, 5, (m, n)).astype(float)
    lo = rng.integers(-3, 2, n).astype(float)
    hi = lo + rng.integers(0, 6, n)
    x0 = lo + rng.random(n) * (hi - lo)
    senses, b = [], []
    for i in range(m):
        s = ["<=", ">=", "="][int(rng.choice(3, p=[0.45, 0.35, 0.2]))]
        ax = float(A[i] @ x0)
        if s == "=":
            # integer rhs on a row that is not guaranteed to pass through x0
            rhs = float(np.round(ax))
        elif s == "<=":
            rhs = float(np.floor(ax) + rng.integers(-1, 3))
        else:
            rhs = float(np.ceil(ax) - rng.integers(-1, 3))
        senses.append(s)
        b.append(rhs)
    return c, A, senses, np.array(b), lo, hi
