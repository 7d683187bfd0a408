"""Pure-Python reference kernels.

Every function here has a twin in ``_fast.pyx`` performing the same floating
point operations in the same order, so both backends are bitwise identical.
Actions are 8-tuples ordered as ``ACTION_FIELDS`` in :mod:`mgsim._kernels`.
"""
import math

import numpy as np

from .layout import (
    BAL_LOAD, BAL_PV, BATT_POWER, BATT_SOC, CAP, CURT_PRICE, DEFICIT_ORDER, DIS, DROP, DT, EFF,
    EXP, EXP_MAX, FUEL, GEN, GEN_LIMIT, GEN_MIN, GEN_RATED, GRID_DOWN, GRID_LIMIT, HAS_GEN,
    HAS_GRID, IMP, IMP_MAX, NEGATIVE, NONEXISTENT, PCH, PDIS, SHED_PRICE, SIMULTANEOUS, SOC_HI,
    SOC_LO, SURPLUS_ORDER, TOL, CH, N_TEMPLATES,
)


def battery_room(P, soc):
    dt = P[DT]
    eff = P[EFF]
    max_ch = min(P[PCH], max(0.0, (P[SOC_HI] - soc) / (eff * dt)))
    max_dis = min(P[PDIS], max(0.0, (soc - P[SOC_LO]) * eff / dt))
    return max_ch, max_dis


def check(P, a, load, pv, soc, up):
    ptl, ch, dis, imp, exp, gen, shed, curt = a
    mask = 0
    if ptl < 0.0 or ch < 0.0 or dis < 0.0 or imp < 0.0 or exp < 0.0 or gen < 0.0 or shed < 0.0 or curt < 0.0:
        mask |= NEGATIVE
    if ch > 0.0 and dis > 0.0:
        mask |= SIMULTANEOUS
    if abs(ptl + dis + imp + gen + shed - load) > TOL:
        mask |= BAL_LOAD
    if abs(ptl + ch + exp + curt - pv) > TOL:
        mask |= BAL_PV
    if ch > P[PCH] + TOL or dis > P[PDIS] + TOL:
        mask |= BATT_POWER
    dt = P[DT]
    eff = P[EFF]
    if ch * eff * dt > P[SOC_HI] - soc + TOL or dis * dt / eff > soc - P[SOC_LO] + TOL:
        mask |= BATT_SOC
    if P[HAS_GRID] > 0.0:
        if up == 0 and (imp > 0.0 or exp > 0.0):
            mask |= GRID_DOWN
        if imp > P[IMP_MAX] + TOL or exp > P[EXP_MAX] + TOL:
            mask |= GRID_LIMIT
    elif imp > 0.0 or exp > 0.0:
        mask |= NONEXISTENT
    if P[HAS_GEN] > 0.0:
        if gen > P[GEN_RATED] + TOL or (gen > 0.0 and gen < P[GEN_MIN] * P[GEN_RATED] - TOL):
            mask |= GEN_LIMIT
    elif gen > 0.0:
        mask |= NONEXISTENT
    return mask


def step_costs(P, a, pimp, pexp):
    dt = P[DT]
    fuel = a[5] * dt * P[FUEL]
    imp_c = a[3] * dt * pimp
    exp_c = a[4] * dt * pexp
    shed_c = a[6] * dt * P[SHED_PRICE]
    curt_c = a[7] * dt * P[CURT_PRICE]
    return fuel, imp_c, exp_c, shed_c, curt_c


def total_cost(P, a, pimp, pexp):
    fuel, imp_c, exp_c, shed_c, curt_c = step_costs(P, a, pimp, pexp)
    return fuel + imp_c - exp_c + shed_c + curt_c


def repair(P, a, load, pv, soc, up):
    ptl, ch, dis, imp, exp, gen, shed, curt = (max(0.0, v) for v in a)
    if P[HAS_GRID] <= 0.0 or up == 0:
        imp = 0.0
        exp = 0.0
    if P[HAS_GEN] <= 0.0:
        gen = 0.0
    if ch > 0.0 and dis > 0.0:
        if ch >= dis:
            ch = ch - dis
            dis = 0.0
        else:
            dis = dis - ch
            ch = 0.0
    max_ch, max_dis = battery_room(P, soc)
    ch = min(ch, max_ch)
    dis = min(dis, max_dis)
    imp = min(imp, P[IMP_MAX])
    exp = min(exp, P[EXP_MAX])
    band = P[GEN_MIN] * P[GEN_RATED]
    gen = min(gen, P[GEN_RATED])
    if gen > 0.0 and gen < band:
        gen = band

    ptl = min(ptl, pv, load)
    over = ptl + ch + exp - pv
    if over > 0.0:
        x = min(exp, over)
        exp -= x
        over -= x
    if over > 0.0:
        x = min(ch, over)
        ch -= x
    curt = max(0.0, pv - ptl - ch - exp)

    excess = ptl + dis + imp + gen - load
    if excess > 0.0:
        x = min(imp, excess)
        imp -= x
        excess -= x
    if excess > 0.0:
        x = min(dis, excess)
        dis -= x
        excess -= x
    if excess > 0.0:
        gen2 = gen - excess
        if gen2 < band:
            gen = 0.0
        else:
            gen = gen2
    shed = max(0.0, load - (ptl + dis + imp + gen))
    return ptl, ch, dis, imp, exp, gen, shed, curt


def settle_genset(P, a, load, pv, soc, up, pimp, pexp):
    """Move a genset request inside (0, min loading) to 0 or to the band edge, whichever is cheaper."""
    ptl, ch, dis, imp, exp, gen, shed, curt = a
    band = P[GEN_MIN] * P[GEN_RATED]
    if not (gen > 0.0 and gen < band):
        return a
    max_ch, max_dis = battery_room(P, soc)
    if P[HAS_GRID] > 0.0 and up != 0:
        gmax = P[IMP_MAX]
        emax = P[EXP_MAX]
    else:
        gmax = 0.0
        emax = 0.0

    # round down: cover the request from battery, grid, then shed
    d_dis = dis
    d_imp = imp
    d_shed = shed
    r = gen
    if ch <= 0.0:
        x = min(max(0.0, max_dis - d_dis), r)
        d_dis += x
        r -= x
    x = min(max(0.0, gmax - d_imp), r)
    d_imp += x
    r -= x
    d_shed += r
    down = (ptl, ch, d_dis, d_imp, exp, 0.0, d_shed, curt)

    # round up: back off shed, battery, grid, then PV-to-load
    e = band - gen
    u_ptl = ptl
    u_ch = ch
    u_dis = dis
    u_imp = imp
    u_exp = exp
    u_shed = shed
    u_curt = curt
    x = min(u_shed, e)
    u_shed -= x
    e -= x
    x = min(u_dis, e)
    u_dis -= x
    e -= x
    x = min(u_imp, e)
    u_imp -= x
    e -= x
    x = min(u_ptl, e)
    u_ptl -= x
    e -= x
    freed = x
    if e > TOL:
        return down
    if u_dis <= 0.0:
        y = min(max(0.0, max_ch - u_ch), freed)
        u_ch += y
        freed -= y
    y = min(max(0.0, emax - u_exp), freed)
    u_exp += y
    freed -= y
    u_curt += freed
    up_a = (u_ptl, u_ch, u_dis, u_imp, u_exp, band, u_shed, u_curt)
    if total_cost(P, up_a, pimp, pexp) <= total_cost(P, down, pimp, pexp):
        return up_a
    return down


def expand(P, template, load, pv, soc, up, pimp, pexp):
    """Concrete dispatch for one of the discrete action templates."""
    max_ch, max_dis = battery_room(P, soc)
    if P[HAS_GRID] > 0.0 and up != 0:
        gmax = P[IMP_MAX]
        emax = P[EXP_MAX]
    else:
        gmax = 0.0
        emax = 0.0
    rated = P[GEN_RATED] if P[HAS_GEN] > 0.0 else 0.0
    ch = 0.0
    if template == 4:
        ch = min(max_ch, pv)
    ptl = min(load, pv - ch)
    deficit = load - ptl
    surplus = pv - ch - ptl
    dis = 0.0
    imp = 0.0
    exp = 0.0
    gen = 0.0
    for src in DEFICIT_ORDER[template]:
        if src < 0 or deficit <= 0.0:
            break
        if src == DIS:
            x = min(max_dis, deficit)
            dis = x
        elif src == IMP:
            x = min(gmax, deficit)
            imp = x
        else:
            x = min(rated, deficit)
            gen = x
        deficit -= x
    shed = max(0.0, deficit)
    for snk in SURPLUS_ORDER[template]:
        if snk < 0 or surplus <= 0.0:
            break
        if snk == CH:
            x = min(max(0.0, max_ch - ch), surplus)
            ch += x
        else:
            x = min(emax, surplus)
            exp = x
        surplus -= x
    curt = max(0.0, surplus)
    a = (ptl, ch, dis, imp, exp, gen, shed, curt)
    if gen > 0.0 and gen < P[GEN_MIN] * rated:
        a = settle_genset(P, a, load, pv, soc, up, pimp, pexp)
    return a


def apply(P, a, load, pv, soc, up, pimp, pexp):
    """Check, repair if needed, and integrate one step.

    Returns ``(mask, action, soc_next, fuel, import, export_credit, loss_load, curtail)``.
    """
    mask = check(P, a, load, pv, soc, up)
    if mask:
        a = repair(P, a, load, pv, soc, up)
    dt = P[DT]
    eff = P[EFF]
    soc2 = soc + eff * a[1] * dt - a[2] / eff * dt
    soc2 = min(max(soc2, P[SOC_LO]), P[SOC_HI])
    fuel, imp_c, exp_c, shed_c, curt_c = step_costs(P, a, pimp, pexp)
    return mask, a, soc2, fuel, imp_c, exp_c, shed_c, curt_c


def state_index(P, t, load_t, pv_t, soc, nl_lo, nl_hi, n_nl, n_soc):
    hour = t % 24
    nb = int(math.floor((load_t - pv_t - nl_lo) / (nl_hi - nl_lo) * n_nl))
    nb = min(max(nb, 0), n_nl - 1)
    sb = int(math.floor(soc / P[CAP] * n_soc))
    sb = min(max(sb, 0), n_soc - 1)
    return (hour * n_nl + nb) * n_soc + sb


def _argmax(row):
    best = 0
    bv = row[0]
    for k in range(1, len(row)):
        if row[k] > bv:
            bv = row[k]
            best = k
    return best


def q_episode(Q, N, P, load, pv, up, pimp, pexp, start, end, soc0, eps, u, ra,
              alpha, gamma, nl_lo, nl_hi, n_nl, n_soc, reward_scale):
    """One epsilon-greedy Q-learning pass over steps [start, end). Returns the summed reward."""
    soc = soc0
    n_actions = Q.shape[1]
    s = state_index(P, start, load[start], pv[start], soc, nl_lo, nl_hi, n_nl, n_soc)
    total = 0.0
    last = end - start - 1
    for k in range(end - start):
        t = start + k
        if u[k] < eps:
            act = int(ra[k])
        else:
            act = _argmax(Q[s])
        a = expand(P, act, load[t], pv[t], soc, up[t], pimp[t], pexp[t])
        res = apply(P, a, load[t], pv[t], soc, up[t], pimp[t], pexp[t])
        soc = res[2]
        cost = res[3] + res[4] - res[5] + res[6] + res[7]
        r = -cost / reward_scale
        total += r
        if k == last:
            target = r
            s2 = s
        else:
            s2 = state_index(P, t + 1, load[t + 1], pv[t + 1], soc, nl_lo, nl_hi, n_nl, n_soc)
            qmax = Q[s2, 0]
            for j in range(1, n_actions):
                if Q[s2, j] > qmax:
                    qmax = Q[s2, j]
            target = r + gamma * qmax
        Q[s, act] = (1.0 - alpha) * Q[s, act] + alpha * target
        N[s, act] += 1
        s = s2
    return total


def pivot(T, d, r, q):
    """In-place tableau pivot on (r, q), also updating the reduced-cost row ``d``."""
    piv = T[r, q]
    col = T[:, q].copy()
    T[r] /= piv
    T[r, q] = 1.0
    nzc = np.flatnonzero(T[r])
    rows = np.flatnonzero(col)
    rows = rows[rows != r]
    if rows.size:
        ix = np.ix_(rows, nzc)
        sub = T[ix] - col[rows, None] * T[r, nzc]
        sub[np.abs(sub) < DROP] = 0.0
        T[ix] = sub
        T[rows, q] = 0.0
    f = d[q]
    if f != 0.0:
        d[nzc] -= f * T[r, nzc]
        d[q] = 0.0


__all__ = [
    "battery_room", "check", "step_costs", "total_cost", "repair", "settle_genset", "expand",
    "apply", "state_index", "q_episode", "pivot", "N_TEMPLATES",
]
