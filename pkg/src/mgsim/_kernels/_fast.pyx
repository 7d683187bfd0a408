# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Mirrors ``_pure.py`` operation for operation."""
from libc.math cimport fabs, floor

import numpy as np

cdef enum:
    CAP = 0
    PCH = 1
    PDIS = 2
    EFF = 3
    SOC_LO = 4
    SOC_HI = 5
    HAS_GEN = 6
    GEN_RATED = 7
    GEN_MIN = 8
    FUEL = 9
    HAS_GRID = 10
    IMP_MAX = 11
    EXP_MAX = 12
    SHED_PRICE = 13
    CURT_PRICE = 14
    DT = 15

cdef enum:
    NEGATIVE = 1
    SIMULTANEOUS = 2
    BAL_LOAD = 4
    BAL_PV = 8
    BATT_POWER = 16
    BATT_SOC = 32
    GRID_DOWN = 64
    GRID_LIMIT = 128
    GEN_LIMIT = 256
    NONEXISTENT = 512

cdef double TOL = 1e-6
cdef double DROP = 1e-13

# template tables, same content as layout.DEFICIT_ORDER / SURPLUS_ORDER
cdef int DEF_ORDER[8][3]
cdef int SUR_ORDER[8][2]
DEF_ORDER[:] = [[0, 1, 2], [2, 1, 0], [1, 0, 2], [1, 2, -1], [1, 2, -1], [0, 1, 2], [1, 2, -1], [0, -1, -1]]
SUR_ORDER[:] = [[0, 1], [0, 1], [0, 1], [0, 1], [1, -1], [1, 0], [1, -1], [0, 1]]


cdef inline double dmin(double a, double b) noexcept nogil:
    return b if b < a else a


cdef inline double dmax(double a, double b) noexcept nogil:
    return b if b > a else a


cdef inline void _room(const double[::1] P, double soc, double* max_ch, double* max_dis) noexcept nogil:
    cdef double dt = P[DT]
    cdef double eff = P[EFF]
    max_ch[0] = dmin(P[PCH], dmax(0.0, (P[SOC_HI] - soc) / (eff * dt)))
    max_dis[0] = dmin(P[PDIS], dmax(0.0, (soc - P[SOC_LO]) * eff / dt))


cdef int _check(const double[::1] P, double* a, double load, double pv, double soc, int up) noexcept nogil:
    cdef double ptl = a[0], ch = a[1], dis = a[2], imp = a[3], ex = a[4], gen = a[5], shed = a[6], curt = a[7]
    cdef int mask = 0
    cdef double dt = P[DT]
    cdef double eff = P[EFF]
    if ptl < 0.0 or ch < 0.0 or dis < 0.0 or imp < 0.0 or ex < 0.0 or gen < 0.0 or shed < 0.0 or curt < 0.0:
        mask |= NEGATIVE
    if ch > 0.0 and dis > 0.0:
        mask |= SIMULTANEOUS
    if fabs(ptl + dis + imp + gen + shed - load) > TOL:
        mask |= BAL_LOAD
    if fabs(ptl + ch + ex + curt - pv) > TOL:
        mask |= BAL_PV
    if ch > P[PCH] + TOL or dis > P[PDIS] + TOL:
        mask |= BATT_POWER
    if ch * eff * dt > P[SOC_HI] - soc + TOL or dis * dt / eff > soc - P[SOC_LO] + TOL:
        mask |= BATT_SOC
    if P[HAS_GRID] > 0.0:
        if up == 0 and (imp > 0.0 or ex > 0.0):
            mask |= GRID_DOWN
        if imp > P[IMP_MAX] + TOL or ex > P[EXP_MAX] + TOL:
            mask |= GRID_LIMIT
    elif imp > 0.0 or ex > 0.0:
        mask |= NONEXISTENT
    if P[HAS_GEN] > 0.0:
        if gen > P[GEN_RATED] + TOL or (gen > 0.0 and gen < P[GEN_MIN] * P[GEN_RATED] - TOL):
            mask |= GEN_LIMIT
    elif gen > 0.0:
        mask |= NONEXISTENT
    return mask


cdef inline double _total(const double[::1] P, double* a, double pimp, double pexp) noexcept nogil:
    cdef double dt = P[DT]
    cdef double fuel = a[5] * dt * P[FUEL]
    cdef double imp_c = a[3] * dt * pimp
    cdef double exp_c = a[4] * dt * pexp
    cdef double shed_c = a[6] * dt * P[SHED_PRICE]
    cdef double curt_c = a[7] * dt * P[CURT_PRICE]
    return fuel + imp_c - exp_c + shed_c + curt_c


cdef void _repair(const double[::1] P, double* a, double load, double pv, double soc, int up) noexcept nogil:
    cdef double ptl = dmax(0.0, a[0]), ch = dmax(0.0, a[1]), dis = dmax(0.0, a[2])
    cdef double imp = dmax(0.0, a[3]), ex = dmax(0.0, a[4]), gen = dmax(0.0, a[5])
    cdef double shed, curt, max_ch, max_dis, band, over, x, excess, gen2
    if P[HAS_GRID] <= 0.0 or up == 0:
        imp = 0.0
        ex = 0.0
    if P[HAS_GEN] <= 0.0:
        gen = 0.0
    if ch > 0.0 and dis > 0.0:
        if ch >= dis:
            ch = ch - dis
            dis = 0.0
        else:
            dis = dis - ch
            ch = 0.0
    _room(P, soc, &max_ch, &max_dis)
    ch = dmin(ch, max_ch)
    dis = dmin(dis, max_dis)
    imp = dmin(imp, P[IMP_MAX])
    ex = dmin(ex, P[EXP_MAX])
    band = P[GEN_MIN] * P[GEN_RATED]
    gen = dmin(gen, P[GEN_RATED])
    if gen > 0.0 and gen < band:
        gen = band

    ptl = dmin(dmin(ptl, pv), load)
    over = ptl + ch + ex - pv
    if over > 0.0:
        x = dmin(ex, over)
        ex -= x
        over -= x
    if over > 0.0:
        x = dmin(ch, over)
        ch -= x
    curt = dmax(0.0, pv - ptl - ch - ex)

    excess = ptl + dis + imp + gen - load
    if excess > 0.0:
        x = dmin(imp, excess)
        imp -= x
        excess -= x
    if excess > 0.0:
        x = dmin(dis, excess)
        dis -= x
        excess -= x
    if excess > 0.0:
        gen2 = gen - excess
        if gen2 < band:
            gen = 0.0
        else:
            gen = gen2
    shed = dmax(0.0, load - (ptl + dis + imp + gen))
    a[0] = ptl
    a[1] = ch
    a[2] = dis
    a[3] = imp
    a[4] = ex
    a[5] = gen
    a[6] = shed
    a[7] = curt


cdef void _settle(const double[::1] P, double* a, double load, double pv, double soc, int up,
                  double pimp, double pexp) noexcept nogil:
    cdef double ptl = a[0], ch = a[1], dis = a[2], imp = a[3], ex = a[4], gen = a[5], shed = a[6], curt = a[7]
    cdef double band = P[GEN_MIN] * P[GEN_RATED]
    cdef double max_ch, max_dis, gmax, emax, r, x, e, y, freed
    cdef double down[8]
    cdef double upa[8]
    cdef int k
    if not (gen > 0.0 and gen < band):
        return
    _room(P, soc, &max_ch, &max_dis)
    if P[HAS_GRID] > 0.0 and up != 0:
        gmax = P[IMP_MAX]
        emax = P[EXP_MAX]
    else:
        gmax = 0.0
        emax = 0.0

    down[0] = ptl
    down[1] = ch
    down[2] = dis
    down[3] = imp
    down[4] = ex
    down[5] = 0.0
    down[6] = shed
    down[7] = curt
    r = gen
    if ch <= 0.0:
        x = dmin(dmax(0.0, max_dis - down[2]), r)
        down[2] += x
        r -= x
    x = dmin(dmax(0.0, gmax - down[3]), r)
    down[3] += x
    r -= x
    down[6] += r

    upa[0] = ptl
    upa[1] = ch
    upa[2] = dis
    upa[3] = imp
    upa[4] = ex
    upa[5] = band
    upa[6] = shed
    upa[7] = curt
    e = band - gen
    x = dmin(upa[6], e)
    upa[6] -= x
    e -= x
    x = dmin(upa[2], e)
    upa[2] -= x
    e -= x
    x = dmin(upa[3], e)
    upa[3] -= x
    e -= x
    x = dmin(upa[0], e)
    upa[0] -= x
    e -= x
    freed = x
    if e > TOL:
        for k in range(8):
            a[k] = down[k]
        return
    if upa[2] <= 0.0:
        y = dmin(dmax(0.0, max_ch - upa[1]), freed)
        upa[1] += y
        freed -= y
    y = dmin(dmax(0.0, emax - upa[4]), freed)
    upa[4] += y
    freed -= y
    upa[7] += freed
    if _total(P, upa, pimp, pexp) <= _total(P, down, pimp, pexp):
        for k in range(8):
            a[k] = upa[k]
    else:
        for k in range(8):
            a[k] = down[k]


cdef void _expand(const double[::1] P, int template, double load, double pv, double soc, int up,
                  double pimp, double pexp, double* a) noexcept nogil:
    cdef double max_ch, max_dis, gmax, emax, rated, ch, ptl, deficit, surplus
    cdef double dis = 0.0, imp = 0.0, ex = 0.0, gen = 0.0, x
    cdef int k, src, snk
    _room(P, soc, &max_ch, &max_dis)
    if P[HAS_GRID] > 0.0 and up != 0:
        gmax = P[IMP_MAX]
        emax = P[EXP_MAX]
    else:
        gmax = 0.0
        emax = 0.0
    rated = P[GEN_RATED] if P[HAS_GEN] > 0.0 else 0.0
    ch = 0.0
    if template == 4:
        ch = dmin(max_ch, pv)
    ptl = dmin(load, pv - ch)
    deficit = load - ptl
    surplus = pv - ch - ptl
    for k in range(3):
        src = DEF_ORDER[template][k]
        if src < 0 or deficit <= 0.0:
            break
        if src == 0:
            x = dmin(max_dis, deficit)
            dis = x
        elif src == 1:
            x = dmin(gmax, deficit)
            imp = x
        else:
            x = dmin(rated, deficit)
            gen = x
        deficit -= x
    a[6] = dmax(0.0, deficit)
    for k in range(2):
        snk = SUR_ORDER[template][k]
        if snk < 0 or surplus <= 0.0:
            break
        if snk == 0:
            x = dmin(dmax(0.0, max_ch - ch), surplus)
            ch += x
        else:
            x = dmin(emax, surplus)
            ex = x
        surplus -= x
    a[0] = ptl
    a[1] = ch
    a[2] = dis
    a[3] = imp
    a[4] = ex
    a[5] = gen
    a[7] = dmax(0.0, surplus)
    if gen > 0.0 and gen < P[GEN_MIN] * rated:
        _settle(P, a, load, pv, soc, up, pimp, pexp)


cdef inline double _advance(const double[::1] P, double* a, double soc) noexcept nogil:
    cdef double dt = P[DT]
    cdef double eff = P[EFF]
    cdef double soc2 = soc + eff * a[1] * dt - a[2] / eff * dt
    return dmin(dmax(soc2, P[SOC_LO]), P[SOC_HI])


cdef inline int _state(const double[::1] P, long t, double load_t, double pv_t, double soc,
                       double nl_lo, double nl_hi, int n_nl, int n_soc) noexcept nogil:
    cdef int hour = t % 24
    cdef int nb = <int>floor((load_t - pv_t - nl_lo) / (nl_hi - nl_lo) * n_nl)
    cdef int sb
    if nb < 0:
        nb = 0
    if nb > n_nl - 1:
        nb = n_nl - 1
    sb = <int>floor(soc / P[CAP] * n_soc)
    if sb < 0:
        sb = 0
    if sb > n_soc - 1:
        sb = n_soc - 1
    return (hour * n_nl + nb) * n_soc + sb


cdef inline void _load_action(tuple t, double* a):
    cdef int k
    for k in range(8):
        a[k] = t[k]


cdef inline tuple _as_tuple(double* a):
    return (a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7])


# Python-visible wrappers ---------------------------------------------------

def battery_room(const double[::1] P, double soc):
    cdef double max_ch, max_dis
    _room(P, soc, &max_ch, &max_dis)
    return max_ch, max_dis


def check(const double[::1] P, tuple a, double load, double pv, double soc, int up):
    cdef double buf[8]
    _load_action(a, buf)
    return _check(P, buf, load, pv, soc, up)


def step_costs(const double[::1] P, tuple a, double pimp, double pexp):
    cdef double dt = P[DT]
    return (a[5] * dt * P[FUEL], a[3] * dt * pimp, a[4] * dt * pexp,
            a[6] * dt * P[SHED_PRICE], a[7] * dt * P[CURT_PRICE])


def total_cost(const double[::1] P, tuple a, double pimp, double pexp):
    cdef double buf[8]
    _load_action(a, buf)
    return _total(P, buf, pimp, pexp)


def repair(const double[::1] P, tuple a, double load, double pv, double soc, int up):
    cdef double buf[8]
    _load_action(a, buf)
    _repair(P, buf, load, pv, soc, up)
    return _as_tuple(buf)


def settle_genset(const double[::1] P, tuple a, double load, double pv, double soc, int up,
                  double pimp, double pexp):
    cdef double buf[8]
    _load_action(a, buf)
    _settle(P, buf, load, pv, soc, up, pimp, pexp)
    return _as_tuple(buf)


def expand(const double[::1] P, int template, double load, double pv, double soc, int up,
           double pimp, double pexp):
    cdef double buf[8]
    _expand(P, template, load, pv, soc, up, pimp, pexp, buf)
    return _as_tuple(buf)


def apply(const double[::1] P, tuple a, double load, double pv, double soc, int up,
          double pimp, double pexp):
    cdef double buf[8]
    cdef double dt = P[DT]
    cdef int mask
    _load_action(a, buf)
    mask = _check(P, buf, load, pv, soc, up)
    if mask:
        _repair(P, buf, load, pv, soc, up)
    return (mask, _as_tuple(buf), _advance(P, buf, soc),
            buf[5] * dt * P[FUEL], buf[3] * dt * pimp, buf[4] * dt * pexp,
            buf[6] * dt * P[SHED_PRICE], buf[7] * dt * P[CURT_PRICE])


def state_index(const double[::1] P, long t, double load_t, double pv_t, double soc,
                double nl_lo, double nl_hi, int n_nl, int n_soc):
    return _state(P, t, load_t, pv_t, soc, nl_lo, nl_hi, n_nl, n_soc)


def q_episode(double[:, ::1] Q, long long[:, ::1] N, const double[::1] P,
              const double[::1] load, const double[::1] pv, const unsigned char[::1] up,
              const double[::1] pimp, const double[::1] pexp, long start, long end, double soc0,
              double eps, const double[::1] u, const long long[::1] ra, double alpha, double gamma,
              double nl_lo, double nl_hi, int n_nl, int n_soc, double reward_scale):
    cdef double soc = soc0
    cdef int n_actions = Q.shape[1]
    cdef int s, s2, act, j, mask
    cdef long k, t
    cdef long last = end - start - 1
    cdef double total = 0.0, cost, r, target, qmax, bv
    cdef double a[8]
    cdef double dt = P[DT]
    s = _state(P, start, load[start], pv[start], soc, nl_lo, nl_hi, n_nl, n_soc)
    with nogil:
        for k in range(end - start):
            t = start + k
            if u[k] < eps:
                act = <int>ra[k]
            else:
                act = 0
                bv = Q[s, 0]
                for j in range(1, n_actions):
                    if Q[s, j] > bv:
                        bv = Q[s, j]
                        act = j
            _expand(P, act, load[t], pv[t], soc, up[t], pimp[t], pexp[t], a)
            mask = _check(P, a, load[t], pv[t], soc, up[t])
            if mask:
                _repair(P, a, load[t], pv[t], soc, up[t])
            soc = _advance(P, a, soc)
            cost = (a[5] * dt * P[FUEL] + a[3] * dt * pimp[t] - a[4] * dt * pexp[t]
                    + a[6] * dt * P[SHED_PRICE] + a[7] * dt * P[CURT_PRICE])
            r = -cost / reward_scale
            total += r
            if k == last:
                target = r
                s2 = s
            else:
                s2 = _state(P, t + 1, load[t + 1], pv[t + 1], soc, nl_lo, nl_hi, n_nl, n_soc)
                qmax = Q[s2, 0]
                for j in range(1, n_actions):
                    if Q[s2, j] > qmax:
                        qmax = Q[s2, j]
                target = r + gamma * qmax
            Q[s, act] = (1.0 - alpha) * Q[s, act] + alpha * target
            N[s, act] += 1
            s = s2
    return total


def pivot(double[:, ::1] T, double[::1] d, long r, long q):
    cdef Py_ssize_t m = T.shape[0], n = T.shape[1]
    cdef Py_ssize_t i, j, k, nnz = 0
    cdef double piv = T[r, q]
    cdef double f, v
    cdef Py_ssize_t[::1] nzc = np.empty(n, dtype=np.intp)
    with nogil:
        for j in range(n):
            T[r, j] = T[r, j] / piv
        T[r, q] = 1.0
        for j in range(n):
            if T[r, j] != 0.0:
                nzc[nnz] = j
                nnz += 1
        for i in range(m):
            if i == r:
                continue
            f = T[i, q]
            if f == 0.0:
                continue
            for k in range(nnz):
                j = nzc[k]
                v = T[i, j] - f * T[r, j]
                if fabs(v) < DROP:
                    v = 0.0
                T[i, j] = v
            T[i, q] = 0.0
        f = d[q]
        if f != 0.0:
            for k in range(nnz):
                j = nzc[k]
                d[j] = d[j] - f * T[r, j]
            d[q] = 0.0
