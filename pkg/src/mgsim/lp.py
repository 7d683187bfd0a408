"""Dense two-phase bounded-variable simplex.

Minimizes ``c @ x`` subject to rows ``a_i @ x (<=, =, >=) b_i`` and bounds
``lower <= x <= upper``. Nonbasic variables sit at one of their bounds, so
upper bounds never become rows. Pricing is Dantzig's rule, switching to
Bland's rule while a run of degenerate pivots lasts.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .errors import ShapeError

LE, EQ, GE = "<=", "=", ">="
_SENSE_ALIASES = {"<=": LE, "<": LE, "le": LE, "=": EQ, "==": EQ, "eq": EQ, ">=": GE, ">": GE, "ge": GE}

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-7
DEGENERATE_LIMIT = 50


@dataclass
class LinearProgram:
    objective: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    rhs: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    names: Optional[list] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        self.A = np.asarray(self.A, dtype=float)
        if self.A.size == 0:
            self.A = self.A.reshape(0, n)
        if self.A.ndim != 2 or self.A.shape[1] != n:
            raise ShapeError(f"constraint matrix has shape {self.A.shape}, expected (*, {n})")
        self.rhs = np.asarray(self.rhs, dtype=float).ravel()
        try:
            self.senses = tuple(_SENSE_ALIASES[s] for s in self.senses)
        except KeyError as exc:
            raise ShapeError(f"unknown relation {exc.args[0]!r}") from None
        if len(self.senses) != self.A.shape[0] or self.rhs.size != self.A.shape[0]:
            raise ShapeError("senses / rhs length must match the number of constraint rows")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.lower.size != n or self.upper.size != n:
            raise ShapeError("bounds must have one entry per variable")

    @classmethod
    def from_constraints(cls, objective, constraints, bounds=None, names=None):
        """Build from ``[(coefficients, relation, rhs), ...]`` and ``[(lo, hi), ...]``."""
        objective = np.asarray(objective, dtype=float)
        n = objective.size
        rows = []
        for coef, rel, rhs in constraints:
            coef = np.asarray(coef, dtype=float).ravel()
            if coef.size != n:
                raise ShapeError(f"constraint has {coef.size} coefficients, objective has {n}")
            rows.append((coef, rel, rhs))
        A = np.array([r[0] for r in rows]).reshape(len(rows), n)
        lower = upper = None
        if bounds is not None:
            if len(bounds) != n:
                raise ShapeError("bounds must have one entry per variable")
            lower = [-np.inf if lo is None else lo for lo, _ in bounds]
            upper = [np.inf if hi is None else hi for _, hi in bounds]
        return cls(objective, A, [r[1] for r in rows], [r[2] for r in rows], lower, upper, names)

    @property
    def n_vars(self):
        return self.objective.size

    @property
    def n_rows(self):
        return self.A.shape[0]


@dataclass
class LPSolution:
    status: str
    x: np.ndarray = field(repr=False)
    objective_value: float
    iterations: int = 0


def feasibility_check(lp: LinearProgram, x, scaled: bool = False) -> float:
    """Largest constraint or bound violation of ``x`` (0 when feasible).

    With ``scaled`` each row violation is divided by ``max(1, max|a_i|)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != lp.n_vars:
        raise ShapeError(f"x has {x.size} entries, the program has {lp.n_vars} variables")
    worst = 0.0
    if lp.n_rows:
        ax = lp.A @ x
        diff = ax - lp.rhs
        senses = np.array(lp.senses)
        viol = np.where(senses == LE, np.maximum(diff, 0.0), np.where(senses == GE, np.maximum(-diff, 0.0), np.abs(diff)))
        if scaled:
            viol = viol / np.maximum(1.0, np.abs(lp.A).max(axis=1))
        worst = float(viol.max())
    with np.errstate(invalid="ignore"):
        bound_viol = np.maximum(lp.lower - x, x - lp.upper)
    if bound_viol.size:
        worst = max(worst, float(np.nanmax(bound_viol)))
    return max(worst, 0.0)


class _Tableau:
    """Working state of the simplex: all variables shifted to a zero lower bound."""

    def __init__(self, T, rhs, ub, basis, at_upper):
        self.T = T
        self.xB = rhs
        self.ub = ub
        self.basis = basis
        self.at_upper = at_upper
        self.is_basic = np.zeros(T.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.iterations = 0

    def nonbasic_values(self):
        vals = np.where(self.at_upper, self.ub, 0.0)
        vals[self.is_basic] = 0.0
        return vals

    def price(self, cost):
        d = cost - cost[self.basis] @ self.T
        d[self.basis] = 0.0
        return d

    def run(self, d, max_iter):
        T, xB, ub, basis = self.T, self.xB, self.ub, self.basis
        at_upper, is_basic = self.at_upper, self.is_basic
        movable = ub > 0.0
        degenerate = 0
        m = T.shape[0]
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            score = np.where(at_upper, d, -d)
            score[is_basic | ~movable] = -np.inf
            bland = degenerate >= DEGENERATE_LIMIT
            if bland:
                eligible = np.flatnonzero(score > COST_TOL)
                if eligible.size == 0:
                    return "optimal"
                q = int(eligible[0])
            else:
                q = int(np.argmax(score))
                if not score[q] > COST_TOL:
                    return "optimal"
            sigma = -1.0 if at_upper[q] else 1.0
            alpha = sigma * T[:, q]
            theta = ub[q]
            leave = -1
            if m:
                ub_b = ub[basis]
                ratio = np.full(m, np.inf)
                dec = alpha > PIVOT_TOL
                inc = alpha < -PIVOT_TOL
                ratio[dec] = np.maximum(xB[dec], 0.0) / alpha[dec]
                inc_f = inc & np.isfinite(ub_b)
                ratio[inc_f] = np.maximum(ub_b[inc_f] - xB[inc_f], 0.0) / -alpha[inc_f]
                rmin = ratio.min()
                if rmin < theta:
                    ties = np.flatnonzero(ratio <= rmin + 1e-12 * (1.0 + rmin))
                    if bland:
                        leave = int(ties[np.argmin(basis[ties])])
                    else:
                        leave = int(ties[np.argmax(np.abs(alpha[ties]))])
                    theta = ratio[leave]
            if not math.isfinite(theta):
                return "unbounded"
            degenerate = degenerate + 1 if theta <= 1e-12 else 0
            self.iterations += 1
            if theta > 0.0:
                xB -= theta * alpha
            if leave < 0:
                at_upper[q] = not at_upper[q]
                continue
            start = ub[q] if at_upper[q] else 0.0
            out = basis[leave]
            at_upper[out] = alpha[leave] < 0.0
            is_basic[out] = False
            K.pivot(T, d, leave, q)
            xB[leave] = start + sigma * theta
            basis[leave] = q
            is_basic[q] = True
            at_upper[q] = False


def _standardize(lp: LinearProgram):
    """Shift/flip variables to [0, u] form and add slacks. ``cols`` maps columns back to variables."""
    n = lp.n_vars
    lo, hi = lp.lower, lp.upper
    cols = []  # (source var, sign, offset) per structural column
    A_cols = []
    c = []
    ub = []
    b = lp.rhs.copy()
    for j in range(n):
        a = lp.A[:, j]
        if math.isfinite(lo[j]):
            cols.append((j, 1.0))
            A_cols.append(a)
            c.append(lp.objective[j])
            ub.append(hi[j] - lo[j])
            b = b - a * lo[j]
        elif math.isfinite(hi[j]):
            cols.append((j, -1.0))
            A_cols.append(-a)
            c.append(-lp.objective[j])
            ub.append(np.inf)
            b = b - a * hi[j]
        else:
            cols.append((j, 1.0))
            A_cols.append(a)
            c.append(lp.objective[j])
            ub.append(np.inf)
            cols.append((j, -1.0))
            A_cols.append(-a)
            c.append(-lp.objective[j])
            ub.append(np.inf)
    m = lp.n_rows
    n_struct = len(cols)
    n_slack = sum(s != EQ for s in lp.senses)
    A = np.zeros((m, n_struct + n_slack))
    if n_struct:
        A[:, :n_struct] = np.column_stack(A_cols) if m else 0.0
    k = n_struct
    slack_of_row = np.full(m, -1)
    for i, s in enumerate(lp.senses):
        if s == EQ:
            continue
        A[i, k] = 1.0 if s == LE else -1.0
        slack_of_row[i] = k
        k += 1
    c = np.concatenate([np.array(c, dtype=float), np.zeros(n_slack)])
    ub = np.concatenate([np.array(ub, dtype=float), np.full(n_slack, np.inf)])
    return A, b, c, ub, cols, slack_of_row


def _recover(lp, cols, y):
    x = np.where(np.isfinite(lp.lower), lp.lower, np.where(np.isfinite(lp.upper), lp.upper, 0.0)).astype(float)
    for k, (j, sign) in enumerate(cols):
        x[j] += sign * y[k]
    return x


def solve(lp: LinearProgram, max_iter: Optional[int] = None) -> LPSolution:
    n = lp.n_vars
    if np.any(lp.lower > lp.upper):
        return LPSolution("infeasible", np.full(n, np.nan), math.nan)
    A, b, c, ub, cols, slack_of_row = _standardize(lp)
    m, N = A.shape

    # rows scaled to unit max-coefficient and flipped so every rhs is >= 0
    scale = np.abs(A).max(axis=1) if m else np.ones(0)
    scale[scale == 0.0] = 1.0
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * (sign / scale)[:, None]
    b = b * sign / scale

    # crash basis: a slack or a column singleton with a positive coefficient
    nnz_per_col = np.count_nonzero(A, axis=0) if m else np.zeros(N, dtype=int)
    basis = np.full(m, -1)
    taken = np.zeros(N, dtype=bool)
    for i in range(m):
        k = slack_of_row[i]
        if k >= 0 and A[i, k] > 0:
            basis[i] = k
            taken[k] = True
    for j in np.flatnonzero((nnz_per_col == 1) & ~taken):
        i = int(np.flatnonzero(A[:, j])[0])
        if basis[i] < 0 and A[i, j] > 0 and b[i] / A[i, j] <= ub[j]:
            basis[i] = j
            taken[j] = True
    need_art = np.flatnonzero(basis < 0)
    n_art = need_art.size

    T = np.zeros((m, N + n_art))
    T[:, :N] = A
    for k, i in enumerate(need_art):
        T[i, N + k] = 1.0
        basis[i] = N + k
    diag = T[np.arange(m), basis] if m else np.ones(0)
    T /= diag[:, None]
    xB = b / diag
    ub_all = np.concatenate([ub, np.zeros(n_art)])
    ub_all[N:] = np.inf
    tab = _Tableau(np.ascontiguousarray(T), xB, ub_all, basis, np.zeros(N + n_art, dtype=bool))
    if max_iter is None:
        max_iter = 50 * (m + N + n_art) + 1000

    if n_art:
        cost1 = np.concatenate([np.zeros(N), np.ones(n_art)])
        tab.run(tab.price(cost1), max_iter)
        infeas = float(tab.xB[tab.basis >= N].sum())
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LPSolution("infeasible", np.full(n, np.nan), math.nan, tab.iterations)
        # basic artificials stay at zero; nonbasic ones are dropped
        keep = np.ones(N + n_art, dtype=bool)
        keep[N:] = tab.is_basic[N:]
        if not keep.all():
            remap = np.cumsum(keep) - 1
            tab.T = np.ascontiguousarray(tab.T[:, keep])
            tab.basis = remap[tab.basis]
            tab.ub = tab.ub[keep]
            tab.at_upper = tab.at_upper[keep]
            tab.is_basic = tab.is_basic[keep]
        tab.ub[N:] = 0.0
        c2 = np.concatenate([c, np.zeros(tab.T.shape[1] - N)])
    else:
        c2 = c
    status = tab.run(tab.price(c2), max_iter)
    vals = tab.nonbasic_values()
    vals[tab.basis] = tab.xB
    y = np.clip(vals[:N], 0.0, ub)
    x = _recover(lp, cols, y)
    if status != "optimal":
        return LPSolution(status, x, -math.inf if status == "unbounded" else math.nan, tab.iterations)
    x = np.clip(x, lp.lower, lp.upper)
    return LPSolution("optimal", x, float(lp.objective @ x), tab.iterations)


def _fmt(v):
    return repr(float(v))


def lp_to_text(lp: LinearProgram) -> str:
    """Plain-text dump: objective row, constraint rows, bounds."""
    names = lp.names or [f"x{j}" for j in range(lp.n_vars)]
    out = io.StringIO()
    out.write(f"# vars {lp.n_vars} rows {lp.n_rows}\nminimize\n")
    out.write("  obj: " + " ".join(f"{_fmt(v)} {names[j]}" for j, v in enumerate(lp.objective) if v != 0.0) + "\n")
    out.write("subject to\n")
    for i in range(lp.n_rows):
        terms = " ".join(f"{_fmt(v)} {names[j]}" for j, v in enumerate(lp.A[i]) if v != 0.0)
        out.write(f"  r{i}: {terms} {lp.senses[i]} {_fmt(lp.rhs[i])}\n")
    out.write("bounds\n")
    for j in range(lp.n_vars):
        out.write(f"  {_fmt(lp.lower[j])} <= {names[j]} <= {_fmt(lp.upper[j])}\n")
    out.write("end\n")
    return out.getvalue()


def lp_from_text(text: str) -> LinearProgram:
    """Inverse of :func:`lp_to_text`."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    n = int(lines[0].split()[2])
    section = None
    names = [None] * n
    index = {}
    objective_terms = []
    rows = []
    bounds = []
    for ln in lines[1:]:
        if ln in ("minimize", "subject to", "bounds", "end"):
            section = ln
            continue
        if section == "minimize":
            objective_terms = ln.split(":", 1)[1].split()
        elif section == "subject to":
            body = ln.split(":", 1)[1].split()
            rows.append((body[:-2], body[-2], float(body[-1])))
        elif section == "bounds":
            lo, _, name, _, hi = ln.split()
            index[name] = len(bounds)
            names[len(bounds)] = name
            bounds.append((float(lo), float(hi)))

    def vec(terms):
        v = np.zeros(n)
        for k in range(0, len(terms), 2):
            v[index[terms[k + 1]]] = float(terms[k])
        return v

    A = np.array([vec(t) for t, _, _ in rows]).reshape(len(rows), n)
    return LinearProgram(vec(objective_terms), A, [r[1] for r in rows], [r[2] for r in rows],
                         [b[0] for b in bounds], [b[1] for b in bounds], names)
