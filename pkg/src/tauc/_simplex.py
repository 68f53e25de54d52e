"""Dense two-phase simplex for small LPs with variable bounds.

This is the exact sub-solver behind the exhaustive verification oracle. It is
deliberately self-contained (numpy only) so that oracle results share no code
with the production MILP backend. Sizes are tiny, so the implementation
favours clarity and airtight termination (Bland's rule throughout) over speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: float
    x: np.ndarray | None


def solve_lp(c, a, senses, b, lb, ub, max_iter: int = 50000) -> LpResult:
    """Minimize c.x subject to a x (senses) b and lb <= x <= ub.

    senses is a sequence of "<=", ">=" or "=" per row. Lower bounds must be
    finite (upper bounds may be +inf); variables that are free on both sides
    are not supported.
    """
    c = np.asarray(c, dtype=float).copy()
    a = np.asarray(a, dtype=float).reshape(len(senses), len(c)).copy()
    b = np.asarray(b, dtype=float).copy()
    lb = np.asarray(lb, dtype=float).copy()
    ub = np.asarray(ub, dtype=float).copy()
    n = len(c)

    mirrored = np.zeros(n, dtype=bool)
    for j in range(n):
        if not math.isfinite(lb[j]):
            if not math.isfinite(ub[j]):
                raise ValueError("free variables are not supported")
            mirrored[j] = True
            c[j] = -c[j]
            a[:, j] = -a[:, j]
            lb[j], ub[j] = -ub[j], math.inf
    if np.any(ub < lb - 1e-12):
        return LpResult("infeasible", math.inf, None)

    # shift to y = x - lb >= 0
    shift_cost = float(c @ lb)
    b = b - a @ lb
    span = ub - lb

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    slack_cols: list[int] = []
    for i, sense in enumerate(senses):
        row = a[i].copy()
        r = b[i]
        if sense == ">=":
            row, r = -row, -r
            sense = "<="
        elif sense not in ("<=", "="):
            raise ValueError(f"unknown sense {sense!r}")
        rows.append(row)
        rhs.append(r)
        slack_cols.append(1 if sense == "<=" else 0)

    m = len(rows)
    n_slack = sum(slack_cols)
    total = n + n_slack + m  # structural + slacks + artificials
    tab = np.zeros((m, total + 1))
    ub_all = np.full(total, math.inf)
    ub_all[:n] = span
    si = n
    for i in range(m):
        tab[i, :n] = rows[i]
        tab[i, -1] = rhs[i]
        if slack_cols[i]:
            tab[i, si] = 1.0
            si += 1
    for i in range(m):
        if tab[i, -1] < 0:
            tab[i, :] = -tab[i, :]
        tab[i, n + n_slack + i] = 1.0

    basis = np.arange(n + n_slack, total)
    at_upper = np.zeros(total, dtype=bool)

    phase1 = np.zeros(total)
    phase1[n + n_slack:] = 1.0
    status = _iterate(tab, basis, at_upper, ub_all, phase1, max_iter)
    if status == "unbounded":  # cannot happen with nonnegative phase-1 costs
        return LpResult("infeasible", math.inf, None)
    beta = _basic_values(tab, basis, at_upper, ub_all)
    infeas = sum(abs(beta[i]) for i in range(m) if basis[i] >= n + n_slack)
    if infeas > 1e-6 * max(1.0, float(np.max(np.abs(rhs))) if m else 1.0):
        return LpResult("infeasible", math.inf, None)
    ub_all[n + n_slack:] = 0.0  # artificials may never move again

    phase2 = np.zeros(total)
    phase2[:n] = c
    status = _iterate(tab, basis, at_upper, ub_all, phase2, max_iter)
    if status == "unbounded":
        return LpResult("unbounded", -math.inf, None)

    x_int = np.zeros(total)
    x_int[at_upper] = ub_all[at_upper]
    beta = _basic_values(tab, basis, at_upper, ub_all)
    x_int[basis] = beta
    y = x_int[:n]
    x = y + lb
    x[mirrored] = -x[mirrored]
    obj = float(phase2 @ x_int) + shift_cost
    return LpResult("optimal", obj, x)


def _basic_values(tab, basis, at_upper, ub_all) -> np.ndarray:
    beta = tab[:, -1].copy()
    nb_up = np.flatnonzero(at_upper)
    if nb_up.size:
        beta -= tab[:, nb_up] @ ub_all[nb_up]
    return beta


def _iterate(tab, basis, at_upper, ub_all, cost, max_iter) -> str:
    m, width = tab.shape
    total = width - 1
    in_basis = np.zeros(total, dtype=bool)
    in_basis[basis] = True
    for _ in range(max_iter):
        beta = _basic_values(tab, basis, at_upper, ub_all)
        z = cost - cost[basis] @ tab[:, :total]
        # Bland's rule: the eligible variable with the smallest index enters
        eligible = (~in_basis) & (ub_all > 0.0) & (
            (~at_upper & (z < -PIVOT_TOL)) | (at_upper & (z > PIVOT_TOL)))
        js = np.flatnonzero(eligible)
        if js.size == 0:
            return "optimal"
        j = int(js[0])
        sigma = -1.0 if at_upper[j] else 1.0
        d = tab[:, j] * sigma
        ub_basis = ub_all[basis]
        t = np.full(m, math.inf)
        pos = d > PIVOT_TOL
        t[pos] = beta[pos] / d[pos]
        neg = (d < -PIVOT_TOL) & np.isfinite(ub_basis)
        t[neg] = (ub_basis[neg] - beta[neg]) / (-d[neg])
        np.maximum(t, 0.0, out=t)
        span = ub_all[j]
        tmin = float(t.min()) if m else math.inf
        if math.isinf(tmin) or tmin > span + PIVOT_TOL:
            if math.isinf(span):
                return "unbounded"
            at_upper[j] = not at_upper[j]
            continue
        # among rows tied at the minimum ratio the smallest variable leaves
        cand = np.flatnonzero(t <= tmin + PIVOT_TOL)
        leave_row = int(cand[np.argmin(basis[cand])])
        leave_to_upper = bool(d[leave_row] < 0)
        leaving = int(basis[leave_row])
        pivot = tab[leave_row, j]
        tab[leave_row, :] /= pivot
        col = tab[:, j].copy()
        col[leave_row] = 0.0
        tab -= np.outer(col, tab[leave_row, :])
        basis[leave_row] = j
        in_basis[j] = True
        in_basis[leaving] = False
        at_upper[j] = False
        at_upper[leaving] = leave_to_upper
    raise RuntimeError("simplex iteration limit exceeded")
