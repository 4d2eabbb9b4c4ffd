"""The Max-SAT linear relaxation and its solvers.

The relaxation over clauses ``C_j`` with positive variables ``P_j`` and
negated variables ``N_j`` is::

    maximize    sum_j z_j
    subject to  sum_{i in P_j} y_i + sum_{i in N_j} (1 - y_i) >= z_j
                0 <= y_i, z_j <= 1

:func:`solve_lp` does not pivot on this primal directly: it has one row per
clause but only ``n`` interesting degrees of freedom.  Its dual (with the
``z_j <= 1`` multipliers eliminated, which is exact because raising a clause
multiplier past 1 never lowers the dual objective) has one row per variable::

    minimize    m + sum_j (|N_j| - 1) l_j + sum_i v_i
    subject to  sum_{j: i in P_j} l_j - sum_{j: i in N_j} l_j - v_i <= 0
                0 <= l_j <= 1,  v_i >= 0

A bounded-variable primal simplex on that problem works on an ``n`` x
``(m + 2n)`` tableau.  The primal ``y*`` is read off the reduced costs of the
row slacks, ``z*_j = min(1, lhs_j(y*))`` and the two objectives are compared
as a certificate.

:func:`solve_lp_exact` is the cross-check: the textbook simplex on the primal
itself, in exact rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .exceptions import NumericalFailure

DEFAULT_TOL = 1e-9
MAX_ITER = 10**6
_STALL_LIMIT = 50


@dataclass
class LPModel:
    """Rows reference positions into ``variables`` (the occurring vars, ascending)."""

    n: int
    variables: tuple
    pos_rows: list = field(default_factory=list)
    neg_rows: list = field(default_factory=list)

    @property
    def num_y(self) -> int:
        return len(self.variables)

    @property
    def num_z(self) -> int:
        return len(self.pos_rows)

    def row_lhs(self, y: np.ndarray) -> np.ndarray:
        """``sum_P y + sum_N (1 - y)`` per row, for ``y`` over model columns."""
        return np.array([y[list(p)].sum() + len(q) - y[list(q)].sum()
                         for p, q in zip(self.pos_rows, self.neg_rows)])


@dataclass
class LPSolution:
    """``y_star`` covers all ``n`` variables; variables absent from the model
    carry no constraint and are reported as 1/2."""

    y_star: np.ndarray
    z_star: np.ndarray
    objective: float
    iterations: int = 0


def build_lp(clauses, n: int) -> LPModel:
    clauses = list(clauses)
    used = sorted({abs(k) for c in clauses for k in c.lits})
    col = {v: i for i, v in enumerate(used)}
    model = LPModel(n=n, variables=tuple(used))
    for c in clauses:
        model.pos_rows.append(tuple(col[k] for k in c.lits if k > 0))
        model.neg_rows.append(tuple(col[-k] for k in c.lits if k < 0))
    return model


# --------------------------------------------------------------------------
# bounded-variable primal simplex


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    reduced_costs: np.ndarray
    basis: np.ndarray
    iterations: int


def bounded_simplex(c, A, b, upper, basis, tol: float = DEFAULT_TOL,
                    max_iter: int = MAX_ITER, pricing: str = "dantzig") -> SimplexResult:
    """Minimize ``c x`` subject to ``A x = b`` and ``0 <= x <= upper``.

    ``basis`` lists one column per row such that those columns form the
    identity and ``b >= 0``; every other variable starts at its lower bound.
    ``upper`` may contain ``inf``.

    With ``pricing="bland"`` entering and leaving choices always take the
    smallest eligible index.  The default ``"dantzig"`` enters the largest
    reduced-cost violation but falls back to Bland's rule for the rest of the
    solve once a run of degenerate pivots appears, which keeps the
    termination guarantee.
    """
    T = np.array(A, dtype=float)
    rows, cols = T.shape
    c = np.asarray(c, dtype=float)
    upper = np.asarray(upper, dtype=float)
    basis = np.array(basis, dtype=np.int64)
    if not np.allclose(T[:, basis], np.eye(rows)):
        raise ValueError("initial basis columns must form the identity")
    xB = np.array(b, dtype=float)
    if (xB < -tol).any():
        raise ValueError("initial basis is infeasible")
    at_upper = np.zeros(cols, dtype=bool)
    is_basic = np.zeros(cols, dtype=bool)
    is_basic[basis] = True
    d = c - c[basis] @ T
    bland = pricing == "bland"
    stall = 0

    for it in range(max_iter):
        viol = np.where(is_basic, 0.0, np.where(at_upper, np.maximum(d, 0.0), np.maximum(-d, 0.0)))
        if bland:
            enter = np.flatnonzero(viol > tol)
            if enter.size == 0:
                break
            j = int(enter[0])
        else:
            j = int(np.argmax(viol))
            if viol[j] <= tol:
                break
        direction = -1.0 if at_upper[j] else 1.0
        g = -direction * T[:, j]  # change of x_B per unit step
        theta, leave, leave_to_upper = upper[j], -1, False
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = g < -tol
            r_dec = np.where(dec, xB / -g, np.inf)
            inc = (g > tol) & np.isfinite(upper[basis])
            r_inc = np.where(inc, (upper[basis] - xB) / g, np.inf)
        ratios = np.minimum(r_dec, r_inc)
        best = ratios.min() if rows else np.inf
        if best < theta - tol or (best <= theta + tol and not np.isfinite(theta)):
            ties = np.flatnonzero(ratios <= best + tol)
            leave = int(ties[np.argmin(basis[ties])])
            theta = max(best, 0.0)
            leave_to_upper = bool(r_inc[leave] <= r_dec[leave])
        if not np.isfinite(theta):
            raise NumericalFailure("LP is unbounded")
        if theta <= tol:
            stall += 1
            if stall > _STALL_LIMIT:
                bland = True
        else:
            stall = 0
        xB = xB + theta * g
        if leave < 0:
            at_upper[j] = not at_upper[j]
            continue
        # pivot x_j into row `leave`
        entering_value = (upper[j] if at_upper[j] else 0.0) + direction * theta
        old = basis[leave]
        is_basic[old] = False
        at_upper[old] = leave_to_upper
        at_upper[j] = False
        is_basic[j] = True
        basis[leave] = j
        xB[leave] = entering_value
        piv = T[leave, j]
        T[leave] /= piv
        col = T[:, j].copy()
        col[leave] = 0.0
        T -= np.outer(col, T[leave])
        d = d - d[j] * T[leave]
    else:
        raise NumericalFailure(f"simplex did not converge within {max_iter} iterations")

    x = np.where(at_upper, upper, 0.0)
    x[basis] = xB
    return SimplexResult(x, float(c @ x), d, basis, it)


# --------------------------------------------------------------------------
# LP solving


def solve_lp(model: LPModel, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> LPSolution:
    """Optimal ``y*``, ``z*`` for the relaxation, via the dual described above."""
    m, ny = model.num_z, model.num_y
    y_full = np.full(model.n, 0.5)
    if m == 0:
        return LPSolution(y_full, np.zeros(0), 0.0)
    # columns: l_0..l_{m-1}, v_0..v_{ny-1}, t_0..t_{ny-1}
    A = np.zeros((ny, m + 2 * ny))
    for j, (p, q) in enumerate(zip(model.pos_rows, model.neg_rows)):
        A[list(p), j] = 1.0
        A[list(q), j] = -1.0
    A[np.arange(ny), m + np.arange(ny)] = -1.0
    A[np.arange(ny), m + ny + np.arange(ny)] = 1.0
    cost = np.concatenate([
        np.array([len(q) - 1.0 for q in model.neg_rows]),
        np.ones(ny),
        np.zeros(ny),
    ])
    upper = np.concatenate([np.ones(m), np.full(2 * ny, np.inf)])
    res = bounded_simplex(cost, A, np.zeros(ny), upper, m + ny + np.arange(ny), tol, max_iter)

    y = np.clip(res.reduced_costs[m + ny:], 0.0, 1.0)
    z = np.minimum(1.0, model.row_lhs(y))
    primal = float(z.sum())
    dual = m + res.objective
    if abs(primal - dual) > max(1e-6, 1e3 * tol) * max(1.0, m):
        raise NumericalFailure(f"duality gap {primal - dual:.3g} after {res.iterations} iterations")
    y_full[list(np.array(model.variables) - 1)] = y
    return LPSolution(y_full, z, primal, res.iterations)


def solve_lp_exact(model: LPModel):
    """Exact optimum of the primal relaxation in rational arithmetic.

    Standard-form tableau with every bound written as an explicit row,
    slack starting basis (feasible because all right-hand sides are
    non-negative) and Bland's rule.  Returns ``(objective, y, z)`` as
    ``Fraction`` values; ``y`` is indexed by model column.
    """
    m, ny = model.num_z, model.num_y
    if m == 0:
        return Fraction(0), [], []
    nv = ny + m  # structural: y columns then z columns
    rows = []
    rhs = []
    for j, (p, q) in enumerate(zip(model.pos_rows, model.neg_rows)):
        row = {ny + j: Fraction(1)}
        for i in p:
            row[i] = row.get(i, 0) - 1
        for i in q:
            row[i] = row.get(i, 0) + 1
        rows.append({k: Fraction(v) for k, v in row.items() if v})
        rhs.append(Fraction(len(q)))
    for i in range(nv):
        rows.append({i: Fraction(1)})
        rhs.append(Fraction(1))
    R = len(rows)
    for r in range(R):
        rows[r][nv + r] = Fraction(1)
    basis = [nv + r for r in range(R)]
    # maximize sum z  ->  objective row holds -c for the reduced costs
    obj = {ny + j: Fraction(-1) for j in range(m)}
    obj_val = Fraction(0)

    while True:
        enter = min((k for k, v in obj.items() if v < 0), default=None)
        if enter is None:
            break
        best, leave = None, None
        for r in range(R):
            a = rows[r].get(enter)
            if a is not None and a > 0:
                ratio = rhs[r] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best, leave = ratio, r
        if leave is None:
            raise NumericalFailure("LP is unbounded")
        piv = rows[leave][enter]
        prow = {k: v / piv for k, v in rows[leave].items()}
        prhs = rhs[leave] / piv
        rows[leave], rhs[leave] = prow, prhs
        for r in range(R):
            if r == leave:
                continue
            f = rows[r].get(enter)
            if f is None:
                continue
            row = rows[r]
            for k, v in prow.items():
                nv_ = row.get(k, 0) - f * v
                if nv_:
                    row[k] = nv_
                else:
                    row.pop(k, None)
            rhs[r] -= f * prhs
        f = obj.get(enter)
        for k, v in prow.items():
            nv_ = obj.get(k, 0) - f * v
            if nv_:
                obj[k] = nv_
            else:
                obj.pop(k, None)
        obj_val -= f * prhs
        basis[leave] = enter

    values = [Fraction(0)] * nv
    for r, bvar in enumerate(basis):
        if bvar < nv:
            values[bvar] = rhs[r]
    return obj_val, values[:ny], values[ny:]


def lp_round(sol: LPSolution, rng=None, size: Optional[int] = None) -> np.ndarray:
    """Set each variable true independently with probability ``1/4 + y*_i / 2``.

    With ``size`` given, returns ``size`` independent roundings as rows.
    """
    rng = np.random.default_rng(rng)
    probs = rounding_probabilities(sol.y_star)
    shape = probs.shape if size is None else (size,) + probs.shape
    return rng.random(shape) < probs


def rounding_probabilities(y_star) -> np.ndarray:
    return 0.25 + 0.5 * np.clip(np.asarray(y_star, dtype=float), 0.0, 1.0)
