"""Barycentric differential correction on a finite grid.

Each iteration minimizes the linearized weighted error of the next iterate
over the current one, which is a linear program in the barycentric weights
once the denominator is pinned to one sign and normalized.  Support points
stay fixed within a level; levels of increasing type reuse the previous
level's reference distribution to place the next support set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.optimize

from . import barycentric, linalg
from .driver import SolveReport, transfer_reference
from .linalg import scaled_div, scaled_from

__all__ = [
    "LPProblem",
    "LPResult",
    "DCState",
    "lp_solve",
    "dc_step",
    "dc_solve",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class LPProblem:
    """min c.x subject to A_ub x <= b_ub and variable bounds."""

    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    bounds: tuple

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.asarray(self.A_ub, dtype=float)
        b = np.asarray(self.b_ub, dtype=float)
        if A.ndim != 2 or A.shape != (b.size, c.size):
            raise ValueError("inconsistent LP dimensions")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A))
                and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A_ub", A)
        object.__setattr__(self, "b_ub", b)
        object.__setattr__(self, "bounds", tuple(self.bounds))


@dataclass(frozen=True)
class LPResult:
    x: Optional[np.ndarray]
    objective: float
    status: str  # optimal | infeasible | unbounded | error


def lp_solve(problem: LPProblem) -> LPResult:
    """Solve a dense LP; optimality is certified before reporting it.

    Infeasible and unbounded problems come back in the status field, never
    as exceptions.  For optimal solutions the primal feasibility residual
    and the duality gap are checked against 1e-9 of the problem scale.
    """
    # presolve costs several times the solve itself on these tall thin LPs
    res = scipy.optimize.linprog(problem.c, A_ub=problem.A_ub, b_ub=problem.b_ub,
                                 bounds=list(problem.bounds), method="highs",
                                 options={"presolve": False})
    if res.status == 2:
        return LPResult(None, np.nan, "infeasible")
    if res.status == 3:
        return LPResult(None, np.nan, "unbounded")
    if res.status != 0:
        return LPResult(None, np.nan, "error")

    x = np.asarray(res.x)
    # residuals are judged against the magnitude of the terms that formed
    # them, not against unity: constraint rows carry Cauchy-matrix entries
    scale = max(1.0, float(np.max(np.abs(problem.b_ub), initial=0.0)),
                float(np.max(np.abs(problem.A_ub)) * np.max(np.abs(x))))
    slack = problem.b_ub - problem.A_ub @ x
    feas = max(0.0, float(np.max(-slack, initial=0.0)))
    compl = 0.0
    if res.ineqlin is not None and res.ineqlin.marginals is not None:
        compl = float(np.max(np.abs(np.asarray(res.ineqlin.marginals) * slack),
                             initial=0.0))
    if feas > 1e-9 * scale or compl > 1e-9 * scale:
        return LPResult(x, float(res.fun), "error")
    return LPResult(x, float(res.fun), "optimal")


@dataclass(frozen=True)
class DCState:
    """Current iterate of the differential-correction descent.

    ``objective`` is the optimal value of the last LP; it reaches zero from
    below exactly at the discrete minimax fixed point.
    """

    grid: np.ndarray
    supports: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    delta: float
    iteration: int
    sigma: float = 1.0
    stalled: bool = False
    converged: bool = False
    objective: float = -np.inf

    def rational(self, m, n):
        return barycentric.make(self.supports, self.alpha, self.beta, m, n)


def _omegat_signs(grid, supports):
    """sign of prod(x - t_k) per grid point: parity of supports above x."""
    above = np.sum(grid[:, None] < supports[None, :], axis=1)
    return np.where(above % 2 == 0, 1.0, -1.0)


def _eval_ratio(C, alpha, beta):
    with np.errstate(divide="ignore", invalid="ignore"):
        return (C @ alpha) / (C @ beta)


def _build_lp(state, f_values, proj_num=None, proj_den=None):
    """LP for one DC step: variables (alpha coords, beta coords, t)."""
    X, t = state.grid, state.supports
    C = linalg.cauchy_matrix(X, t)
    num_block = C if proj_num is None else C @ proj_num
    den_block = C if proj_den is None else C @ proj_den
    na, nb = num_block.shape[1], den_block.shape[1]

    dk = np.abs(C @ state.beta)
    sgn = state.sigma * _omegat_signs(X, t)      # sign of D at each grid point
    M = X.size
    f = f_values

    nvar = na + nb + 1
    rows = []
    rhs = []
    # |f D - N| <= delta |D| + t |D_k|, split into two one-sided constraints;
    # |D| = sgn * D under the one-sign constraint below.  Rows are rescaled
    # to unit peak (their right-hand sides are zero) to keep the solver away
    # from the raw Cauchy-entry magnitudes.
    for s in (+1.0, -1.0):
        block = np.zeros((M, nvar))
        block[:, :na] = -s * num_block
        block[:, na:na + nb] = (s * f - state.delta * sgn)[:, None] * den_block
        block[:, -1] = -dk
        block /= np.max(np.abs(block), axis=1)[:, None]
        rows.append(block)
        rhs.append(np.zeros(M))
    # one-sign denominator: sgn * D >= 0
    block = np.zeros((M, nvar))
    block[:, na:na + nb] = -sgn[:, None] * den_block
    block /= np.max(np.abs(block), axis=1)[:, None]
    rows.append(block)
    rhs.append(np.zeros(M))

    bounds = [(None, None)] * na
    if proj_den is None:
        bounds += [(-1.0, 1.0)] * nb
    else:
        bounds += [(None, None)] * nb
        # |beta_j| <= 1 becomes two rows per support in projected coordinates
        pm = np.zeros((2 * t.size, nvar))
        pm[: t.size, na:na + nb] = proj_den
        pm[t.size:, na:na + nb] = -proj_den
        rows.append(pm)
        rhs.append(np.ones(2 * t.size))
    bounds.append((None, None))

    c = np.zeros(nvar)
    c[-1] = 1.0
    return LPProblem(c, np.vstack(rows), np.concatenate(rhs), tuple(bounds)), na, nb


def dc_step(state: DCState, f_values, proj_num=None, proj_den=None) -> DCState:
    """One descent step; the state never regresses.

    The denominator sign is inherited from the current iterate; if the LP
    fails under that sign it is retried once with the opposite one.  When
    the optimal objective has reached zero (up to rounding) the iterate is
    at the discrete minimax fixed point and is marked converged; iterates
    whose recomputed error would regress are discarded the same way.
    """
    f_values = np.asarray(f_values, dtype=float)
    for attempt, sigma in enumerate((state.sigma, -state.sigma)):
        trial = state if attempt == 0 else replace(state, sigma=sigma)
        lp, na, nb = _build_lp(trial, f_values, proj_num, proj_den)
        res = lp_solve(lp)
        if res.status != "optimal":
            continue
        # the objective approximates the achievable decrease of delta; once
        # it cannot be distinguished from zero at LP solver accuracy the
        # iterate is the discrete fixed point
        at_fixed_point = res.objective >= -1e-9 * max(1.0, state.delta)
        ac, bc = res.x[:na], res.x[na:na + nb]
        alpha = ac if proj_num is None else proj_num @ ac
        beta = bc if proj_den is None else proj_den @ bc
        if not np.any(beta):
            return replace(state, converged=at_fixed_point,
                           stalled=not at_fixed_point)
        C = linalg.cauchy_matrix(state.grid, state.supports)
        rv = _eval_ratio(C, alpha, beta)
        delta = float(np.max(np.abs(f_values - rv))) \
            if np.all(np.isfinite(rv)) else np.inf
        if delta > state.delta:
            # keep the old iterate; decide whether this is the fixed point
            converged = at_fixed_point or delta <= state.delta * (1 + 1e-9)
            return replace(state, converged=converged,
                           stalled=not converged,
                           objective=res.objective)
        return DCState(state.grid, state.supports, alpha, beta, delta,
                       state.iteration + 1, sigma, False, at_fixed_point,
                       res.objective)
    return replace(state, stalled=True)


def _grid_references(grid, residual, level):
    """Sign-alternating local maxima of |residual| above ``level`` on a grid.

    Returns the selected points and their residual values.
    """
    r = np.asarray(residual)
    mag = np.abs(r)
    interior = np.zeros(r.size, dtype=bool)
    interior[1:-1] = (mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:])
    interior[0] = mag[0] >= mag[1]
    interior[-1] = mag[-1] >= mag[-2]
    idx = np.nonzero(interior & (mag >= level))[0]
    champs = []
    run_sign = 0.0
    for i in idx:
        s = np.sign(r[i])
        if s == 0.0:
            continue
        if s == run_sign:
            if mag[i] > mag[champs[-1]]:
                champs[-1] = i
        else:
            champs.append(i)
            run_sign = s
    sel = np.array(champs, dtype=int)
    if sel.size == 0:
        return np.empty(0), np.empty(0)
    return grid[sel], r[sel]


def _initial_state(X, f_values, supports):
    """Start from the constant mean with the all-positive denominator."""
    t = np.asarray(supports, dtype=float)
    beta_s = scaled_div(scaled_from(np.ones(t.size)), linalg._node_derivs(t))
    beta = beta_s.to_float(int(np.max(beta_s.log2abs())))
    c = float(np.mean(f_values))
    delta = float(np.max(np.abs(f_values - c)))
    return DCState(X, t, c * beta, beta, delta, 0, 1.0, False)


def _nudge_off_grid(supports, X, a, b):
    """Shift support points off grid points by half the local spacing."""
    t = np.array(supports, dtype=float)
    spacing = np.median(np.diff(X))
    for i, v in enumerate(t):
        j = np.searchsorted(X, v)
        near = abs(X[np.clip(j, 0, X.size - 1)] - v) < 0.25 * spacing or \
            abs(X[np.clip(j - 1, 0, X.size - 1)] - v) < 0.25 * spacing
        if near:
            t[i] = v + 0.5 * spacing
    t = np.clip(t, a + 0.25 * spacing, b - 0.25 * spacing)
    return np.unique(t)


def _ladder_levels(m, n):
    levels = []
    top = min(m, n)
    l = 1
    while l < top:
        levels.append((l, l))
        l *= 2
    if top >= 1:
        levels.append((top, top))
    if (m, n) not in levels:
        levels.append((m, n))
    return levels


def dc_solve(f, X, m, n, max_level_iters=100, rel_tol=1e-12) -> SolveReport:
    """Discrete minimax over the grid ``X`` by laddered differential correction.

    Types (l, l) with doubling l are solved in sequence; each level's support
    points are quantiles of the previous level's reference distribution and
    stay fixed while its LP descent runs to a relative delta change below
    ``rel_tol``.  The final rung is the requested type, with null-space
    constraints when it is nondiagonal.
    """
    X = np.unique(np.asarray(X, dtype=float))
    a, b = X[0], X[-1]
    f_values = np.asarray(f(X), dtype=float) if callable(f) \
        else np.asarray(f, dtype=float)
    if f_values.shape != X.shape:
        raise ValueError("values must match the grid")

    dev = f_values - np.mean(f_values)
    refs, _ = _grid_references(X, dev, 0.5 * np.max(np.abs(dev)))
    if refs.size < 2:
        refs = np.array([a, b])

    state = None
    history = []
    stop = "tol"
    for mi, ni in _ladder_levels(m, n):
        k1 = max(mi, ni) + 1
        if k1 == 1:
            supports = np.array([(a + b) / 2])
        elif refs.size == k1:
            supports = refs.copy()
        else:
            supports = transfer_reference(refs if refs.size >= 2
                                          else np.array([a, b]), k1)
        supports = _nudge_off_grid(supports, X, a, b)
        if supports.size != k1:
            state = None
            break
        proj_num = proj_den = None
        if mi < ni:
            proj_num = linalg.arnoldi_null_basis(supports, ni - mi,
                                                 kind="numerator").matrix
        elif mi > ni:
            proj_den = linalg.arnoldi_null_basis(supports, mi - ni,
                                                 kind="denominator").matrix
        state = _initial_state(X, f_values, supports)
        deltas = [state.delta]
        stop = "budget"
        for _ in range(max_level_iters):
            new = dc_step(state, f_values, proj_num, proj_den)
            if new.stalled:
                state = new
                stop = "stalled"
                break
            improved = state.delta - new.delta
            state = new
            deltas.append(state.delta)
            if new.converged or improved <= rel_tol * max(state.delta, _EPS):
                stop = "tol"
                break
        history.extend((d, d) for d in deltas)
        C = linalg.cauchy_matrix(X, state.supports)
        resid = f_values - _eval_ratio(C, state.alpha, state.beta)
        refs, _ = _grid_references(X, resid, 0.5 * state.delta)

    if state is None:
        return SolveReport(None, np.inf, np.nan, np.empty(0), np.empty(0), 0,
                           "failed", history, detail="support placement failed")

    # a stall right at the descent floor is convergence in all but name;
    # a stall with the descent still moving is a numerical breakdown
    if stop == "tol":
        status, detail = "converged", ""
    elif stop == "stalled" and len(deltas) >= 2 and \
            (deltas[-2] - deltas[-1]) <= 1e-8 * max(deltas[-1], _EPS):
        status, detail = "converged", "stopped at the LP descent floor"
    else:
        status = "failed"
        detail = "stalled before tolerance" if stop == "stalled" \
            else "iteration budget exhausted"

    r = state.rational(m, n)
    C = linalg.cauchy_matrix(X, state.supports)
    resid = f_values - _eval_ratio(C, state.alpha, state.beta)
    refs, ref_vals = _grid_references(X, resid, 0.5 * state.delta)
    return SolveReport(r, state.delta, state.delta, refs, ref_vals, 0,
                       status, history, detail=detail)
