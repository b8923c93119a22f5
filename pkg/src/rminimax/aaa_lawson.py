"""Discrete near-minimax rational approximation: AAA plus Lawson reweighting.

Greedy AAA picks support points and an interpolatory approximant on a sample
grid; the noninterpolatory least-squares step frees numerator and denominator
weights jointly; the Lawson loop reweights samples by powers of the residual
(with an adaptive exponent) to push the error curve toward equioscillation.
Used standalone for discrete problems and as the Remez initializer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg

from . import barycentric, linalg

__all__ = [
    "SampleGrid",
    "LawsonState",
    "AAAStagnationWarning",
    "aaa",
    "noninterp_solve",
    "lawson_step",
    "adaptive_grid",
    "aaa_lawson_solve",
]

_EPS = np.finfo(float).eps
_GAMMA_FLOOR = 2.0 ** -10


class AAAStagnationWarning(RuntimeWarning):
    """Greedy AAA residual stopped decreasing."""


@dataclass(frozen=True)
class SampleGrid:
    """Distinct sorted sample points with function values."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.points, dtype=float)
        f = np.asarray(self.values, dtype=float)
        if z.ndim != 1 or z.shape != f.shape:
            raise ValueError("points and values must be matching 1-D arrays")
        if z.size > 1 and not np.all(np.diff(z) > 0):
            raise ValueError("sample points must be sorted and distinct")
        if not np.all(np.isfinite(z)) or not np.all(np.isfinite(f)):
            raise ValueError("sample data must be finite")
        z.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "points", z)
        object.__setattr__(self, "values", f)

    @classmethod
    def from_function(cls, f, points):
        points = np.asarray(points, dtype=float)
        return cls(points, np.asarray(f(points), dtype=float))

    @property
    def size(self):
        return self.points.size


@dataclass(frozen=True)
class LawsonState:
    """State of the reweighting loop over the non-support samples."""

    weights: np.ndarray
    gamma: float
    alpha: np.ndarray
    beta: np.ndarray
    best_error: float
    converged: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a probability vector")
        if not 0 < self.gamma <= 1:
            raise ValueError("Lawson exponent must lie in (0, 1]")


def _interp_eval(z, support, svals, wj):
    """Interpolatory barycentric evaluation used inside the AAA loop."""
    with np.errstate(divide="ignore", invalid="ignore"):
        c = 1.0 / np.subtract.outer(z, support)
        r = (c @ (wj * svals)) / (c @ wj)
    for k, t in enumerate(support):
        hit = z == t
        if np.any(hit):
            r[hit] = svals[k]
    return r


def aaa(grid: SampleGrid, max_degree, tol=1e-13, weight_values=None, full=False):
    """Greedy interpolatory AAA on a sample grid.

    At each step the sample with the largest current residual joins the
    support set and the weights solve the linearized least-squares problem
    on the remaining samples via the smallest right singular vector.  Stops
    when the sup residual drops below ``tol * max|f|`` or at ``max_degree``.
    Stagnation (no residual decrease for five consecutive steps) raises
    :class:`AAAStagnationWarning` as a warning, not an error.
    """
    z, f = grid.points, grid.values
    if max_degree < 0 or 2 * (max_degree + 1) >= z.size:
        raise ValueError("max_degree too large for the grid")
    wv = np.ones_like(f) if weight_values is None else np.asarray(weight_values, float)
    atol = tol * np.max(np.abs(f))

    mask = np.ones(z.size, dtype=bool)
    sidx: list[int] = []
    errors = []
    r = np.full(z.size, np.average(f, weights=wv))
    wj = np.ones(1)
    for _ in range(max_degree + 1):
        j = int(np.argmax(np.abs((f - r) * wv) * mask))
        sidx.append(j)
        mask[j] = False
        support = z[sidx]
        svals = f[sidx]
        # Loewner matrix over the remaining samples
        c = 1.0 / np.subtract.outer(z[mask], support)
        A = (f[mask, None] - svals[None, :]) * c * wv[mask, None]
        _, sv, vh = scipy.linalg.svd(A, full_matrices=(A.shape[0] < A.shape[1]))
        wj = vh[-1]
        r = _interp_eval(z, support, svals, wj)
        errors.append(float(np.max(np.abs((f - r) * wv))))
        if errors[-1] <= atol:
            break
        if len(errors) > 5 and min(errors[-5:]) >= min(errors[:-5]):
            warnings.warn("AAA residual stagnated", AAAStagnationWarning,
                          stacklevel=2)
            break

    order = np.argsort(z[sidx])
    support = z[sidx][order]
    svals = f[sidx][order]
    wj = wj[order]
    d = support.size - 1
    r_bary = barycentric.make(support, wj * svals, wj, d, d)
    if full:
        return r_bary, support, np.array(errors)
    return r_bary, support


def noninterp_solve(grid: SampleGrid, supports, weights, proj_num=None,
                    proj_den=None, weight_values=None):
    """Weighted linearized least squares for free numerator and denominator.

    Minimizes ``||sqrt(w) (f D - N)||_2`` over unit-norm stacked coefficients
    on the samples outside the support set, via the SVD of the weighted
    Cauchy block matrix.  Optional projection bases restrict the numerator
    (``proj_num``) or denominator (``proj_den``) coefficients for nondiagonal
    types.  Ties among smallest singular values are resolved by taking the
    first, with a warning.
    """
    supports = np.asarray(supports, dtype=float)
    mask = ~np.isin(grid.points, supports)
    z, f = grid.points[mask], grid.values[mask]
    w = np.asarray(weights, dtype=float)
    if w.shape != z.shape:
        raise ValueError("weights must cover the non-support samples")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    sqw = np.sqrt(w)
    if weight_values is not None:
        sqw = sqw * np.asarray(weight_values, float)[mask]

    C = linalg.cauchy_matrix(z, supports)
    num_block = C if proj_num is None else C @ proj_num
    den_block = C if proj_den is None else C @ proj_den
    A = np.hstack([num_block, -f[:, None] * den_block]) * sqw[:, None]
    _, sv, vh = scipy.linalg.svd(A, full_matrices=False)
    tie = sv <= sv[-1] * (1 + 1e-10) + _EPS * sv[0]
    first = int(np.argmax(tie))
    if first < sv.size - 1:
        warnings.warn("rank-deficient least-squares problem; solution not unique",
                      RuntimeWarning, stacklevel=2)
    v = vh[first]
    na = num_block.shape[1]
    alpha_c, beta_c = v[:na], v[na:]
    alpha = alpha_c if proj_num is None else proj_num @ alpha_c
    beta = beta_c if proj_den is None else proj_den @ beta_c
    return alpha, beta


def _sup_error(grid, supports, alpha, beta, weight_values=None):
    r = _noninterp_eval(grid.points, supports, alpha, beta)
    err = np.abs(grid.values - r)
    if weight_values is not None:
        err = err * weight_values
    return float(np.max(err))


def _noninterp_eval(z, supports, alpha, beta):
    with np.errstate(divide="ignore", invalid="ignore"):
        c = 1.0 / np.subtract.outer(z, supports)
        r = (c @ alpha) / (c @ beta)
    for k, t in enumerate(supports):
        hit = z == t
        if np.any(hit):
            r[hit] = alpha[k] / beta[k] if beta[k] != 0 else np.inf
    return r


def lawson_step(state: LawsonState, grid: SampleGrid, supports, proj_num=None,
                proj_den=None, weight_values=None) -> LawsonState:
    """One iteratively-reweighted step.

    Solves the weighted problem, halves the exponent when the sup error did
    not improve on the best seen so far (floored at 2**-10), then multiplies
    each weight by its residual to the current exponent and renormalizes.
    All-zero residuals mark the state converged and leave weights untouched.
    """
    supports = np.asarray(supports, dtype=float)
    alpha, beta = noninterp_solve(grid, supports, state.weights, proj_num,
                                  proj_den, weight_values)
    err = _sup_error(grid, supports, alpha, beta, weight_values)
    gamma = state.gamma
    if err >= state.best_error:
        gamma = max(gamma / 2.0, _GAMMA_FLOOR)
    best = min(err, state.best_error)

    mask = ~np.isin(grid.points, supports)
    resid = np.abs(grid.values[mask]
                   - _noninterp_eval(grid.points[mask], supports, alpha, beta))
    if weight_values is not None:
        resid = resid * np.asarray(weight_values, float)[mask]
    if np.all(resid == 0):
        return replace(state, alpha=alpha, beta=beta, best_error=best,
                       gamma=gamma, converged=True)
    w = state.weights * resid ** gamma
    total = w.sum()
    if total <= 0 or not np.isfinite(total):
        return replace(state, alpha=alpha, beta=beta, best_error=best,
                       gamma=gamma, converged=True)
    return LawsonState(w / total, gamma, alpha, beta, best, False)


def adaptive_grid(a, b, M, supports, f) -> SampleGrid:
    """Sample grid with an equal number of points per support gap.

    Between consecutive support points (extended by the interval endpoints
    when they stick out) the grid is equispaced, so samples cluster exactly
    where the supports do.
    """
    supports = np.asarray(supports, dtype=float)
    if supports.size and M < 10 * supports.size:
        raise ValueError("grid budget must be at least 10 samples per support")
    edges = np.unique(np.concatenate([[a, b], supports]))
    gaps = edges.size - 1
    per = max(int(np.ceil(M / gaps)) + 1, 2)
    pieces = [np.linspace(edges[i], edges[i + 1], per) for i in range(gaps)]
    pts = np.unique(np.concatenate(pieces))
    return SampleGrid.from_function(f, pts)


def _leja_extend(points, chosen, extra):
    """Greedy picks maximizing the distance product to the chosen set."""
    chosen = list(np.asarray(chosen, dtype=float))
    pool = np.setdiff1d(points, np.asarray(chosen))
    for _ in range(extra):
        with np.errstate(divide="ignore"):
            gains = np.sum(np.log(np.abs(pool[:, None] - np.array(chosen)[None, :])),
                           axis=1)
        j = int(np.argmax(gains))
        chosen.append(pool[j])
        pool = np.delete(pool, j)
    return np.sort(np.array(chosen))


def aaa_lawson_solve(f, interval, m, n, M=10 ** 4, max_iters=30,
                     weight=None, weight_tol=1e-3):
    """Near-minimax type (m, n) approximation on a discretized interval.

    AAA to degree ``min(m, n)`` fixes the support points (completed in Leja
    style for nondiagonal types), the grid is re-laid to cluster like the
    supports, and the Lawson loop runs until the weight vector settles (l1
    change below ``weight_tol``) or ``max_iters`` is hit.  Returns the last
    iterate and a history dict with the per-iteration sup errors.
    """
    if m < 0 or n < 0:
        raise ValueError("degrees must be nonnegative")
    if M < m + n + 10:
        raise ValueError("sample budget too small")
    a, b = interval.a, interval.b
    wfn = weight if weight is not None else None

    z0 = np.linspace(a, b, M)
    grid0 = SampleGrid.from_function(f, z0)
    wv0 = wfn(grid0.points) if wfn is not None else None
    d = min(m, n)
    r0, supports, aaa_errs = aaa(grid0, d, weight_values=wv0, full=True)
    status = "ok"
    need = max(m, n) + 1
    if supports.size < need:
        supports = _leja_extend(grid0.points, supports, need - supports.size)

    proj_num = proj_den = None
    if m < n:
        proj_num = linalg.arnoldi_null_basis(supports, n - m, kind="numerator").matrix
    elif m > n:
        proj_den = linalg.arnoldi_null_basis(supports, m - n, kind="denominator").matrix

    grid = adaptive_grid(a, b, M, supports, f)
    wv = wfn(grid.points) if wfn is not None else None
    mask = ~np.isin(grid.points, supports)
    w0 = np.full(mask.sum(), 1.0 / mask.sum())
    state = LawsonState(w0, 1.0, np.zeros(need), np.zeros(need), np.inf)

    errors = []
    changes = []
    for _ in range(max_iters):
        new = lawson_step(state, grid, supports, proj_num, proj_den, wv)
        errors.append(_sup_error(grid, supports, new.alpha, new.beta, wv))
        changes.append(float(np.sum(np.abs(new.weights - state.weights))))
        state = new
        if state.converged or changes[-1] < weight_tol:
            status = "converged"
            break
    else:
        status = "max_iters"

    r = barycentric.make(supports, state.alpha, state.beta, m, n)
    history = {
        "errors": np.array(errors),
        "weight_changes": np.array(changes),
        "aaa_errors": aaa_errs,
        "gamma": state.gamma,
        "status": status,
        "grid_size": grid.size,
    }
    return r, history
