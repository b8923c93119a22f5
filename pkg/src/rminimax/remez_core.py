"""Trial approximation on a fixed reference set (Remez Step 2).

Given references and function values, assemble the symmetric eigenvalue
problem whose eigenvalues are the candidate levelled errors, pick the unique
eigenpair whose denominator keeps one sign across the references (no pole in
the interval), and recover the barycentric weights.  Diagonal, nondiagonal
and weighted variants share the selection and recovery machinery.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import barycentric, linalg
from .linalg import ScaledArray, scaled_div, scaled_from, scaled_sqrt, scaled_abs

__all__ = [
    "WeightFn",
    "TrialResult",
    "NoPoleFreeSolution",
    "support_points",
    "trial_approximation",
    "select_pole_free",
    "recover_numerator",
    "equioscillation_residuals",
]

_EPS = np.finfo(float).eps


class NoPoleFreeSolution(RuntimeError):
    """No trial eigenpair yields a denominator of constant sign."""


@dataclass(frozen=True)
class WeightFn:
    """Strictly positive weight for weighted (e.g. relative-error) problems."""

    fn: Callable
    relative: bool = False

    def __call__(self, x):
        w = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weight function must be finite and positive")
        return w


def alternation_signs(count):
    """The fixed sign convention (-1)**(l+1) at reference index l."""
    return np.where(np.arange(count) % 2 == 1, 1.0, -1.0)


def support_points(refs, m, n, return_positions=False):
    """Support points for a reference set: odd-indexed references, completed
    greedily (largest distance product) from the remaining references when
    the type is nondiagonal."""
    refs = np.asarray(refs, dtype=float)
    count = m + n + 2
    if refs.size != count:
        raise ValueError(f"need {count} references for type ({m},{n})")
    need = max(m, n) + 1
    pos = list(range(1, count, 2))
    if len(pos) > need:
        raise ValueError("too few references for the requested type")
    rest = [j for j in range(count) if j not in pos]
    while len(pos) < need:
        chosen = refs[pos]
        with np.errstate(divide="ignore"):
            gains = [np.sum(np.log(np.abs(refs[j] - chosen))) for j in rest]
        best = rest[int(np.argmax(gains))]
        pos.append(best)
        rest.remove(best)
    pos = np.array(sorted(pos))
    if return_positions:
        return refs[pos], pos
    return refs[pos]


@dataclass
class _TrialContext:
    """Factorization data shared by weight recovery and diagnostics."""

    refs: np.ndarray
    f_values: np.ndarray
    m: int
    n: int
    system: linalg.NodeSystem
    signs: np.ndarray
    weight_values: Optional[np.ndarray]
    y: np.ndarray
    # diagonal path
    q1: np.ndarray = None
    r_scaled: ScaledArray = None
    # nondiagonal path
    q_full: np.ndarray = None
    r_tri: np.ndarray = None
    col_scale: np.ndarray = None
    proj: np.ndarray = None
    proj_complement: np.ndarray = None
    qhat: np.ndarray = None
    rhat: np.ndarray = None
    qhat_scale: np.ndarray = None


@dataclass
class TrialResult:
    """One candidate solution of the levelled-error equations.

    ``den_values`` carries the cleared-denominator values at the references,
    rescaled by a power of two so the largest magnitude is one (the overall
    scale of the weight vectors is arbitrary).
    """

    levelled_error: float
    approximant: barycentric.BarycentricRational
    den_values: np.ndarray
    pole_free: bool
    eigen_gap: float
    _ctx: _TrialContext = field(repr=False, default=None)

    def __post_init__(self):
        if self._ctx is None or self._ctx.weight_values is not None:
            return
        fmax = np.max(np.abs(self._ctx.f_values))
        if abs(self.levelled_error) > fmax * (1 + 1e-10) + _EPS:
            raise ValueError("levelled error exceeds the function scale")


def _power2_normalize(values):
    """Divide by a power of two so the largest magnitude lies in [0.5, 1]."""
    peak = np.max(np.abs(values))
    if peak == 0 or not np.isfinite(peak):
        return values
    return np.ldexp(values, -int(np.ceil(np.log2(peak))))


def _den_sign_factors(system):
    """sign(w_t(x_l)) per reference, with the derivative sign at coincidences."""
    s = system.support_vals.sign.copy()
    for k, j in enumerate(system.support_pos):
        if j >= 0:
            s[j] = np.sign(system.support_derivs.mant[k])
    return s


def _den_values(system, q1y):
    """Cleared denominator q = w_t * D at the references, power-of-two scaled."""
    half = scaled_sqrt(scaled_abs(system.ref_derivs))
    sgn = _den_sign_factors(system) * np.sign(q1y)
    mag = ScaledArray(*linalg._renorm(half.mant * np.abs(q1y), half.expo))
    logs = mag.log2abs()
    finite = np.isfinite(logs)
    shift = int(np.max(logs[finite])) if np.any(finite) else 0
    return sgn * mag.to_float(shift)


def _sign_fix(alpha, beta):
    nz = np.nonzero(beta)[0]
    if nz.size and beta[nz[0]] < 0:
        return -alpha, -beta
    return alpha, beta


def _recover_diag_interpolatory(ctx, lam):
    """alpha_k = beta_k (f(t_k) - lam / w(t_k)); beta from the diagonal solve."""
    tpos = ctx.system.support_pos
    beta_s = scaled_div(scaled_from(ctx.y), ctx.r_scaled)
    logs = beta_s.log2abs()
    finite = np.isfinite(logs)
    shift = int(np.max(logs[finite])) if np.any(finite) else 0
    beta = beta_s.to_float(shift)
    ft = ctx.f_values[tpos]
    wt = ctx.weight_values[tpos] if ctx.weight_values is not None else 1.0
    alpha = beta * (ft - lam / wt)
    return _sign_fix(alpha, beta)


def _recover_chain(ctx, lam):
    """Triangular-solve recovery, shared by the nondiagonal and weighted modes.

    The factored matrices were column-scaled by exact powers of two, so each
    triangular solve is followed by the matching rescaling of its result.
    """
    m, n = ctx.m, ctx.n
    q1y = (ctx.q1 if m == n else ctx.q_full[:, : n + 1]) @ ctx.y
    if ctx.weight_values is not None:
        z = (ctx.f_values - lam * ctx.signs / ctx.weight_values) * q1y
    else:
        z = ctx.f_values * q1y

    if m == n:
        rhs = ctx.q1.T @ z
        alpha_s = scaled_div(scaled_from(rhs), ctx.r_scaled)
        beta_s = scaled_div(scaled_from(ctx.y), ctx.r_scaled)
        logs = np.concatenate([alpha_s.log2abs(), beta_s.log2abs()])
        finite = np.isfinite(logs)
        shift = int(np.max(logs[finite])) if np.any(finite) else 0
        return _sign_fix(alpha_s.to_float(shift), beta_s.to_float(shift))

    if m > n:
        bh = ctx.col_scale[: n + 1] * scipy.linalg.solve_triangular(
            ctx.r_tri[: n + 1, : n + 1], ctx.y)
        beta = ctx.proj @ bh
        yt = ctx.col_scale * scipy.linalg.solve_triangular(ctx.r_tri,
                                                           ctx.q_full.T @ z)
        alpha = np.hstack([ctx.proj, ctx.proj_complement]) @ yt
    else:
        beta = ctx.col_scale * scipy.linalg.solve_triangular(ctx.r_tri, ctx.y)
        ah = ctx.qhat_scale * scipy.linalg.solve_triangular(ctx.rhat,
                                                            ctx.qhat.T @ z)
        alpha = ctx.proj @ ah
    peak = max(np.max(np.abs(alpha)), np.max(np.abs(beta)))
    if peak > 0 and np.isfinite(peak):
        scale = np.ldexp(1.0, -int(np.ceil(np.log2(peak))))
        alpha, beta = alpha * scale, beta * scale
    return _sign_fix(alpha, beta)


def _column_equilibrate(M):
    """Scale columns by powers of two to unit peak; exact and QR-invariant.

    Returns the scaled matrix and the per-column scale that restores the
    original coordinates (original = scaled * scale).
    """
    peak = np.max(np.abs(M), axis=0)
    expo = np.where(peak > 0, np.ceil(np.log2(np.maximum(peak, 1e-300))), 0.0)
    down = np.ldexp(1.0, -expo.astype(int))
    return M * down[None, :], down


def _constant_candidate(refs, f_values, m, n, system, signs, weight_values):
    """Degenerate trial for (numerically) constant data: r identically mean(f)."""
    beta_s = scaled_div(scaled_from(np.ones(system.supports.size)),
                        system.support_derivs)
    logs = beta_s.log2abs()
    shift = int(np.max(logs))
    beta = beta_s.to_float(shift)       # partial fractions of a constant: q = c > 0
    c = float(np.mean(f_values))
    alpha = c * beta
    alpha, beta = _sign_fix(alpha, beta)
    r = barycentric.make(system.supports, alpha, beta, m, n)
    ctx = _TrialContext(refs, f_values, m, n, system, signs, weight_values,
                        np.zeros(0))
    # the cleared denominator is identically one by construction
    return TrialResult(0.0, r, np.ones(refs.size), True, np.inf, ctx)


def trial_approximation(f_values, refs, m, n, weight=None):
    """Solve the levelled-error equations on ``refs`` for type ``(m, n)``.

    Returns one :class:`TrialResult` per eigenpair of the reduced symmetric
    problem, each satisfying the linearized equioscillation equations; the
    pole-free flag marks denominators of constant sign across the references.
    ``weight`` switches to the weighted pencil with the same recovery chain.
    """
    refs = np.asarray(refs, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    if refs.shape != f_values.shape:
        raise ValueError("f_values must match refs")
    if not np.all(np.isfinite(f_values)):
        raise ValueError("function values must be finite at the references")
    count = m + n + 2
    signs = alternation_signs(count)
    supports, tpos = support_points(refs, m, n, return_positions=True)
    system = linalg.node_system(refs, supports)
    wvals = None
    if weight is not None:
        wvals = weight(refs) if callable(weight) else np.asarray(weight, float)

    ctx_common = dict(refs=refs, f_values=f_values, m=m, n=n, system=system,
                      signs=signs, weight_values=wvals)

    if m == n:
        q1, r_scaled = linalg._explicit_qr_scaled(system)
        extra = dict(q1=q1, r_scaled=r_scaled)
    else:
        M = linalg.scaled_basis_matrix(system)
        if m > n:
            basis = linalg.arnoldi_null_basis(supports, m - n, kind="denominator")
            G = np.hstack([basis.matrix, basis.complement])
            B, down = _column_equilibrate(M @ G)
            q_full, r_tri = scipy.linalg.qr(B, mode="economic")
            q1 = q_full[:, : n + 1]
            extra = dict(q_full=q_full, r_tri=r_tri, col_scale=down,
                         proj=basis.matrix, proj_complement=basis.complement)
        else:
            basis = linalg.arnoldi_null_basis(supports, n - m, kind="numerator")
            B, down = _column_equilibrate(M)
            q1, r_tri = scipy.linalg.qr(B, mode="economic")
            Bh, down_h = _column_equilibrate(M @ basis.matrix)
            qhat, rhat = scipy.linalg.qr(Bh, mode="economic")
            extra = dict(q_full=q1, r_tri=r_tri, col_scale=down,
                         proj=basis.matrix, qhat=qhat, rhat=rhat,
                         qhat_scale=down_h)

    A = (q1 * (signs * f_values)[:, None]).T @ q1
    A = (A + A.T) / 2

    fmax = np.max(np.abs(f_values))
    if np.max(np.abs(A)) <= 64 * _EPS * max(fmax, 1.0):
        return [_constant_candidate(refs, f_values, m, n, system, signs, wvals)]

    if wvals is None:
        lams, Y = linalg.symmetric_eig(A)
    else:
        Bw = (q1 / wvals[:, None]).T @ q1
        lams, Y = linalg.definite_eig(A, Bw)

    results = []
    for i in range(lams.size):
        lam = float(lams[i])
        y = Y[:, i]
        gap = float(np.min(np.abs(np.delete(lams, i) - lam))) if lams.size > 1 else np.inf
        ctx = _TrialContext(y=y, **ctx_common, **extra)
        if m == n:
            alpha, beta = _recover_diag_interpolatory(ctx, lam)
        else:
            alpha, beta = _recover_chain(ctx, lam)
        q1y = q1 @ y
        den = _den_values(system, q1y)
        pole_free = bool(np.all(den > 0) or np.all(den < 0))
        r = barycentric.make(supports, alpha, beta, m, n)
        results.append(TrialResult(lam, r, den, pole_free, gap, ctx))
    return results


def _residual(trial):
    ctx = trial._ctx
    resid = equioscillation_residuals(trial.approximant, ctx.refs, ctx.f_values,
                                      trial.levelled_error, ctx.weight_values)
    return np.max(np.abs(resid))


def select_pole_free(candidates):
    """The unique candidate whose denominator has one sign on the references.

    Raises :class:`NoPoleFreeSolution` when none qualifies (degenerate trial)
    or when the qualifying candidate has an exactly zero levelled error for
    nonconstant data, which signals degeneracy rather than convergence.
    """
    if not candidates:
        raise NoPoleFreeSolution("empty candidate list")
    passing = [c for c in candidates if c.pole_free]
    if not passing:
        raise NoPoleFreeSolution("all trial denominators change sign")
    if len(passing) > 1:
        # near-degenerate data can let a second eigenpair pass numerically;
        # keep the one that satisfies the defining equations best
        warnings.warn("multiple sign-consistent eigenpairs; picking the one "
                      "with the smallest equioscillation residual",
                      RuntimeWarning, stacklevel=2)
        passing.sort(key=_residual)
    chosen = passing[0]
    ctx = chosen._ctx
    f = ctx.f_values
    if chosen.levelled_error == 0.0 and np.max(np.abs(f - np.mean(f))) > 0:
        if ctx.y.size:  # the synthesized constant candidate is exempt
            raise NoPoleFreeSolution("zero levelled error for nonconstant data")
    return chosen


def recover_numerator(trial, mode=None):
    """Return the approximant with numerator weights recovered per ``mode``.

    ``mode`` is ``"interpolatory"`` (diagonal types only), ``"chain"`` (the
    triangular-solve route, required for nondiagonal types and valid for all)
    or ``None`` for the default used when the trial was built.
    """
    ctx = trial._ctx
    if ctx is None or ctx.y.size == 0:
        return trial.approximant
    if mode is None:
        return trial.approximant
    if mode == "interpolatory":
        if ctx.m != ctx.n:
            raise ValueError("interpolatory recovery requires m == n")
        alpha, beta = _recover_diag_interpolatory(ctx, trial.levelled_error)
    elif mode == "chain":
        alpha, beta = _recover_chain(ctx, trial.levelled_error)
    else:
        raise ValueError(f"unknown recovery mode {mode!r}")
    return barycentric.make(ctx.system.supports, alpha, beta, ctx.m, ctx.n)


def equioscillation_residuals(r, refs, f_values, lam, weight_values=None):
    """Residuals of the defining equations w(f - r) = (-1)^(l+1) lam at refs."""
    refs = np.asarray(refs, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    signs = alternation_signs(refs.size)
    err = f_values - barycentric.evaluate(r, refs)
    if weight_values is not None:
        err = err * weight_values
    return err - signs * lam
