"""Full minimax pipeline: initialization, Remez loop, fallbacks, reporting.

The solve proceeds as Step 1 (initial references from a short AAA-Lawson
run), then the Step 2/Step 3 loop (trial approximation on the references,
reference update from the error extrema) until the levelled error agrees
with the sup error to the requested tolerance.  Failures of either step
restart the solve through a ladder of lower-degree problems whose converged
references seed the next rung.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import aaa_lawson, refsearch, remez_core
from .barycentric import BarycentricRational, Interval, evaluate
from .refsearch import InsufficientOscillation
from .remez_core import NoPoleFreeSolution, WeightFn

__all__ = [
    "ProblemSpec",
    "SolveReport",
    "detect_symmetry",
    "ladder_schedule",
    "transfer_reference",
    "init_reference",
    "minimax_solve",
]

_EPS = np.finfo(float).eps


@dataclass
class ProblemSpec:
    """A minimax problem plus solver configuration."""

    f: Callable
    interval: Interval
    m: int
    n: int
    weight: Optional[WeightFn] = None
    tol: float = 1e-10
    max_iters: int = 40
    lawson_grid: int = 10_000
    lawson_iters: int = 10
    ladder_increment: int = 2
    use_symmetry: bool = True

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("degrees must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.ladder_increment not in (1, 2, 4):
            raise ValueError("ladder increment must be 1, 2 or 4")
        if self.max_iters < 1 or self.lawson_iters < 1:
            raise ValueError("iteration budgets must be positive")


@dataclass
class SolveReport:
    """Outcome of a solve: approximant, error metrics and diagnostics."""

    approximant: Optional[BarycentricRational]
    minimax_error: float
    levelled_error: float
    references: np.ndarray
    equioscillation_residuals: np.ndarray
    defect: int
    status: str  # converged | roundoff-limited | failed
    history: list = field(default_factory=list)
    detail: str = ""

    @property
    def converged(self):
        return self.status == "converged"


def _vectorize(f, interval=None):
    a, b = (interval.a, interval.b) if interval is not None else (0.0, 1.0)
    probe = np.array([a + 0.382 * (b - a), a + 0.618 * (b - a)])
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return f
    except Exception:
        pass
    return np.vectorize(f, otypes=[float])


def _probe_points(interval, count=257):
    a, b = interval.a, interval.b
    pts = (a + b) / 2 - (b - a) / 2 * np.cos(np.pi * np.arange(count) / (count - 1))
    return np.unique(np.concatenate([pts, np.asarray(interval.breakpoints)]))


def detect_symmetry(f, interval) -> str:
    """Classify f as even, odd or neither on a symmetric interval.

    Intervals that are not symmetric about zero report ``"none"`` without
    sampling.  Uses 64 paired probes and a 1e-12 relative tolerance.
    """
    a, b = interval.a, interval.b
    if abs(a + b) > 1e-14 * (b - a):
        return "none"
    f = _vectorize(f, interval)
    x = b * (np.arange(1, 65) / 64.0)
    fp, fm = f(x), f(-x)
    scale = max(np.max(np.abs(fp)), np.max(np.abs(fm)), _EPS)
    if np.max(np.abs(fp - fm)) <= 1e-12 * scale:
        return "even"
    if np.max(np.abs(fp + fm)) <= 1e-12 * scale:
        return "odd"
    return "none"


def ladder_schedule(m, n, j):
    """Difference-preserving diagonal degree path ending exactly at (m, n)."""
    if j not in (1, 2, 4):
        raise ValueError("increment must be 1, 2 or 4")
    s = min(m, n) % j
    return [(max(m - n, 0) + v, max(n - m, 0) + v)
            for v in range(s, min(m, n) + 1, j)]


def transfer_reference(old_refs, new_count):
    """Resample a reference distribution to a new size.

    Piecewise-linear map from the uniform parameterization of the old
    references, sampled at ``new_count`` uniform parameters; endpoints are
    preserved and the output is strictly increasing.
    """
    old = np.asarray(old_refs, dtype=float)
    if old.size < 2:
        raise ValueError("need at least two reference points")
    if np.any(np.diff(old) <= 0):
        raise ValueError("references must be strictly increasing")
    if new_count < 2:
        raise ValueError("new_count must be at least 2")
    s = np.linspace(0.0, 1.0, new_count)
    out = np.interp(s, np.linspace(0.0, 1.0, old.size), old)
    out[0], out[-1] = old[0], old[-1]
    if np.any(np.diff(out) <= 0):
        raise ValueError("reference distribution too tight to resample")
    return out


def _chebyshev_refs(interval, count):
    a, b = interval.a, interval.b
    return (a + b) / 2 - (b - a) / 2 * np.cos(np.pi * np.arange(count) / (count - 1))


def _error_callable(f, r, weight):
    if weight is None:
        return lambda x: f(x) - evaluate(r, x)
    return lambda x: weight(x) * (f(x) - evaluate(r, x))


def init_reference(spec: ProblemSpec, m=None, n=None):
    """Initial references: alternating extrema of a short AAA-Lawson solve.

    Falls back to Chebyshev points when the discrete stage fails or its
    error curve does not oscillate enough.
    """
    m = spec.m if m is None else m
    n = spec.n if n is None else n
    f = _vectorize(spec.f, spec.interval)
    count = m + n + 2
    grid = max(spec.lawson_grid, 20 * (max(m, n) + 1), count + 10)
    try:
        r, _ = aaa_lawson.aaa_lawson_solve(
            f, spec.interval, m, n, M=grid, max_iters=spec.lawson_iters,
            weight=spec.weight)
        e = _error_callable(f, r, spec.weight)
        inner = r.support[(r.support > spec.interval.a) & (r.support < spec.interval.b)]
        partition = np.concatenate([inner, np.asarray(spec.interval.breakpoints)])
        refs = refsearch.alternating_extrema(e, spec.interval, partition, count)
        if refs is not None:
            return refs
    except (ValueError, RuntimeError, np.linalg.LinAlgError):
        pass
    return _chebyshev_refs(spec.interval, count)


def _remez_loop(spec, f, m, n, refs):
    """Steps 2 and 3 iterated to convergence from a given reference set."""
    interval, weight = spec.interval, spec.weight
    count = m + n + 2
    probes = _probe_points(interval)
    fprobe = np.abs(f(probes))
    if weight is not None:
        fprobe = fprobe * weight(probes)
    fnorm = float(np.max(fprobe))
    history = []
    best = None

    for _ in range(spec.max_iters):
        fres = f(refs)
        try:
            trials = remez_core.trial_approximation(fres, refs, m, n, weight)
            sel = remez_core.select_pole_free(trials)
        except (NoPoleFreeSolution, ValueError, np.linalg.LinAlgError) as exc:
            return SolveReport(None if best is None else best[0],
                               np.inf if best is None else best[1],
                               0.0 if best is None else best[2],
                               refs, np.zeros(0), 0, "failed", history,
                               detail=f"step 2: {exc}")
        r = remez_core.recover_numerator(sel)
        lam = sel.levelled_error
        e = _error_callable(f, r, weight)

        if abs(lam) < 8 * _EPS * fnorm:
            # levelled error at rounding level: either the approximation is
            # essentially exact, or the trial was degenerate (bad references)
            norm_est = refsearch.sup_norm_estimate(e, interval, refs)
            resid = np.asarray(e(refs))
            history.append((lam, norm_est))
            if norm_est <= 64 * _EPS * max(fnorm, 1.0):
                return SolveReport(r, norm_est, lam, refs, resid, 0,
                                   "converged", history)
            if norm_est <= 1024 * _EPS * fnorm:
                return SolveReport(r, norm_est, lam, refs, resid, 0,
                                   "roundoff-limited", history)
            return SolveReport(r, norm_est, lam, refs, resid, 0, "failed",
                               history,
                               detail="degenerate trial: levelled error at "
                                      "rounding level while the error is not")

        try:
            new_refs = refsearch.update_reference(e, interval, refs, count, lam)
        except InsufficientOscillation as exc:
            return SolveReport(r, np.inf, lam, refs, np.asarray(e(refs)), 0,
                               "failed", history, detail=f"step 3: {exc}")
        norm_est = float(np.max(np.abs(e(new_refs))))
        history.append((lam, norm_est))
        best = (r, norm_est, lam)
        if (norm_est - abs(lam)) / norm_est <= spec.tol:
            resid = np.asarray(e(new_refs))
            return SolveReport(r, norm_est, lam, new_refs, resid, 0,
                               "converged", history)
        refs = new_refs

    r, norm_est, lam = best if best is not None else (None, np.inf, 0.0)
    return SolveReport(r, norm_est, lam, refs,
                       np.zeros(0) if r is None else np.asarray(
                           _error_callable(f, r, weight)(refs)),
                       0, "failed", history, detail="iteration budget exhausted")


def _solve_direct(spec, f, m, n):
    """AAA-Lawson-initialized solve with the lower-degree ladder as fallback."""
    refs = init_reference(spec, m, n)
    report = _remez_loop(spec, f, m, n, refs)
    if report.status != "failed":
        return report
    first_failure = report

    prev_refs = None
    for mi, ni in ladder_schedule(m, n, spec.ladder_increment):
        target = mi + ni + 2
        if prev_refs is None:
            refs_i = init_reference(spec, mi, ni)
        else:
            refs_i = transfer_reference(prev_refs, target)
        rung = _remez_loop(spec, f, mi, ni, refs_i)
        if rung.status == "failed" and prev_refs is not None:
            rung = _remez_loop(spec, f, mi, ni, init_reference(spec, mi, ni))
        if rung.status == "failed":
            if prev_refs is None:
                break
            continue
        prev_refs = rung.references
        if (mi, ni) == (m, n):
            return rung
    first_failure.detail += " (ladder fallback did not converge)"
    return first_failure


def _solve_even_reduced(spec, f, m_e, n_e, defect):
    """Even symmetry: solve in the squared variable, finish in x.

    The half-interval solve supplies near-optimal references; mirroring them
    and running a couple of Remez iterations in the original variable yields
    the approximant in its native representation.
    """
    b = spec.interval.b
    g = lambda u: f(np.sqrt(np.maximum(u, 0.0)))
    bps_u = tuple(sorted({c * c for c in spec.interval.breakpoints if c != 0}))
    iv_u = Interval(0.0, b * b, bps_u)
    spec_u = replace(spec, f=g, interval=iv_u, m=m_e // 2, n=n_e // 2,
                     use_symmetry=False)
    inner = _solve_direct(spec_u, _vectorize(g, iv_u), m_e // 2, n_e // 2)
    if inner.status == "failed" or inner.approximant is None:
        return _solve_direct(spec, f, m_e, n_e)

    u_refs = inner.references
    x_refs = np.unique(np.concatenate([-np.sqrt(u_refs), np.sqrt(u_refs)]))
    count = m_e + n_e + 2
    while x_refs.size > count:
        x_refs = x_refs[:-1] if x_refs.size % 2 else x_refs[1:]
    if x_refs.size < count:
        return _solve_direct(spec, f, m_e, n_e)
    final = _remez_loop(spec, f, m_e, n_e, x_refs)
    if final.status == "failed":
        return _solve_direct(spec, f, m_e, n_e)
    final.defect = defect
    final.history = inner.history + final.history
    return final


def minimax_solve(spec: ProblemSpec) -> SolveReport:
    """Best type (m, n) approximation of ``spec.f`` on its interval.

    Even functions on symmetric intervals are reduced to a half-size problem
    in the squared variable when the requested type permits; odd degrees for
    even functions are lowered to the canonical even type and the implied
    defect is reported.  The report's status is honest: ``failed`` carries
    the best iterate and a diagnostic rather than a silent wrong answer.
    """
    f = _vectorize(spec.f, spec.interval)
    probes = _probe_points(spec.interval)
    fp = np.asarray(f(probes), dtype=float)
    if not np.all(np.isfinite(fp)):
        raise ValueError("function values must be finite on the interval")
    if spec.weight is not None:
        spec.weight(probes)  # validates positivity

    m, n = spec.m, spec.n
    if spec.use_symmetry and spec.weight is None:
        sym = detect_symmetry(f, spec.interval)
        if sym == "even":
            m_e, n_e = m - m % 2, n - n % 2
            defect = min(m - m_e, n - n_e)
            bps = spec.interval.breakpoints
            symmetric_bps = all(-c in bps or c == 0 for c in bps)
            if m_e == n_e and m_e >= 2 and symmetric_bps:
                report = _solve_even_reduced(spec, f, m_e, n_e, defect)
                report.defect = max(report.defect, defect)
                return report
            if (m_e, n_e) != (m, n):
                report = _solve_direct(spec, f, m_e, n_e)
                report.defect = max(report.defect, defect)
                return report
    return _solve_direct(spec, f, m, n)
