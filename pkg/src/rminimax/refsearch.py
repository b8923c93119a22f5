"""Locating error extrema and choosing the next Remez reference set.

The error function is interpolated piecewise by Chebyshev polynomials on the
subintervals cut by the previous references (and any user breakpoints), its
critical points are read off as eigenvalues of the second-kind colleague
matrix of the derivative, and a sign-alternating subset of the strongest
extrema becomes the next reference set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChebPiece",
    "InsufficientOscillation",
    "cheb_fit_adaptive",
    "cheb_extrema",
    "update_reference",
    "alternating_extrema",
    "sup_norm_estimate",
]

_EPS = np.finfo(float).eps


class InsufficientOscillation(RuntimeError):
    """Fewer sign-alternating extrema were found than the reference needs."""


@dataclass(frozen=True)
class ChebPiece:
    """Chebyshev interpolant of the error on one subinterval."""

    lo: float
    hi: float
    coeffs: np.ndarray
    resolved: bool

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


def _chebpts(npts, lo, hi):
    """Chebyshev points of the second kind, ascending on [lo, hi]."""
    if npts == 1:
        return np.array([(lo + hi) / 2])
    k = np.arange(npts)
    nodes = -np.cos(np.pi * k / (npts - 1))
    return (lo + hi) / 2 + (hi - lo) / 2 * nodes


def _vals2coeffs(vals):
    """Chebyshev coefficients from values at ascending second-kind points."""
    n = len(vals) - 1
    if n == 0:
        return np.asarray(vals, dtype=float).copy()
    v = np.asarray(vals, dtype=float)[::-1]          # descending-point order
    ext = np.concatenate([v, v[n - 1:0:-1]])          # even extension, length 2n
    c = np.real(np.fft.ifft(ext))
    out = np.concatenate([[c[0]], 2 * c[1:n], [c[n]]])
    return out


def cheb_fit_adaptive(e, lo, hi, max_pts=None, decay_tol=1e-12):
    """Adaptively sampled Chebyshev interpolant of ``e`` on [lo, hi].

    Starts from 9 points and doubles until the two trailing coefficients fall
    below ``decay_tol`` times the largest one, up to ``max_pts`` (default
    2**13 + 1); pieces that never resolve are returned with
    ``resolved=False`` rather than raising.
    """
    if max_pts is None:
        max_pts = 2 ** 13 + 1
    if not lo < hi:
        raise ValueError("empty subinterval")
    npts = 9
    while True:
        x = _chebpts(npts, lo, hi)
        vals = np.asarray(e(x), dtype=float)
        if vals.shape != x.shape:
            raise ValueError("error callable must be vectorized over arrays")
        c = _vals2coeffs(vals)
        cmax = np.max(np.abs(c))
        resolved = cmax == 0.0 or (abs(c[-1]) + abs(c[-2])) <= decay_tol * cmax
        if resolved or npts >= max_pts:
            return ChebPiece(float(lo), float(hi), c, bool(resolved))
        npts = 2 * npts - 1


def _colleague_roots_u(d):
    """Real roots in (-1, 1) of sum d_j U_j via the second-kind colleague matrix."""
    d = np.asarray(d, dtype=float)
    # trim negligible leading coefficients before forming the matrix
    keep = np.nonzero(np.abs(d) > 1e-13 * max(np.max(np.abs(d)), _EPS))[0]
    if keep.size == 0:
        return np.empty(0)
    d = d[: keep[-1] + 1]
    N = d.size - 1
    if N == 0:
        return np.empty(0)
    M = np.zeros((N, N))
    idx = np.arange(N - 1)
    M[idx, idx + 1] = 0.5
    M[idx + 1, idx] = 0.5
    M[N - 1, :] -= d[:N] / (2 * d[N])
    ev = np.linalg.eigvals(M)
    real = ev[np.abs(ev.imag) <= 1e-10].real
    return real[(real > -1.0) & (real < 1.0)]


def cheb_extrema(piece: ChebPiece):
    """Interior critical points of the interpolant, via T_n' = n U_{n-1}."""
    c = piece.coeffs
    if c.size < 3:
        return np.empty(0)
    # unresolved pieces can carry thousands of non-decaying coefficients;
    # cap the colleague matrix size, the roots only serve as candidates
    if c.size > 400:
        c = c[:400]
    d = np.arange(1, c.size) * c[1:]
    roots = np.sort(_colleague_roots_u(d))
    return (piece.lo + piece.hi) / 2 + (piece.hi - piece.lo) / 2 * roots


def _sampled_extrema(e, lo, hi, npts=129):
    """Discrete local maxima of |e| with parabolic refinement.

    Candidate source for pieces whose Chebyshev fit never resolved (the
    error is not smooth there).  Oscillations of a near-minimax error curve
    cluster geometrically toward a singularity, so uniform samples are
    augmented with geometric ladders toward both piece ends, down to 1e-14
    of the piece width.
    """
    width = hi - lo
    ladder = width * np.geomspace(1e-14, 0.5, 57)
    x = np.unique(np.concatenate([
        np.linspace(lo, hi, npts), lo + ladder, hi - ladder]))
    v = np.asarray(e(x), dtype=float)
    ok = np.isfinite(v)
    mag = np.where(ok, np.abs(v), -np.inf)
    idx = np.nonzero((mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:]))[0] + 1
    out = []
    for i in idx:
        if not (ok[i - 1] and ok[i] and ok[i + 1]):
            out.append(x[i])
            continue
        # vertex of the quadratic through three (nonuniform) samples
        dl, dr = x[i] - x[i - 1], x[i + 1] - x[i]
        gl, gr = (v[i] - v[i - 1]) / dl, (v[i + 1] - v[i]) / dr
        curv = (gr - gl) / (dl + dr) * 2.0
        step = 0.0 if curv == 0 else -(gl * dr + gr * dl) / (dl + dr) / curv
        out.append(x[i] + np.clip(step, -dl, dr))
    return np.array(out)


def _candidate_extrema(e, a, b, cuts):
    """All extremum candidates of ``e`` on [a, b]: cut points plus the interior
    critical points of per-subinterval Chebyshev fits (one bisection retry for
    unresolved pieces, then sampled extrema)."""
    pts = np.concatenate([[a, b], np.asarray(cuts, dtype=float)])
    pts = np.unique(pts[(pts >= a) & (pts <= b)])
    span = b - a
    cands = [pts]
    segments = [(pts[i], pts[i + 1], 0) for i in range(pts.size - 1)
                if pts[i + 1] - pts[i] > 16 * _EPS * span]
    while segments:
        lo, hi, depth = segments.pop()
        piece = cheb_fit_adaptive(e, lo, hi, max_pts=2 ** 10 + 1 if depth else None)
        if not piece.resolved:
            if depth == 0 and hi - lo > 1e-8 * span:
                mid = (lo + hi) / 2
                segments.extend([(lo, mid, 1), (mid, hi, 1)])
                cands.append(np.array([mid]))
            else:
                cands.append(_sampled_extrema(e, lo, hi))
            continue
        cands.append(cheb_extrema(piece))
    x = np.unique(np.concatenate(cands))
    # merge near-duplicates (cut points re-found as critical points)
    if x.size > 1:
        keep = np.concatenate([[True], np.diff(x) > 8 * _EPS * max(span, 1.0)])
        x = x[keep]
    return x, np.asarray(e(x), dtype=float)


def _alternating_champions(xs, vals):
    """Collapse runs of equal sign, keeping the largest magnitude per run."""
    champions = []
    run_sign = 0.0
    for x, v in zip(xs, vals):
        s = np.sign(v)
        if s == 0.0:
            continue
        if s == run_sign:
            if abs(v) > abs(champions[-1][1]):
                champions[-1] = (x, v)
        else:
            champions.append((x, v))
            run_sign = s
    return champions


def update_reference(e, interval, old_refs, count, lam):
    """Next Remez reference: ``count`` alternating extrema of ``e``.

    Partitions [a, b] at the old references and the interval's breakpoints,
    locates extremum candidates per subinterval, keeps those with magnitude
    at least ``|lam|`` (with a small interpolation-error slack), and selects
    a sign-alternating subset that contains the global maximizer.  Raises
    :class:`InsufficientOscillation` when fewer than ``count`` alternating
    points survive.
    """
    if not abs(lam) > 0:
        raise ValueError("levelled error must be nonzero")
    old_refs = np.asarray(old_refs, dtype=float)
    cuts = np.concatenate([old_refs, np.asarray(interval.breakpoints, dtype=float)])
    xs, vals = _candidate_extrema(e, interval.a, interval.b, cuts)

    level = abs(lam) - 1e-12 * max(1.0, abs(lam))
    mask = np.abs(vals) >= level
    champs = _alternating_champions(xs[mask], vals[mask])
    if len(champs) < count:
        raise InsufficientOscillation(
            f"found {len(champs)} alternating extrema, need {count}")
    while len(champs) > count:
        if abs(champs[0][1]) < abs(champs[-1][1]):
            champs.pop(0)
        else:
            champs.pop()
    return np.array([x for x, _ in champs])


def alternating_extrema(e, interval, partition, count):
    """Best-effort variant of :func:`update_reference` for initialization.

    No magnitude threshold is applied; returns ``None`` instead of raising
    when fewer than ``count`` alternating extrema exist.
    """
    xs, vals = _candidate_extrema(e, interval.a, interval.b,
                                  np.asarray(partition, dtype=float))
    champs = _alternating_champions(xs, vals)
    if len(champs) < count:
        return None
    while len(champs) > count:
        if abs(champs[0][1]) < abs(champs[-1][1]):
            champs.pop(0)
        else:
            champs.pop()
    return np.array([x for x, _ in champs])


def sup_norm_estimate(e, interval, partition=()):
    """Estimate of ``max |e|`` over the interval from the candidate scan."""
    xs, vals = _candidate_extrema(e, interval.a, interval.b,
                                  np.asarray(partition, dtype=float))
    return float(np.max(np.abs(vals)))
