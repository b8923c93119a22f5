"""Barycentric rational functions: construction, evaluation and diagnostics.

A rational function is stored as a pair of partial-fraction expansions
sharing one set of support points,

    r(x) = N(x)/D(x),  N(x) = sum a_k/(x - t_k),  D(x) = sum b_k/(x - t_k).

Values at support points are the removable-singularity limits ``a_k/b_k``.
All values are immutable after construction; every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev as npcheb

from . import linalg

__all__ = [
    "Interval",
    "BarycentricRational",
    "make",
    "evaluate",
    "poles_zeros",
    "to_quotient",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Interval:
    """Closed interval [a, b] with optional interior singularity locations."""

    a: float
    b: float
    breakpoints: tuple = ()

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ValueError("interval requires finite a < b")
        bps = tuple(sorted(float(c) for c in self.breakpoints))
        if any(not a < c < b for c in bps):
            raise ValueError("breakpoints must lie strictly inside (a, b)")
        if len(set(bps)) != len(bps):
            raise ValueError("breakpoints must be distinct")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "breakpoints", bps)

    @property
    def span(self):
        return self.b - self.a


@dataclass(frozen=True)
class BarycentricRational:
    """Validated barycentric rational of declared type ``(m, n)``.

    Construct through :func:`make`; the constructor only freezes the data.
    """

    support: np.ndarray
    num_weights: np.ndarray
    den_weights: np.ndarray
    type_bounds: tuple

    def __post_init__(self):
        for name in ("support", "num_weights", "den_weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "type_bounds", tuple(int(v) for v in self.type_bounds))

    def __call__(self, x):
        return evaluate(self, x)


def make(support, num_weights, den_weights, m, n) -> BarycentricRational:
    """Build a validated barycentric rational of type (m, n).

    For nondiagonal types the corresponding weight vector must lie in the
    null space of the Vandermonde block that pins the numerator (m < n) or
    denominator (m > n) degree; the projection residual is checked against
    1e-12 times the vector norm.
    """
    t = np.asarray(support, dtype=float)
    a = np.asarray(num_weights, dtype=float)
    b = np.asarray(den_weights, dtype=float)
    m, n = int(m), int(n)
    if m < 0 or n < 0:
        raise ValueError("degrees must be nonnegative")
    k1 = max(m, n) + 1
    if t.ndim != 1 or t.size != k1:
        raise ValueError(f"expected {k1} support points for type ({m},{n})")
    if a.shape != t.shape or b.shape != t.shape:
        raise ValueError("weight vectors must match the support length")
    if not np.all(np.isfinite(t)) or not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise ValueError("support and weights must be finite")
    if t.size > 1:
        if np.any(np.diff(t) <= 0):
            if np.unique(t).size != t.size:
                raise ValueError("duplicate support points")
            raise ValueError("support points must be sorted increasingly")
    if not np.any(b):
        raise ValueError("denominator weights must not be all zero")

    if m != n:
        if m < n:
            basis = linalg.arnoldi_null_basis(t, n - m, kind="numerator")
            vec, what = a, "numerator"
        else:
            basis = linalg.arnoldi_null_basis(t, m - n, kind="denominator")
            vec, what = b, "denominator"
        resid = np.linalg.norm(vec - basis.matrix @ (basis.matrix.T @ vec))
        if resid > 1e-12 * max(np.linalg.norm(vec), _EPS):
            raise ValueError(
                f"{what} weights violate the type-({m},{n}) degree constraint "
                f"(projection residual {resid:.2e})")
    return BarycentricRational(t, a, b, (m, n))


def evaluate(r: BarycentricRational, x):
    """Evaluate ``r`` at scalar or array ``x``.

    At (or within 4 ulp of) a support point the removable-singularity value
    ``a_k/b_k`` is returned; if ``b_k = 0`` and ``a_k != 0`` there, the point
    is a pole and a signed infinity comes back rather than an exception.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x).astype(float)
    t, a, b = r.support, r.num_weights, r.den_weights

    d = xv[:, None] - t[None, :]
    tol = 4.0 * _EPS * np.maximum(np.abs(xv)[:, None], np.abs(t)[None, :])
    hit = np.abs(d) <= tol

    with np.errstate(divide="ignore", invalid="ignore"):
        c = 1.0 / d
        out = (c @ a) / (c @ b)

    rows = np.nonzero(hit.any(axis=1))[0]
    for i in rows:
        k = int(np.argmax(hit[i]))
        if b[k] != 0.0:
            out[i] = a[k] / b[k]
        elif a[k] != 0.0:
            out[i] = np.copysign(np.inf, a[k])
        else:
            # inert term: both weights vanish, drop it and evaluate the rest
            keep = np.arange(t.size) != k
            ck = 1.0 / (xv[i] - t[keep])
            with np.errstate(divide="ignore", invalid="ignore"):
                out[i] = (ck @ a[keep]) / (ck @ b[keep])
    return float(out[0]) if scalar else out.reshape(x.shape)


def _roots_of_partial_fraction(t, w):
    """Roots of sum w_k/(z - t_k) via the arrowhead generalized eigenproblem."""
    k1 = t.size
    if not np.any(w):
        return np.empty(0, dtype=complex)
    E = np.zeros((k1 + 1, k1 + 1))
    E[0, 1:] = w
    E[1:, 0] = 1.0
    E[1:, 1:] = np.diag(t)
    B = np.eye(k1 + 1)
    B[0, 0] = 0.0
    ev = scipy.linalg.eigvals(E, B)
    return ev[np.isfinite(ev)]


def _poly_values(t, w, z):
    """Values of q(z) = sum_k w_k prod_{l != k}(z - t_l) and a rounding scale."""
    z = np.atleast_1d(z)
    vals = np.zeros(z.shape, dtype=complex)
    scale = np.zeros(z.shape)
    for k in range(t.size):
        term = w[k] * np.prod(np.delete(z[:, None] - t[None, :], k, axis=1), axis=1)
        vals += term
        scale += np.abs(term)
    return vals, scale


def poles_zeros(r: BarycentricRational):
    """Finite poles and zeros of ``r`` as roots of the cleared-denominator forms.

    Each candidate root is kept only if the cleared polynomial value is below
    1e-8 of its own rounding scale there, so spurious eigenvalues from the
    arrowhead pencil are dropped.
    """
    t = r.support

    def verified(w):
        roots = _roots_of_partial_fraction(t, w)
        roots = np.concatenate([roots, t[w == 0.0].astype(complex)])
        if roots.size == 0:
            return []
        vals, scale = _poly_values(t, w, roots)
        good = np.abs(vals) <= 1e-8 * np.maximum(scale, _EPS)
        out = roots[good]
        return sorted(out, key=lambda z: (z.real, z.imag))

    return verified(r.den_weights), verified(r.num_weights)


def to_quotient(r: BarycentricRational, domain=None):
    """Chebyshev coefficients of the cleared numerator and denominator.

    Returns the coefficient vectors of ``p = w_t N`` and ``q = w_t D`` in the
    Chebyshev basis of ``domain`` (default: the support hull).  This is a
    testing facility: the quotient representation loses accuracy rapidly as
    the degree grows and should not be used for evaluation.
    """
    t = r.support
    k = t.size - 1
    if domain is None:
        lo, hi = (t[0], t[-1]) if k > 0 else (t[0] - 1.0, t[0] + 1.0)
    else:
        lo, hi = map(float, domain)
    nodes = np.cos(np.pi * np.arange(k + 1) / max(k, 1))[::-1] if k > 0 else np.zeros(1)
    x = (lo + hi) / 2 + (hi - lo) / 2 * nodes
    pv, _ = _poly_values(t, r.num_weights, x)
    qv, _ = _poly_values(t, r.den_weights, x)
    p = npcheb.chebfit(nodes, pv.real, k)
    q = npcheb.chebfit(nodes, qv.real, k)
    return p, q
