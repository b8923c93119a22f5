"""Structured linear algebra for barycentric rational approximation.

Cauchy and Vandermonde-null-space builders, the diagonal weighting that
annihilates Cauchy Gram products, the closed-form thin QR for interlaced
support points, and a dense symmetric eigendecomposition front-end.

Node-polynomial products such as ``prod(x - t_k)`` overflow or underflow
double precision long before the degrees of interest are reached, so all
products here are carried as (mantissa, exponent) pairs and only ratios of
comparable magnitude are ever converted back to floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "NodeSystem",
    "NullBasis",
    "node_system",
    "cauchy_matrix",
    "delta_weights",
    "explicit_qr",
    "arnoldi_null_basis",
    "symmetric_eig",
]

_EXP_CLIP = 4000  # beyond this ldexp saturates to 0/inf anyway


class ScaledArray(NamedTuple):
    """Array of reals stored as ``mant * 2**expo`` with ``|mant|`` in [0.5, 1)."""

    mant: np.ndarray
    expo: np.ndarray

    def to_float(self, shift=0):
        """Convert to plain floats, optionally rescaled by ``2**-shift``."""
        e = np.clip(self.expo - shift, -_EXP_CLIP, _EXP_CLIP).astype(np.int32)
        return np.ldexp(self.mant, e)

    def log2abs(self):
        with np.errstate(divide="ignore"):
            return self.expo + np.log2(np.abs(self.mant))

    @property
    def sign(self):
        return np.sign(self.mant)


def _renorm(mant, expo):
    m, e = np.frexp(mant)
    return m, expo + e


def scaled_from(x) -> ScaledArray:
    x = np.asarray(x, dtype=float)
    m, e = np.frexp(x)
    return ScaledArray(m, e.astype(np.int64))


def scaled_product(factors, axis=-1) -> ScaledArray:
    """Signed product along ``axis``, renormalized to avoid over/underflow."""
    f = np.moveaxis(np.asarray(factors, dtype=float), axis, -1)
    mant = np.ones(f.shape[:-1])
    expo = np.zeros(f.shape[:-1], dtype=np.int64)
    for j in range(f.shape[-1]):
        mant = mant * f[..., j]
        if j % 4 == 3:
            mant, expo = _renorm(mant, expo)
    mant, expo = _renorm(mant, expo)
    return ScaledArray(mant, expo)


def scaled_mul(a: ScaledArray, b: ScaledArray) -> ScaledArray:
    m, e = _renorm(a.mant * b.mant, a.expo + b.expo)
    return ScaledArray(m, e)


def scaled_div(a: ScaledArray, b: ScaledArray) -> ScaledArray:
    with np.errstate(divide="ignore", invalid="ignore"):
        m, e = _renorm(a.mant / b.mant, a.expo - b.expo)
    return ScaledArray(m, e)


def scaled_abs(a: ScaledArray) -> ScaledArray:
    return ScaledArray(np.abs(a.mant), a.expo)


def scaled_sqrt(a: ScaledArray) -> ScaledArray:
    if np.any(a.mant < 0):
        raise ValueError("scaled_sqrt requires nonnegative values")
    odd = (a.expo % 2).astype(bool)
    mant = np.where(odd, a.mant * 2.0, a.mant)
    expo = np.where(odd, a.expo - 1, a.expo)
    m, e = _renorm(np.sqrt(mant), expo // 2)
    return ScaledArray(m, e)


def _node_values(nodes, at) -> ScaledArray:
    """prod_k (at_j - nodes_k) for each j, as a scaled array."""
    return scaled_product(np.subtract.outer(np.asarray(at, float), nodes), axis=-1)


def _node_derivs(nodes) -> ScaledArray:
    """prod_{l != k} (nodes_k - nodes_l) for each k."""
    d = np.subtract.outer(nodes, nodes)
    np.fill_diagonal(d, 1.0)
    return scaled_product(d, axis=-1)


def _check_strictly_increasing(x, name):
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    if x.size > 1 and not np.all(np.diff(x) > 0):
        raise ValueError(f"{name} must be strictly increasing")


@dataclass(frozen=True)
class NodeSystem:
    """Reference/support node pair with precomputed node-polynomial data.

    ``ref_derivs`` holds the derivative of the reference node polynomial at
    each reference, ``support_vals`` the support node polynomial at each
    reference (exactly zero where a reference coincides with a support), and
    ``support_derivs`` the derivative of the support node polynomial at each
    support point.  ``support_pos[k]`` is the index of support ``k`` inside
    the reference vector, or -1 when it is not a reference point.
    """

    refs: np.ndarray
    supports: np.ndarray
    ref_derivs: ScaledArray
    support_vals: ScaledArray
    support_derivs: ScaledArray
    support_pos: np.ndarray

    @property
    def node_poly_ref_derivs(self):
        """Plain-float view of the reference node-polynomial derivatives."""
        return self.ref_derivs.to_float()

    @property
    def node_poly_at_refs(self):
        """Plain-float view of the support node polynomial at the references."""
        return self.support_vals.to_float()


def node_system(refs, supports) -> NodeSystem:
    refs = np.asarray(refs, dtype=float)
    supports = np.asarray(supports, dtype=float)
    _check_strictly_increasing(refs, "refs")
    _check_strictly_increasing(supports, "supports")

    ref_derivs = _node_derivs(refs)
    support_vals = _node_values(supports, refs)
    support_derivs = _node_derivs(supports)

    pos = np.searchsorted(refs, supports)
    pos = np.where((pos < refs.size) & (refs[np.minimum(pos, refs.size - 1)] == supports),
                   pos, -1)

    # sanity: products vanish exactly at coincident points and nowhere else
    coincident = np.zeros(refs.size, dtype=bool)
    coincident[pos[pos >= 0]] = True
    if np.any((support_vals.mant == 0) != coincident):
        raise ValueError("degenerate node configuration (coincident points)")
    if np.any(ref_derivs.mant == 0) or np.any(support_derivs.mant == 0):
        raise ValueError("duplicate nodes")
    return NodeSystem(refs, supports, ref_derivs, support_vals, support_derivs, pos)


def cauchy_matrix(rows, cols):
    """Matrix with entries 1/(rows_l - cols_k); the points must be disjoint."""
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    d = np.subtract.outer(rows, cols)
    if np.any(d == 0):
        raise ValueError("row and column points must be pairwise distinct")
    return 1.0 / d


def delta_weights(system: NodeSystem):
    """Diagonal weights ``w_t(x_l)^2 / w_x'(x_l)`` annihilating C^T diag(.) C.

    For systems with more than 31 support points the vector is rescaled by a
    power of two so its largest magnitude is one; every consumer of these
    weights is invariant under positive global scalings, and the unscaled
    values overflow double precision at the degrees this library targets.
    """
    if np.any(system.support_pos >= 0):
        raise ValueError("delta weights require refs and supports to be disjoint")
    delta = scaled_div(scaled_mul(system.support_vals, system.support_vals),
                       system.ref_derivs)
    shift = 0
    log2 = delta.log2abs()
    if system.supports.size > 31 or np.max(np.abs(log2)) > 960:
        shift = int(np.max(log2))
    return delta.to_float(shift)


def _interlaced_positions(refs, supports):
    if refs.size % 2 or supports.size != refs.size // 2:
        return None
    if np.array_equal(supports, refs[1::2]):
        return np.arange(1, refs.size, 2)
    return None


def _explicit_qr_scaled(system: NodeSystem):
    """Closed-form thin QR of the weighted Cauchy basis for interlaced supports.

    Returns ``(Q1, R)`` with ``Q1`` in plain floats (its entries are O(1) by
    construction) and the diagonal of ``R`` as a scaled array.
    """
    refs, t = system.refs, system.supports
    pos = _interlaced_positions(refs, t)
    if pos is None:
        raise ValueError("supports must be exactly the odd-indexed references")
    L, n1 = refs.size, t.size
    even = np.arange(0, L, 2)

    wx_even = system.ref_derivs[0][even], system.ref_derivs[1][even]
    wx_even = ScaledArray(*wx_even)
    wx_t = ScaledArray(system.ref_derivs.mant[pos], system.ref_derivs.expo[pos])
    wt_even = ScaledArray(np.abs(system.support_vals.mant[even]),
                          system.support_vals.expo[even])
    wtp = scaled_abs(system.support_derivs)

    # |w_t(x_j)/w_t'(t_k)| for even rows j, all columns k
    num = scaled_div(ScaledArray(wt_even.mant[:, None], wt_even.expo[:, None]),
                     ScaledArray(wtp.mant[None, :], wtp.expo[None, :]))
    # sqrt(|w_x'(t_k)| / (2 |w_x'(x_j)|))
    rat = scaled_div(ScaledArray(np.abs(wx_t.mant)[None, :], wx_t.expo[None, :]),
                     ScaledArray(np.abs(wx_even.mant)[:, None],
                                 wx_even.expo[:, None] + 1))
    ent = scaled_mul(num, scaled_sqrt(rat))
    ent = scaled_div(ent, scaled_from(refs[even][:, None] - t[None, :]))

    Q1 = np.zeros((L, n1))
    Q1[even] = ent.to_float()
    Q1[pos, np.arange(n1)] = 1.0 / np.sqrt(2.0)

    r = scaled_div(wtp, scaled_sqrt(scaled_abs(wx_t)))
    rm, re = _renorm(r.mant * np.sqrt(2.0), r.expo)
    return Q1, ScaledArray(rm, re)


def explicit_qr(refs, supports=None):
    """Thin QR of the weighted Cauchy basis in the interlaced limit.

    ``Q1`` has orthonormal columns; ``R`` is returned as a dense diagonal
    matrix (its entries can overflow floats for very large node sets, in
    which case the callers that matter work from the scaled form directly).
    """
    refs = np.asarray(refs, dtype=float)
    if supports is None:
        supports = refs[1::2]
    system = node_system(refs, supports)
    Q1, r = _explicit_qr_scaled(system)
    return Q1, np.diag(r.to_float())


def scaled_basis_matrix(system: NodeSystem):
    """The weighted Cauchy basis ``|Delta|^{1/2} C`` in its continuous limit.

    Rows where a reference coincides with a support point take their limit
    value (nonzero only in the matching column).  The result is rescaled by
    a global power of two so the largest entry has magnitude one; all
    downstream factorizations are invariant under that scaling.
    """
    refs, t, pos = system.refs, system.supports, system.support_pos
    L, K1 = refs.size, t.size
    sq = scaled_sqrt(scaled_abs(system.ref_derivs))

    row = scaled_div(scaled_abs(system.support_vals), sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        mant = np.where(refs[:, None] - t[None, :] != 0,
                        row.mant[:, None] / (refs[:, None] - t[None, :]),
                        0.0)
    mant, expo = _renorm(mant, np.broadcast_to(row.expo[:, None], (L, K1)).copy())

    coinc = np.nonzero(pos >= 0)[0]
    if coinc.size:
        diag = scaled_div(scaled_abs(system.support_derivs),
                          ScaledArray(sq.mant[pos.clip(0)], sq.expo[pos.clip(0)]))
        for k, j in enumerate(pos):
            if j >= 0:
                mant[j] = 0.0
                expo[j] = 0
                mant[j, k] = diag.mant[k]
                expo[j, k] = diag.expo[k]

    ent = ScaledArray(mant, expo)
    finite = ent.mant != 0
    shift = int(np.max(ent.log2abs()[finite])) if np.any(finite) else 0
    return ent.to_float(shift)


@dataclass(frozen=True)
class NullBasis:
    """Orthonormal basis of a Vandermonde null space.

    ``matrix`` spans the admissible coefficient directions; ``complement``
    is the Krylov basis it is orthogonal to.  ``kind`` records whether the
    basis constrains numerator or denominator coefficients.
    """

    matrix: np.ndarray
    kind: str
    complement: np.ndarray


def arnoldi_null_basis(points, deficiency, seed=None, kind="denominator") -> NullBasis:
    """Null-space basis of the transposed Vandermonde block via Arnoldi.

    Builds the Krylov space ``{seed, diag(points) seed, ...}`` with
    ``deficiency`` columns by repeated multiplication and orthogonalization,
    then returns its orthogonal complement.  With the default all-ones seed
    the complement is exactly the null space of the Vandermonde block with
    rows ``points**0 .. points**(deficiency-1)``.
    """
    t = np.asarray(points, dtype=float)
    if not 1 <= deficiency <= t.size - 1:
        raise ValueError("deficiency must lie in [1, len(points) - 1]")
    if seed is None:
        seed = np.ones_like(t)
    seed = np.asarray(seed, dtype=float)
    nrm = np.linalg.norm(seed)
    if nrm < 1e-14:
        raise ValueError("Arnoldi breakdown: zero seed")
    Q = np.empty((t.size, deficiency))
    Q[:, 0] = seed / nrm
    for i in range(1, deficiency):
        v = t * Q[:, i - 1]
        scale = np.linalg.norm(v)
        for _ in range(2):  # re-orthogonalize once, enough in practice
            v = v - Q[:, :i] @ (Q[:, :i].T @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-14 * max(scale, 1.0):
            raise ValueError("Arnoldi breakdown: degenerate seed")
        Q[:, i] = v / nv
    full, _ = scipy.linalg.qr(Q, mode="full")
    # fix the complement's first rows to deterministic signs
    P = full[:, deficiency:]
    flip = np.sign(P[np.argmax(np.abs(P), axis=0), np.arange(P.shape[1])])
    P = P * np.where(flip == 0, 1.0, flip)
    return NullBasis(matrix=P, kind=kind, complement=Q)


def symmetric_eig(A):
    """Full spectrum of a symmetric matrix, eigenvalues ascending.

    The input is symmetrized internally; an asymmetry beyond 1e-12 of its
    magnitude is rejected.  Returns ``(eigenvalues, eigenvectors)`` with
    eigenvectors in columns.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix must be finite")
    scale = np.max(np.abs(A))
    if scale > 0 and np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    w, v = scipy.linalg.eigh((A + A.T) / 2)
    return w, v


def definite_eig(A, B):
    """Eigenpairs of the symmetric-definite pencil (A, B), ascending."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    w, v = scipy.linalg.eigh((A + A.T) / 2, (B + B.T) / 2)
    return w, v
