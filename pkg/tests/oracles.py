"""Independent reference computations the tests check the library against.

Everything here deliberately avoids the code paths under test: quotient
evaluation goes through sympy rationals, minimax errors through grid search
or level bisection, and LP optima through vertex enumeration.
"""

import itertools

import numpy as np


def quotient_eval_exact(support, alpha, beta, x):
    """Evaluate w_t*N / w_t*D at rational points with exact arithmetic."""
    import sympy as sp

    xs = sp.Rational(x)
    t = [sp.Rational(v) for v in support]
    a = [sp.Rational(v) for v in alpha]
    b = [sp.Rational(v) for v in beta]
    p = sum(ai * sp.prod([xs - tj for j, tj in enumerate(t) if j != i])
            for i, ai in enumerate(a))
    q = sum(bi * sp.prod([xs - tj for j, tj in enumerate(t) if j != i])
            for i, bi in enumerate(b))
    return sp.Rational(p, q)


def brute_minimax_11(f, a, b, npts=100_000, sweeps=8):
    """Type (1,1) minimax error by nested grid search over (c0, c1, d1).

    r(x) = (c0 + c1 x) / (1 + d1 x); returns the best sup error found.
    """
    x = np.linspace(a, b, npts)
    fx = f(x)

    def sup_err(params):
        c0, c1, d1 = params
        den = 1 + d1 * x
        if np.any(np.abs(den) < 1e-12):
            return np.inf
        return np.max(np.abs(fx - (c0 + c1 * x) / den))

    center = np.zeros(3)
    center[0] = 0.5 * (fx.max() + fx.min())
    width = np.array([2.0, 2.0, 0.9])
    best = sup_err(center)
    bestp = center.copy()
    for _ in range(sweeps):
        grids = [np.linspace(c - w, c + w, 13) for c, w in zip(bestp, width)]
        c0g, c1g, d1g = np.meshgrid(*grids, indexing="ij")
        den = 1 + d1g.reshape(-1, 1) * x[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            rv = (c0g.reshape(-1, 1) + c1g.reshape(-1, 1) * x[None, :]) / den
            errs = np.max(np.abs(fx[None, :] - rv), axis=1)
        errs[np.any(np.abs(den) < 1e-12, axis=1)] = np.inf
        i = int(np.argmin(errs))
        if errs[i] < best:
            best = errs[i]
            bestp = np.array([c0g.ravel()[i], c1g.ravel()[i], d1g.ravel()[i]])
        width *= 0.22
    return best


def lp_vertex_enumeration(c, A, b, chunk=200_000):
    """Optimal value of min c.x s.t. A x <= b by enumerating basic points."""
    m, n = A.shape
    best = np.inf
    bestx = None
    combos = itertools.combinations(range(m), n)
    while True:
        batch = list(itertools.islice(combos, chunk))
        if not batch:
            break
        idx = np.array(batch)
        As = A[idx]
        bs = b[idx]
        dets = np.linalg.det(As)
        ok = np.abs(dets) > 1e-10
        if not np.any(ok):
            continue
        xs = np.linalg.solve(As[ok], bs[ok][..., None])[..., 0]
        feas = np.all(A @ xs.T <= b[:, None] + 1e-9, axis=0)
        if not np.any(feas):
            continue
        vals = xs[feas] @ c
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = vals[i]
            bestx = xs[feas][i]
    return best, bestx


def discrete_minimax_level_bisection(X, fX, m, n, lo=0.0, hi=None, tol=1e-8):
    """Discrete minimax error over X for type (m, n) via level bisection.

    Each level test is an LP feasibility problem in Chebyshev-basis quotient
    coefficients, solved with cvxopt (independent of the library's LP path):
    a level delta is achievable iff there are p, q with q > 0 on X and
    |f q - p| <= delta * q.
    """
    import cvxopt

    cvxopt.solvers.options["show_progress"] = False
    X = np.asarray(X, dtype=float)
    a, b = X.min(), X.max()
    xin = (2 * X - (a + b)) / (b - a)
    Vp = np.polynomial.chebyshev.chebvander(xin, m)
    Vq = np.polynomial.chebyshev.chebvander(xin, n)
    M = X.size

    def feasible(delta):
        # variables: (p coeffs, q coeffs, eps); maximize eps
        # constraints: fq - p - delta*q <= 0; -(fq - p) - delta*q <= 0;
        #              -q + eps <= 0;  |q coeffs| <= 1; eps <= 1
        npv, nqv = m + 1, n + 1
        nv = npv + nqv + 1
        rows = []
        rhs = []
        fq = fX[:, None] * Vq
        r1 = np.hstack([-Vp, fq - delta * Vq, np.zeros((M, 1))])
        r2 = np.hstack([Vp, -fq - delta * Vq, np.zeros((M, 1))])
        r3 = np.hstack([np.zeros((M, npv)), -Vq, np.ones((M, 1))])
        rows += [r1, r2, r3]
        rhs += [np.zeros(M), np.zeros(M), np.zeros(M)]
        bound = np.zeros((2 * nqv + 1, nv))
        bound[:nqv, npv:npv + nqv] = np.eye(nqv)
        bound[nqv:2 * nqv, npv:npv + nqv] = -np.eye(nqv)
        bound[-1, -1] = 1.0
        rows.append(bound)
        rhs.append(np.concatenate([np.ones(2 * nqv), [1.0]]))
        G = cvxopt.matrix(np.vstack(rows))
        h = cvxopt.matrix(np.concatenate(rhs))
        cvec = np.zeros(nv)
        cvec[-1] = -1.0  # maximize eps
        sol = cvxopt.solvers.lp(cvxopt.matrix(cvec), G, h)
        if sol["status"] != "optimal":
            return False
        return -sol["primal objective"] > 1e-9

    if hi is None:
        hi = float(np.max(np.abs(fX - np.mean(fX))))
    lo = float(lo)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi
