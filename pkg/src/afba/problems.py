"""Synthetic composite problems with seed-pinned data."""

import numpy as np

from .prox import prox_l1
from .solver import Problem

__all__ = [
    "lasso",
    "make_lasso",
    "make_quadratic",
    "least_squares_spectrum",
    "synthetic_classification",
]


def lasso(A, c, reg):
    """``0.5 ||A x - c||^2 + reg ||x||_1`` with ``L = ||A||_2^2``."""
    A = np.asarray(A, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    reg = float(reg)
    At = A.T.copy()

    def f(x):
        r = A @ x - c
        return 0.5 * float(r @ r)

    def grad(x):
        return At @ (A @ x - c)

    def g(x):
        return reg * float(np.abs(x).sum())

    def prox(v, s):
        return prox_l1(v, s * reg)

    L = float(np.linalg.norm(A, 2)) ** 2
    return Problem(f, grad, L, g, prox, A.shape[1])


def least_squares_spectrum(m, n, seed, cond):
    """``m x n`` matrix with unit top singular value and ``sigma_min^2 = 1/cond``.

    Singular values are log-spaced, so the smooth part has curvature
    spread evenly (in log scale) between ``1/cond`` and 1.
    """
    rng = np.random.default_rng(seed)
    r = min(m, n)
    U, _ = np.linalg.qr(rng.standard_normal((m, r)))
    V, _ = np.linalg.qr(rng.standard_normal((n, r)))
    sigma = np.logspace(0.0, -0.5 * np.log10(cond), r)
    return (U * sigma) @ V.T


def make_lasso(m=20, n=50, reg=0.1, seed=0, cond=None):
    """Seeded LASSO instance; returns ``(problem, A, c)``.

    With ``cond=None`` the matrix has i.i.d. standard normal entries,
    otherwise it comes from :func:`least_squares_spectrum`.
    """
    rng = np.random.default_rng(seed)
    if cond is None:
        A = rng.standard_normal((m, n))
    else:
        A = least_squares_spectrum(m, n, seed, cond)
    c = rng.standard_normal(m)
    return lasso(A, c, reg), A, c


def make_quadratic(n=10, seed=0):
    """Strongly convex quadratic ``0.5 (x - c)^T Q (x - c)``, ``g = 0``.

    Returns ``(problem, x_star)``; the minimizer is ``c`` and the optimal
    value is 0.
    """
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    Q = M.T @ M / n + 0.1 * np.eye(n)
    c = rng.standard_normal(n)

    def f(x):
        d = x - c
        return 0.5 * float(d @ (Q @ d))

    def grad(x):
        return Q @ (x - c)

    def zero(x):
        return 0.0

    def ident(v, s):
        return v

    L = float(np.linalg.eigvalsh(Q)[-1])
    return Problem(f, grad, L, zero, ident, n), c


def synthetic_classification(n_samples=3175, n_features=60, seed=0, flip=0.05):
    """Splice-shaped binary dataset: categorical features, motif-driven labels.

    Every feature takes one of four levels in ``[-1, 1]`` (a coded
    nucleotide). The label thresholds a linear score over the eight
    central positions plus one pairwise interaction at the center, at its
    median, so classes are balanced; a fraction ``flip`` of labels is
    flipped afterwards.
    """
    from .dataio import SparseDataset

    rng = np.random.default_rng(seed)
    levels = np.array([-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0])
    X = levels[rng.integers(0, 4, size=(n_samples, n_features))]
    mid = n_features // 2
    w = np.zeros(n_features)
    w[mid - 4: mid + 4] = rng.standard_normal(8)
    s = X @ w + 2.0 * X[:, mid - 1] * X[:, mid]
    y = np.where(s >= np.median(s), 1, -1)
    flips = rng.random(n_samples) < flip
    y[flips] = -y[flips]
    samples = tuple(
        (int(y[i]), tuple((j + 1, float(X[i, j])) for j in range(n_features)))
        for i in range(n_samples)
    )
    return SparseDataset(samples, n_features)
