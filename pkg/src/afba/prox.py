"""Proximity operators for the backward step.

Only the l1 family is provided: the scalar soft threshold, its
coordinatewise extension, and the variant that leaves a trailing bias
coordinate unpenalized (the SVM weight layout ``w = [alpha; b]``).
"""

import math

import numpy as np

__all__ = ["soft_threshold", "prox_l1", "prox_l1_bias"]


def _check_mu(mu):
    mu = float(mu)
    if not mu >= 0.0:
        raise ValueError(f"threshold must be nonnegative, got {mu!r}")
    return mu


def soft_threshold(t, mu):
    """Return ``max(|t| - mu, 0) * sign(t)`` for a scalar ``t``.

    ``sign(0)`` is taken as 0, so ``soft_threshold(0, mu) == 0``.
    """
    mu = _check_mu(mu)
    t = float(t)
    mag = abs(t) - mu
    if mag <= 0.0:
        return 0.0
    return math.copysign(mag, t)


def prox_l1(v, mu):
    """Proximity operator of ``mu * ||.||_1``, applied coordinatewise.

    Parameters
    ----------
    v : array_like
        Point at which the operator is evaluated.
    mu : float
        Nonnegative threshold. ``mu == 0`` returns a copy of ``v``.

    Returns
    -------
    ndarray
        The unique minimizer of ``0.5 * ||u - v||^2 + mu * ||u||_1``.
    """
    mu = _check_mu(mu)
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - mu, 0.0)


def prox_l1_bias(w, mu):
    """Soft-threshold every coordinate of ``w`` except the last one.

    The last entry is the bias term and is returned unchanged.
    """
    mu = _check_mu(mu)
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("prox_l1_bias expects a nonempty 1-D vector")
    out = np.empty_like(w)
    out[:-1] = np.sign(w[:-1]) * np.maximum(np.abs(w[:-1]) - mu, 0.0)
    out[-1] = w[-1]
    return out
