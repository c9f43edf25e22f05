"""Smoothed hinge loss l1-SVM with a Gaussian kernel.

The model is ``min_w  sum_i h((B w)_i) + lam * ||I~ w||_1`` where
``w = [alpha; b]``, ``B = Y [K 1]``, ``h(t) = (1 - t)^2`` for ``t < 1``
and 0 otherwise, and ``I~`` drops the bias coordinate.
"""

from dataclasses import dataclass

import numpy as np

from .prox import prox_l1_bias
from .solver import Problem

__all__ = [
    "squared_hinge",
    "squared_hinge_deriv",
    "spectral_norm",
    "gaussian_kernel",
    "SvmProblem",
    "build_svm_problem",
    "decision_function",
    "predict",
    "accuracy",
]

LIPSCHITZ_INFLATION = 1.0 + 1e-4


def squared_hinge(t):
    """``(1 - t)^2`` for ``t < 1``, else 0 (elementwise)."""
    t = np.asarray(t, dtype=np.float64)
    r = np.maximum(1.0 - t, 0.0)
    return r * r


def squared_hinge_deriv(t):
    """``2 (t - 1)`` for ``t < 1``, else 0 (elementwise)."""
    t = np.asarray(t, dtype=np.float64)
    return 2.0 * np.minimum(t - 1.0, 0.0)


def spectral_norm(mat, tol=1e-6, max_iter=100000, seed=0):
    """Largest singular value of ``mat`` by power iteration on ``mat^T mat``.

    Starts from a fixed seeded Gaussian vector and stops when both the
    relative change of the Rayleigh quotient and the change of the unit
    iterate drop below ``tol``. The quotient alone can stall well before
    it is accurate when the top two singular values are close; the
    iterate error is roughly the square root of the quotient error, so
    requiring it too keeps the estimate within about ``tol`` relative.
    The estimate approaches the true value from below.
    """
    M = np.asarray(mat, dtype=np.float64)
    if M.ndim != 2 or not np.any(M):
        raise ValueError("spectral_norm needs a nonzero matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        u = M.T @ (M @ v)
        lam_new = float(v @ u)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            # start vector in the null space; restart from a fixed direction
            v = np.ones(M.shape[1]) / np.sqrt(M.shape[1])
            continue
        v_new = u / nu
        moved = float(np.linalg.norm(v_new - v))
        v = v_new
        if lam_new > 0 and abs(lam_new - lam) <= tol * lam_new and moved <= tol:
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(lam))


def _sq_dists(X, Z=None):
    xx = np.einsum("ij,ij->i", X, X)
    if Z is None:
        D = xx[:, None] + xx[None, :] - 2.0 * (X @ X.T)
        D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0.0)
    else:
        zz = np.einsum("ij,ij->i", Z, Z)
        D = xx[:, None] + zz[None, :] - 2.0 * (X @ Z.T)
    return np.maximum(D, 0.0)


def gaussian_kernel(X, Z=None, gamma=1.0):
    """``exp(-gamma ||x - z||^2)`` for rows of ``X`` against rows of ``Z``.

    With ``Z=None`` the symmetric training kernel is returned, with an
    exact unit diagonal.
    """
    X = np.asarray(X, dtype=np.float64)
    Z = None if Z is None else np.asarray(Z, dtype=np.float64)
    return np.exp(-gamma * _sq_dists(X, Z))


@dataclass(frozen=True)
class SvmProblem:
    """Data of one SHL-l1-SVM instance.

    ``labels`` holds the diagonal of ``Y``; ``mask`` is the diagonal of
    ``I~`` (True on the ``m`` kernel weights, False on the bias).
    """

    kernel_gamma: float
    reg_lambda: float
    m: int
    features: np.ndarray
    kernel: np.ndarray
    augmented: np.ndarray
    labels: np.ndarray
    design: np.ndarray
    lipschitz: float
    mask: np.ndarray
    num_features: int

    def smooth_value(self, w):
        return float(np.sum(squared_hinge(self.design @ w)))

    def smooth_grad(self, w):
        return self.design.T @ squared_hinge_deriv(self.design @ w)

    def nonsmooth_value(self, w):
        return self.reg_lambda * float(np.abs(w[:-1]).sum())

    def prox(self, v, scale):
        return prox_l1_bias(v, scale * self.reg_lambda)

    def objective(self, w):
        return self.smooth_value(w) + self.nonsmooth_value(w)

    def as_problem(self):
        return Problem(
            smooth_value=self.smooth_value,
            smooth_grad=self.smooth_grad,
            lipschitz=self.lipschitz,
            nonsmooth_value=self.nonsmooth_value,
            nonsmooth_prox=self.prox,
            dimension=self.m + 1,
        )

    def cross_kernel(self, points):
        X = _dense(points, self.num_features)
        return gaussian_kernel(X, self.features, self.kernel_gamma)

    def accuracy_fn(self, points):
        """Callable ``w -> accuracy`` on ``points``, with the kernel precomputed."""
        Kx = self.cross_kernel(points)
        y = np.asarray(points.labels)

        def acc(w):
            s = Kx @ w[:-1] + w[-1]
            pred = np.where(s >= 0.0, 1, -1)
            return float(np.mean(pred == y))

        return acc


def _dense(points, num_features):
    if not hasattr(points, "to_dense"):
        X = np.asarray(points, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != num_features:
            raise ValueError(
                f"points must be an (n, {num_features}) array, got shape {X.shape}"
            )
        return X
    if points.num_features > num_features:
        raise ValueError(
            f"points use feature index {points.num_features}, "
            f"model was trained on {num_features} features"
        )
    return points.to_dense(num_features)


def build_svm_problem(train, gamma, lam, power_tol=1e-6):
    """Assemble the SHL-l1-SVM for a training set.

    Returns ``(svm, problem)``. The Lipschitz constant is ``2 ||B||_2^2``
    with the spectral norm from :func:`spectral_norm`, inflated by
    ``1e-4`` relative so that ``beta = 1/L`` stays admissible despite the
    estimate approaching from below.
    """
    gamma = float(gamma)
    lam = float(lam)
    if not gamma > 0 or not lam > 0:
        raise ValueError("gamma and lambda must be positive")
    m = len(train)
    if m < 2:
        raise ValueError(f"need at least 2 training samples, got {m}")
    y = np.asarray(train.labels, dtype=np.float64)
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be in {-1, +1}")
    X = train.to_dense()
    K = gaussian_kernel(X, gamma=gamma)
    Kt = np.hstack([K, np.ones((m, 1))])
    B = y[:, None] * Kt
    L = 2.0 * spectral_norm(B, tol=power_tol) ** 2 * LIPSCHITZ_INFLATION
    mask = np.ones(m + 1, dtype=bool)
    mask[-1] = False
    svm = SvmProblem(
        kernel_gamma=gamma, reg_lambda=lam, m=m, features=X, kernel=K,
        augmented=Kt, labels=y, design=B, lipschitz=L, mask=mask,
        num_features=train.num_features,
    )
    return svm, svm.as_problem()


def decision_function(model_w, svm, points):
    """``sum_j alpha_j K(x_j, x) + b`` for every point."""
    w = np.asarray(model_w, dtype=np.float64)
    if w.shape != (svm.m + 1,):
        raise ValueError(f"model must have length {svm.m + 1}, got shape {w.shape}")
    return svm.cross_kernel(points) @ w[:-1] + w[-1]


def predict(model_w, svm, points):
    """Predicted labels in ``{-1, +1}``; a zero score maps to +1."""
    return np.where(decision_function(model_w, svm, points) >= 0.0, 1, -1)


def accuracy(predicted, actual):
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError("prediction and label arrays differ in shape")
    return float(np.mean(predicted == actual))
