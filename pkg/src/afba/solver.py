"""Forward-backward operator and the (accelerated) forward-backward loop.

The iteration is::

    y^k     = x^k + theta_k (x^k - x^{k-1})
    x^{k+1} = T y^k,      T = prox_{beta g} o (I - beta grad f)

for ``k = 1, 2, ...`` from two given starting points ``x^0, x^1``. With
:func:`afba.momentum.no_momentum` this is the plain forward-backward
iteration ``x^{k+1} = T x^k``.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .momentum import MomentumSchedule, no_momentum

__all__ = [
    "Problem",
    "SolveConfig",
    "SolverTrace",
    "NonFiniteError",
    "TRACE_COLUMNS",
    "fb_operator",
    "fixed_point_residual",
    "compute_trace_row",
    "solve",
]

TRACE_COLUMNS = (
    "k", "fv", "nofv", "eta", "tau", "dci",
    "scaled_fv", "scaled_dci", "epsilon", "train_acc", "test_acc",
)


class NonFiniteError(FloatingPointError):
    """Raised when an iterate stops being finite."""

    def __init__(self, k):
        super().__init__(f"non-finite iterate produced at iteration k={k}")
        self.k = k


@dataclass(frozen=True)
class Problem:
    """Composite objective ``F = f + g``.

    ``smooth_grad`` must be ``lipschitz``-Lipschitz and
    ``nonsmooth_prox(v, s)`` must return ``prox_{s g}(v)``.
    """

    smooth_value: Callable[[np.ndarray], float]
    smooth_grad: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    nonsmooth_value: Callable[[np.ndarray], float]
    nonsmooth_prox: Callable[[np.ndarray, float], np.ndarray]
    dimension: int

    def objective(self, x):
        return float(self.smooth_value(x)) + float(self.nonsmooth_value(x))

    def max_step(self):
        return 1.0 / self.lipschitz


@dataclass
class SolveConfig:
    """Run parameters for :func:`solve`.

    ``beta=None`` selects ``1 / lipschitz``. ``x0`` and ``x1`` default to
    zero. The loop stops after ``max_iters`` updates or as soon as
    ``||x^{k+1} - x^k|| <= fixed_point_tol * (1 + ||x^k||)``.
    """

    schedule: MomentumSchedule = field(default_factory=no_momentum)
    max_iters: int = 1000
    beta: Optional[float] = None
    fixed_point_tol: float = 0.0
    x0: Optional[np.ndarray] = None
    x1: Optional[np.ndarray] = None
    trace_every: int = 1


@dataclass
class SolverTrace:
    """Per-iteration records, stored column-wise.

    Row ``j`` describes iterate ``x^{k[j]}``. Missing values are NaN
    (``eta``/``nofv``/``scaled_fv`` without a reference value,
    ``epsilon`` without a reference minimizer, accuracy columns outside
    the SVM experiments).
    """

    columns: dict
    beta: float
    schedule_name: str
    f_ref: Optional[float] = None
    f0: Optional[float] = None
    iters_run: int = 0
    stopped_early: bool = False

    def __getitem__(self, name):
        return self.columns[name]

    def __len__(self):
        return len(self.columns["k"])

    def row(self, j):
        return {c: self.columns[c][j] for c in self.columns}

    def to_csv(self, path=None):
        """Write the trace as CSV. Returns the text when ``path`` is None."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        n = len(self)
        cols = [self.columns.get(c) for c in TRACE_COLUMNS]
        for j in range(n):
            out = []
            for name, col in zip(TRACE_COLUMNS, cols):
                if col is None:
                    out.append("")
                elif name == "k":
                    out.append(str(int(col[j])))
                else:
                    out.append(_fmt(col[j]))
            w.writerow(out)
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def _fmt(v):
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def _check_beta(problem, beta):
    beta = float(beta)
    if not (0.0 < beta <= 1.0 / problem.lipschitz):
        raise ValueError(
            f"step beta={beta!r} must lie in (0, 1/L] with L={problem.lipschitz!r}"
        )
    return beta


def fb_operator(problem, beta, y):
    """Forward-backward map ``prox_{beta g}(y - beta grad f(y))``."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (problem.dimension,):
        raise ValueError(f"expected vector of length {problem.dimension}, got shape {y.shape}")
    beta = _check_beta(problem, beta)
    return problem.nonsmooth_prox(y - beta * problem.smooth_grad(y), beta)


def fixed_point_residual(problem, beta, x):
    """``||T x - x||``; zero exactly at minimizers of ``F``."""
    return float(np.linalg.norm(fb_operator(problem, beta, x) - x))


def compute_trace_row(problem, k, x_k, x_prev, y_k, beta, schedule,
                      f_ref=None, f0=None, x_ref=None, fv=None):
    """Diagnostics for iterate ``x^k``.

    Returns a dict with the :data:`TRACE_COLUMNS` quantities except the
    accuracy columns: ``eta = F(x^k) - f_ref``, ``tau = ||x^k - x^{k-1}||^2
    / (2 beta)``, the rate-scaled ``t_{k-1}^2 eta`` and ``t_{k-1} dci``,
    ``nofv = eta / (F(x^0) - f_ref)``, and, when ``x_ref`` is given,
    ``epsilon = 2 beta t_{k-1}^2 eta + ||z^k - x_ref||^2`` with
    ``z^k = t_k y^k + (1 - t_k) x^k``.
    """
    if fv is None:
        fv = problem.objective(x_k)
    dci = float(np.linalg.norm(x_k - x_prev))
    tkm1 = schedule.t(k - 1)
    nan = float("nan")
    row = {
        "k": k,
        "fv": fv,
        "dci": dci,
        "tau": dci * dci / (2.0 * beta),
        "scaled_dci": tkm1 * dci,
        "eta": nan,
        "nofv": nan,
        "scaled_fv": nan,
        "epsilon": nan,
    }
    if f_ref is not None:
        eta = fv - f_ref
        row["eta"] = eta
        row["scaled_fv"] = tkm1 * tkm1 * eta
        if f0 is not None and f0 != f_ref:
            row["nofv"] = eta / (f0 - f_ref)
        if x_ref is not None:
            tk = schedule.t(k)
            z = tk * y_k + (1.0 - tk) * x_k
            dz = z - x_ref
            row["epsilon"] = 2.0 * beta * tkm1 * tkm1 * eta + float(dz @ dz)
    return row


_ROW_KEYS = ("fv", "nofv", "eta", "tau", "dci", "scaled_fv", "scaled_dci", "epsilon")


def solve(problem, config, f_ref=None, x_ref=None, metrics: Optional[Mapping] = None):
    """Run the (accelerated) forward-backward iteration.

    Parameters
    ----------
    problem : Problem
    config : SolveConfig
    f_ref : float, optional
        Reference optimal value; enables ``eta``, ``nofv`` and ``scaled_fv``.
    x_ref : ndarray, optional
        Reference minimizer; enables ``epsilon`` (requires ``f_ref``).
    metrics : mapping of str to callable, optional
        Extra columns evaluated at ``x^k`` on every recorded row, e.g.
        ``{"test_acc": ...}``.

    Returns
    -------
    x : ndarray
        The last computed iterate.
    trace : SolverTrace
        Row ``k`` is recorded when ``k == 1``, ``k % trace_every == 0``,
        or on the final iteration.
    """
    n = problem.dimension
    beta = _check_beta(problem, problem.max_step() if config.beta is None else config.beta)
    if config.max_iters < 1:
        raise ValueError("max_iters must be positive")
    if config.trace_every < 1:
        raise ValueError("trace_every must be positive")
    sched = config.schedule

    def _init(v):
        if v is None:
            return np.zeros(n)
        v = np.array(v, dtype=np.float64)
        if v.shape != (n,):
            raise ValueError(f"initial vector must have length {n}, got shape {v.shape}")
        return v

    x_prev = _init(config.x0)
    x = _init(config.x1)
    f0 = problem.objective(x_prev)
    if x_ref is not None:
        x_ref = np.asarray(x_ref, dtype=np.float64)

    grad = problem.smooth_grad
    prox = problem.nonsmooth_prox
    tol = float(config.fixed_point_tol)
    every = int(config.trace_every)
    max_iters = int(config.max_iters)
    momentum = sched.has_momentum

    rows = {c: [] for c in ("k",) + _ROW_KEYS}
    extra = {name: [] for name in (metrics or {})}
    stopped = False
    k = 0
    for k in range(1, max_iters + 1):
        if momentum:
            th = sched.theta(k)
            y = x + th * (x - x_prev) if th != 0.0 else x
        else:
            y = x
        x_new = prox(y - beta * grad(y), beta)
        if not np.all(np.isfinite(x_new)):
            raise NonFiniteError(k)
        step = float(np.linalg.norm(x_new - x))
        last = k == max_iters or step <= tol * (1.0 + float(np.linalg.norm(x)))
        if k == 1 or k % every == 0 or last:
            row = compute_trace_row(problem, k, x, x_prev, y, beta, sched,
                                    f_ref=f_ref, f0=f0, x_ref=x_ref)
            rows["k"].append(k)
            for key in _ROW_KEYS:
                rows[key].append(row[key])
            for name, fn in (metrics or {}).items():
                extra[name].append(float(fn(x)))
        x_prev, x = x, x_new
        if last:
            stopped = k < max_iters
            break

    columns = {"k": np.asarray(rows["k"], dtype=np.int64)}
    for key in _ROW_KEYS:
        columns[key] = np.asarray(rows[key], dtype=np.float64)
    for name, vals in extra.items():
        columns[name] = np.asarray(vals, dtype=np.float64)
    trace = SolverTrace(
        columns=columns, beta=beta, schedule_name=sched.name,
        f_ref=f_ref, f0=f0, iters_run=k, stopped_early=stopped,
    )
    return x, trace
