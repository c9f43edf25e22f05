"""Momentum schedules ``(t_k, theta_k)`` and Momentum-Condition diagnostics.

Every momentum variant is expressed through a sequence ``t_k`` and the
extrapolation weight ``theta_k = (t_{k-1} - 1) / t_k``:

* classic Nesterov (FISTA): ``t_0 = 1``, ``t_k = (1 + sqrt(1 + 4 t_{k-1}^2)) / 2``;
* generalized Nesterov: ``t_k = a * k**omega + b`` with ``omega in (0, 1]``;
* Chambolle-Dossal: ``theta_k = (k - 1) / (k + alpha - 1)``, which is the
  generalized scheme with ``omega = 1``, ``a = 1 / (alpha - 1)``, ``b = 1``;
* no momentum: ``t_k = 1`` so ``theta_k = 0`` (plain forward-backward).
"""

import enum
import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Variant",
    "MomentumSchedule",
    "ConditionReport",
    "classic_nesterov",
    "chambolle_dossal",
    "generalized_nesterov",
    "no_momentum",
    "t_value",
    "theta",
    "gap_sequence",
    "check_momentum_condition",
    "super_linear_divergence",
]


class Variant(enum.Enum):
    CLASSIC_NESTEROV = "fista"
    CHAMBOLLE_DOSSAL = "cd"
    GENERALIZED_NESTEROV = "gn"
    NO_MOMENTUM = "fba"


class _NesterovTable:
    """Growable, lock-protected table of the classic Nesterov ``t_k``."""

    def __init__(self):
        self._lock = threading.Lock()
        self._values = [1.0]

    def _grow(self, k):
        vals = self._values
        t = vals[-1]
        sqrt = math.sqrt
        for _ in range(len(vals), k + 1):
            t = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
            vals.append(t)

    def get(self, k):
        vals = self._values
        if k < len(vals):
            return vals[k]
        with self._lock:
            self._grow(k)
            return self._values[k]

    def array(self, n):
        """Return ``t_0 .. t_n`` as a float64 array."""
        with self._lock:
            self._grow(n)
            return np.array(self._values[: n + 1])


_NESTEROV = _NesterovTable()


@dataclass(frozen=True)
class MomentumSchedule:
    """Immutable description of a momentum scheme.

    Use the factory functions (:func:`classic_nesterov`,
    :func:`chambolle_dossal`, :func:`generalized_nesterov`,
    :func:`no_momentum`) rather than the constructor so that parameters
    are validated.
    """

    variant: Variant
    omega: float = 1.0
    a: float = 0.0
    b: float = 1.0
    alpha: float = float("nan")
    label: str = field(default="", compare=False)

    @property
    def name(self):
        if self.label:
            return self.label
        v = self.variant
        if v is Variant.CLASSIC_NESTEROV:
            return "fista"
        if v is Variant.NO_MOMENTUM:
            return "fba"
        if v is Variant.CHAMBOLLE_DOSSAL:
            return f"cd(alpha={self.alpha:g})"
        return f"gn(omega={self.omega:g},a={self.a:g},b={self.b:g})"

    def t(self, k):
        """``t_k`` for a nonnegative integer ``k``."""
        if k < 0:
            raise ValueError(f"k must be nonnegative, got {k}")
        v = self.variant
        if v is Variant.CLASSIC_NESTEROV:
            return _NESTEROV.get(k)
        if v is Variant.NO_MOMENTUM:
            return 1.0
        return self.a * float(k) ** self.omega + self.b

    def t_array(self, n):
        """``t_0, ..., t_n`` as an array."""
        v = self.variant
        if v is Variant.CLASSIC_NESTEROV:
            return _NESTEROV.array(n)
        if v is Variant.NO_MOMENTUM:
            return np.ones(n + 1)
        k = np.arange(n + 1, dtype=np.float64)
        return self.a * k**self.omega + self.b

    def theta(self, k):
        """Extrapolation weight ``theta_k = (t_{k-1} - 1) / t_k`` for ``k >= 1``."""
        if k < 1:
            raise ValueError(f"theta is defined for k >= 1, got {k}")
        if self.variant is Variant.NO_MOMENTUM:
            return 0.0
        tk = self.t(k)
        if tk == 0.0:
            raise ValueError(f"t_k vanishes at k={k}; theta_k undefined")
        return (self.t(k - 1) - 1.0) / tk

    @property
    def has_momentum(self):
        return self.variant is not Variant.NO_MOMENTUM


def classic_nesterov():
    """FISTA schedule, ``t_0 = 1``."""
    return MomentumSchedule(Variant.CLASSIC_NESTEROV)


def no_momentum():
    return MomentumSchedule(Variant.NO_MOMENTUM)


def _check_b(a, omega, b):
    # t_k = a k^omega + b vanishes only at k = (-b/a)^(1/omega)
    if b >= 0:
        return
    k = round((-b / a) ** (1.0 / omega))
    for kk in (k - 1, k, k + 1):
        if kk >= 1 and a * float(kk) ** omega + b == 0.0:
            raise ValueError(f"b={b!r} makes t_k vanish at k={kk}")


def generalized_nesterov(omega, a, b=1.0, label=""):
    """Generalized Nesterov schedule ``t_k = a * k**omega + b``.

    ``omega`` must lie in ``(0, 1]`` and ``a`` must be positive. With
    ``omega == 1`` and ``a >= 1/2`` the schedule is still built, but a
    warning is issued since the strict gap inequality of Momentum-Condition
    fails eventually.
    """
    omega = float(omega)
    a = float(a)
    b = float(b)
    if not 0.0 < omega <= 1.0:
        raise ValueError(f"omega must be in (0, 1], got {omega!r}")
    if not a > 0.0:
        raise ValueError(f"a must be positive, got {a!r}")
    if not math.isfinite(b):
        raise ValueError(f"b must be finite, got {b!r}")
    _check_b(a, omega, b)
    if omega == 1.0 and a >= 0.5:
        warnings.warn(
            f"omega=1 with a={a:g} >= 1/2 violates Momentum-Condition item (ii)",
            stacklevel=2,
        )
    return MomentumSchedule(Variant.GENERALIZED_NESTEROV, omega=omega, a=a, b=b, label=label)


def chambolle_dossal(alpha):
    """``theta_k = (k - 1) / (k + alpha - 1)`` through ``t_k = k/(alpha-1) + 1``."""
    alpha = float(alpha)
    if not alpha > 3.0:
        raise ValueError(f"alpha must exceed 3, got {alpha!r}")
    return MomentumSchedule(
        Variant.CHAMBOLLE_DOSSAL, omega=1.0, a=1.0 / (alpha - 1.0), b=1.0, alpha=alpha
    )


def t_value(schedule, k):
    return schedule.t(k)


def theta(schedule, k):
    return schedule.theta(k)


def gap_sequence(t):
    """``d_k = t_{k-1}^2 - t_k (t_k - 1)`` for ``k = 1 .. len(t) - 1``."""
    t = np.asarray(t, dtype=np.float64)
    return t[:-1] ** 2 - t[1:] * (t[1:] - 1.0)


@dataclass
class ConditionReport:
    """Finite-horizon evidence for the four Momentum-Condition hypotheses.

    ``holds`` maps ``"i"``, ``"ii"``, ``"iii"``, ``"iv"`` to booleans and
    ``witness`` maps each failed item to the offending index. For item
    (ii) the witness is the last ``k`` at which the inequality failed
    (for the largest ``rho`` tried).
    """

    holds: dict
    K_observed: int
    rho_observed: float
    ratio_bounds: tuple
    horizon: int
    partial_sum: float
    tail_sum_ratio: float
    witness: dict = field(default_factory=dict)

    @property
    def all_hold(self):
        return all(self.holds.values())

    def lines(self):
        out = [f"horizon={self.horizon}"]
        for item in ("i", "ii", "iii", "iv"):
            w = self.witness.get(item)
            extra = "" if w is None else f" (witness k={w})"
            out.append(f"item_{item}={'holds' if self.holds[item] else 'fails'}{extra}")
        out.append(f"K_observed={self.K_observed}")
        out.append(f"rho_observed={self.rho_observed:g}")
        out.append(f"c1={self.ratio_bounds[0]!r}")
        out.append(f"c2={self.ratio_bounds[1]!r}")
        out.append(f"partial_sum_inv_t={self.partial_sum!r}")
        out.append(f"tail_sum_ratio={self.tail_sum_ratio!r}")
        return out


RHO_POWERS = 16


def check_momentum_condition(schedule, horizon):
    """Scan ``k = 1 .. horizon`` for the Momentum-Condition hypotheses.

    Item (ii) searches ``rho`` over ``2, 4, ..., 2**16`` and accepts the
    smallest one for which ``1 <= t_{k-1} < rho * d_k`` holds on a tail
    that covers at least the second half of the horizon. Item (iii)
    reports the extreme values of ``t_{k-1} / t_k`` over the tail half.
    Item (iv) is only evidence: ``t`` must grow and the partial sums of
    ``1/t_k`` over the last doubling must not shrink relative to the
    previous doubling (a convergent series would show a plateau).
    """
    horizon = int(horizon)
    if horizon < 10:
        raise ValueError("horizon must be at least 10")
    t = schedule.t_array(horizon)
    k = np.arange(1, horizon + 1)
    tk = t[1:]
    tkm1 = t[:-1]
    holds = {}
    witness = {}

    zero = np.flatnonzero(tk == 0.0)
    holds["i"] = zero.size == 0
    if zero.size:
        witness["i"] = int(k[zero[0]])

    with np.errstate(divide="ignore", invalid="ignore"):
        d = gap_sequence(t)
        half = horizon // 2
        K_obs, rho_obs = horizon, float(2**RHO_POWERS)
        for j in range(1, RHO_POWERS + 1):
            rho = float(2**j)
            bad = np.flatnonzero(~((tkm1 >= 1.0) & (tkm1 < rho * d)))
            K = int(k[bad[-1]]) if bad.size else 0
            if K <= half:
                K_obs, rho_obs = K, rho
                break
            K_obs = min(K_obs, K)
        holds["ii"] = K_obs <= half
        if not holds["ii"]:
            witness["ii"] = K_obs

        tail = slice(half, horizon)
        ratio = tkm1[tail] / tk[tail]
        c1 = float(np.min(ratio))
        c2 = float(np.max(ratio))
        holds["iii"] = bool(np.all(np.isfinite(ratio)) and c1 > 0.0)
        if not holds["iii"]:
            witness["iii"] = int(k[half + int(np.argmin(ratio))])

        inv = np.cumsum(1.0 / tk)
        s_q = inv[horizon // 4 - 1]
        s_h = inv[half - 1]
        s_f = inv[-1]
        prev, last = s_h - s_q, s_f - s_h
        tail_ratio = float(last / prev) if prev != 0 else float("inf")
    growing = bool(t[horizon] > t[half])
    holds["iv"] = bool(growing and np.isfinite(s_f) and tail_ratio >= 0.9)
    if not holds["iv"]:
        witness["iv"] = horizon
    return ConditionReport(
        holds=holds,
        K_observed=int(K_obs),
        rho_observed=rho_obs,
        ratio_bounds=(c1, c2),
        horizon=horizon,
        partial_sum=float(s_f),
        tail_sum_ratio=tail_ratio,
        witness=witness,
    )


def super_linear_divergence(omega, a, b, k_max):
    """Gap ``d_k = t_{k-1}^2 - t_k (t_k - 1)`` for ``t_k = a k^omega + b``, ``k = 1..k_max``.

    For ``omega > 1`` the gap tends to minus infinity, so such power
    schedules never satisfy the strict gap inequality.
    """
    omega = float(omega)
    if not omega > 1.0:
        raise ValueError(f"omega must exceed 1, got {omega!r}")
    if a == 0:
        raise ValueError("a must be nonzero")
    kk = np.arange(k_max + 1, dtype=np.float64)
    return gap_sequence(a * kk**omega + b)
