"""Experiment driver: schedule comparisons, accuracy tables, rate diagnostics.

All outputs are CSV or plain ``key=value`` text. Every number written is
reproducible from the manifest and the input files; no wall-clock values
are recorded.
"""

import configparser
import csv
import hashlib
import logging
import math
import os
import re
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import __version__
from .dataio import load_libsvm, split
from .momentum import (
    chambolle_dossal,
    check_momentum_condition,
    classic_nesterov,
    gap_sequence,
    generalized_nesterov,
    no_momentum,
    Variant,
)
from .problems import make_lasso, make_quadratic
from .solver import SolveConfig, solve
from .svm import build_svm_problem

__all__ = [
    "ConfigError",
    "DataError",
    "ReferenceNotConverged",
    "ExperimentConfig",
    "parse_number",
    "parse_schedule",
    "load_config",
    "prepare",
    "run_compare",
    "run_table",
    "run_rates",
    "iterations_to_accuracy",
    "rate_report",
    "RateReport",
    "decile_medians",
]

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class DataError(RuntimeError):
    pass


class ReferenceNotConverged(ArithmeticError):
    """The reference objective value is not below every run's final value."""


_NUM = re.compile(r"^\s*([-+]?[0-9.eE+-]+)\s*(?:([/^])\s*([-+]?[0-9.eE+-]+))?\s*$")


def parse_number(text):
    """Parse ``3.01``, ``1/2.01`` or ``2^-5`` into a float."""
    mt = _NUM.match(str(text))
    if not mt:
        raise ConfigError(f"cannot parse number {text!r}")
    try:
        left = float(mt.group(1))
        op, right = mt.group(2), mt.group(3)
        if op == "/":
            return left / float(right)
        if op == "^":
            return left ** float(right)
        return left
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse number {text!r}") from None


def parse_schedule(spec):
    """Build a schedule from ``fba``, ``fista``, ``cd:ALPHA`` or ``gn:OMEGA,A,B``."""
    spec = spec.strip()
    name, _, args = spec.partition(":")
    name = name.strip().lower()
    vals = [parse_number(a) for a in args.split(",")] if args.strip() else []
    try:
        if name in ("fba", "none") and not vals:
            return no_momentum()
        if name in ("fista", "nesterov") and not vals:
            return classic_nesterov()
        if name == "cd" and len(vals) == 1:
            return chambolle_dossal(vals[0])
        if name == "gn" and len(vals) in (2, 3):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return generalized_nesterov(*vals)
    except ValueError as exc:
        raise ConfigError(f"schedule {spec!r}: {exc}") from None
    raise ConfigError(f"unknown schedule spec {spec!r}")


def schedule_id(index, spec):
    slug = re.sub(r"[^A-Za-z0-9.]+", "_", spec.strip()).strip("_")
    return f"{index:02d}_{slug}"


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``problem`` is ``"svm"``, ``"lasso"`` or ``"quadratic"``. For SVM runs
    either ``train_file`` and ``test_file`` both exist under ``data_dir``
    (no splitting), or only ``train_file`` exists and is split with
    ``train_count`` and ``split_seed``. ``f_ref`` is ``"fista"`` (long run
    of ``f_ref_iters`` iterations) or ``"exact"`` (synthetic problems only).
    """

    problem: str = "lasso"
    schedules: List[str] = field(default_factory=lambda: ["fba", "fista"])
    max_iters: int = 1000
    trace_every: int = 1
    beta: Optional[float] = None
    f_ref: str = "fista"
    f_ref_iters: int = 20000
    out_dir: str = "out"
    accuracy_thresholds: List[float] = field(default_factory=list)
    # svm
    data_dir: str = "data"
    train_file: str = "splice"
    test_file: str = "splice.t"
    train_count: int = 1000
    split_seed: int = 0
    gamma: float = 2.0**-5
    lam: float = 2.0**-7
    # synthetic
    m: int = 20
    n: int = 50
    reg: float = 0.1
    seed: int = 0
    cond: Optional[float] = None

    def validate(self):
        if self.problem not in ("svm", "lasso", "quadratic"):
            raise ConfigError(f"unknown problem kind {self.problem!r}")
        if not self.schedules:
            raise ConfigError("at least one schedule is required")
        for s in self.schedules:
            parse_schedule(s)
        if any(not 0.0 < t <= 1.0 for t in self.accuracy_thresholds):
            raise ConfigError("accuracy thresholds must lie in (0, 1]")
        if self.max_iters < 1 or self.trace_every < 1 or self.f_ref_iters < 1:
            raise ConfigError("iteration counts must be positive")
        if self.f_ref not in ("fista", "exact"):
            raise ConfigError(f"unknown f_ref policy {self.f_ref!r}")
        if self.f_ref == "exact" and self.problem == "svm":
            raise ConfigError("f_ref=exact is only available for synthetic problems")
        if self.beta is not None and not self.beta > 0:
            raise ConfigError("beta must be positive")
        return self


_INT_KEYS = {"max_iters", "trace_every", "f_ref_iters", "train_count", "split_seed", "m", "n", "seed"}
_FLOAT_KEYS = {"gamma", "lam", "reg"}
_OPT_FLOAT_KEYS = {"beta", "cond"}
_STR_KEYS = {"problem", "f_ref", "out_dir", "data_dir", "train_file", "test_file"}


def config_from_mapping(values, base=None):
    cfg = base or ExperimentConfig()
    for key, raw in values.items():
        key = key.strip().replace("-", "_")
        raw = str(raw).strip()
        try:
            if key in _INT_KEYS:
                setattr(cfg, key, int(parse_number(raw)))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, parse_number(raw))
            elif key in _OPT_FLOAT_KEYS:
                setattr(cfg, key, None if raw.lower() in ("", "auto", "none") else parse_number(raw))
            elif key in _STR_KEYS:
                setattr(cfg, key, raw)
            elif key == "schedules":
                setattr(cfg, key, [s.strip() for s in raw.split(";") if s.strip()])
            elif key == "accuracy_thresholds":
                setattr(cfg, key, [parse_number(s) for s in raw.replace(",", " ").split()])
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    return cfg


def load_config(path):
    """Read an INI-style config; all sections are merged into one namespace."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    values = {}
    for section in parser.sections():
        values.update(parser[section])
    return config_from_mapping(values)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class Prepared:
    """A problem ready to run, with its reference values and metrics."""

    problem: object
    beta: float
    f_ref: Optional[float]
    x_ref: Optional[np.ndarray]
    metrics: dict
    manifest: dict


def _load_svm_data(cfg, manifest):
    train_path = os.path.join(cfg.data_dir, cfg.train_file)
    test_path = os.path.join(cfg.data_dir, cfg.test_file) if cfg.test_file else None
    if not os.path.isfile(train_path):
        raise DataError(f"dataset file not found: {train_path}")
    try:
        if test_path and os.path.isfile(test_path):
            train = load_libsvm(train_path)
            test = load_libsvm(test_path)
            nf = max(train.num_features, test.num_features)
            train, test = train.with_num_features(nf), test.with_num_features(nf)
            manifest["split"] = "files"
            manifest[f"sha256.{cfg.test_file}"] = sha256_file(test_path)
        else:
            full = load_libsvm(train_path)
            train, test = split(full, cfg.train_count, cfg.split_seed)
            manifest["split"] = f"seed={cfg.split_seed},train_count={cfg.train_count}"
    except (ValueError, OSError) as exc:
        raise DataError(str(exc)) from exc
    manifest[f"sha256.{cfg.train_file}"] = sha256_file(train_path)
    manifest["train_size"] = len(train)
    manifest["test_size"] = len(test)
    return train, test


def _fista_reference(problem, beta, iters):
    x, _ = solve(problem, SolveConfig(classic_nesterov(), max_iters=iters, beta=beta,
                                      trace_every=iters))
    return problem.objective(x)


def _fba_fixed_point(problem, beta, iters=10**6):
    x, _ = solve(problem, SolveConfig(no_momentum(), max_iters=iters, beta=beta,
                                      trace_every=iters))
    return x


def prepare(cfg):
    """Build the problem, resolve ``beta`` and the reference values."""
    cfg.validate()
    manifest = {"package_version": __version__, "problem": cfg.problem}
    metrics = {}
    x_ref = None
    if cfg.problem == "svm":
        train, test = _load_svm_data(cfg, manifest)
        svm, problem = build_svm_problem(train, cfg.gamma, cfg.lam)
        manifest.update(gamma=repr(cfg.gamma), lam=repr(cfg.lam))
        metrics = {"train_acc": svm.accuracy_fn(train), "test_acc": svm.accuracy_fn(test)}
    elif cfg.problem == "lasso":
        problem, _, _ = make_lasso(cfg.m, cfg.n, cfg.reg, cfg.seed, cfg.cond)
        manifest.update(m=cfg.m, n=cfg.n, reg=repr(cfg.reg), seed=cfg.seed, cond=repr(cfg.cond))
    else:
        problem, x_ref = make_quadratic(cfg.n, cfg.seed)
        manifest.update(n=cfg.n, seed=cfg.seed)
    beta = problem.max_step() if cfg.beta is None else float(cfg.beta)
    if not beta <= problem.max_step():
        raise ConfigError(f"beta={beta!r} exceeds 1/L={problem.max_step()!r}")

    if cfg.f_ref == "exact":
        if cfg.problem == "quadratic":
            f_ref = problem.objective(x_ref)
        else:
            x_ref = _fba_fixed_point(problem, beta)
            f_ref = problem.objective(x_ref)
        manifest["f_ref_policy"] = "exact"
    else:
        f_ref = _fista_reference(problem, beta, cfg.f_ref_iters)
        x_ref = None
        manifest["f_ref_policy"] = f"fista:{cfg.f_ref_iters}"
    manifest.update(lipschitz=repr(problem.lipschitz), beta=repr(beta), f_ref=repr(f_ref))
    return Prepared(problem, beta, f_ref, x_ref, metrics, manifest)


@dataclass
class RunResult:
    sid: str
    spec: str
    schedule: object
    x: np.ndarray
    trace: object


def _run_all(cfg, prep, trace_every):
    results = []
    for i, spec in enumerate(cfg.schedules, start=1):
        sched = parse_schedule(spec)
        sid = schedule_id(i, spec)
        report = check_momentum_condition(sched, max(10, cfg.max_iters))
        if sched.variant in (Variant.GENERALIZED_NESTEROV, Variant.CHAMBOLLE_DOSSAL) \
                and not report.holds["ii"]:
            log.warning("schedule %s fails Momentum-Condition item (ii)", spec)
        prep.manifest[f"schedule.{sid}"] = spec
        prep.manifest[f"condition.{sid}"] = ",".join(
            f"{k}={'ok' if v else 'fail'}" for k, v in report.holds.items()
        )
        x, trace = solve(
            prep.problem,
            SolveConfig(sched, max_iters=cfg.max_iters, beta=prep.beta, trace_every=trace_every),
            f_ref=prep.f_ref, x_ref=prep.x_ref, metrics=prep.metrics,
        )
        results.append(RunResult(sid, spec, sched, x, trace))
    finals = [r.trace["fv"][-1] for r in results]
    slack = 1e-6 * (1.0 + abs(prep.f_ref))
    if prep.f_ref > min(finals) + slack:
        raise ReferenceNotConverged(
            f"F_ref={prep.f_ref!r} exceeds the best final value {min(finals)!r}; "
            "increase f_ref_iters"
        )
    return results


def iterations_to_accuracy(acc, thresholds, k=None):
    """First iteration reaching each accuracy threshold, ``"-"`` if never.

    ``acc`` is either a trace (its ``test_acc`` column is used) or a
    sequence of accuracies for ``k = 1, 2, ...``; ``k`` gives explicit
    iteration numbers.
    """
    if hasattr(acc, "columns"):
        k = acc["k"]
        acc = acc["test_acc"]
    acc = np.asarray(acc, dtype=np.float64)
    k = np.arange(1, len(acc) + 1) if k is None else np.asarray(k)
    out = []
    for thr in thresholds:
        hit = np.flatnonzero(acc >= thr)
        out.append(int(k[hit[0]]) if hit.size else "-")
    return out


def _write_manifest(path, manifest):
    with open(path, "w") as fh:
        for key in sorted(manifest):
            fh.write(f"{key}={manifest[key]}\n")


def _fmt(v):
    if isinstance(v, str):
        return v
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _write_summary(path, results, thresholds):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["schedule_id", "final_fv", "final_nofv", "final_dci", "iters_run"]
                   + [f"k_at_{t!r}" for t in thresholds])
        for r in results:
            tr = r.trace
            ks = (iterations_to_accuracy(tr, thresholds) if "test_acc" in tr.columns
                  else [""] * len(thresholds))
            w.writerow([r.sid, _fmt(tr["fv"][-1]), _fmt(tr["nofv"][-1]), _fmt(tr["dci"][-1]),
                        tr.iters_run] + [str(v) for v in ks])


def run_compare(cfg, table_mode=False):
    """Run every schedule and write traces, a summary and a manifest.

    Returns a dict with the written paths and the in-memory results.
    """
    prep = prepare(cfg)
    trace_every = 1 if table_mode else cfg.trace_every
    results = _run_all(cfg, prep, trace_every)
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {"traces": {}}
    for r in results:
        p = os.path.join(cfg.out_dir, f"trace_{r.sid}.csv")
        r.trace.to_csv(p)
        paths["traces"][r.sid] = p
    paths["summary"] = os.path.join(cfg.out_dir, "summary.csv")
    _write_summary(paths["summary"], results, cfg.accuracy_thresholds)
    m = dict(prep.manifest)
    m.update(max_iters=cfg.max_iters, trace_every=trace_every,
             thresholds=" ".join(repr(t) for t in cfg.accuracy_thresholds))
    paths["manifest"] = os.path.join(cfg.out_dir, "manifest.txt")
    _write_manifest(paths["manifest"], m)
    paths["results"] = results
    paths["prepared"] = prep
    return paths


def run_table(cfg):
    """Compare run with per-iteration accuracy plus an iterations-to-accuracy table."""
    if not cfg.accuracy_thresholds:
        raise ConfigError("table mode needs accuracy_thresholds")
    if cfg.problem != "svm":
        raise ConfigError("table mode needs an svm problem")
    out = run_compare(cfg, table_mode=True)
    path = os.path.join(cfg.out_dir, "table.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["schedule_id"] + [repr(t) for t in cfg.accuracy_thresholds])
        for r in out["results"]:
            w.writerow([r.sid] + [str(v) for v in iterations_to_accuracy(r.trace, cfg.accuracy_thresholds)])
    out["table"] = path
    return out


def decile_medians(values):
    """Medians of the first and last tenth of ``values`` (at least one entry each)."""
    v = np.asarray(values, dtype=np.float64)
    d = max(1, len(v) // 10)
    return float(np.median(v[:d])), float(np.median(v[-d:]))


def epsilon_start(schedule, horizon):
    """Index ``K`` past which the epsilon sequence must be nonincreasing.

    Uses the Momentum-Condition witness when item (ii) holds, and
    otherwise the last index where ``t_k (t_k - 1) <= t_{k-1}^2`` fails
    (up to rounding), which is 0 for the classic Nesterov recursion.
    """
    report = check_momentum_condition(schedule, max(10, horizon))
    if report.holds["ii"]:
        return max(1, report.K_observed), report
    t = schedule.t_array(max(10, horizon))
    d = gap_sequence(t)
    bad = np.flatnonzero(d < -1e-12 * np.maximum(1.0, t[:-1] ** 2))
    K = int(bad[-1]) + 1 if bad.size else 0
    return max(1, K), report


@dataclass
class RateReport:
    """Finite-horizon evidence for the o-rates and the epsilon facts."""

    schedule_name: str
    condition: object
    scaled_fv_medians: Optional[tuple] = None
    scaled_dci_medians: Optional[tuple] = None
    epsilon_K: Optional[int] = None
    epsilon_max_increase: Optional[float] = None
    epsilon_tolerance: Optional[float] = None
    bound_max_violation: Optional[float] = None

    @property
    def fv_decay(self):
        if self.scaled_fv_medians is None:
            return None
        first, last = self.scaled_fv_medians
        return last <= 0.5 * first

    @property
    def dci_decay(self):
        if self.scaled_dci_medians is None:
            return None
        first, last = self.scaled_dci_medians
        return last <= 0.5 * first

    @property
    def epsilon_monotone(self):
        if self.epsilon_max_increase is None:
            return None
        return self.epsilon_max_increase <= self.epsilon_tolerance

    @property
    def bound_holds(self):
        if self.bound_max_violation is None:
            return None
        return self.bound_max_violation <= 0.0

    def lines(self):
        out = [f"schedule={self.schedule_name}"]
        if self.scaled_fv_medians is not None:
            out += [
                f"scaled_fv_first_decile_median={self.scaled_fv_medians[0]!r}",
                f"scaled_fv_last_decile_median={self.scaled_fv_medians[1]!r}",
                f"scaled_fv_decay={'pass' if self.fv_decay else 'fail'}",
            ]
        if self.scaled_dci_medians is not None:
            out += [
                f"scaled_dci_first_decile_median={self.scaled_dci_medians[0]!r}",
                f"scaled_dci_last_decile_median={self.scaled_dci_medians[1]!r}",
                f"scaled_dci_decay={'pass' if self.dci_decay else 'fail'}",
            ]
        if self.epsilon_max_increase is not None:
            out += [
                f"epsilon_K={self.epsilon_K}",
                f"epsilon_max_increase={self.epsilon_max_increase!r}",
                f"epsilon_tolerance={self.epsilon_tolerance!r}",
                f"epsilon_monotone={'pass' if self.epsilon_monotone else 'fail'}",
                f"eta_bound_max_violation={self.bound_max_violation!r}",
                f"eta_bound={'pass' if self.bound_holds else 'fail'}",
            ]
        out += ["condition." + line for line in self.condition.lines()]
        return out

    def text(self):
        return "\n".join(self.lines()) + "\n"


def rate_report(trace, schedule):
    """Diagnostics of one trace against the convergence-rate theory.

    For schedules with momentum: first/last-decile medians of
    ``t_{k-1}^2 eta_k`` and ``t_{k-1} ||x^k - x^{k-1}||``. When the trace
    carries ``epsilon``: the largest increase ``eps_{k+1} - eps_k`` past
    ``K`` (tolerance ``1e-9 (1 + eps_1)``) and the largest violation of
    ``eta_k <= eps_K / (2 beta t_{k-1}^2) + 1e-9`` for ``k > K``.
    """
    k = trace["k"]
    horizon = int(k[-1])
    K, report = epsilon_start(schedule, horizon)
    rr = RateReport(schedule.name, report)
    if not schedule.has_momentum:
        return rr
    eta = trace["eta"]
    if not np.all(np.isnan(eta)):
        rr.scaled_fv_medians = decile_medians(trace["scaled_fv"])
    rr.scaled_dci_medians = decile_medians(trace["scaled_dci"])
    eps = trace["epsilon"]
    if not np.all(np.isnan(eps)):
        if not np.array_equal(k, np.arange(1, len(k) + 1)):
            raise ValueError("epsilon diagnostics need a per-iteration trace")
        rr.epsilon_K = K
        tail = eps[K:]
        inc = np.diff(tail)
        rr.epsilon_max_increase = float(inc.max()) if inc.size else 0.0
        rr.epsilon_tolerance = float(1e-9 * (1.0 + eps[0]))
        t = schedule.t_array(horizon)
        kk = k[K:]
        bound = eps[K - 1] / (2.0 * trace.beta * t[kk - 1] ** 2) + 1e-9
        rr.bound_max_violation = float(np.max(eta[K:] - bound)) if kk.size else -math.inf
    return rr


def run_rates(cfg):
    """Per-iteration runs plus one ``rates_<id>.txt`` report per schedule."""
    out = run_compare(cfg, table_mode=True)
    out["reports"] = {}
    for r in out["results"]:
        rep = rate_report(r.trace, r.schedule)
        p = os.path.join(cfg.out_dir, f"rates_{r.sid}.txt")
        with open(p, "w") as fh:
            fh.write(rep.text())
        out["reports"][r.sid] = (p, rep)
    return out
