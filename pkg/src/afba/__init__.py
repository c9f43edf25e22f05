"""Accelerated forward-backward splitting with generalized Nesterov momentum."""

__version__ = "0.1.0"

from .momentum import (
    ConditionReport,
    MomentumSchedule,
    Variant,
    chambolle_dossal,
    check_momentum_condition,
    classic_nesterov,
    generalized_nesterov,
    no_momentum,
    super_linear_divergence,
)
from .prox import prox_l1, prox_l1_bias, soft_threshold
from .solver import NonFiniteError, Problem, SolveConfig, SolverTrace, fb_operator, solve
