"""jolopt: joint learning-optimization for pseudoconvex decision problems.

Couples a projected extragradient loop on the decision variable with an
inexact projected stochastic-gradient learner, plus dispatch and pricing
instantiations, a Pareto/hypervolume evaluation layer, and a CLI harness.
"""

from ._kernels import BACKEND as projection_backend
from .errors import JoloptError
from .geometry import FeasibleRegion, contains, project, project_box
from .schedules import StepSchedule, beta_at, clamp_beta0, gamma_at, validate_schedule
from .solver import (JointProblem, ProblemConstants, RunFailure, SolverConfig,
                     Trajectory, extragradient_pair, inner_step, run_grid,
                     run_joint)

__version__ = "0.1.0"

__all__ = [
    "FeasibleRegion",
    "JointProblem",
    "JoloptError",
    "ProblemConstants",
    "RunFailure",
    "SolverConfig",
    "StepSchedule",
    "Trajectory",
    "beta_at",
    "clamp_beta0",
    "contains",
    "extragradient_pair",
    "gamma_at",
    "inner_step",
    "project",
    "project_box",
    "projection_backend",
    "run_grid",
    "run_joint",
    "validate_schedule",
]
