"""Joint learning-optimization loop.

One global iteration performs Q projected extragradient pairs on the
decision variable x (gradient evaluated at a predicted midpoint, which keeps
pseudoconvex and fractional objectives stable) followed by R projected
stochastic-gradient steps on the model parameter theta.  Both blocks reuse
the iteration's step sizes; the blocks' final iterates seed the next global
iteration.  Q=1, R=1 reduces to the single-step scheme; Q=0 or R=0 freezes
the corresponding variable.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import geometry
from .errors import JoloptError, NonfiniteGradient
from .geometry import FeasibleRegion
from .schedules import StepSchedule, clamp_beta0

log = logging.getLogger("jolopt.solver")

STOP_ITERS = "ITERS"
STOP_TIME = "TIME"


@dataclass(frozen=True)
class ProblemConstants:
    """Known smoothness/curvature constants; any may be None."""

    mu_h: float | None = None
    L_h: float | None = None
    L_f: float | None = None
    L_theta: float | None = None
    grad_bound: float | None = None


@dataclass
class JointProblem:
    """Outer objective f(x, theta) paired with an inner learning loss h(theta).

    ``inner_grad(theta, rng)`` returns a stochastic gradient; builders expose
    a noise-free mode in which it equals the exact gradient of ``inner_value``.
    ``refresh_region_x``, when set, is called once per global iteration with
    the current theta and returns the region used for that iteration's outer
    steps (needed when predictions enter the constraint offsets).
    """

    outer_dim: int
    inner_dim: int
    region_x: FeasibleRegion
    region_theta: FeasibleRegion
    outer_grad: Callable[[np.ndarray, np.ndarray], np.ndarray]
    outer_value: Callable[[np.ndarray, np.ndarray], float]
    inner_grad: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    inner_value: Callable[[np.ndarray], float]
    constants: ProblemConstants | None = None
    refresh_region_x: Callable[[np.ndarray], FeasibleRegion] | None = None


@dataclass(frozen=True)
class SolverConfig:
    schedule: StepSchedule
    outer_steps: int = 1
    inner_steps: int = 1
    max_global_iters: int | None = None
    max_wall_time: float | None = None
    seed: int = 0
    record_every: int = 1
    projection_tol: float = geometry.DEFAULT_TOL

    def __post_init__(self):
        if self.outer_steps < 0 or self.inner_steps < 0:
            raise ValueError("outer_steps and inner_steps must be >= 0")
        if self.outer_steps + self.inner_steps < 1:
            raise ValueError("at least one of outer_steps, inner_steps must be positive")
        if self.max_global_iters is None and self.max_wall_time is None:
            raise ValueError("set max_global_iters, max_wall_time, or both")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")


@dataclass
class TrajectoryRecord:
    k: int
    wall_clock_s: float
    x: np.ndarray
    theta: np.ndarray
    f: float
    h: float


@dataclass
class Trajectory:
    records: list[TrajectoryRecord]
    reason: str
    final_x: np.ndarray
    final_theta: np.ndarray
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "records": [
                {"k": r.k, "wall_clock_s": r.wall_clock_s, "f": r.f, "h": r.h,
                 "x": r.x.tolist(), "theta": r.theta.tolist()}
                for r in self.records
            ],
            "terminal": {
                "reason": self.reason,
                "final_x": self.final_x.tolist(),
                "final_theta": self.final_theta.tolist(),
                "error": self.error,
            },
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")

    def write_csv(self, path) -> None:
        n = self.final_x.shape[0]
        m = self.final_theta.shape[0]
        header = (["k", "wall_clock_s", "f", "h"]
                  + [f"x_{i}" for i in range(n)]
                  + [f"theta_{i}" for i in range(m)])
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for r in self.records:
                writer.writerow([r.k, repr(r.wall_clock_s), repr(r.f), repr(r.h)]
                                + [repr(float(v)) for v in r.x]
                                + [repr(float(v)) for v in r.theta])


@dataclass
class RunFailure:
    """Per-config failure collected by run_grid instead of aborting siblings."""

    index: int
    error: str
    partial: Trajectory | None = None


def _check_finite(g: np.ndarray, which: str) -> np.ndarray:
    if not np.all(np.isfinite(g)):
        raise NonfiniteGradient(f"{which} gradient oracle returned a non-finite value")
    return g


def extragradient_pair(problem: JointProblem, x: np.ndarray, theta: np.ndarray,
                       gamma: float, region: FeasibleRegion | None = None,
                       tol: float = geometry.DEFAULT_TOL) -> np.ndarray:
    """One projected extragradient update of x at step size ``gamma``.

    The half step moves along the gradient at x; the committed step reuses
    the gradient evaluated at the projected half step.
    """
    region = problem.region_x if region is None else region
    g = _check_finite(problem.outer_grad(x, theta), "outer")
    x_half = geometry.project(region, x - gamma * g, tol=tol)
    g_half = _check_finite(problem.outer_grad(x_half, theta), "outer")
    return geometry.project(region, x - gamma * g_half, tol=tol)


def inner_step(problem: JointProblem, theta: np.ndarray, beta: float,
               rng: np.random.Generator, tol: float = geometry.DEFAULT_TOL) -> np.ndarray:
    """One projected stochastic-gradient update of theta at step size ``beta``."""
    g = _check_finite(problem.inner_grad(theta, rng), "inner")
    return geometry.project(problem.region_theta, theta - beta * g, tol=tol)


def initial_iterates(problem: JointProblem) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic start: projected box midpoint for x, projected zero for theta."""
    x0 = geometry.project(problem.region_x, geometry.box_midpoint(problem.region_x))
    theta0 = geometry.project(problem.region_theta, np.zeros(problem.inner_dim))
    return x0, theta0


def effective_schedule(problem: JointProblem, schedule: StepSchedule) -> StepSchedule:
    """Clamp beta0 by 2*mu_h/L_h**2 when the problem reports those constants."""
    consts = problem.constants
    if consts is not None and consts.mu_h is not None and consts.L_h is not None:
        beta0 = clamp_beta0(schedule.beta0, consts.mu_h, consts.L_h)
        if beta0 != schedule.beta0:
            log.info("beta0 clamped from %g to %g", schedule.beta0, beta0)
        return schedule.with_beta0(beta0)
    log.warning("inner-problem constants unknown; beta0 left unclamped")
    return schedule


def run_joint(problem: JointProblem, config: SolverConfig) -> Trajectory:
    """Run the multi-step loop until an iteration or wall-time budget fires.

    Deterministic given (problem, config, seed); the trajectory records the
    state after global iterations 0, record_every, 2*record_every, ... plus
    the terminal state (k counts completed global iterations).  On an oracle
    or projection error the partial trajectory is attached to the raised
    error as ``partial_trajectory``.
    """
    schedule = effective_schedule(problem, config.schedule)
    rng = np.random.default_rng(config.seed)
    x, theta = initial_iterates(problem)
    region = problem.region_x

    records: list[TrajectoryRecord] = []
    start = time.monotonic()

    def snapshot(k: int, elapsed: float) -> None:
        records.append(TrajectoryRecord(
            k=k, wall_clock_s=elapsed, x=x.copy(), theta=theta.copy(),
            f=float(problem.outer_value(x, theta)),
            h=float(problem.inner_value(theta))))

    snapshot(0, 0.0)
    k = 0
    reason = STOP_ITERS
    try:
        while True:
            if config.max_global_iters is not None and k >= config.max_global_iters:
                reason = STOP_ITERS
                break
            elapsed = time.monotonic() - start
            if config.max_wall_time is not None and elapsed >= config.max_wall_time:
                reason = STOP_TIME
                break

            if problem.refresh_region_x is not None:
                region = problem.refresh_region_x(theta)
            gamma = schedule.gamma_at(k)
            beta = schedule.beta_at(k)
            for _ in range(config.outer_steps):
                x = extragradient_pair(problem, x, theta, gamma, region,
                                       tol=config.projection_tol)
            for _ in range(config.inner_steps):
                theta = inner_step(problem, theta, beta, rng,
                                   tol=config.projection_tol)
            k += 1
            if k % config.record_every == 0:
                snapshot(k, time.monotonic() - start)
    except JoloptError as exc:
        if not records or records[-1].k != k:
            snapshot(k, time.monotonic() - start)
        exc.partial_trajectory = Trajectory(
            records=records, reason="ERROR", final_x=x, final_theta=theta,
            error=str(exc))
        raise

    if records[-1].k != k:
        snapshot(k, time.monotonic() - start)
    return Trajectory(records=records, reason=reason, final_x=x, final_theta=theta)


def run_grid(problem_factory: Callable[[SolverConfig], JointProblem],
             configs: Sequence[SolverConfig], parallel: bool = False,
             jobs: int | None = None) -> list[Trajectory | RunFailure]:
    """Run one trajectory per config; failures are collected, not fatal.

    Each run gets a fresh problem from the factory and an effective seed of
    ``config.seed + index`` so identical configs decorrelate.  Results are
    ordered like ``configs`` and identical whether parallel or not.
    """

    def one(index: int, config: SolverConfig) -> Trajectory | RunFailure:
        run_config = _reseeded(config, config.seed + index)
        try:
            return run_joint(problem_factory(run_config), run_config)
        except JoloptError as exc:
            log.error("grid cell %d failed: %s", index, exc)
            return RunFailure(index=index, error=str(exc),
                              partial=getattr(exc, "partial_trajectory", None))

    if not configs:
        return []
    if parallel and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=jobs or len(configs)) as pool:
            return list(pool.map(one, range(len(configs)), configs))
    return [one(i, c) for i, c in enumerate(configs)]


def _reseeded(config: SolverConfig, seed: int) -> SolverConfig:
    return SolverConfig(
        schedule=config.schedule, outer_steps=config.outer_steps,
        inner_steps=config.inner_steps, max_global_iters=config.max_global_iters,
        max_wall_time=config.max_wall_time, seed=seed,
        record_every=config.record_every, projection_tol=config.projection_tol)


def build_fractional_problem(theta_dim: int = 2, noise_std: float = 0.0,
                             theta_target: np.ndarray | None = None) -> JointProblem:
    """Canonical smoke problem: minimize (x+1)^2/x over [0.5, 5].

    The objective is fractional (pseudoconvex, not convex) with minimizer
    x*=1, f*=4; the inner problem is the strongly convex quadratic
    ||theta - theta_target||^2, irrelevant to f, optionally with additive
    Gaussian gradient noise.
    """
    if theta_target is None:
        theta_target = np.linspace(0.3, 0.7, theta_dim)
    theta_target = np.asarray(theta_target, dtype=np.float64)

    region_x = FeasibleRegion.box(np.array([0.5]), np.array([5.0]))
    region_theta = FeasibleRegion.unbounded(theta_dim)

    def outer_value(x, theta):
        return (x[0] + 1.0) ** 2 / x[0]

    def outer_grad(x, theta):
        return np.array([1.0 - 1.0 / (x[0] * x[0])])

    def inner_value(theta):
        d = theta - theta_target
        return float(np.dot(d, d))

    def inner_grad(theta, rng):
        g = 2.0 * (theta - theta_target)
        if noise_std > 0.0:
            g = g + rng.normal(0.0, noise_std, size=theta.shape)
        return g

    return JointProblem(
        outer_dim=1, inner_dim=theta_dim, region_x=region_x,
        region_theta=region_theta, outer_grad=outer_grad,
        outer_value=outer_value, inner_grad=inner_grad, inner_value=inner_value,
        constants=ProblemConstants(mu_h=2.0, L_h=2.0))
