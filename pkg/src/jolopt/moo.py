"""Scalarization sweeps, Pareto dominance, normalization, and 2-D hypervolume.

Everything here works in minimization orientation: maximization objectives
(penetration, revenue) are negated when an ObjectivePoint is built.  The
normalization divides each objective by the largest absolute value over the
retained pool, which preserves dominance; the reference point is derived
from the normalized pool (componentwise max plus a fixed margin) so every
retained point contributes dominated area.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AllExcluded, DimMismatch, JoloptError, RefInvalid, ZeroObjective
from .solver import (JointProblem, RunFailure, SolverConfig, Trajectory,
                     _reseeded, run_joint)

REF_MARGIN = 0.1


@dataclass(frozen=True)
class ObjectivePoint:
    """Objective vector in minimization orientation with an origin tag."""

    values: tuple[float, ...]
    tag: str = ""

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise JoloptError(f"objective values must be finite, got {self.values}")


def dominates(p: ObjectivePoint, q: ObjectivePoint) -> bool:
    """True iff p is no worse everywhere and strictly better somewhere."""
    if len(p.values) != len(q.values):
        raise DimMismatch(
            f"points of dimension {len(p.values)} and {len(q.values)}")
    no_worse = all(a <= b for a, b in zip(p.values, q.values))
    strictly = any(a < b for a, b in zip(p.values, q.values))
    return no_worse and strictly


def pareto_filter(points: Sequence[ObjectivePoint]) -> list[ObjectivePoint]:
    """Points dominated by none, in input order; duplicates all survive."""
    kept = []
    for i, p in enumerate(points):
        if not any(dominates(q, p) for j, q in enumerate(points) if j != i):
            kept.append(p)
    return kept


@dataclass
class ParetoArchive:
    """Pooled scalarization outcomes plus the normalization state."""

    points: list[ObjectivePoint] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)
    norm_factors: tuple[float, ...] | None = None

    def add(self, point: ObjectivePoint) -> None:
        self.points.append(point)

    def front(self) -> list[ObjectivePoint]:
        return pareto_filter(self.points)


def normalize(archive: ParetoArchive, exclusions: Sequence[str] = ()) -> ParetoArchive:
    """Divide each objective by max|value| over the pool sans excluded tags."""
    retained = [p for p in archive.points if p.tag not in set(exclusions)]
    if not retained:
        raise AllExcluded("every point was excluded before normalization")
    values = np.array([p.values for p in retained])
    factors = np.abs(values).max(axis=0)
    if np.any(factors == 0.0):
        dead = int(np.argmax(factors == 0.0))
        raise ZeroObjective(f"objective {dead} is identically zero in the pool")
    scaled = values / factors
    points = [ObjectivePoint(tuple(float(v) for v in row), tag=p.tag)
              for row, p in zip(scaled, retained)]
    return ParetoArchive(points=points, excluded=list(exclusions),
                         norm_factors=tuple(float(f) for f in factors))


def reference_point(points: Sequence[ObjectivePoint], margin: float = REF_MARGIN) -> np.ndarray:
    """Componentwise max over the pool plus a margin."""
    values = np.array([p.values for p in points])
    return values.max(axis=0) + margin


def hypervolume_2d(points: Sequence[ObjectivePoint], ref) -> float:
    """Area dominated between the nondominated points and ``ref``.

    Points that do not strictly dominate the reference contribute nothing.
    Sort-and-sweep: after filtering, sort by the first objective; each point
    covers the slab up to its successor with height down from the reference.
    """
    ref = np.asarray(ref, dtype=np.float64)
    if ref.shape != (2,) or not np.all(np.isfinite(ref)):
        raise RefInvalid(f"reference must be a finite pair, got {ref}")
    if any(len(p.values) != 2 for p in points):
        raise DimMismatch("hypervolume_2d requires two objectives")
    front = [p.values for p in pareto_filter(points)
             if p.values[0] < ref[0] and p.values[1] < ref[1]]
    if not front:
        return 0.0
    pts = sorted(set(front))  # nondominated: f1 ascending implies f2 descending
    area = 0.0
    for i, (f1, f2) in enumerate(pts):
        next_f1 = pts[i + 1][0] if i + 1 < len(pts) else float(ref[0])
        area += (next_f1 - f1) * (float(ref[1]) - f2)
    return area


@dataclass
class SweepResult:
    archive: ParetoArchive
    trajectories: list[Trajectory | RunFailure]
    weights: list[tuple[float, float]]
    hv_vs_iter: list[tuple[int, float]]
    hv_vs_time: list[tuple[float, float]]


def default_weights(count: int = 11) -> list[tuple[float, float]]:
    """Uniformly spaced (w1, 1 - w1) pairs from (0, 1) to (1, 0)."""
    return [(round(k / (count - 1), 10), round(1.0 - k / (count - 1), 10))
            for k in range(count)]


def weight_tag(w1: float, w2: float) -> str:
    return f"w{w1:g}-{w2:g}"


def weight_sweep(problem_factory: Callable[[float, float], JointProblem],
                 config: SolverConfig, weights: Sequence[tuple[float, float]],
                 objectives: Callable[[np.ndarray, np.ndarray], tuple[float, float]],
                 exclusions: Sequence[str] = (), jobs: int = 1,
                 time_grid_points: int = 200) -> SweepResult:
    """Run one solve per weight pair and pool the outcomes.

    ``objectives(x, theta)`` maps a snapshot to the two objective values in
    minimization orientation (e.g. cost and negated penetration); the final
    snapshot of each weight lands in the archive.  Hypervolume curves track
    the normalized archive of all snapshots seen so far, on the shared
    iteration grid and on a uniform time grid (last value carried forward).
    Per-weight failures are collected without aborting the sweep.
    """

    def one(index: int, pair: tuple[float, float]) -> Trajectory | RunFailure:
        run_config = _reseeded(config, config.seed + index)
        try:
            return run_joint(problem_factory(*pair), run_config)
        except JoloptError as exc:
            return RunFailure(index=index, error=str(exc),
                              partial=getattr(exc, "partial_trajectory", None))

    if jobs > 1 and len(weights) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(len(weights)), weights))
    else:
        results = [one(i, w) for i, w in enumerate(weights)]

    archive = ParetoArchive()
    series = []  # per successful weight: (tag, [(k, wall, f1, f2), ...])
    for pair, result in zip(weights, results):
        if isinstance(result, RunFailure):
            continue
        tag = weight_tag(*pair)
        pts = [(r.k, r.wall_clock_s) + tuple(objectives(r.x, r.theta))
               for r in result.records]
        series.append((tag, pts))
        archive.add(ObjectivePoint((pts[-1][2], pts[-1][3]), tag=tag))

    hv_iter: list[tuple[int, float]] = []
    hv_time: list[tuple[float, float]] = []
    if series:
        normalized = normalize(archive, exclusions)
        assert normalized.norm_factors is not None
        factors = normalized.norm_factors
        ref = reference_point(normalized.points)
        live = [pts for tag, pts in series if tag not in set(exclusions)]

        def curve(axis: int, grid) -> list[tuple[float, float]]:
            front = _RunningFront()
            cursor = [0] * len(live)
            out = []
            for stop in grid:
                for s, pts in enumerate(live):
                    i = cursor[s]
                    while i < len(pts) and pts[i][axis] <= stop:
                        front.add(pts[i][2] / factors[0], pts[i][3] / factors[1])
                        i += 1
                    cursor[s] = i
                out.append((stop, front.hypervolume(ref)))
            return out

        ks = sorted({k for pts in live for k, *_ in pts})
        hv_iter = [(int(k), hv) for k, hv in curve(0, ks)]
        horizon = config.max_wall_time or max(pts[-1][1] for pts in live)
        grid = np.linspace(0.0, horizon, time_grid_points + 1)
        hv_time = [(float(t), hv) for t, hv in curve(1, grid)]

    return SweepResult(archive=archive, trajectories=results,
                       weights=list(weights), hv_vs_iter=hv_iter,
                       hv_vs_time=hv_time)


class _RunningFront:
    """Incremental nondominated set of 2-D minimization points."""

    def __init__(self):
        self.points: list[tuple[float, float]] = []

    def add(self, f1: float, f2: float) -> None:
        for a, b in self.points:
            if a <= f1 and b <= f2:
                return  # dominated or duplicate
        self.points = [(a, b) for a, b in self.points if not (f1 <= a and f2 <= b)]
        self.points.append((f1, f2))

    def hypervolume(self, ref) -> float:
        return hypervolume_2d([ObjectivePoint(p) for p in self.points], ref)
