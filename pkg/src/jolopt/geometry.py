"""Convex feasible sets (box bounds plus linear inequalities) and Euclidean
projection onto them.

Box-only regions project by componentwise clamping.  General regions use
Dykstra's alternating projections over {box} ∪ {each halfspace}; every
sub-projection is analytic, so no QP solver sits in the hot path.  The
sweep loop runs in a compiled kernel when available (see ``_kernels``).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ._kernels import dykstra_project
from .errors import DimMismatch, InfeasibleRegion, NoConvergence

DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 10_000


class FeasibleRegion:
    """Immutable region {x : lower <= x <= upper, a_j . x <= c_j for all j}.

    Halfspace normals are given dense; zero entries are dropped internally so
    sparse constraints (balance or ramp rows) project cheaply.  Construction
    verifies the region is nonempty by projecting the box midpoint — a
    heuristic check: certification is out of scope, but a projection that
    fails to converge flags an (almost surely) empty intersection.
    """

    def __init__(self, lower, upper, halfspaces: Sequence[tuple] = (), *,
                 _verify: bool = True):
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise DimMismatch(
                f"bounds must be equal-length vectors, got {lower.shape} and {upper.shape}")
        if np.any(lower > upper):
            bad = int(np.argmax(lower > upper))
            raise InfeasibleRegion(
                f"lower > upper at coordinate {bad} ({lower[bad]} > {upper[bad]})")
        self.dim = lower.shape[0]
        self.lower = lower
        self.upper = upper

        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        offsets: list[float] = []
        sqnorms: list[float] = []
        for normal, c in halfspaces:
            a = np.asarray(normal, dtype=np.float64)
            if a.shape != (self.dim,):
                raise DimMismatch(
                    f"halfspace normal has shape {a.shape}, expected ({self.dim},)")
            nz = np.nonzero(a)[0]
            sq = float(np.dot(a[nz], a[nz]))
            if sq <= 0.0:
                raise InfeasibleRegion("halfspace normal has zero norm")
            indices.extend(int(i) for i in nz)
            data.extend(float(v) for v in a[nz])
            indptr.append(len(indices))
            offsets.append(float(c))
            sqnorms.append(sq)

        self._indptr = np.asarray(indptr, dtype=np.int64)
        self._indices = np.asarray(indices, dtype=np.int64)
        self._data = np.asarray(data, dtype=np.float64)
        self._offsets = np.asarray(offsets, dtype=np.float64)
        self._sqnorms = np.asarray(sqnorms, dtype=np.float64)
        for arr in (self.lower, self.upper, self._indptr, self._indices,
                    self._data, self._offsets, self._sqnorms):
            arr.flags.writeable = False

        if _verify and self.n_halfspaces:
            try:
                project(self, box_midpoint(self))
            except NoConvergence as exc:
                raise InfeasibleRegion(
                    "midpoint projection did not converge; region looks empty") from exc

    @property
    def n_halfspaces(self) -> int:
        return self._offsets.shape[0]

    @property
    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        """Dense (normal, offset) pairs, reconstructed from the sparse store."""
        out = []
        for j in range(self.n_halfspaces):
            a = np.zeros(self.dim)
            sl = slice(self._indptr[j], self._indptr[j + 1])
            a[self._indices[sl]] = self._data[sl]
            out.append((a, float(self._offsets[j])))
        return out

    def with_offsets(self, offsets) -> "FeasibleRegion":
        """Same geometry with replaced halfspace offsets (no nonempty re-check)."""
        offsets = np.asarray(offsets, dtype=np.float64)
        if offsets.shape != self._offsets.shape:
            raise DimMismatch(
                f"expected {self._offsets.shape[0]} offsets, got {offsets.shape}")
        clone = object.__new__(FeasibleRegion)
        clone.dim = self.dim
        clone.lower = self.lower
        clone.upper = self.upper
        clone._indptr = self._indptr
        clone._indices = self._indices
        clone._data = self._data
        clone._offsets = offsets.copy()
        clone._offsets.flags.writeable = False
        clone._sqnorms = self._sqnorms
        return clone

    @classmethod
    def box(cls, lower, upper) -> "FeasibleRegion":
        return cls(lower, upper)

    @classmethod
    def unbounded(cls, dim: int) -> "FeasibleRegion":
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    @classmethod
    def nonnegative(cls, dim: int) -> "FeasibleRegion":
        return cls(np.zeros(dim), np.full(dim, np.inf))


def box_midpoint(region: FeasibleRegion) -> np.ndarray:
    """Midpoint of the finite bounds; coordinates without any finite bound sit
    at zero, one-sided bounds at the bound itself."""
    lo, hi = region.lower, region.upper
    mid = np.zeros(region.dim)
    both = np.isfinite(lo) & np.isfinite(hi)
    mid[both] = 0.5 * (lo[both] + hi[both])
    only_lo = np.isfinite(lo) & ~np.isfinite(hi)
    mid[only_lo] = lo[only_lo]
    only_hi = ~np.isfinite(lo) & np.isfinite(hi)
    mid[only_hi] = hi[only_hi]
    return mid


def _check_dim(region: FeasibleRegion, point: np.ndarray) -> np.ndarray:
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (region.dim,):
        raise DimMismatch(f"point has shape {point.shape}, region dim {region.dim}")
    return point


def project_box(region: FeasibleRegion, point) -> np.ndarray:
    """Exact projection for regions without halfspaces (componentwise clamp)."""
    point = _check_dim(region, point)
    if region.n_halfspaces:
        raise ValueError("project_box requires a region without halfspaces")
    return np.clip(point, region.lower, region.upper)


def project(region: FeasibleRegion, point, tol: float = DEFAULT_TOL,
            max_sweeps: int = DEFAULT_MAX_SWEEPS) -> np.ndarray:
    """Euclidean projection of ``point`` onto ``region`` within ``tol``."""
    point = _check_dim(region, point)
    if region.n_halfspaces == 0:
        return np.clip(point, region.lower, region.upper)
    z, converged, sweeps = dykstra_project(
        point, region.lower, region.upper, region._indptr, region._indices,
        region._data, region._offsets, region._sqnorms, tol, max_sweeps)
    if not converged:
        raise NoConvergence(
            f"projection residual above {tol} after {sweeps} sweeps")
    return z


def contains(region: FeasibleRegion, point, tol: float = 0.0) -> bool:
    """Bounds within ``tol`` (absolute) and halfspaces within ``tol``
    (Euclidean distance)."""
    point = _check_dim(region, point)
    if np.any(point < region.lower - tol) or np.any(point > region.upper + tol):
        return False
    for j in range(region.n_halfspaces):
        sl = slice(region._indptr[j], region._indptr[j + 1])
        dot = float(np.dot(region._data[sl], point[region._indices[sl]]))
        if (dot - region._offsets[j]) / np.sqrt(region._sqnorms[j]) > tol:
            return False
    return True
