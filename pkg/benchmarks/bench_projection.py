"""Benchmark the compiled Dykstra kernel against the pure-numpy fallback.

Usage: python benchmarks/bench_projection.py [--repeats N]

Cases range from a small box+halfspace region to a dispatch-scale
polyhedron (288 variables, 666 sparse halfspaces).  Both backends run the
same sweep sequence, so results are checked to agree before timing.
"""

import argparse
import time

import numpy as np

from jolopt._kernels import dykstra_py
from jolopt.data import generate_opf_synthetic
from jolopt.geometry import FeasibleRegion
from jolopt.opf import build_opf_problem

try:
    from jolopt._kernels import dykstra_cy
except ImportError:
    dykstra_cy = None


def region_args(region, point, tol=1e-8, max_sweeps=10_000):
    return (point, region.lower, region.upper, region._indptr, region._indices,
            region._data, region._offsets, region._sqnorms, tol, max_sweeps)


def make_cases():
    rng = np.random.default_rng(0)
    cases = []

    dim = 5
    z0 = rng.normal(size=dim)
    halfspaces = [(rng.normal(size=dim), float(rng.normal(size=dim) @ z0) + 0.5)
                  for _ in range(8)]
    halfspaces = [(a, float(a @ z0) + 0.3) for a, _ in halfspaces]
    small = FeasibleRegion(z0 - 1, z0 + 1, halfspaces)
    cases.append(("box+8 halfspaces, dim 5", small,
                  [rng.normal(scale=2, size=dim) for _ in range(50)]))

    instance, _ = generate_opf_synthetic(t_steps=96, n_generators=3,
                                         n_features=4, seed=7)
    problem = build_opf_problem(instance, 0.5, 0.5, noise="none")
    region = problem.refresh_region_x(np.zeros(5))
    mid = 0.5 * instance.caps.reshape(-1)
    points = [mid + rng.normal(scale=3.0, size=mid.size) for _ in range(20)]
    cases.append(("dispatch polyhedron, dim 288, 666 halfspaces", region, points))
    return cases


def run(kernel, region, points):
    start = time.perf_counter()
    outs = [kernel(*region_args(region, p)) for p in points]
    elapsed = time.perf_counter() - start
    assert all(ok for _, ok, _ in outs)
    return elapsed / len(points), outs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if dykstra_cy is None:
        print("compiled kernel unavailable; timing the fallback only")

    for label, region, points in make_cases():
        py_time, py_out = min(
            (run(dykstra_py.dykstra_project, region, points)
             for _ in range(args.repeats)), key=lambda r: r[0])
        line = f"{label:48s} python {py_time * 1e3:8.3f} ms/projection"
        if dykstra_cy is not None:
            cy_time, cy_out = min(
                (run(dykstra_cy.dykstra_project, region, points)
                 for _ in range(args.repeats)), key=lambda r: r[0])
            worst = max(float(np.max(np.abs(a[0] - b[0])))
                        for a, b in zip(py_out, cy_out))
            line += (f" | cython {cy_time * 1e3:8.3f} ms "
                     f"| speedup {py_time / cy_time:6.1f}x "
                     f"| max |diff| {worst:.1e}")
        print(line)


if __name__ == "__main__":
    main()
