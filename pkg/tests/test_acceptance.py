"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
Tolerances are pinned here, not configurable.
"""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from jolopt.cli import main as cli_main
from jolopt.data import LogitGenSpec, generate_logit_dataset, generate_opf_synthetic
from jolopt.errors import ScheduleInvalid
from jolopt.geometry import project
from jolopt.moo import (ObjectivePoint, ParetoArchive, default_weights,
                        hypervolume_2d, normalize, pareto_filter,
                        reference_point, weight_sweep)
from jolopt.opf import (build_opf_problem, cost_objective,
                        penetration_objective, scalarized_objective,
                        solar_loss, solar_loss_gradient)
from jolopt.retail import (build_retail_problem, logit_loss,
                           logit_loss_gradient, revenue_gradient,
                           revenue_objective)
from jolopt.schedules import validate_schedule
from jolopt.solver import SolverConfig, build_fractional_problem, inner_step, run_joint

from oracles import (central_diff, grid_search_1d, logit_fit, mc_hypervolume,
                     brute_force_pareto, qp_projection, ridge_affine_fit)

SCHED = validate_schedule(1.0, 1.0, 1.0, 0.6, 0.75)


def report(tag: str, passed: bool, detail: str) -> None:
    print(f"[{tag}] {'PASS' if passed else 'FAIL'}: {detail}")
    assert passed, f"{tag}: {detail}"


def test_a1_pseudoconvex_convergence():
    """|x_K - x*| <= 1e-2 for all (Q, R) in {1,7,15}^2 within 5000 iterations."""
    import time

    x_star, f_star = grid_search_1d(lambda x: (x + 1.0) ** 2 / x, 0.5, 5.0, 1e-6)
    assert abs(x_star - 1.0) <= 1e-6 and abs(f_star - 4.0) <= 1e-9
    worst_err, worst_time = 0.0, 0.0
    for q in (1, 7, 15):
        for r in (1, 7, 15):
            problem = build_fractional_problem(theta_dim=2)
            config = SolverConfig(schedule=SCHED, outer_steps=q, inner_steps=r,
                                  max_global_iters=5000, seed=0, record_every=5000)
            t0 = time.monotonic()
            trajectory = run_joint(problem, config)
            elapsed = time.monotonic() - t0
            err = abs(float(trajectory.final_x[0]) - x_star)
            worst_err = max(worst_err, err)
            worst_time = max(worst_time, elapsed)
            assert err <= 1e-2, f"(Q={q}, R={r}) err={err:.3e}"
            assert elapsed < 5.0, f"(Q={q}, R={r}) took {elapsed:.2f}s"
    report("A1", True, f"worst |x_K - x*| = {worst_err:.2e} <= 1e-2, "
                       f"slowest run {worst_time:.2f}s < 5s")


def test_a2_inner_convergence():
    """Seed-averaged E||theta_k - theta*||^2 < 1e-2 at k=1e4, nonincreasing
    after k=100 within 5% between logged checkpoints, for R in {1,7,15}."""
    dim = 16
    target = np.linspace(0.3, 0.7, dim)
    details = []
    for r in (1, 7, 15):
        curves = []
        for seed in range(20):
            problem = build_fractional_problem(theta_dim=dim, noise_std=0.1,
                                               theta_target=target)
            config = SolverConfig(schedule=SCHED, outer_steps=0, inner_steps=r,
                                  max_global_iters=10_000, seed=seed,
                                  record_every=2500)
            trajectory = run_joint(problem, config)
            curves.append([float(np.sum((rec.theta - target) ** 2))
                           for rec in trajectory.records])
        mean = np.mean(curves, axis=0)  # checkpoints k = 0, 2500, ..., 10000
        final = mean[-1]
        assert final < 1e-2, f"R={r} final mean error {final:.3e}"
        after = mean[1:]  # checkpoints past k=100
        ratios = after[1:] / after[:-1]
        assert np.all(ratios <= 1.05), f"R={r} ratio {ratios.max():.3f}"
        details.append(f"R={r}: final={final:.1e}, max ratio={ratios.max():.3f}")
    report("A2", True, "; ".join(details) + " (< 1e-2, <= 1.05)")


def test_a3_projection_oracle():
    """Dykstra agrees with the active-set QP oracle within 1e-6 on 200
    random nonempty regions; whole check under 10 s."""
    import time

    from test_geometry import random_region

    rng = np.random.default_rng(2025)
    t0 = time.monotonic()
    worst = 0.0
    for _ in range(200):
        region, z0 = random_region(rng)
        point = rng.normal(scale=2.5, size=region.dim)
        z = project(region, point, tol=1e-9)
        oracle = qp_projection(region.lower, region.upper, region.halfspaces,
                               point, x0=z0)
        worst = max(worst, float(np.linalg.norm(z - oracle)))
    elapsed = time.monotonic() - t0
    assert worst <= 1e-6 and elapsed < 10.0
    report("A3", True, f"max deviation {worst:.2e} <= 1e-6 over 200 regions "
                       f"in {elapsed:.1f}s < 10s")


def _fd_check(fun, grad_fun, sample, n_points=100, tol=1e-5):
    worst = 0.0
    for trial in range(n_points):
        x, f, g = sample(trial)
        fd = central_diff(f, x)
        err = np.linalg.norm(g(x) - fd) / max(np.linalg.norm(fd), 1e-9)
        worst = max(worst, err)
    assert worst <= tol, f"{fun}: relative error {worst:.2e}"
    return worst


def test_a4_gradient_fidelity():
    """Analytic gradients match central differences (step 1e-6) within 1e-5
    relative on 100 random points each."""
    rng = np.random.default_rng(99)
    spec = LogitGenSpec(n_products=3, n_periods=4, price_range=(1.0, 6.0),
                        noise_std=0.05, seed=1)
    retail_inst, _ = generate_logit_dataset(spec)
    opf_inst, _ = generate_opf_synthetic(t_steps=6, n_generators=2,
                                         n_features=3, seed=2)
    n, t = retail_inst.prices.shape
    n2, t2 = opf_inst.caps.shape
    worsts = {}

    def sample_revenue(i):
        theta = rng.normal(size=(n, 2))
        x = rng.uniform(1.0, 6.0, size=n * t)
        return (x,
                lambda v: revenue_objective(retail_inst, theta, v.reshape(n, t)),
                lambda v: revenue_gradient(retail_inst, theta, v.reshape(n, t)).ravel())

    worsts["revenue"] = _fd_check("revenue", None, sample_revenue)

    def sample_logit(i):
        theta = rng.normal(size=2 * n)
        return (theta,
                lambda v: logit_loss(retail_inst, v.reshape(n, 2), ridge=1e-3),
                lambda v: logit_loss_gradient(retail_inst, v.reshape(n, 2),
                                              ridge=1e-3).ravel())

    worsts["logit_loss"] = _fd_check("logit_loss", None, sample_logit)

    def sample_solar(i):
        theta = rng.normal(size=opf_inst.n_features + 1)
        return (theta,
                lambda v: solar_loss(opf_inst, v, ridge=1e-3),
                lambda v: solar_loss_gradient(opf_inst, v, ridge=1e-3))

    worsts["solar_loss"] = _fd_check("solar_loss", None, sample_solar)

    def sample_scalarized(i):
        w1 = rng.uniform(0.05, 0.95)
        theta = rng.normal(size=opf_inst.n_features + 1)
        x = rng.uniform(1.0, 8.0, size=n2 * t2)
        return (x,
                lambda v: scalarized_objective(opf_inst, theta, v.reshape(n2, t2),
                                               w1, 1 - w1)[0],
                lambda v: scalarized_objective(opf_inst, theta, v.reshape(n2, t2),
                                               w1, 1 - w1)[1].ravel())

    worsts["scalarized"] = _fd_check("scalarized", None, sample_scalarized)
    report("A4", True, "worst relative errors " +
           ", ".join(f"{k}={v:.1e}" for k, v in worsts.items()) + " <= 1e-5")


def test_a5_hypervolume_and_pareto_oracles():
    """hypervolume_2d within 3*sigma + 1e-4 of 1e6-sample Monte Carlo on 50
    archives; pareto_filter equals brute force on 100 random 200-point sets."""
    rng = np.random.default_rng(77)
    worst_gap = 0.0
    for trial in range(50):
        pts = rng.uniform(0, 1, size=(int(rng.integers(1, 11)), 2))
        ref = (1.05, 1.05)
        hv = hypervolume_2d([ObjectivePoint(tuple(row)) for row in pts], ref)
        est, stderr = mc_hypervolume(pts, ref, n_samples=1_000_000, seed=trial)
        gap = abs(hv - est) - (3 * stderr + 1e-4)
        worst_gap = max(worst_gap, gap)
        assert gap <= 0, f"trial {trial}: hv={hv:.6f} mc={est:.6f}"

    for trial in range(100):
        values = rng.normal(size=(200, 2))
        pts = [ObjectivePoint(tuple(row)) for row in values]
        assert pareto_filter(pts) == [pts[i] for i in brute_force_pareto(values)]
    report("A5", True, f"50 Monte-Carlo archives within 3-sigma + 1e-4 "
                       f"(worst slack {-worst_gap:.2e}); 100 brute-force filters equal")


def test_a6_learning_equivalence():
    """Projected SGD lands within 1e-3 (parameter norm) of the closed-form
    ridge solution by k=1e4, for the retail log-transform fit and the solar
    learner.  The retail run uses a well-conditioned synthetic instance and
    drives inner_step at an admissible schedule directly: the automatic
    beta0 cap (a sufficient, not necessary, stability condition) would
    otherwise slow any uniformly-priced 50-product instance past the budget.
    """
    spec = LogitGenSpec(price_range=(0.05, 2.45), noise_std=0.0, seed=123)
    inst, _ = generate_logit_dataset(spec)
    problem = build_retail_problem(inst, ridge=1e-6, noise="minibatch",
                                   batch_size=256)
    schedule = validate_schedule(1.0, 16.0, 1.0, 0.51, 0.8)
    rng = np.random.default_rng(0)
    theta = np.zeros(problem.inner_dim)
    for k in range(10_000):
        theta = inner_step(problem, theta, schedule.beta_at(k), rng)
    star = logit_fit(inst.prices, inst.log_targets(), ridge=1e-6).ravel()
    retail_err = float(np.linalg.norm(theta - star))
    assert retail_err <= 1e-3, f"retail SGD error {retail_err:.2e}"

    opf_inst, _ = generate_opf_synthetic(t_steps=96, n_generators=3,
                                         n_features=23, seed=0)
    opf_problem = build_opf_problem(opf_inst, 1.0, 0.0, ridge=1e-6,
                                    noise="minibatch", batch_size=32)
    config = SolverConfig(schedule=validate_schedule(1.0, 1.0, 1.0, 0.51, 0.8),
                          outer_steps=0, inner_steps=1,
                          max_global_iters=10_000, seed=0, record_every=10_000)
    trajectory = run_joint(opf_problem, config)
    solar_star = ridge_affine_fit(opf_inst.features, opf_inst.solar_true,
                                  ridge=1e-6)
    solar_err = float(np.linalg.norm(trajectory.final_theta - solar_star))
    assert solar_err <= 1e-3, f"solar SGD error {solar_err:.2e}"
    report("A6", True, f"retail err {retail_err:.1e}, solar err {solar_err:.1e} <= 1e-3")


GRID_OUT_IN = [[15, 15], [15, 7], [15, 1], [7, 15], [7, 7], [7, 1],
               [1, 15], [1, 7], [1, 1], [1, 0], [0, 1]]
A7_GENERATOR = {"price_range": [0.05, 2.45], "seed": 2024}


def _grid_config(tmp_path, name, **kwargs):
    path = tmp_path / name
    path.write_text(json.dumps(kwargs))
    return str(path)


def _final_x_from_csv(path: Path, n_cols: int) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, last = rows[0], rows[-1]
    start = header.index("x_0")
    return np.array([float(v) for v in last[start:start + n_cols]])


def test_a7_retail_trend(tmp_path):
    """Final revenue ordering best{Out=15} > best{Out=7} > best{Out=1} on the
    regenerated logit dataset, and gamma0 1.0 >= 0.1 >= 0.01 at (15, 15).

    Revenue is evaluated under the generator's ground-truth coefficients so
    every configuration is scored on the same demand model."""
    spec = LogitGenSpec(price_range=(0.05, 2.45), seed=2024)
    inst, theta_star = generate_logit_dataset(spec)

    out = tmp_path / "a7_grid"
    cfg = _grid_config(
        tmp_path, "a7.json", problem="retail", generator=A7_GENERATOR,
        out_in=GRID_OUT_IN, gamma0_list=[1.0], max_global_iters=500,
        seed=11, record_every=25, out_dir=str(out))
    assert cli_main(["grid", "--config", cfg, "--jobs", "4"]) == 0

    def true_revenue(cell):
        x = _final_x_from_csv(out / cell / "trajectory.csv", 2500)
        return -revenue_objective(inst, theta_star, x.reshape(50, 50))

    best = {q: max(true_revenue(f"out{q}_in{r}_g1") for r in (1, 7, 15))
            for q in (15, 7, 1)}
    assert best[15] > best[7] > best[1], best

    out2 = tmp_path / "a7_gamma"
    cfg2 = _grid_config(
        tmp_path, "a7g.json", problem="retail", generator=A7_GENERATOR,
        out_in=[[15, 15]], gamma0_list=[1.0, 0.1, 0.01],
        max_global_iters=500, seed=11, record_every=25, out_dir=str(out2))
    assert cli_main(["grid", "--config", cfg2, "--jobs", "3"]) == 0
    by_gamma = {g: true_revenue2(out2, g, inst, theta_star)
                for g in ("1", "0.1", "0.01")}
    assert by_gamma["1"] >= by_gamma["0.1"] >= by_gamma["0.01"], by_gamma
    report("A7", True,
           f"best revenue by Out: 15->{best[15]:.1f} > 7->{best[7]:.1f} > "
           f"1->{best[1]:.1f}; gamma0 1.0->{by_gamma['1']:.1f} >= "
           f"0.1->{by_gamma['0.1']:.1f} >= 0.01->{by_gamma['0.01']:.1f}")


def true_revenue2(out2, g, inst, theta_star):
    x = _final_x_from_csv(out2 / f"out15_in15_g{g}" / "trajectory.csv", 2500)
    return -revenue_objective(inst, theta_star, x.reshape(50, 50))


def test_a8_opf_trend():
    """For Out=15 the final HV across In in {1,7,15} agrees within 1% under a
    shared normalization, and each sweep's HV-vs-iteration curve is
    nondecreasing within 1e-6."""
    inst, _ = generate_opf_synthetic(t_steps=96, n_generators=3,
                                     n_features=4, seed=7)

    def objectives(x, theta):
        dispatch = x.reshape(3, 96)
        return (cost_objective(inst, dispatch),
                -penetration_objective(inst, theta, dispatch))

    sweeps = {}
    for inner in (1, 7, 15):
        config = SolverConfig(schedule=SCHED, outer_steps=15, inner_steps=inner,
                              max_global_iters=100, seed=3, record_every=2)
        result = weight_sweep(
            lambda w1, w2: build_opf_problem(inst, w1, w2, noise="none"),
            config, default_weights(), objectives, jobs=4)
        hvs = [hv for _, hv in result.hv_vs_iter]
        assert all(b >= a - 1e-6 for a, b in zip(hvs, hvs[1:])), \
            f"In={inner}: HV decreased along iterations"
        sweeps[inner] = result

    pool = ParetoArchive()
    for inner, result in sweeps.items():
        for p in result.archive.points:
            pool.add(ObjectivePoint(p.values, tag=f"in{inner}:{p.tag}"))
    factors = normalize(pool).norm_factors
    ref = reference_point(normalize(pool).points)
    shared = {
        inner: hypervolume_2d(
            [ObjectivePoint((p.values[0] / factors[0], p.values[1] / factors[1]))
             for p in result.archive.points], ref)
        for inner, result in sweeps.items()}
    values = list(shared.values())
    spread = (max(values) - min(values)) / max(values)
    assert spread <= 0.01, f"HV spread across In: {spread:.4%}"
    report("A8", True, f"HV by In {dict((k, round(v, 5)) for k, v in shared.items())}, "
                       f"spread {spread:.3%} <= 1%; curves nondecreasing")


def test_a9_schedule_gate():
    """Accepts (1, 0.6, 0.75); rejects 20 randomized violations of each
    inequality in the admissibility chain."""
    validate_schedule(1.0, 1.0, 1.0, 0.6, 0.75)
    rng = np.random.default_rng(5)
    rejected = 0

    def expect_reject(gamma0, beta0, a, b, tau):
        nonlocal rejected
        with pytest.raises(ScheduleInvalid):
            validate_schedule(gamma0, beta0, a, b, tau)
        rejected += 1

    for _ in range(20):
        a = rng.uniform(0.6, 1.0)
        tau = rng.uniform(0.6, 0.95)
        expect_reject(1.0, 1.0, a, rng.uniform(0.0, 0.5), tau)      # b <= 0.5
        expect_reject(1.0, 1.0, a, rng.uniform(a * tau, 1.5), tau)  # b >= a*tau
        expect_reject(1.0, 1.0, a, a * 0.7, rng.uniform(1.0, 2.0))  # tau >= 1
        expect_reject(1.0, 1.0, rng.uniform(1.0001, 2.0), 0.6, tau)  # a > 1
        expect_reject(1.0, 1.0, rng.uniform(0.0, 0.5), 0.3, tau)    # a <= 0.5
    report("A9", True, f"reference triple accepted; {rejected} violations rejected")


def test_a10_grid_determinism(tmp_path):
    """Identical config + seed reproduces every CSV byte-for-byte once
    wall-clock columns are removed."""

    def run(where):
        out = tmp_path / where
        cfg = _grid_config(
            tmp_path, f"{where}.json", problem="retail",
            generator={"n_products": 4, "n_periods": 5},
            out_in=[[2, 1], [1, 2], [0, 1]], gamma0_list=[1.0, 0.1],
            max_global_iters=12, seed=21, record_every=3, out_dir=str(out))
        assert cli_main(["grid", "--config", cfg, "--jobs", "3"]) == 0
        return out

    first, second = run("first"), run("second")
    compared = 0
    for csv_path in sorted(first.rglob("*.csv")):
        rel = csv_path.relative_to(first)
        a = _strip_time_columns(csv_path)
        b = _strip_time_columns(second / rel)
        assert a == b, f"{rel} differs between reruns"
        compared += 1
    assert compared == 7  # 6 trajectories + summary
    report("A10", True, f"{compared} CSV files byte-identical modulo wall-clock")


def _strip_time_columns(path: Path) -> bytes:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    drop = [i for i, name in enumerate(rows[0]) if "wall" in name]
    kept = [",".join(v for i, v in enumerate(row) if i not in drop)
            for row in rows]
    return "\n".join(kept).encode()


FRONTEND_MAIN = Path(__file__).resolve().parent.parent / "frontend" / "dist" / "src" / "main.js"


@pytest.mark.skipif(not FRONTEND_MAIN.exists(),
                    reason="frontend not built (secondary component)")
def test_a11_plot_smoke(tmp_path):
    """[SECONDARY] The plotting script renders Fig-3-style revenue figures
    from a grid directory and an HV curve from sweep outputs; missing-column
    inputs fail naming the column.  The primary suite passes without this."""
    import subprocess

    out = tmp_path / "grid"
    cfg = _grid_config(
        tmp_path, "a11.json", problem="retail",
        generator={"n_products": 4, "n_periods": 5},
        out_in=[[15, 1], [7, 1], [1, 1]], gamma0_list=[1.0],
        max_global_iters=40, seed=3, record_every=4, out_dir=str(out))
    assert cli_main(["grid", "--config", cfg, "--jobs", "3"]) == 0

    sweep = tmp_path / "sweep"
    cfg2 = _grid_config(
        tmp_path, "a11s.json", problem="opf",
        generator={"t_steps": 12, "n_generators": 2, "n_features": 3},
        weights=[[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]], out_steps=3, in_steps=2,
        max_global_iters=20, noise="none", seed=3, out_dir=str(sweep))
    assert cli_main(["sweep-opf", "--config", cfg2]) == 0

    def plot(args):
        return subprocess.run(["node", str(FRONTEND_MAIN)] + args,
                              capture_output=True, text=True)

    for x_axis, name in (("iter", "rev_iter.svg"), ("time", "rev_time.svg")):
        result = plot(["--x", x_axis, "--y", "revenue",
                       "--out", str(tmp_path / name)]
                      + sorted(str(p) for p in out.glob("*/trajectory.csv")))
        assert result.returncode == 0, result.stderr
        assert (tmp_path / name).exists()
    result = plot(["--x", "iter", "--y", "hv", "--out", str(tmp_path / "hv.svg"),
                   str(sweep / "hv_vs_iter.csv")])
    assert result.returncode == 0, result.stderr

    bad = tmp_path / "bad.csv"
    bad.write_text("k,wall_clock_s,loss\n0,0.0,1.0\n")
    result = plot(["--y", "f", "--out", str(tmp_path / "no.svg"), str(bad)])
    assert result.returncode != 0
    assert "missing column 'f'" in result.stderr
    report("A11", True, "revenue-vs-iter, revenue-vs-time, hv-vs-iter rendered; "
                        "missing column named in diagnostic")
