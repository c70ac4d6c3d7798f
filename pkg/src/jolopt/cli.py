"""Experiment harness.

Subcommands: run (one solve), grid (Out/In x gamma0 cartesian sweep),
sweep-opf (weighted-sum scalarization sweep), gen (synthetic datasets),
hv (standalone hypervolume of an archive file).

Configuration is a JSON file plus --set key=value overrides; unknown keys
are rejected.  Exit codes: 0 success, 1 configuration error, 2 runtime
error (partial outputs are preserved).  JOLOPT_LOG picks the log level.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from . import moo, opf, retail
from .errors import JoloptError, ScheduleInvalid
from .schedules import validate_schedule
from .solver import (RunFailure, SolverConfig, Trajectory,
                     build_fractional_problem, run_grid, run_joint)

log = logging.getLogger("jolopt.cli")


class ConfigError(Exception):
    pass


# keys shared by the solver-driving commands
_COMMON_KEYS = {
    "problem", "dataset", "generator", "out_dir", "seed", "record_every",
    "gamma0", "beta0", "a", "b", "tau",
    "max_global_iters", "max_wall_time",
    "noise", "batch_size", "noise_std", "ridge",
    "market_size", "sensitivity_sign", "theta_dim",
}
_KEYS = {
    "run": _COMMON_KEYS | {"out_steps", "in_steps", "w1", "w2"},
    "grid": _COMMON_KEYS | {"out_in", "gamma0_list", "w1", "w2"},
    "sweep-opf": _COMMON_KEYS | {"out_steps", "in_steps", "weights", "exclusions"},
}

_DEFAULT_BUDGETS = {"opf": (100, 600.0), "retail": (500, 30.0),
                    "synthetic-test": (500, 30.0)}
_SCHEDULE_DEFAULTS = {"gamma0": 1.0, "beta0": 1.0, "a": 1.0, "b": 0.6, "tau": 0.75}


def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def load_config(args, command: str) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for item in args.set or []:
        key, value = _parse_override(item)
        cfg[key] = value
    if args.out:
        cfg["out_dir"] = args.out
    if args.seed is not None:
        cfg["seed"] = args.seed
    unknown = set(cfg) - _KEYS[command]
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    if cfg.get("problem") not in ("retail", "opf", "synthetic-test"):
        raise ConfigError("problem must be one of retail, opf, synthetic-test")
    return cfg


def _schedule_from(cfg: dict, gamma0: float | None = None):
    fields = {k: float(cfg.get(k, d)) for k, d in _SCHEDULE_DEFAULTS.items()}
    if gamma0 is not None:
        fields["gamma0"] = float(gamma0)
    try:
        return validate_schedule(**fields)
    except ScheduleInvalid as exc:
        raise ConfigError(str(exc)) from exc


def _budgets(cfg: dict) -> tuple[int | None, float | None]:
    iters = cfg.get("max_global_iters")
    wall = cfg.get("max_wall_time")
    if iters is None and wall is None:
        iters, wall = _DEFAULT_BUDGETS[cfg["problem"]]
    return (None if iters is None else int(iters),
            None if wall is None else float(wall))


def _solver_config(cfg: dict, schedule, out_steps: int, in_steps: int) -> SolverConfig:
    iters, wall = _budgets(cfg)
    try:
        return SolverConfig(
            schedule=schedule, outer_steps=out_steps, inner_steps=in_steps,
            max_global_iters=iters, max_wall_time=wall,
            seed=int(cfg.get("seed", 0)),
            record_every=int(cfg.get("record_every", 1)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_instance(cfg: dict):
    """Instance for retail/opf from a dataset path or a generator spec."""
    kind = cfg["problem"]
    gen = {k: tuple(v) if isinstance(v, list) else v
           for k, v in (cfg.get("generator") or {}).items()}
    if cfg.get("dataset"):
        try:
            if kind == "retail":
                return data_mod.load_retail_csv(
                    cfg["dataset"], market_size=cfg.get("market_size"),
                    sensitivity_sign=float(cfg.get("sensitivity_sign", -1.0)))
            return data_mod.load_opf_csv(cfg["dataset"])
        except FileNotFoundError as exc:
            raise ConfigError(f"dataset not found: {cfg['dataset']}") from exc
    if kind == "retail":
        gen.setdefault("seed", int(cfg.get("seed", 0)))
        gen.setdefault("sensitivity_sign", float(cfg.get("sensitivity_sign", -1.0)))
        instance, _ = data_mod.generate_logit_dataset(data_mod.LogitGenSpec(**gen))
        return instance
    gen.setdefault("seed", int(cfg.get("seed", 0)))
    instance, _ = data_mod.generate_opf_synthetic(**gen)
    return instance


def _problem_factory(cfg: dict):
    """Returns ((w1, w2) -> JointProblem, instance) for the configured kind.

    Retail and synthetic-test ignore the weights (single objective); their
    instance slot is None for synthetic-test."""
    kind = cfg["problem"]
    noise = cfg.get("noise", "minibatch")
    batch = int(cfg.get("batch_size", 32))
    noise_std = float(cfg.get("noise_std", 0.0))
    if kind == "synthetic-test":
        return (lambda w1, w2: build_fractional_problem(
            theta_dim=int(cfg.get("theta_dim", 2)),
            noise_std=noise_std if noise == "gaussian" else 0.0)), None
    instance = _load_instance(cfg)
    if kind == "retail":
        ridge = float(cfg.get("ridge", retail.DEFAULT_RIDGE))
        return (lambda w1, w2: retail.build_retail_problem(
            instance, ridge=ridge, noise=noise, batch_size=batch,
            noise_std=noise_std)), instance
    ridge = float(cfg.get("ridge", opf.DEFAULT_RIDGE))
    return (lambda w1, w2: opf.build_opf_problem(
        instance, w1, w2, ridge=ridge, noise=noise, batch_size=batch,
        noise_std=noise_std)), instance


def _single_factory(cfg: dict):
    factory, _ = _problem_factory(cfg)
    w1 = float(cfg.get("w1", 1.0))
    w2 = float(cfg.get("w2", 0.0))
    if cfg["problem"] == "opf" and (w1 < 0 or w2 < 0 or abs(w1 + w2 - 1) > 1e-9):
        raise ConfigError(f"w1/w2 must be nonnegative and sum to 1, got ({w1}, {w2})")
    return lambda: factory(w1, w2)


def _write_trajectory(outdir: Path, trajectory: Trajectory) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    trajectory.write_csv(outdir / "trajectory.csv")
    trajectory.write_json(outdir / "trajectory.json")


def cmd_run(args) -> int:
    cfg = load_config(args, "run")
    schedule = _schedule_from(cfg)
    config = _solver_config(cfg, schedule, int(cfg.get("out_steps", 1)),
                            int(cfg.get("in_steps", 1)))
    factory = _single_factory(cfg)
    outdir = Path(cfg.get("out_dir", "."))
    try:
        problem = factory()
        trajectory = run_joint(problem, config)
    except JoloptError as exc:
        partial = getattr(exc, "partial_trajectory", None)
        if partial is not None:
            _write_trajectory(outdir, partial)
        log.error("run failed: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_trajectory(outdir, trajectory)
    last = trajectory.records[-1]
    print(f"final_f={last.f:.6g} final_h={last.h:.6g} iters={last.k} "
          f"seconds={last.wall_clock_s:.3f} reason={trajectory.reason}")
    return 0


def cmd_grid(args) -> int:
    cfg = load_config(args, "grid")
    out_in = cfg.get("out_in") or []
    gamma0_list = cfg.get("gamma0_list") or [cfg.get("gamma0", _SCHEDULE_DEFAULTS["gamma0"])]
    if not out_in or not gamma0_list:
        raise ConfigError("grid needs non-empty out_in and gamma0_list axes")
    cells = []
    for gamma0 in gamma0_list:
        schedule = _schedule_from(cfg, gamma0=gamma0)
        for pair in out_in:
            if len(pair) != 2:
                raise ConfigError(f"out_in entries must be [Out, In], got {pair}")
            q, r = int(pair[0]), int(pair[1])
            cells.append((f"out{q}_in{r}_g{float(gamma0):g}",
                          _solver_config(cfg, schedule, q, r)))

    factory = _single_factory(cfg)
    results = run_grid(lambda config: factory(), [c for _, c in cells],
                       parallel=args.jobs > 1, jobs=args.jobs)

    outdir = Path(cfg.get("out_dir", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    any_ok = False
    rows = []
    for (name, config), result in zip(cells, results):
        if isinstance(result, RunFailure):
            rows.append([name, config.outer_steps, config.inner_steps,
                         repr(config.schedule.gamma0), "failed", "", "", "", result.error])
            if result.partial is not None:
                _write_trajectory(outdir / name, result.partial)
            continue
        any_ok = True
        _write_trajectory(outdir / name, result)
        last = result.records[-1]
        rows.append([name, config.outer_steps, config.inner_steps,
                     repr(config.schedule.gamma0), "ok", result.reason,
                     last.k, repr(last.f), ""])
    with open(outdir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell", "out", "in", "gamma0", "status", "reason",
                         "iters", "final_f", "error"])
        writer.writerows(rows)
    print(f"{sum(1 for r in rows if r[4] == 'ok')}/{len(rows)} cells ok "
          f"-> {outdir / 'summary.csv'}")
    return 0 if any_ok else 2


def cmd_sweep_opf(args) -> int:
    cfg = load_config(args, "sweep-opf")
    if cfg["problem"] != "opf":
        raise ConfigError("sweep-opf requires problem: opf")
    schedule = _schedule_from(cfg)
    config = _solver_config(cfg, schedule, int(cfg.get("out_steps", 1)),
                            int(cfg.get("in_steps", 1)))
    weights = [tuple(float(v) for v in pair) for pair in
               (cfg.get("weights") or moo.default_weights())]
    for pair in weights:
        if len(pair) != 2:
            raise ConfigError(f"weights entries must be [w1, w2], got {pair}")
    exclusions = [str(t) for t in (cfg.get("exclusions") or [])]

    factory, instance = _problem_factory(cfg)

    def objectives(x, theta):
        dispatch = x.reshape(instance.caps.shape)
        return (opf.cost_objective(instance, dispatch),
                -opf.penetration_objective(instance, theta, dispatch))

    result = moo.weight_sweep(factory, config, weights, objectives,
                              exclusions=exclusions, jobs=args.jobs)

    outdir = Path(cfg.get("out_dir", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    ok = 0
    for pair, traj in zip(weights, result.trajectories):
        tag = moo.weight_tag(*pair)
        if isinstance(traj, RunFailure):
            log.error("weight %s failed: %s", tag, traj.error)
            continue
        ok += 1
        _write_trajectory(outdir / tag, traj)

    normalized = moo.normalize(result.archive, exclusions) if ok else None
    with open(outdir / "archive.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tag", "f1", "f2", "f1_norm", "f2_norm", "nondominated"])
        if normalized is not None:
            front = {id(p) for p in normalized.front()}
            retained_raw = [p for p in result.archive.points
                            if p.tag not in set(exclusions)]
            for point, raw_point in zip(normalized.points, retained_raw):
                writer.writerow([point.tag, repr(raw_point.values[0]),
                                 repr(raw_point.values[1]), repr(point.values[0]),
                                 repr(point.values[1]),
                                 int(id(point) in front)])
    _write_curve(outdir / "hv_vs_iter.csv", "k", result.hv_vs_iter)
    _write_curve(outdir / "hv_vs_time.csv", "time_s", result.hv_vs_time)
    print(f"{ok}/{len(weights)} weights ok -> {outdir / 'archive.csv'}")
    return 0 if ok else 2


def _write_curve(path: Path, xname: str, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([xname, "hv"])
        for x, hv in rows:
            writer.writerow([x if xname == "k" else repr(float(x)), repr(float(hv))])


def cmd_gen(args) -> int:
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    overrides = dict(_parse_override(item) for item in (args.set or []))
    if args.kind == "logit":
        if args.seed is not None:
            overrides["seed"] = args.seed
        try:
            spec = data_mod.LogitGenSpec(**{k: (tuple(v) if isinstance(v, list) else v)
                                            for k, v in overrides.items()})
        except (TypeError, JoloptError) as exc:
            raise ConfigError(str(exc)) from exc
        instance, params = data_mod.generate_logit_dataset(spec)
        data_mod.write_retail_csv(instance, outdir / "retail.csv")
        truth = {
            "kind": "logit",
            "spec": {"n_products": spec.n_products, "n_periods": spec.n_periods,
                     "price_range": list(spec.price_range),
                     "noise_std": spec.noise_std, "seed": spec.seed,
                     "sensitivity_sign": spec.sensitivity_sign},
            "market_size": instance.market_size.tolist(),
            "bounds": instance.bounds.tolist(),
            "params": params.tolist(),
        }
        with open(outdir / "retail_truth.json", "w", encoding="utf-8") as fh:
            json.dump(truth, fh, indent=1)
        print(f"wrote {outdir / 'retail.csv'} "
              f"({instance.n_products * instance.n_periods} rows)")
        return 0
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        instance, theta = data_mod.generate_opf_synthetic(**overrides)
    except (TypeError, JoloptError) as exc:
        raise ConfigError(str(exc)) from exc
    data_mod.write_opf_csv(instance, outdir / "opf.csv")
    with open(outdir / "opf_truth.json", "w", encoding="utf-8") as fh:
        json.dump({"kind": "opf", "theta": theta.tolist()}, fh, indent=1)
    print(f"wrote {outdir / 'opf.csv'} ({instance.n_steps} rows)")
    return 0


def cmd_hv(args) -> int:
    try:
        with open(args.archive, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"f1_norm", "f2_norm"} <= set(reader.fieldnames):
                raise ConfigError(
                    f"{args.archive} lacks f1_norm/f2_norm columns")
            points = [moo.ObjectivePoint((float(row["f1_norm"]), float(row["f2_norm"])),
                                         tag=row.get("tag", ""))
                      for row in reader]
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    if not points:
        raise ConfigError(f"{args.archive} has no data rows")
    if args.ref:
        ref = np.asarray([float(v) for v in args.ref.split(",")])
    else:
        ref = moo.reference_point(points)
    print(f"hv={moo.hypervolume_2d(points, ref):.10g} "
          f"ref=({ref[0]:.6g},{ref[1]:.6g}) points={len(points)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jolopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (overrides out_dir)")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="parallel runs (default: CPU count)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="config override, repeatable")

    p_run = sub.add_parser("run", help="single solve")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_grid = sub.add_parser("grid", help="Out/In x gamma0 grid")
    common(p_grid)
    p_grid.set_defaults(func=cmd_grid)

    p_sweep = sub.add_parser("sweep-opf", help="weighted-sum scalarization sweep")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep_opf)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset")
    p_gen.add_argument("kind", choices=["logit", "opf"])
    p_gen.add_argument("--out", help="output directory")
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_gen.set_defaults(func=cmd_gen)

    p_hv = sub.add_parser("hv", help="hypervolume of an archive.csv")
    p_hv.add_argument("archive")
    p_hv.add_argument("--ref", help="reference point as 'a,b' (default: pool max + margin)")
    p_hv.set_defaults(func=cmd_hv)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("JOLOPT_LOG", "warn").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except JoloptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
