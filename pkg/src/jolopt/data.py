"""Synthetic dataset generation and CSV ingestion.

Retail CSV schema: product_id, period, price, sales (one row per product and
period, periods 0-based, prices positive, no gaps or duplicates).

Dispatch CSV schema: timestamp, demand, cap_1..cap_N2, f_1..f_F, solar
(ISO-8601 timestamps at a uniform spacing, one row per step).

Both use UTF-8, comma separation, '.' decimals, mandatory header.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from . import retail as retail_mod
from .errors import (BadHeader, DataFormatError, IrregularTimestamps,
                     MissingCell, NegativeCapacity, NonPositivePrice,
                     SpecInvalid)
from .opf import OpfInstance
from .retail import RetailInstance

RETAIL_HEADER = ["product_id", "period", "price", "sales"]


@dataclass(frozen=True)
class LogitGenSpec:
    """Generator knobs for the synthetic price-sales benchmark.

    Defaults give 50 products over 50 weeks (2500 cells).  Slopes are
    sampled positive so demand falls with price under the default demand
    convention; all ranges are inclusive uniform.
    """

    n_products: int = 50
    n_periods: int = 50
    price_range: tuple[float, float] = (1.0, 10.0)
    slope_range: tuple[float, float] = (0.5, 2.0)
    intercept_range: tuple[float, float] = (-1.0, 1.0)
    noise_std: float = 0.0
    sensitivity_sign: float = -1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_products < 1 or self.n_periods < 1:
            raise SpecInvalid("need at least one product and one period")
        if self.noise_std < 0:
            raise SpecInvalid("noise_std must be nonnegative")
        if not 0 < self.price_range[0] < self.price_range[1]:
            raise SpecInvalid("price_range must satisfy 0 < low < high")


def generate_logit_dataset(spec: LogitGenSpec) -> tuple[RetailInstance, np.ndarray]:
    """Sample a RetailInstance from the binary-logit demand model.

    Returns (instance, params) where ``params`` (N x 2) are the generating
    coefficients expressed in the convention the log-transform fit recovers:
    on noiseless data the per-product least-squares solution equals
    ``params`` exactly.
    """
    rng = np.random.default_rng(spec.seed)
    n, t = spec.n_products, spec.n_periods
    slopes = rng.uniform(*spec.slope_range, size=n)
    intercepts = rng.uniform(*spec.intercept_range, size=n)
    prices = rng.uniform(*spec.price_range, size=(n, t))

    s = spec.sensitivity_sign
    utility = s * slopes[:, None] * prices + intercepts[:, None]
    y = retail_mod._sigmoid(utility)
    if spec.noise_std > 0:
        y = y + rng.normal(0.0, spec.noise_std, size=y.shape)
    y = np.clip(y, retail_mod.FRACTION_EPS, 1.0 - retail_mod.FRACTION_EPS)

    bounds = np.tile(np.asarray(spec.price_range, dtype=np.float64), (n, 1))
    instance = RetailInstance(
        prices=prices, sales_frac=y, bounds=bounds, market_size=np.ones(n),
        sensitivity_sign=s)
    # log(1/y - 1) = -(s * slope * p + intercept): the fit sees these signs
    fitted_params = np.column_stack([-s * slopes, -intercepts])
    return instance, fitted_params


def write_retail_csv(instance: RetailInstance, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RETAIL_HEADER)
        sales = instance.sales_frac * instance.market_size[:, None]
        for i, pid in enumerate(instance.product_ids):
            for t in range(instance.n_periods):
                writer.writerow([pid, t, repr(float(instance.prices[i, t])),
                                 repr(float(sales[i, t]))])


def load_retail_csv(path, bounds=None, market_size=None,
                    sensitivity_sign: float = -1.0) -> RetailInstance:
    """Assemble dense N x T matrices from a retail CSV.

    ``bounds`` and ``market_size`` default to the observation-derived rules
    (see RetailInstance.from_raw_sales); pass the generator sidecar values to
    reproduce a written instance exactly.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RETAIL_HEADER:
            raise BadHeader(f"expected {RETAIL_HEADER}, got {header}")
        cells: dict[tuple[str, int], tuple[float, float]] = {}
        order: list[str] = []
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise DataFormatError(f"expected 4 columns, got {len(row)}: {row}")
            pid, period_s, price_s, sales_s = row
            try:
                period = int(period_s)
                price = float(price_s)
                sales = float(sales_s)
            except ValueError as exc:
                raise DataFormatError(f"unparseable row {row}") from exc
            if price <= 0:
                raise NonPositivePrice(f"price {price} for product {pid}, period {period}")
            key = (pid, period)
            if key in cells:
                raise DataFormatError(f"duplicate row for product {pid}, period {period}")
            if pid not in order:
                order.append(pid)
            cells[key] = (price, sales)

    if not cells:
        raise MissingCell("file contains no data rows")
    n_periods = max(p for _, p in cells) + 1
    prices = np.empty((len(order), n_periods))
    sales = np.empty_like(prices)
    for i, pid in enumerate(order):
        for t in range(n_periods):
            if (pid, t) not in cells:
                raise MissingCell(f"product {pid} has no row for period {t}")
            prices[i, t], sales[i, t] = cells[(pid, t)]
    return RetailInstance.from_raw_sales(
        prices, sales, bounds=bounds, market_size=market_size,
        sensitivity_sign=sensitivity_sign, product_ids=order)


def write_opf_csv(instance: OpfInstance, path,
                  start: str = "2025-01-01T00:00:00", step_minutes: int = 15) -> None:
    t0 = datetime.fromisoformat(start)
    step = timedelta(minutes=step_minutes)
    n2, t_steps = instance.caps.shape
    header = (["timestamp", "demand"]
              + [f"cap_{i + 1}" for i in range(n2)]
              + [f"f_{j + 1}" for j in range(instance.n_features)]
              + ["solar"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in range(t_steps):
            writer.writerow([(t0 + t * step).isoformat(),
                             repr(float(instance.demand[t]))]
                            + [repr(float(instance.caps[i, t])) for i in range(n2)]
                            + [repr(float(v)) for v in instance.features[t]]
                            + [repr(float(instance.solar_true[t]))])


def load_opf_csv(path, a1: float | None = None, a2: float | None = None,
                 ramp_delta: float = 0.2) -> OpfInstance:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 4 or header[0] != "timestamp" \
                or header[1] != "demand" or header[-1] != "solar":
            raise BadHeader(f"malformed header {header}")
        caps_cols = [h for h in header[2:-1] if h.startswith("cap_")]
        feat_cols = [h for h in header[2:-1] if h.startswith("f_")]
        expected = (["timestamp", "demand"] + [f"cap_{i + 1}" for i in range(len(caps_cols))]
                    + [f"f_{j + 1}" for j in range(len(feat_cols))] + ["solar"])
        if header != expected or not caps_cols:
            raise BadHeader(f"expected {expected}, got {header}")

        stamps: list[datetime] = []
        rows: list[list[float]] = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"expected {len(header)} columns, got {len(row)}")
            try:
                stamps.append(datetime.fromisoformat(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataFormatError(f"unparseable row {row[:3]}...") from exc

    if not rows:
        raise DataFormatError("file contains no data rows")
    if len(stamps) > 1:
        step = stamps[1] - stamps[0]
        if step <= timedelta(0) or any(
                b - a != step for a, b in zip(stamps[1:], stamps[2:])):
            raise IrregularTimestamps("timestamps are not uniformly increasing")
    values = np.asarray(rows)
    n2 = len(caps_cols)
    caps = values[:, 1:1 + n2].T
    if np.any(caps < 0):
        raise NegativeCapacity("capacity column contains a negative value")
    kwargs = {}
    if a1 is not None:
        kwargs["a1"] = a1
    if a2 is not None:
        kwargs["a2"] = a2
    return OpfInstance(
        caps=caps, demand=values[:, 0],
        features=values[:, 1 + n2:-1], solar_true=values[:, -1],
        ramp_delta=ramp_delta, **kwargs)


def generate_opf_synthetic(t_steps: int = 96, n_generators: int = 3,
                           n_features: int = 23, seed: int = 0,
                           noise_std: float = 0.0,
                           ramp_delta: float = 0.2) -> tuple[OpfInstance, np.ndarray]:
    """Desk-scale dispatch instance with known solar coefficients.

    Features are i.i.d. standard normal; solar is an affine map of them
    (clamped at zero) plus optional noise; demand is a day-shaped sinusoid
    capped at 80% of total conventional capacity so the dispatch region
    stays nonempty even before the learner predicts any renewables.
    Returns (instance, theta) with theta = (weights..., intercept).
    """
    if t_steps < 2 or n_generators < 1 or n_features < 1:
        raise SpecInvalid("need t_steps >= 2, n_generators >= 1, n_features >= 1")
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(t_steps, n_features))
    weights = rng.normal(0.0, 0.5, size=n_features)
    intercept = 8.0
    solar = features @ weights + intercept
    if noise_std > 0:
        solar = solar + rng.normal(0.0, noise_std, size=t_steps)
    solar = np.maximum(solar, 0.0)

    caps_level = rng.uniform(8.0, 12.0, size=n_generators)
    caps = np.tile(caps_level[:, None], (1, t_steps))
    total_cap = float(caps_level.sum())
    phase = 2.0 * np.pi * np.arange(t_steps) / t_steps
    demand = 0.6 * total_cap + 0.2 * total_cap * np.sin(phase)
    demand = demand + rng.normal(0.0, 0.01 * total_cap, size=t_steps)
    demand = np.clip(demand, 0.0, 0.8 * total_cap)

    instance = OpfInstance(caps=caps, demand=demand, features=features,
                           solar_true=solar, ramp_delta=ramp_delta)
    return instance, np.append(weights, intercept)
