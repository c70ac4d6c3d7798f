"""Binary-logit retail pricing: outer prices, inner demand-model fit.

Demand for product i at price p is sigma(s * theta_i0 * p + theta_i1) where
s is the instance's sensitivity sign.  The default s = -1 makes demand fall
as price rises, giving revenue an interior optimum; s = +1 with the
constraint theta_i0 >= 0 reproduces the textbook utility form and is kept
behind the same switch for auditing (its revenue optimum degenerates to the
upper price bound).

The inner problem fits the log-transformed targets log(1/y - 1), turning the
sigmoid fit into per-product linear least squares (plus an optional ridge
term that guarantees strong convexity even under constant prices).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, InstanceInvalid
from .geometry import FeasibleRegion
from .solver import JointProblem, ProblemConstants

FRACTION_EPS = 1e-6
DEMAND_EPS = 1e-12
DEFAULT_RIDGE = 1e-6
DEFAULT_BATCH = 32


def _sigmoid(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return np.clip(out, DEMAND_EPS, 1.0 - DEMAND_EPS)


@dataclass
class RetailInstance:
    """Observed prices and demand fractions for N products over T periods.

    ``sales_frac`` entries live strictly inside (0, 1); ``market_size``
    rescales fractions back to unit sales in the revenue objective.
    """

    prices: np.ndarray
    sales_frac: np.ndarray
    bounds: np.ndarray
    market_size: np.ndarray
    sensitivity_sign: float = -1.0
    product_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=np.float64)
        self.sales_frac = np.asarray(self.sales_frac, dtype=np.float64)
        if self.prices.ndim != 2 or self.prices.shape != self.sales_frac.shape:
            raise InstanceInvalid(
                f"prices {self.prices.shape} and sales {self.sales_frac.shape} "
                "must be equal N x T matrices")
        n = self.prices.shape[0]
        self.bounds = np.asarray(self.bounds, dtype=np.float64)
        if self.bounds.shape != (n, 2):
            raise InstanceInvalid(f"bounds must be (N, 2), got {self.bounds.shape}")
        self.market_size = np.asarray(self.market_size, dtype=np.float64)
        if self.market_size.shape != (n,):
            raise InstanceInvalid(f"market_size must be (N,), got {self.market_size.shape}")
        if np.any(self.prices <= 0):
            raise InstanceInvalid("observed prices must be positive")
        if np.any(self.bounds <= 0) or np.any(self.bounds[:, 0] > self.bounds[:, 1]):
            raise InstanceInvalid("price bounds must be positive with low <= upp")
        if np.any(self.market_size <= 0):
            raise InstanceInvalid("market sizes must be positive")
        if self.sensitivity_sign not in (-1.0, 1.0):
            raise InstanceInvalid("sensitivity_sign must be +1 or -1")
        self.sales_frac = np.clip(self.sales_frac, FRACTION_EPS, 1.0 - FRACTION_EPS)
        if not self.product_ids:
            self.product_ids = [f"p{i}" for i in range(n)]

    @property
    def n_products(self) -> int:
        return self.prices.shape[0]

    @property
    def n_periods(self) -> int:
        return self.prices.shape[1]

    @classmethod
    def from_raw_sales(cls, prices, sales, bounds=None, market_size=None,
                       sensitivity_sign: float = -1.0,
                       product_ids: list[str] | None = None) -> "RetailInstance":
        """Convert unit sales to fractions via per-product market sizes.

        Default market size is 1.05x the largest observed sales figure;
        default bounds are [0.5 * min price, 1.5 * max price] per product.
        """
        prices = np.asarray(prices, dtype=np.float64)
        sales = np.asarray(sales, dtype=np.float64)
        if market_size is None:
            market_size = 1.05 * sales.max(axis=1)
        market_size = np.asarray(market_size, dtype=np.float64)
        frac = sales / market_size[:, None]
        if bounds is None:
            bounds = np.column_stack([0.5 * prices.min(axis=1), 1.5 * prices.max(axis=1)])
        return cls(prices=prices, sales_frac=frac, bounds=bounds,
                   market_size=market_size, sensitivity_sign=sensitivity_sign,
                   product_ids=product_ids or [])

    def log_targets(self) -> np.ndarray:
        """The transformed regression targets log(1/y - 1), shape (N, T)."""
        return np.log(1.0 / self.sales_frac - 1.0)


def demand(instance: RetailInstance, params: np.ndarray, i: int, price: float) -> float:
    """Purchase fraction for product i at the given price."""
    theta = np.asarray(params, dtype=np.float64)
    u = instance.sensitivity_sign * theta[i, 0] * price + theta[i, 1]
    return float(_sigmoid(np.asarray(u)))


def demand_matrix(instance: RetailInstance, params: np.ndarray,
                  prices: np.ndarray) -> np.ndarray:
    theta = np.asarray(params, dtype=np.float64)
    u = instance.sensitivity_sign * theta[:, 0:1] * prices + theta[:, 1:2]
    return _sigmoid(u)


def _check_price_shape(instance: RetailInstance, prices: np.ndarray) -> np.ndarray:
    prices = np.asarray(prices, dtype=np.float64)
    if prices.shape != instance.prices.shape:
        raise DimMismatch(
            f"price matrix {prices.shape} does not match instance "
            f"{instance.prices.shape}")
    return prices


def revenue_objective(instance: RetailInstance, params: np.ndarray,
                      prices: np.ndarray) -> float:
    """Negated market-scaled revenue (minimization form)."""
    prices = _check_price_shape(instance, prices)
    d = demand_matrix(instance, params, prices)
    return float(-np.sum(prices * instance.market_size[:, None] * d))


def revenue_gradient(instance: RetailInstance, params: np.ndarray,
                     prices: np.ndarray) -> np.ndarray:
    """Entrywise d/dp of revenue_objective."""
    prices = _check_price_shape(instance, prices)
    theta = np.asarray(params, dtype=np.float64)
    d = demand_matrix(instance, params, prices)
    slope = instance.sensitivity_sign * theta[:, 0:1] * d * (1.0 - d)
    return -instance.market_size[:, None] * (d + prices * slope)


def logit_loss(instance: RetailInstance, params: np.ndarray,
               ridge: float = 0.0) -> float:
    """Mean squared residual of theta_i0 * p + theta_i1 against log(1/y - 1)."""
    theta = np.asarray(params, dtype=np.float64)
    resid = theta[:, 0:1] * instance.prices + theta[:, 1:2] - instance.log_targets()
    loss = float(np.sum(resid * resid)) / resid.size
    if ridge > 0.0:
        loss += ridge * float(np.sum(theta * theta))
    return loss


def logit_loss_gradient(instance: RetailInstance, params: np.ndarray,
                        ridge: float = 0.0) -> np.ndarray:
    """Gradient of logit_loss over the (N, 2) parameter array."""
    theta = np.asarray(params, dtype=np.float64)
    resid = theta[:, 0:1] * instance.prices + theta[:, 1:2] - instance.log_targets()
    scale = 2.0 / resid.size
    grad = np.empty_like(theta)
    grad[:, 0] = scale * np.sum(resid * instance.prices, axis=1)
    grad[:, 1] = scale * np.sum(resid, axis=1)
    if ridge > 0.0:
        grad += 2.0 * ridge * theta
    return grad


def loss_curvature(instance: RetailInstance, ridge: float) -> tuple[float, float]:
    """(mu_h, L_h) of the inner loss from the per-product 2x2 Hessian blocks."""
    n, t = instance.prices.shape
    scale = 2.0 / (n * t)
    blocks = np.empty((n, 2, 2))
    blocks[:, 0, 0] = scale * np.sum(instance.prices ** 2, axis=1)
    blocks[:, 0, 1] = blocks[:, 1, 0] = scale * np.sum(instance.prices, axis=1)
    blocks[:, 1, 1] = scale * t
    eigs = np.linalg.eigvalsh(blocks)
    return float(eigs.min() + 2.0 * ridge), float(eigs.max() + 2.0 * ridge)


def build_retail_problem(instance: RetailInstance, ridge: float = DEFAULT_RIDGE,
                         noise: str = "minibatch", batch_size: int = DEFAULT_BATCH,
                         noise_std: float = 0.0) -> JointProblem:
    """Assemble the joint problem: prices outer, logit-fit parameters inner.

    noise: "minibatch" samples (i, t) pairs with replacement, "gaussian" adds
    N(0, noise_std) to the exact gradient, "none" is the exact gradient.
    """
    if noise not in ("minibatch", "gaussian", "none"):
        raise InstanceInvalid(f"unknown noise mode {noise!r}")
    n, t = instance.prices.shape
    lower = np.repeat(instance.bounds[:, 0], t)
    upper = np.repeat(instance.bounds[:, 1], t)
    region_x = FeasibleRegion.box(lower, upper)

    if instance.sensitivity_sign > 0:
        # textbook utility mode keeps the nonnegativity constraint on slopes
        theta_lower = np.tile([0.0, -np.inf], n)
        region_theta = FeasibleRegion(theta_lower, np.full(2 * n, np.inf))
    else:
        region_theta = FeasibleRegion.unbounded(2 * n)

    targets = instance.log_targets()
    prices_hist = instance.prices
    n_cells = n * t

    def outer_value(x, theta):
        return revenue_objective(instance, theta.reshape(n, 2), x.reshape(n, t))

    def outer_grad(x, theta):
        return revenue_gradient(instance, theta.reshape(n, 2), x.reshape(n, t)).ravel()

    def inner_value(theta):
        return logit_loss(instance, theta.reshape(n, 2), ridge)

    def full_grad(theta2):
        return logit_loss_gradient(instance, theta2, ridge)

    def inner_grad(theta, rng):
        theta2 = theta.reshape(n, 2)
        if noise == "none":
            return full_grad(theta2).ravel()
        if noise == "gaussian":
            g = full_grad(theta2)
            return (g + rng.normal(0.0, noise_std, size=g.shape)).ravel()
        flat = rng.integers(0, n_cells, size=batch_size)
        rows, cols = np.divmod(flat, t)
        p = prices_hist[rows, cols]
        resid = theta2[rows, 0] * p + theta2[rows, 1] - targets[rows, cols]
        grad = np.zeros((n, 2))
        np.add.at(grad[:, 0], rows, resid * p)
        np.add.at(grad[:, 1], rows, resid)
        grad *= 2.0 / batch_size
        grad += 2.0 * ridge * theta2
        return grad.ravel()

    mu_h, l_h = loss_curvature(instance, ridge)
    return JointProblem(
        outer_dim=n_cells, inner_dim=2 * n, region_x=region_x,
        region_theta=region_theta, outer_grad=outer_grad,
        outer_value=outer_value, inner_grad=inner_grad, inner_value=inner_value,
        constants=ProblemConstants(mu_h=mu_h, L_h=l_h))
