"""Continuous multi-objective dispatch: quadratic generation cost against
fractional renewable penetration, with a ridge-regression solar predictor as
the inner learner.

The dispatch region couples to the learner: predicted renewables enter the
per-step balance offsets, so the region is refreshed from the current model
parameters once per global iteration (each outer step then projects onto a
fixed polyhedron).  Ramp limits |x_i^t - x_i^{t-1}| <= delta * x_i^{t-1}
are linearized into two halfspaces per generator and step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, InfeasibleRegion, InstanceInvalid, WeightsInvalid
from .geometry import FeasibleRegion
from .solver import JointProblem, ProblemConstants

DEFAULT_RIDGE = 1e-6
DEFAULT_A1 = 1.0
DEFAULT_A2 = 0.01


@dataclass
class OpfInstance:
    """Dispatch data over T steps for N2 conventional generators.

    ``features`` (T x F weather matrix) and ``solar_true`` feed the inner
    prediction task; ``caps`` (N2 x T), ``demand`` (T,) and ``ramp_delta``
    shape the dispatch polyhedron.  ``eps_den`` floors the penetration
    denominator so the fractional objective stays finite at zero dispatch.
    """

    caps: np.ndarray
    demand: np.ndarray
    features: np.ndarray
    solar_true: np.ndarray
    a1: float = DEFAULT_A1
    a2: float = DEFAULT_A2
    ramp_delta: float = 0.2
    eps_den: float | None = None

    def __post_init__(self):
        self.caps = np.asarray(self.caps, dtype=np.float64)
        self.demand = np.asarray(self.demand, dtype=np.float64)
        self.features = np.asarray(self.features, dtype=np.float64)
        self.solar_true = np.asarray(self.solar_true, dtype=np.float64)
        if self.caps.ndim != 2:
            raise InstanceInvalid("caps must be an N2 x T matrix")
        t = self.caps.shape[1]
        if self.demand.shape != (t,) or self.solar_true.shape != (t,):
            raise InstanceInvalid("demand and solar_true must have length T")
        if self.features.ndim != 2 or self.features.shape[0] != t:
            raise InstanceInvalid("features must have T rows")
        if np.any(self.caps < 0) or np.any(self.demand < 0) or np.any(self.solar_true < 0):
            raise InstanceInvalid("caps, demand, and solar must be nonnegative")
        if self.a1 <= 0 or self.a2 <= 0:
            raise InstanceInvalid("cost coefficients a1, a2 must be positive")
        if self.ramp_delta <= 0:
            raise InstanceInvalid("ramp_delta must be positive")
        if self.eps_den is None:
            self.eps_den = 1e-6 * float(self.demand.sum())

    @property
    def n_generators(self) -> int:
        return self.caps.shape[0]

    @property
    def n_steps(self) -> int:
        return self.caps.shape[1]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def predict_solar(instance: OpfInstance, theta: np.ndarray) -> np.ndarray:
    """Affine prediction clamped at zero; theta = (weights..., intercept)."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (instance.n_features + 1,):
        raise DimMismatch(
            f"theta must have length F+1={instance.n_features + 1}, got {theta.shape}")
    raw = instance.features @ theta[:-1] + theta[-1]
    return np.maximum(raw, 0.0)


def _check_dispatch(instance: OpfInstance, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != instance.caps.shape:
        raise DimMismatch(
            f"dispatch {x.shape} does not match caps {instance.caps.shape}")
    return x


def cost_objective(instance: OpfInstance, x: np.ndarray) -> float:
    """Total generation cost sum(a1 * x + a2 * x^2)."""
    x = _check_dispatch(instance, x)
    return float(np.sum(instance.a1 * x + instance.a2 * x * x))


def penetration_objective(instance: OpfInstance, theta: np.ndarray,
                          x: np.ndarray) -> float:
    """Predicted renewables over total conventional dispatch (maximize)."""
    x = _check_dispatch(instance, x)
    numer = float(predict_solar(instance, theta).sum())
    denom = max(instance.eps_den, float(x.sum()))
    return numer / denom


def scalarized_objective(instance: OpfInstance, theta: np.ndarray, x: np.ndarray,
                         w1: float, w2: float) -> tuple[float, np.ndarray]:
    """Value and dispatch gradient of w1 * cost - w2 * penetration."""
    _check_weights(w1, w2)
    x = _check_dispatch(instance, x)
    numer = float(predict_solar(instance, theta).sum())
    total = float(x.sum())
    denom = max(instance.eps_den, total)
    value = w1 * cost_objective(instance, x) - w2 * numer / denom
    grad = w1 * (instance.a1 + 2.0 * instance.a2 * x)
    if total >= instance.eps_den:
        # only the denominator depends on x; below the floor f2 is locally flat
        grad = grad + w2 * numer / (denom * denom)
    return value, grad


def _check_weights(w1: float, w2: float) -> None:
    if w1 < 0 or w2 < 0 or abs(w1 + w2 - 1.0) > 1e-9:
        raise WeightsInvalid(f"weights must be nonnegative and sum to 1, got ({w1}, {w2})")


def solar_loss(instance: OpfInstance, theta: np.ndarray, ridge: float = 0.0) -> float:
    """Mean squared prediction error of the affine model plus ridge penalty."""
    theta = np.asarray(theta, dtype=np.float64)
    resid = instance.features @ theta[:-1] + theta[-1] - instance.solar_true
    loss = float(np.dot(resid, resid)) / instance.n_steps
    if ridge > 0.0:
        loss += ridge * float(np.dot(theta, theta))
    return loss


def solar_loss_gradient(instance: OpfInstance, theta: np.ndarray,
                        ridge: float = 0.0) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    resid = instance.features @ theta[:-1] + theta[-1] - instance.solar_true
    scale = 2.0 / instance.n_steps
    grad = np.empty_like(theta)
    grad[:-1] = scale * (instance.features.T @ resid)
    grad[-1] = scale * float(resid.sum())
    if ridge > 0.0:
        grad += 2.0 * ridge * theta
    return grad


def solar_curvature(instance: OpfInstance, ridge: float) -> tuple[float, float]:
    """(mu_h, L_h) from the extended design matrix [features, 1]."""
    phi = np.column_stack([instance.features, np.ones(instance.n_steps)])
    hess = (2.0 / instance.n_steps) * (phi.T @ phi)
    eigs = np.linalg.eigvalsh(hess)
    return float(eigs[0] + 2.0 * ridge), float(eigs[-1] + 2.0 * ridge)


def _dispatch_region(instance: OpfInstance, predictions: np.ndarray,
                     template: FeasibleRegion | None = None) -> FeasibleRegion:
    """Box [0, cap] with balance and ramp halfspaces, flattened (i, t) order.

    Balance per step t:   -sum_i x_i^t <= predictions_t - demand_t
    Ramp per (i, t>=1):   x_i^t - (1 + delta) x_i^{t-1} <= 0
                          -x_i^t + (1 - delta) x_i^{t-1} <= 0
    """
    n2, t = instance.caps.shape
    balance_offsets = predictions - instance.demand
    if template is not None:
        offsets = np.array(template._offsets)
        offsets[:t] = balance_offsets
        return template.with_offsets(offsets)

    dim = n2 * t
    halfspaces = []
    for step in range(t):
        normal = np.zeros(dim)
        normal[step::t] = -1.0
        halfspaces.append((normal, balance_offsets[step]))
    delta = instance.ramp_delta
    for gen in range(n2):
        base = gen * t
        for step in range(1, t):
            up = np.zeros(dim)
            up[base + step] = 1.0
            up[base + step - 1] = -(1.0 + delta)
            halfspaces.append((up, 0.0))
            down = np.zeros(dim)
            down[base + step] = -1.0
            down[base + step - 1] = 1.0 - delta
            halfspaces.append((down, 0.0))
    lower = np.zeros(dim)
    upper = instance.caps.reshape(dim).copy()
    return FeasibleRegion(lower, upper, halfspaces)


def build_opf_problem(instance: OpfInstance, w1: float, w2: float,
                      ridge: float = DEFAULT_RIDGE, noise: str = "minibatch",
                      batch_size: int = 32, noise_std: float = 0.0) -> JointProblem:
    """Assemble the joint problem for one scalarization weight pair.

    The returned problem refreshes its dispatch region from theta each
    global iteration, so it is owned by a single run at a time.
    """
    _check_weights(w1, w2)
    if noise not in ("minibatch", "gaussian", "none"):
        raise InstanceInvalid(f"unknown noise mode {noise!r}")
    n2, t = instance.caps.shape
    f = instance.n_features

    init_pred = np.zeros(t)
    shortfall = instance.demand - init_pred - instance.caps.sum(axis=0)
    if np.any(shortfall > 0):
        step = int(np.argmax(shortfall))
        raise InfeasibleRegion(
            f"demand exceeds capacity plus predicted renewables at t={step} "
            f"by {shortfall[step]:.6g}")
    base_region = _dispatch_region(instance, init_pred)
    region_theta = FeasibleRegion.unbounded(f + 1)

    def refresh(theta: np.ndarray) -> FeasibleRegion:
        return _dispatch_region(instance, predict_solar(instance, theta),
                                template=base_region)

    def outer_value(x, theta):
        value, _ = scalarized_objective(instance, theta, x.reshape(n2, t), w1, w2)
        return value

    def outer_grad(x, theta):
        _, grad = scalarized_objective(instance, theta, x.reshape(n2, t), w1, w2)
        return grad.ravel()

    def inner_value(theta):
        return solar_loss(instance, theta, ridge)

    def inner_grad(theta, rng):
        if noise == "none":
            return solar_loss_gradient(instance, theta, ridge)
        if noise == "gaussian":
            g = solar_loss_gradient(instance, theta, ridge)
            return g + rng.normal(0.0, noise_std, size=g.shape)
        rows = rng.integers(0, t, size=batch_size)
        phi = instance.features[rows]
        resid = phi @ theta[:-1] + theta[-1] - instance.solar_true[rows]
        grad = np.empty_like(theta)
        grad[:-1] = (2.0 / batch_size) * (phi.T @ resid)
        grad[-1] = (2.0 / batch_size) * float(resid.sum())
        return grad + 2.0 * ridge * theta

    mu_h, l_h = solar_curvature(instance, ridge)
    return JointProblem(
        outer_dim=n2 * t, inner_dim=f + 1, region_x=base_region,
        region_theta=region_theta, outer_grad=outer_grad,
        outer_value=outer_value, inner_grad=inner_grad, inner_value=inner_value,
        constants=ProblemConstants(mu_h=mu_h, L_h=l_h),
        refresh_region_x=refresh)
