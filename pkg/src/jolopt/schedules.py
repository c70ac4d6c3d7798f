"""Polynomial step-size schedules for the joint solver.

Outer steps decay as ``gamma0 / (k+1)**a`` and inner steps as
``beta0 / (k+1)**b``.  The admissible exponent range is the chain

    0.5 < b < a*tau < a <= 1,      (2 - tau)*a > 1,      0 < tau < 1,

which makes the outer sequence non-summable but square-summable, the inner
sequence likewise, and drives ``gamma_k**tau / beta_k`` to zero so the
learning iterate settles on a slower timescale than the decision iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConstantsInvalid, ScheduleInvalid

#: The concrete exponent triple used throughout the experiment harness.
DEFAULT_EXPONENTS = (1.0, 0.6, 0.75)


@dataclass(frozen=True)
class StepSchedule:
    """Validated (gamma0, beta0, a, b, tau) step-size pair.

    Immutable after construction and safe to share across concurrent runs.
    Construction checks the admissibility chain unless ``debug=True``, a
    bypass meant only for constant-step experiments (e.g. ``a == b == 0``).
    """

    gamma0: float
    beta0: float
    a: float = DEFAULT_EXPONENTS[0]
    b: float = DEFAULT_EXPONENTS[1]
    tau: float = DEFAULT_EXPONENTS[2]
    debug: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.debug:
            _check_admissible(self.gamma0, self.beta0, self.a, self.b, self.tau)

    def gamma_at(self, k: int) -> float:
        """Outer step size at global iteration ``k >= 0``."""
        return self.gamma0 / (k + 1) ** self.a

    def beta_at(self, k: int) -> float:
        """Inner step size at global iteration ``k >= 0``."""
        return self.beta0 / (k + 1) ** self.b

    def with_beta0(self, beta0: float) -> "StepSchedule":
        return StepSchedule(self.gamma0, beta0, self.a, self.b, self.tau, debug=self.debug)


def _check_admissible(gamma0: float, beta0: float, a: float, b: float, tau: float) -> None:
    for name, value in (("gamma0", gamma0), ("beta0", beta0), ("a", a), ("b", b), ("tau", tau)):
        if not math.isfinite(value):
            raise ScheduleInvalid(f"{name} must be finite, got {value!r}")
    if gamma0 <= 0:
        raise ScheduleInvalid(f"gamma0 > 0 violated (gamma0={gamma0})")
    if beta0 <= 0:
        raise ScheduleInvalid(f"beta0 > 0 violated (beta0={beta0})")
    if not 0.0 < tau < 1.0:
        raise ScheduleInvalid(f"0 < tau < 1 violated (tau={tau})")
    if not 0.5 < a:
        raise ScheduleInvalid(f"0.5 < a violated (a={a})")
    if not a <= 1.0:
        raise ScheduleInvalid(f"a <= 1 violated (a={a})")
    if not (2.0 - tau) * a > 1.0:
        raise ScheduleInvalid(f"(2 - tau)*a > 1 violated (a={a}, tau={tau})")
    if not 0.5 < b:
        raise ScheduleInvalid(f"0.5 < b violated (b={b})")
    if not b <= 1.0:
        raise ScheduleInvalid(f"b <= 1 violated (b={b})")
    if not a * tau > b:
        raise ScheduleInvalid(f"b < a*tau violated (a={a}, b={b}, tau={tau})")


def validate_schedule(gamma0: float, beta0: float, a: float, b: float, tau: float) -> StepSchedule:
    """Build a schedule, raising ScheduleInvalid naming the violated inequality."""
    return StepSchedule(float(gamma0), float(beta0), float(a), float(b), float(tau))


def gamma_at(schedule: StepSchedule, k: int) -> float:
    return schedule.gamma_at(k)


def beta_at(schedule: StepSchedule, k: int) -> float:
    return schedule.beta_at(k)


def clamp_beta0(beta0: float, mu_h: float, L_h: float) -> float:
    """Cap the inner base step at ``2*mu_h / L_h**2``.

    ``mu_h`` is the strong-convexity modulus and ``L_h`` the gradient
    Lipschitz constant of the inner objective; the cap keeps every inner
    update contractive in expectation.
    """
    if mu_h <= 0:
        raise ConstantsInvalid(f"mu_h must be positive, got {mu_h}")
    if L_h < mu_h:
        raise ConstantsInvalid(f"L_h >= mu_h required, got L_h={L_h}, mu_h={mu_h}")
    return min(beta0, 2.0 * mu_h / (L_h * L_h))
