"""Closed-form download cost and leakage exponent analytics.

All of the costs here are worked out from formulas only, in the log domain
where it matters, so they are cheap for any N and K.
"""

##############################################################################
# Python compatibility hackage.
from __future__ import annotations

##############################################################################
# Python imports.
import math
from typing import Final, Iterable, NamedTuple

##############################################################################
# Local imports.
from .allocation import log_mixture
from .core import SchemeParams, new_params
from .types import InfeasibleCost, InvalidParameters

##############################################################################
BOUND_TOLERANCE: Final[float] = 1e-9
"""Slack allowed when checking the exponent bounds."""


##############################################################################
class TradeoffPoint(NamedTuple):
    """The three download costs at one leakage ratio exponent."""

    epsilon: float
    """The leakage ratio exponent."""

    d_tsc: float
    """The download cost of the optimal TSC allocation."""

    d_ub: float
    """The download cost of the direct-download-biased allocation."""

    d_lb: float
    """The lower bound on the download cost."""

    @property
    def gap_tsc_lb(self) -> float:
        """The multiplicative gap between the TSC cost and the lower bound."""
        return self.d_tsc / self.d_lb

    @property
    def gap_ub_lb(self) -> float:
        """The multiplicative gap between the UB cost and the lower bound."""
        return self.d_ub / self.d_lb


##############################################################################
class ExponentBounds(NamedTuple):
    """The leakage exponents needed for one download cost, with their bounds."""

    alpha: float
    """(D - 1)(N - 1)."""

    eps_tsc: float
    """The exponent the optimal allocation needs to reach the cost."""

    eps_ub: float
    """The exponent the UB allocation needs to reach the cost."""

    tsc_upper: float
    """log(K-1) + log((N-1)/alpha)."""

    ub_upper: float
    """(K-1) log N + log((1-alpha)/alpha)."""

    ub_lower: float
    """(K-2) log N + log((1-alpha)/alpha)."""

    cost: float
    """The download cost D the exponents are for."""

    @property
    def tsc_upper_ok(self) -> bool:
        """Is the TSC exponent within its upper bound?"""
        return self.eps_tsc <= self.tsc_upper + BOUND_TOLERANCE

    @property
    def ub_upper_ok(self) -> bool:
        """Is the UB exponent within its upper bound?"""
        return self.eps_ub <= self.ub_upper + BOUND_TOLERANCE

    @property
    def ub_lower_ok(self) -> bool:
        """Is the UB exponent above its lower bound?"""
        return self.eps_ub >= self.ub_lower - BOUND_TOLERANCE

    @property
    def all_ok(self) -> bool:
        """Do all of the bounds hold?"""
        return self.tsc_upper_ok and self.ub_upper_ok and self.ub_lower_ok


##############################################################################
def capacity_cost(params: SchemeParams) -> float:
    """The perfect-privacy download cost, 1 + 1/N + ... + 1/N^{K-1}.

    Args:
        params: The scheme parameters (epsilon is ignored).

    Returns:
        The download cost at epsilon = 0.
    """
    return math.fsum(params.n_servers ** -float(i) for i in range(params.n_messages))


##############################################################################
def cost_tsc(params: SchemeParams) -> float:
    """The download cost of the optimal layered allocation.

    Args:
        params: The scheme parameters.

    Returns:
        1 + ((e^eps + N - 1)^{K-1} - e^{(K-1) eps}) / ((N-1)(e^eps + N - 1)^{K-1}).
    """
    return 1.0 - math.expm1(
        params.key_length * (params.epsilon - log_mixture(params))
    ) / (params.n_servers - 1)


##############################################################################
def cost_ub(params: SchemeParams) -> float:
    """The download cost of the direct-download-biased allocation.

    Args:
        params: The scheme parameters.

    Returns:
        1 + (N^{K-1} - 1) / ((N-1)(e^eps + N^{K-1} - 1)).
    """
    others = float(params.n_servers**params.key_length - 1)
    scaled = others * math.exp(-params.epsilon)
    return 1.0 + scaled / ((params.n_servers - 1) * (1.0 + scaled))


##############################################################################
def cost_lb(params: SchemeParams) -> float:
    """The lower bound on the download cost.

    Args:
        params: The scheme parameters.

    Returns:
        1 + sum over i in [1:K-1] of (N e^eps)^{-i}.
    """
    step = math.log(params.n_servers) + params.epsilon
    return 1.0 + math.fsum(math.exp(-i * step) for i in range(1, params.n_messages))


##############################################################################
def feasible_cost_range(params: SchemeParams) -> tuple[float, float]:
    """The range of download costs that some finite epsilon can reach.

    Args:
        params: The scheme parameters (epsilon is ignored).

    Returns:
        The ends of the half-open interval (low, high].
    """
    return 1.0, capacity_cost(params)


##############################################################################
def _alpha(params: SchemeParams, cost: float) -> float:
    """Get alpha = (D-1)(N-1) for a feasible download cost.

    Args:
        params: The scheme parameters (epsilon is ignored).
        cost: The download cost D.

    Returns:
        alpha, clipped to the largest feasible value.

    Raises:
        InfeasibleCost: If the cost isn't in the feasible range.
    """
    low, high = feasible_cost_range(params)
    if not (math.isfinite(cost) and low < cost <= high + 1e-12):
        raise InfeasibleCost(
            f"D must be in the feasible interval ({low}, {high!r}] "
            f"for N={params.n_servers}, K={params.n_messages} (got {cost})"
        )
    # At epsilon = 0 both allocations reach alpha = 1 - N^{1-K}.
    largest = -math.expm1(-params.key_length * math.log(params.n_servers))
    return min((cost - 1.0) * (params.n_servers - 1), largest)


##############################################################################
def eps_tsc(params: SchemeParams, cost: float) -> float:
    """The leakage exponent the optimal allocation needs for a download cost.

    Args:
        params: The scheme parameters (epsilon is ignored).
        cost: The download cost D.

    Returns:
        The exponent, in nats.

    Raises:
        InfeasibleCost: If the cost isn't in the feasible range.
    """
    alpha = _alpha(params, cost)
    # r = (1 - alpha)^{1/(K-1)} and e^eps = r (N-1) / (1 - r).
    log_r = math.log1p(-alpha) / params.key_length
    return max(
        0.0,
        log_r + math.log(params.n_servers - 1) - math.log(-math.expm1(log_r)),
    )


##############################################################################
def eps_ub(params: SchemeParams, cost: float) -> float:
    """The leakage exponent the UB allocation needs for a download cost.

    Args:
        params: The scheme parameters (epsilon is ignored).
        cost: The download cost D.

    Returns:
        The exponent, in nats.

    Raises:
        InfeasibleCost: If the cost isn't in the feasible range.
    """
    alpha = _alpha(params, cost)
    return max(
        0.0,
        math.log1p(-alpha)
        - math.log(alpha)
        + math.log(params.n_servers**params.key_length - 1),
    )


##############################################################################
def theorem1_bounds(params: SchemeParams, cost: float) -> ExponentBounds:
    """Work out both exponents for a download cost, and the bounds on them.

    Args:
        params: The scheme parameters (epsilon is ignored).
        cost: The download cost D.

    Returns:
        The exponents and their bounds.

    Raises:
        InfeasibleCost: If the cost isn't in the feasible range.
    """
    alpha = _alpha(params, cost)
    log_n = math.log(params.n_servers)
    log_odds = math.log1p(-alpha) - math.log(alpha)
    return ExponentBounds(
        alpha=alpha,
        eps_tsc=eps_tsc(params, cost),
        eps_ub=eps_ub(params, cost),
        tsc_upper=math.log(params.key_length) + math.log((params.n_servers - 1) / alpha),
        ub_upper=params.key_length * log_n + log_odds,
        ub_lower=(params.n_messages - 2) * log_n + log_odds,
        cost=cost,
    )


##############################################################################
def exponent_scaling(
    n_servers: int, alpha: float, k_values: Iterable[int]
) -> tuple[tuple[int, ExponentBounds], ...]:
    """Follow the exponents over a range of K at a fixed alpha.

    Args:
        n_servers: The number of servers, N.
        alpha: The fixed value of (D-1)(N-1).
        k_values: The numbers of messages to look at.

    Returns:
        Each K paired with its exponents and bounds.

    Raises:
        InvalidParameters: If alpha isn't feasible for one of the K.
    """
    series = []
    for n_messages in k_values:
        params = new_params(n_servers, n_messages)
        if not 0 < alpha <= 1 - float(n_servers) ** -params.key_length:
            raise InvalidParameters(
                f"alpha must be in (0, {1 - float(n_servers) ** -params.key_length!r}] "
                f"for N={n_servers}, K={n_messages} (got {alpha})"
            )
        series.append(
            (n_messages, theorem1_bounds(params, 1.0 + alpha / (n_servers - 1)))
        )
    return tuple(series)


##############################################################################
def tradeoff_point(params: SchemeParams) -> TradeoffPoint:
    """All three download costs at the parameters' epsilon.

    Args:
        params: The scheme parameters.

    Returns:
        The tradeoff point.
    """
    return TradeoffPoint(params.epsilon, cost_tsc(params), cost_ub(params), cost_lb(params))


##############################################################################
def sweep(params: SchemeParams, eps_grid: Iterable[float]) -> tuple[TradeoffPoint, ...]:
    """Work out the three download costs over a grid of exponents.

    Args:
        params: The scheme parameters (epsilon is ignored).
        eps_grid: The exponents to evaluate at.

    Returns:
        One tradeoff point per exponent.

    Raises:
        InvalidParameters: If an exponent is negative.
    """
    return tuple(
        tradeoff_point(params.with_epsilon(epsilon)) for epsilon in eps_grid
    )


### tradeoff.py ends here
