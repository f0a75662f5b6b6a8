"""The allocation problems as linear programs, and their optimality checks.

Two problems are built here. The full problem ranges over a probability
for every message, key vector and permutation, minimising the worst-case
download cost subject to every server's likelihood ratio staying within
e^epsilon. The reduced problem has one probability per weight class of
the key vector. Both are solved with the simplex in ``lpir.simplex``, and
the closed-form optimum of the reduced problem is also checked directly
against its KKT conditions.
"""

##############################################################################
# Python compatibility hackage.
from __future__ import annotations

##############################################################################
# Python imports.
import logging
import math
from collections import defaultdict
from itertools import product
from typing import Final, NamedTuple, Sequence

##############################################################################
# Local imports.
from .allocation import (
    FullAllocation,
    WeightAllocation,
    optimal_allocation,
    optimal_log_probs,
    validate_log_probs,
    weight_allocation,
)
from .core import (
    SchemeParams,
    check_guard,
    enumerate_keys,
    enumerate_permutations,
    key_class_sizes,
)
from .simplex import Constraint, LinearProgram, solve
from .types import PermutationScope

##############################################################################
LOG: Final = logging.getLogger(__name__)
"""The logger for this module."""

P1_VARIABLE_GUARD: Final[int] = 5000
"""The most variables we'll put in the full problem."""

AGREEMENT_TOLERANCE: Final[float] = 1e-6
"""How close the full and reduced optima must be to agree."""

RESIDUAL_TOLERANCE: Final[float] = 1e-9
"""The largest stationarity residual a certificate may have."""

DUAL_TOLERANCE: Final[float] = 1e-12
"""How far below zero a dual variable, or above it a slackness product, may be."""


##############################################################################
def build_p2(params: SchemeParams) -> LinearProgram:
    """Build the reduced allocation problem.

    The optimal p_j span K epsilon in their logarithms, so once that runs
    to a few tens they fall below anything the simplex can tell from
    zero; ``solve_p2`` solves the same problem in better units.

    Args:
        params: The scheme parameters.

    Returns:
        A program over p_0 to p_{K-1} whose optimum is the best download
        cost, N/(N-1) (1 - p_0).
    """
    n_servers, n_messages = params.n_servers, params.n_messages
    bound = math.exp(params.epsilon)
    ratio = n_servers / (n_servers - 1)
    adjacency = []
    for j in range(n_messages - 1):
        for first, second in ((j, j + 1), (j + 1, j)):
            coeffs = [0.0] * n_messages
            coeffs[first] = 1.0
            coeffs[second] = -bound
            adjacency.append(Constraint(tuple(coeffs), 0.0, f"p{first} <= e^eps p{second}"))
    return LinearProgram(
        objective=(-ratio,) + (0.0,) * (n_messages - 1),
        objective_offset=ratio,
        eq_constraints=(
            Constraint(
                tuple(float(n_servers * size) for size in key_class_sizes(params)),
                1.0,
                "normalisation",
            ),
        ),
        ineq_constraints=tuple(adjacency),
        var_lower_bounds=(0.0,) * n_messages,
        var_names=tuple(f"p{j}" for j in range(n_messages)),
    )


##############################################################################
def build_p2_scaled(params: SchemeParams) -> LinearProgram:
    """Build the reduced allocation problem in units of the layered allocation.

    The variable y_j stands for p_j / p*_j, where p*_j is the optimal
    layered allocation, so every variable of the optimum is of order one
    however large K epsilon gets. The coefficients are worked out from
    logarithms and never overflow.

    Args:
        params: The scheme parameters.

    Returns:
        A program over y_0 to y_{K-1} with the same optimum as
        ``build_p2``.
    """
    n_servers, n_messages = params.n_servers, params.n_messages
    ratio = n_servers / (n_servers - 1)
    units = optimal_log_probs(params)
    # p*_j is exactly e^eps times p*_{j+1}.
    squeeze = math.exp(-2.0 * params.epsilon)
    adjacency = []
    for j in range(n_messages - 1):
        coeffs = [0.0] * n_messages
        coeffs[j], coeffs[j + 1] = 1.0, -1.0
        adjacency.append(Constraint(tuple(coeffs), 0.0, f"p{j} <= e^eps p{j + 1}"))
        coeffs = [0.0] * n_messages
        coeffs[j], coeffs[j + 1] = -1.0, squeeze
        adjacency.append(Constraint(tuple(coeffs), 0.0, f"p{j + 1} <= e^eps p{j}"))
    log_n = math.log(n_servers)
    return LinearProgram(
        objective=(-ratio * math.exp(units[0]),) + (0.0,) * (n_messages - 1),
        objective_offset=ratio,
        eq_constraints=(
            Constraint(
                tuple(
                    math.exp(log_n + math.log(size) + unit)
                    for size, unit in zip(key_class_sizes(params), units)
                ),
                1.0,
                "normalisation",
            ),
        ),
        ineq_constraints=tuple(adjacency),
        var_lower_bounds=(0.0,) * n_messages,
        var_names=tuple(f"y{j}" for j in range(n_messages)),
    )


##############################################################################
def solve_p2(params: SchemeParams) -> tuple[float, tuple[float, ...]]:
    """Solve the reduced allocation problem.

    Args:
        params: The scheme parameters.

    Returns:
        The optimal value and the optimal p_0 to p_{K-1}.

    Raises:
        LPError: If the solver fails.
    """
    value, scaled = solve(build_p2_scaled(params))
    return value, tuple(
        math.exp(unit) * max(0.0, level)
        for unit, level in zip(optimal_log_probs(params), scaled)
    )


##############################################################################
def _p1_size(params: SchemeParams) -> int:
    """The number of variables in the full problem."""
    return (
        params.n_messages
        * params.n_servers**params.key_length
        * math.factorial(params.n_servers)
        + 1
    )


##############################################################################
def build_p1(params: SchemeParams) -> LinearProgram:
    """Build the full allocation problem.

    The variables are p^{k,pi}_f for every message k, key vector f and
    permutation pi (messages outermost, then key vectors, then
    permutations, each in canonical order), followed by the epigraph
    variable d that bounds every message's download cost.

    Args:
        params: The scheme parameters.

    Returns:
        The program.

    Raises:
        GuardExceeded: If it would need more than ``P1_VARIABLE_GUARD``
            variables.
    """
    check_guard("Full allocation problem", _p1_size(params), P1_VARIABLE_GUARD)
    n_servers, n_messages = params.n_servers, params.n_messages
    keys = enumerate_keys(params)
    permutations = enumerate_permutations(params, cyclic_only=False)
    key_index = {key.entries: index for index, key in enumerate(keys)}
    block = len(keys) * len(permutations)
    width = n_messages * block + 1
    epigraph = width - 1
    bound = math.exp(params.epsilon)

    def _variable(message: int, key: int, pi: int) -> int:
        return (message - 1) * block + key * len(permutations) + pi

    # The permutations sending each server to each value.
    sending: dict[tuple[int, int], list[int]] = defaultdict(list)
    for index, pi in enumerate(permutations):
        for server in range(1, n_servers + 1):
            sending[server, pi.image(server)].append(index)

    names = [
        f"p[k={message},f={key},pi={pi}]"
        for message in range(1, n_messages + 1)
        for key in keys
        for pi in permutations
    ] + ["d"]

    ineq: list[Constraint] = []
    zero = key_index[(0,) * params.key_length]
    for message in range(1, n_messages + 1):
        coeffs = [0.0] * width
        for pi in range(len(permutations)):
            coeffs[_variable(message, zero, pi)] = -1.0 / (n_servers - 1)
        coeffs[epigraph] = -1.0
        ineq.append(
            Constraint(tuple(coeffs), -n_servers / (n_servers - 1), f"cost(k={message}) <= d")
        )

    # A query q reaches server n under message k only from the key vector
    # q|k, and only through the permutations with pi(n) = q_k + sum(q|k).
    def _sources(server: int, query: tuple[int, ...], message: int) -> list[int]:
        rest = query[: message - 1] + query[message:]
        value = (query[message - 1] + sum(rest)) % n_servers
        return [
            _variable(message, key_index[rest], pi) for pi in sending[server, value]
        ]

    for server in range(1, n_servers + 1):
        for query in product(range(n_servers), repeat=n_messages):
            for first, second in product(range(1, n_messages + 1), repeat=2):
                if first == second:
                    continue
                coeffs = [0.0] * width
                for variable in _sources(server, query, first):
                    coeffs[variable] += 1.0
                for variable in _sources(server, query, second):
                    coeffs[variable] -= bound
                ineq.append(
                    Constraint(
                        tuple(coeffs),
                        0.0,
                        f"n={server} q={''.join(map(str, query))} k={first} vs k={second}",
                    )
                )

    eq = []
    for message in range(1, n_messages + 1):
        coeffs = [0.0] * width
        for variable in range(_variable(message, 0, 0), _variable(message, 0, 0) + block):
            coeffs[variable] = 1.0
        eq.append(Constraint(tuple(coeffs), 1.0, f"normalisation(k={message})"))

    LOG.debug(
        "Full problem for N=%d K=%d: %d variables, %d inequalities",
        n_servers,
        n_messages,
        width,
        len(ineq),
    )
    return LinearProgram(
        objective=(0.0,) * epigraph + (1.0,),
        objective_offset=0.0,
        eq_constraints=tuple(eq),
        ineq_constraints=tuple(ineq),
        var_lower_bounds=(0.0,) * epigraph + (-math.inf,),
        var_names=tuple(names),
    )


##############################################################################
def p1_allocation(params: SchemeParams, solution: Sequence[float]) -> FullAllocation:
    """Turn a solution of the full problem into a full allocation.

    Args:
        params: The scheme parameters.
        solution: The variable values, laid out as ``build_p1`` lays them.

    Returns:
        The allocation over every permutation.
    """
    keys = enumerate_keys(params)
    permutations = enumerate_permutations(params, cyclic_only=False)
    values = iter(solution)
    return FullAllocation.from_entries(
        params,
        PermutationScope.ALL,
        {
            (message, key, pi): max(0.0, next(values))
            for message in range(1, params.n_messages + 1)
            for key in keys
            for pi in permutations
        },
        tolerance=1e-8,
    )


##############################################################################
def reduce_allocation(params: SchemeParams, full_alloc: FullAllocation) -> WeightAllocation:
    """Average a full allocation down to one probability per weight class.

    Each class probability is the mass the full allocation puts on the
    class, over every message and permutation, spread evenly over the N K
    s_j keys of the class.

    Args:
        params: The scheme parameters.
        full_alloc: The allocation to reduce.

    Returns:
        The weight allocation.
    """
    mass: dict[int, list[float]] = defaultdict(list)
    for message in range(1, params.n_messages + 1):
        for key, _, prob in full_alloc.entries(message):
            mass[key.weight].append(prob)
    return weight_allocation(
        params,
        [
            math.fsum(mass[weight]) / (params.n_servers * params.n_messages * size)
            for weight, size in enumerate(key_class_sizes(params))
        ],
    )


##############################################################################
class Prop1Check(NamedTuple):
    """The optima of the full and the reduced problems, side by side."""

    p1_value: float
    """The optimum of the full problem."""

    p2_value: float
    """The optimum of the reduced problem."""

    agree: bool
    """Are the two within ``AGREEMENT_TOLERANCE``?"""


##############################################################################
def verify_prop1(params: SchemeParams) -> Prop1Check:
    """Check that the full and reduced problems have the same optimum.

    Args:
        params: The scheme parameters.

    Returns:
        Both optima and whether they agree.

    Raises:
        GuardExceeded: If the full problem would be too big.
        LPError: If either problem fails to solve.
    """
    full = build_p1(params)
    p1_value, _ = solve(full)
    p2_value, _ = solve_p2(params)
    check = Prop1Check(p1_value, p2_value, abs(p1_value - p2_value) <= AGREEMENT_TOLERANCE)
    LOG.info("Full %r vs reduced %r: %s", p1_value, p2_value, "agree" if check.agree else "DIFFER")
    return check


##############################################################################
class KktCertificate(NamedTuple):
    """The closed-form primal and dual solution of the reduced problem."""

    primal: WeightAllocation
    """The optimal allocation."""

    lambda_dual: float
    """The multiplier of the normalisation equality."""

    mu: tuple[float, ...]
    """The multipliers of p_j >= 0."""

    alpha_dual: tuple[float, ...]
    """The multipliers of p_j <= e^eps p_{j+1}."""

    beta_dual: tuple[float, ...]
    """The multipliers of p_{j+1} <= e^eps p_j."""

    stationarity_residuals: tuple[float, ...]
    """The gradient of the Lagrangian with respect to each p_j, over s_j."""

    slackness_products: tuple[float, ...]
    """Each inequality's multiplier times its slack, in absolute value."""

    primal_feasible: bool
    """Does the primal meet every constraint?"""

    @property
    def max_residual(self) -> float:
        """The largest absolute stationarity residual."""
        return max(abs(residual) for residual in self.stationarity_residuals)

    @property
    def dual_feasible(self) -> bool:
        """Are all of the inequality multipliers non-negative?"""
        return all(
            value >= -DUAL_TOLERANCE for value in self.mu + self.alpha_dual + self.beta_dual
        )

    @property
    def ok(self) -> bool:
        """Does the certificate prove the primal optimal?"""
        return (
            self.primal_feasible
            and self.dual_feasible
            and self.max_residual <= RESIDUAL_TOLERANCE
            and max(self.slackness_products, default=0.0) <= DUAL_TOLERANCE
        )


##############################################################################
def kkt_certificate(params: SchemeParams) -> KktCertificate:
    """Build and check the KKT certificate of the optimal allocation.

    The duals are worked out with e^{(K-2) eps} cancelled from every
    weight, and the primal checks use the logarithms of the allocation, so
    nothing overflows or underflows at a large K epsilon. Each
    stationarity residual is divided by its class size s_j, which leaves
    it on the scale of a class probability rather than a single key's.

    Args:
        params: The scheme parameters.

    Returns:
        The certificate, with its residuals worked out.
    """
    n_servers, n_messages = params.n_servers, params.n_messages
    epsilon = params.epsilon
    ratio = n_servers / (n_servers - 1)
    sizes = key_class_sizes(params)
    log_probs = optimal_log_probs(params)
    primal = optimal_allocation(params)

    def _lift(value: float) -> float:
        """e^eps times a value, without overflowing on the way."""
        if value == 0.0:
            return 0.0
        return math.copysign(math.exp(epsilon + math.log(abs(value))), value)

    def _tail(j: int, first: int) -> float:
        """The sum of s_i e^{(j-i) eps} over i from first up."""
        return math.fsum(
            sizes[i] * math.exp((j - i) * epsilon) for i in range(first, n_messages)
        )

    total = _tail(0, 0)
    lambda_dual = 1.0 / ((n_servers - 1) * total)
    alpha = tuple(ratio * _tail(j, j + 1) / total for j in range(n_messages - 1))
    # e^eps alpha[j - 1], summed directly.
    lifted_alpha = tuple(ratio * _tail(j, j) / total for j in range(1, n_messages))
    mu = (0.0,) * n_messages
    # beta[j - 1] goes with p_j <= e^eps p_{j-1}.
    beta = (0.0,) * (n_messages - 1)

    residuals = []
    for j in range(n_messages):
        terms = [-mu[j], lambda_dual * n_servers * sizes[j]]
        if j == 0:
            terms.append(-ratio)
        if j < n_messages - 1:
            terms.extend((alpha[j], -_lift(beta[j])))
        if j > 0:
            terms.extend((-lifted_alpha[j - 1], beta[j - 1]))
        residuals.append(math.fsum(terms) / sizes[j])

    probs = [math.exp(log_prob) for log_prob in log_probs]
    slackness = [abs(m * -p) for m, p in zip(mu, probs)]
    slackness.extend(
        abs(alpha[j] * (probs[j] - math.exp(epsilon + log_probs[j + 1])))
        for j in range(n_messages - 1)
    )
    # e^eps p_j can overflow, and only matters with a non-zero multiplier.
    slackness.extend(
        abs(beta[j] * (probs[j + 1] - math.exp(epsilon + log_probs[j]))) if beta[j] else 0.0
        for j in range(n_messages - 1)
    )

    return KktCertificate(
        primal=primal,
        lambda_dual=lambda_dual,
        mu=mu,
        alpha_dual=alpha,
        beta_dual=beta,
        stationarity_residuals=tuple(residuals),
        slackness_products=tuple(slackness),
        primal_feasible=validate_log_probs(params, log_probs).ok,
    )


### optimizer.py ends here
