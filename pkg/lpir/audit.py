"""Exact and sampled checks of privacy, cost and correctness.

Nothing here trusts the closed forms: the per-server query distributions
are worked out by pushing a full allocation through the query function,
and the leakage and download cost are read off those distributions.

The leakage is measured on the queries alone. The answers are a fixed
function of the query and the stored messages, and the key is drawn
independently of the messages, so conditioning on the messages leaves the
query as the only random part of what a server sees.
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
from typing import Any, Final, NamedTuple, Optional

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .allocation import FullAllocation, WeightAllocation
from .core import (
    KeyVector,
    Permutation,
    QueryVector,
    SchemeParams,
    check_guard,
    enumerate_keys,
    enumerate_permutations,
    enumeration_guard,
)
from .protocol import (
    KeySampler,
    MessageStore,
    RandomKey,
    answer_query,
    check_message,
    decode,
    make_queries,
    make_rng,
    retrieve,
)
from .types import DecodeError, InvalidParameters, PermutationScope

##############################################################################
LOG: Final = logging.getLogger(__name__)
"""The logger for this module."""

ALL_SCOPE_GUARD: Final[int] = 10**6
"""Largest K * N^{K-1} * N! we'll enumerate when every permutation is allowed."""

CYCLIC_SCOPE_GUARD: Final[int] = 10**7
"""Largest K * N^{K-1} * N we'll enumerate with cyclic permutations only."""

CHUNK_SIZE: Final[int] = 10_000
"""The number of Monte Carlo trials that share one random stream."""


##############################################################################
def _check_audit_size(params: SchemeParams, scope: PermutationScope) -> None:
    """Ensure an exhaustive audit stays within its guard.

    Args:
        params: The scheme parameters.
        scope: The permutations being audited.

    Raises:
        GuardExceeded: If the audit would be too big.
    """
    if scope.is_cyclic:
        size = params.n_messages * params.n_servers**params.key_length * params.n_servers
        limit = enumeration_guard(CYCLIC_SCOPE_GUARD)
    else:
        size = (
            params.n_messages
            * params.n_servers**params.key_length
            * math.factorial(params.n_servers)
        )
        limit = enumeration_guard(ALL_SCOPE_GUARD)
    check_guard(f"Exhaustive audit over {scope.value} permutations", size, limit)


##############################################################################
class QueryDistribution(NamedTuple):
    """The distribution of the query one server sees for one message."""

    server: int
    """The 1-based server index n."""

    message: int
    """The 1-based index k of the message being retrieved."""

    probs: dict[QueryVector, float]
    """The probability of every query with non-zero probability."""

    def probability(self, query: QueryVector) -> float:
        """Get the probability of a query.

        Args:
            query: The query.

        Returns:
            Its probability, 0 for queries that never occur.
        """
        return self.probs.get(query, 0.0)

    @property
    def total(self) -> float:
        """The total probability; 1 for a valid allocation."""
        return math.fsum(self.probs.values())


##############################################################################
def _query_masses(
    params: SchemeParams, full_alloc: FullAllocation, message: int
) -> list[dict[QueryVector, list[float]]]:
    """Gather the probability mass landing on each query, server by server.

    Args:
        params: The scheme parameters.
        full_alloc: The allocation to push through the query function.
        message: The 1-based message index.

    Returns:
        For every server, the masses of the keys that produce each query.
    """
    masses: list[dict[QueryVector, list[float]]] = [
        defaultdict(list) for _ in range(params.n_servers)
    ]
    for f, pi, prob in full_alloc.entries(message):
        for server, query in enumerate(make_queries(params, message, RandomKey(f, pi))):
            masses[server][query].append(prob)
    return masses


##############################################################################
def _distributions(
    params: SchemeParams, full_alloc: FullAllocation, message: int
) -> list[QueryDistribution]:
    """Work out every server's query distribution for one message.

    Args:
        params: The scheme parameters.
        full_alloc: The allocation.
        message: The 1-based message index.

    Returns:
        One distribution per server.
    """
    return [
        QueryDistribution(
            server,
            message,
            {query: math.fsum(mass) for query, mass in sorted(masses.items())},
        )
        for server, masses in enumerate(
            _query_masses(params, full_alloc, message), start=1
        )
    ]


##############################################################################
def query_distribution(
    params: SchemeParams, full_alloc: FullAllocation, message: int, server: int
) -> QueryDistribution:
    """Work out the exact distribution of the query a server sees.

    Args:
        params: The scheme parameters.
        full_alloc: The allocation keys are drawn from.
        message: The 1-based index of the message being retrieved.
        server: The 1-based server index.

    Returns:
        The query distribution.

    Raises:
        InvalidParameters: If the message or server is out of range.
        GuardExceeded: If the enumeration would be too big.
    """
    check_message(params, message)
    if not 1 <= server <= params.n_servers:
        raise InvalidParameters(
            f"Server index must be in [1:{params.n_servers}] (got {server})"
        )
    _check_audit_size(params, full_alloc.scope)
    return _distributions(params, full_alloc, message)[server - 1]


##############################################################################
class LeakageWitness(NamedTuple):
    """Where the largest likelihood ratio was found."""

    server: int
    """The 1-based server index n."""

    query: QueryVector
    """The query q."""

    message_1: int
    """The message in the numerator of the ratio."""

    message_2: int
    """The message in the denominator of the ratio."""


##############################################################################
class LeakageReport(NamedTuple):
    """The measured leakage of an allocation."""

    empirical_epsilon: float
    """The largest log likelihood ratio; infinite when the supports differ."""

    witness: LeakageWitness
    """Where the largest ratio was found."""

    per_server_eps: tuple[float, ...]
    """The largest log likelihood ratio seen by each server."""

    def as_dict(self) -> dict[str, Any]:
        """The report as a JSON-friendly dictionary."""
        return {
            "empirical_epsilon": self.empirical_epsilon,
            "witness": {
                "server": self.witness.server,
                "query": str(self.witness.query),
                "k1": self.witness.message_1,
                "k2": self.witness.message_2,
            },
            "per_server_eps": list(self.per_server_eps),
        }


##############################################################################
def _log_ratio(upper: float, lower: float) -> Optional[float]:
    """The log likelihood ratio of two probabilities.

    Args:
        upper: The numerator.
        lower: The denominator.

    Returns:
        ln(upper / lower), infinity for a positive numerator over zero, or
        ``None`` when both are zero.
    """
    if upper <= 0:
        return None if lower <= 0 else -math.inf
    if lower <= 0:
        return math.inf
    return math.log(upper) - math.log(lower)


##############################################################################
def measure_leakage(params: SchemeParams, full_alloc: FullAllocation) -> LeakageReport:
    """Measure the worst likelihood ratio any server can observe.

    Args:
        params: The scheme parameters.
        full_alloc: The allocation keys are drawn from.

    Returns:
        The leakage report.

    Raises:
        GuardExceeded: If the enumeration would be too big.
        InvalidParameters: If no query has a positive probability.
    """
    _check_audit_size(params, full_alloc.scope)
    by_message = [
        _distributions(params, full_alloc, message)
        for message in range(1, params.n_messages + 1)
    ]
    worst = -math.inf
    witness: Optional[LeakageWitness] = None
    per_server = []
    for server in range(params.n_servers):
        server_worst = -math.inf
        dists = [distributions[server] for distributions in by_message]
        queries = sorted(set().union(*(dist.probs for dist in dists)))
        for first, second in product(range(params.n_messages), repeat=2):
            if first == second:
                continue
            for query in queries:
                ratio = _log_ratio(
                    dists[first].probability(query), dists[second].probability(query)
                )
                if ratio is None:
                    continue
                server_worst = max(server_worst, ratio)
                if ratio > worst:
                    worst = ratio
                    witness = LeakageWitness(server + 1, query, first + 1, second + 1)
        per_server.append(max(server_worst, 0.0))
    if witness is None:
        raise InvalidParameters("No query has a positive probability to compare")
    LOG.info(
        "Measured leakage for N=%d K=%d: %r at %s",
        params.n_servers,
        params.n_messages,
        worst,
        witness,
    )
    return LeakageReport(max(worst, 0.0), witness, tuple(per_server))


##############################################################################
def direct_download_probability(
    params: SchemeParams, full_alloc: FullAllocation, message: int
) -> float:
    """The probability of a direct download when retrieving a message.

    Args:
        params: The scheme parameters.
        full_alloc: The allocation keys are drawn from.
        message: The 1-based message index.

    Returns:
        The total mass of the all-zero key vector over every permutation.
    """
    zero = KeyVector.zero(params)
    return math.fsum(full_alloc[message, zero, pi] for pi in full_alloc.permutations)


##############################################################################
def exact_download_cost(params: SchemeParams, full_alloc: FullAllocation) -> float:
    """Work out the exact worst-case download cost of an allocation.

    Args:
        params: The scheme parameters.
        full_alloc: The allocation keys are drawn from.

    Returns:
        The largest, over the messages, of p_d + N/(N-1) (1 - p_d).

    Raises:
        GuardExceeded: If the enumeration would be too big.
    """
    _check_audit_size(params, full_alloc.scope)
    ratio = params.n_servers / (params.n_servers - 1)
    return max(
        direct + ratio * (1.0 - direct)
        for direct in (
            direct_download_probability(params, full_alloc, message)
            for message in range(1, params.n_messages + 1)
        )
    )


##############################################################################
class MonteCarloCost(NamedTuple):
    """The outcome of a Monte Carlo download cost estimate."""

    mean: float
    """The mean normalised download cost."""

    std_error: float
    """The standard error of the mean."""

    trials: int
    """The number of retrievals that were run."""


##############################################################################
def monte_carlo_cost(
    params: SchemeParams,
    alloc: WeightAllocation,
    message: int,
    trials: int,
    seed: int,
) -> MonteCarloCost:
    """Estimate the download cost by running retrievals.

    Trials are run in chunks of ``CHUNK_SIZE``, each chunk with its own
    random stream derived from the seed and the chunk number, so the
    outcome depends only on the seed and the number of trials. A chunk's
    keys are drawn together; every distinct key among them is retrieved
    and decoded once, and its download counted for every trial that drew
    it.

    Args:
        params: The scheme parameters.
        alloc: The weight allocation keys are drawn from.
        message: The 1-based index of the message to retrieve.
        trials: The number of retrievals to run.
        seed: The master seed.

    Returns:
        The estimate.

    Raises:
        InvalidParameters: If fewer than one trial is asked for.
        DecodeError: If a retrieval decodes the wrong message.
    """
    check_message(params, message)
    if trials < 1:
        raise InvalidParameters(f"trials must be >= 1 (got {trials})")
    store = MessageStore.from_seed(params, seed)
    expected = store.message(message)
    sampler = KeySampler(params, alloc)
    downloaded = np.empty(trials, dtype=np.int64)
    for chunk, start in enumerate(range(0, trials, CHUNK_SIZE)):
        stop = min(start + CHUNK_SIZE, trials)
        entries, offsets = sampler.draw_many(make_rng(seed, chunk), stop - start)
        keys, inverse = np.unique(
            np.column_stack((entries, offsets)), axis=0, return_inverse=True
        )
        LOG.debug(
            "Monte Carlo chunk %d: trials %d to %d over %d keys", chunk, start, stop, len(keys)
        )
        sizes = np.empty(len(keys), dtype=np.int64)
        for index, row in enumerate(keys.tolist()):
            key = RandomKey(KeyVector.of(row[:-1]), Permutation.shift(params.n_servers, row[-1]))
            transcript = retrieve(params, message, key, store)
            if transcript.decoded != expected:
                raise DecodeError(f"Chunk {chunk} decoded the wrong message: {transcript}")
            sizes[index] = transcript.downloaded_symbols
        downloaded[start:stop] = sizes[inverse.reshape(-1)]
    costs = downloaded / params.message_length
    std_error = float(costs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloCost(float(costs.mean()), std_error, trials)


##############################################################################
class CorrectnessReport(NamedTuple):
    """The outcome of an exhaustive decoding check."""

    ok: bool
    """Did every retrieval decode the right message?"""

    cases: int
    """The number of (message, key vector, permutation) cases checked."""

    failures: tuple[str, ...]
    """A description of every case that failed."""


##############################################################################
def verify_correctness(
    params: SchemeParams, scope: "PermutationScope | str", store_seed: int
) -> CorrectnessReport:
    """Check that every key in scope decodes every message correctly.

    Args:
        params: The scheme parameters.
        scope: The permutations to check.
        store_seed: The seed for the random message store.

    Returns:
        The report of the check.

    Raises:
        GuardExceeded: If the enumeration would be too big.
    """
    scope = PermutationScope.parse(scope)
    _check_audit_size(params, scope)
    store = MessageStore.from_seed(params, store_seed)
    keys = enumerate_keys(params)
    permutations = enumerate_permutations(params, scope.is_cyclic)
    failures: list[str] = []
    cases = 0
    for message in range(1, params.n_messages + 1):
        for f, pi in product(keys, permutations):
            cases += 1
            key = RandomKey(f, pi)
            answers = tuple(
                answer_query(params, query, store)
                for query in make_queries(params, message, key)
            )
            try:
                if decode(params, message, key, answers) != store.message(message):
                    failures.append(f"k={message} {key}: wrong message")
            except DecodeError as error:
                failures.append(f"k={message} {key}: {error}")
    LOG.info(
        "Checked %d cases over %s permutations: %d failures",
        cases,
        scope.value,
        len(failures),
    )
    return CorrectnessReport(not failures, cases, tuple(failures))


### audit.py ends here
