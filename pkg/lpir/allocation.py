"""Probability allocations over the random key of the TSC code.

Two views of an allocation are supported. A ``WeightAllocation`` is the
reduced view: one probability per Hamming-weight class of the key vector,
used with cyclic permutations only. A ``FullAllocation`` is the general
view: a (sparse) probability for every message, key vector and
permutation.
"""

##############################################################################
# Python compatibility hackage.
from __future__ import annotations

##############################################################################
# Python imports.
import json
import math
from functools import lru_cache
from typing import Callable, Final, Iterator, Mapping, NamedTuple, Sequence

##############################################################################
# Backward compatibility.
from typing_extensions import Self, TypeAlias

##############################################################################
# Local imports.
from .core import (
    KeyVector,
    Permutation,
    SchemeParams,
    check_guard,
    decode_vector,
    encode_vector,
    enumerate_keys,
    enumerate_permutations,
    enumeration_guard,
    key_class_sizes,
    new_params,
)
from .types import InvalidParameters, PermutationScope

##############################################################################
IDENTITY_TOLERANCE: Final[float] = 1e-12
"""Tolerance for identities such as normalisation."""

INEQUALITY_TOLERANCE: Final[float] = 1e-9
"""Tolerance for audited inequalities such as the DP ratio bound."""


##############################################################################
def log_mixture(params: SchemeParams) -> float:
    """Compute ln(e^epsilon + N - 1) without overflowing.

    Args:
        params: The scheme parameters.

    Returns:
        The logarithm.
    """
    return params.epsilon + math.log1p((params.n_servers - 1) * math.exp(-params.epsilon))


##############################################################################
class WeightAllocation(NamedTuple):
    """A probability per Hamming-weight class of the key vector.

    ``probs[j]`` is the probability of each individual key (f, pi) with
    ``||f|| == j`` and cyclic ``pi``.
    """

    params: SchemeParams
    """The parameters the allocation was made for."""

    probs: tuple[float, ...]
    """The probabilities p_0 to p_{K-1}."""

    def to_json(self) -> str:
        """Serialise the allocation.

        Returns:
            The allocation as a JSON object.
        """
        return json.dumps(
            {
                "n": self.params.n_servers,
                "k": self.params.n_messages,
                "epsilon": self.params.epsilon,
                "probs": list(self.probs),
            }
        )

    @classmethod
    def from_json(cls, data: str) -> Self:
        """Load an allocation.

        Args:
            data: The JSON object to load.

        Returns:
            The allocation.

        Raises:
            InvalidParameters: If the JSON doesn't describe an allocation.
        """
        try:
            loaded = json.loads(data)
            params = new_params(int(loaded["n"]), int(loaded["k"]), float(loaded["epsilon"]))
            probs = tuple(float(prob) for prob in loaded["probs"])
        except (ValueError, KeyError, TypeError) as error:
            raise InvalidParameters(f"Not a weight allocation: {error}") from error
        if len(probs) != params.n_messages:
            raise InvalidParameters(
                f"Allocation needs {params.n_messages} probabilities (got {len(probs)})"
            )
        return cls(params, probs)


##############################################################################
class ValidationReport(NamedTuple):
    """The outcome of checking a weight allocation against the reduced problem."""

    normalization_ok: bool
    """Does the allocation sum to 1 over all keys?"""

    nonneg_ok: bool
    """Are all the probabilities non-negative?"""

    dp_ok: bool
    """Do adjacent classes stay within a ratio of e^epsilon?"""

    worst_ratio_log: float
    """The largest |ln(p_j / p_{j+1})| over adjacent classes."""

    details: tuple[str, ...]
    """A description of every violated constraint."""

    @property
    def ok(self) -> bool:
        """Does the allocation satisfy every constraint?"""
        return self.normalization_ok and self.nonneg_ok and self.dp_ok


##############################################################################
def _log(prob: float) -> float:
    """The logarithm of a probability, with anything not positive as -inf."""
    return math.log(prob) if prob > 0 else -math.inf


##############################################################################
def _log_ratio(upper: float, lower: float) -> float:
    """The difference of two log-probabilities.

    Args:
        upper: The log of the numerator.
        lower: The log of the denominator.

    Returns:
        upper - lower, with 0/0 taken as 0 and x/0 as infinity.
    """
    if upper == -math.inf:
        return 0.0 if lower == -math.inf else -math.inf
    if lower == -math.inf:
        return math.inf
    return upper - lower


##############################################################################
def _check_adjacent(
    params: SchemeParams, log_probs: Sequence[float], details: list[str]
) -> tuple[bool, float]:
    """Check the ratio of every pair of adjacent weight classes.

    Args:
        params: The scheme parameters.
        log_probs: The log of each class probability.
        details: Where to describe any violated constraint.

    Returns:
        Whether every ratio is within e^epsilon, and the worst log-ratio.
    """
    worst = 0.0
    limit = params.epsilon + INEQUALITY_TOLERANCE
    for j in range(params.n_messages - 1):
        forward = _log_ratio(log_probs[j], log_probs[j + 1])
        worst = max(worst, abs(forward))
        if forward > limit:
            details.append(f"p_{j} > e^eps p_{j + 1}")
        if -forward > limit:
            details.append(f"p_{j + 1} > e^eps p_{j}")
    return worst <= limit, worst


##############################################################################
def validate(params: SchemeParams, alloc: WeightAllocation) -> ValidationReport:
    """Check a weight allocation against the constraints of the reduced problem.

    The ratio constraints are compared as log-ratios, so any epsilon that
    is finite can be checked. A probability that has underflowed to zero
    still reads as zero, though, so the optimal allocation at a large
    K epsilon (where its tail classes fall below the smallest double)
    fails here; check its logarithms with ``validate_log_probs`` instead.

    Args:
        params: The scheme parameters.
        alloc: The allocation to check.

    Returns:
        A report of which constraints hold.

    Raises:
        InvalidParameters: If the allocation is the wrong length.
    """
    if len(alloc.probs) != params.n_messages:
        raise InvalidParameters(
            f"Allocation needs {params.n_messages} probabilities (got {len(alloc.probs)})"
        )
    details: list[str] = []
    probs = alloc.probs

    nonneg_ok = all(prob >= 0 for prob in probs)
    if not nonneg_ok:
        details.extend(f"p_{j} = {prob} < 0" for j, prob in enumerate(probs) if prob < 0)

    total = params.n_servers * math.fsum(
        size * prob for size, prob in zip(key_class_sizes(params), probs)
    )
    normalization_ok = abs(total - 1.0) <= IDENTITY_TOLERANCE
    if not normalization_ok:
        details.append(f"sum of N s_j p_j = {total!r}, not 1")

    dp_ok, worst = _check_adjacent(params, [_log(prob) for prob in probs], details)
    return ValidationReport(normalization_ok, nonneg_ok, dp_ok, worst, tuple(details))


##############################################################################
def validate_log_probs(params: SchemeParams, log_probs: Sequence[float]) -> ValidationReport:
    """Check a weight allocation, given as logarithms, against the reduced problem.

    Args:
        params: The scheme parameters.
        log_probs: ln p_0 to ln p_{K-1}; ``-math.inf`` for a zero.

    Returns:
        A report of which constraints hold.

    Raises:
        InvalidParameters: If there are the wrong number of logarithms.
    """
    if len(log_probs) != params.n_messages:
        raise InvalidParameters(
            f"Allocation needs {params.n_messages} probabilities (got {len(log_probs)})"
        )
    details: list[str] = []
    log_n = math.log(params.n_servers)
    total = math.fsum(
        math.exp(log_n + math.log(size) + log_prob)
        for size, log_prob in zip(key_class_sizes(params), log_probs)
    )
    normalization_ok = abs(total - 1.0) <= IDENTITY_TOLERANCE
    if not normalization_ok:
        details.append(f"sum of N s_j p_j = {total!r}, not 1")
    dp_ok, worst = _check_adjacent(params, log_probs, details)
    return ValidationReport(normalization_ok, True, dp_ok, worst, tuple(details))


##############################################################################
def class_probabilities(params: SchemeParams, alloc: WeightAllocation) -> tuple[float, ...]:
    """The total mass of each weight class, N s_j p_j.

    Args:
        params: The scheme parameters.
        alloc: The allocation.

    Returns:
        The probability of drawing a key from each weight class.
    """
    return tuple(
        params.n_servers * size * prob
        for size, prob in zip(key_class_sizes(params), alloc.probs)
    )


##############################################################################
AllocationBuilder: TypeAlias = Callable[[SchemeParams], WeightAllocation]
"""Type of a function that builds an allocation for some parameters."""

_SCHEMES: dict[str, AllocationBuilder] = {}
"""Holds the allocation scheme registry."""


##############################################################################
def scheme(name: str) -> Callable[[AllocationBuilder], AllocationBuilder]:
    """Decorator for registering a named allocation scheme.

    Args:
        name: The name of the scheme.

    Returns:
        The decorator wrapper.
    """

    def _register(builder: AllocationBuilder) -> AllocationBuilder:
        """Inner decorator function."""
        _SCHEMES[name] = builder
        return builder

    return _register


##############################################################################
def scheme_names() -> tuple[str, ...]:
    """The names of all the registered allocation schemes."""
    return tuple(sorted(_SCHEMES))


##############################################################################
def allocation_for(name: str, params: SchemeParams) -> WeightAllocation:
    """Build an allocation by scheme name.

    Args:
        name: The name of the scheme.
        params: The scheme parameters.

    Returns:
        The allocation.

    Raises:
        InvalidParameters: If the scheme is unknown.
    """
    try:
        builder = _SCHEMES[name]
    except KeyError as error:
        raise InvalidParameters(
            f"Unknown allocation scheme: {name!r} (expected one of {', '.join(scheme_names())})"
        ) from error
    return builder(params)


##############################################################################
@scheme("tsc")
def optimal_allocation(params: SchemeParams) -> WeightAllocation:
    """The optimal layered allocation.

    Each weight class gets e^epsilon times the probability of the class
    above it: p_j = e^{(K-1-j) eps} / (N (e^eps + N - 1)^{K-1}).

    Args:
        params: The scheme parameters.

    Returns:
        The allocation.
    """
    return WeightAllocation(
        params, tuple(math.exp(log_prob) for log_prob in optimal_log_probs(params))
    )


##############################################################################
def optimal_log_probs(params: SchemeParams) -> tuple[float, ...]:
    """The logarithms of the optimal layered allocation.

    These stay exact where the probabilities themselves underflow.

    Args:
        params: The scheme parameters.

    Returns:
        ln p_0 to ln p_{K-1}.
    """
    log_denominator = math.log(params.n_servers) + params.key_length * log_mixture(params)
    return tuple(
        (params.key_length - j) * params.epsilon - log_denominator
        for j in range(params.n_messages)
    )


##############################################################################
@scheme("samy")
def samy_allocation(params: SchemeParams) -> WeightAllocation:
    """The allocation that only biases the direct download pattern.

    Args:
        params: The scheme parameters.

    Returns:
        The allocation, with one probability for the weight-0 class and a
        flat probability for every other class.
    """
    n_servers, n_messages = params.n_servers, params.n_messages
    # p_0 = e^eps / (N e^eps + N^K - N), written to survive a large epsilon.
    direct = 1.0 / (
        n_servers + (float(n_servers) ** n_messages - n_servers) * math.exp(-params.epsilon)
    )
    # Every other class is a factor of e^eps below it.
    rest = direct * math.exp(-params.epsilon)
    return WeightAllocation(params, (direct,) + (rest,) * params.key_length)


##############################################################################
FullKey: TypeAlias = "tuple[int, int, int]"
"""Type of a full-allocation table key: (message, key code, permutation code)."""


##############################################################################
@lru_cache(maxsize=32)
def _permutations(params: SchemeParams, scope: PermutationScope) -> tuple[Permutation, ...]:
    """Cached permutation enumeration."""
    return enumerate_permutations(params, scope.is_cyclic)


##############################################################################
class FullAllocation:
    """A probability for every (message, key vector, permutation).

    Only the non-zero entries are held, grouped by message and keyed by the
    integer encodings of the key vector and the permutation.
    """

    def __init__(
        self,
        params: SchemeParams,
        scope: PermutationScope,
        table: Mapping[FullKey, float],
        tolerance: float = IDENTITY_TOLERANCE,
    ) -> None:
        """Constructor.

        Args:
            params: The scheme parameters.
            scope: The permutations the allocation ranges over.
            table: The probabilities, keyed by message and the integer
                encodings of the key vector and permutation.
            tolerance: How far from 1 each message's total may be.

        Raises:
            InvalidParameters: If an entry is negative, a message is out of
                range, or a message's probabilities don't sum to 1.
        """
        self._params = params
        self._scope = scope
        self._table: dict[int, dict[tuple[int, int], float]] = {
            message: {} for message in range(1, params.n_messages + 1)
        }
        for (message, key_code, pi_code), prob in table.items():
            if message not in self._table:
                raise InvalidParameters(f"Message index {message} is out of range")
            if prob < 0:
                raise InvalidParameters(
                    f"Full allocation entry for message {message} is negative: {prob}"
                )
            if prob:
                self._table[message][key_code, pi_code] = prob
        for message in self._table:
            if abs((total := self.total(message)) - 1.0) > tolerance:
                raise InvalidParameters(
                    f"Probabilities for message {message} sum to {total!r}, not 1"
                )

    @classmethod
    def from_entries(
        cls,
        params: SchemeParams,
        scope: PermutationScope,
        entries: Mapping[tuple[int, KeyVector, Permutation], float],
        tolerance: float = IDENTITY_TOLERANCE,
    ) -> Self:
        """Make a full allocation from decoded entries.

        Args:
            params: The scheme parameters.
            scope: The permutations the allocation ranges over.
            entries: The probabilities, keyed by (message, key, permutation).
            tolerance: How far from 1 each message's total may be.

        Returns:
            The allocation.
        """
        base = params.n_servers
        return cls(
            params,
            scope,
            {
                (message, encode_vector(key.entries, base), encode_vector(pi.mapping, base)): prob
                for (message, key, pi), prob in entries.items()
            },
            tolerance,
        )

    @property
    def params(self) -> SchemeParams:
        """The parameters the allocation was made for."""
        return self._params

    @property
    def scope(self) -> PermutationScope:
        """The permutations the allocation ranges over."""
        return self._scope

    @property
    def permutations(self) -> tuple[Permutation, ...]:
        """All the permutations in the allocation's scope."""
        return _permutations(self._params, self._scope)

    def __len__(self) -> int:
        """The number of non-zero entries.

        Returns:
            The size of the support over all messages.
        """
        return sum(len(entries) for entries in self._table.values())

    def __getitem__(self, key: tuple[int, KeyVector, Permutation]) -> float:
        """Get the probability of a message, key vector and permutation.

        Returns:
            The probability, which is 0 outside the support.
        """
        message, vector, pi = key
        base = self._params.n_servers
        return self._table.get(message, {}).get(
            (encode_vector(vector.entries, base), encode_vector(pi.mapping, base)), 0.0
        )

    def entries(self, message: int) -> Iterator[tuple[KeyVector, Permutation, float]]:
        """The non-zero entries for one message, in canonical order.

        Args:
            message: The 1-based message index.

        Yields:
            The key vector, permutation and probability of each entry.
        """
        base = self._params.n_servers
        length = self._params.key_length
        permutations: dict[int, Permutation] = {}
        for (key_code, pi_code), prob in sorted(self._table.get(message, {}).items()):
            if (pi := permutations.get(pi_code)) is None:
                pi = permutations[pi_code] = Permutation.of(
                    decode_vector(pi_code, base, base)
                )
            yield KeyVector.of(decode_vector(key_code, base, length)), pi, prob

    def support_size(self, message: int) -> int:
        """The number of non-zero entries for one message.

        Args:
            message: The 1-based message index.

        Returns:
            The count of entries.
        """
        return len(self._table.get(message, {}))

    def total(self, message: int) -> float:
        """The total probability for one message.

        Args:
            message: The 1-based message index.

        Returns:
            The sum of the message's entries.
        """
        return math.fsum(self._table.get(message, {}).values())

    def __repr__(self) -> str:
        return (
            f"<{self.__class__.__name__}: N={self._params.n_servers} "
            f"K={self._params.n_messages} {self._scope.value} ({len(self)} entries)>"
        )


##############################################################################
def _check_table_size(params: SchemeParams, scope: PermutationScope) -> None:
    """Ensure a full table for the parameters stays within the guard.

    Args:
        params: The scheme parameters.
        scope: The permutations the table ranges over.
    """
    check_guard(
        "Full allocation table",
        params.n_messages
        * params.n_servers**params.key_length
        * (params.n_servers if scope.is_cyclic else math.factorial(params.n_servers)),
        enumeration_guard(),
    )


##############################################################################
def expand_to_full(params: SchemeParams, alloc: WeightAllocation) -> FullAllocation:
    """Expand a weight allocation to the full (message, key, permutation) table.

    Args:
        params: The scheme parameters.
        alloc: The weight allocation.

    Returns:
        The full allocation, over cyclic permutations only.

    Raises:
        GuardExceeded: If the table would be too big.
    """
    _check_table_size(params, PermutationScope.CYCLIC)
    permutations = enumerate_permutations(params, cyclic_only=True)
    keys = enumerate_keys(params)
    return FullAllocation.from_entries(
        params,
        PermutationScope.CYCLIC,
        {
            (message, key, pi): alloc.probs[key.weight]
            for message in range(1, params.n_messages + 1)
            for key in keys
            for pi in permutations
        },
    )


##############################################################################
def uniform_full_allocation(
    params: SchemeParams, scope: "PermutationScope | str"
) -> FullAllocation:
    """Spread the probability evenly over every key in scope.

    Args:
        params: The scheme parameters.
        scope: The permutations to range over.

    Returns:
        The uniform full allocation.

    Raises:
        GuardExceeded: If the table would be too big.
    """
    scope = PermutationScope.parse(scope)
    _check_table_size(params, scope)
    permutations = enumerate_permutations(params, scope.is_cyclic)
    keys = enumerate_keys(params)
    mass = 1.0 / (len(keys) * len(permutations))
    return FullAllocation.from_entries(
        params,
        scope,
        {
            (message, key, pi): mass
            for message in range(1, params.n_messages + 1)
            for key in keys
            for pi in permutations
        },
    )


##############################################################################
def weight_allocation(params: SchemeParams, probs: Sequence[float]) -> WeightAllocation:
    """Wrap some user-supplied class probabilities as an allocation.

    Args:
        params: The scheme parameters.
        probs: The probabilities p_0 to p_{K-1}.

    Returns:
        The allocation; use ``validate`` to check it.

    Raises:
        InvalidParameters: If the wrong number of probabilities is given.
    """
    if len(probs) != params.n_messages:
        raise InvalidParameters(
            f"Allocation needs {params.n_messages} probabilities (got {len(probs)})"
        )
    return WeightAllocation(params, tuple(float(prob) for prob in probs))


### allocation.py ends here
