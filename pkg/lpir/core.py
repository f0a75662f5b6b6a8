"""Scheme parameters, key/query vectors, permutations and their combinatorics.

Everything else in the library is built on the values defined here. All of
them are immutable, and every function in this module is pure.
"""

##############################################################################
# Python compatibility hackage.
from __future__ import annotations

##############################################################################
# Python imports.
import logging
import math
import os
from itertools import combinations, permutations, product
from typing import Final, Iterable, NamedTuple, Optional, Sequence

##############################################################################
# Backward compatibility.
from typing_extensions import Self

##############################################################################
# Local imports.
from .types import GuardExceeded, InvalidParameters

##############################################################################
LOG: Final = logging.getLogger(__name__)
"""The logger for this module."""

##############################################################################
PERMUTATION_GUARD: Final[int] = 5040
"""The largest N! we're willing to enumerate permutation by permutation."""

TABLE_GUARD: Final[int] = 10**7
"""The default largest table (of keys, or allocation entries) we'll build."""

GUARD_ENVIRONMENT: Final[str] = "LPIR_ENUMERATION_GUARD"
"""Environment variable that can override the enumeration guards."""

INT64_LIMIT: Final[int] = 2**63
"""Class sizes must stay below this to fit the 64-bit contract."""


##############################################################################
def enumeration_guard(default: int = TABLE_GUARD) -> int:
    """Get the enumeration guard in effect.

    Args:
        default: The guard to use if the environment doesn't override it.

    Returns:
        The largest enumeration size that's allowed.

    Note:
        If ``LPIR_ENUMERATION_GUARD`` is set to a positive integer that
        value is used in place of ``default``.
    """
    if override := os.environ.get(GUARD_ENVIRONMENT, "").strip():
        try:
            if (value := int(override)) > 0:
                return value
        except ValueError:
            pass
        LOG.warning("Ignoring bad %s value: %r", GUARD_ENVIRONMENT, override)
    return default


##############################################################################
def check_guard(what: str, size: int, limit: int) -> None:
    """Ensure that an enumeration stays within its guard.

    Args:
        what: A description of what's being enumerated.
        size: The size of the enumeration.
        limit: The guard for the enumeration.

    Raises:
        GuardExceeded: If ``size`` is over ``limit``.
    """
    LOG.debug("Guard check for %s: %d of %d", what, size, limit)
    if size > limit:
        raise GuardExceeded(f"{what} needs {size} entries, over the limit of {limit}")


##############################################################################
class SchemeParams(NamedTuple):
    """The parameters of a leaky PIR setting."""

    n_servers: int
    """The number of non-colluding servers, N."""

    n_messages: int
    """The number of messages, K."""

    epsilon: float = 0.0
    """The leakage ratio exponent, in nats."""

    @property
    def message_length(self) -> int:
        """The length of each message in symbols, L = N-1."""
        return self.n_servers - 1

    @property
    def key_length(self) -> int:
        """The length of the key vector F, K-1."""
        return self.n_messages - 1

    def with_epsilon(self, epsilon: float) -> Self:
        """Get a copy of the parameters with a different epsilon.

        Args:
            epsilon: The new leakage ratio exponent.

        Returns:
            The validated parameters.
        """
        return new_params(self.n_servers, self.n_messages, epsilon)

    def as_dict(self) -> dict[str, float]:
        """The parameters as a JSON-friendly dictionary."""
        return {"n": self.n_servers, "k": self.n_messages, "epsilon": self.epsilon}


##############################################################################
def new_params(n_servers: int, n_messages: int, epsilon: float = 0.0) -> SchemeParams:
    """Create a validated set of scheme parameters.

    Args:
        n_servers: The number of servers, N.
        n_messages: The number of messages, K.
        epsilon: The leakage ratio exponent, in nats.

    Returns:
        The parameters.

    Raises:
        InvalidParameters: If any of the values is out of range.
    """
    if isinstance(n_servers, bool) or not isinstance(n_servers, int):
        raise InvalidParameters(f"N must be an integer, not {n_servers!r}")
    if isinstance(n_messages, bool) or not isinstance(n_messages, int):
        raise InvalidParameters(f"K must be an integer, not {n_messages!r}")
    if n_servers < 2:
        raise InvalidParameters(f"N must be >= 2 (got {n_servers})")
    if n_messages < 2:
        raise InvalidParameters(f"K must be >= 2 (got {n_messages})")
    epsilon = float(epsilon)
    if not math.isfinite(epsilon):
        raise InvalidParameters(f"epsilon must be finite (got {epsilon})")
    if epsilon < 0:
        raise InvalidParameters(f"epsilon must be >= 0 (got {epsilon})")
    return SchemeParams(n_servers, n_messages, epsilon)


##############################################################################
def _class_size(length: int, weight: int, alphabet: int) -> int:
    """Count the vectors of a given Hamming weight.

    Args:
        length: The length of the vectors.
        weight: The Hamming weight.
        alphabet: The size of the alphabet, N.

    Returns:
        C(length, weight) * (alphabet - 1)^weight.

    Raises:
        GuardExceeded: If the count doesn't fit in a signed 64-bit integer.
    """
    if (size := math.comb(length, weight) * (alphabet - 1) ** weight) >= INT64_LIMIT:
        raise GuardExceeded(
            f"Weight class {weight} of length {length} over N={alphabet} "
            f"has {size} members, which overflows 64 bits"
        )
    return size


##############################################################################
def key_class_size(params: SchemeParams, weight: int) -> int:
    """The number of key vectors with a given Hamming weight, s_j.

    Args:
        params: The scheme parameters.
        weight: The Hamming weight j, in [0:K-1].

    Returns:
        s_j = C(K-1, j) (N-1)^j.

    Raises:
        InvalidParameters: If ``weight`` is out of range.
    """
    if not 0 <= weight <= params.key_length:
        raise InvalidParameters(
            f"Key weight must be in [0:{params.key_length}] (got {weight})"
        )
    return _class_size(params.key_length, weight, params.n_servers)


##############################################################################
def query_class_size(params: SchemeParams, weight: int) -> int:
    """The number of query vectors with a given Hamming weight, t_j.

    Args:
        params: The scheme parameters.
        weight: The Hamming weight j, in [0:K].

    Returns:
        t_j = C(K, j) (N-1)^j.

    Raises:
        InvalidParameters: If ``weight`` is out of range.
    """
    if not 0 <= weight <= params.n_messages:
        raise InvalidParameters(
            f"Query weight must be in [0:{params.n_messages}] (got {weight})"
        )
    return _class_size(params.n_messages, weight, params.n_servers)


##############################################################################
def key_class_sizes(params: SchemeParams) -> tuple[int, ...]:
    """All of the key class sizes, s_0 to s_{K-1}."""
    return tuple(key_class_size(params, j) for j in range(params.n_messages))


##############################################################################
def _weight(entries: Iterable[int]) -> int:
    """The Hamming weight of some entries."""
    return sum(1 for entry in entries if entry)


##############################################################################
class KeyVector(NamedTuple):
    """The key vector F of a random key."""

    entries: tuple[int, ...]
    """The K-1 entries, each in [0:N-1]."""

    weight: int
    """The Hamming weight of the entries."""

    @classmethod
    def of(cls, entries: Iterable[int]) -> KeyVector:
        """Make a key vector from its entries.

        Args:
            entries: The entries of the vector.

        Returns:
            The key vector, with its weight worked out.
        """
        values = tuple(entries)
        return cls(values, _weight(values))

    @classmethod
    def zero(cls, params: SchemeParams) -> KeyVector:
        """The all-zero key vector for the given parameters."""
        return cls((0,) * params.key_length, 0)

    @property
    def is_zero(self) -> bool:
        """Is this the all-zero (direct download) key?"""
        return self.weight == 0

    def __str__(self) -> str:
        return "".join(str(entry) for entry in self.entries)


##############################################################################
class QueryVector(NamedTuple):
    """A query sent to one server."""

    entries: tuple[int, ...]
    """The K entries, each in [0:N-1]; entry m indexes message m+1."""

    weight: int
    """The Hamming weight of the entries."""

    @classmethod
    def of(cls, entries: Iterable[int]) -> QueryVector:
        """Make a query vector from its entries.

        Args:
            entries: The entries of the vector.

        Returns:
            The query vector, with its weight worked out.
        """
        values = tuple(entries)
        return cls(values, _weight(values))

    @property
    def is_zero(self) -> bool:
        """Is this the all-zero query?"""
        return self.weight == 0

    def without(self, message: int) -> KeyVector:
        """Remove the retrieval symbol for a message, giving q|k.

        Args:
            message: The 1-based index of the message.

        Returns:
            The query with entry ``message`` removed, as a key vector.
        """
        return KeyVector.of(self.entries[: message - 1] + self.entries[message:])

    def __str__(self) -> str:
        return "".join(str(entry) for entry in self.entries)


##############################################################################
class Permutation(NamedTuple):
    """A downshifted permutation of the servers, [1:N] -> [0:N-1]."""

    mapping: tuple[int, ...]
    """The values (pi(1), ..., pi(N))."""

    is_cyclic: bool
    """Does pi(n+1) = (pi(n) + 1) mod N hold for every n?"""

    @classmethod
    def of(cls, mapping: Iterable[int]) -> Permutation:
        """Make a permutation from its values.

        Args:
            mapping: The values (pi(1), ..., pi(N)).

        Returns:
            The permutation.

        Raises:
            InvalidParameters: If the values aren't a bijection onto [0:N-1].
        """
        values = tuple(mapping)
        size = len(values)
        if sorted(values) != list(range(size)):
            raise InvalidParameters(f"{values} is not a bijection onto [0:{size - 1}]")
        return cls(
            values,
            all(values[n + 1] == (values[n] + 1) % size for n in range(size - 1)),
        )

    @classmethod
    def shift(cls, n_servers: int, offset: int) -> Permutation:
        """Make the cyclic permutation that starts at a given value.

        Args:
            n_servers: The number of servers.
            offset: The value of pi(1).

        Returns:
            The cyclic permutation.
        """
        return cls(tuple((offset + n) % n_servers for n in range(n_servers)), True)

    def image(self, server: int) -> int:
        """Get pi(n).

        Args:
            server: The 1-based server index n.

        Returns:
            The value the server is mapped to.
        """
        return self.mapping[server - 1]

    def server_for(self, value: int) -> int:
        """Get the server n with pi(n) equal to a value.

        Args:
            value: The value in [0:N-1].

        Returns:
            The 1-based server index.
        """
        return self.mapping.index(value) + 1

    def __str__(self) -> str:
        return f"({','.join(str(value) for value in self.mapping)})"


##############################################################################
def encode_vector(entries: Sequence[int], base: int) -> int:
    """Encode a vector as a base-N integer, first entry most significant.

    Args:
        entries: The vector's entries.
        base: The base, N.

    Returns:
        The encoded value; the encoding preserves lexicographic order.
    """
    code = 0
    for entry in entries:
        code = code * base + entry
    return code


##############################################################################
def decode_vector(code: int, base: int, length: int) -> tuple[int, ...]:
    """Decode a base-N integer back into a vector.

    Args:
        code: The encoded value.
        base: The base, N.
        length: The length of the vector.

    Returns:
        The entries of the vector.
    """
    entries = []
    for _ in range(length):
        code, entry = divmod(code, base)
        entries.append(entry)
    return tuple(reversed(entries))


##############################################################################
def check_key(params: SchemeParams, key: KeyVector) -> None:
    """Ensure a key vector suits the parameters.

    Args:
        params: The scheme parameters.
        key: The key vector to check.

    Raises:
        InvalidParameters: If the key is the wrong length or has bad entries.
    """
    if len(key.entries) != params.key_length:
        raise InvalidParameters(
            f"Key vector must have {params.key_length} entries (got {len(key.entries)})"
        )
    if any(not 0 <= entry < params.n_servers for entry in key.entries):
        raise InvalidParameters(
            f"Key vector entries must be in [0:{params.n_servers - 1}]: {key.entries}"
        )


##############################################################################
def check_permutation(params: SchemeParams, pi: Permutation) -> None:
    """Ensure a permutation is over the right number of servers.

    Args:
        params: The scheme parameters.
        pi: The permutation to check.

    Raises:
        InvalidParameters: If the permutation has the wrong size or isn't a
            bijection.
    """
    if len(pi.mapping) != params.n_servers:
        raise InvalidParameters(
            f"Permutation must be over {params.n_servers} servers (got {len(pi.mapping)})"
        )
    if sorted(pi.mapping) != list(range(params.n_servers)):
        raise InvalidParameters(f"{pi.mapping} is not a bijection onto [0:{params.n_servers - 1}]")


##############################################################################
def enumerate_keys(
    params: SchemeParams, weight: Optional[int] = None
) -> tuple[KeyVector, ...]:
    """Enumerate the key vectors, optionally of one weight only.

    Args:
        params: The scheme parameters.
        weight: The Hamming weight to restrict to, or ``None`` for all.

    Returns:
        The key vectors in lexicographic order.

    Raises:
        InvalidParameters: If ``weight`` is out of range.
        GuardExceeded: If there would be too many keys.
    """
    length = params.key_length
    if weight is None:
        check_guard("Key enumeration", params.n_servers**length, enumeration_guard())
        return tuple(
            KeyVector.of(entries) for entries in product(range(params.n_servers), repeat=length)
        )
    check_guard("Key enumeration", key_class_size(params, weight), enumeration_guard())
    keys: list[tuple[int, ...]] = []
    for positions in combinations(range(length), weight):
        for values in product(range(1, params.n_servers), repeat=weight):
            entries = [0] * length
            for position, value in zip(positions, values):
                entries[position] = value
            keys.append(tuple(entries))
    return tuple(KeyVector(entries, weight) for entries in sorted(keys))


##############################################################################
def enumerate_permutations(
    params: SchemeParams, cyclic_only: bool
) -> tuple[Permutation, ...]:
    """Enumerate the server permutations.

    Args:
        params: The scheme parameters.
        cyclic_only: Only enumerate the N cyclic permutations?

    Returns:
        The permutations, in lexicographic order of their values.

    Raises:
        GuardExceeded: If a full enumeration would need more than
            ``PERMUTATION_GUARD`` permutations.
    """
    if cyclic_only:
        return tuple(
            Permutation.shift(params.n_servers, offset)
            for offset in range(params.n_servers)
        )
    check_guard(
        "Permutation enumeration", math.factorial(params.n_servers), PERMUTATION_GUARD
    )
    return tuple(Permutation.of(mapping) for mapping in permutations(range(params.n_servers)))


##############################################################################
def unrank_combination(size: int, choose: int, rank: int) -> tuple[int, ...]:
    """Find the combination at a given lexicographic rank.

    Args:
        size: The size of the set being chosen from, [0:size-1].
        choose: How many items are chosen.
        rank: The rank, in [0:C(size, choose)-1].

    Returns:
        The chosen positions, in increasing order.
    """
    chosen = []
    candidate = 0
    while choose:
        # Combinations that start with this candidate.
        if rank < (block := math.comb(size - candidate - 1, choose - 1)):
            chosen.append(candidate)
            choose -= 1
        else:
            rank -= block
        candidate += 1
    return tuple(chosen)


### core.py ends here
