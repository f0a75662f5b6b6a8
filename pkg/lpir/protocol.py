"""The permuted TSC code: keys, queries, answers and decoding.

Each of the N servers holds all K messages. A message is N-1 symbols long,
with an implicit zero dummy symbol at index 0. A query asks a server for
the XOR of one symbol of every message; the user draws a random key
(F, pi) and builds one query per server so that exactly one server
returns the interference and the rest return a desired symbol masked by
it.
"""

##############################################################################
# Python compatibility hackage.
from __future__ import annotations

##############################################################################
# Python imports.
import logging
import math
import string
from bisect import bisect_right
from itertools import accumulate, product
from typing import Any, Final, NamedTuple, Optional, Sequence

##############################################################################
# Backward compatibility.
from typing_extensions import Self

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .allocation import WeightAllocation, class_probabilities
from .core import (
    KeyVector,
    Permutation,
    QueryVector,
    SchemeParams,
    check_guard,
    check_key,
    check_permutation,
    enumerate_keys,
    enumerate_permutations,
    enumeration_guard,
    unrank_combination,
)
from .types import DecodeError, InvalidParameters, PermutationScope

##############################################################################
LOG: Final = logging.getLogger(__name__)
"""The logger for this module."""

SYMBOL_BITS: Final[int] = 8
"""The width of a symbol; symbols are added with XOR."""


##############################################################################
def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Make a deterministic, counter-based random number generator.

    Args:
        seed: The master seed.
        spawn_key: Extra indices (a trial or chunk number, say) that pick
            an independent stream under the same master seed.

    Returns:
        The generator.
    """
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(spawn_key)))
    )


##############################################################################
def check_message(params: SchemeParams, message: int) -> None:
    """Ensure a message index is in range.

    Args:
        params: The scheme parameters.
        message: The 1-based message index.

    Raises:
        InvalidParameters: If the index isn't in [1:K].
    """
    if not 1 <= message <= params.n_messages:
        raise InvalidParameters(
            f"Message index must be in [1:{params.n_messages}] (got {message})"
        )


##############################################################################
class MessageStore:
    """The K messages every server holds."""

    def __init__(self, params: SchemeParams, messages: Sequence[bytes]) -> None:
        """Constructor.

        Args:
            params: The scheme parameters.
            messages: The K messages, each N-1 symbols long; the dummy
                symbol at index 0 is not included.

        Raises:
            InvalidParameters: If the messages are the wrong shape.
        """
        if len(messages) != params.n_messages:
            raise InvalidParameters(
                f"Store needs {params.n_messages} messages (got {len(messages)})"
            )
        if any(len(message) != params.message_length for message in messages):
            raise InvalidParameters(
                f"Every message must be {params.message_length} symbols long"
            )
        self._params = params
        # Prepend the dummy zero symbol so that index 0 reads as zero.
        self._symbols = tuple(b"\0" + bytes(message) for message in messages)

    @classmethod
    def from_bytes(cls, params: SchemeParams, data: bytes) -> Self:
        """Load a store from raw bytes.

        Args:
            params: The scheme parameters.
            data: K * (N-1) bytes, message by message.

        Returns:
            The store.

        Raises:
            InvalidParameters: If there is the wrong amount of data.
        """
        length = params.message_length
        if len(data) != params.n_messages * length:
            raise InvalidParameters(
                f"Store needs {params.n_messages * length} bytes (got {len(data)})"
            )
        return cls(
            params,
            [data[start : start + length] for start in range(0, len(data), length)],
        )

    @classmethod
    def from_seed(cls, params: SchemeParams, seed: int) -> Self:
        """Fill a store with random symbols.

        Args:
            params: The scheme parameters.
            seed: The seed for the symbols.

        Returns:
            The store.
        """
        return cls.from_bytes(
            params,
            make_rng(seed)
            .integers(0, 2**SYMBOL_BITS, size=params.n_messages * params.message_length, dtype=np.uint8)
            .tobytes(),
        )

    @property
    def params(self) -> SchemeParams:
        """The parameters the store was made for."""
        return self._params

    def symbol(self, message: int, index: int) -> int:
        """Read a symbol.

        Args:
            message: The 1-based message index.
            index: The symbol index, in [0:N-1]; index 0 is always zero.

        Returns:
            The symbol.
        """
        return self._symbols[message - 1][index]

    def message(self, message: int) -> bytes:
        """Get a whole message, without its dummy symbol.

        Args:
            message: The 1-based message index.

        Returns:
            The N-1 symbols of the message.
        """
        return self._symbols[message - 1][1:]

    def to_bytes(self) -> bytes:
        """The store as raw bytes, message by message."""
        return b"".join(symbols[1:] for symbols in self._symbols)


##############################################################################
class RandomKey(NamedTuple):
    """The user's private randomness for one retrieval."""

    f: KeyVector
    """The key vector that picks the interference."""

    pi: Permutation
    """The permutation of the server roles."""

    def __str__(self) -> str:
        return f"F={self.f} pi={self.pi}"


##############################################################################
class Answer(NamedTuple):
    """A server's answer: nothing, or a single symbol."""

    payload: bytes
    """The answer's symbols; empty for the all-zero query."""

    @property
    def size(self) -> int:
        """The number of symbols downloaded for this answer."""
        return len(self.payload)

    @property
    def is_empty(self) -> bool:
        """Is this an empty answer?"""
        return not self.payload

    @property
    def symbol(self) -> int:
        """The answer's symbol, with an empty answer reading as zero."""
        return self.payload[0] if self.payload else 0


##############################################################################
class RetrievalTranscript(NamedTuple):
    """Everything that happened during one retrieval."""

    message: int
    """The 1-based index of the message retrieved."""

    key: RandomKey
    """The random key that was drawn."""

    queries: tuple[QueryVector, ...]
    """The query sent to each server."""

    answers: tuple[Answer, ...]
    """The answer from each server."""

    decoded: bytes
    """The decoded message."""

    downloaded_symbols: int
    """The total number of symbols downloaded."""

    def as_dict(self) -> dict[str, Any]:
        """The transcript as a JSON-friendly dictionary."""
        return {
            "message": self.message,
            "key": {"f": list(self.key.f.entries), "pi": list(self.key.pi.mapping)},
            "queries": [str(query) for query in self.queries],
            "answers": [answer.payload.hex() for answer in self.answers],
            "decoded": self.decoded.hex(),
            "downloaded_symbols": self.downloaded_symbols,
        }


##############################################################################
class KeySampler:
    """Draws random keys from a weight allocation over cyclic permutations."""

    def __init__(self, params: SchemeParams, alloc: WeightAllocation) -> None:
        """Constructor.

        Args:
            params: The scheme parameters.
            alloc: The weight allocation to draw from.
        """
        self._params = params
        self._cumulative = tuple(accumulate(class_probabilities(params, alloc)))

    def __call__(self, rng: np.random.Generator) -> RandomKey:
        """Draw a key.

        Args:
            rng: The generator to draw with.

        Returns:
            A random key with a cyclic permutation.
        """
        params = self._params
        # First pick the weight class, with probability N s_j p_j...
        weight = min(
            bisect_right(self._cumulative, rng.random() * self._cumulative[-1]),
            params.key_length,
        )
        # ...then a uniform vector of that weight...
        entries = [0] * params.key_length
        if weight:
            positions = unrank_combination(
                params.key_length,
                weight,
                int(rng.integers(math.comb(params.key_length, weight))),
            )
            for position, value in zip(
                positions, rng.integers(1, params.n_servers, size=weight)
            ):
                entries[position] = int(value)
        # ...and finally a uniform cyclic permutation.
        return RandomKey(
            KeyVector(tuple(entries), weight),
            Permutation.shift(params.n_servers, int(rng.integers(params.n_servers))),
        )

    def draw_many(self, rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw many keys at once.

        The keys follow the same distribution as single draws, but not
        the same random stream.

        Args:
            rng: The generator to draw with.
            count: The number of keys to draw.

        Returns:
            The key vectors, one to a row, and the offset pi(1) of each
            key's cyclic permutation.
        """
        params = self._params
        length = params.key_length
        cumulative = np.asarray(self._cumulative)
        weights = np.minimum(
            np.searchsorted(cumulative, rng.random(count) * cumulative[-1], side="right"),
            length,
        )
        # The non-zero positions are the first `weight` of a random ordering.
        order = np.argsort(rng.random((count, length)), axis=1)
        symbols = np.where(
            np.arange(length) < weights[:, None],
            rng.integers(1, params.n_servers, size=(count, length)),
            0,
        )
        entries = np.zeros((count, length), dtype=np.int64)
        np.put_along_axis(entries, order, symbols, axis=1)
        return entries, rng.integers(params.n_servers, size=count)


##############################################################################
def sample_key(
    params: SchemeParams,
    alloc: WeightAllocation,
    message: int,
    rng: np.random.Generator,
) -> RandomKey:
    """Draw a random key for retrieving a message.

    Args:
        params: The scheme parameters.
        alloc: The weight allocation to draw from.
        message: The 1-based index of the message to retrieve.
        rng: The generator to draw with.

    Returns:
        The random key.
    """
    check_message(params, message)
    return KeySampler(params, alloc)(rng)


##############################################################################
def check_random_key(params: SchemeParams, key: RandomKey) -> None:
    """Ensure a random key suits the parameters.

    Args:
        params: The scheme parameters.
        key: The key to check.

    Raises:
        InvalidParameters: If the key vector or the permutation is malformed.
    """
    check_key(params, key.f)
    check_permutation(params, key.pi)


##############################################################################
def make_queries(
    params: SchemeParams, message: int, key: RandomKey
) -> tuple[QueryVector, ...]:
    """Build the query for every server.

    The query to server n is the key vector with the retrieval symbol
    (pi(n) - sum(F)) mod N inserted at position k.

    Args:
        params: The scheme parameters.
        message: The 1-based index of the message to retrieve.
        key: The random key.

    Returns:
        The N queries, one per server.

    Raises:
        InvalidParameters: If the message index is out of range or the
            key is malformed.
    """
    check_message(params, message)
    check_random_key(params, key)
    head = key.f.entries[: message - 1]
    tail = key.f.entries[message - 1 :]
    offset = sum(key.f.entries)
    return tuple(
        QueryVector(
            head + (retrieval,) + tail,
            key.f.weight + (1 if retrieval else 0),
        )
        for retrieval in (
            (key.pi.image(server) - offset) % params.n_servers
            for server in range(1, params.n_servers + 1)
        )
    )


##############################################################################
def answer_query(params: SchemeParams, query: QueryVector, store: MessageStore) -> Answer:
    """Answer a query as a server would.

    Args:
        params: The scheme parameters.
        query: The query.
        store: The messages the server holds.

    Returns:
        The XOR of W_m[q_m] over every message m, or an empty answer for
        the all-zero query.

    Raises:
        InvalidParameters: If the query is malformed.
    """
    if len(query.entries) != params.n_messages:
        raise InvalidParameters(
            f"Query must have {params.n_messages} entries (got {len(query.entries)})"
        )
    if any(not 0 <= entry < params.n_servers for entry in query.entries):
        raise InvalidParameters(
            f"Query entries must be in [0:{params.n_servers - 1}]: {query.entries}"
        )
    if query.is_zero:
        return Answer(b"")
    symbol = 0
    for message, index in enumerate(query.entries, start=1):
        symbol ^= store.symbol(message, index)
    return Answer(bytes((symbol,)))


##############################################################################
def decode(
    params: SchemeParams, message: int, key: RandomKey, answers: Sequence[Answer]
) -> bytes:
    """Decode a message from the servers' answers.

    The server whose retrieval symbol is 0 returns the interference alone
    (nothing at all for a direct download); XORing it out of every other
    answer leaves the desired symbols.

    Args:
        params: The scheme parameters.
        message: The 1-based index of the message being retrieved.
        key: The random key the queries were made with.
        answers: The answer from each server.

    Returns:
        The N-1 symbols of the message.

    Raises:
        InvalidParameters: If the message index is out of range or the
            key is malformed.
        DecodeError: If the answers don't fit the key.
    """
    check_message(params, message)
    check_random_key(params, key)
    if len(answers) != params.n_servers:
        raise DecodeError(f"Expected {params.n_servers} answers (got {len(answers)})")
    offset = sum(key.f.entries) % params.n_servers
    interference_server = key.pi.server_for(offset)
    interference = answers[interference_server - 1]
    if interference.is_empty != key.f.is_zero:
        raise DecodeError(
            f"Server {interference_server} should return "
            f"{'nothing' if key.f.is_zero else 'the interference'} for key {key}"
        )
    decoded = bytearray(params.message_length)
    for server, answer in enumerate(answers, start=1):
        if server == interference_server:
            continue
        if answer.size != 1:
            raise DecodeError(
                f"Server {server} returned {answer.size} symbols, expected 1, for key {key}"
            )
        decoded[(key.pi.image(server) - offset) % params.n_servers - 1] = (
            answer.symbol ^ interference.symbol
        )
    return bytes(decoded)


##############################################################################
def run_retrieval(
    params: SchemeParams,
    alloc: WeightAllocation,
    message: int,
    store: MessageStore,
    rng: np.random.Generator,
    sampler: Optional[KeySampler] = None,
) -> RetrievalTranscript:
    """Run one retrieval against simulated servers.

    Args:
        params: The scheme parameters.
        alloc: The weight allocation to draw keys from.
        message: The 1-based index of the message to retrieve.
        store: The messages the servers hold.
        rng: The generator to draw the key with.
        sampler: An optional ready-made key sampler for ``alloc``.

    Returns:
        The transcript of the retrieval.

    Raises:
        DecodeError: If decoding fails.
    """
    check_message(params, message)
    return retrieve(params, message, (sampler or KeySampler(params, alloc))(rng), store)


##############################################################################
def retrieve(
    params: SchemeParams, message: int, key: RandomKey, store: MessageStore
) -> RetrievalTranscript:
    """Retrieve a message with a given key from simulated servers.

    Args:
        params: The scheme parameters.
        message: The 1-based index of the message to retrieve.
        key: The random key to build the queries from.
        store: The messages the servers hold.

    Returns:
        The transcript of the retrieval.

    Raises:
        InvalidParameters: If the message index or the key is malformed.
        DecodeError: If decoding fails.
    """
    queries = make_queries(params, message, key)
    answers = tuple(answer_query(params, query, store) for query in queries)
    return RetrievalTranscript(
        message=message,
        key=key,
        queries=queries,
        answers=answers,
        decoded=decode(params, message, key, answers),
        downloaded_symbols=sum(answer.size for answer in answers),
    )


##############################################################################
class CodeRow(NamedTuple):
    """One row of a symbolic code table."""

    key: RandomKey
    """The random key of the row."""

    queries: tuple[str, ...]
    """The query to each server, as a string of digits."""

    answers: tuple[str, ...]
    """The answer from each server, written symbolically."""


##############################################################################
def symbolic_answer(query: QueryVector) -> str:
    """Write the answer to a query symbolically.

    Message 1 is written ``a``, message 2 ``b`` and so on, so the answer
    to query ``11`` is ``a1+b1``.

    Args:
        query: The query.

    Returns:
        The answer, with the empty answer written as an empty string.
    """
    return "+".join(
        f"{string.ascii_lowercase[message]}{index}"
        for message, index in enumerate(query.entries)
        if index
    )


##############################################################################
def code_table(
    params: SchemeParams, message: int, scope: "PermutationScope | str"
) -> tuple[CodeRow, ...]:
    """Build the symbolic code table for retrieving one message.

    Args:
        params: The scheme parameters.
        message: The 1-based index of the message.
        scope: The permutations to tabulate.

    Returns:
        A row for every key vector and permutation in scope.

    Raises:
        InvalidParameters: If there are too many messages to letter.
        GuardExceeded: If the table would be too big.
    """
    check_message(params, message)
    if params.n_messages > len(string.ascii_lowercase):
        raise InvalidParameters(
            f"Symbolic tables need K <= {len(string.ascii_lowercase)} (got {params.n_messages})"
        )
    scope = PermutationScope.parse(scope)
    permutations = enumerate_permutations(params, scope.is_cyclic)
    check_guard(
        "Code table",
        params.n_servers**params.key_length * len(permutations),
        enumeration_guard(),
    )
    rows = []
    for f, pi in product(enumerate_keys(params), permutations):
        queries = make_queries(params, message, RandomKey(f, pi))
        rows.append(
            CodeRow(
                RandomKey(f, pi),
                tuple(str(query) for query in queries),
                tuple(symbolic_answer(query) for query in queries),
            )
        )
    return tuple(rows)


### protocol.py ends here
