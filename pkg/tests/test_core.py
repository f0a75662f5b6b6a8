"""Test the scheme parameters, vectors and enumerations."""

##############################################################################
# Python imports.
import math
import os
from itertools import combinations
from unittest import TestCase
from unittest.mock import patch

##############################################################################
# Library imports.
from lpir import GuardExceeded, InvalidParameters, KeyVector, Permutation, QueryVector
from lpir.core import (
    GUARD_ENVIRONMENT,
    check_key,
    check_permutation,
    decode_vector,
    encode_vector,
    enumerate_keys,
    enumerate_permutations,
    enumeration_guard,
    key_class_size,
    key_class_sizes,
    new_params,
    query_class_size,
    unrank_combination,
)

##############################################################################
# Local imports.
from . import LN2


##############################################################################
class TestParams(TestCase):
    """Scheme parameter tests."""

    def test_valid(self) -> None:
        """The smallest interesting setting should be accepted."""
        params = new_params(3, 2, LN2)
        self.assertEqual(params.n_servers, 3)
        self.assertEqual(params.n_messages, 2)
        self.assertEqual(params.message_length, 2)
        self.assertEqual(params.key_length, 1)

    def test_too_few_servers(self) -> None:
        """A single server should be rejected."""
        with self.assertRaisesRegex(InvalidParameters, "N must be >= 2"):
            new_params(1, 2)

    def test_too_few_messages(self) -> None:
        """A single message should be rejected."""
        with self.assertRaisesRegex(InvalidParameters, "K must be >= 2"):
            new_params(2, 1)

    def test_bad_epsilon(self) -> None:
        """Negative and non-finite exponents should be rejected."""
        for epsilon in (-0.1, math.inf, math.nan):
            with self.subTest(epsilon=epsilon), self.assertRaises(InvalidParameters):
                new_params(2, 2, epsilon)

    def test_not_integers(self) -> None:
        """The counts must be real integers."""
        with self.assertRaises(InvalidParameters):
            new_params(True, 2)
        with self.assertRaises(InvalidParameters):
            new_params(2, 2.0)  # type: ignore[arg-type]

    def test_invalid_is_value_error(self) -> None:
        """Parameter errors should also be value errors."""
        with self.assertRaises(ValueError):
            new_params(0, 0)

    def test_with_epsilon(self) -> None:
        """Changing epsilon should validate the new value."""
        self.assertEqual(new_params(2, 3).with_epsilon(1.0).epsilon, 1.0)
        with self.assertRaises(InvalidParameters):
            new_params(2, 3).with_epsilon(-1.0)


##############################################################################
class TestClassSizes(TestCase):
    """Weight class size tests."""

    def test_key_classes(self) -> None:
        """s_j should be C(K-1, j)(N-1)^j."""
        self.assertEqual(key_class_sizes(new_params(3, 3)), (1, 4, 4))
        self.assertEqual(key_class_sizes(new_params(2, 4)), (1, 3, 3, 1))

    def test_key_classes_cover_every_key(self) -> None:
        """The key classes should add up to N^{K-1}."""
        params = new_params(4, 5)
        self.assertEqual(sum(key_class_sizes(params)), 4**4)

    def test_query_classes(self) -> None:
        """t_j should be C(K, j)(N-1)^j."""
        params = new_params(3, 3)
        self.assertEqual(
            [query_class_size(params, j) for j in range(4)], [1, 6, 12, 8]
        )

    def test_out_of_range(self) -> None:
        """Weights outside the vector length should be rejected."""
        params = new_params(3, 3)
        with self.assertRaises(InvalidParameters):
            key_class_size(params, 3)
        with self.assertRaises(InvalidParameters):
            query_class_size(params, -1)

    def test_overflow(self) -> None:
        """Class sizes that overflow 64 bits should be refused."""
        with self.assertRaises(GuardExceeded):
            key_class_size(new_params(2**22, 4), 3)


##############################################################################
class TestVectors(TestCase):
    """Key and query vector tests."""

    def test_key_weight(self) -> None:
        """A key vector should know its Hamming weight."""
        key = KeyVector.of((0, 2, 1, 0))
        self.assertEqual(key.weight, 2)
        self.assertFalse(key.is_zero)
        self.assertEqual(str(key), "0210")

    def test_zero_key(self) -> None:
        """The zero key should be all zeros."""
        key = KeyVector.zero(new_params(3, 4))
        self.assertEqual(key.entries, (0, 0, 0))
        self.assertTrue(key.is_zero)

    def test_without(self) -> None:
        """Removing the retrieval symbol should leave the key vector."""
        self.assertEqual(QueryVector.of((1, 2, 0)).without(2), KeyVector((1, 0), 1))
        self.assertEqual(QueryVector.of((1, 2, 0)).without(1), KeyVector((2, 0), 1))

    def test_encoding(self) -> None:
        """Vectors should encode base N with the first entry most significant."""
        self.assertEqual(encode_vector((2, 1, 0), 3), 21)
        self.assertEqual(decode_vector(21, 3, 3), (2, 1, 0))
        self.assertEqual(decode_vector(0, 4, 2), (0, 0))

    def test_check_key(self) -> None:
        """A key vector must have K-1 entries, each in [0:N-1]."""
        params = new_params(3, 3)
        check_key(params, KeyVector.of((2, 0)))
        for entries in ((1,), (0, 0, 0), (0, 3), (-1, 0)):
            with self.subTest(entries=entries):
                with self.assertRaises(InvalidParameters):
                    check_key(params, KeyVector.of(entries))


##############################################################################
class TestPermutations(TestCase):
    """Permutation tests."""

    def test_cyclic_flag(self) -> None:
        """Only the increasing shifts should be flagged cyclic."""
        self.assertTrue(Permutation.of((1, 2, 0)).is_cyclic)
        self.assertFalse(Permutation.of((2, 1, 0)).is_cyclic)

    def test_not_a_bijection(self) -> None:
        """Repeated values should be rejected."""
        with self.assertRaises(InvalidParameters):
            Permutation.of((0, 0, 1))

    def test_check_permutation(self) -> None:
        """A permutation must be a bijection over exactly N servers."""
        params = new_params(3, 2)
        check_permutation(params, Permutation.of((2, 1, 0)))
        check_permutation(params, Permutation.shift(3, 2))
        with self.assertRaises(InvalidParameters):
            check_permutation(params, Permutation.shift(4, 0))
        with self.assertRaises(InvalidParameters):
            check_permutation(params, Permutation((0, 0, 1), False))

    def test_image_and_inverse(self) -> None:
        """Servers should map to values and back again."""
        pi = Permutation.of((2, 0, 1))
        self.assertEqual(pi.image(1), 2)
        self.assertEqual(pi.server_for(2), 1)
        self.assertEqual(pi.server_for(0), 2)
        self.assertEqual(str(pi), "(2,0,1)")

    def test_enumerate_cyclic(self) -> None:
        """There should be N cyclic permutations."""
        cyclic = enumerate_permutations(new_params(3, 2), cyclic_only=True)
        self.assertEqual([pi.mapping for pi in cyclic], [(0, 1, 2), (1, 2, 0), (2, 0, 1)])
        self.assertTrue(all(pi.is_cyclic for pi in cyclic))

    def test_enumerate_all(self) -> None:
        """There should be N! permutations, N of them cyclic."""
        everything = enumerate_permutations(new_params(4, 2), cyclic_only=False)
        self.assertEqual(len(everything), 24)
        self.assertEqual(sum(pi.is_cyclic for pi in everything), 4)

    def test_enumerate_guard(self) -> None:
        """Enumerating 8! permutations should be refused."""
        with self.assertRaises(GuardExceeded):
            enumerate_permutations(new_params(8, 2), cyclic_only=False)


##############################################################################
class TestKeyEnumeration(TestCase):
    """Key enumeration tests."""

    def test_all_keys(self) -> None:
        """Every key should be produced, in lexicographic order."""
        keys = enumerate_keys(new_params(3, 3))
        self.assertEqual(len(keys), 9)
        self.assertEqual(keys[0].entries, (0, 0))
        self.assertEqual(keys[-1].entries, (2, 2))
        self.assertEqual(list(keys), sorted(keys))

    def test_one_weight(self) -> None:
        """Restricting to a weight should give just that class."""
        keys = enumerate_keys(new_params(3, 3), 1)
        self.assertEqual(
            [key.entries for key in keys], [(0, 1), (0, 2), (1, 0), (2, 0)]
        )
        self.assertTrue(all(key.weight == 1 for key in keys))

    def test_unrank(self) -> None:
        """Unranking should walk the combinations in lexicographic order."""
        self.assertEqual(
            [unrank_combination(5, 2, rank) for rank in range(10)],
            list(combinations(range(5), 2)),
        )

    def test_guard_override(self) -> None:
        """The environment should be able to lower the guard."""
        with patch.dict(os.environ, {GUARD_ENVIRONMENT: "10"}):
            self.assertEqual(enumeration_guard(), 10)
            with self.assertRaises(GuardExceeded):
                enumerate_keys(new_params(3, 4))

    def test_bad_guard_override(self) -> None:
        """A nonsense override should be ignored, with a warning."""
        with patch.dict(os.environ, {GUARD_ENVIRONMENT: "lots"}):
            with self.assertLogs("lpir.core", "WARNING"):
                self.assertEqual(enumeration_guard(123), 123)


### test_core.py ends here
