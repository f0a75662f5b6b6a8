"""Test the closed-form download costs and leakage exponents."""

##############################################################################
# Python imports.
import math
from unittest import TestCase

##############################################################################
# Library imports.
from lpir import (
    InfeasibleCost,
    InvalidParameters,
    cost_lb,
    cost_tsc,
    cost_ub,
    eps_tsc,
    eps_ub,
    new_params,
    sweep,
    theorem1_bounds,
)
from lpir.tradeoff import capacity_cost, exponent_scaling, feasible_cost_range

##############################################################################
# Local imports.
from . import LN2

##############################################################################
EPSILON_GRID = tuple(step * 0.05 for step in range(201))
"""Exponents from 0 to 10 for the grid tests."""


##############################################################################
class TestCosts(TestCase):
    """Download cost tests."""

    def test_tsc_examples(self) -> None:
        """The optimal cost should match some hand-worked values."""
        self.assertAlmostEqual(cost_tsc(new_params(2, 2)), 1.5, places=12)
        self.assertAlmostEqual(cost_tsc(new_params(2, 3, LN2)), 14 / 9, places=12)
        self.assertAlmostEqual(cost_tsc(new_params(3, 2, LN2)), 1.25, places=12)

    def test_ub_examples(self) -> None:
        """The UB cost should match some hand-worked values."""
        self.assertAlmostEqual(cost_ub(new_params(2, 3, LN2)), 1.6, places=12)
        self.assertAlmostEqual(cost_ub(new_params(3, 2, LN2)), 1.25, places=12)

    def test_lb_examples(self) -> None:
        """The lower bound should match some hand-worked values."""
        self.assertAlmostEqual(cost_lb(new_params(2, 3, LN2)), 1.3125, places=12)
        self.assertAlmostEqual(cost_lb(new_params(4, 2)), 1.25, places=12)

    def test_capacity(self) -> None:
        """At epsilon 0 every cost should be the capacity cost."""
        for n_servers, n_messages in ((2, 2), (2, 5), (3, 3), (5, 4)):
            params = new_params(n_servers, n_messages)
            expected = sum(n_servers**-i for i in range(n_messages))
            with self.subTest(n=n_servers, k=n_messages):
                self.assertAlmostEqual(capacity_cost(params), expected, places=14)
                self.assertAlmostEqual(cost_tsc(params), expected, places=12)
                self.assertAlmostEqual(cost_ub(params), expected, places=12)
                self.assertAlmostEqual(cost_lb(params), expected, places=12)

    def test_no_privacy(self) -> None:
        """A huge epsilon should bring every cost close to 1."""
        for point in sweep(new_params(2, 3), [20.0]):
            self.assertAlmostEqual(point.d_tsc, 1.0, places=6)
            self.assertAlmostEqual(point.d_ub, 1.0, places=6)
            self.assertAlmostEqual(point.d_lb, 1.0, places=6)

    def test_ordering(self) -> None:
        """The lower bound, optimal and UB costs should stay in order."""
        for n_servers in (2, 3, 4, 8):
            for n_messages in range(2, 11):
                for point in sweep(new_params(n_servers, n_messages), EPSILON_GRID):
                    self.assertLessEqual(point.d_lb, point.d_tsc + 1e-12)
                    self.assertLessEqual(point.d_tsc, point.d_ub + 1e-12)

    def test_monotone(self) -> None:
        """Every cost should fall as epsilon grows."""
        for n_servers, n_messages in ((2, 3), (3, 5), (6, 4)):
            points = sweep(new_params(n_servers, n_messages), EPSILON_GRID)
            for before, after in zip(points, points[1:]):
                self.assertLessEqual(after.d_tsc, before.d_tsc + 1e-12)
                self.assertLessEqual(after.d_ub, before.d_ub + 1e-12)
                self.assertLessEqual(after.d_lb, before.d_lb + 1e-12)

    def test_two_messages_coincide(self) -> None:
        """With two messages the optimal and UB costs should be the same."""
        for n_servers in range(2, 9):
            for epsilon in (0.0, 0.5, 1.0, 3.0, 5.0):
                params = new_params(n_servers, 2, epsilon)
                self.assertAlmostEqual(cost_tsc(params), cost_ub(params), places=12)

    def test_gaps(self) -> None:
        """The gap ratios should be relative to the lower bound."""
        (point,) = sweep(new_params(2, 3), [LN2])
        self.assertAlmostEqual(point.gap_tsc_lb, (14 / 9) / 1.3125, places=12)
        self.assertAlmostEqual(point.gap_ub_lb, 1.6 / 1.3125, places=12)

    def test_negative_epsilon(self) -> None:
        """Sweeping a negative epsilon should be an error."""
        with self.assertRaises(InvalidParameters):
            sweep(new_params(2, 2), [-1.0])


##############################################################################
class TestExponents(TestCase):
    """Leakage exponent tests."""

    def test_tsc_example(self) -> None:
        """The optimal exponent should invert the optimal cost."""
        self.assertAlmostEqual(eps_tsc(new_params(2, 3), 14 / 9), LN2, places=9)

    def test_ub_examples(self) -> None:
        """The UB exponent should invert the UB cost."""
        self.assertAlmostEqual(eps_ub(new_params(2, 3), 1.6), LN2, places=9)
        self.assertAlmostEqual(eps_ub(new_params(2, 3), 14 / 9), math.log(12 / 5), places=9)

    def test_two_messages(self) -> None:
        """With two messages both exponents should agree."""
        params = new_params(2, 2)
        self.assertAlmostEqual(eps_tsc(params, 1.25), math.log(3), places=12)
        self.assertAlmostEqual(eps_ub(params, 1.25), math.log(3), places=12)

    def test_capacity_needs_no_leakage(self) -> None:
        """At the capacity cost the exponent should be 0."""
        self.assertAlmostEqual(eps_tsc(new_params(2, 3), 1.75), 0.0, places=12)
        self.assertAlmostEqual(eps_ub(new_params(2, 3), 1.75), 0.0, places=12)

    def test_infeasible(self) -> None:
        """Costs outside (1, capacity] should be refused."""
        params = new_params(2, 3)
        for cost in (1.0, 0.5, 1.8, math.inf, math.nan):
            with self.subTest(cost=cost):
                with self.assertRaisesRegex(InfeasibleCost, "feasible interval"):
                    eps_tsc(params, cost)
                with self.assertRaises(InvalidParameters):
                    eps_ub(params, cost)

    def test_feasible_range(self) -> None:
        """The feasible range should run from 1 to the capacity cost."""
        self.assertEqual(feasible_cost_range(new_params(3, 3)), (1.0, capacity_cost(new_params(3, 3))))

    def test_inverse(self) -> None:
        """Each exponent function should undo its cost function."""
        for n_servers, n_messages in ((2, 3), (3, 4), (4, 6)):
            for epsilon in (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
                params = new_params(n_servers, n_messages, epsilon)
                with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                    self.assertAlmostEqual(eps_tsc(params, cost_tsc(params)), epsilon, delta=1e-9)
                    self.assertAlmostEqual(eps_ub(params, cost_ub(params)), epsilon, delta=1e-9)


##############################################################################
class TestBounds(TestCase):
    """Tests for the bounds on the exponents."""

    def test_example(self) -> None:
        """The bounds should match some hand-worked values."""
        bounds = theorem1_bounds(new_params(2, 3), 14 / 9)
        self.assertAlmostEqual(bounds.alpha, 5 / 9, places=12)
        self.assertAlmostEqual(bounds.eps_tsc, LN2, places=9)
        self.assertAlmostEqual(bounds.eps_ub, math.log(12 / 5), places=9)
        self.assertAlmostEqual(bounds.tsc_upper, math.log(18 / 5), places=12)
        self.assertAlmostEqual(bounds.ub_upper, math.log(16 / 5), places=12)
        self.assertAlmostEqual(bounds.ub_lower, math.log(8 / 5), places=12)
        self.assertTrue(bounds.all_ok)

    def test_bounds_hold(self) -> None:
        """The bounds should hold over a spread of settings."""
        for n_servers, n_messages in ((2, 2), (2, 6), (3, 3), (5, 4)):
            low, high = feasible_cost_range(new_params(n_servers, n_messages))
            for fraction in (0.01, 0.2, 0.5, 0.9, 1.0):
                cost = low + fraction * (high - low)
                with self.subTest(n=n_servers, k=n_messages, cost=cost):
                    self.assertTrue(theorem1_bounds(new_params(n_servers, n_messages), cost).all_ok)

    def test_scaling(self) -> None:
        """At a fixed alpha the UB exponent should pull away as K grows."""
        series = exponent_scaling(2, 0.5, range(3, 65))
        self.assertEqual([n_messages for n_messages, _ in series], list(range(3, 65)))
        gaps = [bounds.eps_ub - bounds.eps_tsc for _, bounds in series]
        for bounds in (bounds for _, bounds in series):
            self.assertTrue(bounds.all_ok)
        for before, after in zip(gaps, gaps[1:]):
            self.assertGreater(after, before)

    def test_scaling_infeasible(self) -> None:
        """An alpha past the largest feasible value should be refused."""
        with self.assertRaises(InvalidParameters):
            exponent_scaling(2, 0.9, [3])


### test_tradeoff.py ends here
