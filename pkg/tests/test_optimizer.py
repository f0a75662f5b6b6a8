"""Test the allocation linear programs and the KKT certificate."""

##############################################################################
# Python imports.
import math
from itertools import product
from unittest import TestCase

##############################################################################
# Library imports.
from lpir import (
    GuardExceeded,
    build_p1,
    build_p2,
    build_p2_scaled,
    cost_tsc,
    cost_ub,
    expand_to_full,
    kkt_certificate,
    new_params,
    optimal_allocation,
    reduce_allocation,
    samy_allocation,
    solve,
    solve_p2,
    validate,
    verify_prop1,
)
from lpir.audit import exact_download_cost
from lpir.core import key_class_sizes
from lpir.optimizer import p1_allocation
from lpir.tradeoff import capacity_cost

##############################################################################
# Local imports.
from . import LN2, SMALL_GRID


##############################################################################
class TestReducedProblem(TestCase):
    """Tests for the per-weight-class problem."""

    def test_shape(self) -> None:
        """There should be two ratio rows per adjacent pair and one equality."""
        program = build_p2(new_params(2, 3, LN2))
        self.assertEqual(program.n_variables, 3)
        self.assertEqual(len(program.ineq_constraints), 4)
        self.assertEqual(len(program.eq_constraints), 1)
        self.assertEqual(program.eq_constraints[0].coeffs, (2.0, 4.0, 2.0))
        self.assertEqual(len(build_p2(new_params(5, 2)).ineq_constraints), 2)

    def test_worked_example(self) -> None:
        """The optimum should be the closed-form allocation."""
        value, solution = solve(build_p2(new_params(2, 3, LN2)))
        self.assertAlmostEqual(value, 14 / 9, delta=1e-8)
        for found, expected in zip(solution, (2 / 9, 1 / 9, 1 / 18)):
            self.assertAlmostEqual(found, expected, delta=1e-8)

    def test_perfect_privacy(self) -> None:
        """At epsilon 0 the optimum should be the capacity cost."""
        params = new_params(3, 4)
        value, _ = solve(build_p2(params))
        self.assertAlmostEqual(value, capacity_cost(params), delta=1e-8)

    def test_matches_closed_form(self) -> None:
        """The solver and the closed form should agree everywhere."""
        for n_servers, n_messages, epsilon in product(
            (2, 3, 4), (2, 3, 4, 5), (0.0, 0.5, 1.0, 2.0)
        ):
            params = new_params(n_servers, n_messages, epsilon)
            value, _ = solve(build_p2(params))
            with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                self.assertAlmostEqual(value, cost_tsc(params), delta=1e-8)

    def test_solution_matches_closed_form(self) -> None:
        """Both solvers should land on the closed-form allocation itself."""
        for n_servers, n_messages, epsilon in product((2, 3, 4), (2, 3, 4, 5), (0.5, 1.0, 2.0)):
            params = new_params(n_servers, n_messages, epsilon)
            expected = optimal_allocation(params).probs
            with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                for _, solution in (solve(build_p2(params)), solve_p2(params)):
                    for found, wanted in zip(solution, expected):
                        self.assertAlmostEqual(found, wanted, delta=1e-8)

    def test_samy_is_feasible(self) -> None:
        """The direct-download-biased allocation should be feasible, at its own cost."""
        for n_servers, n_messages, epsilon in product((2, 3, 4), (2, 3, 5), (0.5, 1.0, 2.0, 5.0)):
            params = new_params(n_servers, n_messages, epsilon)
            program = build_p2(params)
            probs = samy_allocation(params).probs
            with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                self.assertTrue(validate(params, samy_allocation(params)).ok)
                self.assertEqual(program.violations(probs, 1e-12), ())
                self.assertAlmostEqual(
                    program.objective_value(probs), cost_ub(params), delta=1e-12
                )

    def test_scaled_shape(self) -> None:
        """The scaled problem should have the same rows as the plain one."""
        params = new_params(2, 3, LN2)
        scaled, plain = build_p2_scaled(params), build_p2(params)
        self.assertEqual(scaled.var_names, ("y0", "y1", "y2"))
        self.assertEqual(
            [row.name for row in scaled.ineq_constraints],
            [row.name for row in plain.ineq_constraints],
        )
        # N s_j p_j of the closed form: 4/9, 4/9 and 1/9.
        for found, expected in zip(scaled.eq_constraints[0].coeffs, (4 / 9, 4 / 9, 1 / 9)):
            self.assertAlmostEqual(found, expected, places=14)

    def test_large_exponent(self) -> None:
        """A large K epsilon should still solve, to the closed-form cost."""
        for n_servers, n_messages, epsilon in ((2, 16, 10.0), (2, 10, 30.0), (2, 40, 20.0)):
            params = new_params(n_servers, n_messages, epsilon)
            with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                value, solution = solve_p2(params)
                self.assertAlmostEqual(value, cost_tsc(params), delta=1e-8)
                self.assertAlmostEqual(
                    solution[0], optimal_allocation(params).probs[0], delta=1e-12
                )


##############################################################################
class TestFullProblem(TestCase):
    """Tests for the per-key, per-permutation problem."""

    def test_shape(self) -> None:
        """The variable and row counts should follow the parameters."""
        program = build_p1(new_params(2, 2))
        self.assertEqual(program.n_variables, 9)
        self.assertEqual(program.var_names[-1], "d")
        self.assertEqual(program.var_lower_bounds[-1], -math.inf)
        program = build_p1(new_params(3, 2, LN2))
        self.assertEqual(program.n_variables, 37)
        self.assertEqual(len(program.eq_constraints), 2)
        self.assertEqual(len(program.ineq_constraints), 2 + 54)
        self.assertEqual(program.var_names[0], "p[k=1,f=0,pi=(0,1,2)]")

    def test_guard(self) -> None:
        """Problems past the variable guard should be refused."""
        with self.assertRaises(GuardExceeded):
            build_p1(new_params(4, 4))

    def test_perfect_privacy(self) -> None:
        """At epsilon 0 the optimum should be the capacity cost."""
        value, _ = solve(build_p1(new_params(2, 2)))
        self.assertAlmostEqual(value, 1.5, delta=1e-8)

    def test_agrees_with_reduced(self) -> None:
        """The full and reduced problems should have the same optimum."""
        for (n_servers, n_messages), epsilon in product(SMALL_GRID, (0.0, 0.5, LN2, 2.0)):
            with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                check = verify_prop1(new_params(n_servers, n_messages, epsilon))
                self.assertTrue(check.agree, check)
                self.assertAlmostEqual(
                    check.p2_value,
                    cost_tsc(new_params(n_servers, n_messages, epsilon)),
                    delta=1e-8,
                )

    def test_solution_as_allocation(self) -> None:
        """A solution should read back as an allocation with the same cost."""
        params = new_params(2, 3, LN2)
        value, solution = solve(build_p1(params))
        full = p1_allocation(params, solution)
        self.assertAlmostEqual(exact_download_cost(params, full), value, delta=1e-8)
        reduced = reduce_allocation(params, full)
        total = params.n_servers * math.fsum(
            size * prob for size, prob in zip(key_class_sizes(params), reduced.probs)
        )
        self.assertAlmostEqual(total, 1.0, delta=1e-8)
        self.assertLessEqual(
            params.n_servers / (params.n_servers - 1) * (1 - reduced.probs[0]), value + 1e-8
        )


##############################################################################
class TestReduce(TestCase):
    """Tests for averaging full allocations down to weight classes."""

    def test_undoes_expand(self) -> None:
        """Reducing an expanded allocation should give it back."""
        for n_servers, n_messages in SMALL_GRID:
            params = new_params(n_servers, n_messages, 0.8)
            alloc = optimal_allocation(params)
            reduced = reduce_allocation(params, expand_to_full(params, alloc))
            for found, expected in zip(reduced.probs, alloc.probs):
                self.assertAlmostEqual(found, expected, places=15)


##############################################################################
class TestKkt(TestCase):
    """KKT certificate tests."""

    def test_two_servers_three_messages(self) -> None:
        """The duals should match the hand-worked values."""
        certificate = kkt_certificate(new_params(2, 3, LN2))
        self.assertAlmostEqual(certificate.lambda_dual, 4 / 9, places=12)
        self.assertAlmostEqual(certificate.alpha_dual[0], 10 / 9, places=12)
        self.assertAlmostEqual(certificate.alpha_dual[1], 4 / 9, places=12)
        self.assertEqual(certificate.beta_dual, (0.0, 0.0))
        self.assertLessEqual(certificate.max_residual, 1e-12)
        self.assertTrue(certificate.ok)

    def test_three_servers_two_messages(self) -> None:
        """The duals should match the hand-worked values."""
        certificate = kkt_certificate(new_params(3, 2, LN2))
        self.assertAlmostEqual(certificate.lambda_dual, 1 / 4, places=12)
        self.assertAlmostEqual(certificate.alpha_dual[0], 3 / 4, places=12)
        self.assertTrue(certificate.ok)

    def test_perfect_privacy(self) -> None:
        """At epsilon 0 the certificate should still hold."""
        for n_servers, n_messages in ((2, 2), (3, 5), (6, 3)):
            certificate = kkt_certificate(new_params(n_servers, n_messages))
            with self.subTest(n=n_servers, k=n_messages):
                self.assertTrue(certificate.ok)
                self.assertTrue(all(alpha >= 0 for alpha in certificate.alpha_dual))

    def test_grid(self) -> None:
        """The certificate should hold over a spread of settings."""
        for n_servers, n_messages, epsilon in product(
            (2, 3, 4, 6), (2, 3, 4, 5, 6), (0.0, 0.5, 1.0, 2.0, 5.0)
        ):
            certificate = kkt_certificate(new_params(n_servers, n_messages, epsilon))
            with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                self.assertTrue(certificate.primal_feasible)
                self.assertTrue(certificate.dual_feasible)
                self.assertLessEqual(certificate.max_residual, 1e-9)
                self.assertLessEqual(max(certificate.slackness_products), 1e-12)
                self.assertEqual(len(certificate.stationarity_residuals), n_messages)

    def test_large_exponent(self) -> None:
        """The certificate should hold where e^{K eps} overflows."""
        for n_servers, n_messages, epsilon in ((2, 64, 12.0), (3, 40, 25.0), (2, 2, 710.0)):
            with self.subTest(n=n_servers, k=n_messages, epsilon=epsilon):
                certificate = kkt_certificate(new_params(n_servers, n_messages, epsilon))
                self.assertTrue(certificate.ok, certificate.stationarity_residuals)
                self.assertTrue(all(math.isfinite(alpha) for alpha in certificate.alpha_dual))


### test_optimizer.py ends here
