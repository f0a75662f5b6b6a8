"""A small dense two-phase simplex solver.

This is an independent check of the closed-form results, so it favours
being simple over being fast: a full tableau held in a NumPy array, a
first phase that minimises the sum of the artificial variables, and a
lexicographic ratio test so that the many degenerate rows of the
allocation problems can never make it cycle. Every row is scaled to a
largest coefficient of 1 before the solve starts.
"""

##############################################################################
# Python compatibility hackage.
from __future__ import annotations

##############################################################################
# Python imports.
import logging
import math
from typing import Final, NamedTuple, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .types import (
    Infeasible,
    InvalidParameters,
    IterationLimit,
    NumericalBreakdown,
    Unbounded,
)

##############################################################################
LOG: Final = logging.getLogger(__name__)
"""The logger for this module."""

PIVOT_TOLERANCE: Final[float] = 1e-10
"""Entries below this are never pivoted on.

A reduced cost must also fall below minus this to be taken as improving.
"""

RATIO_TOLERANCE: Final[float] = 1e-12
"""How close, relative to their size, two ratios must be to count as tied."""

FEASIBILITY_TOLERANCE: Final[float] = 1e-9
"""The largest phase one objective still taken as feasible."""

MAX_ITERATIONS: Final[int] = 100_000
"""The most pivots a solve may make, over both phases."""


##############################################################################
class Constraint(NamedTuple):
    """One row of a linear program."""

    coeffs: tuple[float, ...]
    """The coefficient of each variable."""

    rhs: float
    """The right hand side."""

    name: str = ""
    """A label for debugging."""


##############################################################################
class LinearProgram(NamedTuple):
    """A linear program in the form minimise c.x + offset.

    The constraints are ``eq_constraints`` (each row equals its right hand
    side), ``ineq_constraints`` (each row is at most its right hand side)
    and a lower bound on every variable, which may be ``-math.inf``.
    """

    objective: tuple[float, ...]
    """The objective coefficients."""

    objective_offset: float
    """A constant added to the objective."""

    eq_constraints: tuple[Constraint, ...]
    """The equality rows."""

    ineq_constraints: tuple[Constraint, ...]
    """The less-than-or-equal rows."""

    var_lower_bounds: tuple[float, ...]
    """The lower bound of each variable."""

    var_names: tuple[str, ...]
    """The name of each variable."""

    @property
    def n_variables(self) -> int:
        """The number of variables."""
        return len(self.objective)

    def check(self) -> None:
        """Ensure the program is well formed.

        Raises:
            InvalidParameters: If a row has the wrong width or a value isn't
                finite.
        """
        width = self.n_variables
        if len(self.var_lower_bounds) != width or len(self.var_names) != width:
            raise InvalidParameters("Variable bounds and names must match the objective")
        if not all(math.isfinite(coeff) for coeff in self.objective):
            raise InvalidParameters("Objective coefficients must be finite")
        if any(bound == math.inf or math.isnan(bound) for bound in self.var_lower_bounds):
            raise InvalidParameters("Lower bounds must be finite or -inf")
        for row in self.eq_constraints + self.ineq_constraints:
            if len(row.coeffs) != width:
                raise InvalidParameters(
                    f"Row {row.name or '?'} has {len(row.coeffs)} coefficients, expected {width}"
                )
            if not (all(math.isfinite(coeff) for coeff in row.coeffs) and math.isfinite(row.rhs)):
                raise InvalidParameters(f"Row {row.name or '?'} has a non-finite value")

    def objective_value(self, values: Sequence[float]) -> float:
        """The objective at a point, offset included."""
        return (
            math.fsum(coeff * value for coeff, value in zip(self.objective, values))
            + self.objective_offset
        )

    def violations(self, values: Sequence[float], tolerance: float) -> tuple[str, ...]:
        """Name the bounds and rows a point breaks.

        Args:
            values: The point.
            tolerance: How far a bound or row may be missed by.

        Returns:
            A description of every broken bound and row, in order.
        """

        def _lhs(row: Constraint) -> float:
            return math.fsum(coeff * value for coeff, value in zip(row.coeffs, values))

        broken = [
            f"{name} >= {bound:.12g}"
            for name, bound, value in zip(self.var_names, self.var_lower_bounds, values)
            if value < bound - tolerance
        ]
        broken.extend(
            row.name or f"eq[{index}]"
            for index, row in enumerate(self.eq_constraints)
            if abs(_lhs(row) - row.rhs) > tolerance
        )
        broken.extend(
            row.name or f"ineq[{index}]"
            for index, row in enumerate(self.ineq_constraints)
            if _lhs(row) - row.rhs > tolerance
        )
        return tuple(broken)

    def dump(self) -> str:
        """Render the program as plain text for debugging.

        Returns:
            The objective, the variables with their bounds, then every row.
        """

        def _terms(coeffs: Sequence[float]) -> str:
            terms = " ".join(
                f"{'-' if coeff < 0 else '+'} {abs(coeff):.12g} {name}"
                for coeff, name in zip(coeffs, self.var_names)
                if coeff
            )
            return terms.removeprefix("+ ") or "0"

        lines = [f"minimize: {_terms(self.objective)} + {self.objective_offset:.12g}"]
        lines.append(
            "variables: "
            + ", ".join(
                f"{name} free" if bound == -math.inf else f"{name} >= {bound:.12g}"
                for name, bound in zip(self.var_names, self.var_lower_bounds)
            )
        )
        lines.extend(
            f"eq[{index}] {row.name}: {_terms(row.coeffs)} = {row.rhs:.12g}"
            for index, row in enumerate(self.eq_constraints)
        )
        lines.extend(
            f"ineq[{index}] {row.name}: {_terms(row.coeffs)} <= {row.rhs:.12g}"
            for index, row in enumerate(self.ineq_constraints)
        )
        return "\n".join(lines)


##############################################################################
class _Tableau:
    """A simplex tableau with its basis and a shared pivot budget.

    The entering column is the one with the most negative reduced cost.
    The leaving row is picked lexicographically: of the rows tied on the
    ratio test, the one whose row of the basis inverse, over the pivot
    entry, is least in lexicographic order. The basis inverse is read off
    the columns of the starting basis, which stay in the table until the
    end of the solve. With that rule no basis is ever visited twice.
    """

    def __init__(self, table: np.ndarray, basis: list[int]) -> None:
        """Constructor.

        Args:
            table: The constraint rows, right hand side in the last column,
                with the reduced cost row last of all.
            basis: The basic column of each constraint row; these columns
                must form an identity.
        """
        self.table = table
        self.basis = basis
        self.origin = tuple(basis)
        self.pivots = 0

    def pivot(self, row: int, column: int) -> None:
        """Pivot on an entry of the tableau.

        Args:
            row: The row of the entry.
            column: The column of the entry.

        Raises:
            IterationLimit: If the pivot budget is used up.
            NumericalBreakdown: If the pivot row stops being finite.
        """
        if self.pivots >= MAX_ITERATIONS:
            raise IterationLimit(f"No optimum after {MAX_ITERATIONS} pivots")
        self.pivots += 1
        table = self.table
        table[row] /= table[row, column]
        if not np.isfinite(table[row]).all():
            raise NumericalBreakdown(f"Pivot on row {row}, column {column} isn't finite")
        factors = table[:, column].copy()
        factors[row] = 0.0
        table -= np.outer(factors, table[row])
        table[:, column] = 0.0
        table[row, column] = 1.0
        self.basis[row] = column

    def leaving_row(self, column: int) -> int:
        """Pick the row to leave the basis when a column enters.

        Args:
            column: The entering column.

        Returns:
            The row to pivot on.

        Raises:
            Unbounded: If nothing limits the entering column.
            NumericalBreakdown: If the column isn't finite.
        """
        table = self.table
        entries = table[:-1, column]
        if not np.isfinite(entries).all():
            raise NumericalBreakdown(f"Column {column} isn't finite")
        rows = np.flatnonzero(entries > PIVOT_TOLERANCE)
        if not rows.size:
            raise Unbounded(f"Column {column} can grow without bound")
        pivots = entries[rows]
        ratios = np.maximum(table[rows, -1], 0.0) / pivots
        best = ratios.min()
        tied = ratios <= best + RATIO_TOLERANCE * max(1.0, best)
        rows, pivots = rows[tied], pivots[tied]
        for origin in self.origin:
            if rows.size == 1:
                break
            values = table[rows, origin] / pivots
            least = values.min()
            tied = values <= least + RATIO_TOLERANCE * max(1.0, abs(least))
            rows, pivots = rows[tied], pivots[tied]
        return int(rows[np.argmax(pivots)])

    def run(self, columns: int) -> None:
        """Pivot to an optimum.

        Args:
            columns: Only the first this-many columns may enter the basis.

        Raises:
            Unbounded: If the objective can fall without limit.
            IterationLimit: If the pivot budget is used up.
            NumericalBreakdown: If the tableau stops being finite.
        """
        table = self.table
        while True:
            reduced = table[-1, :columns]
            if not np.isfinite(reduced).all():
                raise NumericalBreakdown("The reduced costs aren't finite")
            column = int(np.argmin(reduced))
            if reduced[column] >= -PIVOT_TOLERANCE:
                return
            self.pivot(self.leaving_row(column), column)


##############################################################################
def _scaled_rows(matrix: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale every row so its largest coefficient is 1 in size.

    Args:
        matrix: The coefficients.
        rhs: The right hand sides.

    Returns:
        The scaled coefficients and right hand sides.
    """
    norms = np.abs(matrix).max(axis=1, initial=0.0)
    norms[norms == 0.0] = 1.0
    return matrix / norms[:, None], rhs / norms


##############################################################################
def solve(lp: LinearProgram) -> tuple[float, tuple[float, ...]]:
    """Solve a linear program.

    Args:
        lp: The program to solve.

    Returns:
        The optimal value and an optimal vertex.

    Raises:
        InvalidParameters: If the program is malformed.
        Infeasible: If no point meets the constraints.
        Unbounded: If the objective is unbounded below.
        IterationLimit: If the solver runs out of pivots.
        NumericalBreakdown: If the arithmetic stops being finite.
    """
    lp.check()
    lower = np.array(lp.var_lower_bounds, dtype=float)
    free = np.isneginf(lower)
    shift = np.where(free, 0.0, lower)

    # Shift finite lower bounds to zero and split free variables in two.
    def _columns(rows: Sequence[Constraint]) -> tuple[np.ndarray, np.ndarray]:
        if not rows:
            return np.zeros((0, int(lp.n_variables + free.sum()))), np.zeros(0)
        matrix = np.array([row.coeffs for row in rows], dtype=float)
        rhs = np.array([row.rhs for row in rows], dtype=float) - matrix @ shift
        return _scaled_rows(np.hstack([matrix, -matrix[:, free]]), rhs)

    a_ub, b_ub = _columns(lp.ineq_constraints)
    a_eq, b_eq = _columns(lp.eq_constraints)
    cost = np.concatenate([np.array(lp.objective, dtype=float), -np.array(lp.objective)[free]])
    if cost.any():
        cost /= np.abs(cost).max()
    n_structural = cost.size
    n_ub, n_eq = b_ub.size, b_eq.size
    n_rows = n_ub + n_eq

    # Every row gets its slack (zero for equalities); rows with a negative
    # right hand side are flipped, and need an artificial to start from.
    matrix = np.zeros((n_rows, n_structural + n_ub))
    matrix[:n_ub, :n_structural] = a_ub
    matrix[:n_ub, n_structural:] = np.eye(n_ub)
    matrix[n_ub:, :n_structural] = a_eq
    rhs = np.concatenate([b_ub, b_eq])
    flipped = rhs < 0
    matrix[flipped] *= -1
    rhs[flipped] *= -1
    needs_artificial = flipped.copy()
    needs_artificial[n_ub:] = True
    artificial_rows = np.flatnonzero(needs_artificial)
    n_columns = n_structural + n_ub
    n_artificial = artificial_rows.size

    table = np.zeros((n_rows + 1, n_columns + n_artificial + 1))
    table[:n_rows, :n_columns] = matrix
    table[:n_rows, -1] = rhs
    basis = [n_structural + row for row in range(n_rows)]
    for offset, row in enumerate(artificial_rows):
        table[row, n_columns + offset] = 1.0
        basis[row] = n_columns + offset
    LOG.debug(
        "Simplex: %d rows, %d columns, %d artificials",
        n_rows,
        n_columns,
        n_artificial,
    )

    tableau = _Tableau(table, basis)
    if n_artificial:
        table[-1, n_columns:-1] = 1.0
        table[-1] -= table[artificial_rows].sum(axis=0)
        tableau.run(n_columns + n_artificial)
        if -table[-1, -1] > FEASIBILITY_TOLERANCE:
            raise Infeasible(f"Phase one ended with infeasibility {-table[-1, -1]!r}")
        # Drive zero-level artificials out of the basis, or drop their rows.
        redundant: set[int] = set()
        for row in range(n_rows):
            if tableau.basis[row] < n_columns:
                continue
            entries = np.abs(table[row, :n_columns])
            if entries.max(initial=0.0) > PIVOT_TOLERANCE:
                tableau.pivot(row, int(np.argmax(entries)))
            else:
                redundant.add(row)
        if redundant:
            LOG.debug("Simplex: dropping %d redundant rows", len(redundant))
            keep = [row for row in range(n_rows) if row not in redundant] + [n_rows]
            tableau.table = table = table[keep]
            tableau.basis = [tableau.basis[row] for row in keep[:-1]]
    LOG.debug("Simplex: phase one took %d pivots", tableau.pivots)

    # Phase two: price out the basis against the real objective. The
    # artificial columns stay in the table but may no longer enter.
    full_cost = np.zeros(n_columns + n_artificial)
    full_cost[:n_structural] = cost
    table[-1, :-1] = full_cost
    table[-1, -1] = 0.0
    for row, column in enumerate(tableau.basis):
        table[-1] -= full_cost[column] * table[row]
    tableau.run(n_columns)

    solution = np.zeros(n_columns + n_artificial)
    for row, column in enumerate(tableau.basis):
        solution[column] = table[row, -1]
    values = solution[: lp.n_variables].copy()
    values[free] -= solution[lp.n_variables : n_structural]
    values += shift
    value = lp.objective_value(values)
    if broken := lp.violations(values, FEASIBILITY_TOLERANCE):
        LOG.warning(
            "Simplex: the optimum misses %d constraints, first %s", len(broken), broken[0]
        )
    LOG.info("Simplex: optimum %r after %d pivots", value, tableau.pivots)
    return value, tuple(float(x) for x in values)


### simplex.py ends here
