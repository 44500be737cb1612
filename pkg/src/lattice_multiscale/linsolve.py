"""
Exact Linear Algebra over Q(h)

Gauss-Jordan elimination on sparse rows with rational-function entries.
Several right-hand-side columns can be carried at once; this expresses a
right-hand side that depends linearly on symbolic parameters (one column
per parameter). Rows of the reduced matrix whose coefficient part vanishes
but whose right-hand side does not are returned as constraints.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .coeff import (
    HRING,
    QH,
    RatFunc,
    as_ratfunc,
    eval_at,
    rational,
    render,
    to_fraction,
    total_degree,
)

logger = logging.getLogger(__name__)

Row = Dict[int, RatFunc]


@dataclass(frozen=True)
class LinSystem:
    """
    Linear system A x = B.

    matrix has one tuple per equation; rhs has one tuple per equation with
    one entry per right-hand-side column.
    """

    matrix: Tuple[Tuple[RatFunc, ...], ...]
    rhs: Tuple[Tuple[RatFunc, ...], ...] = None
    column_labels: Tuple[str, ...] = None
    row_labels: Tuple[str, ...] = None
    rhs_labels: Tuple[str, ...] = ("rhs",)

    def __post_init__(self):
        n_rows = len(self.matrix)
        widths = {len(row) for row in self.matrix}
        if len(widths) > 1:
            raise ValueError(f"Matrix rows have different lengths: {sorted(widths)}")
        n_cols = widths.pop() if widths else len(self.column_labels or ())
        if self.rhs is None:
            object.__setattr__(self, "rhs", tuple((as_ratfunc(0),) for _ in range(n_rows)))
        if len(self.rhs) != n_rows:
            raise ValueError(f"rhs has {len(self.rhs)} rows, matrix has {n_rows}")
        if self.column_labels is None:
            object.__setattr__(self, "column_labels", tuple(f"x{j}" for j in range(n_cols)))
        if self.row_labels is None:
            object.__setattr__(self, "row_labels", tuple(f"r{i}" for i in range(n_rows)))
        if len(self.column_labels) != n_cols:
            raise ValueError(f"{len(self.column_labels)} column labels for {n_cols} columns")
        if len(self.row_labels) != n_rows:
            raise ValueError(f"{len(self.row_labels)} row labels for {n_rows} rows")
        if any(len(row) != len(self.rhs_labels) for row in self.rhs):
            raise ValueError(f"rhs rows must have {len(self.rhs_labels)} entries")

    @property
    def n_rows(self) -> int:
        return len(self.matrix)

    @property
    def n_cols(self) -> int:
        return len(self.column_labels)

    @property
    def n_rhs(self) -> int:
        return len(self.rhs_labels)


@dataclass(frozen=True)
class Constraint:
    """A reduced row 0 = r; ``form`` is r normalized, one entry per rhs column."""

    row_label: str
    form: Tuple[RatFunc, ...]

    def value(self, column: int = 0) -> RatFunc:
        return self.form[column]

    def render(self, rhs_labels: Sequence[str]) -> str:
        parts = [
            f"({render(c)})*{label}" for c, label in zip(self.form, rhs_labels) if c
        ]
        return "+".join(parts) if parts else "0"


@dataclass
class LinSolution:
    """Result of solve: rank, particular solution, null space and constraints."""

    rank: int
    pivot_columns: Tuple[int, ...]
    particular: Tuple[Tuple[RatFunc, ...], ...]
    null_space: Tuple[Tuple[RatFunc, ...], ...]
    constraints: Tuple[Constraint, ...]
    column_labels: Tuple[str, ...] = ()
    rhs_labels: Tuple[str, ...] = ("rhs",)

    @property
    def consistent(self) -> bool:
        return not self.constraints

    def particular_column(self, k: int = 0) -> Tuple[RatFunc, ...]:
        """Particular solution for right-hand-side column k."""
        return tuple(x[k] for x in self.particular)


def _axpy(row: Row, pivot_row: Row, factor: RatFunc) -> Row:
    out = dict(row)
    for j, v in pivot_row.items():
        nv = out.get(j)
        nv = -factor * v if nv is None else nv - factor * v
        if nv:
            out[j] = nv
        else:
            out.pop(j, None)
    return out


def _eliminate(rows: List[Row], n_cols: int, labels: List[str]) -> List[int]:
    """Gauss-Jordan in place over the first n_cols columns; returns pivot columns."""
    pivots: List[int] = []
    r = 0
    for col in range(n_cols):
        best: Optional[Tuple[int, int]] = None
        for i in range(r, len(rows)):
            v = rows[i].get(col)
            if v:
                cost = total_degree(v)
                if best is None or cost < best[0]:
                    best = (cost, i)
        if best is None:
            continue
        i = best[1]
        rows[r], rows[i] = rows[i], rows[r]
        labels[r], labels[i] = labels[i], labels[r]
        inverse = 1 / rows[r][col]
        pivot_row = {j: v * inverse for j, v in rows[r].items()}
        rows[r] = pivot_row
        for k in range(len(rows)):
            if k != r:
                f = rows[k].get(col)
                if f:
                    rows[k] = _axpy(rows[k], pivot_row, f)
        pivots.append(col)
        r += 1
    return pivots


def normalize_form(entries: Sequence[RatFunc]) -> Tuple[RatFunc, ...]:
    """
    Remove the content of a linear form over Q(h).

    Denominators are cleared, the rational content divided out and the sign
    fixed so that the leading coefficient of the first nonzero entry is positive.
    """
    nonzero = [e for e in entries if e]
    if not nonzero:
        return tuple(entries)
    den = HRING.one
    for e in nonzero:
        den = den.lcm(e.denom)
    scaled = [e * QH(den) for e in entries]

    coefficients: List[Fraction] = []
    for e in scaled:
        if e:
            denominator = to_fraction(e.denom.LC)
            coefficients.extend(to_fraction(c) / denominator for _, c in e.numer.terms())
    content = Fraction(
        gcd(*(c.numerator for c in coefficients)), lcm(*(c.denominator for c in coefficients))
    )
    lead = next(e for e in scaled if e)
    if to_fraction(lead.numer.LC) * to_fraction(lead.denom.LC) < 0:
        content = -content
    factor = rational(1 / content)
    return tuple(e * factor for e in scaled)


def _sort_key(form: Tuple[RatFunc, ...]) -> Tuple[str, ...]:
    return tuple(render(c) for c in form)


def solve(system: LinSystem) -> LinSolution:
    """
    Solve A x = B exactly.

    Args:
        system: Linear system, possibly with several right-hand-side columns

    Returns:
        LinSolution with the particular solution (free unknowns set to zero),
        a null-space basis and the constraints on the right-hand side
    """
    n, k = system.n_cols, system.n_rhs
    rows: List[Row] = []
    for a_row, b_row in zip(system.matrix, system.rhs):
        row = {j: v for j, v in enumerate(a_row) if v}
        row.update({n + c: v for c, v in enumerate(b_row) if v})
        rows.append(row)
    labels = list(system.row_labels)

    pivots = _eliminate(rows, n, labels)
    rank = len(pivots)
    zero = as_ratfunc(0)

    particular = [[zero] * k for _ in range(n)]
    for i, col in enumerate(pivots):
        for c in range(k):
            particular[col][c] = rows[i].get(n + c, zero)

    null_space = []
    pivot_set = set(pivots)
    for free in range(n):
        if free in pivot_set:
            continue
        vec = [zero] * n
        vec[free] = as_ratfunc(1)
        for i, col in enumerate(pivots):
            v = rows[i].get(free)
            if v:
                vec[col] = -v
        null_space.append(tuple(vec))

    constraints = []
    for i in range(rank, len(rows)):
        b_part = tuple(rows[i].get(n + c, zero) for c in range(k))
        if any(b_part):
            constraints.append(Constraint(labels[i], normalize_form(b_part)))
    constraints.sort(key=lambda con: _sort_key(con.form))

    logger.debug(
        f"solve: {system.n_rows}x{n} system, {k} rhs columns, rank {rank}, "
        f"{len(constraints)} constraint rows"
    )
    return LinSolution(
        rank=rank,
        pivot_columns=tuple(pivots),
        particular=tuple(tuple(x) for x in particular),
        null_space=tuple(null_space),
        constraints=tuple(constraints),
        column_labels=system.column_labels,
        rhs_labels=system.rhs_labels,
    )


def rank(system: LinSystem) -> int:
    """Exact rank of the coefficient matrix over Q(h)."""
    return rank_of_rows(system.matrix)


def rank_of_rows(matrix: Sequence[Sequence[RatFunc]]) -> int:
    """Exact rank of a list of rows over Q(h)."""
    if not matrix:
        return 0
    rows = [{j: v for j, v in enumerate(row) if v} for row in matrix]
    width = max(len(row) for row in matrix)
    return len(_eliminate(rows, width, [""] * len(rows)))


def independent_constraints(solution: LinSolution) -> int:
    """Number of linearly independent constraint forms."""
    return rank_of_rows([con.form for con in solution.constraints])


def specialized_rank(system: LinSystem, h0: Fraction) -> int:
    """
    Rank of the coefficient matrix at h = h0, over QQ.

    Raises:
        PoleAtPoint: If h0 is a pole of an entry
    """
    if system.n_rows == 0 or system.n_cols == 0:
        return 0
    entries = []
    for row in system.matrix:
        values = [eval_at(v, h0) for v in row]
        entries.append([QQ(q.numerator, q.denominator) for q in values])
    return DomainMatrix(entries, (system.n_rows, system.n_cols), QQ).rank()


def verify(system: LinSystem, solution: LinSolution) -> bool:
    """Check A x_particular = B for a consistent solution."""
    if not solution.consistent:
        return False
    for a_row, b_row in zip(system.matrix, system.rhs):
        for c, b in enumerate(b_row):
            total = sum((a * x[c] for a, x in zip(a_row, solution.particular) if a), as_ratfunc(0))
            if total != b:
                return False
    return True
