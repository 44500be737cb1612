"""
Graded Spaces of Differential Monomials

P_n^(r) is spanned by the products of jets D^l phi^(j), l >= 1, j <= r,
of total degree n under deg(D^l phi^(j)) = l + 2j - 1. Bases are enumerated
from integer partitions of n into parts >= 2, each part realized by every
jet of that degree.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, Iterator, List, Sequence, Tuple

from .coeff import RatFunc, as_ratfunc
from .diffalg import DiffPoly, JetVar, mono_degree, monomial_sort_key, render_monomial
from .errors import NotInSpace
from .sparse import Monomial, mono_mul, mono_total_exponent

logger = logging.getLogger(__name__)


def partitions(n: int, min_part: int = 2, max_part: int = None) -> Iterator[Tuple[int, ...]]:
    """
    Generate the partitions of n into parts >= min_part, largest part first.

    Example:
        >>> list(partitions(6))
        [(6,), (4, 2), (3, 3), (2, 2, 2)]
    """
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for part in range(min(n, max_part), min_part - 1, -1):
        for rest in partitions(n - part, min_part, part):
            yield (part,) + rest


def jets_of_degree(d: int, r: int) -> List[JetVar]:
    """All jets D^l phi^(j) with l >= 1, j <= r and l + 2j - 1 = d."""
    jets = []
    for level in range(1, r + 1):
        order = d - 2 * level + 1
        if order >= 1:
            jets.append(JetVar(level, order))
    return jets


@dataclass(frozen=True)
class GradedBasis:
    """Ordered monomial basis of P_n^(r) (or of its nonlinear part)."""

    degree: int
    max_level: int
    monomials: Tuple[Monomial, ...]
    nonlinear: bool = False
    index: Dict[Monomial, int] = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {m: i for i, m in enumerate(self.monomials)})

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __contains__(self, mono: Monomial) -> bool:
        return mono in self.index

    def labels(self) -> Tuple[str, ...]:
        return tuple(render_monomial(m) for m in self.monomials)

    def polys(self) -> List[DiffPoly]:
        return [DiffPoly.from_monomial(m) for m in self.monomials]


@dataclass(frozen=True)
class CoordVector:
    """Coordinates of a homogeneous polynomial in a graded basis."""

    basis: GradedBasis
    entries: Tuple[RatFunc, ...]

    def __post_init__(self):
        if len(self.entries) != len(self.basis):
            raise ValueError(
                f"Coordinate vector has {len(self.entries)} entries "
                f"for a basis of size {len(self.basis)}"
            )

    def to_poly(self) -> DiffPoly:
        return from_coords(self)

    def support(self) -> List[Monomial]:
        return [m for m, c in zip(self.basis.monomials, self.entries) if c]

    @property
    def nonzero_count(self) -> int:
        return sum(1 for c in self.entries if c)

    def items(self) -> List[Tuple[Monomial, RatFunc]]:
        return [(m, c) for m, c in zip(self.basis.monomials, self.entries) if c]


@lru_cache(maxsize=None)
def basis(n: int, r: int, nonlinear: bool = False) -> GradedBasis:
    """
    Enumerate the monomial basis of P_n^(r).

    Args:
        n: Total degree (>= 2)
        r: Maximal field level (>= 1)
        nonlinear: Keep only monomials of total exponent >= 2

    Returns:
        GradedBasis sorted in canonical (graded-lex descending) order
    """
    if n < 2 or r < 1:
        raise ValueError(f"basis needs n >= 2 and r >= 1, got n={n}, r={r}")

    found = set()
    for parts in partitions(n):
        options = [jets_of_degree(d, r) for d in parts]
        for choice in product(*options):
            mono: Monomial = ()
            for var in choice:
                mono = mono_mul(mono, ((var, 1),))
            found.add(mono)

    if nonlinear:
        found = {m for m in found if mono_total_exponent(m) >= 2}
    monomials = tuple(sorted(found, key=monomial_sort_key, reverse=True))
    logger.debug(f"basis(n={n}, r={r}, nonlinear={nonlinear}) has {len(monomials)} monomials")
    return GradedBasis(n, r, monomials, nonlinear)


def dim(n: int, r: int, nonlinear: bool = False) -> int:
    """Dimension of P_n^(r)."""
    return len(basis(n, r, nonlinear))


def coords(p: DiffPoly, target: GradedBasis) -> CoordVector:
    """
    Exact coordinates of p in a graded basis.

    Raises:
        NotInSpace: If a monomial of p has the wrong degree, level or shape
    """
    entries = [as_ratfunc(0)] * len(target)
    for m, c in p.items():
        i = target.index.get(m)
        if i is None:
            levels = sorted({v.level for v, _ in m})
            raise NotInSpace(
                f"Monomial {render_monomial(m) or '1'} (degree {mono_degree(m)}, levels {levels}) "
                f"is not in P_{target.degree}^({target.max_level})"
                + (" nonlinear part" if target.nonlinear else "")
            )
        entries[i] = c
    return CoordVector(target, tuple(entries))


def from_coords(v: CoordVector) -> DiffPoly:
    """Inverse of coords."""
    return DiffPoly({m: c for m, c in zip(v.basis.monomials, v.entries) if c})


def space_system(
    images: Sequence[DiffPoly],
    rows: GradedBasis,
    rhs: Sequence[Sequence[RatFunc]],
    column_labels: Sequence[str],
    rhs_labels: Sequence[str] = ("rhs",),
):
    """
    Linear system whose columns are the coordinates of ``images`` in ``rows``.

    Args:
        images: One polynomial per unknown
        rows: Basis in which equations are read off
        rhs: Right-hand side, one row per basis monomial, one entry per rhs column
        column_labels: Labels of the unknowns
        rhs_labels: Labels of the right-hand side columns
    """
    from .linsolve import LinSystem

    columns = [coords(img, rows).entries for img in images]
    matrix = tuple(tuple(col[i] for col in columns) for i in range(len(rows)))
    return LinSystem(
        matrix=matrix,
        rhs=tuple(tuple(row) for row in rhs),
        column_labels=tuple(column_labels),
        row_labels=rows.labels(),
        rhs_labels=tuple(rhs_labels),
    )


@lru_cache(maxsize=None)
def _derivative_images(n: int, r: int) -> Tuple[DiffPoly, ...]:
    return tuple(DiffPoly.from_monomial(m).derive_xi() for m in basis(n, r).monomials)


def derivative_system(n: int, r: int, rhs: Sequence[RatFunc]):
    """System D q = p for q in P_n^(r), p given by coordinates in P_{n+1}^(r)."""
    source = basis(n, r)
    return space_system(
        _derivative_images(n, r),
        basis(n + 1, r),
        [(value,) for value in rhs],
        source.labels(),
    )
