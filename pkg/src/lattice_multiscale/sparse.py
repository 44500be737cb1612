"""
Sparse Polynomials over Q(h)

Dictionary-backed polynomials whose variables are hashable, orderable
tuples. A monomial is a tuple of ``(variable, exponent)`` pairs sorted in
descending variable order; the empty tuple is the constant monomial.

Both the jet algebra (diffalg) and the epsilon-series workspace (series)
specialize this class with their own variable types.
"""

from typing import Any, Dict, Iterable, Iterator, Mapping, Tuple, TypeVar

from .coeff import RatFunc, Scalar, as_ratfunc

Monomial = Tuple[Tuple[Any, int], ...]
P = TypeVar("P", bound="SparsePoly")

ONE_MONOMIAL: Monomial = ()


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    """Product of two monomials in canonical order."""
    if not m1:
        return m2
    if not m2:
        return m1
    exps = dict(m1)
    for var, e in m2:
        exps[var] = exps.get(var, 0) + e
    return tuple(sorted(exps.items(), reverse=True))


def mono_remove(m: Monomial, var: Any) -> Monomial:
    """Divide a monomial by one power of ``var`` (which must occur in it)."""
    out = []
    for v, e in m:
        if v == var:
            if e > 1:
                out.append((v, e - 1))
        else:
            out.append((v, e))
    return tuple(out)


def mono_total_exponent(m: Monomial) -> int:
    return sum(e for _, e in m)


def _accumulate(acc: Dict[Monomial, RatFunc], mono: Monomial, coef: RatFunc) -> None:
    prev = acc.get(mono)
    acc[mono] = coef if prev is None else prev + coef


class SparsePoly:
    """
    Immutable sparse polynomial with Q(h) coefficients.

    Instances are never mutated after construction; arithmetic returns new
    objects of the same concrete class.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, RatFunc] = None):
        self._terms: Dict[Monomial, RatFunc] = {}
        if terms:
            self._terms = {m: c for m, c in terms.items() if c}
        self._hash = None

    # Construction

    @classmethod
    def zero(cls) -> "SparsePoly":
        return cls()

    @classmethod
    def constant(cls, value: Scalar) -> "SparsePoly":
        value = as_ratfunc(value)
        return cls({ONE_MONOMIAL: value}) if value else cls()

    @classmethod
    def var(cls, variable: Any, coefficient: Scalar = 1) -> "SparsePoly":
        return cls({((variable, 1),): as_ratfunc(coefficient)})

    @classmethod
    def from_monomial(cls, mono: Monomial, coefficient: Scalar = 1) -> "SparsePoly":
        return cls({mono: as_ratfunc(coefficient)})

    def _new(self: P, terms: Mapping[Monomial, RatFunc]) -> P:
        return type(self)(terms)

    # Inspection

    @property
    def terms(self) -> Dict[Monomial, RatFunc]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, RatFunc]]:
        return iter(self._terms.items())

    def monomials(self) -> Tuple[Monomial, ...]:
        return tuple(self._terms)

    def coefficient(self, mono: Monomial) -> RatFunc:
        return self._terms.get(mono, as_ratfunc(0))

    def constant_term(self) -> RatFunc:
        return self.coefficient(ONE_MONOMIAL)

    def variables(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SparsePoly):
            return self._terms == other._terms
        if isinstance(other, (int, RatFunc)):
            return self._terms == type(self).constant(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # Arithmetic

    def _coerce(self: P, other: Any) -> P:
        if isinstance(other, SparsePoly):
            return other
        return type(self).constant(other)

    def __add__(self: P, other: Any) -> P:
        other = self._coerce(other)
        acc = dict(self._terms)
        for m, c in other._terms.items():
            _accumulate(acc, m, c)
        return self._new(acc)

    __radd__ = __add__

    def __neg__(self: P) -> P:
        return self._new({m: -c for m, c in self._terms.items()})

    def __sub__(self: P, other: Any) -> P:
        return self + (-self._coerce(other))

    def __rsub__(self: P, other: Any) -> P:
        return self._coerce(other) - self

    def scale(self: P, factor: Scalar) -> P:
        factor = as_ratfunc(factor)
        if not factor:
            return self._new({})
        return self._new({m: c * factor for m, c in self._terms.items()})

    def __mul__(self: P, other: Any) -> P:
        if not isinstance(other, SparsePoly):
            return self.scale(other)
        acc: Dict[Monomial, RatFunc] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                _accumulate(acc, mono_mul(m1, m2), c1 * c2)
        return self._new(acc)

    def __rmul__(self: P, other: Any) -> P:
        return self.scale(other)

    def __truediv__(self: P, other: Scalar) -> P:
        from .coeff import div

        return self.scale(div(as_ratfunc(1), as_ratfunc(other)))

    def __pow__(self: P, n: int) -> P:
        if n < 0:
            raise ValueError("Negative powers are not polynomials")
        result = type(self).constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # Helpers shared by subclasses

    def filter(self: P, predicate) -> P:
        """Keep the terms whose monomial satisfies ``predicate``."""
        return self._new({m: c for m, c in self._terms.items() if predicate(m)})

    def map_variables(self: P, image, target: type = None) -> "SparsePoly":
        """
        Ring morphism defined on variables.

        Args:
            image: Callable mapping a variable to a SparsePoly (of ``target`` class)
            target: Class of the result (defaults to this class)
        """
        target = target or type(self)
        cache: Dict[Any, SparsePoly] = {}
        images = []
        for m, c in self._terms.items():
            term: SparsePoly = target.constant(c)
            for v, e in m:
                if v not in cache:
                    cache[v] = image(v)
                term = term * cache[v] ** e
            images.append(term)
        return sum_polys(images, target)


def sum_polys(polys: Iterable[SparsePoly], cls: type) -> SparsePoly:
    """Sum an iterable of polynomials in one accumulation pass."""
    acc: Dict[Monomial, RatFunc] = {}
    for p in polys:
        for m, c in p.items():
            _accumulate(acc, m, c)
    return cls(acc)
