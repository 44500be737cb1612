"""
Exact Evaluation Oracles

Cross-checks of the symbolic algebra by specialization: jets and h are
replaced by random rationals and identities are tested in exact
arithmetic. Sampling uses a seeded numpy Generator so every run is
reproducible from its seed.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from sympy import QQ
from sympy.polys.rings import ring

from .coeff import Scalar, eval_at, parse
from .config import get_settings
from .diffalg import DiffPoly, JetVar, evolutionary_derive, frechet, jet
from .errors import EngineError, UncoveredVariable
from .graded import dim
from .kdv import DEFAULT_GAMMA, flow, k2

logger = logging.getLogger(__name__)

# Polynomials in the Frechet parameter theta
THETA_RING, THETA = ring("theta", QQ)

# h values avoided when sampling: roots of the AL background 1 - h^2 and h = 0
_AVOIDED_H = {Fraction(0), Fraction(1), Fraction(-1)}


@dataclass(frozen=True)
class JetSample:
    """Rational values for jet variables and for h."""

    values: Dict[JetVar, Fraction]
    h0: Fraction

    def __getitem__(self, var: JetVar) -> Fraction:
        try:
            return self.values[var]
        except KeyError:
            raise UncoveredVariable(f"Sample has no value for {var.render()}") from None

    def covers(self, p: DiffPoly) -> bool:
        return all(v in self.values for v in p.variables())


def _random_rational(rng: np.random.Generator, bound: int = 9) -> Fraction:
    numerator = int(rng.integers(-bound, bound + 1))
    denominator = int(rng.integers(1, bound + 1))
    return Fraction(numerator, denominator)


def random_h(rng: np.random.Generator) -> Fraction:
    h0 = _random_rational(rng)
    while h0 in _AVOIDED_H:
        h0 = _random_rational(rng)
    return h0


def random_sample(
    variables: Iterable[JetVar], rng: np.random.Generator, h0: Optional[Fraction] = None
) -> JetSample:
    """
    Draw a sample for the given jet variables.

    Args:
        variables: Jets to assign
        rng: Seeded generator
        h0: Fixed h value (random when omitted)
    """
    values = {v: _random_rational(rng) for v in sorted(set(variables))}
    return JetSample(values, Fraction(h0) if h0 is not None else random_h(rng))


def eval_poly(p: DiffPoly, s: JetSample) -> Fraction:
    """
    Exact value of p at a sample.

    Raises:
        UncoveredVariable: If a variable of p has no value in the sample
        PoleAtPoint: If a coefficient has a pole at s.h0
    """
    total = Fraction(0)
    for m, c in p.items():
        term = eval_at(c, s.h0)
        for v, e in m:
            term *= s[v] ** e
        total += term
    return total


def _qq(q: Fraction):
    return QQ(q.numerator, q.denominator)


def frechet_residual(
    p: DiffPoly, sample: JetSample, variation: Dict[int, Fraction], level: int = 1
):
    """
    p(u + theta v) - p(u) - theta (frechet p)(v) as a polynomial in theta.

    Args:
        p: Differential polynomial
        sample: Values of the jets of u (and of any other field of p)
        variation: Values of D^k v by order k
        level: Field level that is varied
    """
    shifted = THETA_RING.zero
    for m, c in p.items():
        term = THETA_RING(_qq(eval_at(c, sample.h0)))
        for v, e in m:
            value = THETA_RING(_qq(sample[v]))
            if v.level == level and not v.is_placeholder:
                value += THETA * _qq(variation.get(v.order, Fraction(0)))
            term *= value**e
        shifted += term

    linear = Fraction(0)
    for k, coefficient in frechet(p, level).coefficients.items():
        linear += eval_poly(coefficient, sample) * variation[k]
    return shifted - _qq(eval_poly(p, sample)) - THETA * _qq(linear)


def frechet_check(p: DiffPoly, trials: int, rng: Optional[np.random.Generator] = None) -> bool:
    """
    Verify the Frechet derivative of p at random samples.

    The residual must be divisible by theta^2 exactly.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = rng if rng is not None else np.random.default_rng(0)
    orders = sorted(frechet(p, 1).coefficients) or [0]
    for _ in range(trials):
        sample = random_sample(p.variables(), rng)
        variation = {k: _random_rational(rng) for k in range(max(orders) + 1)}
        residual = frechet_residual(p, sample, variation)
        if residual.coeff(1) or residual.coeff(THETA):
            logger.warning(f"Frechet check failed for {p.render()} at h = {sample.h0}")
            return False
    return True


def commute_check(
    j1: int,
    j2: int,
    trials: int,
    rng: Optional[np.random.Generator] = None,
    a: Scalar = 1,
    gamma: Scalar = DEFAULT_GAMMA,
) -> bool:
    """
    Check d_tj1 d_tj2 D phi = d_tj2 d_tj1 D phi for hierarchy flows at random samples.

    Args:
        j1, j2: Flow indices in {2, 3, 4}
        trials: Number of samples
        rng: Seeded generator
        a, gamma: K_2 coefficients (the flows use b_j = 1)
    """
    for j in (j1, j2):
        if j not in (2, 3, 4):
            raise ValueError(f"Flow index must be 2, 3 or 4, got {j}")
    rng = rng if rng is not None else np.random.default_rng(0)
    k1, k2_ = flow(j1, 1, a, gamma), flow(j2, 1, a, gamma)
    field_jet = jet(1, 1)
    first = evolutionary_derive(evolutionary_derive(field_jet, {1: k2_}), {1: k1})
    second = evolutionary_derive(evolutionary_derive(field_jet, {1: k1}), {1: k2_})
    variables = first.variables() | second.variables()
    for _ in range(trials):
        sample = random_sample(variables, rng)
        if eval_poly(first, sample) != eval_poly(second, sample):
            logger.warning(f"Flows K_{j1} and K_{j2} do not commute at h = {sample.h0}")
            return False
    return True


@dataclass
class SelfCheckResult:
    """Outcome of the oracle suite."""

    seed: int
    trials: int
    checks: List[Tuple[str, bool]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def failures(self) -> List[str]:
        return [name for name, ok in self.checks if not ok]


def _eval_matches(expression: str, h0: int, expected: Fraction) -> bool:
    a = parse(expression)
    return eval_at(a, h0) == expected


def run_selfcheck(seed: Optional[int] = None, trials: Optional[int] = None) -> SelfCheckResult:
    """
    Run the oracle suite.

    Args:
        seed: Generator seed (settings default when omitted)
        trials: Samples per randomized check (settings default when omitted)

    Returns:
        SelfCheckResult listing each named check
    """
    from .models import madelung, madelung_defect

    settings = get_settings()
    seed = settings.selfcheck_seed if seed is None else seed
    trials = settings.selfcheck_trials if trials is None else trials
    rng = np.random.default_rng(seed)
    logger.info(f"Self-check with seed {seed}, {trials} trials")
    a_dnls = parse("(3-h^2)/24")

    result = SelfCheckResult(seed=seed, trials=trials)

    def record(name: str, thunk) -> None:
        try:
            ok = bool(thunk())
        except EngineError as e:
            logger.error(f"Self-check {name} raised {type(e).__name__}: {e}")
            ok = False
        logger.debug(f"{name}: {'ok' if ok else 'FAILED'}")
        result.checks.append((name, ok))

    record("frechet K_2", lambda: frechet_check(k2(a_dnls), trials, rng))
    record("frechet (D phi)^3", lambda: frechet_check(jet(1, 1) ** 3, trials, rng))
    record("frechet linear", lambda: frechet_check(jet(1, 3).scale(a_dnls), trials, rng))
    record("commute K_2 K_2", lambda: commute_check(2, 2, trials, rng, a_dnls))
    record("commute K_2 K_3", lambda: commute_check(2, 3, trials, rng, a_dnls))
    record("commute K_2 K_4", lambda: commute_check(2, 4, trials, rng, a_dnls))
    record("commute K_3 K_4", lambda: commute_check(3, 4, trials, rng, a_dnls))
    record("a(h=1) = 1/12", lambda: _eval_matches("(3-h^2)/24", 1, Fraction(1, 12)))
    record("dim P_6^(1) = 4", lambda: dim(6, 1) == 4)
    record("dim P_3^(1) = 1", lambda: dim(3, 1) == 1)
    for model in ("dnls", "al"):
        spec = madelung(model)
        record(f"Madelung form {spec.name}", lambda: madelung_defect(spec, rng) < 1e-9)

    if result.passed:
        logger.info(f"Self-check passed ({len(result.checks)} checks)")
    else:
        logger.error(f"Self-check failed: {', '.join(result.failures())}")
    return result
