"""
Lattice NLS Models in Madelung Form

Both shipped lattices share one real form after f_n = sqrt(nu_n) exp(i phi_n):

    d_t nu_n  + (1/h^2) W(nu_n) (sqrt(a+) sin b+ + sqrt(a-) sin b-) = 0
    d_t phi_n + 1/h^2 - (1/2h^2) W(nu_n) (sqrt(g+) cos b+ + sqrt(g-) cos b-)
              + mu sigma nu_n = 0

with a+- = nu_n nu_{n+-1}, b+- = phi_{n+-1} - phi_n, g+- = nu_{n+-1}/nu_n and
a hopping weight W(nu) = W0 + w (nu - 1):

    DNLS: W = 1,                 mu = 1
    AL:   W = 1 - sigma h^2 nu,  mu = 0
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .coeff import H, RatFunc, eval_at, rational, render
from .series import (
    COS,
    INV_SQRT1P,
    NU,
    PHI,
    SIN,
    SQRT1P,
    EpsSeries,
    compose,
    shift_expand,
    time_expand,
)

logger = logging.getLogger(__name__)

MODELS = ("DNLS", "AL")


@dataclass(frozen=True)
class ModelSpec:
    """
    Madelung residual pair of a lattice model.

    Attributes:
        name: "DNLS" or "AL"
        sigma: Sign of the nonlinearity
        hopping_background: W0, the hopping weight at nu = 1
        hopping_slope: w in W(nu) = W0 + w (nu - 1)
        onsite: mu, multiplier of sigma nu_n in the phase residual
        zeta_sq: Square of the slow-space scale, chosen so that c^2 = sigma
    """

    name: str
    sigma: int
    hopping_background: RatFunc
    hopping_slope: RatFunc
    onsite: RatFunc
    zeta_sq: RatFunc

    @property
    def zeta_equals_h(self) -> bool:
        return self.zeta_sq == H**2

    def hopping_text(self) -> str:
        if not self.hopping_slope:
            return "" if self.hopping_background == 1 else f"({render(self.hopping_background)})*"
        return (
            f"({render(self.hopping_background)}+({render(self.hopping_slope)})*(nu_n-1))*"
        )

    def nu_residual_text(self) -> str:
        return (
            f"d_t nu_n + (1/h^2)*{self.hopping_text()}"
            "(sqrt(alpha+)*sin(beta+) + sqrt(alpha-)*sin(beta-))"
        )

    def phi_residual_text(self) -> str:
        text = (
            f"d_t phi_n + 1/h^2 - (1/(2*h^2))*{self.hopping_text()}"
            "(sqrt(gamma+)*cos(beta+) + sqrt(gamma-)*cos(beta-))"
        )
        if self.onsite:
            coefficient = self.onsite * self.sigma
            text += f" + ({render(coefficient)})*nu_n"
        return text

    def rates(self, nu: np.ndarray, phi: np.ndarray, h: float) -> Tuple[float, float]:
        """
        Time derivatives of nu_n, phi_n that make both residuals vanish.

        Args:
            nu: Amplitudes (nu_{n-1}, nu_n, nu_{n+1}), all positive
            phi: Phases (phi_{n-1}, phi_n, phi_{n+1})
            h: Lattice spacing
        """
        h0 = float(h)
        w0 = _to_float(self.hopping_background, h)
        w = _to_float(self.hopping_slope, h)
        mu = _to_float(self.onsite, h)
        weight = w0 + w * (nu[1] - 1.0)
        beta = np.array([phi[0] - phi[1], phi[2] - phi[1]])
        alpha = np.array([nu[1] * nu[0], nu[1] * nu[2]])
        gamma = np.array([nu[0] / nu[1], nu[2] / nu[1]])
        nu_t = -weight * np.sum(np.sqrt(alpha) * np.sin(beta)) / h0**2
        phi_t = (
            -1.0 / h0**2
            + weight * np.sum(np.sqrt(gamma) * np.cos(beta)) / (2 * h0**2)
            - mu * self.sigma * nu[1]
        )
        return float(nu_t), float(phi_t)


def _to_float(f: RatFunc, h) -> float:
    value = eval_at(f, h)
    return value.numerator / value.denominator


def madelung(model: str, sigma: int = 1) -> ModelSpec:
    """
    Madelung form of a shipped lattice model.

    Args:
        model: "DNLS"/"dnls" or "AL"/"al"
        sigma: Sign of the nonlinearity (+1 or -1)

    Returns:
        ModelSpec whose residuals vanish exactly on solutions with nu_n > 0
    """
    name = model.upper()
    if sigma not in (1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    if name == "DNLS":
        return ModelSpec(
            name="DNLS",
            sigma=sigma,
            hopping_background=rational(1),
            hopping_slope=rational(0),
            onsite=rational(1),
            zeta_sq=H**2,
        )
    if name == "AL":
        background = 1 - sigma * H**2
        return ModelSpec(
            name="AL",
            sigma=sigma,
            hopping_background=background,
            hopping_slope=-sigma * H**2,
            onsite=rational(0),
            zeta_sq=H**2 / background,
        )
    raise ValueError(f"Unknown model: {model}. Valid models: dnls, al")


def build_residuals(spec: ModelSpec, order: int) -> Tuple[EpsSeries, EpsSeries]:
    """
    Epsilon expansion of the residual pair (R_nu, R_phi) to the given order.

    Returns:
        Tuple of EpsSeries for the amplitude and phase residuals
    """
    nu0 = shift_expand(NU, 0, order)
    phi0 = shift_expand(PHI, 0, order)
    inv_sqrt_nu = compose(INV_SQRT1P, nu0 - 1)

    sines = EpsSeries(order)
    cosines = EpsSeries(order)
    for direction in (1, -1):
        nu_shift = shift_expand(NU, direction, order)
        beta = shift_expand(PHI, direction, order) - phi0
        sqrt_alpha = compose(SQRT1P, nu0 * nu_shift - 1)
        sqrt_gamma = compose(SQRT1P, nu_shift - 1) * inv_sqrt_nu
        sines = sines + sqrt_alpha * compose(SIN, beta)
        cosines = cosines + sqrt_gamma * compose(COS, beta)

    weight = (nu0 - 1).scale(spec.hopping_slope) + spec.hopping_background
    inv_h2 = 1 / H**2

    r_nu = time_expand(NU, order) + (weight * sines).scale(inv_h2)
    r_phi = (
        time_expand(PHI, order, spec.sigma)
        + inv_h2
        - (weight * cosines).scale(inv_h2 / 2)
        + nu0.scale(spec.onsite * spec.sigma)
    )
    logger.info(
        f"{spec.name}: residual series built to eps^{order} "
        f"({sum(len(r_nu.coefficient(k)) for k in r_nu.powers())} amplitude terms, "
        f"{sum(len(r_phi.coefficient(k)) for k in r_phi.powers())} phase terms)"
    )
    return r_nu, r_phi


def complex_defect(spec: ModelSpec, nu: np.ndarray, phi: np.ndarray, h: float) -> float:
    """
    Residual of the complex lattice equation at f = sqrt(nu) exp(i phi).

    The time derivative of f_n is taken from ``spec.rates``; a vanishing
    defect confirms that the Madelung pair is equivalent to the complex model.
    """
    h0 = float(h)
    f = np.sqrt(nu) * np.exp(1j * phi)
    nu_t, phi_t = spec.rates(nu, phi, h)
    f_t = (nu_t / (2 * np.sqrt(nu[1])) + 1j * np.sqrt(nu[1]) * phi_t) * np.exp(1j * phi[1])
    lhs = 1j * f_t + (f[2] - 2 * f[1] + f[0]) / (2 * h0**2)
    if spec.name == "DNLS":
        rhs = spec.sigma * abs(f[1]) ** 2 * f[1]
    else:
        rhs = spec.sigma / 2 * abs(f[1]) ** 2 * (f[2] + f[0])
    return float(abs(lhs - rhs))


def madelung_defect(spec: ModelSpec, rng: np.random.Generator, trials: int = 20) -> float:
    """Largest complex_defect over random positive amplitudes, phases and spacings."""
    worst = 0.0
    for _ in range(trials):
        nu = rng.uniform(0.2, 2.0, size=3)
        phi = rng.uniform(-np.pi, np.pi, size=3)
        h = float(rng.choice([0.1, 0.25, 0.3, 0.5, 0.7]))
        worst = max(worst, complex_defect(spec, nu, phi, h))
    logger.debug(f"{spec.name}: Madelung defect {worst:.3e} over {trials} trials")
    return worst
