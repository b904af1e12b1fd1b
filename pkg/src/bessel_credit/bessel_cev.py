"""Dictionary between constant-elasticity diffusions and squared Bessel processes.

A price process with local volatility ``sigma * S**elasticity`` and drift
``rate * S`` is, after removing the deterministic growth ``e**(rate*t)``, a
power of a squared Bessel process run on a deterministic clock:

    S_t = e**(rate*t) * Y(clock(t)) ** power,

where ``Y`` is squared Bessel of dimension ``2 - 1/(1-elasticity)`` started at
``S0**(2*(1-elasticity))``, ``power = 1/(2*(1-elasticity))``, and the clock is
an explicit exponential ramp.  Everything in this module is exact analytics on
top of that mapping: hitting laws of zero (default), their densities, and the
martingale defect that appears for elasticity > 1.

Sign conventions: the single quantity ``zeta(t) = start / (2 * clock(t))``
drives every closed form below; it is positive in all parameter regimes
(either sign of ``rate``, elasticity on either side of 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from .specfun import bessel_I_scaled, gamma_tail, gamma_tail_density

__all__ = [
    "CevParams",
    "SquaredBesselSpec",
    "BesselClockMap",
    "BoundaryClass",
    "cev_to_bessel",
    "boundary_classification",
    "default_probability",
    "default_time_density",
    "hitting_time_sampler",
    "martingality_default",
    "absorbed_mass",
    "stopped_marginal_density",
]


@dataclass(frozen=True)
class CevParams:
    """Constant-elasticity diffusion: dS = rate*S dt + sigma * S**elasticity dW."""

    spot: float
    rate: float
    sigma: float
    elasticity: float

    def __post_init__(self) -> None:
        if not self.spot > 0.0:
            raise ValueError(f"spot must be positive, got {self.spot}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.rate):
            raise ValueError(f"rate must be finite, got {self.rate}")
        if not math.isfinite(self.elasticity):
            raise ValueError(f"elasticity must be finite, got {self.elasticity}")


@dataclass(frozen=True)
class SquaredBesselSpec:
    """Squared Bessel process of a given (real) dimension, absorbed at zero
    whenever dimension < 2."""

    dimension: float
    start: float

    def __post_init__(self) -> None:
        if not self.start >= 0.0:
            raise ValueError(f"start must be nonnegative, got {self.start}")
        if not math.isfinite(self.dimension):
            raise ValueError(f"dimension must be finite, got {self.dimension}")


@dataclass(frozen=True)
class BesselClockMap:
    """Image of a CEV diffusion under the dictionary.

    ``clock`` maps calendar time to squared-Bessel time; ``clock_rate`` is its
    derivative (used by densities).  ``growth(t)`` is the deterministic factor
    ``e**(rate*t)`` and ``power`` the exponent applied to the Bessel value.
    """

    bessel: SquaredBesselSpec
    clock: Callable[[float], float]
    clock_rate: Callable[[float], float] = field(repr=False)
    power: float = 1.0
    growth: Callable[[float], float] = field(default=math.exp, repr=False)

    def zeta(self, t: float) -> float:
        """Canonical hitting-law argument start/(2*clock(t))."""
        if not t > 0.0:
            raise ValueError(f"time must be positive, got {t}")
        return self.bessel.start / (2.0 * self.clock(t))


class BoundaryClass(Enum):
    """Feller classification of the origin for the price process."""

    REACHED_REFLECTING = "reached-reflecting"
    REACHED_ABSORBING = "reached-absorbing"
    UNREACHABLE = "unreachable"


def cev_to_bessel(params: CevParams) -> BesselClockMap:
    """Map CEV parameters to the squared-Bessel representation.

    Raises ValueError at elasticity == 1 (lognormal; the dictionary
    degenerates -- dimension and power both blow up).
    """
    alpha = params.elasticity
    if alpha == 1.0:
        raise ValueError("elasticity == 1 is the lognormal boundary; "
                         "the squared-Bessel dictionary does not apply")
    one_minus = 1.0 - alpha
    dimension = 2.0 - 1.0 / one_minus
    start = params.spot ** (2.0 * one_minus)
    power = 1.0 / (2.0 * one_minus)
    r, sig = params.rate, params.sigma

    if r == 0.0:
        slope = one_minus * one_minus * sig * sig

        def clock(t: float, _s: float = slope) -> float:
            return _s * t

        def clock_rate(t: float, _s: float = slope) -> float:
            return _s

    else:
        # expm1 keeps full precision down to |rate*t| ~ ulp, so no series
        # switch is needed away from rate == 0 exactly.
        coeff = (alpha - 1.0) * sig * sig / (2.0 * r)
        qrate = 2.0 * (alpha - 1.0) * r

        def clock(t: float, _c: float = coeff, _q: float = qrate) -> float:
            return _c * math.expm1(_q * t)

        def clock_rate(t: float, _s: float = one_minus * one_minus * sig * sig,
                       _q: float = qrate) -> float:
            return _s * math.exp(_q * t)

    rate = params.rate

    def growth(t: float, _r: float = rate) -> float:
        return math.exp(_r * t)

    return BesselClockMap(
        bessel=SquaredBesselSpec(dimension=dimension, start=start),
        clock=clock,
        clock_rate=clock_rate,
        power=power,
        growth=growth,
    )


def boundary_classification(params: CevParams) -> BoundaryClass:
    alpha = params.elasticity
    if alpha >= 1.0:
        return BoundaryClass.UNREACHABLE
    if alpha <= 0.5:
        return BoundaryClass.REACHED_REFLECTING
    return BoundaryClass.REACHED_ABSORBING


def default_probability(params: CevParams, horizon: float) -> float:
    """P(the price, absorbed at its first zero, has defaulted by `horizon`).

    Only meaningful for elasticity < 1 (zero is unreachable otherwise).
    """
    if not params.elasticity < 1.0:
        raise ValueError("default requires elasticity < 1; zero is "
                         f"unreachable at elasticity={params.elasticity}")
    if not horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    cmap = cev_to_bessel(params)
    shape = 1.0 / (2.0 * (1.0 - params.elasticity))
    return gamma_tail(shape, cmap.zeta(horizon))


def default_probability_limit(params: CevParams) -> float:
    """Long-horizon limit of `default_probability` (1 when rate <= 0)."""
    if not params.elasticity < 1.0:
        raise ValueError("default requires elasticity < 1")
    if params.rate <= 0.0:
        return 1.0
    one_minus = 1.0 - params.elasticity
    zeta_inf = (params.rate * params.spot ** (2.0 * one_minus)
                / (one_minus * params.sigma * params.sigma))
    return gamma_tail(1.0 / (2.0 * one_minus), zeta_inf)


def default_time_density(params: CevParams, t: float) -> float:
    """Density of the default time at t (elasticity < 1).

    Chain rule through the canonical argument:
        f(t) = g(shape, zeta_t) * zeta_t * clock'(t)/clock(t),
    with g the regularized gamma density.  Integrating over (0, T]
    recovers `default_probability(params, T)`.
    """
    if not params.elasticity < 1.0:
        raise ValueError("default requires elasticity < 1")
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    cmap = cev_to_bessel(params)
    shape = 1.0 / (2.0 * (1.0 - params.elasticity))
    z = cmap.zeta(t)
    return gamma_tail_density(shape, z) * z * cmap.clock_rate(t) / cmap.clock(t)


def hitting_time_sampler(
    spec: SquaredBesselSpec,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> Union[float, np.ndarray]:
    """Draw the first-hitting time of zero for a squared Bessel process.

    Exact: T0 has the law start/(2*Z) with Z ~ Gamma(1 - dimension/2, 1).
    Requires dimension < 2 (zero is not reached otherwise) and start > 0.
    """
    if not spec.dimension < 2.0:
        raise ValueError("zero is unreachable for dimension >= 2, got "
                         f"{spec.dimension}")
    if not spec.start > 0.0:
        raise ValueError("hitting time from start == 0 is degenerate")
    shape = 1.0 - 0.5 * spec.dimension
    z = rng.standard_gamma(shape, size=size)
    return spec.start / (2.0 * z)


def martingality_default(params: CevParams, t: float) -> float:
    """Martingale defect spot*P(dual-dimension hitting <= clock(t)) for
    elasticity > 1: the gap between the spot and the discounted expectation
    of the price.  Zero is unreachable there, yet the price is only a strict
    local martingale after discounting; this returns the lost mass."""
    if not params.elasticity > 1.0:
        raise ValueError("martingale defect requires elasticity > 1, got "
                         f"{params.elasticity}")
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    cmap = cev_to_bessel(params)
    shape = 1.0 / (2.0 * (params.elasticity - 1.0))
    return params.spot * gamma_tail(shape, cmap.zeta(t))


def absorbed_mass(spec: SquaredBesselSpec, t: float) -> float:
    """Mass at zero accumulated by time t for dimension < 2 (the atom of the
    absorbed marginal).  Always computed from the closed form, never by
    differencing the continuous part."""
    if not spec.dimension < 2.0:
        raise ValueError("no absorption for dimension >= 2")
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if spec.start == 0.0:
        return 1.0
    return gamma_tail(1.0 - 0.5 * spec.dimension, spec.start / (2.0 * t))


def stopped_marginal_density(spec: SquaredBesselSpec, t: float, y: float) -> float:
    """Continuous part of the time-t marginal of the squared Bessel process,
    absorbed at zero when dimension < 2.

    For dimension >= 2 this is the full (unrestricted) transition density.
    The kernel is evaluated through the exponentially scaled Bessel I so the
    only surviving exponent is -(sqrt(x)-sqrt(y))**2/(2t).
    """
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if not y > 0.0:
        raise ValueError(f"density argument must be positive, got {y}")
    x = spec.start
    nu = 0.5 * spec.dimension - 1.0
    if x == 0.0:
        if spec.dimension < 2.0:
            return 0.0  # started absorbed: all mass stays at the atom
        # started at the entrance boundary: gamma density in y/(2t)
        return math.exp((nu) * math.log(y / (2.0 * t)) - y / (2.0 * t)
                        - math.lgamma(nu + 1.0)) / (2.0 * t)
    order = abs(nu) if spec.dimension < 2.0 else nu
    arg = math.sqrt(x * y) / t
    expo = (0.5 * nu * math.log(y / x)
            - (math.sqrt(x) - math.sqrt(y)) ** 2 / (2.0 * t))
    return math.exp(expo) * bessel_I_scaled(order, arg) / (2.0 * t)
