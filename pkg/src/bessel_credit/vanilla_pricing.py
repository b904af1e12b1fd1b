"""European option prices under the absorbed constant-elasticity model.

Two layers:

* ``cev_call`` / ``cev_put`` — closed forms for the diffusion itself, written
  in the canonical clock variables of :mod:`bessel_credit.bessel_cev`.
* ``bessel_kernel_call`` / ``bessel_kernel_put`` — the same prices
  parametrized by an arbitrary realized clock value ``x`` and squared-Bessel
  dimension.  Stochastic-clock models integrate these kernels against the law
  of the clock; an optional exponential tilt (weight, normalizer) implements
  leverage-style correlation between clock and price.

Both layers reduce to noncentral chi-square tails; the in-the-money leg uses
the upper tail and the out-of-the-money leg the directly computed lower tail,
so no 1 - Q cancellation occurs anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .bessel_cev import CevParams, cev_to_bessel
from .specfun import ncchi2_P, ncchi2_Q

__all__ = [
    "OptionContract",
    "BesselKernelArgs",
    "cev_call",
    "cev_put",
    "bessel_kernel_call",
    "bessel_kernel_put",
]


@dataclass(frozen=True)
class OptionContract:
    strike: float
    maturity: float
    side: str = "call"

    def __post_init__(self) -> None:
        if not self.strike > 0.0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if not self.maturity > 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if self.side not in ("call", "put"):
            raise ValueError(f"side must be 'call' or 'put', got {self.side!r}")


@dataclass(frozen=True)
class BesselKernelArgs:
    """Arguments of the clock-indexed price kernel.

    ``corr_exponent`` is the realized tilt exponent (correlation times the
    driver value) and ``corr_normalizer`` its expectation under the mixing
    law; the price multiplier is exp(corr_exponent)/corr_normalizer.  Leaving
    both at their defaults is the uncorrelated case (multiplier exactly 1).
    """

    clock_value: float
    dimension: float
    strike: float
    maturity: float
    spot: float
    rate: float = 0.0
    corr_exponent: float = 0.0
    corr_normalizer: float = 1.0

    def __post_init__(self) -> None:
        if not self.clock_value > 0.0:
            raise ValueError(f"clock value must be positive, got {self.clock_value}")
        if not self.dimension < 2.0:
            raise ValueError(f"dimension must be < 2, got {self.dimension}")
        if not self.strike > 0.0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if not self.maturity > 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if not self.spot > 0.0:
            raise ValueError(f"spot must be positive, got {self.spot}")
        if not self.corr_normalizer > 0.0:
            raise ValueError("correlation normalizer must be positive, got "
                             f"{self.corr_normalizer}")

    @property
    def multiplier(self) -> float:
        return math.exp(self.corr_exponent) / self.corr_normalizer


def _kernel_pair(x: float, dim: float, strike: float, maturity: float,
                 spot: float, rate: float) -> Tuple[float, float, float]:
    """Raw C0, P0 at clock value x, plus the discounted strike."""
    two_over = 2.0 / (2.0 - dim)
    disc_k = strike * math.exp(-rate * maturity)
    k_arg = disc_k ** two_over / x
    s_arg = spot ** two_over / x
    # in-the-money leg: spot measure, dimension 4 - dim; out leg: 2 - dim
    q_spot = ncchi2_Q(k_arg, 4.0 - dim, s_arg)
    p_strike = ncchi2_P(s_arg, 2.0 - dim, k_arg)
    q_strike = ncchi2_Q(s_arg, 2.0 - dim, k_arg)
    p_spot = ncchi2_P(k_arg, 4.0 - dim, s_arg)
    call = spot * q_spot - disc_k * p_strike
    put = disc_k * q_strike - spot * p_spot
    return max(call, 0.0), max(put, 0.0), disc_k


def bessel_kernel_call(args: BesselKernelArgs) -> float:
    """Clock-indexed call price; with a tilt, m * C0(x, dim, K/m, T)."""
    m = args.multiplier
    call, _, _ = _kernel_pair(args.clock_value, args.dimension,
                              args.strike / m, args.maturity,
                              args.spot, args.rate)
    return m * call


def bessel_kernel_put(args: BesselKernelArgs) -> float:
    m = args.multiplier
    _, put, _ = _kernel_pair(args.clock_value, args.dimension,
                             args.strike / m, args.maturity,
                             args.spot, args.rate)
    return m * put


def _cev_prices(params: CevParams, contract: OptionContract) -> Tuple[float, float]:
    if not params.elasticity < 1.0:
        raise ValueError("closed-form vanilla prices require elasticity < 1, "
                         f"got {params.elasticity}")
    cmap = cev_to_bessel(params)
    clock_T = cmap.clock(contract.maturity)
    disc_k = contract.strike * math.exp(-params.rate * contract.maturity)
    one_minus = 1.0 - params.elasticity
    z = disc_k ** (2.0 * one_minus) / clock_T
    two_zeta = 2.0 * cmap.zeta(contract.maturity)
    dof_spot = 2.0 + 1.0 / one_minus
    dof_strike = 1.0 / one_minus
    call = (params.spot * ncchi2_Q(z, dof_spot, two_zeta)
            - disc_k * ncchi2_P(two_zeta, dof_strike, z))
    put = (disc_k * ncchi2_Q(two_zeta, dof_strike, z)
           - params.spot * ncchi2_P(z, dof_spot, two_zeta))
    return max(call, 0.0), max(put, 0.0)


def cev_call(params: CevParams, contract: OptionContract) -> float:
    """Price of a European call on the absorbed CEV diffusion."""
    return _cev_prices(params, contract)[0]


def cev_put(params: CevParams, contract: OptionContract) -> float:
    """Price of a European put on the absorbed CEV diffusion.

    Absorption pays nothing on the call side but the full strike on the put
    side, so put values dominate strike * discount * default probability.
    """
    return _cev_prices(params, contract)[1]
