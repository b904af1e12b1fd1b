"""bessel-credit: unified equity-credit pricing on squared-Bessel processes.

Subpackages are imported lazily by the consumer; the flat module layout is

    specfun          incomplete-gamma / noncentral chi-square / Bessel / Whittaker
    transform        Laplace inversion and Fourier (Gil-Pelaez) utilities
    bessel_cev       the CEV <-> squared-Bessel dictionary and closed-form kernel
    vanilla_pricing  vanilla calls/puts and default probabilities (CEV closed forms)
    credit_swaps     CDS and equity-default-swap coupons, first-passage transforms
    time_change      Laplace transforms of stochastic clocks (CIR, OU, Hull-White)
    sv_pricing       stochastic-volatility pricing by mixing over clock laws
    mc_oracle        Monte Carlo cross-verification engine
    cli              command-line entry point
"""

__version__ = "0.1.0"
