"""Fixed-strike Asian option prices on continuous-time Markov chains.

A model is discretised into a finite generator on a price grid; the Laplace
transform in the strike of the average's call payoff is then available in
closed form and inverted numerically.
"""

from .chain import Chain, Generator, StateGrid, transition_matrix, validate_generator
from .errors import ArgumentError, ConstructionError, DomainError, NumericError
from .inversion import InversionConfig, invert_laplace, invert_vector
from .models import CEV, CGMY, CIR, DEJD, MJD, GridSpec, build_generator, build_grid
from .pricing import (
    Market, PriceResult, PricingRequest, convergence_sweep, price_asian, price_on_chain,
    price_table, table_csv, timing_profile,
)
from .transforms import g_continuous, g_discrete

__all__ = [
    "Chain", "Generator", "StateGrid", "transition_matrix", "validate_generator",
    "ArgumentError", "ConstructionError", "DomainError", "NumericError",
    "InversionConfig", "invert_laplace", "invert_vector",
    "CEV", "CGMY", "CIR", "DEJD", "MJD", "GridSpec", "build_generator", "build_grid",
    "Market", "PriceResult", "PricingRequest", "convergence_sweep", "price_asian", "price_on_chain",
    "price_table", "table_csv", "timing_profile",
    "g_continuous", "g_discrete",
]
