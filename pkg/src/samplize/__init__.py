"""Numerical simulator and experiment harness for pure-state closeness estimation.

The package simulates three ways of estimating the trace distance and square
root fidelity between two pure quantum states:

* repeated SWAP tests (the quartic-sample baseline),
* phase estimation of a product of two Householder reflections with exact
  reflection oracles (the query model), and
* the same phase estimation with every reflection query replaced by a
  density-matrix-exponentiation channel built from fresh state copies (the
  sample model), with per-oracle sample metering.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateOverlapError,
    DimensionMismatchError,
    NonHermitianError,
    RoundsCapExceededError,
    SamplizeError,
    StateValidationError,
    UnboundOracleError,
)
from .states import (
    DensityOp,
    PureState,
    basis_state,
    fidelity_exact,
    haar_random,
    plus_state,
    psi_x,
    trace_distance_exact,
    zero_state,
)
from .reflections import ProductSpectrum, Reflection, householder, product_spectrum
from .estimators import (
    Estimate,
    folklore_estimate,
    helstrom_success,
    query_estimate,
    samplized_estimate,
    swap_test_prob,
)
from .samplizer import Channel, LmrConfig, SampleLedger, calibrate_rounds, samplize

__all__ = [
    "Channel",
    "ConfigError",
    "DegenerateOverlapError",
    "DensityOp",
    "DimensionMismatchError",
    "Estimate",
    "LmrConfig",
    "NonHermitianError",
    "ProductSpectrum",
    "PureState",
    "Reflection",
    "RoundsCapExceededError",
    "SampleLedger",
    "SamplizeError",
    "StateValidationError",
    "UnboundOracleError",
    "basis_state",
    "calibrate_rounds",
    "fidelity_exact",
    "folklore_estimate",
    "haar_random",
    "helstrom_success",
    "householder",
    "plus_state",
    "product_spectrum",
    "psi_x",
    "query_estimate",
    "samplize",
    "samplized_estimate",
    "swap_test_prob",
    "trace_distance_exact",
    "zero_state",
]
