"""Exact formulas and Monte Carlo for the Mabinogion urn and its controlled versions."""

from .exact import binomial, central_prob, to_real
from .mprocess import (
    UrnState,
    absorb_prob_black,
    conditional_expected_time,
    expected_final_black,
    expected_time,
    expected_time_symmetric,
)
from .apolicy import expected_final_black_A, expected_time_A, t_sequence, v_sequence
from .strategies import StrategySpec, exact_value_under_strategy

__version__ = "0.1.0"
