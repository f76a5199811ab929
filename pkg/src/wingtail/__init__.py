"""Extreme-strike asymptotics of tails, local and implied volatility from moment explosion."""
from .core import (
    ConjugatePoint,
    MgfCurve,
    Side,
    bs_call,
    bs_put,
    implied_total_vol,
    implied_total_vol_put,
    lee_slope,
    legendre,
    mgf_derivatives,
)
from .errors import WingtailError
from .tauberian import TailEstimate, ratio_correction, tail_expansion
from .wings import WingGuards, WingPoint, implied_vol_wing, local_vol_wing

__version__ = "0.1.0"

__all__ = [
    "ConjugatePoint", "MgfCurve", "Side", "bs_call", "bs_put", "implied_total_vol", "implied_total_vol_put",
    "lee_slope", "legendre", "mgf_derivatives", "WingtailError", "TailEstimate", "ratio_correction",
    "tail_expansion", "WingGuards", "WingPoint", "implied_vol_wing", "local_vol_wing",
]
