"""Model adapters: Heston, SVI slices and Stein-Stein expansions."""
from .heston import (
    CriticalMoment,
    HestonParams,
    MgfExpansion,
    extract_expansion,
    heston_critical_moment,
    heston_curve,
    heston_expansion_coeffs,
    heston_explosion_time,
    heston_implied_wing,
    heston_local_vol_wing,
    heston_log_mgf,
    heston_mu_hat,
    heston_nu_tilde,
    richardson,
)
from .steinstein import SteinSteinCoeffs, expansion_curve, pole_curve, stein_stein_curve, stein_stein_expansion
from .svi import (
    SviCriticalMoments,
    SviSlice,
    svi_critical_moments,
    svi_local_vol_wing,
    svi_mgf_asymptote,
    svi_mu_star,
    svi_price_expansion,
)

__all__ = [name for name in dir() if not name.startswith("_")]
