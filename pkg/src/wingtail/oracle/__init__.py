"""Independent numerical references: Fourier pricing, Riccati ODEs, Dupire differences, Monte Carlo."""
from .dupire import PriceGrid, build_grid, dupire_fd, stencil_grid
from .fourier import fourier_call, fourier_put, fourier_tail, gil_pelaez_tail, heston_cf
from .montecarlo import McSummary, mc_terminal, simulate_terminal
from .riccati import OdePath, ode_cf, ode_critical_moment, ode_log_mgf, riccati_blowup, riccati_rk4

__all__ = [name for name in dir() if not name.startswith("_")]
