"""Cross-section Fourier modes, residual field, forcing and mode ODE solutions."""
