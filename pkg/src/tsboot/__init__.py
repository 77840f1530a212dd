"""Bootstrap methods for AR(1) and ARCH time series."""

__version__ = "0.1.0"
