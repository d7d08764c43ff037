"""Multi-period de-energization planning under wildfire disruption uncertainty."""

__version__ = "0.1.0"
