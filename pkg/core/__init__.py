"""Core package for configuration, logging, errors and calibrated constants."""
