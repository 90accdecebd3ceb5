"""Zero-mode curvature, holonomy and diagram tracking on time-varying Vietoris-Rips filtrations."""

__version__ = "0.1.0"
