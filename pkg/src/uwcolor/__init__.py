"""Underwater colour correction with separate direct and backscatter attenuation."""

__version__ = "0.1.0"
