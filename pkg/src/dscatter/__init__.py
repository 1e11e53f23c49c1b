"""Scattering data, distorted Fourier transforms and long-time NLS dynamics
for one-dimensional Schrodinger operators ``H = -1/2 d^2/dx^2 + V``."""

__version__ = "0.1.0"
