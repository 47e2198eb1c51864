"""Desk-scale numerical laboratory for the 2D incompressible Euler equation
in complex form: velocity fields split into an explicit far-field part plus
a fast-decaying remainder, with tools to verify how the far-field
coefficients evolve in time."""

__version__ = "0.1.0"
