"""Self-switching solutions of the nonlinear von Neumann equation."""
__version__ = "1.0.0"
