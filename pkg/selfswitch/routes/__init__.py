"""
Routes Package
Click commands for scenario runs, sweeps, figure data and verification.
"""

from selfswitch.routes import reports, simulation

__all__ = ['reports', 'simulation']
