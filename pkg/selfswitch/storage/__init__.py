"""Scenario files and CSV output."""
