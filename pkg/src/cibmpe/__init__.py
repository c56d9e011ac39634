"""Exact common-information equilibrium solvers for two-controller stochastic games."""
