"""Benchmark problems: analytic Hock-Schittkowski-style fixtures and logistic regression."""

from .problems import PROBLEM_NAMES, make_hs_problem, quadratic_problem

__all__ = ["PROBLEM_NAMES", "make_hs_problem", "quadratic_problem"]
