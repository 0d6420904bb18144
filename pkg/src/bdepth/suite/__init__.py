"""Seeded randomized property suite."""

from bdepth.suite.runner import CHECKS, SuiteResults, SuiteRunner, run_suite

__all__ = ["CHECKS", "SuiteResults", "SuiteRunner", "run_suite"]
