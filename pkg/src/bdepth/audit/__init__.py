"""Invariant reports shared by every check."""

from bdepth.audit.report import AuditMetric, InvariantReport

__all__ = ["AuditMetric", "InvariantReport"]
