"""Shared exception types."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid experiment configuration; message lists `path: expected` items."""

    def __init__(self, issues):
        if isinstance(issues, str):
            issues = [issues]
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class NumericsError(RuntimeError):
    """Non-finite value produced during integration.

    ``witness`` locates the first offending interaction as a dict (species
    and cell/particle indices); ``partial`` carries whatever trajectory was
    completed before the failure, when available.
    """

    def __init__(self, message: str, witness=None, partial=None):
        super().__init__(message)
        self.witness = witness or {}
        self.partial = partial
