"""Exact accuracy auditing for wireless network design models."""

__version__ = '1.0.0'
