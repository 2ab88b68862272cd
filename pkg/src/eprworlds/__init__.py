"""Collapse-free EPR/Bell simulator in which the measuring devices are quantum registers."""

__version__ = "0.1.0"
