"""AIQL: a meta-model driven query engine for versioned architecture models."""

__version__ = "0.1.0"
