"""Actionable cognitive twin engine for manufacturing.

An in-memory labeled property graph with ontology conformance, a pattern
query language, rule-based reasoning, simulation and regression models,
and an insight/decision/feedback loop, exposed over HTTP and a CLI.
"""

__version__ = "1.0.0"
