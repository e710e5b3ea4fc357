"""Evaluation engine for software process improvement initiatives.

Scopes an evaluation across measurement levels and stakeholder viewpoints,
derives measurement goals, manages baselines and evaluation schedules under
lag/degradation validity windows, and aggregates expert ratings into
subjective improvement scores with radar-chart reporting.
"""

__version__ = "0.1.0"
